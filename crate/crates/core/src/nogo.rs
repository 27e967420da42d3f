//! Correspondence postulates between classical variables and quantum
//! observables, and the reduction of the singlet no-go argument to a
//! realizability question.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::probspace::{
    bell_functional, BellReport, FiniteProbabilitySpace, RandomVariable, SignVariable,
};
use crate::quantum::{
    pauli, quantum_bell_expression, singlet_correlation, spectrum, ComplexMatrix, DensityOperator,
    Pauli,
};
use crate::realizability::{
    decide, FeasibilityOutcome, PairConstraint, RealizabilityProblem, Verdict,
};

/// Value-matching tolerance between a variable's range and a spectrum.
pub const RANGE_TOL: f64 = 1e-9;

/// Named registries plus the map `j` from classical variables to observables
/// and from probability measures to density operators.
#[derive(Debug, Default, Clone)]
pub struct CorrespondenceRecord {
    variables: BTreeMap<String, RandomVariable>,
    observables: BTreeMap<String, ComplexMatrix>,
    spaces: BTreeMap<String, FiniteProbabilitySpace>,
    states: BTreeMap<String, DensityOperator>,
    pairs: BTreeMap<String, String>,
    statistical_pairs: BTreeMap<String, String>,
}

impl CorrespondenceRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: &str, x: RandomVariable) {
        self.variables.insert(name.to_owned(), x);
    }

    pub fn add_observable(&mut self, name: &str, a: ComplexMatrix) {
        self.observables.insert(name.to_owned(), a);
    }

    pub fn add_space(&mut self, name: &str, p: FiniteProbabilitySpace) {
        self.spaces.insert(name.to_owned(), p);
    }

    pub fn add_state(&mut self, name: &str, rho: DensityOperator) {
        self.states.insert(name.to_owned(), rho);
    }

    /// Records `j(variable) = observable`. A variable already mapped
    /// elsewhere is rejected, since `j` is a function.
    pub fn map_variable(&mut self, variable: &str, observable: &str) -> Result<()> {
        if !self.variables.contains_key(variable) {
            return Err(Error::InvalidProblem(format!(
                "unknown variable {variable}"
            )));
        }
        if !self.observables.contains_key(observable) {
            return Err(Error::InvalidProblem(format!(
                "unknown observable {observable}"
            )));
        }
        match self.pairs.get(variable) {
            Some(existing) if existing != observable => Err(Error::InvalidProblem(format!(
                "variable {variable} already maps to {existing}"
            ))),
            _ => {
                self.pairs
                    .insert(variable.to_owned(), observable.to_owned());
                Ok(())
            }
        }
    }

    pub fn map_space(&mut self, space: &str, state: &str) -> Result<()> {
        if !self.spaces.contains_key(space) {
            return Err(Error::InvalidProblem(format!("unknown space {space}")));
        }
        if !self.states.contains_key(state) {
            return Err(Error::InvalidProblem(format!("unknown state {state}")));
        }
        match self.statistical_pairs.get(space) {
            Some(existing) if existing != state => Err(Error::InvalidProblem(format!(
                "space {space} already maps to {existing}"
            ))),
            _ => {
                self.statistical_pairs
                    .insert(space.to_owned(), state.to_owned());
                Ok(())
            }
        }
    }

    /// `j^{-1}(observable)`: every variable mapped onto it, by name.
    pub fn preimage(&self, observable: &str) -> Vec<&str> {
        self.pairs
            .iter()
            .filter(|(_, o)| o.as_str() == observable)
            .map(|(v, _)| v.as_str())
            .collect()
    }

    pub fn state_preimage(&self, state: &str) -> Vec<&str> {
        self.statistical_pairs
            .iter()
            .filter(|(_, s)| s.as_str() == state)
            .map(|(p, _)| p.as_str())
            .collect()
    }

    /// The map `i`: one representative from `j^{-1}(observable)`. On finite
    /// registries the choice is constructive (first name in order).
    pub fn choose_preimage(&self, observable: &str) -> Option<&str> {
        self.preimage(observable).into_iter().next()
    }

    /// Injectivity of `j` on variables (one half of the bijectivity postulate).
    pub fn is_injective(&self) -> bool {
        let mut images: Vec<&String> = self.pairs.values().collect();
        let before = images.len();
        images.sort();
        images.dedup();
        images.len() == before
    }

    /// Every registered observable has a preimage (the other half).
    pub fn is_surjective(&self) -> bool {
        self.observables
            .keys()
            .all(|o| !self.preimage(o).is_empty())
    }

    /// The image of `j` contains a matrix equal to `a` within `tol`.
    pub fn image_contains(&self, a: &ComplexMatrix, tol: f64) -> bool {
        self.pairs
            .values()
            .filter_map(|o| self.observables.get(o))
            .any(|m| m.max_abs_diff(a) <= tol)
    }

    pub fn state_image_contains(&self, rho: &DensityOperator, tol: f64) -> bool {
        self.statistical_pairs
            .values()
            .filter_map(|s| self.states.get(s))
            .any(|m| m.matrix().max_abs_diff(rho.matrix()) <= tol)
    }

    /// Range-of-values check over every recorded pair. Names of the pairs
    /// that fail are returned.
    pub fn range_violations(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for (v, o) in &self.pairs {
            if !check_range_postulate(&self.variables[v], &self.observables[o])? {
                out.push(v.clone());
            }
        }
        Ok(out)
    }
}

/// True iff the distinct values of `x` coincide with the spectrum of `a`
/// as sets, matched to within [`RANGE_TOL`].
pub fn check_range_postulate(x: &RandomVariable, a: &ComplexMatrix) -> Result<bool> {
    let eig = spectrum(a)?;
    let distinct = |vals: &[f64]| {
        let mut v = vals.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= RANGE_TOL);
        v
    };
    let values = distinct(x.values());
    let eig = distinct(&eig);
    let covered = |from: &[f64], into: &[f64]| {
        from.iter()
            .all(|v| into.iter().any(|w| (v - w).abs() <= RANGE_TOL))
    };
    Ok(covered(&values, &eig) && covered(&eig, &values))
}

/// `x = -x'` on every atom of positive weight.
pub fn check_anticorrelation(
    space: &FiniteProbabilitySpace,
    x: &SignVariable,
    x_prime: &SignVariable,
) -> Result<bool> {
    for v in [x, x_prime] {
        if v.len() != space.atom_count() {
            return Err(Error::DimensionMismatch {
                expected: space.atom_count(),
                found: v.len(),
            });
        }
    }
    Ok(space
        .weights()
        .iter()
        .zip(x.values().iter().zip(x_prime.values()))
        .all(|(&w, (&a, &b))| w == 0.0 || a == -b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    /// Ascending spectrum of `sigma_x + sigma_z`.
    pub operator_sum_spectrum: Vec<f64>,
    /// Every `e1 + e2` with `e1`, `e2` eigenvalues of the summands.
    pub eigenvalue_sums: Vec<f64>,
    pub disjoint: bool,
}

/// The spectrum of `sigma_x + sigma_z` against sums of individual
/// eigenvalues: a sum of ±1-valued variables cannot take the values of the
/// operator sum, so additivity of `j` fails for non-commuting observables.
pub fn vn_additivity_counterexample() -> AdditivityReport {
    let x = pauli(Pauli::X);
    let z = pauli(Pauli::Z);
    let operator_sum_spectrum = spectrum(&(&x + &z)).expect("Hermitian");
    let ex = spectrum(&x).expect("Hermitian");
    let ez = spectrum(&z).expect("Hermitian");
    let mut eigenvalue_sums: Vec<f64> = ex
        .iter()
        .flat_map(|a| ez.iter().map(move |b| (a + b).round()))
        .collect();
    eigenvalue_sums.sort_by(f64::total_cmp);
    eigenvalue_sums.dedup();
    let disjoint = operator_sum_spectrum
        .iter()
        .all(|l| eigenvalue_sums.iter().all(|s| (l - s).abs() > RANGE_TOL));
    AdditivityReport {
        operator_sum_spectrum,
        eigenvalue_sums,
        disjoint,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Conclusion {
    ClassicalModelExists,
    NoClassicalModel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoGoVerdict {
    pub angles: (f64, f64, f64),
    /// Singlet correlations `E'(t1,t2)`, `E'(t3,t2)`, `E'(t1,t3)`.
    pub quantum_correlations: (f64, f64, f64),
    /// Unprimed classical targets `c12`, `c32`, `c13` after the sign flip.
    pub classical_targets: (f64, f64, f64),
    pub quantum_report: BellReport,
    pub classical_outcome: FeasibilityOutcome,
    pub conclusion: Conclusion,
}

impl NoGoVerdict {
    /// `lhs - rhs` of the quantum expression; positive means violation.
    pub fn violation_margin(&self) -> f64 {
        self.quantum_report.lhs - self.quantum_report.rhs
    }
}

/// Singlet correlations, rewritten through perfect anti-correlation
/// (`xi'_t = -xi_t`) into targets for three unprimed variables, then posed
/// as a realizability problem. Variable indices 0, 1, 2 stand for the angles
/// `theta1`, `theta2`, `theta3`.
pub fn theorem4_pipeline(theta1: f64, theta2: f64, theta3: f64) -> NoGoVerdict {
    let e12 = singlet_correlation(theta1, theta2);
    let e32 = singlet_correlation(theta3, theta2);
    let e13 = singlet_correlation(theta1, theta3);
    let (c12, c32, c13) = (clamp_unit(-e12), clamp_unit(-e32), clamp_unit(-e13));

    let problem = RealizabilityProblem::new(
        3,
        vec![
            PairConstraint {
                i: 0,
                j: 1,
                correlation: c12,
            },
            PairConstraint {
                i: 2,
                j: 1,
                correlation: c32,
            },
            PairConstraint {
                i: 0,
                j: 2,
                correlation: c13,
            },
        ],
        Vec::new(),
    )
    .expect("singlet targets lie in [-1, 1]");
    let classical_outcome = decide(&problem);
    let conclusion = match classical_outcome.verdict {
        Verdict::Feasible => Conclusion::ClassicalModelExists,
        Verdict::Infeasible => Conclusion::NoClassicalModel,
    };
    NoGoVerdict {
        angles: (theta1, theta2, theta3),
        quantum_correlations: (e12, e32, e13),
        classical_targets: (c12, c32, c13),
        quantum_report: quantum_bell_expression(theta1, theta2, theta3),
        classical_outcome,
        conclusion,
    }
}

// trace algebra can overshoot |E| = 1 by an ulp
fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Checks a feasible verdict's witness as a classical model: reloaded as a
/// finite space with coordinate variables it must reproduce the targets and
/// satisfy the covariation Bell inequality.
pub fn verify_witness(verdict: &NoGoVerdict, tol: f64) -> Result<Option<BellReport>> {
    let Some(model) = verdict.classical_outcome.witness_model(3) else {
        return Ok(None);
    };
    let (space, vars) = model?;
    let cov = |a: &SignVariable, b: &SignVariable| {
        crate::probspace::covariation(&space, &a.to_random_variable(), &b.to_random_variable())
    };
    let (c12, c32, c13) = verdict.classical_targets;
    for (got, want) in [
        (cov(&vars[0], &vars[1])?, c12),
        (cov(&vars[2], &vars[1])?, c32),
        (cov(&vars[0], &vars[2])?, c13),
    ] {
        if (got - want).abs() > tol {
            return Err(Error::InvalidProblem(format!(
                "witness reproduces {got}, target {want}"
            )));
        }
    }
    bell_functional(&space, &vars[0], &vars[1], &vars[2]).map(Some)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub theta2: f64,
    pub theta3: f64,
    pub quantum_lhs: f64,
    pub quantum_rhs: f64,
    /// `quantum_lhs - quantum_rhs`.
    pub margin: f64,
    pub verdict: Verdict,
}

/// Pipeline over `theta1 = 0` and `(theta2, theta3)` on a uniform
/// `grid_size x grid_size` grid of `[0, 2pi)^2`, row-major in `theta2`.
pub fn angle_scan(grid_size: usize) -> Result<Vec<ScanRow>> {
    if grid_size < 2 {
        return Err(Error::InvalidProblem(format!(
            "grid size {grid_size} must be at least 2"
        )));
    }
    let step = TAU / grid_size as f64;
    Ok((0..grid_size * grid_size)
        .into_par_iter()
        .map(|k| {
            let theta2 = (k / grid_size) as f64 * step;
            let theta3 = (k % grid_size) as f64 * step;
            let v = theorem4_pipeline(0.0, theta2, theta3);
            ScanRow {
                theta2,
                theta3,
                quantum_lhs: v.quantum_report.lhs,
                quantum_rhs: v.quantum_report.rhs,
                margin: v.violation_margin(),
                verdict: v.classical_outcome.verdict,
            }
        })
        .collect())
}
