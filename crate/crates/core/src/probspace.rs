//! Finite Kolmogorov probability spaces.
//!
//! The sample space is a finite set of atoms and the sigma-algebra is its
//! power set, so every integral is an exact weighted sum. Covariation here is
//! the raw mixed moment `<u, v> = sum_w P(w) u(w) v(w)`, not a centered
//! covariance; the three-term Bell inequality is stated for that quantity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance accepted on the weight sum at construction.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Tolerance used when asserting invariants after construction.
pub const ASSERT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteProbabilitySpace {
    weights: Vec<f64>,
}

impl FiniteProbabilitySpace {
    /// Validates `weights` as a probability vector. A sum within `1e-9` of one
    /// is rescaled to one; anything further off is rejected.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (index, &weight) in weights.iter().enumerate() {
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::NegativeWeight { index, weight });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::WeightsNotNormalized { sum });
        }
        let weights = if sum == 1.0 {
            weights
        } else {
            weights.into_iter().map(|w| w / sum).collect()
        };
        Ok(Self { weights })
    }

    pub fn uniform(atom_count: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::EmptySpace);
        }
        Self::new(vec![1.0 / atom_count as f64; atom_count])
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.atom_count() {
            return Err(Error::DimensionMismatch {
                expected: self.atom_count(),
                found: len,
            });
        }
        Ok(())
    }

    /// `sum_w P(w) f(w)` for an arbitrary per-atom integrand.
    fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, &w)| w * f(i))
            .sum()
    }
}

/// A real-valued function on the atoms of a space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RandomVariable(Vec<f64>);

impl RandomVariable {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &RandomVariable, beta: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(u, w)| alpha * u + beta * w)
                .collect(),
        ))
    }
}

impl From<Vec<f64>> for RandomVariable {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// A random variable taking only the values +1 and -1, checked exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SignVariable(Vec<i8>);

impl SignVariable {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        for (index, &v) in values.iter().enumerate() {
            if v != 1 && v != -1 {
                return Err(Error::NotSign {
                    index,
                    value: v as f64,
                });
            }
        }
        Ok(Self(values))
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                if v == 1.0 {
                    Ok(1)
                } else if v == -1.0 {
                    Ok(-1)
                } else {
                    Err(Error::NotSign { index, value: v })
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_random_variable(&self) -> RandomVariable {
        RandomVariable(self.0.iter().map(|&v| v as f64).collect())
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&v| -v).collect())
    }
}

/// `E[x] = sum_w P(w) x(w)`.
pub fn expectation(space: &FiniteProbabilitySpace, x: &RandomVariable) -> Result<f64> {
    space.check_len(x.len())?;
    Ok(space.integrate(|i| x.0[i]))
}

/// The raw mixed moment `<u, v> = sum_w P(w) u(w) v(w)`.
pub fn covariation(
    space: &FiniteProbabilitySpace,
    u: &RandomVariable,
    v: &RandomVariable,
) -> Result<f64> {
    space.check_len(u.len())?;
    space.check_len(v.len())?;
    Ok(space.integrate(|i| u.0[i] * v.0[i]))
}

fn sign_covariation(space: &FiniteProbabilitySpace, u: &SignVariable, v: &SignVariable) -> f64 {
    space.integrate(|i| (u.0[i] * v.0[i]) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellReport {
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
    pub holds: bool,
    /// `rhs - lhs`; negative when the inequality is violated.
    pub margin: f64,
}

impl BellReport {
    pub fn from_sides(delta: f64, rhs: f64) -> Self {
        let lhs = delta.abs();
        Self {
            lhs,
            rhs,
            delta,
            holds: lhs <= rhs + ASSERT_TOL,
            margin: rhs - lhs,
        }
    }
}

/// Evaluates `|<a,b> - <c,b>| <= 1 - <a,c>` on one space.
pub fn bell_functional(
    space: &FiniteProbabilitySpace,
    a: &SignVariable,
    b: &SignVariable,
    c: &SignVariable,
) -> Result<BellReport> {
    for x in [a, b, c] {
        space.check_len(x.len())?;
    }
    let delta = sign_covariation(space, a, b) - sign_covariation(space, c, b);
    let rhs = 1.0 - sign_covariation(space, a, c);
    Ok(BellReport::from_sides(delta, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofLink {
    pub name: &'static str,
    pub left: f64,
    pub right: f64,
    pub holds: bool,
}

/// Intermediate quantities of the covariation Bell inequality proof, in order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProofTrace {
    /// `<a,b> - <c,b>`.
    pub delta: f64,
    /// `integral of (a - c) b dP`, the same quantity by linearity.
    pub delta_by_linearity: f64,
    /// Every atom satisfies `a(w)^2 = 1`.
    pub integrand_identity_check: bool,
    /// `integral of (1 - a c) a b dP`, equal to delta once `a^2 = 1` is used.
    pub rewritten_delta: f64,
    /// `integral of (1 - a c) dP`.
    pub majorant: f64,
    /// `1 - <a,c>`.
    pub rhs: f64,
    pub links: Vec<ProofLink>,
}

impl ProofTrace {
    pub fn chain_holds(&self) -> bool {
        self.integrand_identity_check && self.links.iter().all(|l| l.holds)
    }

    pub fn steps(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("delta", self.delta),
            ("delta_by_linearity", self.delta_by_linearity),
            ("rewritten_delta", self.rewritten_delta),
            ("abs_delta", self.delta.abs()),
            ("majorant", self.majorant),
            ("rhs", self.rhs),
        ]
    }
}

/// Replays the proof step by step. `a` must satisfy `a(w)^2 = 1` on every
/// atom, and `b`, `c` must be ±1 valued.
pub fn bell_proof_trace(
    space: &FiniteProbabilitySpace,
    a: &RandomVariable,
    b: &RandomVariable,
    c: &RandomVariable,
) -> Result<ProofTrace> {
    for x in [a, b, c] {
        space.check_len(x.len())?;
    }
    if let Some((index, &value)) = a.0.iter().enumerate().find(|(_, &v)| v * v != 1.0) {
        return Err(Error::IdentityViolated { index, value });
    }
    for x in [b, c] {
        SignVariable::from_f64(&x.0)?;
    }

    let delta = covariation(space, a, b)? - covariation(space, c, b)?;
    let delta_by_linearity = space.integrate(|i| (a.0[i] - c.0[i]) * b.0[i]);
    let rewritten_delta = space.integrate(|i| (1.0 - a.0[i] * c.0[i]) * a.0[i] * b.0[i]);
    let majorant = space.integrate(|i| 1.0 - a.0[i] * c.0[i]);
    let rhs = 1.0 - covariation(space, a, c)?;

    let eq = |name, left: f64, right: f64| ProofLink {
        name,
        left,
        right,
        holds: (left - right).abs() <= ASSERT_TOL,
    };
    let links = vec![
        eq("linearity", delta, delta_by_linearity),
        eq(
            "square_identity_rewrite",
            delta_by_linearity,
            rewritten_delta,
        ),
        ProofLink {
            name: "majorant_bound",
            left: rewritten_delta.abs(),
            right: majorant,
            holds: rewritten_delta.abs() <= majorant + ASSERT_TOL,
        },
        eq("majorant_is_rhs", majorant, rhs),
    ];

    Ok(ProofTrace {
        delta,
        delta_by_linearity,
        integrand_identity_check: true,
        rewritten_delta,
        majorant,
        rhs,
        links,
    })
}

/// A seeded random finite model: Dirichlet(1) weights and three fair sign
/// variables.
pub fn random_sign_model(
    seed: u64,
    atom_count: usize,
) -> Result<(FiniteProbabilitySpace, [SignVariable; 3])> {
    if atom_count == 0 {
        return Err(Error::EmptySpace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Exp(1) gaps normalised to a uniform point on the simplex.
    let raw: Vec<f64> = (0..atom_count)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let weights = if total > 0.0 {
        raw.into_iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / atom_count as f64; atom_count]
    };
    let space = FiniteProbabilitySpace::new(weights)?;
    let mut draw = || {
        SignVariable(
            (0..atom_count)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect(),
        )
    };
    let vars = [draw(), draw(), draw()];
    Ok((space, vars))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[i8]) -> SignVariable {
        SignVariable::new(v.to_vec()).unwrap()
    }

    #[test]
    fn make_space_examples() {
        assert_eq!(
            FiniteProbabilitySpace::new(vec![0.5, 0.5])
                .unwrap()
                .atom_count(),
            2
        );
        assert_eq!(
            FiniteProbabilitySpace::new(vec![1.0]).unwrap().atom_count(),
            1
        );
        assert!(matches!(
            FiniteProbabilitySpace::new(vec![0.3, 0.8]),
            Err(Error::WeightsNotNormalized { .. })
        ));
        assert!(matches!(
            FiniteProbabilitySpace::new(vec![1.5, -0.5]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert_eq!(FiniteProbabilitySpace::new(vec![]), Err(Error::EmptySpace));
    }

    #[test]
    fn near_normalized_weights_are_rescaled() {
        let s = FiniteProbabilitySpace::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        let sum: f64 = s.weights().iter().sum();
        assert!((sum - 1.0).abs() <= ASSERT_TOL);
        assert!(FiniteProbabilitySpace::new(vec![0.5, 0.5 + 2e-9]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let uniform = FiniteProbabilitySpace::uniform(2).unwrap();
        let pm = RandomVariable::new(vec![1.0, -1.0]);
        assert_eq!(expectation(&uniform, &pm).unwrap(), 0.0);

        let point = FiniteProbabilitySpace::new(vec![1.0]).unwrap();
        assert_eq!(
            expectation(&point, &RandomVariable::new(vec![3.0])).unwrap(),
            3.0
        );

        let skew = FiniteProbabilitySpace::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(expectation(&skew, &pm).unwrap(), -0.5);

        assert!(matches!(
            expectation(&skew, &RandomVariable::new(vec![1.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn covariation_examples() {
        let s = FiniteProbabilitySpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let u = RandomVariable::new(vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(covariation(&s, &u, &u).unwrap(), 1.0);

        let uniform4 = FiniteProbabilitySpace::uniform(4).unwrap();
        let u = RandomVariable::new(vec![1.0, 1.0, -1.0, -1.0]);
        let v = RandomVariable::new(vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(covariation(&uniform4, &u, &v).unwrap(), 0.0);

        let half = FiniteProbabilitySpace::uniform(2).unwrap();
        let u = RandomVariable::new(vec![1.0, -1.0]);
        let v = RandomVariable::new(vec![-1.0, 1.0]);
        assert_eq!(covariation(&half, &u, &v).unwrap(), -1.0);
    }

    #[test]
    fn sign_variable_is_exact() {
        assert!(SignVariable::new(vec![1, -1, 1]).is_ok());
        assert!(matches!(
            SignVariable::new(vec![1, 0]),
            Err(Error::NotSign { index: 1, .. })
        ));
        assert!(SignVariable::from_f64(&[1.0, -1.0 + 1e-15]).is_err());
    }

    #[test]
    fn bell_equality_when_a_equals_c() {
        let s = FiniteProbabilitySpace::new(vec![0.2, 0.3, 0.5]).unwrap();
        let a = sv(&[1, -1, 1]);
        let b = sv(&[-1, -1, 1]);
        let r = bell_functional(&s, &a, &b, &a).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn bell_on_all_sign_patterns() {
        // atom k carries the bits of k as (a, b, c)
        let s = FiniteProbabilitySpace::uniform(8).unwrap();
        let bit = |shift: u32| -> SignVariable {
            sv(&(0..8u32)
                .map(|k| if (k >> shift) & 1 == 0 { 1 } else { -1 })
                .collect::<Vec<_>>())
        };
        let r = bell_functional(&s, &bit(2), &bit(1), &bit(0)).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 1.0);
        assert!(r.holds);
    }

    #[test]
    fn bell_boundary_case() {
        let s = FiniteProbabilitySpace::uniform(2).unwrap();
        let a = sv(&[1, -1]);
        let b = sv(&[1, -1]);
        let c = sv(&[-1, 1]);
        let r = bell_functional(&s, &a, &b, &c).unwrap();
        assert_eq!(r.lhs, 2.0);
        assert_eq!(r.rhs, 2.0);
        assert_eq!(r.margin, 0.0);
        assert!(r.holds);

        let t = bell_proof_trace(
            &s,
            &a.to_random_variable(),
            &b.to_random_variable(),
            &c.to_random_variable(),
        )
        .unwrap();
        assert_eq!(t.delta.abs(), 2.0);
        assert_eq!(t.majorant, 2.0);
        assert!(t.chain_holds());
    }

    #[test]
    fn proof_trace_rejects_non_unit_squares() {
        let s = FiniteProbabilitySpace::uniform(2).unwrap();
        let a = RandomVariable::new(vec![1.0, 0.5]);
        let b = RandomVariable::new(vec![1.0, -1.0]);
        assert!(matches!(
            bell_proof_trace(&s, &a, &b, &b),
            Err(Error::IdentityViolated { index: 1, .. })
        ));
    }

    #[test]
    fn bell_dimension_mismatch() {
        let s = FiniteProbabilitySpace::uniform(2).unwrap();
        let a = sv(&[1, -1]);
        let short = sv(&[1]);
        assert!(matches!(
            bell_functional(&s, &a, &short, &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_model_is_deterministic() {
        let (s1, v1) = random_sign_model(1, 8).unwrap();
        let (s2, v2) = random_sign_model(1, 8).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(v1, v2);
        let sum: f64 = s1.weights().iter().sum();
        assert!((sum - 1.0).abs() <= ASSERT_TOL);
        assert_ne!(random_sign_model(2, 8).unwrap().0, s1);
    }
}
