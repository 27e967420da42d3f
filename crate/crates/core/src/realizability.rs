//! Realizability of prescribed correlations on a single probability space.
//!
//! Given `n` variables valued in ±1 and target correlations `c_ij` (and
//! optionally means `m_i`), a common joint distribution exists iff the linear
//! system
//!
//! ```text
//! sum_s p(s) = 1,   sum_s s_i s_j p(s) = c_ij,   sum_s s_i p(s) = m_i,   p >= 0
//! ```
//!
//! over the `2^n` sign assignments `s` is feasible. [`decide`] answers with a
//! floating-point phase-one simplex; [`brute_force_oracle`] answers the same
//! question exactly by rational vertex enumeration. An infeasible answer comes
//! with a Farkas certificate: a functional that is nonnegative on every
//! deterministic assignment and negative on the targets.
//!
//! Assignment `s` (an index in `0..2^n`) gives variable `i` the value -1 when
//! bit `n - 1 - i` of `s` is set, so index 0 is all-plus and variable 0 is the
//! most significant bit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::probspace::{FiniteProbabilitySpace, SignVariable};

pub const MAX_VARIABLES: usize = 4;
pub const ORACLE_MAX_VARIABLES: usize = 3;
/// Phase-one residual at or below which a problem counts as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
/// Certificates must be nonnegative on assignments down to this slack.
pub const CERTIFICATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairConstraint {
    pub i: usize,
    pub j: usize,
    pub correlation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanConstraint {
    pub i: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealizabilityProblem {
    variable_count: usize,
    pair_constraints: Vec<PairConstraint>,
    single_constraints: Vec<MeanConstraint>,
}

impl RealizabilityProblem {
    pub fn new(
        variable_count: usize,
        pair_constraints: Vec<PairConstraint>,
        single_constraints: Vec<MeanConstraint>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidProblem(msg));
        if !(2..=MAX_VARIABLES).contains(&variable_count) {
            return invalid(format!(
                "variable count {variable_count} outside 2..={MAX_VARIABLES}"
            ));
        }
        let mut seen_pairs = Vec::new();
        for p in &pair_constraints {
            if p.i >= variable_count || p.j >= variable_count {
                return invalid(format!("pair ({}, {}) out of range", p.i, p.j));
            }
            if p.i == p.j {
                return invalid(format!("pair ({}, {}) repeats an index", p.i, p.j));
            }
            if p.correlation.is_nan() || p.correlation.abs() > 1.0 {
                return invalid(format!(
                    "correlation {} for pair ({}, {}) outside [-1, 1]",
                    p.correlation, p.i, p.j
                ));
            }
            let key = (p.i.min(p.j), p.i.max(p.j));
            if seen_pairs.contains(&key) {
                return invalid(format!("duplicate constraint for pair ({}, {})", p.i, p.j));
            }
            seen_pairs.push(key);
        }
        let mut seen_means = Vec::new();
        for m in &single_constraints {
            if m.i >= variable_count {
                return invalid(format!("mean index {} out of range", m.i));
            }
            if m.mean.is_nan() || m.mean.abs() > 1.0 {
                return invalid(format!(
                    "mean {} for variable {} outside [-1, 1]",
                    m.mean, m.i
                ));
            }
            if seen_means.contains(&m.i) {
                return invalid(format!("duplicate mean constraint for variable {}", m.i));
            }
            seen_means.push(m.i);
        }
        Ok(Self {
            variable_count,
            pair_constraints,
            single_constraints,
        })
    }

    /// Pure pairwise problem on three variables.
    pub fn triple(c12: f64, c13: f64, c23: f64) -> Result<Self> {
        Self::new(
            3,
            vec![
                PairConstraint {
                    i: 0,
                    j: 1,
                    correlation: c12,
                },
                PairConstraint {
                    i: 0,
                    j: 2,
                    correlation: c13,
                },
                PairConstraint {
                    i: 1,
                    j: 2,
                    correlation: c23,
                },
            ],
            Vec::new(),
        )
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn pair_constraints(&self) -> &[PairConstraint] {
        &self.pair_constraints
    }

    pub fn single_constraints(&self) -> &[MeanConstraint] {
        &self.single_constraints
    }

    pub fn assignment_count(&self) -> usize {
        1 << self.variable_count
    }

    fn row_count(&self) -> usize {
        1 + self.pair_constraints.len() + self.single_constraints.len()
    }

    /// Row `r` of the constraint matrix evaluated at assignment `s`.
    fn coefficient(&self, row: usize, s: usize) -> i8 {
        let signs = assignment_signs(self.variable_count, s);
        let pairs = self.pair_constraints.len();
        if row == 0 {
            1
        } else if row <= pairs {
            let p = &self.pair_constraints[row - 1];
            signs[p.i] * signs[p.j]
        } else {
            signs[self.single_constraints[row - 1 - pairs].i]
        }
    }

    fn rhs(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.pair_constraints.iter().map(|p| p.correlation))
            .chain(self.single_constraints.iter().map(|m| m.mean))
            .collect()
    }

    /// Largest deviation of `weights` from the constraints, including
    /// normalization; infinite if the length is wrong.
    pub fn residual(&self, weights: &[f64]) -> f64 {
        if weights.len() != self.assignment_count() {
            return f64::INFINITY;
        }
        self.rhs()
            .iter()
            .enumerate()
            .map(|(row, target)| {
                let value: f64 = weights
                    .iter()
                    .enumerate()
                    .map(|(s, w)| self.coefficient(row, s) as f64 * w)
                    .sum();
                (value - target).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Signs of all variables under assignment index `s`.
pub fn assignment_signs(n: usize, s: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if (s >> (n - 1 - i)) & 1 == 0 { 1 } else { -1 })
        .collect()
}

/// A linear functional on (constant, pair correlations, means).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub constant: f64,
    /// `(i, j, coefficient)` aligned with the problem's pair constraints.
    pub pairs: Vec<(usize, usize, f64)>,
    /// `(i, coefficient)` aligned with the problem's mean constraints.
    pub means: Vec<(usize, f64)>,
}

impl Certificate {
    fn from_row_weights(problem: &RealizabilityProblem, y: &[f64]) -> Self {
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let y: Vec<f64> = y
            .iter()
            .map(|v| {
                let v = if scale > 0.0 { v / scale } else { *v };
                if v.abs() < CERTIFICATE_TOL {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let pairs = problem.pair_constraints.len();
        Self {
            constant: y[0],
            pairs: problem
                .pair_constraints
                .iter()
                .zip(&y[1..=pairs])
                .map(|(p, &v)| (p.i, p.j, v))
                .collect(),
            means: problem
                .single_constraints
                .iter()
                .zip(&y[1 + pairs..])
                .map(|(m, &v)| (m.i, v))
                .collect(),
        }
    }

    fn row_weights(&self) -> Vec<f64> {
        std::iter::once(self.constant)
            .chain(self.pairs.iter().map(|p| p.2))
            .chain(self.means.iter().map(|m| m.1))
            .collect()
    }

    /// Value on the deterministic assignment with the given signs.
    pub fn evaluate_assignment(&self, signs: &[i8]) -> f64 {
        self.constant
            + self
                .pairs
                .iter()
                .map(|&(i, j, v)| v * (signs[i] * signs[j]) as f64)
                .sum::<f64>()
            + self
                .means
                .iter()
                .map(|&(i, v)| v * signs[i] as f64)
                .sum::<f64>()
    }

    /// Value on the problem's target vector.
    pub fn evaluate_target(&self, problem: &RealizabilityProblem) -> f64 {
        self.row_weights()
            .iter()
            .zip(problem.rhs())
            .map(|(y, b)| y * b)
            .sum()
    }

    /// Nonnegative on every assignment and below `-threshold` on the targets.
    pub fn separates(&self, problem: &RealizabilityProblem, threshold: f64) -> bool {
        let n = problem.variable_count;
        (0..problem.assignment_count())
            .all(|s| self.evaluate_assignment(&assignment_signs(n, s)) >= -CERTIFICATE_TOL)
            && self.evaluate_target(problem) < -threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityOutcome {
    pub verdict: Verdict,
    /// Joint distribution over the `2^n` assignments.
    pub witness: Option<Vec<f64>>,
    pub certificate: Option<Certificate>,
    /// Phase-one residual; zero when feasible.
    pub slack: f64,
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Verdict::Feasible
    }

    /// Checks the outcome's own invariants against `problem`.
    pub fn is_valid_for(&self, problem: &RealizabilityProblem) -> bool {
        match self.verdict {
            Verdict::Feasible => self.witness.as_ref().is_some_and(|w| {
                let sum: f64 = w.iter().sum();
                w.iter().all(|&p| p >= 0.0)
                    && (sum - 1.0).abs() <= 1e-12
                    && problem.residual(w) <= FEASIBILITY_TOL
            }),
            Verdict::Infeasible => self
                .certificate
                .as_ref()
                .is_some_and(|c| c.separates(problem, FEASIBILITY_TOL)),
        }
    }

    /// Loads a witness as a `2^n`-atom space with one coordinate sign
    /// variable per problem variable.
    pub fn witness_model(
        &self,
        n: usize,
    ) -> Option<Result<(FiniteProbabilitySpace, Vec<SignVariable>)>> {
        let w = self.witness.as_ref()?;
        Some((|| {
            let space = FiniteProbabilitySpace::new(w.clone())?;
            let vars = (0..n)
                .map(|i| {
                    SignVariable::new((0..w.len()).map(|s| assignment_signs(n, s)[i]).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((space, vars))
        })())
    }
}

/// Decides realizability with a dense phase-one simplex (Bland's rule).
pub fn decide(problem: &RealizabilityProblem) -> FeasibilityOutcome {
    let m = problem.row_count();
    let cols = problem.assignment_count();
    let width = cols + m + 1;
    let rhs_col = cols + m;

    // flip rows so that every right-hand side is nonnegative
    let b = problem.rhs();
    let flip: Vec<f64> = b
        .iter()
        .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let mut t = vec![0.0; m * width];
    for r in 0..m {
        for s in 0..cols {
            t[r * width + s] = flip[r] * problem.coefficient(r, s) as f64;
        }
        t[r * width + cols + r] = 1.0;
        t[r * width + rhs_col] = flip[r] * b[r];
    }
    let mut basis: Vec<usize> = (cols..cols + m).collect();

    // reduced costs of min sum(artificials)
    let mut d = vec![0.0; width];
    for r in 0..m {
        for j in 0..cols {
            d[j] -= t[r * width + j];
        }
        d[rhs_col] -= t[r * width + rhs_col];
    }

    while let Some(enter) = (0..cols + m).find(|&j| d[j] < -PIVOT_TOL) {
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..m {
            let a = t[r * width + enter];
            if a > PIVOT_TOL {
                let ratio = t[r * width + rhs_col] / a;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - PIVOT_TOL
                            || (ratio <= best + PIVOT_TOL && basis[r] < basis[l])
                    }
                };
                if better {
                    best = ratio.min(best);
                    leave = Some(r);
                }
            }
        }
        // phase one is bounded below by zero, so an entering column always has a pivot
        let Some(pr) = leave else { break };
        let pivot = t[pr * width + enter];
        for j in 0..width {
            t[pr * width + j] /= pivot;
        }
        for r in 0..m {
            if r != pr {
                let f = t[r * width + enter];
                if f != 0.0 {
                    for j in 0..width {
                        t[r * width + j] -= f * t[pr * width + j];
                    }
                }
            }
        }
        let f = d[enter];
        for j in 0..width {
            d[j] -= f * t[pr * width + j];
        }
        basis[pr] = enter;
    }

    let residual = -d[rhs_col];
    if residual <= FEASIBILITY_TOL {
        let mut x = vec![0.0; cols];
        for (r, &var) in basis.iter().enumerate() {
            if var < cols {
                x[var] = t[r * width + rhs_col].max(0.0);
            }
        }
        let total: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= total);
        FeasibilityOutcome {
            verdict: Verdict::Feasible,
            witness: Some(x),
            certificate: None,
            slack: 0.0,
        }
    } else {
        // y_r = 1 - d(artificial_r); the certificate is -y mapped back through the row flips
        let y: Vec<f64> = (0..m).map(|r| -(1.0 - d[cols + r]) * flip[r]).collect();
        FeasibilityOutcome {
            verdict: Verdict::Infeasible,
            witness: None,
            certificate: Some(Certificate::from_row_weights(problem, &y)),
            slack: residual,
        }
    }
}

/// True iff the three correlations satisfy all four sign variants of the
/// three-term Bell inequality, which characterizes realizable pure-pairwise
/// triples.
pub fn triple_closed_form(c12: f64, c13: f64, c23: f64) -> bool {
    [
        1.0 + c12 + c13 + c23,
        1.0 + c12 - c13 - c23,
        1.0 - c12 + c13 - c23,
        1.0 - c12 - c13 + c23,
    ]
    .iter()
    .all(|&v| v >= -1e-12)
}

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite value")
}

fn q_int(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// Solves the square system `a x = b` exactly; `None` if singular.
fn solve_exact(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col][col..].iter_mut() {
            *x = &*x * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= &f * p;
                }
                let sub = &f * &b[col];
                b[r] -= sub;
            }
        }
    }
    Some(b)
}

/// Every `k`-subset of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn rational_to_f64(x: &Q) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

/// Exact decision by vertex enumeration over the rationals. Every float in
/// the problem is converted to the rational it represents exactly, so no
/// tolerance enters the verdict.
pub fn brute_force_oracle(problem: &RealizabilityProblem) -> Result<FeasibilityOutcome> {
    let n = problem.variable_count;
    if n > ORACLE_MAX_VARIABLES {
        return Err(Error::TooLarge { n });
    }
    let m = problem.row_count();
    let cols = problem.assignment_count();

    // rows carry [A | b | E] with E tracking the combination of original rows
    let mut rows: Vec<Vec<Q>> = (0..m)
        .map(|r| {
            let mut row: Vec<Q> = (0..cols)
                .map(|s| q_int(problem.coefficient(r, s) as i64))
                .collect();
            row.push(q(problem.rhs()[r]));
            row.extend((0..m).map(|k| if k == r { Q::one() } else { Q::zero() }));
            row
        })
        .collect();

    // row echelon form on the A block
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..m).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for v in rows[rank].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..m {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                let pivot_row = rows[rank].clone();
                for (v, pv) in rows[r].iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        rank += 1;
    }

    let combine = |u: &[Q]| -> Vec<f64> {
        // y = E^T u over the first `u.len()` reduced rows
        (0..m)
            .map(|k| {
                let s = u
                    .iter()
                    .enumerate()
                    .fold(Q::zero(), |acc, (r, ur)| acc + ur * &rows[r][cols + 1 + k]);
                rational_to_f64(&s)
            })
            .collect()
    };

    // a zero row with nonzero right-hand side is an outright contradiction
    if let Some(r) = (rank..m).find(|&r| !rows[r][cols].is_zero()) {
        let mut u = vec![Q::zero(); r + 1];
        u[r] = -rows[r][cols].recip();
        return Ok(infeasible(problem, &combine(&u)));
    }

    let reduced: Vec<&Vec<Q>> = rows[..rank].iter().collect();
    let b_red: Vec<Q> = reduced.iter().map(|row| row[cols].clone()).collect();

    for basis in subsets(cols, rank) {
        let a: Vec<Vec<Q>> = reduced
            .iter()
            .map(|row| basis.iter().map(|&c| row[c].clone()).collect())
            .collect();
        let Some(x) = solve_exact(a, b_red.clone()) else {
            continue;
        };
        if x.iter().all(|v| !v.is_negative()) {
            let mut witness = vec![0.0; cols];
            for (&c, v) in basis.iter().zip(&x) {
                witness[c] = rational_to_f64(v);
            }
            let total: f64 = witness.iter().sum();
            witness.iter_mut().for_each(|v| *v /= total);
            return Ok(FeasibilityOutcome {
                verdict: Verdict::Feasible,
                witness: Some(witness),
                certificate: None,
                slack: 0.0,
            });
        }
    }

    // Farkas: a vertex of {u : u^T R >= 0, u^T b = -1}, with rank - 1 tight columns
    for tight in subsets(cols, rank - 1) {
        let mut a: Vec<Vec<Q>> = tight
            .iter()
            .map(|&c| reduced.iter().map(|row| row[c].clone()).collect())
            .collect();
        a.push(b_red.clone());
        let mut rhs = vec![Q::zero(); rank - 1];
        rhs.push(-Q::one());
        let Some(u) = solve_exact(a, rhs) else {
            continue;
        };
        let nonneg = (0..cols).all(|c| {
            let v = u
                .iter()
                .zip(&reduced)
                .fold(Q::zero(), |acc, (ur, row)| acc + ur * &row[c]);
            !v.is_negative()
        });
        if nonneg {
            return Ok(infeasible(problem, &combine(&u)));
        }
    }
    unreachable!("Farkas alternative guarantees a certificate vertex")
}

fn infeasible(problem: &RealizabilityProblem, y: &[f64]) -> FeasibilityOutcome {
    let certificate = Certificate::from_row_weights(problem, y);
    let slack = -certificate.evaluate_target(problem);
    FeasibilityOutcome {
        verdict: Verdict::Infeasible,
        witness: None,
        certificate: Some(certificate),
        slack,
    }
}
