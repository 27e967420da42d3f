//! Context-indexed measurement runs.
//!
//! Every run draws its own samples under its own context (angle pair and
//! seed), so each run is a perfectly good classical probability space on its
//! own. Combining the three correlations of the Bell expression is only
//! legitimate if the contexts share one space, and that is exactly what the
//! cross-context comparison puts to the test.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a counter-based
//! stream cipher generator, seeded with `seed_from_u64(context.seed)`. Uniform
//! doubles use the 53-bit conversion of `rand`'s standard distribution.
//! Contexts created from a master seed get `splitmix64`-derived seeds.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Exceedance is reported only beyond this many combined standard errors.
pub const EXCEEDANCE_SIGMAS: f64 = 3.0;
const ANGLE_TOL: f64 = 1e-12;

pub const CAVEAT: &str = "Exceeding the bound refutes only the assumption that the three \
correlations were produced on one common probability space (identical contexts C1 = C2 = C3); \
it does not by itself establish nonlocality or the absence of objective properties.";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Context {
    pub id: String,
    pub angle_pair: (f64, f64),
    pub sample_count: u64,
    pub seed: u64,
}

impl Context {
    pub fn new(
        id: impl Into<String>,
        theta: f64,
        theta_prime: f64,
        sample_count: u64,
        seed: u64,
    ) -> Result<Self> {
        let ctx = Self {
            id: id.into(),
            angle_pair: (theta, theta_prime),
            sample_count,
            seed,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::InvalidContext(format!(
                "{}: sample count must be positive",
                self.id
            )));
        }
        if !self.angle_pair.0.is_finite() || !self.angle_pair.1.is_finite() {
            return Err(Error::InvalidContext(format!(
                "{}: angles must be finite",
                self.id
            )));
        }
        Ok(())
    }

    /// `theta - theta'`.
    pub fn delta(&self) -> f64 {
        self.angle_pair.0 - self.angle_pair.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.n_pp + self.n_pm + self.n_mp + self.n_mm
    }

    fn record(&mut self, a: i8, b: i8) {
        match (a > 0, b > 0) {
            (true, true) => self.n_pp += 1,
            (true, false) => self.n_pm += 1,
            (false, true) => self.n_mp += 1,
            (false, false) => self.n_mm += 1,
        }
    }

    /// `(n_pp + n_mm) - (n_pm + n_mp)`.
    pub fn agreement_excess(&self) -> i64 {
        (self.n_pp + self.n_mm) as i64 - (self.n_pm + self.n_mp) as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub context_id: String,
    pub theta: f64,
    pub theta_prime: f64,
    pub counts: Counts,
    pub empirical_correlation: f64,
    /// `sqrt((1 - r^2) / N)`.
    pub standard_error: f64,
}

impl RunReport {
    fn from_counts(ctx: &Context, counts: Counts) -> Self {
        let n = counts.total() as f64;
        let r = counts.agreement_excess() as f64 / n;
        Self {
            context_id: ctx.id.clone(),
            theta: ctx.angle_pair.0,
            theta_prime: ctx.angle_pair.1,
            counts,
            empirical_correlation: r,
            standard_error: ((1.0 - r * r).max(0.0) / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Singlet,
    Lhv,
}

fn context_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser applied to `master + (index + 1) * golden`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Population correlation of the singlet at angle difference `delta`.
pub fn singlet_population_correlation(delta: f64) -> f64 {
    -delta.cos()
}

/// Population correlation of the sign-of-cosine hidden variable model:
/// `-1 + 2|d|/pi` with `d` the difference reduced to `[-pi, pi]`.
pub fn lhv_population_correlation(delta: f64) -> f64 {
    let mut d = delta.rem_euclid(TAU);
    if d > PI {
        d = TAU - d;
    }
    -1.0 + 2.0 * d / PI
}

/// Samples outcome pairs from the singlet law at `delta = theta - theta'`:
/// `P(++) = P(--) = (1 - cos delta)/4`, `P(+-) = P(-+) = (1 + cos delta)/4`.
pub fn sample_singlet_run(ctx: &Context) -> Result<RunReport> {
    ctx.validate()?;
    let c = ctx.delta().cos();
    let same = (1.0 - c) / 4.0;
    let diff = (1.0 + c) / 4.0;
    let cut = [same, same + diff, same + 2.0 * diff];
    let mut rng = context_rng(ctx.seed);
    let mut counts = Counts {
        n_pp: 0,
        n_pm: 0,
        n_mp: 0,
        n_mm: 0,
    };
    let mut running: i64 = 0;
    for _ in 0..ctx.sample_count {
        let u: f64 = rng.random();
        let (a, b) = if u < cut[0] {
            (1, 1)
        } else if u < cut[1] {
            (1, -1)
        } else if u < cut[2] {
            (-1, 1)
        } else {
            (-1, -1)
        };
        counts.record(a, b);
        running += (a * b) as i64;
    }
    debug_assert_eq!(running, counts.agreement_excess());
    Ok(RunReport::from_counts(ctx, counts))
}

fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// A single-space hidden variable model: `lambda` uniform on `[0, 2pi)`,
/// `a = sign cos(theta - lambda)`, `b = -sign cos(theta' - lambda)`.
pub fn sample_lhv_run(ctx: &Context) -> Result<RunReport> {
    ctx.validate()?;
    let (theta, theta_prime) = ctx.angle_pair;
    let mut rng = context_rng(ctx.seed);
    let mut counts = Counts {
        n_pp: 0,
        n_pm: 0,
        n_mp: 0,
        n_mm: 0,
    };
    let mut running: i64 = 0;
    for _ in 0..ctx.sample_count {
        let lambda = rng.random::<f64>() * TAU;
        let a = sign((theta - lambda).cos());
        let b = -sign((theta_prime - lambda).cos());
        counts.record(a, b);
        running += (a * b) as i64;
    }
    debug_assert_eq!(running, counts.agreement_excess());
    Ok(RunReport::from_counts(ctx, counts))
}

pub fn sample_run(model: Model, ctx: &Context) -> Result<RunReport> {
    match model {
        Model::Singlet => sample_singlet_run(ctx),
        Model::Lhv => sample_lhv_run(ctx),
    }
}

/// Runs independent contexts in parallel; output order follows input order.
pub fn sample_runs(model: Model, contexts: &[Context]) -> Result<Vec<RunReport>> {
    contexts.par_iter().map(|c| sample_run(model, c)).collect()
}

/// The three Bell-expression contexts `(t1,t2)`, `(t3,t2)`, `(t1,t3)`, with
/// seeds derived from `master_seed`.
pub fn bell_contexts(
    theta1: f64,
    theta2: f64,
    theta3: f64,
    sample_count: u64,
    master_seed: u64,
) -> Result<[Context; 3]> {
    Ok([
        Context::new(
            "C1",
            theta1,
            theta2,
            sample_count,
            derive_seed(master_seed, 0),
        )?,
        Context::new(
            "C2",
            theta3,
            theta2,
            sample_count,
            derive_seed(master_seed, 1),
        )?,
        Context::new(
            "C3",
            theta1,
            theta3,
            sample_count,
            derive_seed(master_seed, 2),
        )?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossContextReport {
    pub lhs: f64,
    pub rhs: f64,
    pub combined_standard_error: f64,
    pub exceeded: bool,
    pub caveat: &'static str,
}

fn same_angle(a: f64, b: f64) -> bool {
    ((a - b + PI).rem_euclid(TAU) - PI).abs() <= ANGLE_TOL
}

/// Compares `|r1 - r2|` with `1 + r3` for reports taken at `(t1,t2)`,
/// `(t3,t2)` and `(t1,t3)`.
pub fn cross_context_bell(
    r1: &RunReport,
    r2: &RunReport,
    r3: &RunReport,
) -> Result<CrossContextReport> {
    let checks = [
        (
            r1.theta,
            r3.theta,
            "theta1 differs between first and third run",
        ),
        (
            r1.theta_prime,
            r2.theta_prime,
            "theta2 differs between first and second run",
        ),
        (
            r2.theta,
            r3.theta_prime,
            "theta3 differs between second and third run",
        ),
    ];
    for (a, b, msg) in checks {
        if !same_angle(a, b) {
            return Err(Error::AngleMismatch(format!("{msg} ({a} vs {b})")));
        }
    }
    let lhs = (r1.empirical_correlation - r2.empirical_correlation).abs();
    let rhs = 1.0 + r3.empirical_correlation;
    let combined_standard_error = [r1, r2, r3]
        .iter()
        .map(|r| r.standard_error * r.standard_error)
        .sum::<f64>()
        .sqrt();
    Ok(CrossContextReport {
        lhs,
        rhs,
        combined_standard_error,
        exceeded: lhs > rhs + EXCEEDANCE_SIGMAS * combined_standard_error,
        caveat: CAVEAT,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityTable {
    pub rows: Vec<RunReport>,
    /// Sample standard deviation of the correlations across contexts;
    /// absent with a single context.
    pub spread: Option<f64>,
    /// Root mean square of the within-context standard errors.
    pub pooled_standard_error: f64,
    /// Between-context variance over mean within-context variance.
    pub variance_ratio: Option<f64>,
}

/// Singlet runs whose two angles are each jittered by an independent uniform
/// offset in `[-perturbation, perturbation]`.
pub fn context_sensitivity_demo(
    base_angles: (f64, f64),
    perturbation: f64,
    n_contexts: usize,
    sample_count: u64,
    seed: u64,
) -> Result<SensitivityTable> {
    if perturbation.is_nan() || perturbation < 0.0 {
        return Err(Error::InvalidContext(format!(
            "perturbation {perturbation} must be nonnegative"
        )));
    }
    if n_contexts == 0 {
        return Err(Error::InvalidContext("need at least one context".into()));
    }
    let mut jitter = ChaCha8Rng::seed_from_u64(seed);
    jitter.set_stream(1);
    let mut offset = || {
        if perturbation == 0.0 {
            0.0
        } else {
            jitter.random_range(-perturbation..=perturbation)
        }
    };
    let contexts = (0..n_contexts)
        .map(|k| {
            let theta = base_angles.0 + offset();
            let theta_prime = base_angles.1 + offset();
            Context::new(
                format!("c{k}"),
                theta,
                theta_prime,
                sample_count,
                derive_seed(seed, k as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = sample_runs(Model::Singlet, &contexts)?;

    let n = rows.len() as f64;
    let mean_var = rows.iter().map(|r| r.standard_error.powi(2)).sum::<f64>() / n;
    let pooled_standard_error = mean_var.sqrt();
    let (spread, variance_ratio) = if rows.len() < 2 {
        (None, None)
    } else {
        let mean = rows.iter().map(|r| r.empirical_correlation).sum::<f64>() / n;
        let var = rows
            .iter()
            .map(|r| (r.empirical_correlation - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        let ratio = (mean_var > 0.0).then(|| var / mean_var);
        (Some(var.sqrt()), ratio)
    };
    Ok(SensitivityTable {
        rows,
        spread,
        pooled_standard_error,
        variance_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::singlet_joint_law;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    #[test]
    fn context_validation() {
        assert!(Context::new("x", 0.0, 0.0, 0, 1).is_err());
        assert!(Context::new("x", f64::NAN, 0.0, 1, 1).is_err());
        assert!(Context::new("x", 0.0, 1.0, 1, 1).is_ok());
    }

    #[test]
    fn sampler_law_matches_projector_traces() {
        for k in 0..13 {
            let (t, tp) = (0.25, 0.25 - k as f64 * PI / 12.0);
            let d = t - tp;
            let law = singlet_joint_law(t, tp);
            let same = (1.0 - d.cos()) / 4.0;
            let diff = (1.0 + d.cos()) / 4.0;
            assert!((law[0] - same).abs() <= 1e-12 && (law[3] - same).abs() <= 1e-12);
            assert!((law[1] - diff).abs() <= 1e-12 && (law[2] - diff).abs() <= 1e-12);
        }
    }

    #[test]
    fn singlet_equal_angles_is_exactly_anticorrelated() {
        let ctx = Context::new("c", 1.1, 1.1, 5000, 3).unwrap();
        let r = sample_singlet_run(&ctx).unwrap();
        assert_eq!(r.counts.n_pp + r.counts.n_mm, 0);
        assert_eq!(r.counts.total(), 5000);
        assert_eq!(r.empirical_correlation, -1.0);
        assert_eq!(r.standard_error, 0.0);
    }

    #[test]
    fn singlet_orthogonal_angles() {
        let ctx = Context::new("c", 0.0, FRAC_PI_2, 100_000, 11).unwrap();
        let r = sample_singlet_run(&ctx).unwrap();
        assert!(r.empirical_correlation.abs() <= 5.0 * r.standard_error);
    }

    #[test]
    fn runs_are_deterministic() {
        let ctx = Context::new("c", 0.3, 1.7, 20_000, 42).unwrap();
        assert_eq!(
            sample_singlet_run(&ctx).unwrap(),
            sample_singlet_run(&ctx).unwrap()
        );
        assert_eq!(sample_lhv_run(&ctx).unwrap(), sample_lhv_run(&ctx).unwrap());
        let other = Context {
            seed: 43,
            ..ctx.clone()
        };
        assert_ne!(
            sample_singlet_run(&ctx).unwrap().counts,
            sample_singlet_run(&other).unwrap().counts
        );
    }

    #[test]
    fn lhv_examples() {
        let r = sample_lhv_run(&Context::new("c", 0.4, 0.4, 10_000, 5).unwrap()).unwrap();
        assert_eq!(r.empirical_correlation, -1.0);

        let r = sample_lhv_run(&Context::new("c", 0.0, FRAC_PI_2, 100_000, 5).unwrap()).unwrap();
        assert!(r.empirical_correlation.abs() <= 5.0 * r.standard_error);

        let r = sample_lhv_run(&Context::new("c", FRAC_PI_3, 0.0, 100_000, 6).unwrap()).unwrap();
        assert!((r.empirical_correlation + 1.0 / 3.0).abs() <= 5.0 * r.standard_error);
    }

    #[test]
    fn lhv_population_values() {
        assert_eq!(lhv_population_correlation(0.0), -1.0);
        assert!((lhv_population_correlation(FRAC_PI_2)).abs() <= 1e-15);
        assert!((lhv_population_correlation(-FRAC_PI_3) + 1.0 / 3.0).abs() <= 1e-15);
        assert!((lhv_population_correlation(PI) - 1.0).abs() <= 1e-15);
        assert!((lhv_population_correlation(3.0 * FRAC_PI_2) - 0.0).abs() <= 1e-15);
    }

    #[test]
    fn lhv_population_matches_quadrature() {
        // midpoint rule over lambda of the model's pointwise product
        let steps = 200_000;
        for &d in &[0.2, 1.0, 2.5, 4.0, -1.3] {
            let (theta, theta_prime) = (0.7, 0.7 - d);
            let mut acc = 0.0;
            for k in 0..steps {
                let lambda = (k as f64 + 0.5) / steps as f64 * TAU;
                acc += (sign((theta - lambda).cos()) * -sign((theta_prime - lambda).cos())) as f64;
            }
            let quad = acc / steps as f64;
            assert!(
                (quad - lhv_population_correlation(d)).abs() <= 1e-4,
                "d={d}: {quad}"
            );
        }
    }

    #[test]
    fn cross_context_angle_bookkeeping() {
        let [c1, c2, c3] = bell_contexts(0.0, 2.0, 1.0, 100, 9).unwrap();
        let r1 = sample_singlet_run(&c1).unwrap();
        let r2 = sample_singlet_run(&c2).unwrap();
        let r3 = sample_singlet_run(&c3).unwrap();
        assert!(cross_context_bell(&r1, &r2, &r3).is_ok());
        assert!(matches!(
            cross_context_bell(&r1, &r3, &r2),
            Err(Error::AngleMismatch(_))
        ));
    }

    #[test]
    fn identical_contexts_give_zero_lhs() {
        let c = Context::new("C", 0.5, 1.5, 10_000, 77).unwrap();
        let r = sample_singlet_run(&c).unwrap();
        let r3 = sample_singlet_run(&Context::new("C3", 0.5, 0.5, 10_000, 78).unwrap()).unwrap();
        let x = cross_context_bell(&r, &r, &r3).unwrap();
        assert_eq!(x.lhs, 0.0);
        assert!(x.lhs <= x.rhs);
        assert!(!x.exceeded);
        assert_eq!(x.caveat, CAVEAT);
    }

    #[test]
    fn sensitivity_single_context_has_no_spread() {
        let t = context_sensitivity_demo((0.0, FRAC_PI_2), 0.1, 1, 1000, 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.spread, None);
        assert!(context_sensitivity_demo((0.0, 1.0), -0.1, 3, 10, 1).is_err());
        assert!(context_sensitivity_demo((0.0, 1.0), 0.1, 0, 10, 1).is_err());
    }

    #[test]
    fn sensitivity_without_jitter_is_pure_noise() {
        let t = context_sensitivity_demo((0.0, 1.2), 0.0, 100, 10_000, 2024).unwrap();
        let ratio = t.variance_ratio.unwrap();
        assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sensitivity_with_jitter_exceeds_noise() {
        let t = context_sensitivity_demo((0.0, FRAC_PI_2), 0.3, 100, 10_000, 2024).unwrap();
        assert!(t.spread.unwrap() > 2.0 * t.pooled_standard_error);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|k| derive_seed(7, k)).collect();
        let mut d = s.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), s.len());
    }
}
