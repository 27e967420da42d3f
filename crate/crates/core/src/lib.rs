//! Executable pieces of the classical/quantum correspondence behind Bell-type
//! no-go arguments.
//!
//! * [`probspace`]: finite Kolmogorov spaces, covariations and the three-term
//!   Bell inequality together with a replay of its proof.
//! * [`quantum`]: 2x2 spin observables, Kronecker products, the singlet state
//!   and trace averages.
//! * [`realizability`]: can prescribed pairwise correlations of ±1 variables be
//!   realized on a single probability space? Decided by phase-one simplex, with
//!   an exact rational vertex-enumeration oracle alongside.
//! * [`nogo`]: correspondence postulates as checks, and the pipeline that turns
//!   singlet correlations into a classical feasibility question.
//! * [`contextual`]: seeded samplers for context-indexed runs and the
//!   cross-context Bell comparison.

pub mod contextual;
pub mod error;
pub mod nogo;
pub mod probspace;
pub mod quantum;
pub mod realizability;

pub use contextual::{Context, CrossContextReport, RunReport, SensitivityTable};
pub use error::{Error, Result};
pub use nogo::{Conclusion, NoGoVerdict, ScanRow};
pub use probspace::{BellReport, FiniteProbabilitySpace, RandomVariable, SignVariable};
pub use quantum::{ComplexMatrix, DensityOperator, SpinObservable};
pub use realizability::{Certificate, FeasibilityOutcome, RealizabilityProblem, Verdict};
