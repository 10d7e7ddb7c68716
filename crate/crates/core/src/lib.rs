//! Identified sets for Kendall's tau when `(X, Y)` observations are missing
//! under an unknown missingness-generating process.
//!
//! The crate is organised bottom-up:
//!
//! * [`copula`], [`normal`], [`quadrature`], [`concordance`]: copula bound
//!   surfaces, sampling and the numerical primitives behind them.
//! * [`bounds`]: worst-case and side-information (θ) refined bounds from
//!   distribution summaries, marginal-CDF envelopes for unknown margins, and
//!   the dependence decision rule.
//! * [`mgp`]: multinomial-logit missingness models over a latent copula,
//!   dataset simulation and Monte Carlo population bounds.
//! * [`estimator`]: plug-in summaries and reports for observed datasets.
//!
//! Monte Carlo work is split into fixed-size blocks with independent
//! substreams, so every result is a deterministic function of its inputs and
//! seed regardless of how many threads run it. The `parallel` feature (on by
//! default) runs blocks on rayon's pool; without it they run sequentially.

pub mod bounds;
pub mod concordance;
pub mod copula;
pub mod error;
pub mod estimator;
pub mod mgp;
pub mod normal;
pub mod parallel;
pub mod quadrature;
mod stats;

pub use bounds::{
    clip, decide, decide_guarded, marginal_cdf_bounds, refined, worst_case,
    worst_case_unknown_margins, BoundKind, Decision, DistSummary, SteppedCdfBounds, SummaryErrors,
    TauInterval, ThetaSummary,
};
pub use concordance::kendall_tau_estimate;
pub use copula::{
    constrained_lower, constrained_upper, extremal_expectation, frechet_lower, frechet_upper,
    sample_copula, CopulaSpec, Extremal, ThetaConstraint, UnitPoint,
};
pub use error::{Error, Result};
pub use estimator::{
    analyze, classify_pattern, summarize, summarize_theta, AnalysisOptions, AnalysisReport,
    IntervalPair, MarginMode, PiecewiseLinearCdf,
};
pub use mgp::{
    median_joint_prob, population_bounds, propensity, simulate_dataset, true_tau,
    BenchmarkScenario, CovariateScale, McEstimate, MgpConfig, ObservationRecord, Pattern,
    PopulationBounds, ScenarioTargets,
};
pub use normal::{std_normal_cdf, std_normal_quantile};
