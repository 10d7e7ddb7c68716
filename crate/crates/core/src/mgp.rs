//! Missingness-generating processes: a latent copula for `(U, V)` and a
//! multinomial-logit model for the pattern `Z` given the covariates.
//!
//! Simulation draws `(U, V)` from the copula, maps them to covariates on the
//! configured scale, draws `Z` from the propensities and masks the record.
//! This realises `p(x, y | z) = P(z | x, y) c(x, y) / P(z)` without ever
//! evaluating the copula density.

use std::cmp::Ordering;

use rand::Rng;

use crate::bounds::{refined, worst_case, DistSummary, SummaryErrors, TauInterval, ThetaSummary};
use crate::concordance::kendall_tau_estimate;
use crate::copula::{m_bound, sample_copula, theta_lower, theta_upper, w_bound, CopulaSpec, LatentDraw, ThetaConstraint};
use crate::error::{Error, Result};
use crate::parallel::{block_rng, map_blocks};

/// Minimum Monte Carlo size for population quantities.
pub const MIN_DRAWS: usize = 10_000;

/// Missingness pattern: which of `x`, `y` is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pattern {
    Complete = 1,
    OnlyX = 2,
    OnlyY = 3,
    Missing = 4,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [Pattern::Complete, Pattern::OnlyX, Pattern::OnlyY, Pattern::Missing];

    /// Zero-based index (pattern code minus one).
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

/// One possibly incomplete observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRecord {
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl ObservationRecord {
    pub fn new(x: Option<f64>, y: Option<f64>) -> Self {
        Self { x, y }
    }

    pub fn pattern(&self) -> Pattern {
        match (self.x.is_some(), self.y.is_some()) {
            (true, true) => Pattern::Complete,
            (true, false) => Pattern::OnlyX,
            (false, true) => Pattern::OnlyY,
            (false, false) => Pattern::Missing,
        }
    }
}

pub(crate) fn pattern_counts(records: &[ObservationRecord]) -> [u64; 4] {
    let mut counts = [0u64; 4];
    for r in records {
        counts[r.pattern().index()] += 1;
    }
    counts
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

/// Records sorted by (pattern, x, y), which makes every fold over them
/// independent of the input order.
pub(crate) fn canonical_order(records: &[ObservationRecord]) -> Vec<ObservationRecord> {
    let mut rows = records.to_vec();
    rows.sort_by(|a, b| {
        a.pattern()
            .cmp(&b.pattern())
            .then_with(|| cmp_opt(a.x, b.x))
            .then_with(|| cmp_opt(a.y, b.y))
    });
    rows
}

/// Scale on which the latent uniforms enter the logit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovariateScale {
    /// `(x, y) = (U, V)`.
    #[default]
    Uniform01,
    /// `(x, y) = (Φ⁻¹(U), Φ⁻¹(V))`.
    NormalScore,
}

impl CovariateScale {
    pub fn as_str(&self) -> &'static str {
        match self {
            CovariateScale::Uniform01 => "uniform01",
            CovariateScale::NormalScore => "normal-score",
        }
    }

    fn covariates(&self, d: &LatentDraw) -> (f64, f64) {
        match self {
            CovariateScale::Uniform01 => (d.u, d.v),
            CovariateScale::NormalScore => (d.score_x, d.score_y),
        }
    }
}

/// Full joint law of `(X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgpConfig {
    /// Row `z − 1` holds the logit coefficients of pattern `z` on `(x, y)`.
    pub gamma: [[f64; 2]; 4],
    pub copula: CopulaSpec,
    pub covariate_scale: CovariateScale,
}

impl MgpConfig {
    pub fn new(gamma: [[f64; 2]; 4], copula: CopulaSpec, covariate_scale: CovariateScale) -> Result<Self> {
        let cfg = Self {
            gamma,
            copula,
            covariate_scale,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "logit coefficients must be finite: {:?}",
                self.gamma
            )));
        }
        self.copula.validate()
    }
}

#[inline]
fn softmax(gamma: &[[f64; 2]; 4], x: f64, y: f64) -> [f64; 4] {
    let logits = gamma.map(|g| g[0] * x + g[1] * y);
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = logits.map(|l| (l - top).exp());
    let total: f64 = e.iter().sum();
    e.map(|v| v / total)
}

/// P(Z = z | X = x, Y = y) for z = 1..4.
pub fn propensity(config: &MgpConfig, x: f64, y: f64) -> Result<[f64; 4]> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite covariates ({x}, {y})")));
    }
    config.validate()?;
    Ok(softmax(&config.gamma, x, y))
}

fn draw_pattern<R: Rng + ?Sized>(probs: &[f64; 4], rng: &mut R) -> Pattern {
    let r: f64 = rng.random();
    let mut cum = 0.0;
    for (z, &p) in probs.iter().enumerate().take(3) {
        cum += p;
        if r < cum {
            return Pattern::ALL[z];
        }
    }
    Pattern::Missing
}

/// Simulate `n` masked records; deterministic in `(config, n, seed)`.
pub fn simulate_dataset(config: &MgpConfig, n: usize, seed: u64) -> Result<Vec<ObservationRecord>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    config.validate()?;
    let blocks = map_blocks(n, |b, range| {
        let mut rng = block_rng(seed, b);
        range
            .map(|_| {
                let d = config.copula.draw(&mut rng);
                let (x, y) = config.covariate_scale.covariates(&d);
                let probs = softmax(&config.gamma, x, y);
                // Records carry the uniform-scale values whatever the logit sees.
                let (u, v) = (d.u, d.v);
                match draw_pattern(&probs, &mut rng) {
                    Pattern::Complete => ObservationRecord::new(Some(u), Some(v)),
                    Pattern::OnlyX => ObservationRecord::new(Some(u), None),
                    Pattern::OnlyY => ObservationRecord::new(None, Some(v)),
                    Pattern::Missing => ObservationRecord::new(None, None),
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(blocks.into_iter().flatten().collect())
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
}

/// Monte Carlo population bounds for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationBounds {
    pub summary: ThetaSummary,
    pub worst_case: TauInterval,
    pub refined: TauInterval,
    pub p: [f64; 4],
    pub p_se: [f64; 4],
    /// The configuration's own C(1/2, 1/2).
    pub theta_dgp: McEstimate,
    /// Set when the supplied θ differs from `theta_dgp` by more than 3 SE.
    pub theta_warning: Option<String>,
    pub draws: usize,
    pub seed: u64,
}

// Ratio moments, in order: m1, l1, m1_theta, l1_theta, m2, m3.
const RATIO_PATTERN: [usize; 6] = [0, 0, 0, 0, 1, 2];

#[derive(Debug, Clone, Copy, Default)]
struct PopAcc {
    p_sum: [f64; 4],
    p_sq: [f64; 4],
    a_sum: [f64; 6],
    a_sq: [f64; 6],
    ab: [f64; 6],
    below_medians: u64,
}

impl PopAcc {
    fn merge(&mut self, o: &PopAcc) {
        for z in 0..4 {
            self.p_sum[z] += o.p_sum[z];
            self.p_sq[z] += o.p_sq[z];
        }
        for k in 0..6 {
            self.a_sum[k] += o.a_sum[k];
            self.a_sq[k] += o.a_sq[k];
            self.ab[k] += o.ab[k];
        }
        self.below_medians += o.below_medians;
    }
}

/// Population worst-case and θ-refined bounds by Monte Carlo integration of
/// the propensity-weighted bound integrands over the latent copula.
pub fn population_bounds(
    config: &MgpConfig,
    theta: ThetaConstraint,
    draws: usize,
    seed: u64,
) -> Result<PopulationBounds> {
    if draws < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "draws must be at least {MIN_DRAWS}, got {draws}"
        )));
    }
    config.validate()?;
    let th = theta.value();
    let parts = map_blocks(draws, |b, range| {
        let mut rng = block_rng(seed, b);
        let mut acc = PopAcc::default();
        for _ in range {
            let d = config.copula.draw(&mut rng);
            let (x, y) = config.covariate_scale.covariates(&d);
            let prop = softmax(&config.gamma, x, y);
            let (u, v) = (d.u, d.v);
            let h = [
                m_bound(u, v),
                w_bound(u, v),
                theta_upper(th, u, v),
                theta_lower(th, u, v),
                u,
                v,
            ];
            for z in 0..4 {
                acc.p_sum[z] += prop[z];
                acc.p_sq[z] += prop[z] * prop[z];
            }
            for k in 0..6 {
                let w = prop[RATIO_PATTERN[k]];
                let a = w * h[k];
                acc.a_sum[k] += a;
                acc.a_sq[k] += a * a;
                acc.ab[k] += a * w;
            }
            if u <= 0.5 && v <= 0.5 {
                acc.below_medians += 1;
            }
        }
        acc
    });
    let mut acc = PopAcc::default();
    for part in &parts {
        acc.merge(part);
    }

    let n = draws as f64;
    let p_total: f64 = acc.p_sum.iter().sum();
    let p = acc.p_sum.map(|s| s / p_total);
    let p_se: [f64; 4] = std::array::from_fn(|z| {
        let mean = acc.p_sum[z] / n;
        ((acc.p_sq[z] / n - mean * mean).max(0.0) / n).sqrt()
    });
    let mut moments = [None; 6];
    let mut moment_se = [0.0; 6];
    for k in 0..6 {
        let z = RATIO_PATTERN[k];
        if acc.p_sum[z] > 0.0 {
            let m = (acc.a_sum[k] / acc.p_sum[z]).clamp(0.0, 1.0);
            let (ma, mb) = (acc.a_sum[k] / n, acc.p_sum[z] / n);
            let var_a = acc.a_sq[k] / n - ma * ma;
            let var_b = acc.p_sq[z] / n - mb * mb;
            let cov = acc.ab[k] / n - ma * mb;
            let var = (var_a - 2.0 * m * cov + m * m * var_b).max(0.0) / (n * mb * mb);
            moments[k] = Some(m);
            moment_se[k] = var.sqrt();
        }
    }
    let base = DistSummary {
        p,
        m1: moments[0],
        l1: moments[1],
        m2: moments[4],
        m3: moments[5],
        se: Some(SummaryErrors {
            p: p_se,
            m1: moment_se[0],
            l1: moment_se[1],
            m2: moment_se[4],
            m3: moment_se[5],
        }),
    };
    let summary = ThetaSummary {
        theta,
        m1_theta: moments[2],
        l1_theta: moments[3],
        se_theta: Some((moment_se[2], moment_se[3])),
        base,
    };
    let worst = worst_case(&summary.base)?;
    let refined = refined(&summary)?;

    let theta_hat = acc.below_medians as f64 / n;
    let theta_dgp = McEstimate {
        value: theta_hat,
        se: (theta_hat * (1.0 - theta_hat) / n).sqrt(),
    };
    let theta_warning = ((th - theta_hat).abs() > 3.0 * theta_dgp.se).then(|| {
        format!(
            "theta = {th} differs from the model's C(1/2,1/2) = {theta_hat:.4} (se {:.1e})",
            theta_dgp.se
        )
    });

    Ok(PopulationBounds {
        summary,
        worst_case: worst,
        refined,
        p,
        p_se,
        theta_dgp,
        theta_warning,
        draws,
        seed,
    })
}

/// Sample Kendall's tau of the latent (unmasked) pairs.
pub fn true_tau(config: &MgpConfig, draws: usize, seed: u64) -> Result<f64> {
    if draws < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "draws must be at least {MIN_DRAWS}, got {draws}"
        )));
    }
    let pts: Vec<(f64, f64)> = sample_copula(config.copula, draws, seed)?
        .into_iter()
        .map(|p| (p.u(), p.v()))
        .collect();
    kendall_tau_estimate(&pts)
}

/// Monte Carlo estimate of C(1/2, 1/2) = P(U ≤ 1/2, V ≤ 1/2).
pub fn median_joint_prob(config: &MgpConfig, draws: usize, seed: u64) -> Result<McEstimate> {
    if draws < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!(
            "draws must be at least {MIN_DRAWS}, got {draws}"
        )));
    }
    let hits = sample_copula(config.copula, draws, seed)?
        .iter()
        .filter(|p| p.u() <= 0.5 && p.v() <= 0.5)
        .count();
    let value = hits as f64 / draws as f64;
    Ok(McEstimate {
        value,
        se: (value * (1.0 - value) / draws as f64).sqrt(),
    })
}

/// The three demonstration configurations: strong negative dependence,
/// strong positive dependence, and independence under the same missingness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkScenario {
    P1,
    P2,
    P3,
}

/// Reference values for a scenario's refined bounds at θ = 0.4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioTargets {
    pub refined_lower: Option<f64>,
    pub refined_upper: Option<f64>,
}

impl BenchmarkScenario {
    pub const ALL: [BenchmarkScenario; 3] = [BenchmarkScenario::P1, BenchmarkScenario::P2, BenchmarkScenario::P3];

    pub const THETA: f64 = 0.4;

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkScenario::P1 => "P1",
            BenchmarkScenario::P2 => "P2",
            BenchmarkScenario::P3 => "P3",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "P1" => Some(BenchmarkScenario::P1),
            "P2" => Some(BenchmarkScenario::P2),
            "P3" => Some(BenchmarkScenario::P3),
            _ => None,
        }
    }

    pub fn gamma(&self) -> [[f64; 2]; 4] {
        match self {
            BenchmarkScenario::P1 => [[2.0, 2.0], [-5.0, 0.25], [5.0, -0.25], [-5.0, -5.0]],
            BenchmarkScenario::P2 | BenchmarkScenario::P3 => {
                [[0.5, 0.5], [3.0, 0.5], [0.5, -2.0], [2.0, 2.0]]
            }
        }
    }

    pub fn rho(&self) -> f64 {
        match self {
            BenchmarkScenario::P1 => -0.999,
            BenchmarkScenario::P2 => 0.99,
            BenchmarkScenario::P3 => 0.0,
        }
    }

    pub fn theta(&self) -> ThetaConstraint {
        ThetaConstraint::new(Self::THETA).expect("0.4 is a valid theta")
    }

    pub fn config(&self, covariate_scale: CovariateScale) -> MgpConfig {
        MgpConfig {
            gamma: self.gamma(),
            copula: CopulaSpec::Gaussian { rho: self.rho() },
            covariate_scale,
        }
    }

    pub fn targets(&self) -> ScenarioTargets {
        match self {
            BenchmarkScenario::P1 => ScenarioTargets {
                refined_lower: None,
                refined_upper: Some(-0.0108),
            },
            BenchmarkScenario::P2 => ScenarioTargets {
                refined_lower: Some(0.034),
                refined_upper: None,
            },
            BenchmarkScenario::P3 => ScenarioTargets {
                refined_lower: Some(-0.32),
                refined_upper: Some(0.63),
            },
        }
    }
}
