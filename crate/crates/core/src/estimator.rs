//! Plug-in bounds for observed datasets.
//!
//! Known margins go through [`summarize`] and the affine bound formulas;
//! unknown margins go through the marginal-CDF envelopes. Empirical margins
//! are never substituted for known ones: a complete-case CDF would assume the
//! data are missing completely at random.

use crate::bounds::{
    clip, decide_guarded, marginal_cdf_bounds, refined, worst_case, worst_case_unknown_margins,
    Decision, DistSummary, TauInterval, ThetaSummary,
};
use crate::copula::{m_bound, theta_lower, theta_upper, w_bound, ThetaConstraint};
use crate::error::{Axis, Error, Result};
use crate::mgp::{canonical_order, pattern_counts, ObservationRecord, Pattern};
use crate::stats::fold_means;

const TABLE_TOL: f64 = 1e-9;

/// Continuous CDF given by linear interpolation between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinearCdf {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidTable("need at least two knots".into()));
        }
        if knots.iter().any(|(x, c)| !x.is_finite() || !c.is_finite()) {
            return Err(Error::InvalidTable("knots must be finite".into()));
        }
        for w in knots.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidTable(format!(
                    "knot locations must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidTable(format!(
                    "CDF values must be nondecreasing ({} then {})",
                    w[0].1, w[1].1
                )));
            }
        }
        let first = knots[0].1;
        let last = knots[knots.len() - 1].1;
        if !(-TABLE_TOL..=TABLE_TOL).contains(&first) {
            return Err(Error::InvalidTable(format!("first CDF value {first} is not 0")));
        }
        if (last - 1.0).abs() > TABLE_TOL {
            return Err(Error::InvalidTable(format!("last CDF value {last} is not 1")));
        }
        Ok(Self { knots })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    fn eval(&self, t: f64, axis: Axis) -> Result<f64> {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfSupport { axis, value: t, lo, hi });
        }
        let k = self.knots.partition_point(|&(x, _)| x <= t);
        let c = if k == self.knots.len() {
            self.knots[k - 1].1
        } else {
            let (x0, c0) = self.knots[k - 1];
            let (x1, c1) = self.knots[k];
            c0 + (c1 - c0) * (t - x0) / (x1 - x0)
        };
        Ok(c.clamp(0.0, 1.0))
    }
}

/// What is known about the marginal distributions of X and Y.
#[derive(Debug, Clone, PartialEq)]
pub enum MarginMode {
    /// Both margins are uniform on [0, 1].
    KnownUniform01,
    /// Both margins given as piecewise-linear tables.
    KnownFromFile {
        x: PiecewiseLinearCdf,
        y: PiecewiseLinearCdf,
    },
    /// Margins unknown; only envelopes are identified.
    Unknown,
}

impl MarginMode {
    pub fn name(&self) -> &'static str {
        match self {
            MarginMode::KnownUniform01 => "uniform01",
            MarginMode::KnownFromFile { .. } => "file",
            MarginMode::Unknown => "unknown",
        }
    }

    fn transform(&self, t: f64, axis: Axis) -> Result<f64> {
        match self {
            MarginMode::KnownUniform01 => {
                if (0.0..=1.0).contains(&t) {
                    Ok(t)
                } else {
                    Err(Error::OutOfSupport {
                        axis,
                        value: t,
                        lo: 0.0,
                        hi: 1.0,
                    })
                }
            }
            MarginMode::KnownFromFile { x, y } => match axis {
                Axis::X => x.eval(t, axis),
                Axis::Y => y.eval(t, axis),
            },
            MarginMode::Unknown => Err(Error::Unsupported(
                "summaries require known margins".into(),
            )),
        }
    }
}

/// Pattern of a row from which fields are present.
pub fn classify_pattern(x: Option<f64>, y: Option<f64>) -> Pattern {
    ObservationRecord::new(x, y).pattern()
}

struct Transformed {
    pattern: Pattern,
    u: f64,
    v: f64,
}

fn transform_all(records: &[ObservationRecord], margins: &MarginMode) -> Result<Vec<Transformed>> {
    canonical_order(records)
        .iter()
        .map(|r| {
            let u = r.x.map(|x| margins.transform(x, Axis::X)).transpose()?;
            let v = r.y.map(|y| margins.transform(y, Axis::Y)).transpose()?;
            Ok(Transformed {
                pattern: r.pattern(),
                u: u.unwrap_or(f64::NAN),
                v: v.unwrap_or(f64::NAN),
            })
        })
        .collect()
}

fn plug_in(
    records: &[ObservationRecord],
    margins: &MarginMode,
    theta: Option<ThetaConstraint>,
) -> Result<(DistSummary, Option<ThetaSummary>)> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    if theta.is_some() && matches!(margins, MarginMode::Unknown) {
        return Err(Error::Unsupported("theta requires known margins".into()));
    }
    let rows = transform_all(records, margins)?;
    let th = theta.map(|t| t.value()).unwrap_or(0.5);
    // [m1, l1, m2, m3, m1_theta, l1_theta]
    let acc = fold_means::<_, 6, _>(&rows, |r, acc| match r.pattern {
        Pattern::Complete => {
            acc[0].push(m_bound(r.u, r.v));
            acc[1].push(w_bound(r.u, r.v));
            acc[4].push(theta_upper(th, r.u, r.v));
            acc[5].push(theta_lower(th, r.u, r.v));
        }
        Pattern::OnlyX => acc[2].push(r.u),
        Pattern::OnlyY => acc[3].push(r.v),
        Pattern::Missing => {}
    });
    let counts = pattern_counts(records);
    let base = DistSummary::from_plug_in(&counts, &[acc[0], acc[1], acc[2], acc[3]]);
    let theta_summary = theta.map(|theta| ThetaSummary {
        theta,
        m1_theta: acc[4].unit_mean(),
        l1_theta: acc[5].unit_mean(),
        se_theta: Some((acc[4].se().unwrap_or(0.0), acc[5].se().unwrap_or(0.0))),
        base: base.clone(),
    });
    Ok((base, theta_summary))
}

/// Plug-in [`DistSummary`] under known margins.
pub fn summarize(records: &[ObservationRecord], margins: &MarginMode) -> Result<DistSummary> {
    plug_in(records, margins, None).map(|(s, _)| s)
}

/// Plug-in [`ThetaSummary`] under known margins.
pub fn summarize_theta(
    records: &[ObservationRecord],
    margins: &MarginMode,
    theta: ThetaConstraint,
) -> Result<ThetaSummary> {
    let (_, t) = plug_in(records, margins, Some(theta))?;
    Ok(t.expect("theta summary requested"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Shrink intervals by `guard_k` standard errors before deciding.
    pub guard_k: f64,
    /// Recorded in the report; analysis itself is deterministic.
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { guard_k: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPair {
    pub raw: TauInterval,
    pub clipped: TauInterval,
}

impl IntervalPair {
    fn from_raw(raw: TauInterval) -> Result<Self> {
        Ok(Self {
            clipped: clip(&raw)?,
            raw,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub n: usize,
    pub pattern_counts: [u64; 4],
    pub p_hat: [f64; 4],
    /// Absent under unknown margins.
    pub summary: Option<DistSummary>,
    pub theta_summary: Option<ThetaSummary>,
    pub worst_case: IntervalPair,
    pub refined: Option<IntervalPair>,
    pub decision: Decision,
    pub margins_mode: &'static str,
    pub theta: Option<f64>,
    pub seed: u64,
    pub guard_k: f64,
    /// Observed values that repeat an earlier value, per coordinate.
    pub tied_x: usize,
    pub tied_y: usize,
}

fn repeated(values: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.windows(2).filter(|w| w[0] == w[1]).count()
}

/// Identified sets and the dependence decision for one dataset.
pub fn analyze(
    records: &[ObservationRecord],
    margins: &MarginMode,
    theta: Option<ThetaConstraint>,
    options: &AnalysisOptions,
) -> Result<AnalysisReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let counts = pattern_counts(records);
    let n = records.len();
    let (summary, theta_summary, worst, refined_pair) = match margins {
        MarginMode::Unknown => {
            if theta.is_some() {
                return Err(Error::Unsupported("theta requires known margins".into()));
            }
            let env = marginal_cdf_bounds(records)?;
            let w = worst_case_unknown_margins(records, &env)?;
            (None, None, IntervalPair::from_raw(w)?, None)
        }
        _ => {
            let (base, ts) = plug_in(records, margins, theta)?;
            let w = IntervalPair::from_raw(worst_case(&base)?)?;
            let r = match &ts {
                Some(ts) => Some(IntervalPair::from_raw(refined(ts)?)?),
                None => None,
            };
            (Some(base), ts, w, r)
        }
    };
    let deciding = refined_pair.as_ref().unwrap_or(&worst).clipped;
    Ok(AnalysisReport {
        n,
        pattern_counts: counts,
        p_hat: counts.map(|c| c as f64 / n as f64),
        summary,
        theta_summary,
        worst_case: worst,
        refined: refined_pair,
        decision: decide_guarded(&deciding, options.guard_k),
        margins_mode: margins.name(),
        theta: theta.map(|t| t.value()),
        seed: options.seed,
        guard_k: options.guard_k,
        tied_x: repeated(records.iter().filter_map(|r| r.x)),
        tied_y: repeated(records.iter().filter_map(|r| r.y)),
    })
}
