//! Marginal CDF envelopes when F and G are unknown, and the closed-form
//! worst-case bounds obtained by plugging the envelopes into the affine
//! formulas (upper envelopes into the upper bound, lower into the lower).

use super::{worst_case, DistSummary, SummaryErrors, TauInterval};
use crate::copula::{m_bound, w_bound};
use crate::error::{Error, Result};
use crate::mgp::{canonical_order, pattern_counts, ObservationRecord, Pattern};
use crate::stats::fold_means;

/// Right-continuous nondecreasing step function with jumps at `points`,
/// equal to `floor` below the first jump and tending to 1 at +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    points: Vec<f64>,
    values: Vec<f64>,
    floor: f64,
}

impl StepCdf {
    /// Step function `floor + mass · #{sample ≤ t}`, with ties merged.
    fn from_sample(mut sample: Vec<f64>, mass: f64, floor: f64) -> Self {
        sample.sort_by(f64::total_cmp);
        let mut points: Vec<f64> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        for (i, &x) in sample.iter().enumerate() {
            let v = (floor + mass * (i + 1) as f64).min(1.0);
            if points.last() == Some(&x) {
                *values.last_mut().expect("paired with points") = v;
            } else {
                points.push(x);
                values.push(v);
            }
        }
        Self {
            points,
            values,
            floor,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return 1.0;
        }
        match self.points.partition_point(|&p| p <= t) {
            0 => self.floor,
            k => self.values[k - 1],
        }
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.points
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

/// Pointwise envelopes `lower ≤ F ≤ upper` and `lower ≤ G ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppedCdfBounds {
    pub lower_f: StepCdf,
    pub upper_f: StepCdf,
    pub lower_g: StepCdf,
    pub upper_g: StepCdf,
    pub n: usize,
    pub pattern_counts: [u64; 4],
}

/// Envelopes from the law of total probability:
///
/// ```text
/// upper F(x) = P(X ≤ x, Z = 1) + P(X ≤ x, Z = 2) + P(Z = 3) + P(Z = 4)
/// lower F(x) = P(X ≤ x, Z = 1) + P(X ≤ x, Z = 2)
/// ```
///
/// and symmetrically for G with patterns 2 and 3 exchanged.
pub fn marginal_cdf_bounds(records: &[ObservationRecord]) -> Result<SteppedCdfBounds> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = records.len();
    let counts = pattern_counts(records);
    let mass = 1.0 / n as f64;
    let xs: Vec<f64> = records.iter().filter_map(|r| r.x).collect();
    let ys: Vec<f64> = records.iter().filter_map(|r| r.y).collect();
    let missing_x = (counts[2] + counts[3]) as f64 / n as f64;
    let missing_y = (counts[1] + counts[3]) as f64 / n as f64;
    Ok(SteppedCdfBounds {
        lower_f: StepCdf::from_sample(xs.clone(), mass, 0.0),
        upper_f: StepCdf::from_sample(xs, mass, missing_x),
        lower_g: StepCdf::from_sample(ys.clone(), mass, 0.0),
        upper_g: StepCdf::from_sample(ys, mass, missing_y),
        n,
        pattern_counts: counts,
    })
}

/// Worst-case bounds when the margins are only known to lie between the
/// envelopes.
pub fn worst_case_unknown_margins(
    records: &[ObservationRecord],
    cdf_bounds: &SteppedCdfBounds,
) -> Result<TauInterval> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let counts = pattern_counts(records);
    if cdf_bounds.n != records.len() || cdf_bounds.pattern_counts != counts {
        return Err(Error::InvalidParameter(
            "CDF envelopes were not built from these records".into(),
        ));
    }
    let rows = canonical_order(records);
    let b = cdf_bounds;
    // [m1, l1, m2, m3]
    let acc = fold_means::<_, 4, _>(&rows, |r, acc| match r.pattern() {
        Pattern::Complete => {
            let (x, y) = (r.x.unwrap_or_default(), r.y.unwrap_or_default());
            acc[0].push(m_bound(b.upper_f.eval(x), b.upper_g.eval(y)));
            acc[1].push(w_bound(b.lower_f.eval(x), b.lower_g.eval(y)));
        }
        Pattern::OnlyX => acc[2].push(b.upper_f.eval(r.x.unwrap_or_default())),
        Pattern::OnlyY => acc[3].push(b.upper_g.eval(r.y.unwrap_or_default())),
        Pattern::Missing => {}
    });
    let summary = DistSummary::from_plug_in(&counts, &acc);
    worst_case(&summary)
}

impl DistSummary {
    /// Plug-in summary from pattern counts and per-pattern accumulators
    /// ordered as (m1, l1, m2, m3).
    pub(crate) fn from_plug_in(counts: &[u64; 4], acc: &[crate::stats::MeanAcc; 4]) -> Self {
        let n: u64 = counts.iter().sum();
        let nf = n as f64;
        let p = counts.map(|c| c as f64 / nf);
        let se_p = p.map(|q| (q * (1.0 - q) / nf).sqrt());
        DistSummary {
            p,
            m1: acc[0].unit_mean(),
            l1: acc[1].unit_mean(),
            m2: acc[2].unit_mean(),
            m3: acc[3].unit_mean(),
            se: Some(SummaryErrors {
                p: se_p,
                m1: acc[0].se().unwrap_or(0.0),
                l1: acc[1].se().unwrap_or(0.0),
                m2: acc[2].se().unwrap_or(0.0),
                m3: acc[3].se().unwrap_or(0.0),
            }),
        }
    }
}
