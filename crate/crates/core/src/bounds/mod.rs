//! Identified-set bounds for Kendall's tau.
//!
//! With known margins F and G the bounds are affine in the pattern
//! probabilities `p_z = P(Z = z)` and a handful of conditional means of
//! copula-bound integrands evaluated at `(F(X), G(Y))`:
//!
//! ```text
//! upper = 4 (m1 p1 + m2 p2 + m3 p3 + p4) − 1      m1 = E[min{F, G} | Z = 1]
//! lower = 4 l1 p1 − 1                            l1 = E[max{F + G − 1, 0} | Z = 1]
//! ```
//!
//! with `m2 = E[F(X) | Z = 2]` and `m3 = E[G(Y) | Z = 3]`. The θ-refined
//! bounds swap the Fréchet–Hoeffding surfaces for the median-constrained ones.

mod envelope;

pub use envelope::{marginal_cdf_bounds, worst_case_unknown_margins, StepCdf, SteppedCdfBounds};

use crate::copula::ThetaConstraint;
use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-12;

/// Standard errors attached to a [`DistSummary`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SummaryErrors {
    pub p: [f64; 4],
    pub m1: f64,
    pub l1: f64,
    pub m2: f64,
    pub m3: f64,
}

/// Pattern probabilities and the conditional moments the bounds depend on.
/// A moment is `None` exactly when its pattern has probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DistSummary {
    pub p: [f64; 4],
    pub m1: Option<f64>,
    pub l1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
    pub se: Option<SummaryErrors>,
}

fn check_moment(name: &str, p: f64, m: Option<f64>) -> Result<()> {
    match (p > 0.0, m) {
        (true, None) => Err(Error::InvalidSummary(format!(
            "{name} is absent but its pattern has probability {p}"
        ))),
        (false, Some(_)) => Err(Error::InvalidSummary(format!(
            "{name} is given for a pattern with probability zero"
        ))),
        (_, Some(v)) if !(0.0..=1.0).contains(&v) => Err(Error::InvalidSummary(format!(
            "{name} = {v} is outside [0, 1]"
        ))),
        _ => Ok(()),
    }
}

impl DistSummary {
    pub fn validate(&self) -> Result<()> {
        if self.p.iter().any(|&q| !(0.0..=1.0).contains(&q)) {
            return Err(Error::InvalidSummary(format!(
                "pattern probabilities {:?} are not all in [0, 1]",
                self.p
            )));
        }
        let total: f64 = self.p.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidSummary(format!(
                "pattern probabilities sum to {total}, not 1"
            )));
        }
        check_moment("m1", self.p[0], self.m1)?;
        check_moment("l1", self.p[0], self.l1)?;
        check_moment("m2", self.p[1], self.m2)?;
        check_moment("m3", self.p[2], self.m3)?;
        if let (Some(m1), Some(l1)) = (self.m1, self.l1) {
            if l1 > m1 {
                return Err(Error::InvalidSummary(format!(
                    "l1 = {l1} exceeds m1 = {m1}"
                )));
            }
        }
        Ok(())
    }
}

/// A [`DistSummary`] plus the θ-constrained conditional means for Z = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSummary {
    pub theta: ThetaConstraint,
    pub m1_theta: Option<f64>,
    pub l1_theta: Option<f64>,
    /// Standard errors of (m1_theta, l1_theta).
    pub se_theta: Option<(f64, f64)>,
    pub base: DistSummary,
}

impl ThetaSummary {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        check_moment("m1_theta", self.base.p[0], self.m1_theta)?;
        check_moment("l1_theta", self.base.p[0], self.l1_theta)?;
        if let (Some(m1), Some(l1), Some(mt), Some(lt)) =
            (self.base.m1, self.base.l1, self.m1_theta, self.l1_theta)
        {
            if !(l1 <= lt && lt <= mt && mt <= m1) {
                return Err(Error::NestingViolation(format!(
                    "expected l1 {l1} <= l1_theta {lt} <= m1_theta {mt} <= m1 {m1}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    WorstCase,
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauInterval {
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundKind,
    pub clipped: bool,
    pub se_lower: Option<f64>,
    pub se_upper: Option<f64>,
}

impl TauInterval {
    pub fn contains(&self, t: f64) -> bool {
        self.lower <= t && t <= self.upper
    }

    /// Whether `self` lies inside `other`.
    pub fn is_within(&self, other: &TauInterval) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }
}

fn affine_upper(p: &[f64; 4], m1: f64, m2: f64, m3: f64) -> f64 {
    4.0 * (m1 * p[0] + m2 * p[1] + m3 * p[2] + p[3]) - 1.0
}

fn affine_lower(p: &[f64; 4], l1: f64) -> f64 {
    4.0 * l1 * p[0] - 1.0
}

// 4 sqrt(Σ (p_z se_z)² + (moment_z se_{p_z})²)
fn propagated_se(terms: &[(f64, f64, f64, f64)]) -> f64 {
    let var: f64 = terms
        .iter()
        .map(|&(p, se_m, m, se_p)| (p * se_m).powi(2) + (m * se_p).powi(2))
        .sum();
    4.0 * var.sqrt()
}

fn interval(
    s: &DistSummary,
    m1: Option<f64>,
    l1: Option<f64>,
    se_m1_l1: Option<(f64, f64)>,
    kind: BoundKind,
) -> TauInterval {
    let p = &s.p;
    let (m1v, l1v) = (m1.unwrap_or(0.0), l1.unwrap_or(0.0));
    let (m2v, m3v) = (s.m2.unwrap_or(0.0), s.m3.unwrap_or(0.0));
    let (se_lower, se_upper) = match (s.se, se_m1_l1) {
        (Some(e), Some((se_m1, se_l1))) => (
            Some(propagated_se(&[(p[0], se_l1, l1v, e.p[0])])),
            Some(propagated_se(&[
                (p[0], se_m1, m1v, e.p[0]),
                (p[1], e.m2, m2v, e.p[1]),
                (p[2], e.m3, m3v, e.p[2]),
                (p[3], 0.0, 1.0, e.p[3]),
            ])),
        ),
        _ => (None, None),
    };
    TauInterval {
        lower: affine_lower(p, l1v),
        upper: affine_upper(p, m1v, m2v, m3v),
        kind,
        clipped: false,
        se_lower,
        se_upper,
    }
}

/// Worst-case bounds over every missingness process and every copula.
pub fn worst_case(s: &DistSummary) -> Result<TauInterval> {
    s.validate()?;
    Ok(interval(
        s,
        s.m1,
        s.l1,
        s.se.map(|e| (e.m1, e.l1)),
        BoundKind::WorstCase,
    ))
}

/// Bounds over copulas with C(1/2, 1/2) = θ.
pub fn refined(s: &ThetaSummary) -> Result<TauInterval> {
    s.validate()?;
    let t = interval(&s.base, s.m1_theta, s.l1_theta, s.se_theta, BoundKind::Refined);
    let w = worst_case(&s.base)?;
    if !t.is_within(&w) {
        return Err(Error::NestingViolation(format!(
            "refined [{}, {}] not inside worst-case [{}, {}]",
            t.lower, t.upper, w.lower, w.upper
        )));
    }
    Ok(t)
}

/// Intersect with [−1, 1].
pub fn clip(t: &TauInterval) -> Result<TauInterval> {
    if !(t.lower <= t.upper) {
        return Err(Error::InvalidParameter(format!(
            "interval lower {} exceeds upper {}",
            t.lower, t.upper
        )));
    }
    if t.upper < -1.0 || t.lower > 1.0 {
        return Err(Error::Incoherent {
            lower: t.lower,
            upper: t.upper,
        });
    }
    Ok(TauInterval {
        lower: t.lower.max(-1.0),
        upper: t.upper.min(1.0),
        clipped: true,
        ..*t
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    DependencePositive,
    DependenceNegative,
    Inconclusive,
}

impl Decision {
    pub fn as_str(&self) -> &'static str {
        match self {
            Decision::DependencePositive => "DependencePositive",
            Decision::DependenceNegative => "DependenceNegative",
            Decision::Inconclusive => "Inconclusive",
        }
    }
}

/// Reject "no detectable dependence" iff the interval excludes zero.
pub fn decide(t: &TauInterval) -> Decision {
    if t.upper < 0.0 {
        Decision::DependenceNegative
    } else if t.lower > 0.0 {
        Decision::DependencePositive
    } else {
        Decision::Inconclusive
    }
}

/// [`decide`] after widening each endpoint by `k` standard errors (missing
/// standard errors count as zero).
pub fn decide_guarded(t: &TauInterval, k: f64) -> Decision {
    let widened = TauInterval {
        lower: t.lower - k * t.se_lower.unwrap_or(0.0),
        upper: t.upper + k * t.se_upper.unwrap_or(0.0),
        ..*t
    };
    decide(&widened)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn complete(m1: f64, l1: f64) -> DistSummary {
        DistSummary {
            p: [1.0, 0.0, 0.0, 0.0],
            m1: Some(m1),
            l1: Some(l1),
            m2: None,
            m3: None,
            se: None,
        }
    }

    fn bare(lower: f64, upper: f64) -> TauInterval {
        TauInterval {
            lower,
            upper,
            kind: BoundKind::WorstCase,
            clipped: false,
            se_lower: None,
            se_upper: None,
        }
    }

    #[test]
    fn all_missing_gives_minus_one_three() {
        let s = DistSummary {
            p: [0.0, 0.0, 0.0, 1.0],
            m1: None,
            l1: None,
            m2: None,
            m3: None,
            se: None,
        };
        let t = worst_case(&s).unwrap();
        assert_eq!((t.lower, t.upper), (-1.0, 3.0));
    }

    #[test]
    fn comonotone_complete_data() {
        let t = worst_case(&complete(0.5, 0.25)).unwrap();
        assert_eq!((t.lower, t.upper), (0.0, 1.0));
    }

    #[test]
    fn independence_complete_data_from_quadrature_oracle() {
        // E[min{U,V}] and E[max{U+V−1,0}] for independent uniforms, by nested quadrature.
        let inner = |g: fn(f64, f64) -> f64| {
            move |u: f64| integrate(|v| g(u, v), 0.0, 1.0, &[u, 1.0 - u], 1e-13).unwrap().value
        };
        let m1 = integrate(inner(|u, v| u.min(v)), 0.0, 1.0, &[], 1e-12).unwrap().value;
        let l1 = integrate(inner(|u, v| (u + v - 1.0).max(0.0)), 0.0, 1.0, &[], 1e-12).unwrap().value;
        assert!((m1 - 1.0 / 3.0).abs() < 1e-11);
        assert!((l1 - 1.0 / 6.0).abs() < 1e-11);
        let t = worst_case(&complete(m1, l1)).unwrap();
        assert!((t.lower + 1.0 / 3.0).abs() < 1e-10);
        assert!((t.upper - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_summaries() {
        let mut s = complete(0.5, 0.25);
        s.p = [0.6, 0.0, 0.0, 0.3];
        assert!(matches!(worst_case(&s), Err(Error::InvalidSummary(_))));
        let s = complete(1.2, 0.25);
        assert!(worst_case(&s).is_err());
        let s = complete(0.2, 0.3);
        assert!(worst_case(&s).is_err());
        let mut s = complete(0.5, 0.25);
        s.m2 = Some(0.5);
        assert!(worst_case(&s).is_err());
        let mut s = complete(0.5, 0.25);
        s.m1 = None;
        assert!(worst_case(&s).is_err());
    }

    #[test]
    fn refined_at_half_equals_worst_case() {
        let base = complete(0.4, 0.2);
        let s = ThetaSummary {
            theta: ThetaConstraint::new(0.5).unwrap(),
            m1_theta: base.m1,
            l1_theta: base.l1,
            se_theta: None,
            base: base.clone(),
        };
        let r = refined(&s).unwrap();
        let w = worst_case(&base).unwrap();
        assert_eq!((r.lower, r.upper), (w.lower, w.upper));
        assert_eq!(r.kind, BoundKind::Refined);
    }

    #[test]
    fn refined_rejects_non_nested_moments() {
        let s = ThetaSummary {
            theta: ThetaConstraint::new(0.4).unwrap(),
            m1_theta: Some(0.45),
            l1_theta: Some(0.1),
            se_theta: None,
            base: complete(0.4, 0.2),
        };
        assert!(matches!(refined(&s), Err(Error::NestingViolation(_))));
    }

    #[test]
    fn clip_examples() {
        let c = clip(&bare(-1.0, 3.0)).unwrap();
        assert_eq!((c.lower, c.upper, c.clipped), (-1.0, 1.0, true));
        let c = clip(&bare(-0.32, 0.63)).unwrap();
        assert_eq!((c.lower, c.upper), (-0.32, 0.63));
        let c = clip(&bare(0.0, 1.0)).unwrap();
        assert_eq!((c.lower, c.upper), (0.0, 1.0));
        assert!(matches!(clip(&bare(-3.0, -1.5)), Err(Error::Incoherent { .. })));
        assert!(clip(&bare(0.5, 0.2)).is_err());
    }

    #[test]
    fn decisions() {
        assert_eq!(decide(&bare(-0.9, -0.0108)), Decision::DependenceNegative);
        assert_eq!(decide(&bare(0.034, 0.9)), Decision::DependencePositive);
        assert_eq!(decide(&bare(-0.32, 0.63)), Decision::Inconclusive);
        assert_eq!(decide(&bare(0.0, 0.5)), Decision::Inconclusive);
        let mut t = bare(0.01, 0.5);
        t.se_lower = Some(0.01);
        assert_eq!(decide_guarded(&t, 0.0), Decision::DependencePositive);
        assert_eq!(decide_guarded(&t, 3.0), Decision::Inconclusive);
    }

    #[test]
    fn standard_errors_propagate() {
        let s = DistSummary {
            p: [0.5, 0.5, 0.0, 0.0],
            m1: Some(0.4),
            l1: Some(0.2),
            m2: Some(0.6),
            m3: None,
            se: Some(SummaryErrors {
                p: [0.01, 0.01, 0.0, 0.0],
                m1: 0.02,
                l1: 0.03,
                m2: 0.04,
                m3: 0.0,
            }),
        };
        let t = worst_case(&s).unwrap();
        let lo = 4.0 * ((0.5f64 * 0.03).powi(2) + (0.2f64 * 0.01).powi(2)).sqrt();
        let hi = 4.0
            * ((0.5f64 * 0.02).powi(2)
                + (0.4f64 * 0.01).powi(2)
                + (0.5f64 * 0.04).powi(2)
                + (0.6f64 * 0.01).powi(2))
            .sqrt();
        assert!((t.se_lower.unwrap() - lo).abs() < 1e-15);
        assert!((t.se_upper.unwrap() - hi).abs() < 1e-15);
    }
}
