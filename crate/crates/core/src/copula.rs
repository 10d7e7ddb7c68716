//! Bivariate copulas: Fréchet–Hoeffding bounds, the median-constrained bound
//! surfaces, parametric copulas for simulation, and extremal expectations of
//! supermodular integrands.

use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{check_probability, Error, Result};
use crate::normal::{std_normal_cdf, std_normal_quantile};
use crate::parallel::{block_rng, map_blocks};
use crate::quadrature::integrate;

/// A point of the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPoint {
    u: f64,
    v: f64,
}

impl UnitPoint {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        Ok(Self {
            u: check_probability("u", u)?,
            v: check_probability("v", v)?,
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// Side information `C(1/2, 1/2) = θ`, the probability that both variables
/// fall at or below their medians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ThetaConstraint(f64);

impl ThetaConstraint {
    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..=0.5).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(Error::Domain {
                what: "theta",
                value: theta,
                range: "[0, 1/2]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaSpec {
    /// M(u, v) = min{u, v}.
    Comonotone,
    /// W(u, v) = max{u + v − 1, 0}.
    Countermonotone,
    /// Π(u, v) = uv.
    Independence,
    /// Copula of a bivariate standard normal with correlation `rho` in (−1, 1).
    Gaussian { rho: f64 },
}

impl CopulaSpec {
    /// Gaussian copula; rejects the degenerate endpoints ±1.
    pub fn gaussian(rho: f64) -> Result<Self> {
        if rho > -1.0 && rho < 1.0 {
            Ok(CopulaSpec::Gaussian { rho })
        } else {
            Err(Error::Domain {
                what: "rho",
                value: rho,
                range: "(-1, 1)",
            })
        }
    }

    /// Gaussian copula for |rho| < 1, with ±1 redirected to the comonotone and
    /// countermonotone copulas.
    pub fn from_correlation(rho: f64) -> Result<Self> {
        if rho == 1.0 {
            Ok(CopulaSpec::Comonotone)
        } else if rho == -1.0 {
            Ok(CopulaSpec::Countermonotone)
        } else {
            Self::gaussian(rho)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaSpec::Gaussian { rho } => Self::gaussian(rho).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Copula distribution function C(u, v).
    pub fn cdf(&self, p: UnitPoint) -> f64 {
        let (u, v) = (p.u, p.v);
        match *self {
            CopulaSpec::Comonotone => m_bound(u, v),
            CopulaSpec::Countermonotone => w_bound(u, v),
            CopulaSpec::Independence => u * v,
            CopulaSpec::Gaussian { rho } => gaussian_cdf(rho, u, v),
        }
    }

    /// Draw one latent point: the copula coordinates and their normal scores.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> LatentDraw {
        let z: f64 = rng.sample(StandardNormal);
        let u = std_normal_cdf(z);
        match *self {
            CopulaSpec::Comonotone => LatentDraw {
                u,
                v: u,
                score_x: z,
                score_y: z,
            },
            CopulaSpec::Countermonotone => LatentDraw {
                u,
                v: 1.0 - u,
                score_x: z,
                score_y: -z,
            },
            CopulaSpec::Independence => {
                let w: f64 = rng.sample(StandardNormal);
                LatentDraw {
                    u,
                    v: std_normal_cdf(w),
                    score_x: z,
                    score_y: w,
                }
            }
            CopulaSpec::Gaussian { rho } => {
                let e: f64 = rng.sample(StandardNormal);
                let w = rho * z + (1.0 - rho * rho).sqrt() * e;
                LatentDraw {
                    u,
                    v: std_normal_cdf(w),
                    score_x: z,
                    score_y: w,
                }
            }
        }
    }
}

/// One draw from a copula together with the standard normal scores that
/// generated it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentDraw {
    pub u: f64,
    pub v: f64,
    pub score_x: f64,
    pub score_y: f64,
}

#[inline]
pub(crate) fn w_bound(u: f64, v: f64) -> f64 {
    // Exact margin identities W(u, 1) = u and W(1, v) = v, and W <= M.
    if u >= 1.0 {
        v
    } else if v >= 1.0 {
        u
    } else {
        (u + v - 1.0).max(0.0).min(u.min(v))
    }
}

#[inline]
pub(crate) fn m_bound(u: f64, v: f64) -> f64 {
    u.min(v)
}

#[inline]
pub(crate) fn theta_lower(theta: f64, u: f64, v: f64) -> f64 {
    let side = theta - (0.5 - u).max(0.0) - (0.5 - v).max(0.0);
    w_bound(u, v).max(side).min(m_bound(u, v))
}

#[inline]
pub(crate) fn theta_upper(theta: f64, u: f64, v: f64) -> f64 {
    let side = theta + (u - 0.5).max(0.0) + (v - 0.5).max(0.0);
    m_bound(u, v).min(side).max(w_bound(u, v))
}

/// Fréchet–Hoeffding lower bound max{u + v − 1, 0}.
pub fn frechet_lower(p: UnitPoint) -> f64 {
    w_bound(p.u, p.v)
}

/// Fréchet–Hoeffding upper bound min{u, v}.
pub fn frechet_upper(p: UnitPoint) -> f64 {
    m_bound(p.u, p.v)
}

/// Pointwise lower bound over copulas with C(1/2, 1/2) = θ.
pub fn constrained_lower(c: ThetaConstraint, p: UnitPoint) -> f64 {
    theta_lower(c.0, p.u, p.v)
}

/// Pointwise upper bound over copulas with C(1/2, 1/2) = θ.
pub fn constrained_upper(c: ThetaConstraint, p: UnitPoint) -> f64 {
    theta_upper(c.0, p.u, p.v)
}

fn gaussian_cdf(rho: f64, u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    if u == 1.0 {
        return v;
    }
    if v == 1.0 {
        return u;
    }
    let h = std_normal_quantile(u).expect("u inside (0, 1)");
    let k = std_normal_quantile(v).expect("v inside (0, 1)");
    // Φ₂(h, k; ρ) = Φ(h)Φ(k) + (2π)⁻¹ ∫₀^{asin ρ} exp(−(h² + k² − 2hk sin t) / (2cos² t)) dt
    let end = rho.asin();
    let integrand = |t: f64| {
        let (s, c) = t.sin_cos();
        let c2 = c * c;
        if c2 <= 0.0 {
            return 0.0;
        }
        (-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c2)).exp()
    };
    let (lo, hi, sign) = if end >= 0.0 {
        (0.0, end, 1.0)
    } else {
        (end, 0.0, -1.0)
    };
    let extra = match integrate(integrand, lo, hi, &[], 1e-14) {
        Ok(r) => r.value,
        Err(_) => integrate(integrand, lo, hi, &[], 1e-11)
            .map(|r| r.value)
            .unwrap_or(0.0),
    };
    let c = u * v + sign * extra / (2.0 * PI);
    c.clamp(w_bound(u, v), m_bound(u, v))
}

/// `count` points from `spec`, deterministic in `(spec, count, seed)` and
/// independent of the number of worker threads.
pub fn sample_copula(spec: CopulaSpec, count: usize, seed: u64) -> Result<Vec<UnitPoint>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    spec.validate()?;
    let blocks = map_blocks(count, |b, range| {
        let mut rng = block_rng(seed, b);
        range
            .map(|_| {
                let d = spec.draw(&mut rng);
                UnitPoint { u: d.u, v: d.v }
            })
            .collect::<Vec<_>>()
    });
    Ok(blocks.into_iter().flatten().collect())
}

/// The two extremal dependence structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremal {
    Comonotone,
    Countermonotone,
}

/// E[s(U, V)] under the comonotone (V = U) or countermonotone (V = 1 − U)
/// coupling of two uniforms, by adaptive quadrature with a break at u = 1/2.
pub fn extremal_expectation<F>(which: Extremal, integrand: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    extremal_expectation_with_breaks(which, integrand, &[0.5])
}

pub fn extremal_expectation_with_breaks<F>(which: Extremal, integrand: F, breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let r = match which {
        Extremal::Comonotone => integrate(|u| integrand(u, u), 0.0, 1.0, breaks, 1e-9)?,
        Extremal::Countermonotone => integrate(|u| integrand(u, 1.0 - u), 0.0, 1.0, breaks, 1e-9)?,
    };
    Ok(r.value)
}
