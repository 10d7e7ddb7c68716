//! Sample Kendall's tau for continuous data.
//!
//! The pair-counting definition is used up to [`QUADRATIC_LIMIT`] points;
//! larger inputs count discordant pairs as inversions with a merge sort.

use crate::error::{Axis, Error, Result};

pub const QUADRATIC_LIMIT: usize = 10_000;

fn check_input(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite point ({x}, {y})"
            )));
        }
    }
    for (axis, pick) in [(Axis::X, 0usize), (Axis::Y, 1usize)] {
        let mut vals: Vec<f64> = points
            .iter()
            .map(|p| if pick == 0 { p.0 } else { p.1 })
            .collect();
        vals.sort_by(f64::total_cmp);
        if let Some(w) = vals.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Tie { axis, value: w[0] });
        }
    }
    Ok(())
}

/// (concordant − discordant) / C(n, 2). Ties in either coordinate are rejected.
pub fn kendall_tau_estimate(points: &[(f64, f64)]) -> Result<f64> {
    check_input(points)?;
    let discordant = if points.len() <= QUADRATIC_LIMIT {
        discordant_pairs_quadratic(points)
    } else {
        discordant_pairs_merge(points)
    };
    Ok(tau_from_discordant(points.len(), discordant))
}

fn tau_from_discordant(n: usize, discordant: u64) -> f64 {
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let concordant = pairs - discordant;
    (concordant as f64 - discordant as f64) / pairs as f64
}

/// Discordant pairs by direct enumeration. Assumes no ties.
pub fn discordant_pairs_quadratic(points: &[(f64, f64)]) -> u64 {
    let mut discordant = 0u64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if (a.0 - b.0) * (a.1 - b.1) < 0.0 {
                discordant += 1;
            }
        }
    }
    discordant
}

/// Discordant pairs as inversions of the y-sequence ordered by x. Assumes no ties.
pub fn discordant_pairs_merge(points: &[(f64, f64)]) -> u64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ys: Vec<f64> = sorted.into_iter().map(|p| p.1).collect();
    count_inversions(&mut ys)
}

/// Number of pairs i < j with values[i] > values[j]; sorts `values` in place.
pub fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    let mut buf = values.to_vec();
    let mut inversions = 0u64;
    let mut width = 1;
    // Bottom-up merge passes, alternating between `values` and `buf`.
    let mut src_is_values = true;
    while width < n {
        {
            let (src, dst): (&[f64], &mut [f64]) = if src_is_values {
                (&*values, &mut buf)
            } else {
                (&buf, &mut *values)
            };
            let mut start = 0;
            while start < n {
                let mid = (start + width).min(n);
                let end = (start + 2 * width).min(n);
                let (mut i, mut j, mut k) = (start, mid, start);
                while i < mid && j < end {
                    if src[i] <= src[j] {
                        dst[k] = src[i];
                        i += 1;
                    } else {
                        dst[k] = src[j];
                        inversions += (mid - i) as u64;
                        j += 1;
                    }
                    k += 1;
                }
                dst[k..k + (mid - i)].copy_from_slice(&src[i..mid]);
                k += mid - i;
                dst[k..k + (end - j)].copy_from_slice(&src[j..end]);
                start = end;
            }
        }
        src_is_values = !src_is_values;
        width *= 2;
    }
    if !src_is_values {
        values.copy_from_slice(&buf);
    }
    inversions
}
