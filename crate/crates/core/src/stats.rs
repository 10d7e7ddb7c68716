//! Order-stable mean/standard-error accumulation.

use crate::parallel::map_blocks;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct MeanAcc {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl MeanAcc {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &MeanAcc) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }

    /// Standard error of the mean; zero for fewer than two values.
    pub fn se(&self) -> Option<f64> {
        let mean = self.mean()?;
        if self.n < 2 {
            return Some(0.0);
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        Some((var / n).sqrt())
    }

    /// Mean clamped into [0, 1] against rounding; inputs are already in [0, 1].
    pub fn unit_mean(&self) -> Option<f64> {
        self.mean().map(|m| m.clamp(0.0, 1.0))
    }
}

/// Accumulate `f` over `values` in fixed blocks, merged in block order.
pub(crate) fn fold_means<T, const K: usize, F>(values: &[T], f: F) -> [MeanAcc; K]
where
    T: Sync,
    F: Fn(&T, &mut [MeanAcc; K]) + Sync + Send,
{
    let parts = map_blocks(values.len(), |_, range| {
        let mut acc = [MeanAcc::default(); K];
        for v in &values[range] {
            f(v, &mut acc);
        }
        acc
    });
    let mut total = [MeanAcc::default(); K];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}
