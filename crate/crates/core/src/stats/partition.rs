use crate::error::{Error, Result};

/// Boundaries `0 = b_0 < b_1 < ... < b_m = 1`. Increment `i` of an `n`-step
/// path belongs to window `k` when `b_{k-1} < i/n <= b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPartition {
    boundaries: Vec<f64>,
}

impl WindowPartition {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        let ok = boundaries.len() >= 2
            && boundaries[0] == 0.0
            && *boundaries.last().unwrap() == 1.0
            && boundaries.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "window boundaries {boundaries:?} must increase strictly from 0 to 1"
            )));
        }
        Ok(WindowPartition { boundaries })
    }

    /// `m` windows of equal length.
    pub fn equal(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one window".into()));
        }
        let mut b: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        b[m] = 1.0;
        Self::new(b)
    }

    pub fn m(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Inclusive 1-based increment ranges `(first, last)` per window.
    pub fn index_ranges(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        let last_index = |b: f64| ((b * n as f64 + 1e-9).floor() as usize).min(n);
        self.boundaries
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let lo = last_index(w[0]) + 1;
                let hi = last_index(w[1]);
                if hi < lo {
                    Err(Error::EmptyWindow {
                        window: format!(
                            "window {} ({}, {}] holds no increment i/{n}",
                            k + 1,
                            w[0],
                            w[1]
                        ),
                    })
                } else {
                    Ok((lo, hi))
                }
            })
            .collect()
    }
}
