//! Benchmarks: seasonal averaging baseline, naive, seasonal naive and drift.

use alloc::vec::Vec;

/// Mean of up to `n_seasons` past values at lag multiples of `m` from the
/// target slot.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Baseline {
    pub(crate) history: Vec<f64>,
    pub(crate) m: usize,
    pub(crate) n_seasons: usize,
}

impl Baseline {
    fn at(&self, k: usize) -> f64 {
        // target index len + k - 1; the first usable lag multiple is ⌈k/m⌉
        let target = self.history.len() + k - 1;
        let first = k.div_ceil(self.m);
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut i = first;
        while count < self.n_seasons && i * self.m <= target {
            sum += self.history[target - i * self.m];
            count += 1;
            i += 1;
        }
        if count == 0 {
            self.history.last().copied().unwrap_or(0.0)
        } else {
            sum / count as f64
        }
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        (1..=h).map(|k| self.at(k)).collect()
    }

    pub(crate) fn observe(&mut self, y: f64) {
        self.history.push(y);
    }

    pub(crate) fn residuals(series: &[f64], m: usize, n_seasons: usize) -> Vec<f64> {
        let mut b = Baseline {
            history: Vec::with_capacity(series.len()),
            m,
            n_seasons,
        };
        let mut out = Vec::with_capacity(series.len().saturating_sub(m));
        for (t, &y) in series.iter().enumerate() {
            if t >= m {
                out.push(y - b.at(1));
            }
            b.observe(y);
        }
        out
    }
}

/// `ŷ_{t+h} = y_{t+h−km}`, `k = ⌊(h−1)/m⌋ + 1`; keeps the last season.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SeasonalNaive {
    pub(crate) last_season: Vec<f64>,
    /// Index in `last_season` of the value one season before the next step.
    pub(crate) pos: usize,
}

impl SeasonalNaive {
    pub(crate) fn new(series: &[f64], m: usize) -> Self {
        Self {
            last_season: series[series.len() - m..].to_vec(),
            pos: 0,
        }
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        let m = self.last_season.len();
        (0..h).map(|k| self.last_season[(self.pos + k) % m]).collect()
    }

    pub(crate) fn observe(&mut self, y: f64) {
        self.last_season[self.pos] = y;
        self.pos = (self.pos + 1) % self.last_season.len();
    }
}

/// `ŷ_{t+h} = y_t + h·(y_t − y_1)/(t − 1)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Drift {
    pub(crate) first: f64,
    pub(crate) last: f64,
    pub(crate) len: usize,
}

impl Drift {
    pub(crate) fn new(series: &[f64]) -> Self {
        Self {
            first: series[0],
            last: series[series.len() - 1],
            len: series.len(),
        }
    }

    pub(crate) fn slope(&self) -> f64 {
        if self.len < 2 {
            0.0
        } else {
            (self.last - self.first) / (self.len - 1) as f64
        }
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        let s = self.slope();
        (1..=h).map(|k| self.last + k as f64 * s).collect()
    }

    pub(crate) fn observe(&mut self, y: f64) {
        self.last = y;
        self.len += 1;
    }
}

/// One-step in-sample residuals of the naive forecast.
pub(crate) fn naive_residuals(series: &[f64]) -> Vec<f64> {
    series.windows(2).map(|w| w[1] - w[0]).collect()
}

pub(crate) fn seasonal_naive_residuals(series: &[f64], m: usize) -> Vec<f64> {
    (m..series.len()).map(|t| series[t] - series[t - m]).collect()
}

/// Residuals of the drift forecast using only data up to each step.
pub(crate) fn drift_residuals(series: &[f64]) -> Vec<f64> {
    (2..series.len())
        .map(|t| {
            let slope = (series[t - 1] - series[0]) / (t - 1) as f64;
            series[t] - (series[t - 1] + slope)
        })
        .collect()
}
