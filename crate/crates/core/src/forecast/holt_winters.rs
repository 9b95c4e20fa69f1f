//! Additive Holt-Winters.
//!
//! ```text
//! ŷ_t  = l_{t−1} + b_{t−1} + s_{t−m}
//! l_t  = α (y_t − s_{t−m}) + (1 − α)(l_{t−1} + b_{t−1})
//! b_t  = β (l_t − l_{t−1}) + (1 − β) b_{t−1}
//! s_t  = γ (y_t − l_t) + (1 − γ) s_{t−m}
//! ```
//!
//! The first two seasons initialize the state: a line through the two
//! season means gives level and trend, and the seasonal indices are the
//! average detrended deviation of each slot. Recursions start at `t = m`.

use alloc::vec::Vec;

use super::optim::{multi_start, smoothing_starts, Bounds, MAX_EVALS};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HoltWinters {
    pub(crate) alpha: f64,
    pub(crate) beta: f64,
    pub(crate) gamma: f64,
    pub(crate) level: f64,
    pub(crate) trend: f64,
    pub(crate) seasonal: Vec<f64>,
    /// Slot of the next observation.
    pub(crate) pos: usize,
}

impl HoltWinters {
    /// State at the end of the first season.
    pub(crate) fn initial(series: &[f64], m: usize, params: [f64; 3]) -> Self {
        let mean1 = series[..m].iter().sum::<f64>() / m as f64;
        let mean2 = series[m..2 * m].iter().sum::<f64>() / m as f64;
        let trend = (mean2 - mean1) / m as f64;
        let centre = (m as f64 - 1.0) / 2.0;
        let line = |t: usize| mean1 + (t as f64 - centre) * trend;
        let seasonal: Vec<f64> = (0..m)
            .map(|i| ((series[i] - line(i)) + (series[i + m] - line(i + m))) / 2.0)
            .collect();
        Self {
            alpha: params[0],
            beta: params[1],
            gamma: params[2],
            level: line(m - 1),
            trend,
            seasonal,
            pos: 0,
        }
    }

    pub(crate) fn one_step(&self) -> f64 {
        self.level + self.trend + self.seasonal[self.pos]
    }

    pub(crate) fn observe(&mut self, y: f64) {
        let s = self.seasonal[self.pos];
        let level = self.alpha * (y - s) + (1.0 - self.alpha) * (self.level + self.trend);
        self.trend = self.beta * (level - self.level) + (1.0 - self.beta) * self.trend;
        self.level = level;
        self.seasonal[self.pos] = self.gamma * (y - level) + (1.0 - self.gamma) * s;
        self.pos = (self.pos + 1) % self.seasonal.len();
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        let m = self.seasonal.len();
        (1..=h)
            .map(|k| self.level + k as f64 * self.trend + self.seasonal[(self.pos + k - 1) % m])
            .collect()
    }

    /// Filter the series from `t = m`; returns the one-step residuals.
    pub(crate) fn filter(&mut self, series: &[f64], m: usize) -> Vec<f64> {
        let mut res = Vec::with_capacity(series.len() - m);
        for &y in &series[m..] {
            res.push(y - self.one_step());
            self.observe(y);
        }
        res
    }
}

fn sse(series: &[f64], m: usize, p: [f64; 3]) -> f64 {
    let mut hw = HoltWinters::initial(series, m, p);
    let mut total = 0.0;
    for &y in &series[m..] {
        let e = y - hw.one_step();
        total += e * e;
        hw.observe(y);
    }
    total
}

/// Fit (α, β, γ) by in-sample one-step SSE; returns the filtered model and
/// its residuals.
pub(crate) fn fit(series: &[f64], m: usize) -> Result<(HoltWinters, Vec<f64>)> {
    if m == 0 {
        return Err(domain!("season length must be positive"));
    }
    if series.len() < 2 * m {
        return Err(domain!(
            "Holt-Winters needs two seasons ({} values), got {}",
            2 * m,
            series.len()
        ));
    }
    let best = multi_start(
        |x| sse(series, m, [x[0], x[1], x[2]]),
        &smoothing_starts(3, &[]),
        &[0.1; 3],
        &[Bounds::SMOOTHING; 3],
        MAX_EVALS,
    );
    if !best.value.is_finite() {
        return Err(Error::Numeric("Holt-Winters SSE is not finite".into()));
    }
    let mut hw = HoltWinters::initial(series, m, [best.x[0], best.x[1], best.x[2]]);
    let res = hw.filter(series, m);
    Ok((hw, res))
}
