//! Seasonal-trend decomposition by LOESS and the STL forecaster.
//!
//! Cleveland's inner loop: detrend, smooth each cycle-subseries (extended by
//! one cycle at both ends), remove the low-frequency part of that seasonal
//! estimate with three moving averages and a LOESS pass, deseasonalize and
//! smooth the trend. Two inner passes run with unit weights, then one more
//! pair with bisquare robustness weights from the remainder.
//!
//! Forecasts continue the last fitted season cyclically and add the inner
//! model's forecast of the non-seasonal part `T + R`.

use alloc::vec;
use alloc::vec::Vec;

use super::inner::{Ar, Ses};
use super::loess::{fit_at, moving_average, smooth};
use super::simple::Drift;
use crate::error::{domain, Result};

pub const SEASONAL_SPAN: usize = 7;
pub const INNER_PASSES: usize = 2;
pub const ROBUST_PASSES: usize = 1;

fn next_odd_at_least(v: f64) -> usize {
    let mut n = libm::ceil(v) as usize;
    if n % 2 == 0 {
        n += 1;
    }
    n.max(3)
}

/// Trend span, the next odd integer ≥ 1.5·m.
pub fn trend_span(m: usize) -> usize {
    next_odd_at_least(1.5 * m as f64)
}

/// Low-pass span, the next odd integer ≥ m.
pub fn low_pass_span(m: usize) -> usize {
    next_odd_at_least(m as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub seasonal: Vec<f64>,
    pub trend: Vec<f64>,
    pub remainder: Vec<f64>,
    /// Robustness weights of the final passes.
    pub weights: Vec<f64>,
}

impl Decomposition {
    pub fn non_seasonal(&self) -> Vec<f64> {
        self.trend.iter().zip(&self.remainder).map(|(t, r)| t + r).collect()
    }
}

fn inner_pass(y: &[f64], m: usize, trend: &mut [f64], seasonal: &mut [f64], weights: Option<&[f64]>) {
    let n = y.len();
    let detrended: Vec<f64> = y.iter().zip(trend.iter()).map(|(a, b)| a - b).collect();

    // cycle-subseries smoothing, evaluated one cycle beyond each end
    let mut cycle = vec![0.0; n + 2 * m];
    let mut sub = Vec::with_capacity(n / m + 1);
    let mut sub_w = Vec::with_capacity(n / m + 1);
    for slot in 0..m {
        sub.clear();
        sub_w.clear();
        let mut t = slot;
        while t < n {
            sub.push(detrended[t]);
            if let Some(w) = weights {
                sub_w.push(w[t]);
            }
            t += m;
        }
        let rw = weights.map(|_| sub_w.as_slice());
        let k = sub.len();
        for j in 0..k + 2 {
            let x = j as f64 - 1.0;
            let v = fit_at(&sub, rw, SEASONAL_SPAN, 0, x).unwrap_or_else(|| {
                sub[(j.saturating_sub(1)).min(k - 1)]
            });
            let idx = slot + j * m;
            if idx < n + 2 * m {
                cycle[idx] = v;
            }
        }
    }

    let low = moving_average(&cycle, m);
    let low = moving_average(&low, m);
    let low = moving_average(&low, 3);
    let low = smooth(&low, None, low_pass_span(m), 1);
    for t in 0..n {
        seasonal[t] = cycle[t + m] - low[t];
    }

    let deseasonal: Vec<f64> = y.iter().zip(seasonal.iter()).map(|(a, s)| a - s).collect();
    let smoothed = smooth(&deseasonal, weights, trend_span(m), 1);
    trend.copy_from_slice(&smoothed);
}

fn bisquare_weights(remainder: &[f64]) -> Vec<f64> {
    let mut abs: Vec<f64> = remainder.iter().map(|r| libm::fabs(*r)).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len();
    let median = if n % 2 == 1 {
        abs[n / 2]
    } else {
        0.5 * (abs[n / 2 - 1] + abs[n / 2])
    };
    let h = 6.0 * median;
    remainder
        .iter()
        .map(|r| {
            if h <= 0.0 {
                return 1.0;
            }
            let u = libm::fabs(*r) / h;
            if u >= 1.0 {
                0.0
            } else {
                let c = 1.0 - u * u;
                c * c
            }
        })
        .collect()
}

/// Decompose `y` with period `m`. Needs at least `2m + 1` values.
pub fn decompose(y: &[f64], m: usize) -> Result<Decomposition> {
    if m < 2 {
        return Err(domain!("STL period must be at least 2, got {m}"));
    }
    if y.len() < 2 * m + 1 {
        return Err(domain!("STL needs {} values for period {m}, got {}", 2 * m + 1, y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(domain!("series contains non-finite values"));
    }
    let n = y.len();
    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut weights: Option<Vec<f64>> = None;
    for outer in 0..=ROBUST_PASSES {
        for _ in 0..INNER_PASSES {
            inner_pass(y, m, &mut trend, &mut seasonal, weights.as_deref());
        }
        if outer < ROBUST_PASSES {
            let r: Vec<f64> = (0..n).map(|t| y[t] - seasonal[t] - trend[t]).collect();
            weights = Some(bisquare_weights(&r));
        }
    }
    let remainder = (0..n).map(|t| y[t] - seasonal[t] - trend[t]).collect();
    Ok(Decomposition {
        seasonal,
        trend,
        remainder,
        weights: weights.unwrap_or_else(|| vec![1.0; n]),
    })
}

/// Model for the non-seasonal component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inner {
    Naive,
    Drift,
    Ses,
    /// AR(p), p ∈ 1..=4 by AIC.
    ArP,
}

impl Inner {
    pub const ALL: [Inner; 4] = [Inner::Naive, Inner::Drift, Inner::Ses, Inner::ArP];

    pub fn name(&self) -> &'static str {
        match self {
            Inner::Naive => "naive",
            Inner::Drift => "drift",
            Inner::Ses => "ses",
            Inner::ArP => "ar_p",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum InnerState {
    Naive(f64),
    Drift(Drift),
    Ses(Ses),
    Ar(Ar),
}

impl InnerState {
    pub(crate) fn fit(kind: Inner, ns: &[f64]) -> Result<(Self, Vec<f64>)> {
        Ok(match kind {
            Inner::Naive => (
                InnerState::Naive(ns[ns.len() - 1]),
                ns.windows(2).map(|w| w[1] - w[0]).collect(),
            ),
            Inner::Drift => (
                InnerState::Drift(Drift::new(ns)),
                super::simple::drift_residuals(ns),
            ),
            Inner::Ses => {
                let (s, r) = Ses::fit(ns)?;
                (InnerState::Ses(s), r)
            }
            Inner::ArP => {
                let (a, r) = Ar::fit(ns)?;
                (InnerState::Ar(a), r)
            }
        })
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        match self {
            InnerState::Naive(v) => vec![*v; h],
            InnerState::Drift(d) => d.forecast(h),
            InnerState::Ses(s) => vec![s.level; h],
            InnerState::Ar(a) => a.forecast(h),
        }
    }

    pub(crate) fn observe(&mut self, y: f64) {
        match self {
            InnerState::Naive(v) => *v = y,
            InnerState::Drift(d) => d.observe(y),
            InnerState::Ses(s) => s.observe(y),
            InnerState::Ar(a) => a.observe(y),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Stl {
    pub(crate) inner_kind: Inner,
    pub(crate) inner: InnerState,
    pub(crate) last_season: Vec<f64>,
    pub(crate) pos: usize,
    pub(crate) decomposition: Decomposition,
}

impl Stl {
    pub(crate) fn fit(y: &[f64], m: usize, inner_kind: Inner) -> Result<(Self, Vec<f64>)> {
        let d = decompose(y, m)?;
        let ns = d.non_seasonal();
        let (inner, res) = InnerState::fit(inner_kind, &ns)?;
        let n = y.len();
        Ok((
            Stl {
                inner_kind,
                inner,
                last_season: d.seasonal[n - m..].to_vec(),
                pos: 0,
                decomposition: d,
            },
            res,
        ))
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        let m = self.last_season.len();
        self.inner
            .forecast(h)
            .into_iter()
            .enumerate()
            .map(|(k, ns)| self.last_season[(self.pos + k) % m] + ns)
            .collect()
    }

    pub(crate) fn observe(&mut self, y: f64) {
        let s = self.last_season[self.pos];
        self.inner.observe(y - s);
        self.pos = (self.pos + 1) % self.last_season.len();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        assert_eq!(trend_span(24), 37);
        assert_eq!(trend_span(4), 7);
        assert_eq!(low_pass_span(24), 25);
        assert_eq!(low_pass_span(7), 7);
    }

    #[test]
    fn pure_season_plus_line_is_separated() {
        let m = 12;
        let y: Vec<f64> = (0..10 * m)
            .map(|t| {
                let s = libm::sin(2.0 * core::f64::consts::PI * t as f64 / m as f64);
                5.0 + 0.01 * t as f64 + 2.0 * s
            })
            .collect();
        let d = decompose(&y, m).unwrap();
        for t in 2 * m..8 * m {
            let s = 2.0 * libm::sin(2.0 * core::f64::consts::PI * t as f64 / m as f64);
            assert!((d.seasonal[t] - s).abs() < 0.05, "t {t}: {} vs {s}", d.seasonal[t]);
            assert!(d.remainder[t].abs() < 0.05);
        }
    }

    #[test]
    fn bisquare_downweights_outliers() {
        let mut r = vec![0.1, -0.1, 0.2, -0.2, 0.1];
        r.push(50.0);
        let w = bisquare_weights(&r);
        assert_eq!(w[5], 0.0);
        assert!(w[0] > 0.9);
        assert!(bisquare_weights(&[0.0; 4]).iter().all(|w| *w == 1.0));
    }
}
