//! Residual diagnostics: sample ACF with its ±2/√N band, the Ljung-Box
//! portmanteau test, and a histogram.

use alloc::vec;
use alloc::vec::Vec;

use super::special::chi_squared_sf;
use crate::error::{domain, Error, Result};

/// Sample autocorrelations at lags `0..=max_lag` with the white-noise band.
#[derive(Debug, Clone, PartialEq)]
pub struct Acf {
    pub values: Vec<f64>,
    /// Half-width of the significance band, 2/√N.
    pub band: f64,
}

impl Acf {
    /// Share of lags `1..=max_lag` whose autocorrelation lies inside the band.
    pub fn fraction_inside_band(&self) -> f64 {
        let lags = &self.values[1..];
        if lags.is_empty() {
            return 1.0;
        }
        lags.iter().filter(|r| libm::fabs(**r) <= self.band).count() as f64 / lags.len() as f64
    }
}

/// Biased-normalization sample ACF.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Acf> {
    let n = x.len();
    if n < max_lag + 1 {
        return Err(domain!("series of length {n} too short for lag {max_lag}"));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    if c0 == 0.0 {
        return Err(Error::UndefinedMetric("ACF of a constant series".into()));
    }
    let values = (0..=max_lag)
        .map(|k| {
            centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect();
    Ok(Acf {
        values,
        band: 2.0 / libm::sqrt(n as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LjungBox {
    pub statistic: f64,
    pub p_value: f64,
    pub lags: usize,
}

impl LjungBox {
    pub fn is_white_noise(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// `Q = N(N+2) Σ_{k=1..L} ρ̂_k² / (N−k)` against χ²(L).
pub fn ljung_box(residuals: &[f64], max_lag: usize) -> Result<LjungBox> {
    let n = residuals.len();
    if max_lag == 0 {
        return Err(domain!("Ljung-Box needs at least one lag"));
    }
    if n <= max_lag {
        return Err(domain!("series of length {n} too short for lag {max_lag}"));
    }
    let r = acf(residuals, max_lag)?;
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * (1..=max_lag)
            .map(|k| r.values[k] * r.values[k] / (nf - k as f64))
            .sum::<f64>();
    Ok(LjungBox {
        statistic: q,
        p_value: chi_squared_sf(q, max_lag),
        lags: max_lag,
    })
}

/// Equal-width histogram over `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() || bins == 0 {
        return Err(domain!("histogram needs values and at least one bin"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(domain!("histogram of non-finite values"));
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0; bins];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Bundle of residual checks for one fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDiagnostics {
    pub mean: f64,
    pub std_dev: f64,
    pub acf: Acf,
    pub ljung_box: LjungBox,
    pub histogram: Histogram,
}

pub fn residual_diagnostics(residuals: &[f64], max_lag: usize, bins: usize) -> Result<ResidualDiagnostics> {
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    Ok(ResidualDiagnostics {
        mean,
        std_dev: libm::sqrt(var),
        acf: acf(residuals, max_lag)?,
        ljung_box: ljung_box(residuals, max_lag)?,
        histogram: histogram(residuals, bins)?,
    })
}
