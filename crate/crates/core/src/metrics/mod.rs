//! Forecast error metrics, residual diagnostics and distribution comparison.
//!
//! SMAPE follows the printed convention `100/N · Σ |ŷ−y| / (ŷ+y)`: no factor
//! 2 and no absolute values in the denominator. Demand and clamped forecasts
//! are nonnegative, so each term lies in [0, 1] and SMAPE in [0, 100]. Steps
//! where both values are zero are skipped. Values are therefore half of the
//! common `200/N` variant and only comparable within this crate.

mod diagnostics;
mod distribution;
pub(crate) mod special;

use alloc::vec::Vec;

pub use diagnostics::{acf, histogram, ljung_box, residual_diagnostics, Acf, Histogram, LjungBox, ResidualDiagnostics};
pub use distribution::{ks_two_sample, Ecdf, KsTest};
pub use special::{chi_squared_sf, kolmogorov_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q};

use crate::error::{domain, Error, Result};

/// Which error metric drives per-instant losses and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Smape,
    Mase,
}

/// One SMAPE term in percent, or `None` when both values are zero.
#[inline]
pub fn smape_term(actual: f64, forecast: f64) -> Option<f64> {
    let denom = forecast + actual;
    if denom == 0.0 {
        None
    } else {
        Some(100.0 * libm::fabs(forecast - actual) / denom)
    }
}

pub fn smape(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    if actual.len() != forecast.len() {
        return Err(domain!(
            "length mismatch: {} actual vs {} forecast",
            actual.len(),
            forecast.len()
        ));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (&y, &f) in actual.iter().zip(forecast) {
        if let Some(t) = smape_term(y, f) {
            sum += t;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::UndefinedMetric("SMAPE: every term is 0/0".into()));
    }
    Ok(sum / n as f64)
}

/// Accuracy in percent, `100 − SMAPE`.
pub fn accuracy(smape_percent: f64) -> f64 {
    100.0 - smape_percent
}

/// In-sample MAE of the one-step seasonal naive forecast, the MASE scale.
pub fn seasonal_naive_mae(training: &[f64], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(domain!("season length must be positive"));
    }
    if training.len() <= m {
        return Err(domain!(
            "training length {} must exceed the season {m}",
            training.len()
        ));
    }
    let sum: f64 = training
        .windows(m + 1)
        .map(|w| libm::fabs(w[m] - w[0]))
        .sum();
    Ok(sum / (training.len() - m) as f64)
}

pub fn mase(actual: &[f64], forecast: &[f64], training: &[f64], m: usize) -> Result<f64> {
    if actual.len() != forecast.len() {
        return Err(domain!(
            "length mismatch: {} actual vs {} forecast",
            actual.len(),
            forecast.len()
        ));
    }
    if actual.is_empty() {
        return Err(domain!("empty test horizon"));
    }
    let scale = seasonal_naive_mae(training, m)?;
    if scale == 0.0 {
        return Err(Error::UndefinedMetric(
            "MASE: training series is exactly periodic".into(),
        ));
    }
    let mae = actual
        .iter()
        .zip(forecast)
        .map(|(y, f)| libm::fabs(y - f))
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mae / scale)
}

/// SMAPE, MASE and absolute errors of one forecast horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub smape: f64,
    pub mase: f64,
    pub per_step_abs_err: Vec<f64>,
    pub horizon: usize,
    pub season: usize,
}

impl ErrorReport {
    pub fn evaluate(actual: &[f64], forecast: &[f64], training: &[f64], m: usize) -> Result<Self> {
        let smape = smape(actual, forecast)?;
        let mase = mase(actual, forecast, training, m)?;
        Ok(Self {
            smape,
            mase,
            per_step_abs_err: actual
                .iter()
                .zip(forecast)
                .map(|(y, f)| libm::fabs(y - f))
                .collect(),
            horizon: actual.len(),
            season: m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smape_examples() {
        assert_eq!(smape(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(smape(&[1.0, 1.0], &[3.0, 3.0]).unwrap(), 50.0);
        assert!(smape(&[1.0], &[1.0, 2.0]).is_err());
        assert!(matches!(
            smape(&[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::UndefinedMetric(_))
        ));
        // zero-zero steps are skipped and N shrinks
        assert_eq!(smape(&[0.0, 1.0], &[0.0, 3.0]).unwrap(), 50.0);
    }

    #[test]
    fn mase_examples() {
        let train = [1.0, 3.0, 1.0, 3.0, 1.0, 3.0];
        assert_eq!(mase(&[7.0, 8.0], &[7.0, 8.0], &train, 1).unwrap(), 0.0);
        let scale = seasonal_naive_mae(&train, 1).unwrap();
        assert!((scale - 2.0).abs() < 1e-15);
        assert!((mase(&[7.0, 8.0], &[9.0, 6.0], &train, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            mase(&[1.0], &[1.0], &[1.0, 2.0, 1.0, 2.0], 2),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(mase(&[1.0], &[1.0], &[1.0, 2.0], 2).is_err());
    }

    proptest! {
        #[test]
        fn smape_is_symmetric_and_scale_free(
            pairs in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0), 1..50),
            c in 0.01f64..100.0,
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let f: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Ok(s) = smape(&a, &f) {
                prop_assert!((0.0..=100.0).contains(&s));
                prop_assert!((s - smape(&f, &a).unwrap()).abs() < 1e-9);
                let ca: Vec<f64> = a.iter().map(|v| v * c).collect();
                let cf: Vec<f64> = f.iter().map(|v| v * c).collect();
                prop_assert!((s - smape(&ca, &cf).unwrap()).abs() < 1e-9);
            }
        }

        #[test]
        fn mase_is_scale_free(
            train in prop::collection::vec(0.0f64..50.0, 10..40),
            test in prop::collection::vec((0.0f64..50.0, 0.0f64..50.0), 1..10),
            c in 0.01f64..100.0,
        ) {
            let a: Vec<f64> = test.iter().map(|p| p.0).collect();
            let f: Vec<f64> = test.iter().map(|p| p.1).collect();
            if let Ok(m) = mase(&a, &f, &train, 3) {
                prop_assert!(m >= 0.0);
                let s = |v: &[f64]| v.iter().map(|x| x * c).collect::<Vec<_>>();
                let m2 = mase(&s(&a), &s(&f), &s(&train), 3).unwrap();
                prop_assert!((m - m2).abs() <= 1e-9 * (1.0 + m));
            }
        }
    }
}
