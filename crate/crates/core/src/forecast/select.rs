//! Per-cell model choice against the seasonal averaging baseline.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{fit, FitOptions, ForecastModel, ModelKind};
use crate::demand::Transform;
use crate::error::{Error, Result};
use crate::metrics::smape;

/// A model plus the transform it was fitted under. Forecasts come back on
/// the original scale, clamped at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecaster {
    pub model: ForecastModel,
    pub transform: Transform,
}

impl Forecaster {
    /// Fit `kind` on an original-scale training series.
    pub fn fit(kind: ModelKind, training: &[f64], opts: &FitOptions, transform: Transform) -> Result<Self> {
        let z: Vec<f64> = training.iter().map(|&y| transform.forward(y)).collect();
        Ok(Self {
            model: fit(kind, &z, opts)?,
            transform,
        })
    }

    pub fn predict_next(&self) -> f64 {
        let v = self.transform.inverse(self.model.one_step());
        if v < 0.0 {
            0.0
        } else {
            v
        }
    }

    pub fn observe(&mut self, y: f64) {
        self.model.observe(self.transform.forward(y));
    }
}

/// One-step forecasts for each value of `actual`, observing it afterwards.
pub fn rolling_one_step(f: &mut Forecaster, actual: &[f64]) -> Vec<f64> {
    actual
        .iter()
        .map(|&y| {
            let p = f.predict_next();
            f.observe(y);
            p
        })
        .collect()
}

/// Validation outcome of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub kind: ModelKind,
    /// `None` when the fit failed or produced non-finite forecasts.
    pub smape: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// The chosen model, already advanced through the validation window.
    pub forecaster: Forecaster,
    pub validation_smape: f64,
    /// The chosen model's rolling one-step forecasts over validation.
    pub validation_forecasts: Vec<f64>,
    pub scores: Vec<CandidateScore>,
}

fn score(
    kind: ModelKind,
    training: &[f64],
    validation: &[f64],
    opts: &FitOptions,
    transform: Transform,
) -> Result<(Forecaster, f64, Vec<f64>)> {
    let mut f = Forecaster::fit(kind, training, opts, transform)?;
    let preds = rolling_one_step(&mut f, validation);
    if preds.iter().any(|p| !p.is_finite()) {
        return Err(Error::Numeric(alloc::format!("{} produced non-finite forecasts", kind.name())));
    }
    let s = match smape(validation, &preds) {
        Ok(s) => s,
        // all-zero validation predicted exactly
        Err(Error::UndefinedMetric(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok((f, s, preds))
}

/// Fit every candidate on `training`, score one-step rolling SMAPE on
/// `validation` (both original scale), and keep the best. The baseline is
/// scored first and is replaced only by a strictly lower SMAPE; candidates
/// whose fit fails are recorded and skipped.
pub fn select_model(
    training: &[f64],
    validation: &[f64],
    candidates: &[ModelKind],
    opts: &FitOptions,
    transform: Transform,
) -> Result<Selection> {
    let (mut best, mut best_smape, mut best_preds) = score(ModelKind::Baseline, training, validation, opts, transform)?;
    let mut scores = alloc::vec![CandidateScore {
        kind: ModelKind::Baseline,
        smape: Some(best_smape),
        error: None,
    }];
    for &kind in candidates {
        if kind == ModelKind::Baseline || scores.iter().any(|s| s.kind == kind) {
            continue;
        }
        match score(kind, training, validation, opts, transform) {
            Ok((f, s, preds)) => {
                scores.push(CandidateScore {
                    kind,
                    smape: Some(s),
                    error: None,
                });
                if s < best_smape {
                    best = f;
                    best_smape = s;
                    best_preds = preds;
                }
            }
            Err(e) => scores.push(CandidateScore {
                kind,
                smape: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(Selection {
        forecaster: best,
        validation_smape: best_smape,
        validation_forecasts: best_preds,
        scores,
    })
}
