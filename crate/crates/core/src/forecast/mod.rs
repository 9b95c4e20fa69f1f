//! Per-partition forecasters behind one fit/forecast contract.
//!
//! Every model is a small state machine: [`ForecastModel::forecast`] reads the
//! state, [`ForecastModel::observe`] advances it by one observation without
//! refitting. Rolling one-step evaluation alternates the two.
//!
//! Models work on whatever scale they are fitted on; [`select`] wraps them
//! with the Box-Cox transform and the nonnegativity clamp.

mod holt_winters;
mod inner;
mod loess;
pub mod optim;
mod select;
mod simple;
mod stl;
mod tbats;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};

pub use inner::MAX_AR_ORDER;
pub use select::{rolling_one_step, select_model, CandidateScore, Forecaster, Selection};
pub use stl::{decompose, low_pass_span, trend_span, Decomposition, Inner, SEASONAL_SPAN};

/// Which family a model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Mean of past same-slot values.
    Baseline,
    Naive,
    SeasonalNaive,
    Drift,
    HoltWinters,
    Stl(Inner),
    TbatsLite,
}

impl ModelKind {
    pub fn name(&self) -> String {
        match self {
            ModelKind::Baseline => "baseline".into(),
            ModelKind::Naive => "naive".into(),
            ModelKind::SeasonalNaive => "seasonal_naive".into(),
            ModelKind::Drift => "drift".into(),
            ModelKind::HoltWinters => "holt_winters".into(),
            ModelKind::Stl(i) => alloc::format!("stl({})", i.name()),
            ModelKind::TbatsLite => "tbats_lite".into(),
        }
    }

    /// Inverse of [`ModelKind::name`].
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "baseline" => ModelKind::Baseline,
            "naive" => ModelKind::Naive,
            "seasonal_naive" => ModelKind::SeasonalNaive,
            "drift" => ModelKind::Drift,
            "holt_winters" => ModelKind::HoltWinters,
            "tbats_lite" => ModelKind::TbatsLite,
            _ => {
                let inner = s
                    .strip_prefix("stl(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(alloc::format!("unknown model kind {s:?}")))?;
                let inner = Inner::ALL
                    .into_iter()
                    .find(|i| i.name() == inner)
                    .ok_or_else(|| Error::Parse(alloc::format!("unknown STL inner model {inner:?}")))?;
                ModelKind::Stl(inner)
            }
        })
    }

    /// Every kind, STL once per inner model.
    pub fn all() -> Vec<ModelKind> {
        let mut v = vec![
            ModelKind::Baseline,
            ModelKind::Naive,
            ModelKind::SeasonalNaive,
            ModelKind::Drift,
            ModelKind::HoltWinters,
        ];
        v.extend(Inner::ALL.into_iter().map(ModelKind::Stl));
        v.push(ModelKind::TbatsLite);
        v
    }
}

/// Simple benchmark kinds accepted by [`fit_simple`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpleKind {
    Naive,
    SeasonalNaive,
    Drift,
}

/// Settings shared by every fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Main seasonal period in steps.
    pub season: usize,
    /// Seasons averaged by the baseline; `usize::MAX` means all.
    pub baseline_seasons: usize,
    /// TBATS-lite periods; empty means `[season]`.
    pub tbats_periods: Vec<usize>,
    /// Harmonics per TBATS-lite period.
    pub tbats_harmonics: usize,
}

impl FitOptions {
    pub fn new(season: usize) -> Self {
        Self {
            season,
            baseline_seasons: usize::MAX,
            tbats_periods: Vec::new(),
            tbats_harmonics: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum State {
    Baseline(simple::Baseline),
    Naive(f64),
    SeasonalNaive(simple::SeasonalNaive),
    Drift(simple::Drift),
    HoltWinters(holt_winters::HoltWinters),
    Stl(stl::Stl),
    Tbats(tbats::TbatsLite),
}

/// A fitted forecaster.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastModel {
    kind: ModelKind,
    periods: Vec<usize>,
    fitted_on: usize,
    residuals: Vec<f64>,
    state: State,
}

fn check_finite(series: &[f64]) -> Result<()> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(domain!("series contains non-finite values"));
    }
    Ok(())
}

/// Seasonal averaging baseline over `n_seasons` past seasons (fewer when the
/// history is short).
pub fn fit_baseline(series: &[f64], m: usize, n_seasons: usize) -> Result<ForecastModel> {
    check_finite(series)?;
    if m == 0 || n_seasons == 0 {
        return Err(domain!("baseline needs a positive season and season count"));
    }
    if series.len() < m {
        return Err(domain!("baseline needs at least one season ({m}), got {}", series.len()));
    }
    Ok(ForecastModel {
        kind: ModelKind::Baseline,
        periods: vec![m],
        fitted_on: series.len(),
        residuals: simple::Baseline::residuals(series, m, n_seasons),
        state: State::Baseline(simple::Baseline {
            history: series.to_vec(),
            m,
            n_seasons,
        }),
    })
}

/// Naive, seasonal naive (period `m`) or drift.
pub fn fit_simple(series: &[f64], kind: SimpleKind, m: usize) -> Result<ForecastModel> {
    check_finite(series)?;
    if series.len() < 2 {
        return Err(domain!("simple models need at least 2 values"));
    }
    let (model_kind, residuals, state) = match kind {
        SimpleKind::Naive => (
            ModelKind::Naive,
            simple::naive_residuals(series),
            State::Naive(series[series.len() - 1]),
        ),
        SimpleKind::SeasonalNaive => {
            if m == 0 || series.len() < m {
                return Err(domain!("seasonal naive needs a full season ({m}), got {}", series.len()));
            }
            (
                ModelKind::SeasonalNaive,
                simple::seasonal_naive_residuals(series, m),
                State::SeasonalNaive(simple::SeasonalNaive::new(series, m)),
            )
        }
        SimpleKind::Drift => (
            ModelKind::Drift,
            simple::drift_residuals(series),
            State::Drift(simple::Drift::new(series)),
        ),
    };
    Ok(ForecastModel {
        kind: model_kind,
        periods: if kind == SimpleKind::SeasonalNaive { vec![m] } else { Vec::new() },
        fitted_on: series.len(),
        residuals,
        state,
    })
}

/// Additive Holt-Winters with period `m`.
pub fn fit_holt_winters(series: &[f64], m: usize) -> Result<ForecastModel> {
    check_finite(series)?;
    let (hw, residuals) = holt_winters::fit(series, m)?;
    Ok(ForecastModel {
        kind: ModelKind::HoltWinters,
        periods: vec![m],
        fitted_on: series.len(),
        residuals,
        state: State::HoltWinters(hw),
    })
}

/// STL decomposition with period `m` plus `inner` on the non-seasonal part.
pub fn fit_stl(series: &[f64], m: usize, inner: Inner) -> Result<ForecastModel> {
    let (s, residuals) = stl::Stl::fit(series, m, inner)?;
    Ok(ForecastModel {
        kind: ModelKind::Stl(inner),
        periods: vec![m],
        fitted_on: series.len(),
        residuals,
        state: State::Stl(s),
    })
}

/// TBATS-lite with `harmonics[i]` trigonometric terms for `periods[i]`.
pub fn fit_tbats_lite(series: &[f64], periods: &[usize], harmonics: &[usize]) -> Result<ForecastModel> {
    let (t, residuals) = tbats::fit(series, periods, harmonics)?;
    Ok(ForecastModel {
        kind: ModelKind::TbatsLite,
        periods: periods.to_vec(),
        fitted_on: series.len(),
        residuals,
        state: State::Tbats(t),
    })
}

/// Explicit TBATS-lite state, for simulation and checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TbatsSpec {
    pub alpha: f64,
    pub beta: f64,
    pub level: f64,
    pub trend: f64,
    pub periods: Vec<usize>,
    pub gammas: Vec<f64>,
    /// `(s, s*)` per period, one entry per harmonic.
    pub harmonics: Vec<(Vec<f64>, Vec<f64>)>,
}

impl TbatsSpec {
    /// A model in this state that has seen no data.
    pub fn build(&self) -> Result<ForecastModel> {
        let n = self.periods.len();
        if self.gammas.len() != n || self.harmonics.len() != n {
            return Err(domain!("periods, gammas and harmonic states must align"));
        }
        let counts: Vec<usize> = self.harmonics.iter().map(|(s, _)| s.len()).collect();
        if self.harmonics.iter().any(|(s, st)| s.len() != st.len()) {
            return Err(domain!("s and s* must have equal length"));
        }
        let params = [self.alpha, self.beta]
            .into_iter()
            .chain(self.gammas.iter().copied());
        for p in params {
            if !(0.0..=1.0).contains(&p) {
                return Err(domain!("smoothing parameter {p} outside [0, 1]"));
            }
        }
        let mut t = tbats::TbatsLite::new(
            self.alpha,
            self.beta,
            self.level,
            self.trend,
            &self.periods,
            &counts,
            &self.gammas,
        );
        for (i, (s, st)) in self.harmonics.iter().enumerate() {
            t.set_harmonic_state(i, s, st);
        }
        Ok(ForecastModel {
            kind: ModelKind::TbatsLite,
            periods: self.periods.clone(),
            fitted_on: 0,
            residuals: Vec::new(),
            state: State::Tbats(t),
        })
    }
}

/// Fit any kind with shared options.
pub fn fit(kind: ModelKind, series: &[f64], opts: &FitOptions) -> Result<ForecastModel> {
    let m = opts.season;
    match kind {
        ModelKind::Baseline => fit_baseline(series, m, opts.baseline_seasons),
        ModelKind::Naive => fit_simple(series, SimpleKind::Naive, m),
        ModelKind::SeasonalNaive => fit_simple(series, SimpleKind::SeasonalNaive, m),
        ModelKind::Drift => fit_simple(series, SimpleKind::Drift, m),
        ModelKind::HoltWinters => fit_holt_winters(series, m),
        ModelKind::Stl(inner) => fit_stl(series, m, inner),
        ModelKind::TbatsLite => {
            let periods = if opts.tbats_periods.is_empty() {
                vec![m]
            } else {
                opts.tbats_periods.clone()
            };
            let harmonics: Vec<usize> = periods
                .iter()
                .map(|&p| opts.tbats_harmonics.min(p / 2))
                .collect();
            fit_tbats_lite(series, &periods, &harmonics)
        }
    }
}

impl ForecastModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Seasonal periods the model uses; empty for non-seasonal models.
    pub fn periods(&self) -> &[usize] {
        &self.periods
    }

    /// Length of the training series.
    pub fn fitted_on(&self) -> usize {
        self.fitted_on
    }

    /// In-sample one-step residuals after the model's warm-up.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Forecasts for the next `h` steps.
    pub fn forecast(&self, h: usize) -> Vec<f64> {
        match &self.state {
            State::Baseline(b) => b.forecast(h),
            State::Naive(v) => vec![*v; h],
            State::SeasonalNaive(s) => s.forecast(h),
            State::Drift(d) => d.forecast(h),
            State::HoltWinters(hw) => hw.forecast(h),
            State::Stl(s) => s.forecast(h),
            State::Tbats(t) => t.forecast(h),
        }
    }

    pub fn one_step(&self) -> f64 {
        self.forecast(1)[0]
    }

    /// Advance the state by one observation.
    pub fn observe(&mut self, y: f64) {
        match &mut self.state {
            State::Baseline(b) => b.observe(y),
            State::Naive(v) => *v = y,
            State::SeasonalNaive(s) => s.observe(y),
            State::Drift(d) => d.observe(y),
            State::HoltWinters(hw) => hw.observe(y),
            State::Stl(s) => s.observe(y),
            State::Tbats(t) => t.observe(y),
        }
    }

    /// Named parameters for reports.
    pub fn params(&self) -> Vec<(String, f64)> {
        let p = |k: &str, v: f64| (String::from(k), v);
        match &self.state {
            State::Baseline(b) => vec![
                p("m", b.m as f64),
                p("n_seasons", if b.n_seasons == usize::MAX { -1.0 } else { b.n_seasons as f64 }),
            ],
            State::Naive(_) => Vec::new(),
            State::SeasonalNaive(s) => vec![p("m", s.last_season.len() as f64)],
            State::Drift(d) => vec![p("slope", d.slope())],
            State::HoltWinters(hw) => vec![p("alpha", hw.alpha), p("beta", hw.beta), p("gamma", hw.gamma)],
            State::Stl(s) => match &s.inner {
                stl::InnerState::Ses(e) => vec![p("alpha", e.alpha)],
                stl::InnerState::Ar(a) => {
                    let mut v = vec![p("order", a.order() as f64), p("mean", a.mean), p("sigma2", a.sigma2)];
                    v.extend(a.coef.iter().enumerate().map(|(i, c)| (alloc::format!("phi_{}", i + 1), *c)));
                    v
                }
                stl::InnerState::Drift(d) => vec![p("slope", d.slope())],
                stl::InnerState::Naive(_) => Vec::new(),
            },
            State::Tbats(t) => {
                let mut v = vec![p("alpha", t.alpha), p("beta", t.beta)];
                v.extend(
                    t.gammas()
                        .into_iter()
                        .enumerate()
                        .map(|(i, g)| (alloc::format!("gamma_{}", i + 1), g)),
                );
                v
            }
        }
    }

    /// Level path of a TBATS-lite model.
    pub fn tbats_level_trend(&self) -> Option<(f64, f64)> {
        match &self.state {
            State::Tbats(t) => Some((t.level, t.trend)),
            _ => None,
        }
    }

    /// STL components of the training window.
    pub fn decomposition(&self) -> Option<&Decomposition> {
        match &self.state {
            State::Stl(s) => Some(&s.decomposition),
            _ => None,
        }
    }
}
