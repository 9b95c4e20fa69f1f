//! TBATS-lite: additive trend, multiplicative trigonometric seasonality.
//!
//! ```text
//! ŷ_{t+h|t} = (l_t + h b_t) · ∏_i F_i(h)
//! F_i(h)    = 1 + Σ_j [ s_j cos(hλ_j) + s*_j sin(hλ_j) ],   λ_j = 2πj/m_i
//! l_t       = α y_t / ∏_i F_i + (1 − α)(l_{t−1} + b_{t−1})
//! b_t       = β (l_t − l_{t−1}) + (1 − β) b_{t−1}
//! s_{j,t}   = s_{j,t−1} cos λ_j + s*_{j,t−1} sin λ_j + γ_i d_{i,t}
//! s*_{j,t}  = −s_{j,t−1} sin λ_j + s*_{j,t−1} cos λ_j
//! ```
//!
//! `d_{i,t}` is block `i`'s seasonal innovation, the observed ratio
//! `y_t / ((l_{t−1} + b_{t−1}) ∏_{k≠i} F_k)` minus the predicted `F_i`.
//! With no harmonics, or zero initial states and `γ = 0`, every factor stays
//! at 1 and the level path is Holt's linear trend.

use alloc::vec;
use alloc::vec::Vec;

use super::optim::{multi_start, smoothing_starts, Bounds, MAX_EVALS, SMOOTHING_STARTS};
use crate::error::{domain, Error, Result};

/// Factors below this are treated as this value to keep the level finite.
const MIN_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block {
    pub(crate) period: usize,
    pub(crate) gamma: f64,
    pub(crate) cos: Vec<f64>,
    pub(crate) sin: Vec<f64>,
    pub(crate) s: Vec<f64>,
    pub(crate) s_star: Vec<f64>,
    /// Guarded factor from the latest rotation.
    factor: f64,
}

impl Block {
    fn new(period: usize, harmonics: usize, gamma: f64) -> Self {
        let (cos, sin) = (1..=harmonics)
            .map(|j| {
                let l = 2.0 * core::f64::consts::PI * j as f64 / period as f64;
                (libm::cos(l), libm::sin(l))
            })
            .unzip();
        Self {
            period,
            gamma,
            cos,
            sin,
            s: vec![0.0; harmonics],
            s_star: vec![0.0; harmonics],
            factor: 1.0,
        }
    }

    fn harmonics(&self) -> usize {
        self.s.len()
    }

    /// Rotate one step; returns the predicted factor.
    fn rotate(&mut self) -> f64 {
        let mut f = 1.0;
        for j in 0..self.harmonics() {
            let (s, st) = (self.s[j], self.s_star[j]);
            self.s[j] = s * self.cos[j] + st * self.sin[j];
            self.s_star[j] = -s * self.sin[j] + st * self.cos[j];
            f += self.s[j];
        }
        f
    }

    fn factor_at(&self, h: usize) -> f64 {
        let mut f = 1.0;
        if h == 1 {
            for j in 0..self.harmonics() {
                f += self.s[j] * self.cos[j] + self.s_star[j] * self.sin[j];
            }
            return f;
        }
        for j in 0..self.harmonics() {
            let l = 2.0 * core::f64::consts::PI * (j + 1) as f64 * h as f64 / self.period as f64;
            f += self.s[j] * libm::cos(l) + self.s_star[j] * libm::sin(l);
        }
        f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TbatsLite {
    pub(crate) alpha: f64,
    pub(crate) beta: f64,
    pub(crate) level: f64,
    pub(crate) trend: f64,
    pub(crate) blocks: Vec<Block>,
}

fn guard(f: f64) -> f64 {
    if f.is_finite() {
        f.max(MIN_FACTOR)
    } else {
        MIN_FACTOR
    }
}

impl TbatsLite {
    pub(crate) fn new(
        alpha: f64,
        beta: f64,
        level: f64,
        trend: f64,
        periods: &[usize],
        harmonics: &[usize],
        gammas: &[f64],
    ) -> Self {
        let blocks = periods
            .iter()
            .zip(harmonics)
            .zip(gammas)
            .map(|((&p, &k), &g)| Block::new(p, k, g))
            .collect();
        Self {
            alpha,
            beta,
            level,
            trend,
            blocks,
        }
    }

    pub(crate) fn set_harmonic_state(&mut self, block: usize, s: &[f64], s_star: &[f64]) {
        self.blocks[block].s.copy_from_slice(s);
        self.blocks[block].s_star.copy_from_slice(s_star);
    }

    /// One-step forecast without changing the state.
    pub(crate) fn one_step(&self) -> f64 {
        let f: f64 = self.blocks.iter().map(|b| guard(b.factor_at(1))).product();
        (self.level + self.trend) * f
    }

    pub(crate) fn observe(&mut self, y: f64) {
        let mut total = 1.0;
        for b in &mut self.blocks {
            b.factor = guard(b.rotate());
            total *= b.factor;
        }
        let base = self.level + self.trend;
        let level = self.alpha * y / total + (1.0 - self.alpha) * base;
        self.trend = self.beta * (level - self.level) + (1.0 - self.beta) * self.trend;
        self.level = level;
        if libm::fabs(base) > 1e-12 {
            for b in &mut self.blocks {
                let others = total / b.factor;
                let d = y / (base * others) - b.factor;
                for s in &mut b.s {
                    *s += b.gamma * d;
                }
            }
        }
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        (1..=h)
            .map(|k| {
                let f: f64 = self.blocks.iter().map(|b| guard(b.factor_at(k))).product();
                (self.level + k as f64 * self.trend) * f
            })
            .collect()
    }

    pub(crate) fn gammas(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.gamma).collect()
    }

    /// Run through `series`; returns the one-step residuals.
    pub(crate) fn filter(&mut self, series: &[f64]) -> Vec<f64> {
        series
            .iter()
            .map(|&y| {
                let e = y - self.one_step();
                self.observe(y);
                e
            })
            .collect()
    }
}

/// Heuristic initial state: an OLS line for level and trend (level placed
/// one step before the first observation) and a Fourier projection of the
/// detrended ratios for the harmonic states, block by block.
fn initial_state(series: &[f64], periods: &[usize], harmonics: &[usize]) -> TbatsLite {
    let n = series.len();
    let nf = n as f64;
    let mean_t = (nf - 1.0) / 2.0;
    let mean_y = series.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, &y) in series.iter().enumerate() {
        let dt = t as f64 - mean_t;
        sxy += dt * (y - mean_y);
        sxx += dt * dt;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = mean_y - slope * mean_t;
    let mut ratio: Vec<f64> = series
        .iter()
        .enumerate()
        .map(|(t, &y)| {
            let line = intercept + slope * t as f64;
            if line > 0.0 {
                y / line - 1.0
            } else {
                0.0
            }
        })
        .collect();

    let mut model = TbatsLite::new(
        0.1,
        0.1,
        intercept - slope,
        slope,
        periods,
        harmonics,
        &vec![0.1; periods.len()],
    );
    for (bi, &m) in periods.iter().enumerate() {
        let k = harmonics[bi];
        let used = (n / m) * m;
        if k == 0 || used == 0 {
            continue;
        }
        let mut s = vec![0.0; k];
        let mut s_star = vec![0.0; k];
        for j in 1..=k {
            let nyquist = 2 * j == m;
            let scale = if nyquist { 1.0 } else { 2.0 } / used as f64;
            let l = 2.0 * core::f64::consts::PI * j as f64 / m as f64;
            let (mut a, mut b) = (0.0, 0.0);
            for (t, r) in ratio[..used].iter().enumerate() {
                let x = l * (t + 1) as f64;
                a += r * libm::cos(x);
                b += r * libm::sin(x);
            }
            s[j - 1] = a * scale;
            s_star[j - 1] = if nyquist { 0.0 } else { b * scale };
        }
        // remove this block's fitted pattern before projecting the next
        for (t, r) in ratio.iter_mut().enumerate() {
            let mut v = 0.0;
            for j in 1..=k {
                let x = 2.0 * core::f64::consts::PI * j as f64 * (t + 1) as f64 / m as f64;
                v += s[j - 1] * libm::cos(x) + s_star[j - 1] * libm::sin(x);
            }
            *r -= v;
        }
        model.set_harmonic_state(bi, &s, &s_star);
    }
    model
}

fn with_params(base: &TbatsLite, x: &[f64]) -> TbatsLite {
    let nb = base.blocks.len();
    let mut m = base.clone();
    m.alpha = x[0];
    m.beta = x[1];
    for (b, &g) in m.blocks.iter_mut().zip(&x[2..2 + nb]) {
        b.gamma = g;
    }
    m.level = x[2 + nb];
    m.trend = x[3 + nb];
    m
}

fn sse(base: &TbatsLite, x: &[f64], series: &[f64]) -> f64 {
    let mut m = with_params(base, x);
    let mut total = 0.0;
    for &y in series {
        let e = y - m.one_step();
        total += e * e;
        m.observe(y);
    }
    total
}

/// Jointly fit (α, β, γ_i) and the initial level and trend by one-step SSE.
/// Harmonic initial states come from the Fourier projection.
pub(crate) fn fit(series: &[f64], periods: &[usize], harmonics: &[usize]) -> Result<(TbatsLite, Vec<f64>)> {
    if periods.is_empty() || periods.len() != harmonics.len() {
        return Err(domain!("need one harmonic count per seasonal period"));
    }
    for (&m, &k) in periods.iter().zip(harmonics) {
        if m < 2 {
            return Err(domain!("seasonal period {m} is too short"));
        }
        if 2 * k > m {
            return Err(domain!("{k} harmonics exceed the Nyquist limit of period {m}"));
        }
    }
    let longest = periods.iter().copied().max().unwrap_or(0);
    if series.len() < 2 * longest {
        return Err(domain!(
            "TBATS-lite needs {} values, got {}",
            2 * longest,
            series.len()
        ));
    }
    if let Some(v) = series.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(domain!("multiplicative seasonality needs positive values, found {v}"));
    }

    let base = initial_state(series, periods, harmonics);
    let nb = periods.len();
    let scale = series.iter().sum::<f64>() / series.len() as f64;
    let mut bounds = vec![Bounds::SMOOTHING; 2 + nb];
    bounds.extend([Bounds::FREE, Bounds::FREE]);
    let mut step = vec![0.1; 2 + nb];
    step.extend([0.1 * scale, 0.01 * scale / longest as f64]);
    let starts = smoothing_starts(2 + nb, &[base.level, base.trend]);
    debug_assert_eq!(starts.len(), SMOOTHING_STARTS.len());

    let best = multi_start(|x| sse(&base, x, series), &starts, &step, &bounds, MAX_EVALS);
    if !best.value.is_finite() {
        return Err(Error::Numeric("TBATS-lite SSE is not finite".into()));
    }
    let mut model = with_params(&base, &best.x);
    let res = model.filter(series);
    if !model.level.is_finite() || !model.trend.is_finite() {
        return Err(Error::Numeric("TBATS-lite state diverged".into()));
    }
    Ok((model, res))
}
