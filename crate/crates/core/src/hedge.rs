//! Discounted HEDGE over tessellation experts, choosing one expert per step.
//!
//! At every step the expert with the largest weight is chosen, then each
//! expert's raw error `e_i` is turned into a loss `l_i = e_i / Σ_j e_j` and
//! the weights are updated as `w_i ← w_i^γ · β^{l_i}` and renormalized to
//! sum to one. `γ = 1` is classic HEDGE; smaller `γ` forgets old performance
//! geometrically, so the combiner can follow an expert that has only recently
//! become the better one.
//!
//! Weights are kept as logarithms. Renormalization commutes with the update
//! up to a common factor, so it never changes which expert is chosen.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Result};

/// Smallest β used inside the logarithm; keeps `β = 0` from producing
/// infinite log-weights.
const MIN_BETA: f64 = 1e-300;

/// One step of the decision trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub chosen: usize,
    pub errors: Vec<f64>,
    pub losses: Vec<f64>,
    /// Normalized weights the choice was made from.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState {
    log_weights: Vec<f64>,
    beta: f64,
    gamma: f64,
    incumbent: Option<usize>,
}

impl HedgeState {
    /// Uniform initial weights `1/num_experts`.
    pub fn new(num_experts: usize, beta: f64, gamma: f64) -> Result<Self> {
        if num_experts == 0 {
            return Err(domain!("at least one expert is required"));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(domain!("beta {beta} outside [0, 1]"));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(domain!("gamma {gamma} outside [0, 1]"));
        }
        let w0 = -libm::log(num_experts as f64);
        Ok(Self {
            log_weights: vec![w0; num_experts],
            beta,
            gamma,
            incumbent: None,
        })
    }

    /// Classic HEDGE: no discounting.
    pub fn classic(num_experts: usize, beta: f64) -> Result<Self> {
        Self::new(num_experts, beta, 1.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn num_experts(&self) -> usize {
        self.log_weights.len()
    }

    /// Current normalized weights.
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|&l| libm::exp(l)).collect()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Expert with the largest weight. The incumbent keeps ties; without an
    /// incumbent the lowest index wins.
    pub fn leader(&self) -> usize {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        match self.incumbent {
            Some(i) if self.log_weights[i] == max => i,
            _ => self
                .log_weights
                .iter()
                .position(|&l| l == max)
                .unwrap_or(0),
        }
    }

    /// Choose an expert, then absorb this step's raw errors.
    pub fn step(&mut self, raw_errors: &[f64]) -> Result<StepRecord> {
        if raw_errors.len() != self.log_weights.len() {
            return Err(domain!(
                "{} errors for {} experts",
                raw_errors.len(),
                self.log_weights.len()
            ));
        }
        if let Some(e) = raw_errors.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(domain!("expert error {e} is not a finite nonnegative number"));
        }
        let chosen = self.leader();
        let weights = self.weights();
        let losses = losses(raw_errors);

        let ln_beta = libm::log(self.beta.max(MIN_BETA));
        for (lw, &l) in self.log_weights.iter_mut().zip(&losses) {
            *lw = self.gamma * *lw + if l == 0.0 { 0.0 } else { l * ln_beta };
        }
        normalize_log(&mut self.log_weights);
        self.incumbent = Some(chosen);

        Ok(StepRecord {
            chosen,
            errors: raw_errors.to_vec(),
            losses,
            weights,
        })
    }
}

/// `l_i = e_i / Σ e`; all zero when every error is zero.
pub fn losses(raw_errors: &[f64]) -> Vec<f64> {
    let total: f64 = raw_errors.iter().sum();
    if total > 0.0 {
        raw_errors.iter().map(|e| e / total).collect()
    } else {
        vec![0.0; raw_errors.len()]
    }
}

fn normalize_log(log_weights: &mut [f64]) {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_weights.iter().map(|l| libm::exp(l - max)).sum();
    let shift = max + libm::log(sum);
    for l in log_weights {
        *l -= shift;
    }
}

/// Result of running the combiner over aligned expert error streams.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeRun {
    pub beta: f64,
    pub gamma: f64,
    pub trace: Vec<StepRecord>,
    /// Error of the chosen expert at each step.
    pub hybrid_errors: Vec<f64>,
    pub switches: usize,
}

impl HedgeRun {
    pub fn choices(&self) -> Vec<usize> {
        self.trace.iter().map(|s| s.chosen).collect()
    }

    pub fn mean_error(&self) -> f64 {
        mean(&self.hybrid_errors)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Number of steps whose choice differs from the previous step's.
pub fn count_switches(choices: &[usize]) -> usize {
    choices.windows(2).filter(|w| w[0] != w[1]).count()
}

fn check_streams(streams: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = streams.first() else {
        return Err(domain!("no expert streams"));
    };
    let len = first.len();
    if len == 0 {
        return Err(domain!("expert streams are empty"));
    }
    if streams.iter().any(|s| s.len() != len) {
        return Err(domain!("expert streams differ in length"));
    }
    Ok(len)
}

/// Run the combiner from uniform weights over `streams[expert][t]`.
pub fn run(streams: &[Vec<f64>], beta: f64, gamma: f64) -> Result<HedgeRun> {
    let len = check_streams(streams)?;
    let mut state = HedgeState::new(streams.len(), beta, gamma)?;
    let mut trace = Vec::with_capacity(len);
    let mut hybrid = Vec::with_capacity(len);
    let mut errors = vec![0.0; streams.len()];
    for t in 0..len {
        for (e, s) in errors.iter_mut().zip(streams) {
            *e = s[t];
        }
        let rec = state.step(&errors)?;
        hybrid.push(errors[rec.chosen]);
        trace.push(rec);
    }
    let choices: Vec<usize> = trace.iter().map(|s| s.chosen).collect();
    Ok(HedgeRun {
        beta,
        gamma,
        switches: count_switches(&choices),
        trace,
        hybrid_errors: hybrid,
    })
}

/// `{0.1, 0.2, …, 0.9}`.
pub fn default_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Pick (β, γ) minimizing the hybrid's mean error on validation streams.
/// Ties go to the smaller γ, then the smaller β.
pub fn tune(validation: &[Vec<f64>], beta_grid: &[f64], gamma_grid: &[f64]) -> Result<(f64, f64)> {
    check_streams(validation)?;
    if beta_grid.is_empty() || gamma_grid.is_empty() {
        return Err(domain!("empty parameter grid"));
    }
    let mut betas = beta_grid.to_vec();
    let mut gammas = gamma_grid.to_vec();
    betas.sort_by(f64::total_cmp);
    gammas.sort_by(f64::total_cmp);
    let mut best: Option<(f64, f64, f64)> = None;
    for &g in &gammas {
        for &b in &betas {
            let err = run(validation, b, g)?.mean_error();
            if best.map_or(true, |(e, _, _)| err < e) {
                best = Some((err, b, g));
            }
        }
    }
    let (_, b, g) = best.expect("grids are nonempty");
    Ok((b, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_normalization() {
        assert_eq!(losses(&[2.0, 6.0]), vec![0.25, 0.75]);
        assert_eq!(losses(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(losses(&[3.0, 3.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn single_update_matches_hand_evaluation() {
        let mut s = HedgeState::new(2, 0.1, 1.0).unwrap();
        let rec = s.step(&[2.0, 6.0]).unwrap();
        assert_eq!(rec.chosen, 0);
        assert_eq!(rec.weights, vec![0.5, 0.5]);
        // pre-normalization: 0.5·0.1^0.25 and 0.5·0.1^0.75
        let raw = [0.5 * 0.1f64.powf(0.25), 0.5 * 0.1f64.powf(0.75)];
        assert!((raw[0] - 0.2812).abs() < 1e-4 && (raw[1] - 0.0889).abs() < 1e-4);
        let w = s.weights();
        let total = raw[0] + raw[1];
        assert!((w[0] - raw[0] / total).abs() < 1e-15);
        assert!((w[1] - raw[1] / total).abs() < 1e-15);
        assert_eq!(s.leader(), 0);
    }

    #[test]
    fn symmetric_losses_keep_the_ratio() {
        let mut s = HedgeState::new(2, 0.3, 0.6).unwrap();
        s.step(&[1.0, 4.0]).unwrap();
        let before = s.log_weights()[0] - s.log_weights()[1];
        let rec = s.step(&[2.0, 2.0]).unwrap();
        let after = s.log_weights()[0] - s.log_weights()[1];
        assert_eq!(rec.chosen, 0);
        assert_eq!(s.leader(), 0);
        // γ scales the log-ratio; equal losses add nothing
        assert!((after - 0.6 * before).abs() < 1e-15);
    }

    #[test]
    fn incumbent_keeps_ties() {
        let mut s = HedgeState::new(2, 0.5, 0.0).unwrap();
        assert_eq!(s.step(&[5.0, 1.0]).unwrap().chosen, 0);
        assert_eq!(s.step(&[1.0, 1.0]).unwrap().chosen, 1);
        // γ = 0 wipes history; equal losses now tie and expert 1 stays
        assert_eq!(s.step(&[1.0, 1.0]).unwrap().chosen, 1);
    }

    #[test]
    fn rejects_bad_errors() {
        let mut s = HedgeState::new(2, 0.5, 0.5).unwrap();
        assert!(s.step(&[-1.0, 1.0]).is_err());
        assert!(s.step(&[f64::NAN, 1.0]).is_err());
        assert!(s.step(&[1.0]).is_err());
        assert!(HedgeState::new(2, 1.5, 0.5).is_err());
        assert!(HedgeState::new(0, 0.5, 0.5).is_err());
        assert!(run(&[vec![1.0], vec![1.0, 2.0]], 0.5, 0.5).is_err());
        assert!(tune(&[vec![1.0], vec![1.0]], &[], &[0.5]).is_err());
    }

    #[test]
    fn beta_zero_keeps_weights_positive() {
        let mut s = HedgeState::new(2, 0.0, 1.0).unwrap();
        for _ in 0..10 {
            s.step(&[1.0, 3.0]).unwrap();
        }
        assert!(s.log_weights().iter().all(|l| l.is_finite()));
        assert_eq!(s.leader(), 0);
    }

    #[test]
    fn dominant_expert_is_followed() {
        let a: Vec<f64> = (0..50).map(|t| 1.0 + 0.1 * (t % 3) as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 2.0).collect();
        let r = run(&[b.clone(), a.clone()], 0.3, 0.5).unwrap();
        assert_eq!(r.switches, 1);
        assert_eq!(&r.hybrid_errors[1..], &a[1..]);
        let r = run(&[a.clone(), b], 0.3, 0.5).unwrap();
        assert_eq!(r.switches, 0);
        assert_eq!(r.hybrid_errors, a);
    }

    #[test]
    fn two_regimes_switch_once_near_the_change() {
        let n = 96;
        let change = 48;
        let a: Vec<f64> = (0..n).map(|t| if t < change { 10.0 } else { 20.0 }).collect();
        let b: Vec<f64> = (0..n).map(|t| if t < change { 20.0 } else { 10.0 }).collect();
        let r = run(&[a, b], 0.1, 0.7).unwrap();
        assert_eq!(r.switches, 1);
        let at = r.choices().iter().position(|&c| c == 1).unwrap();
        assert!(at >= change && at <= change + 3, "switched at {at}");
    }

    #[test]
    fn tune_tie_rule() {
        let v = vec![vec![1.0, 2.0, 1.0], vec![3.0, 4.0, 5.0]];
        assert_eq!(tune(&v, &[0.4], &[0.6]).unwrap(), (0.4, 0.6));
        let g = default_grid();
        assert_eq!(tune(&v, &g, &g).unwrap(), (0.1, 0.1));
    }
}
