//! Non-seasonal models used on the STL non-seasonal component.

use alloc::vec;
use alloc::vec::Vec;

use super::optim::{multi_start, smoothing_starts, Bounds, MAX_EVALS};
use crate::error::{domain, Error, Result};

/// Simple exponential smoothing, level initialized at the first value.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Ses {
    pub(crate) alpha: f64,
    pub(crate) level: f64,
}

impl Ses {
    pub(crate) fn observe(&mut self, y: f64) {
        self.level += self.alpha * (y - self.level);
    }

    fn sse(series: &[f64], alpha: f64) -> f64 {
        let mut s = Ses { alpha, level: series[0] };
        let mut total = 0.0;
        for &y in &series[1..] {
            let e = y - s.level;
            total += e * e;
            s.observe(y);
        }
        total
    }

    pub(crate) fn fit(series: &[f64]) -> Result<(Self, Vec<f64>)> {
        if series.len() < 2 {
            return Err(domain!("exponential smoothing needs at least 2 values"));
        }
        let best = multi_start(
            |x| Self::sse(series, x[0]),
            &smoothing_starts(1, &[]),
            &[0.1],
            &[Bounds::SMOOTHING],
            MAX_EVALS,
        );
        if !best.value.is_finite() {
            return Err(Error::Numeric("exponential smoothing SSE is not finite".into()));
        }
        let mut s = Ses {
            alpha: best.x[0],
            level: series[0],
        };
        let mut res = Vec::with_capacity(series.len() - 1);
        for &y in &series[1..] {
            res.push(y - s.level);
            s.observe(y);
        }
        Ok((s, res))
    }
}

/// Largest autoregressive order tried.
pub const MAX_AR_ORDER: usize = 4;

/// Zero-mean AR(p) on `y − mean`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Ar {
    pub(crate) mean: f64,
    pub(crate) coef: Vec<f64>,
    pub(crate) sigma2: f64,
    /// Most recent values, newest last; length p.
    pub(crate) recent: Vec<f64>,
}

/// Levinson-Durbin on autocovariances `r[0..=p]`. Returns the coefficients
/// and innovation variance for every order `1..=p`.
pub(crate) fn levinson_durbin(r: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let p = r.len() - 1;
    let mut out = Vec::with_capacity(p);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = r[0];
    for k in 1..=p {
        if v <= 0.0 {
            break;
        }
        let mut acc = r[k];
        for j in 1..k {
            acc -= phi[j - 1] * r[k - j];
        }
        let kappa = acc / v;
        let mut next = vec![0.0; k];
        for j in 1..k {
            next[j - 1] = phi[j - 1] - kappa * phi[k - j - 1];
        }
        next[k - 1] = kappa;
        phi = next;
        v *= 1.0 - kappa * kappa;
        out.push((phi.clone(), v));
    }
    out
}

impl Ar {
    fn step(&self) -> f64 {
        let p = self.coef.len();
        let mut s = self.mean;
        for (j, c) in self.coef.iter().enumerate() {
            s += c * (self.recent[p - 1 - j] - self.mean);
        }
        s
    }

    pub(crate) fn forecast(&self, h: usize) -> Vec<f64> {
        let mut tmp = self.clone();
        (0..h)
            .map(|_| {
                let f = tmp.step();
                tmp.observe(f);
                f
            })
            .collect()
    }

    pub(crate) fn observe(&mut self, y: f64) {
        if !self.recent.is_empty() {
            self.recent.remove(0);
            self.recent.push(y);
        }
    }

    pub(crate) fn order(&self) -> usize {
        self.coef.len()
    }

    /// Order `1..=4` by AIC `n ln σ²_p + 2p`, Yule-Walker coefficients.
    pub(crate) fn fit(series: &[f64]) -> Result<(Self, Vec<f64>)> {
        let n = series.len();
        if n < 3 {
            return Err(domain!("AR model needs at least 3 values"));
        }
        let mean = series.iter().sum::<f64>() / n as f64;
        let max_p = MAX_AR_ORDER.min(n - 2);
        let r: Vec<f64> = (0..=max_p)
            .map(|k| {
                (k..n)
                    .map(|t| (series[t] - mean) * (series[t - k] - mean))
                    .sum::<f64>()
                    / n as f64
            })
            .collect();
        let fits = levinson_durbin(&r);
        let (coef, sigma2) = if fits.is_empty() {
            // constant series: AR(1) with zero coefficient
            (vec![0.0], 0.0)
        } else {
            let aic = |p: usize, v: f64| n as f64 * libm::log(v.max(f64::MIN_POSITIVE)) + 2.0 * p as f64;
            let mut best = 0;
            for (i, (_, v)) in fits.iter().enumerate() {
                if aic(i + 1, *v) < aic(best + 1, fits[best].1) {
                    best = i;
                }
            }
            fits[best].clone()
        };
        if coef.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric("Yule-Walker produced non-finite coefficients".into()));
        }
        let p = coef.len();
        let mut ar = Ar {
            mean,
            coef,
            sigma2,
            recent: series[..p].to_vec(),
        };
        let mut res = Vec::with_capacity(n - p);
        for &y in &series[p..] {
            res.push(y - ar.step());
            ar.observe(y);
        }
        Ok((ar, res))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levinson_matches_direct_ar2_solution() {
        // Yule-Walker for AR(2): [r0 r1; r1 r0] φ = [r1; r2]
        let r = [2.0, 1.2, 0.5];
        let fits = levinson_durbin(&r);
        let det = r[0] * r[0] - r[1] * r[1];
        let phi1 = (r[1] * r[0] - r[1] * r[2]) / det;
        let phi2 = (r[0] * r[2] - r[1] * r[1]) / det;
        let (c, v) = &fits[1];
        assert!((c[0] - phi1).abs() < 1e-12 && (c[1] - phi2).abs() < 1e-12);
        let v_direct = r[0] - phi1 * r[1] - phi2 * r[2];
        assert!((v - v_direct).abs() < 1e-12);
        assert!((fits[0].0[0] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn ses_on_constant_series() {
        let (s, res) = Ses::fit(&[4.0; 20]).unwrap();
        assert_eq!(s.level, 4.0);
        assert!(res.iter().all(|r| *r == 0.0));
        assert!((1e-4..=0.9999).contains(&s.alpha));
    }

    #[test]
    fn ar_recovers_a_strong_ar1() {
        let mut y = vec![0.0; 2000];
        // deterministic pseudo-noise from a linear congruence
        let mut state = 12345u64;
        for t in 1..y.len() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            y[t] = 0.8 * y[t - 1] + u;
        }
        let (ar, _) = Ar::fit(&y).unwrap();
        assert!((ar.coef[0] - 0.8).abs() < 0.05, "{:?}", ar.coef);
        let f = ar.forecast(3);
        let last = y[y.len() - 1] - ar.mean;
        assert!((f[0] - ar.mean - ar.coef.iter().zip(y.iter().rev()).map(|(c, v)| c * (v - ar.mean)).sum::<f64>()).abs() < 1e-12);
        assert!(f[2].abs() <= last.abs() + ar.mean.abs() + 1.0);
    }
}
