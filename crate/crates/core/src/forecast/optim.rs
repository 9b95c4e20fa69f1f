//! Box-constrained Nelder-Mead.
//!
//! Points are projected onto the box before every evaluation, so the
//! objective never sees an infeasible parameter and the returned minimizer is
//! always feasible.

use alloc::vec;
use alloc::vec::Vec;

/// Starting values used for every smoothing-parameter dimension.
pub const SMOOTHING_STARTS: [f64; 3] = [0.1, 0.3, 0.7];
/// Box for fitted smoothing parameters.
pub const SMOOTHING_LOWER: f64 = 1e-4;
pub const SMOOTHING_UPPER: f64 = 0.9999;
/// Evaluation budget per start.
pub const MAX_EVALS: usize = 500;

#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const SMOOTHING: Bounds = Bounds {
        lower: SMOOTHING_LOWER,
        upper: SMOOTHING_UPPER,
    };
    pub const FREE: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    fn clamp(&self, v: f64) -> f64 {
        v.max(self.lower).min(self.upper)
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

fn project(x: &mut [f64], bounds: &[Bounds]) {
    for (v, b) in x.iter_mut().zip(bounds) {
        *v = b.clamp(*v);
    }
}

/// Minimize `f` from `start` with initial simplex edge lengths `step`.
/// Non-finite objective values count as +∞.
pub fn nelder_mead<F>(
    mut f: F,
    start: &[f64],
    step: &[f64],
    bounds: &[Bounds],
    max_evals: usize,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &mut Vec<f64>, evals: &mut usize| -> f64 {
        project(x, bounds);
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    let f0 = eval(&mut x0, &mut evals);
    simplex.push(x0);
    let mut values = vec![f0];
    for i in 0..n {
        let mut x = simplex[0].clone();
        // step away from the nearer bound so the vertex stays distinct
        let up = x[i] + step[i];
        x[i] = if up <= bounds[i].upper { up } else { x[i] - step[i] };
        values.push(eval(&mut x, &mut evals));
        simplex.push(x);
    }

    let mut order: Vec<usize> = (0..=n).collect();
    while evals < max_evals {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n.saturating_sub(1)];
        let spread = values[worst] - values[best];
        if spread.is_finite() && spread <= 1e-12 * (1.0 + libm::fabs(values[best])) {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let mut xr = along(1.0);
        let fr = eval(&mut xr, &mut evals);
        if fr < values[best] {
            let mut xe = along(2.0);
            let fe = eval(&mut xe, &mut evals);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            let outside = fr < values[worst];
            let mut xc = if outside { along(0.5) } else { along(-0.5) };
            let fc = eval(&mut xc, &mut evals);
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                let xb = simplex[best].clone();
                for &i in &order[1..] {
                    let mut x: Vec<f64> =
                        xb.iter().zip(&simplex[i]).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    values[i] = eval(&mut x, &mut evals);
                    simplex[i] = x;
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evaluations: evals,
    }
}

/// Run [`nelder_mead`] from each start and keep the lowest minimum; the
/// earliest start wins ties.
pub fn multi_start<F>(
    mut f: F,
    starts: &[Vec<f64>],
    step: &[f64],
    bounds: &[Bounds],
    max_evals: usize,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best: Option<Minimum> = None;
    for s in starts {
        let m = nelder_mead(&mut f, s, step, bounds, max_evals);
        if best.as_ref().map_or(true, |b| m.value < b.value) {
            best = Some(m);
        }
    }
    best.expect("at least one start")
}

/// The three deterministic starts with every smoothing dimension set to the
/// same value, followed by `tail` for any non-smoothing dimensions.
pub fn smoothing_starts(dims: usize, tail: &[f64]) -> Vec<Vec<f64>> {
    SMOOTHING_STARTS
        .iter()
        .map(|&s| {
            let mut v = vec![s; dims];
            v.extend_from_slice(tail);
            v
        })
        .collect()
}
