//! Local regression on an equally spaced grid `x = 0, 1, …, n−1`.

use alloc::vec::Vec;

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let c = 1.0 - u * u * u;
        c * c * c
    }
}

/// Fit at `x` (may lie outside the grid) with the `span` nearest points,
/// tricube distance weights times optional robustness weights, and a local
/// polynomial of degree 0 or 1.
///
/// When `span` exceeds `n` the bandwidth grows past the farthest point by
/// `(span − n)/2`, as in Cleveland's STL. Returns `None` if every weight is
/// zero.
pub(crate) fn fit_at(y: &[f64], robust: Option<&[f64]>, span: usize, degree: u8, x: f64) -> Option<f64> {
    let n = y.len();
    if n == 0 {
        return None;
    }
    let last = (n - 1) as f64;
    let q = span.max(1);
    let h = if q >= n {
        let far = x.max(last - x).max(0.0);
        far + (q - n) as f64 / 2.0
    } else {
        // window of q consecutive points nearest to x
        let centre = libm::round(x).clamp(0.0, last) as isize;
        let mut lo = (centre - (q as isize - 1) / 2).max(0) as usize;
        lo = lo.min(n - q);
        let mut hi = lo + q - 1;
        // slide toward x while it shortens the farthest distance
        while hi + 1 < n && (hi as f64 + 1.0 - x) < (x - lo as f64) {
            lo += 1;
            hi += 1;
        }
        while lo > 0 && (x - (lo as f64 - 1.0)) < (hi as f64 - x) {
            lo -= 1;
            hi -= 1;
        }
        (x - lo as f64).max(hi as f64 - x)
    };
    let h = h.max(f64::EPSILON);
    let upper = 0.999 * h;
    let lower = 0.001 * h;

    let from = libm::ceil(x - h).max(0.0) as usize;
    let to = (libm::floor(x + h).min(last)).max(0.0) as usize;
    if from > to {
        return None;
    }
    let mut w = Vec::with_capacity(to - from + 1);
    let mut total = 0.0;
    for i in from..=to {
        let d = libm::fabs(i as f64 - x);
        let mut wi = if d <= lower {
            1.0
        } else if d <= upper {
            tricube(d / h)
        } else {
            0.0
        };
        if let Some(r) = robust {
            wi *= r[i];
        }
        total += wi;
        w.push(wi);
    }
    if total <= 0.0 {
        return None;
    }
    for wi in &mut w {
        *wi /= total;
    }
    if degree > 0 {
        let mean_x: f64 = w.iter().enumerate().map(|(k, wi)| wi * (from + k) as f64).sum();
        let spread: f64 = w
            .iter()
            .enumerate()
            .map(|(k, wi)| {
                let d = (from + k) as f64 - mean_x;
                wi * d * d
            })
            .sum();
        let range = last.max(1.0);
        if libm::sqrt(spread) > 0.001 * range {
            let b = (x - mean_x) / spread;
            for (k, wi) in w.iter_mut().enumerate() {
                *wi *= b * ((from + k) as f64 - mean_x) + 1.0;
            }
        }
    }
    Some(w.iter().enumerate().map(|(k, wi)| wi * y[from + k]).sum())
}

/// Smooth at every grid point; points with no support keep their value.
pub(crate) fn smooth(y: &[f64], robust: Option<&[f64]>, span: usize, degree: u8) -> Vec<f64> {
    (0..y.len())
        .map(|i| fit_at(y, robust, span, degree, i as f64).unwrap_or(y[i]))
        .collect()
}

/// Centred moving average of width `len`; output has `n − len + 1` values.
pub(crate) fn moving_average(y: &[f64], len: usize) -> Vec<f64> {
    if len == 0 || y.len() < len {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(y.len() - len + 1);
    let mut sum: f64 = y[..len].iter().sum();
    out.push(sum / len as f64);
    for i in len..y.len() {
        sum += y[i] - y[i - len];
        out.push(sum / len as f64);
    }
    out
}
