//! Special functions for p-values: log-gamma, regularized incomplete gamma,
//! and the Kolmogorov distribution tail.

use core::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return libm::log(PI / libm::fabs(libm::sin(PI * x))) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * libm::log(2.0 * PI) + (x + 0.5) * libm::log(t) - t + libm::log(a)
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if libm::fabs(del) < libm::fabs(sum) * EPS {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - ln_gamma(a))
}

/// Modified Lentz continued fraction for Q(a, x).
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if libm::fabs(del - 1.0) < EPS {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - ln_gamma(a)) * h
}

/// Regularized lower incomplete gamma P(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

/// Survival function of the chi-squared distribution with `df` degrees of
/// freedom.
pub fn chi_squared_sf(x: f64, df: usize) -> f64 {
    regularized_gamma_q(0.5 * df as f64, 0.5 * x)
}

/// P(K > λ) for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi theta form converges fast for small λ.
        let mut s = 0.0;
        for j in 1..=50 {
            let k = (2 * j - 1) as f64;
            s += libm::exp(-k * k * PI * PI / (8.0 * lambda * lambda));
        }
        let cdf = libm::sqrt(2.0 * PI) / lambda * s;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = libm::exp(-2.0 * jf * jf * lambda * lambda);
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_at_integers() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n = {n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-13);
    }

    /// Chi-squared with 2 degrees of freedom has survival exp(−x/2).
    #[test]
    fn chi_squared_two_df_closed_form() {
        for &x in &[0.01, 0.5, 1.0, 3.0, 10.0, 40.0] {
            let expected = libm::exp(-0.5 * x);
            assert!((chi_squared_sf(x, 2) - expected).abs() < 1e-12, "x = {x}");
        }
    }

    /// Simpson quadrature of the chi-squared density as an independent check.
    #[test]
    fn chi_squared_matches_quadrature() {
        for &(df, x) in &[(10usize, 18.307_f64), (4, 2.0), (1, 3.841_458_820_694_124), (25, 30.0)] {
            let k = df as f64 / 2.0;
            // ∫_0^x pdf, substitute t = u² to remove the df = 1 singularity:
            // 2u·pdf(u²) = 2·u^{2k−1}·e^{−u²/2} / (2^k Γ(k))
            let g = |u: f64| {
                let power = if df == 1 { 1.0 } else { u.powf(2.0 * k - 1.0) };
                2.0 * power * (-u * u / 2.0 - k * 2f64.ln() - ln_gamma(k)).exp()
            };
            let n = 200_000;
            let hi = x.sqrt();
            let h = hi / n as f64;
            let mut s = g(0.0) + g(hi);
            for i in 1..n {
                s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let cdf = s * h / 3.0;
            assert!((chi_squared_sf(x, df) - (1.0 - cdf)).abs() < 1e-9, "df {df} x {x}");
        }
        assert!((chi_squared_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-10);
    }

    #[test]
    fn kolmogorov_tail_reference_points() {
        // classic critical values
        assert!((kolmogorov_sf(1.358_098_8) - 0.05).abs() < 1e-6);
        assert!((kolmogorov_sf(1.627_623_1) - 0.01).abs() < 1e-6);
        // both series agree where they overlap
        let lam = 1.0f64;
        let mut s = 0.0;
        for j in 1..100 {
            let jf = j as f64;
            let t = (-2.0 * jf * jf * lam * lam).exp();
            s += if j % 2 == 1 { t } else { -t };
        }
        assert!((kolmogorov_sf(0.999_999_999) - 2.0 * s).abs() < 1e-8);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }
}
