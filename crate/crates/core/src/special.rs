//! Normal density helpers and probabilists' Hermite polynomials.

use libm::erfc;
use std::f64::consts::FRAC_1_SQRT_2;

/// `1 / sqrt(2 pi)`
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `He_k(z)` by the three-term recurrence.
pub fn hermite_e(k: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, z);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = z * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `k`-th derivative of the `N(mu, sigma^2)` density at `w`.
pub fn normal_density_derivative(w: f64, mu: f64, sigma: f64, k: usize) -> f64 {
    let z = (w - mu) / sigma;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * hermite_e(k, z) * norm_pdf(z) / sigma.powi(k as i32 + 1)
}

/// `E[Z^j]` for standard normal `Z`.
pub fn normal_moment(j: usize) -> f64 {
    if j % 2 == 1 {
        0.0
    } else {
        (1..j).step_by(2).map(|m| m as f64).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!(
            (norm_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-14,
            "{}",
            norm_cdf(1.959_963_984_540_054) - 0.975
        );
        assert!(norm_cdf(-40.0) >= 0.0 && norm_cdf(-40.0) < 1e-300);
    }

    #[test]
    fn hermite_low_orders() {
        let z = 0.7_f64;
        assert_eq!(hermite_e(0, z), 1.0);
        assert_eq!(hermite_e(1, z), z);
        assert!((hermite_e(3, z) - (z.powi(3) - 3.0 * z)).abs() < 1e-14);
        assert!((hermite_e(4, z) - (z.powi(4) - 6.0 * z * z + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn density_derivatives_by_differences() {
        let (mu, s, w, h) = (0.3, 0.6, -0.2, 1e-4);
        for k in 0..4 {
            let fd = (normal_density_derivative(w + h, mu, s, k)
                - normal_density_derivative(w - h, mu, s, k))
                / (2.0 * h);
            let an = normal_density_derivative(w, mu, s, k + 1);
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn moments() {
        assert_eq!(normal_moment(0), 1.0);
        assert_eq!(normal_moment(4), 3.0);
        assert_eq!(normal_moment(6), 15.0);
        assert_eq!(normal_moment(5), 0.0);
    }
}
