//! Weighted kernel density and distribution function estimators, their
//! corrections, and AMISE-optimal bandwidths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quadrature::trapezoid;

/// Equispaced evaluation grid.
pub fn uniform_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    assert!(
        m >= 2 && hi > lo,
        "grid needs at least two points and hi > lo"
    );
    let step = (hi - lo) / (m - 1) as f64;
    (0..m)
        .map(|j| if j + 1 == m { hi } else { lo + j as f64 * step })
        .collect()
}

/// Default grid: 1000 points on `[-5, 5]`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(-5.0, 5.0, 1000)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("empty evaluation grid"));
    }
    if grid.iter().any(|g| !g.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "evaluation grid must be finite and strictly increasing",
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::invalid("empty sample"));
        }
        if points.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(WeightedSample { points, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let n = points.len().max(1);
        WeightedSample::new(points, vec![1.0 / n as f64; n])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Pdf,
    Cdf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corrections {
    pub positive_part: bool,
    pub rearranged: bool,
    pub bias_corrected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub kind: CurveKind,
    pub corrections: Corrections,
}

impl CurveEstimate {
    /// Trapezoid integral of the values over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }
}

/// `sum_i w_i k^{(d)}_b(u - u_i)` for each weight vector, sharing the kernel evaluations.
pub(crate) fn kernel_sums(
    points: &[f64],
    weights: &[&[f64]],
    kernel: &KernelSpec,
    b: f64,
    grid: &[f64],
    d: usize,
) -> Vec<Vec<f64>> {
    let scale = 1.0 / b.powi(d as i32 + 1);
    let cutoff = kernel.support();
    let mut out = vec![vec![0.0; grid.len()]; weights.len()];
    for (j, &u) in grid.iter().enumerate() {
        let mut acc = vec![0.0; weights.len()];
        for (i, &ui) in points.iter().enumerate() {
            let x = (u - ui) / b;
            if x.abs() > cutoff {
                continue;
            }
            let kv = kernel.eval(x, d);
            for (a, w) in acc.iter_mut().zip(weights) {
                *a += w[i] * kv;
            }
        }
        for (o, a) in out.iter_mut().zip(acc) {
            o[j] = a * scale;
        }
    }
    out
}

/// `sum_i w_i K((u - u_i) / b)` for each weight vector.
pub(crate) fn kernel_cdf_sums(
    points: &[f64],
    weights: &[&[f64]],
    kernel: &KernelSpec,
    b: f64,
    grid: &[f64],
) -> Vec<Vec<f64>> {
    let cutoff = kernel.support();
    let mut out = vec![vec![0.0; grid.len()]; weights.len()];
    for (j, &u) in grid.iter().enumerate() {
        let mut acc = vec![0.0; weights.len()];
        for (i, &ui) in points.iter().enumerate() {
            let x = (u - ui) / b;
            let kv = if x > cutoff {
                1.0
            } else if x < -cutoff {
                continue;
            } else {
                kernel.cdf(x)
            };
            for (a, w) in acc.iter_mut().zip(weights) {
                *a += w[i] * kv;
            }
        }
        for (o, a) in out.iter_mut().zip(acc) {
            o[j] = a;
        }
    }
    out
}

fn check_bandwidth(b: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!(
            "bandwidth must be positive, got {b}"
        )));
    }
    Ok(())
}

/// `f(u) = sum_i pi_i k((u - u_i) / b) / b` on the grid.
pub fn weighted_kde(
    sample: &WeightedSample,
    kernel: &KernelSpec,
    b: f64,
    grid: &[f64],
) -> Result<CurveEstimate> {
    check_bandwidth(b)?;
    check_grid(grid)?;
    let values = kernel_sums(sample.points(), &[sample.weights()], kernel, b, grid, 0)
        .pop()
        .unwrap();
    Ok(CurveEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: b,
        kind: CurveKind::Pdf,
        corrections: Corrections::default(),
    })
}

/// `F(u) = sum_i pi_i K((u - u_i) / b)` on the grid.
pub fn weighted_kcdf(
    sample: &WeightedSample,
    kernel: &KernelSpec,
    b: f64,
    grid: &[f64],
) -> Result<CurveEstimate> {
    check_bandwidth(b)?;
    check_grid(grid)?;
    let values = kernel_cdf_sums(sample.points(), &[sample.weights()], kernel, b, grid)
        .pop()
        .unwrap();
    Ok(CurveEstimate {
        grid: grid.to_vec(),
        values,
        bandwidth: b,
        kind: CurveKind::Cdf,
        corrections: Corrections::default(),
    })
}

/// Nonnegative, unit-mass version of a density estimate.
///
/// When the positive part carries more than unit mass, a level `xi` is found by
/// bisection so that `max(f - xi, 0)` integrates to one; otherwise the positive
/// part is rescaled.
pub fn positive_part_normalize(est: &CurveEstimate) -> Result<CurveEstimate> {
    if est.kind != CurveKind::Pdf {
        return Err(Error::invalid(
            "positive-part normalisation applies to densities",
        ));
    }
    let grid = &est.grid;
    let mass_at = |xi: f64| {
        let v: Vec<f64> = est.values.iter().map(|f| (f - xi).max(0.0)).collect();
        trapezoid(grid, &v)
    };
    let mass = mass_at(0.0);
    // a half-mass input is still rescaled; allow for rounding in its trapezoid integral
    if !(mass >= 0.5 * (1.0 - 1e-9)) {
        return Err(Error::Support { mass });
    }
    let values = if mass > 1.0 {
        let (mut lo, mut hi) = (0.0, est.values.iter().copied().fold(0.0, f64::max));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass_at(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1e-300) {
                break;
            }
        }
        let xi = 0.5 * (lo + hi);
        let mut v: Vec<f64> = est.values.iter().map(|f| (f - xi).max(0.0)).collect();
        // remove the residual bisection error exactly
        let m = trapezoid(grid, &v);
        v.iter_mut().for_each(|x| *x /= m);
        v
    } else {
        est.values.iter().map(|f| f.max(0.0) / mass).collect()
    };
    let mut corrections = est.corrections;
    corrections.positive_part = true;
    Ok(CurveEstimate {
        grid: grid.clone(),
        values,
        bandwidth: est.bandwidth,
        kind: CurveKind::Pdf,
        corrections,
    })
}

/// Sort the values into ascending order, then clip to `[0, 1]`.
pub fn rearrange_cdf(est: &CurveEstimate) -> Result<CurveEstimate> {
    if est.kind != CurveKind::Cdf {
        return Err(Error::invalid(
            "rearrangement applies to distribution functions",
        ));
    }
    let mut values = est.values.clone();
    values.sort_by(f64::total_cmp);
    values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    let mut corrections = est.corrections;
    corrections.rearranged = true;
    Ok(CurveEstimate {
        grid: est.grid.clone(),
        values,
        bandwidth: est.bandwidth,
        kind: CurveKind::Cdf,
        corrections,
    })
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `c n^{-1/(4r+1)}` with `c = [(2r)!^2 R(k) / (4r mu_2r^2 R(f^{(2r)}))]^{1/(4r+1)}`.
pub fn amise_bandwidth_pdf(kernel: &KernelSpec, roughness: f64, n: usize) -> Result<f64> {
    if !(roughness > 0.0 && roughness.is_finite()) {
        return Err(Error::invalid(format!(
            "roughness must be positive, got {roughness}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid("bandwidth rule needs n >= 2"));
    }
    let r = kernel.r();
    let mu = kernel.mu(2 * r);
    let e = 1.0 / (4 * r + 1) as f64;
    let c = (factorial(2 * r).powi(2) * kernel.roughness()
        / (4.0 * r as f64 * mu * mu * roughness))
        .powf(e);
    Ok(c * (n as f64).powf(-e))
}

/// `s n^{-1/(4r-1)}` with `s = [(2r)!^2 psi(k) / (4r mu_2r^2 R(f^{(2r-1)}))]^{1/(4r-1)}`.
pub fn amise_bandwidth_cdf(kernel: &KernelSpec, roughness: f64, n: usize) -> Result<f64> {
    let psi = kernel.psi();
    if !(psi > 0.0) {
        return Err(Error::NonPositivePsi {
            kernel: kernel.name().to_string(),
            psi,
        });
    }
    if !(roughness > 0.0 && roughness.is_finite()) {
        return Err(Error::invalid(format!(
            "roughness must be positive, got {roughness}"
        )));
    }
    if n < 2 {
        return Err(Error::invalid("bandwidth rule needs n >= 2"));
    }
    let r = kernel.r();
    let mu = kernel.mu(2 * r);
    let e = 1.0 / (4 * r - 1) as f64;
    let c = (factorial(2 * r).powi(2) * psi / (4.0 * r as f64 * mu * mu * roughness)).powf(e);
    Ok(c * (n as f64).powf(-e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gaussian_kernel;
    use std::f64::consts::PI;

    fn pdf_curve(grid: Vec<f64>, values: Vec<f64>) -> CurveEstimate {
        CurveEstimate {
            grid,
            values,
            bandwidth: 1.0,
            kind: CurveKind::Pdf,
            corrections: Corrections::default(),
        }
    }

    #[test]
    fn single_point_kde() {
        let k = gaussian_kernel(2).unwrap();
        let s = WeightedSample::new(vec![0.3], vec![1.0]).unwrap();
        let grid = [-1.0, 0.0, 0.5, 2.0];
        let f = weighted_kde(&s, &k, 0.4, &grid).unwrap();
        for (u, v) in grid.iter().zip(&f.values) {
            assert!((v - k.pdf((u - 0.3) / 0.4) / 0.4).abs() < 1e-15);
        }
        let c = weighted_kcdf(&s, &k, 0.4, &grid).unwrap();
        for (u, v) in grid.iter().zip(&c.values) {
            assert!((v - k.cdf((u - 0.3) / 0.4)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let k = gaussian_kernel(1).unwrap();
        let s = WeightedSample::uniform(vec![0.0, 1.0]).unwrap();
        assert!(weighted_kde(&s, &k, 0.0, &[0.0]).is_err());
        assert!(weighted_kde(&s, &k, 1.0, &[1.0, 0.0]).is_err());
        assert!(WeightedSample::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn edf_limit() {
        let k = gaussian_kernel(2).unwrap();
        let s = WeightedSample::uniform(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let c = weighted_kcdf(&s, &k, 1e-4, &[-0.5, 0.5, 1.5, 2.5, 3.5]).unwrap();
        for (j, v) in c.values.iter().enumerate() {
            assert!((v - j as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn positive_part_branches() {
        let grid = uniform_grid(-8.0, 8.0, 1601);
        let phi: Vec<f64> = grid
            .iter()
            .map(|x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt())
            .collect();
        let mass = trapezoid(&grid, &phi);
        let dens: Vec<f64> = phi.iter().map(|p| p / mass).collect();
        let out = positive_part_normalize(&pdf_curve(grid.clone(), dens.clone())).unwrap();
        for (a, b) in out.values.iter().zip(&dens) {
            assert!((a - b).abs() < 1e-12);
        }
        let half: Vec<f64> = dens.iter().map(|d| 0.5 * d).collect();
        let out = positive_part_normalize(&pdf_curve(grid.clone(), half)).unwrap();
        assert!((out.integral() - 1.0).abs() < 1e-12);
        let low: Vec<f64> = dens.iter().map(|d| 0.3 * d).collect();
        assert!(matches!(
            positive_part_normalize(&pdf_curve(grid.clone(), low)),
            Err(Error::Support { .. })
        ));

        // negative lobes: 1.03 * density with a dip, leaving positive mass above 1
        let lobed: Vec<f64> = grid
            .iter()
            .zip(&dens)
            .map(|(x, d)| 1.03 * d - 0.02 * (-(x - 3.0) * (x - 3.0)).exp())
            .collect();
        let out = positive_part_normalize(&pdf_curve(grid, lobed)).unwrap();
        assert!(out.values.iter().all(|v| *v >= 0.0));
        assert!((out.integral() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn rearrangement() {
        let c = CurveEstimate {
            grid: vec![0.0, 1.0, 2.0, 3.0],
            values: vec![0.1, 0.3, 0.2, 1.02],
            bandwidth: 1.0,
            kind: CurveKind::Cdf,
            corrections: Corrections::default(),
        };
        let r = rearrange_cdf(&c).unwrap();
        assert_eq!(r.values, vec![0.1, 0.2, 0.3, 1.0]);
        assert!(r.corrections.rearranged);
    }

    #[test]
    fn bandwidth_constants() {
        let k = gaussian_kernel(2).unwrap();
        let sp = PI.sqrt();
        let rf4 = 105.0 / (32.0 * sp);
        let b = amise_bandwidth_pdf(&k, rf4, 100).unwrap();
        assert!((b - (216.0_f64 / 105.0).powf(1.0 / 9.0) * 100f64.powf(-1.0 / 9.0)).abs() < 1e-12);
        assert!((b - 0.649_508_6).abs() < 1e-6);
        // (27 / (4 sqrt(pi)))^{1/9} R^{-1/9} n^{-1/9}
        let closed =
            (27.0 / (4.0 * sp)).powf(1.0 / 9.0) * rf4.powf(-1.0 / 9.0) * 100f64.powf(-1.0 / 9.0);
        assert!((b - closed).abs() < 1e-12);
        let rf3 = 15.0 / (16.0 * sp);
        let bc = amise_bandwidth_cdf(&k, rf3, 100).unwrap();
        let closed =
            (7.0 / (2.0 * sp)).powf(1.0 / 7.0) * rf3.powf(-1.0 / 7.0) * 100f64.powf(-1.0 / 7.0);
        assert!((bc - closed).abs() < 1e-12);
        let b2 = amise_bandwidth_pdf(&k, 2.0 * rf4, 100).unwrap();
        assert!((b2 / b - 2f64.powf(-1.0 / 9.0)).abs() < 1e-12);
        let b4 = amise_bandwidth_cdf(&k, rf3, 400).unwrap();
        assert!((b4 / bc - 4f64.powf(-1.0 / 7.0)).abs() < 1e-12);
        assert!(amise_bandwidth_pdf(&k, 0.0, 100).is_err());
    }
}
