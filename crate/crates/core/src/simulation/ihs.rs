//! Inverse hyperbolic sine transformation model `arsinh(theta y)/theta = delta + gamma x + u`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MomentModel, ResidualModel};

/// Largest `|theta|` searched. As `theta` grows the residual flattens towards `-delta - gamma x`
/// and the criterion has a spurious infimum at infinity.
pub const THETA_BOUND: f64 = 10.0;

/// Fitted `|theta|` below this is reported as the boundary solution `theta = 0`.
pub const THETA_ZERO: f64 = 1e-3;

/// Below this `|theta y|` the closed forms are replaced by their Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

/// `sinh(theta t) / theta`, equal to `t` at `theta = 0`.
pub fn ihs(theta: f64, t: f64) -> f64 {
    let s = theta * t;
    if s.abs() < SERIES_CUTOFF {
        let s2 = s * s;
        t * (1.0 + s2 / 6.0 * (1.0 + s2 / 20.0 * (1.0 + s2 / 42.0)))
    } else {
        s.sinh() / theta
    }
}

/// `arsinh(theta y) / theta`, equal to `y` at `theta = 0`.
pub fn ihs_inverse(theta: f64, y: f64) -> f64 {
    let s = theta * y;
    if s.abs() < SERIES_CUTOFF {
        let s2 = s * s;
        y * (1.0 - s2 / 6.0 + 3.0 * s2 * s2 / 40.0 - 15.0 * s2 * s2 * s2 / 336.0)
    } else {
        s.asinh() / theta
    }
}

/// First and second `theta` derivatives of `arsinh(theta y) / theta`.
pub fn ihs_inverse_theta_derivatives(theta: f64, y: f64) -> (f64, f64) {
    let s = theta * y;
    if s.abs() < SERIES_CUTOFF {
        let (y2, t2) = (y * y, theta * theta);
        let y3 = y2 * y;
        let y5 = y3 * y2;
        let y7 = y5 * y2;
        let d1 = -theta * y3 / 3.0 + 0.3 * t2 * theta * y5 - 15.0 * t2 * t2 * theta * y7 / 56.0;
        let d2 = -y3 / 3.0 + 0.9 * t2 * y5 - 75.0 * t2 * t2 * y7 / 56.0;
        (d1, d2)
    } else {
        let r = (1.0 + s * s).sqrt();
        let a = s.asinh();
        let t2 = theta * theta;
        let d1 = (s / r - a) / t2;
        let d2 = -2.0 * y / (t2 * r) - y * y * y / (r * r * r) + 2.0 * a / (t2 * theta);
        (d1, d2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obs {
    pub y: f64,
    pub x: f64,
}

/// `g(z, beta) = u(z, beta) (1, x, ..., x^{d_g - 1})'` with `beta = (delta, gamma, theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IhsModel {
    dim_g: usize,
}

impl IhsModel {
    pub fn new(dim_g: usize) -> Result<Self> {
        if dim_g < 3 {
            return Err(Error::invalid(format!(
                "the transformation model needs d_g >= 3, got {dim_g}"
            )));
        }
        Ok(IhsModel { dim_g })
    }

    fn instruments(&self, x: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim_g);
        let mut p = 1.0;
        for j in 0..self.dim_g {
            out[j] = p;
            p *= x;
        }
        out
    }
}

/// The moment model for the transformation regression with `d_g` polynomial instruments.
pub fn residual_map(dim_g: usize) -> Result<IhsModel> {
    IhsModel::new(dim_g)
}

impl MomentModel for IhsModel {
    type Obs = Obs;

    fn dim_g(&self) -> usize {
        self.dim_g
    }

    fn dim_beta(&self) -> usize {
        3
    }

    fn moments(&self, z: &Obs, beta: &DVector<f64>) -> DVector<f64> {
        self.instruments(z.x) * self.residual(z, beta)
    }

    fn jacobian(&self, z: &Obs, beta: &DVector<f64>) -> DMatrix<f64> {
        self.instruments(z.x) * self.residual_gradient(z, beta).transpose()
    }

    fn moment_hessians(&self, z: &Obs, beta: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let hess = self.residual_hessian(z, beta);
        self.instruments(z.x).iter().map(|&w| &hess * w).collect()
    }

    /// Best point of a `theta` scan, with `(delta, gamma)` by least squares at each `theta`.
    ///
    /// `theta = 0` is always a stationary point of the criterion (which is even in `theta`)
    /// and is often a local minimum even when an interior root exists, so a purely local
    /// start near zero can miss the better solution. Each grid value is scored by
    /// `gbar' (sum w w' / n)^{-1} gbar / s^2`, which is exact in `(delta, gamma)` because
    /// `1, x` are among the instruments. A zero scan optimum starts at a small positive `theta`.
    fn initial_beta(&self, data: &[Obs]) -> Option<DVector<f64>> {
        let n = data.len() as f64;
        let mx = data.iter().map(|z| z.x).sum::<f64>() / n;
        let sxx: f64 = data.iter().map(|z| (z.x - mx) * (z.x - mx)).sum();
        if !(sxx > 0.0) {
            return None;
        }
        let inst: Vec<DVector<f64>> = data.iter().map(|z| self.instruments(z.x)).collect();
        let mut gram = DMatrix::zeros(self.dim_g, self.dim_g);
        for w in &inst {
            gram += w * w.transpose() / n;
        }
        let winv = gram.try_inverse()?;
        let ols = |theta: f64| {
            let v: Vec<f64> = data.iter().map(|z| ihs_inverse(theta, z.y)).collect();
            let mv = v.iter().sum::<f64>() / n;
            let sxv: f64 = data
                .iter()
                .zip(&v)
                .map(|(z, a)| (z.x - mx) * (a - mv))
                .sum();
            let gamma = sxv / sxx;
            let delta = mv - gamma * mx;
            let mut gbar = DVector::zeros(self.dim_g);
            let mut s2 = 0.0;
            for ((z, a), w) in data.iter().zip(&v).zip(&inst) {
                let u = a - delta - gamma * z.x;
                gbar += w * (u / n);
                s2 += u * u / n;
            }
            let score = if s2 > 0.0 {
                gbar.dot(&(&winv * &gbar)) / s2
            } else {
                f64::INFINITY
            };
            (score, delta, gamma)
        };
        let grid = (0..=40)
            .map(|k| k as f64 * 0.05)
            .chain((1..=32).map(|k| 2.0 + k as f64 * 0.25));
        let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
        for theta in grid {
            let (score, delta, gamma) = ols(theta);
            if score < best.0 {
                best = (score, delta, gamma, theta);
            }
        }
        let (_, delta, gamma, theta) = best;
        if !(delta.is_finite() && gamma.is_finite()) {
            return None;
        }
        Some(DVector::from_vec(vec![
            delta,
            gamma,
            if theta == 0.0 { 0.05 } else { theta },
        ]))
    }

    /// `theta` and `-theta` give identical residuals; report `theta >= 0`. The criterion
    /// is a function of `theta^2`, so a minimum on the boundary `theta = 0` is only located
    /// to within about `1e-5`; such points are set to zero (the criterion moves by `O(theta^4)`).
    fn canonicalize(&self, beta: &mut DVector<f64>) {
        beta[2] = if beta[2].abs() < THETA_ZERO {
            0.0
        } else {
            beta[2].abs()
        };
    }

    fn admissible(&self, beta: &DVector<f64>) -> bool {
        beta[2].abs() <= THETA_BOUND
    }
}

impl ResidualModel for IhsModel {
    fn residual(&self, z: &Obs, beta: &DVector<f64>) -> f64 {
        ihs_inverse(beta[2], z.y) - beta[0] - beta[1] * z.x
    }

    fn residual_gradient(&self, z: &Obs, beta: &DVector<f64>) -> DVector<f64> {
        let (d1, _) = ihs_inverse_theta_derivatives(beta[2], z.y);
        DVector::from_vec(vec![-1.0, -z.x, d1])
    }

    fn residual_hessian(&self, z: &Obs, beta: &DVector<f64>) -> DMatrix<f64> {
        let (_, d2) = ihs_inverse_theta_derivatives(beta[2], z.y);
        let mut h = DMatrix::zeros(3, 3);
        h[(2, 2)] = d2;
        h
    }
}
