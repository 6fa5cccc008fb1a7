//! Small-bandwidth prediction of the relative integrated variance of the feasible
//! density estimator in scenario 1 (`x`, `u` independent standard normal).
//!
//! The prediction is
//! `1 - b / (4 sqrt(pi) R(k)) + b / (tau'D tau R(k)) int (d{(tau_{0|u} - tau_0) phi}/du)^2 du`
//! with `tau_j = E[x^j s_3(x)]` and `s_3` the optimal-instrument component for `theta`.

use std::cell::RefCell;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::density::amise_bandwidth_pdf;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quadrature::Quadrature;
use crate::simulation::truth::normal_derivative_roughness;
use crate::special::{norm_cdf, norm_pdf, normal_moment};

/// How `tau_{0|u}(u) = E[tanh(theta(u + delta + gamma x)) | u] / theta^2 - (delta + u) / theta` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalForm {
    /// Quadrature over `x`.
    Exact,
    /// `tanh(t) ~ 2 Phi(sqrt(pi/2) t) - 1`, which makes the expectation over `x` closed form.
    NormalCdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionSetup {
    /// `(delta, gamma, theta)` entering `s_3`, `tau` and `tau_{0|u}`.
    pub beta: [f64; 3],
    pub conditional: ConditionalForm,
}

impl PredictionSetup {
    /// Slope 4 and the normal-cdf form of `tau_{0|u}`, giving `tau'D tau = 9.8092` for `d_g = 4`
    /// and the reference prediction table (0.836 at n = 100).
    pub fn reference() -> Self {
        PredictionSetup {
            beta: [1.0, 4.0, 0.08],
            conditional: ConditionalForm::NormalCdf,
        }
    }

    /// Every population quantity by quadrature at `beta`.
    pub fn exact(beta: [f64; 3]) -> Self {
        PredictionSetup {
            beta,
            conditional: ConditionalForm::Exact,
        }
    }
}

impl Default for PredictionSetup {
    fn default() -> Self {
        PredictionSetup::reference()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvarPrediction {
    pub n: usize,
    pub d_g: usize,
    pub bandwidth: f64,
    /// `-b / (4 sqrt(pi) R(k))`
    pub first_term: f64,
    /// `b I / (tau'D tau R(k))`
    pub second_term: f64,
    pub tau_d_tau: f64,
    pub integral: f64,
    pub value: f64,
}

/// `tanh(a) - a` without cancellation for small `a`.
fn tanh_minus_id(a: f64) -> f64 {
    if a.abs() < 0.01 {
        let a2 = a * a;
        a * a2 * (-1.0 / 3.0 + a2 * (2.0 / 15.0 + a2 * (-17.0 / 315.0 + a2 * 62.0 / 2835.0)))
    } else {
        a.tanh() - a
    }
}

const NORMAL_BREAKS: [f64; 9] = [-12.0, -8.0, -5.0, -2.5, 0.0, 2.5, 5.0, 8.0, 12.0];

/// `E[h(Z)]` for standard normal `Z`, truncated to `|Z| <= 12`.
fn normal_expectation(h: impl Fn(f64) -> f64, tol: f64, failure: &RefCell<Option<Error>>) -> f64 {
    let q = Quadrature {
        abs_tol: tol,
        rel_tol: 1e-13,
        max_intervals: 2000,
    };
    match q.integrate_pieces(|z| h(z) * norm_pdf(z), &NORMAL_BREAKS) {
        Ok(e) => e.value,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    }
}

fn take(failure: RefCell<Option<Error>>) -> Result<()> {
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// `tau_j = E[x^j s_3(x)]`, `j < d_g`, with `s_3(x) = E_u[tanh(a) - a] / theta^2`, `a = theta(u + delta + gamma x)`.
pub fn tau_vector(d_g: usize, setup: &PredictionSetup) -> Result<Vec<f64>> {
    let [delta, gamma, theta] = setup.beta;
    if theta == 0.0 {
        return Err(Error::invalid("theta must be nonzero"));
    }
    let failure = RefCell::new(None);
    let s3 = |x: f64| {
        normal_expectation(
            |u| tanh_minus_id(theta * (u + delta + gamma * x)),
            1e-15,
            &failure,
        ) / (theta * theta)
    };
    // tabulate s_3 once on the nodes the outer rule visits by integrating all moments together
    let mut out = Vec::with_capacity(d_g);
    for j in 0..d_g {
        out.push(normal_expectation(
            |x| x.powi(j as i32) * s3(x),
            1e-12,
            &failure,
        ));
    }
    take(failure)?;
    Ok(out)
}

/// `tau' D tau` with `D = M^{-1} - diag(I_2, 0)` and `M_ij = E[x^{i+j-2}]`.
pub fn tau_d_tau(d_g: usize, setup: &PredictionSetup) -> Result<f64> {
    if d_g < 3 {
        return Err(Error::invalid("tau'D tau needs d_g >= 3"));
    }
    let tau = tau_vector(d_g, setup)?;
    let m = DMatrix::from_fn(d_g, d_g, |i, j| normal_moment(i + j));
    let mut d = m.try_inverse().ok_or(Error::IllConditioned {
        what: "instrument moment matrix",
        condition: f64::INFINITY,
    })?;
    d[(0, 0)] -= 1.0;
    d[(1, 1)] -= 1.0;
    let t = nalgebra::DVector::from_vec(tau);
    Ok(t.dot(&(&d * &t)))
}

/// `(tau_{0|u}(u), d tau_{0|u} / du)`.
fn tau_conditional(
    u: f64,
    setup: &PredictionSetup,
    failure: &RefCell<Option<Error>>,
) -> (f64, f64) {
    let [delta, gamma, theta] = setup.beta;
    let t2 = theta * theta;
    match setup.conditional {
        ConditionalForm::Exact => {
            let a = |x: f64| theta * (u + delta + gamma * x);
            let level = normal_expectation(|x| tanh_minus_id(a(x)), 1e-15, failure) / t2;
            let slope = -normal_expectation(|x| a(x).tanh().powi(2), 1e-15, failure) / theta;
            (level, slope)
        }
        ConditionalForm::NormalCdf => {
            let c = (std::f64::consts::FRAC_PI_2).sqrt() * theta
                / (1.0 + std::f64::consts::FRAC_PI_2 * t2 * gamma * gamma).sqrt();
            let v = delta + u;
            let level = (2.0 * norm_cdf(c * v) - 1.0) / t2 - v / theta;
            let slope = 2.0 * c * norm_pdf(c * v) / t2 - 1.0 / theta;
            (level, slope)
        }
    }
}

/// `int (d{(tau_{0|u}(u) - tau_0) phi(u)} / du)^2 du`, centred at the exact `tau_0`.
pub fn squared_derivative_integral(setup: &PredictionSetup) -> Result<f64> {
    let tau0 = tau_vector(1, setup)?[0];
    let failure = RefCell::new(None);
    let q = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_intervals: 2000,
    };
    let r = q.integrate_pieces(
        |u| {
            let (t, dt) = tau_conditional(u, setup, &failure);
            let p = norm_pdf(u);
            let d = dt * p - (t - tau0) * u * p;
            d * d
        },
        &NORMAL_BREAKS,
    )?;
    take(failure)?;
    Ok(r.value)
}

/// Predicted `IVar[f_hat] / IVar[f_tilde]` for scenario 1 with the AMISE density bandwidth.
pub fn scenario1_relative_ivar_prediction(
    n: usize,
    d_g: usize,
    kernel: &KernelSpec,
    setup: &PredictionSetup,
) -> Result<IvarPrediction> {
    if d_g < 4 {
        return Err(Error::invalid(format!(
            "the prediction needs an over-identified model, got d_g = {d_g}"
        )));
    }
    let rk = kernel.roughness();
    let b = amise_bandwidth_pdf(kernel, normal_derivative_roughness(2 * kernel.r()), n)?;
    let tdt = tau_d_tau(d_g, setup)?;
    let integral = squared_derivative_integral(setup)?;
    let first_term = -b / (4.0 * std::f64::consts::PI.sqrt() * rk);
    let second_term = b * integral / (tdt * rk);
    Ok(IvarPrediction {
        n,
        d_g,
        bandwidth: b,
        first_term,
        second_term,
        tau_d_tau: tdt,
        integral,
        value: 1.0 + first_term + second_term,
    })
}
