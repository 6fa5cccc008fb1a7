//! Order `1/n` bias curves and the bias-corrected density and distribution estimates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{spd_inverse, AsymptoticMatrices};
use crate::carrier::CarrierFamily;
use crate::density::{
    amise_bandwidth_pdf, kernel_sums, positive_part_normalize, rearrange_cdf, CurveEstimate,
    CurveKind,
};
use crate::error::{Error, Result};
use crate::gel::{shrink_probabilities, GelSolution};
use crate::kernels::KernelSpec;
use crate::model::{moment_matrix, ResidualModel};
use crate::quadrature::cumulative_trapezoid;

/// Relative floor applied to density estimates used as denominators.
pub const DENSITY_FLOOR: f64 = 1e-3;

/// Pilot bandwidth for the bias curves: twice the AMISE density bandwidth.
pub fn default_pilot_bandwidth(kernel: &KernelSpec, roughness: f64, n: usize) -> Result<f64> {
    Ok(2.0 * amise_bandwidth_pdf(kernel, roughness, n)?)
}

fn check_lengths(n: usize, others: &[(&str, usize)]) -> Result<()> {
    for (what, len) in others {
        if *len != n {
            return Err(Error::invalid(format!(
                "{what} has length {len}, expected {n}"
            )));
        }
    }
    Ok(())
}

/// `sum_i pi_i v_i k_b^{(d)}(u - u_i)` on the grid, an estimate of `d^d {E[v|u] f(u)} / du^d`.
pub fn smooth_conditional_product(
    u_hat: &[f64],
    v: &[f64],
    pi: &[f64],
    kernel: &KernelSpec,
    pilot_b: f64,
    grid: &[f64],
    d: usize,
) -> Result<Vec<f64>> {
    if d > 2 {
        return Err(Error::Unsupported(format!(
            "smoother derivative of order {d}"
        )));
    }
    if !(pilot_b > 0.0) {
        return Err(Error::invalid(format!(
            "pilot bandwidth must be positive, got {pilot_b}"
        )));
    }
    check_lengths(u_hat.len(), &[("v", v.len()), ("pi", pi.len())])?;
    let w: Vec<f64> = pi.iter().zip(v).map(|(p, x)| p * x).collect();
    Ok(kernel_sums(u_hat, &[&w], kernel, pilot_b, grid, d)
        .pop()
        .unwrap())
}

/// Nadaraya-Watson ratios `E[v_k | u]` for several `v_k`, times `f_hat`, masked below the floor.
fn conditional_times_density(
    u_hat: &[f64],
    vs: &[Vec<f64>],
    pi: &[f64],
    kernel: &KernelSpec,
    pilot_b: f64,
    grid: &[f64],
    f_hat: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
    if f_hat.len() != grid.len() {
        return Err(Error::invalid("f_hat and grid lengths differ"));
    }
    let mut weights: Vec<Vec<f64>> = vs
        .iter()
        .map(|v| pi.iter().zip(v).map(|(p, x)| p * x).collect())
        .collect();
    weights.push(pi.to_vec());
    let refs: Vec<&[f64]> = weights.iter().map(|w| w.as_slice()).collect();
    let mut sums = kernel_sums(u_hat, &refs, kernel, pilot_b, grid, 0);
    let denom = sums.pop().unwrap();
    let den_floor = DENSITY_FLOOR * denom.iter().copied().fold(0.0, f64::max);
    let f_floor = DENSITY_FLOOR * f_hat.iter().copied().fold(0.0, f64::max);
    let active: Vec<bool> = f_hat.iter().map(|&f| f > f_floor).collect();
    let out = sums
        .into_iter()
        .map(|num| {
            num.iter()
                .zip(&denom)
                .zip(f_hat)
                .zip(&active)
                .map(|(((n, d), f), &on)| if on { n / d.max(den_floor) * f } else { 0.0 })
                .collect()
        })
        .collect();
    Ok((out, active))
}

/// `(-c E[g'Pg|u] + c (d_g - d_beta) + zeta' P E[g|u]) f(u)`.
///
/// `gmat` holds the moment indicators at `beta_hat`; weights are the shrunk implied probabilities.
#[allow(clippy::too_many_arguments)]
pub fn delta_rho_curve(
    sol: &GelSolution,
    matrices: &AsymptoticMatrices,
    gmat: &DMatrix<f64>,
    u_hat: &[f64],
    kernel: &KernelSpec,
    pilot_b: f64,
    grid: &[f64],
    f_hat: &[f64],
) -> Result<Vec<f64>> {
    check_lengths(sol.n, &[("gmat", gmat.nrows()), ("u_hat", u_hat.len())])?;
    let pi = shrink_probabilities(&sol.pi);
    let p = &matrices.p;
    let zp = p * &matrices.zeta_lambda;
    let mut quad = Vec::with_capacity(sol.n);
    let mut lin = Vec::with_capacity(sol.n);
    for i in 0..sol.n {
        let gi = gmat.row(i).transpose();
        quad.push((gi.transpose() * p * &gi)[(0, 0)]);
        lin.push(zp.dot(&gi));
    }
    let (cond, active) =
        conditional_times_density(u_hat, &[quad, lin], &pi, kernel, pilot_b, grid, f_hat)?;
    let c = matrices.c_rho;
    let excess = (sol.dim_g - sol.dim_beta) as f64;
    Ok((0..grid.len())
        .map(|j| {
            if active[j] {
                -c * cond[0][j] + c * excess * f_hat[j] + cond[1][j]
            } else {
                0.0
            }
        })
        .collect())
}

/// The estimation-effect curve
/// `d{E[grad_u' H g|u] f}/du - zeta' H' d{E[grad_u|u] f}/du
///  + tr(Sigma [d^2{E[grad_u grad_u'|u] f}/du^2 - d{E[hess_u|u] f}/du]) / 2`.
#[allow(clippy::too_many_arguments)]
pub fn delta_curve<M: ResidualModel>(
    sol: &GelSolution,
    matrices: &AsymptoticMatrices,
    model: &M,
    data: &[M::Obs],
    kernel: &KernelSpec,
    pilot_b: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    check_lengths(sol.n, &[("data", data.len())])?;
    if !(pilot_b > 0.0) {
        return Err(Error::invalid(format!(
            "pilot bandwidth must be positive, got {pilot_b}"
        )));
    }
    let pi = shrink_probabilities(&sol.pi);
    let beta = sol.beta();
    let h = &matrices.h;
    let sigma = &matrices.sigma;
    let hz: DVector<f64> = h * &matrices.zeta_lambda;
    let n = data.len();
    let (mut w1, mut w2, mut w3, mut w4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut u_hat = Vec::with_capacity(n);
    for (i, z) in data.iter().enumerate() {
        let g = model.moments(z, &beta);
        let du = model.residual_gradient(z, &beta);
        let d2u = model.residual_hessian(z, &beta);
        u_hat.push(model.residual(z, &beta));
        w1[i] = pi[i] * du.dot(&(h * &g));
        w2[i] = pi[i] * hz.dot(&du);
        w3[i] = pi[i] * du.dot(&(sigma * &du));
        w4[i] = pi[i] * (sigma * &d2u).trace();
    }
    let first = kernel_sums(&u_hat, &[&w1, &w2, &w4], kernel, pilot_b, grid, 1);
    let second = kernel_sums(&u_hat, &[&w3], kernel, pilot_b, grid, 2)
        .pop()
        .unwrap();
    Ok((0..grid.len())
        .map(|j| first[0][j] - first[1][j] + 0.5 * (second[j] - first[2][j]))
        .collect())
}

/// The known-`beta` coefficient `c (-E[g'W g|u] + E[g'W g g'] W E[g|u] + d_g) f(u)`, `W = Omega^{-1}`.
#[allow(clippy::too_many_arguments)]
pub fn known_beta_bias_curve(
    omega: &DMatrix<f64>,
    gmat: &DMatrix<f64>,
    u: &[f64],
    pi: &[f64],
    kernel: &KernelSpec,
    pilot_b: f64,
    grid: &[f64],
    f_hat: &[f64],
    family: CarrierFamily,
) -> Result<Vec<f64>> {
    check_lengths(gmat.nrows(), &[("u", u.len()), ("pi", pi.len())])?;
    let c = family.c_rho();
    if c == 0.0 {
        return Ok(vec![0.0; grid.len()]);
    }
    let w = spd_inverse(omega, "Omega")?;
    let n = gmat.nrows();
    let dg = gmat.ncols();
    let mut quad = Vec::with_capacity(n);
    let mut third = DVector::zeros(dg);
    for i in 0..n {
        let gi = gmat.row(i).transpose();
        let q = (gi.transpose() * &w * &gi)[(0, 0)];
        third += pi[i] * q * &gi;
        quad.push(q);
    }
    let tw = &w * &third;
    let lin: Vec<f64> = (0..n).map(|i| tw.dot(&gmat.row(i).transpose())).collect();
    let (cond, active) =
        conditional_times_density(u, &[quad, lin], pi, kernel, pilot_b, grid, f_hat)?;
    Ok((0..grid.len())
        .map(|j| {
            if active[j] {
                c * (-cond[0][j] + cond[1][j] + dg as f64 * f_hat[j])
            } else {
                0.0
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCurves {
    pub grid: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_rho: Vec<f64>,
    /// Running trapezoid integral of `delta`.
    pub big_delta: Vec<f64>,
    /// Running trapezoid integral of `delta_rho`.
    pub big_delta_rho: Vec<f64>,
    pub pilot_bandwidth: f64,
}

impl BiasCurves {
    pub fn from_parts(
        grid: Vec<f64>,
        delta: Vec<f64>,
        delta_rho: Vec<f64>,
        pilot_bandwidth: f64,
    ) -> Result<Self> {
        check_lengths(
            grid.len(),
            &[("delta", delta.len()), ("delta_rho", delta_rho.len())],
        )?;
        let big_delta = cumulative_trapezoid(&grid, &delta);
        let big_delta_rho = cumulative_trapezoid(&grid, &delta_rho);
        Ok(BiasCurves {
            grid,
            delta,
            delta_rho,
            big_delta,
            big_delta_rho,
            pilot_bandwidth,
        })
    }

    pub fn zeros(grid: Vec<f64>) -> Self {
        let m = grid.len();
        BiasCurves::from_parts(grid, vec![0.0; m], vec![0.0; m], 0.0).expect("matching lengths")
    }
}

/// Both curves for a fitted residual model; `f_hat` is the corrected weighted density on `grid`.
#[allow(clippy::too_many_arguments)]
pub fn bias_curves<M: ResidualModel>(
    sol: &GelSolution,
    matrices: &AsymptoticMatrices,
    model: &M,
    data: &[M::Obs],
    kernel: &KernelSpec,
    pilot_b: f64,
    grid: &[f64],
    f_hat: &[f64],
) -> Result<BiasCurves> {
    let beta = sol.beta();
    let gmat = moment_matrix(model, data, &beta);
    let u_hat: Vec<f64> = data.iter().map(|z| model.residual(z, &beta)).collect();
    let delta = delta_curve(sol, matrices, model, data, kernel, pilot_b, grid)?;
    let delta_rho = delta_rho_curve(sol, matrices, &gmat, &u_hat, kernel, pilot_b, grid, f_hat)?;
    BiasCurves::from_parts(grid.to_vec(), delta, delta_rho, pilot_b)
}

fn same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x != y) {
        return Err(Error::invalid(
            "estimate and bias curves are on different grids",
        ));
    }
    Ok(())
}

/// `f - (delta + delta_rho) / n`, then positive-part normalisation.
pub fn bias_corrected_pdf(
    f_rho_hat: &CurveEstimate,
    curves: &BiasCurves,
    n: usize,
) -> Result<CurveEstimate> {
    if f_rho_hat.kind != CurveKind::Pdf {
        return Err(Error::invalid(
            "bias_corrected_pdf needs a density estimate",
        ));
    }
    same_grid(&f_rho_hat.grid, &curves.grid)?;
    let inv = 1.0 / n as f64;
    let mut out = f_rho_hat.clone();
    for (j, v) in out.values.iter_mut().enumerate() {
        *v -= inv * (curves.delta[j] + curves.delta_rho[j]);
    }
    let mut out = positive_part_normalize(&out)?;
    out.corrections.bias_corrected = true;
    Ok(out)
}

/// `F - (Delta + Delta_rho) / n`, then monotone rearrangement.
pub fn bias_corrected_cdf(
    f_rho_hat: &CurveEstimate,
    curves: &BiasCurves,
    n: usize,
) -> Result<CurveEstimate> {
    if f_rho_hat.kind != CurveKind::Cdf {
        return Err(Error::invalid(
            "bias_corrected_cdf needs a distribution function estimate",
        ));
    }
    same_grid(&f_rho_hat.grid, &curves.grid)?;
    let inv = 1.0 / n as f64;
    let mut out = f_rho_hat.clone();
    for (j, v) in out.values.iter_mut().enumerate() {
        *v -= inv * (curves.big_delta[j] + curves.big_delta_rho[j]);
    }
    let mut out = rearrange_cdf(&out)?;
    out.corrections.bias_corrected = true;
    Ok(out)
}
