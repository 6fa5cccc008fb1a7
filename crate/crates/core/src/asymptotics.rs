//! Plug-in estimates of the matrices in the second-order expansions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gel::{shrink_probabilities, GelSolution};
use crate::model::{moment_matrix, MomentModel};

const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct AsymptoticMatrices {
    pub omega: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub a: DVector<f64>,
    pub zeta_lambda: DVector<f64>,
    pub c_rho: f64,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Invert a symmetric positive definite matrix, reporting its condition number on failure.
pub(crate) fn spd_inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { what, condition });
    }
    let inv_vals = eig.eigenvalues.map(|v| 1.0 / v);
    let q = &eig.eigenvectors;
    Ok(symmetrize(
        &(q * DMatrix::from_diagonal(&inv_vals) * q.transpose()),
    ))
}

/// Weighted second moment `sum w_i g_i g_i'`.
pub fn weighted_outer(gmat: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut scaled = gmat.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= w[i];
    }
    symmetrize(&gmat.tr_mul(&scaled))
}

/// Plug-in matrices from a converged fit.
///
/// Expectations are means weighted by the shrunk implied probabilities.
pub fn asymptotic_components<M: MomentModel>(
    sol: &GelSolution,
    model: &M,
    data: &[M::Obs],
) -> Result<AsymptoticMatrices> {
    if !sol.converged {
        return Err(Error::invalid("asymptotic components need a converged fit"));
    }
    if data.len() != sol.n {
        return Err(Error::invalid(
            "data length does not match the fitted sample",
        ));
    }
    let w = shrink_probabilities(&sol.pi);
    let beta = sol.beta();
    let (dg, db) = (model.dim_g(), model.dim_beta());
    let gmat = moment_matrix(model, data, &beta);
    let jacobians: Vec<DMatrix<f64>> = data.iter().map(|z| model.jacobian(z, &beta)).collect();

    let omega = weighted_outer(&gmat, &w);
    let mut g = DMatrix::zeros(dg, db);
    for (jac, wi) in jacobians.iter().zip(&w) {
        g += *wi * jac;
    }
    let omega_inv = spd_inverse(&omega, "Omega")?;
    let info = symmetrize(&(g.transpose() * &omega_inv * &g));
    let sigma = spd_inverse(&info, "G' Omega^-1 G")?;
    let h = &sigma * g.transpose() * &omega_inv;
    let p = symmetrize(&(&omega_inv - &omega_inv * &g * &sigma * g.transpose() * &omega_inv));

    let mut a = DVector::zeros(dg);
    let mut e_ghg = DVector::zeros(dg);
    let mut e_gpg = DVector::zeros(dg);
    for (i, z) in data.iter().enumerate() {
        let gi = gmat.row(i).transpose();
        let hess = model.moment_hessians(z, &beta);
        for j in 0..dg {
            a[j] += w[i] * (&sigma * &hess[j]).trace();
        }
        e_ghg += w[i] * &jacobians[i] * (&h * &gi);
        let q = (gi.transpose() * &p * &gi)[(0, 0)];
        e_gpg += w[i] * q * &gi;
    }
    let c_rho = sol.family.c_rho();
    let zeta_lambda = -&a + e_ghg + c_rho * e_gpg;
    Ok(AsymptoticMatrices {
        omega,
        g,
        sigma,
        h,
        p,
        a,
        zeta_lambda,
        c_rho,
    })
}
