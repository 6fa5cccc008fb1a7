//! Moment-condition models and finite-difference checks for their derivatives.

use nalgebra::{DMatrix, DVector};

/// Unconditional moment restriction `E[g(z, beta)] = 0`.
pub trait MomentModel: Sync {
    type Obs: Sync;

    fn dim_g(&self) -> usize;
    fn dim_beta(&self) -> usize;

    /// Moment indicator `g(z, beta)`, length `dim_g`.
    fn moments(&self, z: &Self::Obs, beta: &DVector<f64>) -> DVector<f64>;

    /// `dim_g x dim_beta` Jacobian of `g` with respect to `beta`.
    fn jacobian(&self, z: &Self::Obs, beta: &DVector<f64>) -> DMatrix<f64>;

    /// Second derivatives `d^2 g^j / d beta d beta'`, one matrix per moment.
    ///
    /// The default takes central differences of [`jacobian`](Self::jacobian)
    /// with step `max(1e-5, 1e-5 |beta_j|)`.
    fn moment_hessians(&self, z: &Self::Obs, beta: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let (dg, db) = (self.dim_g(), self.dim_beta());
        let mut out = vec![DMatrix::zeros(db, db); dg];
        let mut bp = beta.clone();
        for l in 0..db {
            let h = fd_step(beta[l]);
            bp[l] = beta[l] + h;
            let jp = self.jacobian(z, &bp);
            bp[l] = beta[l] - h;
            let jm = self.jacobian(z, &bp);
            bp[l] = beta[l];
            for (j, hess) in out.iter_mut().enumerate() {
                for k in 0..db {
                    hess[(k, l)] = (jp[(j, k)] - jm[(j, k)]) / (2.0 * h);
                }
            }
        }
        for hess in &mut out {
            let sym = 0.5 * (&*hess + hess.transpose());
            *hess = sym;
        }
        out
    }

    /// Starting value for the estimator, if the model has a natural one.
    fn initial_beta(&self, _data: &[Self::Obs]) -> Option<DVector<f64>> {
        None
    }

    /// Map `beta` to a canonical member of its observationally equivalent set.
    fn canonicalize(&self, _beta: &mut DVector<f64>) {}

    /// Parameter region searched by the estimator; trial points outside it are rejected.
    fn admissible(&self, _beta: &DVector<f64>) -> bool {
        true
    }
}

/// A moment model that also defines a scalar generalised residual `u(z, beta)`.
pub trait ResidualModel: MomentModel {
    fn residual(&self, z: &Self::Obs, beta: &DVector<f64>) -> f64;
    fn residual_gradient(&self, z: &Self::Obs, beta: &DVector<f64>) -> DVector<f64>;
    fn residual_hessian(&self, z: &Self::Obs, beta: &DVector<f64>) -> DMatrix<f64>;
}

pub(crate) fn fd_step(b: f64) -> f64 {
    (1e-5 * b.abs()).max(1e-5)
}

/// Stack `g(z_i, beta)'` into an `n x dim_g` matrix.
pub fn moment_matrix<M: MomentModel>(
    model: &M,
    data: &[M::Obs],
    beta: &DVector<f64>,
) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(data.len(), model.dim_g());
    for (i, z) in data.iter().enumerate() {
        let g = model.moments(z, beta);
        out.row_mut(i).copy_from(&g.transpose());
    }
    out
}

/// Residuals `u(z_i, beta)`.
pub fn residuals<M: ResidualModel>(model: &M, data: &[M::Obs], beta: &DVector<f64>) -> Vec<f64> {
    data.iter().map(|z| model.residual(z, beta)).collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Largest relative discrepancy between the analytic Jacobian and central differences of `g`.
pub fn jacobian_fd_error<M: MomentModel>(model: &M, z: &M::Obs, beta: &DVector<f64>) -> f64 {
    let jac = model.jacobian(z, beta);
    let mut worst = 0.0_f64;
    let mut bp = beta.clone();
    for l in 0..model.dim_beta() {
        let h = fd_step(beta[l]);
        bp[l] = beta[l] + h;
        let gp = model.moments(z, &bp);
        bp[l] = beta[l] - h;
        let gm = model.moments(z, &bp);
        bp[l] = beta[l];
        for j in 0..model.dim_g() {
            worst = worst.max(rel_err((gp[j] - gm[j]) / (2.0 * h), jac[(j, l)]));
        }
    }
    worst
}

/// Largest relative discrepancy of the analytic residual gradient and Hessian
/// against central differences of `u` and of the gradient respectively.
pub fn residual_fd_error<M: ResidualModel>(model: &M, z: &M::Obs, beta: &DVector<f64>) -> f64 {
    let grad = model.residual_gradient(z, beta);
    let hess = model.residual_hessian(z, beta);
    let mut worst = 0.0_f64;
    let mut bp = beta.clone();
    for l in 0..model.dim_beta() {
        let h = fd_step(beta[l]);
        bp[l] = beta[l] + h;
        let (up, gp) = (model.residual(z, &bp), model.residual_gradient(z, &bp));
        bp[l] = beta[l] - h;
        let (um, gm) = (model.residual(z, &bp), model.residual_gradient(z, &bp));
        bp[l] = beta[l];
        worst = worst.max(rel_err((up - um) / (2.0 * h), grad[l]));
        for k in 0..model.dim_beta() {
            worst = worst.max(rel_err((gp[k] - gm[k]) / (2.0 * h), hess[(k, l)]));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `g = (z - b0, z^2 - b0^2 - b1)`, with deliberately nonlinear structure.
    struct Quad;

    impl MomentModel for Quad {
        type Obs = f64;
        fn dim_g(&self) -> usize {
            2
        }
        fn dim_beta(&self) -> usize {
            2
        }
        fn moments(&self, z: &f64, b: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![z - b[0], z * z - b[0] * b[0] - b[1] * b[1] * b[1]])
        }
        fn jacobian(&self, _z: &f64, b: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, -2.0 * b[0], -3.0 * b[1] * b[1]])
        }
    }

    #[test]
    fn default_hessians_by_differences() {
        let b = DVector::from_vec(vec![0.4, 1.3]);
        let h = Quad.moment_hessians(&1.0, &b);
        assert!(h[0].norm() < 1e-9);
        assert!((h[1][(0, 0)] + 2.0).abs() < 1e-6);
        assert!((h[1][(1, 1)] + 6.0 * 1.3).abs() < 1e-6);
        assert!(h[1][(0, 1)].abs() < 1e-6);
        assert!(jacobian_fd_error(&Quad, &0.7, &b) < 1e-8);
    }

    #[test]
    fn stacked_moments() {
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let g = moment_matrix(&Quad, &[1.0, 2.0, 3.0], &b);
        assert_eq!(g.shape(), (3, 2));
        assert_eq!(g[(2, 0)], 2.0);
        assert_eq!(g[(2, 1)], 8.0);
    }
}
