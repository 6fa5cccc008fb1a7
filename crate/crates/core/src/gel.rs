//! GEL saddle point: inner multiplier problem, implied probabilities and the outer fit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::carrier::CarrierFamily;
use crate::error::{Error, Result};
use crate::model::{moment_matrix, MomentModel};

/// Minimum distance kept between `lambda' g_i` and the edge of the carrier domain.
pub const FEASIBILITY_MARGIN: f64 = 1e-10;
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LambdaSolution {
    pub lambda: DVector<f64>,
    /// `n^{-1} sum rho(lambda' g_i)` at the optimum.
    pub criterion: f64,
    pub iterations: usize,
    /// Norm of the first-order condition at the returned point.
    pub residual: f64,
}

fn check_rank(gmat: &DMatrix<f64>) -> Result<()> {
    let (n, dg) = gmat.shape();
    if dg == 0 {
        return Err(Error::invalid("moment matrix has no columns"));
    }
    if n < dg {
        return Err(Error::invalid(format!(
            "need at least {dg} observations, got {n}"
        )));
    }
    if gmat.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("moment matrix contains non-finite values"));
    }
    let sv = gmat.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min <= RANK_TOL * max {
        return Err(Error::SingularMoments {
            ratio: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    Ok(())
}

struct Dual<'a> {
    gmat: &'a DMatrix<f64>,
    family: CarrierFamily,
    n: f64,
}

impl Dual<'_> {
    fn feasible(&self, v: &DVector<f64>) -> bool {
        v.iter().all(|&x| {
            self.family.in_domain(x) && self.family.boundary_distance(x) >= FEASIBILITY_MARGIN
        })
    }

    fn value(&self, v: &DVector<f64>) -> f64 {
        v.iter()
            .map(|&x| self.family.derivative_unchecked(x, 0))
            .sum::<f64>()
            / self.n
    }

    fn gradient(&self, v: &DVector<f64>) -> DVector<f64> {
        let r1 = v.map(|x| self.family.derivative_unchecked(x, 1));
        self.gmat.tr_mul(&r1) / self.n
    }

    /// `-d^2 P / d lambda d lambda'`, positive definite.
    fn neg_hessian(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let w = v.map(|x| -self.family.derivative_unchecked(x, 2) / self.n);
        let mut scaled = self.gmat.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= w[i];
        }
        self.gmat.tr_mul(&scaled)
    }
}

/// Solve for `lambda` maximising `n^{-1} sum rho(lambda' g_i)` given the rows `g_i` of `gmat`.
pub fn solve_lambda(
    gmat: &DMatrix<f64>,
    family: CarrierFamily,
    tol: f64,
) -> Result<LambdaSolution> {
    solve_lambda_from(
        gmat,
        family,
        &InnerOptions {
            tol,
            ..Default::default()
        },
        None,
    )
}

/// [`solve_lambda`] with an optional warm start; an infeasible start falls back to zero.
pub fn solve_lambda_from(
    gmat: &DMatrix<f64>,
    family: CarrierFamily,
    opts: &InnerOptions,
    start: Option<&DVector<f64>>,
) -> Result<LambdaSolution> {
    check_rank(gmat)?;
    let dual = Dual {
        gmat,
        family,
        n: gmat.nrows() as f64,
    };
    let dg = gmat.ncols();
    let mut lambda = DVector::zeros(dg);
    if let Some(s) = start {
        if s.len() == dg && dual.feasible(&(gmat * s)) {
            lambda = s.clone();
        }
    }
    let mut v = gmat * &lambda;
    let mut value = dual.value(&v);
    let mut grad = dual.gradient(&v);
    let mut residual = grad.norm();
    for iter in 0..opts.max_iter {
        if residual <= opts.tol {
            return finish(
                &dual,
                &v,
                LambdaSolution {
                    lambda,
                    criterion: value,
                    iterations: iter,
                    residual,
                },
            );
        }
        let neg_h = dual.neg_hessian(&v);
        let step = newton_direction(neg_h, &grad);
        let dv = gmat * &step;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let v_try = &v + t * &dv;
            if dual.feasible(&v_try) {
                let val_try = dual.value(&v_try);
                // allow for rounding noise in the criterion once the gradient is tiny
                if val_try >= value - 1e-13 * value.abs().max(1e-300) {
                    lambda += t * &step;
                    v = v_try;
                    value = val_try;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        grad = dual.gradient(&v);
        residual = grad.norm();
        if !accepted {
            break;
        }
    }
    if residual <= opts.tol {
        return finish(
            &dual,
            &v,
            LambdaSolution {
                lambda,
                criterion: value,
                iterations: opts.max_iter,
                residual,
            },
        );
    }
    Err(Error::NonConvergence {
        stage: "inner multiplier solve",
        iterations: opts.max_iter,
        residual,
        best: lambda.iter().copied().collect(),
    })
}

/// Reject a small gradient reached only because the multiplier is running off to infinity
/// (zero outside the convex hull of the `g_i`), which shows up as a vanishing curvature.
fn finish(dual: &Dual<'_>, v: &DVector<f64>, sol: LambdaSolution) -> Result<LambdaSolution> {
    let curv = dual.neg_hessian(v).symmetric_eigen().eigenvalues.min();
    let second = (dual.gmat.tr_mul(dual.gmat) / dual.n)
        .symmetric_eigen()
        .eigenvalues
        .min();
    if !(curv > 1e-8 * second) {
        return Err(Error::NonConvergence {
            stage: "inner multiplier solve (diverging multiplier)",
            iterations: sol.iterations,
            residual: sol.residual,
            best: sol.lambda.iter().copied().collect(),
        });
    }
    Ok(sol)
}

/// Solve `A x = b` for symmetric positive (semi)definite `A`, with a ridge if Cholesky fails.
fn newton_direction(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if let Some(ch) = a.clone().cholesky() {
        return ch.solve(b);
    }
    let scale = a
        .diagonal()
        .iter()
        .fold(0.0_f64, |m, &x| m.max(x.abs()))
        .max(1e-300);
    let mut mu = 1e-12 * scale;
    loop {
        let mut ar = a.clone();
        for i in 0..ar.nrows() {
            ar[(i, i)] += mu;
        }
        if let Some(ch) = ar.cholesky() {
            return ch.solve(b);
        }
        mu *= 10.0;
        if mu > 1e6 * scale {
            return b / scale;
        }
    }
}

/// `pi_i = rho'(v_i) / sum_j rho'(v_j)` with `v_i = lambda' g_i`.
pub fn implied_probabilities(
    lambda: &DVector<f64>,
    gmat: &DMatrix<f64>,
    family: CarrierFamily,
) -> Result<Vec<f64>> {
    if lambda.len() != gmat.ncols() {
        return Err(Error::invalid(
            "lambda length does not match moment dimension",
        ));
    }
    let v = gmat * lambda;
    let r1 = v
        .iter()
        .map(|&x| family.derivative(x, 1))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = r1.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::invalid(
            "implied probabilities have zero or non-finite normaliser",
        ));
    }
    Ok(r1.into_iter().map(|r| r / total).collect())
}

/// Shift by `eps = max(0, -min pi)` and renormalise.
pub fn shrink_probabilities(pi: &[f64]) -> Vec<f64> {
    let lowest = pi.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest >= 0.0 {
        return pi.to_vec();
    }
    let eps = -lowest;
    let total: f64 = pi.iter().map(|p| p + eps).sum();
    pi.iter().map(|p| (p + eps) / total).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GelOptions {
    /// Starting value; defaults to two-step GMM from the model's own start.
    pub beta_start: Option<Vec<f64>>,
    pub inner: InnerOptions,
    pub outer_tol: Option<f64>,
    pub max_outer: Option<usize>,
}

impl GelOptions {
    fn outer_tol(&self) -> f64 {
        self.outer_tol.unwrap_or(1e-6)
    }
    fn max_outer(&self) -> usize {
        self.max_outer.unwrap_or(500)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationCounts {
    pub outer: usize,
    pub inner_total: usize,
    /// Outer trial points rejected because the inner problem failed.
    pub inner_failures: usize,
    pub used_nelder_mead: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GelSolution {
    pub family: CarrierFamily,
    pub beta_hat: Vec<f64>,
    pub lambda_hat: Vec<f64>,
    /// Raw implied probabilities; may contain negative entries.
    pub pi: Vec<f64>,
    /// `P_n(beta_hat, lambda_hat)`.
    pub criterion: f64,
    pub n: usize,
    pub dim_g: usize,
    pub dim_beta: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub iterations: IterationCounts,
}

impl GelSolution {
    pub fn beta(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.beta_hat)
    }
    pub fn lambda(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.lambda_hat)
    }
    pub fn shrunk_pi(&self) -> Vec<f64> {
        shrink_probabilities(&self.pi)
    }
}

struct Profile<'a, M: MomentModel> {
    model: &'a M,
    data: &'a [M::Obs],
    family: CarrierFamily,
    inner: InnerOptions,
}

struct ProfilePoint {
    beta: DVector<f64>,
    value: f64,
    lambda: DVector<f64>,
    grad: DVector<f64>,
    inner_iters: usize,
}

impl<M: MomentModel> Profile<'_, M> {
    fn eval(&self, beta: &DVector<f64>, warm: Option<&DVector<f64>>) -> Result<ProfilePoint> {
        if !self.model.admissible(beta) || beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonConvergence {
                stage: "parameter left the admissible region",
                iterations: 0,
                residual: f64::NAN,
                best: beta.iter().copied().collect(),
            });
        }
        let gmat = moment_matrix(self.model, self.data, beta);
        let sol = solve_lambda_from(&gmat, self.family, &self.inner, warm)?;
        let n = self.data.len() as f64;
        // envelope theorem: d/d beta P_n(beta, lambda(beta)) = n^{-1} sum rho'(v_i) G_i' lambda
        let v = &gmat * &sol.lambda;
        let mut grad = DVector::zeros(self.model.dim_beta());
        for (i, z) in self.data.iter().enumerate() {
            let w = self.family.derivative_unchecked(v[i], 1) / n;
            grad += w * self.model.jacobian(z, beta).tr_mul(&sol.lambda);
        }
        Ok(ProfilePoint {
            beta: beta.clone(),
            value: sol.criterion,
            lambda: sol.lambda,
            grad,
            inner_iters: sol.iterations,
        })
    }
}

fn mean_jacobian<M: MomentModel>(model: &M, data: &[M::Obs], beta: &DVector<f64>) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(model.dim_g(), model.dim_beta());
    for z in data {
        g += model.jacobian(z, beta);
    }
    g / data.len() as f64
}

fn gram(gmat: &DMatrix<f64>) -> DMatrix<f64> {
    gmat.tr_mul(gmat) / gmat.nrows() as f64
}

/// Gauss-Newton minimisation of `gbar' W gbar`; returns the best point found.
fn gmm_step<M: MomentModel>(
    model: &M,
    data: &[M::Obs],
    start: &DVector<f64>,
    w: &DMatrix<f64>,
) -> DVector<f64> {
    let objective = |b: &DVector<f64>| {
        let gbar = moment_matrix(model, data, b).row_mean().transpose();
        (gbar.transpose() * w * &gbar)[(0, 0)]
    };
    let mut beta = start.clone();
    let mut f = objective(&beta);
    if !f.is_finite() {
        return beta;
    }
    for _ in 0..100 {
        let gbar = moment_matrix(model, data, &beta).row_mean().transpose();
        let jac = mean_jacobian(model, data, &beta);
        let a = jac.transpose() * w * &jac;
        let rhs = -(jac.transpose() * w * &gbar);
        let Some(step) = a.lu().solve(&rhs) else {
            break;
        };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial = &beta + t * &step;
            let ft = if model.admissible(&trial) {
                objective(&trial)
            } else {
                f64::INFINITY
            };
            if ft.is_finite() && ft < f {
                beta = trial;
                f = ft;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved || (t * step.norm()) <= 1e-12 * (1.0 + beta.norm()) {
            break;
        }
    }
    beta
}

/// Two-step GMM: identity weight, then the inverse of the first-step moment covariance.
pub fn two_step_gmm<M: MomentModel>(
    model: &M,
    data: &[M::Obs],
    start: &DVector<f64>,
) -> DVector<f64> {
    let dg = model.dim_g();
    let first = gmm_step(model, data, start, &DMatrix::identity(dg, dg));
    let omega = gram(&moment_matrix(model, data, &first));
    match omega.try_inverse() {
        Some(w) => gmm_step(model, data, &first, &w),
        None => first,
    }
}

/// Minimise the profile criterion `beta -> sup_lambda P_n(beta, lambda)`.
pub fn gel_fit<M: MomentModel>(
    model: &M,
    data: &[M::Obs],
    family: CarrierFamily,
    options: &GelOptions,
) -> Result<GelSolution> {
    let (dg, db) = (model.dim_g(), model.dim_beta());
    if db == 0 || dg < db {
        return Err(Error::invalid(format!(
            "need dim_g >= dim_beta >= 1, got {dg} and {db}"
        )));
    }
    if data.len() <= dg {
        return Err(Error::invalid(format!(
            "need more than {dg} observations, got {}",
            data.len()
        )));
    }
    let start = match &options.beta_start {
        Some(b) if b.len() == db => DVector::from_column_slice(b),
        Some(_) => return Err(Error::invalid("beta_start has the wrong length")),
        None => {
            let s = model
                .initial_beta(data)
                .unwrap_or_else(|| DVector::zeros(db));
            two_step_gmm(model, data, &s)
        }
    };
    let profile = Profile {
        model,
        data,
        family,
        inner: options.inner,
    };
    let mut counts = IterationCounts::default();
    let tol = options.outer_tol();
    let max_outer = options.max_outer();

    let mut point = profile.eval(&start, None)?;
    counts.inner_total += point.inner_iters;
    point = bfgs(&profile, point, tol, max_outer, &mut counts);
    if !(point.grad.norm() <= tol) {
        counts.used_nelder_mead = true;
        if let Some(nm) = nelder_mead(
            &profile,
            &point,
            max_outer.saturating_sub(counts.outer).max(200),
            &mut counts,
        ) {
            if nm.value < point.value || nm.grad.norm() < point.grad.norm() {
                point = nm;
            }
        }
        point = bfgs(&profile, point, tol, max_outer, &mut counts);
    }
    let gnorm = point.grad.norm();
    if !(gnorm <= tol) {
        return Err(Error::NonConvergence {
            stage: "outer profile minimisation",
            iterations: counts.outer,
            residual: gnorm,
            best: point.beta.iter().copied().collect(),
        });
    }
    let mut beta = point.beta.clone();
    model.canonicalize(&mut beta);
    if beta != point.beta {
        let lam = point.lambda.clone();
        point = profile.eval(&beta, Some(&lam))?;
    }
    let gmat = moment_matrix(model, data, &point.beta);
    let pi = implied_probabilities(&point.lambda, &gmat, family)?;
    Ok(GelSolution {
        family,
        beta_hat: point.beta.iter().copied().collect(),
        lambda_hat: point.lambda.iter().copied().collect(),
        pi,
        criterion: point.value,
        n: data.len(),
        dim_g: dg,
        dim_beta: db,
        converged: true,
        gradient_norm: point.grad.norm(),
        iterations: counts,
    })
}

/// Solve only the inner problem at a fixed (e.g. true) `beta`.
pub fn gel_at_beta<M: MomentModel>(
    model: &M,
    data: &[M::Obs],
    beta: &DVector<f64>,
    family: CarrierFamily,
    inner: &InnerOptions,
) -> Result<GelSolution> {
    let gmat = moment_matrix(model, data, beta);
    let sol = solve_lambda_from(&gmat, family, inner, None)?;
    let pi = implied_probabilities(&sol.lambda, &gmat, family)?;
    Ok(GelSolution {
        family,
        beta_hat: beta.iter().copied().collect(),
        lambda_hat: sol.lambda.iter().copied().collect(),
        pi,
        criterion: sol.criterion,
        n: data.len(),
        dim_g: model.dim_g(),
        dim_beta: model.dim_beta(),
        converged: true,
        gradient_norm: f64::NAN,
        iterations: IterationCounts {
            outer: 0,
            inner_total: sol.iterations,
            inner_failures: 0,
            used_nelder_mead: false,
        },
    })
}

fn bfgs<M: MomentModel>(
    profile: &Profile<'_, M>,
    mut point: ProfilePoint,
    tol: f64,
    max_outer: usize,
    counts: &mut IterationCounts,
) -> ProfilePoint {
    let db = point.beta.len();
    let mut hinv =
        initial_inverse_hessian(profile, &point.beta).unwrap_or_else(|| DMatrix::identity(db, db));
    let mut failures = 0;
    while counts.outer < max_outer {
        if point.grad.norm() <= tol {
            break;
        }
        counts.outer += 1;
        let mut dir = -(&hinv * &point.grad);
        let mut slope = point.grad.dot(&dir);
        if !(slope < 0.0) {
            hinv = DMatrix::identity(db, db);
            dir = -point.grad.clone();
            slope = point.grad.dot(&dir);
        }
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..40 {
            let trial = &point.beta + t * &dir;
            match profile.eval(&trial, Some(&point.lambda)) {
                Ok(p) => {
                    counts.inner_total += p.inner_iters;
                    if p.value <= point.value + 1e-4 * t * slope {
                        next = Some(p);
                        break;
                    }
                }
                Err(_) => counts.inner_failures += 1,
            }
            t *= 0.5;
        }
        match next {
            Some(p) => {
                failures = 0;
                let s = &p.beta - &point.beta;
                let y = &p.grad - &point.grad;
                let sy = s.dot(&y);
                if sy > 1e-12 * s.norm() * y.norm() {
                    let rho = 1.0 / sy;
                    let hy = &hinv * &y;
                    let yhy = y.dot(&hy);
                    hinv += (rho * rho * yhy + rho) * &s * s.transpose()
                        - rho * (&hy * s.transpose() + &s * hy.transpose());
                }
                point = p;
            }
            None => {
                failures += 1;
                if failures >= 2 {
                    break;
                }
                hinv = DMatrix::identity(db, db) * (1.0 / point.grad.norm().max(1.0));
            }
        }
    }
    point
}

/// `(G' Omega^{-1} G)^{-1}`, the inverse of the limiting profile Hessian.
fn initial_inverse_hessian<M: MomentModel>(
    profile: &Profile<'_, M>,
    beta: &DVector<f64>,
) -> Option<DMatrix<f64>> {
    let gmat = moment_matrix(profile.model, profile.data, beta);
    let omega_inv = gram(&gmat).try_inverse()?;
    let jac = mean_jacobian(profile.model, profile.data, beta);
    let h = jac.transpose() * omega_inv * jac;
    let hi = h.try_inverse()?;
    hi.iter().all(|v| v.is_finite()).then_some(hi)
}

fn nelder_mead<M: MomentModel>(
    profile: &Profile<'_, M>,
    start: &ProfilePoint,
    max_iter: usize,
    counts: &mut IterationCounts,
) -> Option<ProfilePoint> {
    let db = start.beta.len();
    let warm = start.lambda.clone();
    let f = |b: &DVector<f64>, counts: &mut IterationCounts| match profile.eval(b, Some(&warm)) {
        Ok(p) => {
            counts.inner_total += p.inner_iters;
            p.value
        }
        Err(_) => {
            counts.inner_failures += 1;
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(DVector<f64>, f64)> = vec![(start.beta.clone(), start.value)];
    for j in 0..db {
        let mut b = start.beta.clone();
        b[j] += 0.05 * b[j].abs().max(0.1);
        let v = f(&b, counts);
        simplex.push((b, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[db].1 - simplex[0].1;
        if spread.abs() <= 1e-15 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let centroid = simplex[..db]
            .iter()
            .fold(DVector::zeros(db), |acc, (b, _)| acc + b)
            / db as f64;
        let worst = simplex[db].clone();
        let xr = &centroid + (&centroid - &worst.0);
        let fr = f(&xr, counts);
        if fr < simplex[0].1 {
            let xe = &centroid + 2.0 * (&centroid - &worst.0);
            let fe = f(&xe, counts);
            simplex[db] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[db - 1].1 {
            simplex[db] = (xr, fr);
        } else {
            let xc = &centroid + 0.5 * (&worst.0 - &centroid);
            let fc = f(&xc, counts);
            if fc < worst.1 {
                simplex[db] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let b = &best + 0.5 * (&item.0 - &best);
                    let v = f(&b, counts);
                    *item = (b, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    profile.eval(&simplex[0].0, Some(&warm)).ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverIdTest {
    pub stat: f64,
    pub dof: usize,
    /// Upper-tail chi-square probability; `None` for a just-identified model.
    pub p_value: Option<f64>,
}

/// `2 n P_n(beta_hat, lambda_hat)` and its chi-square degrees of freedom.
pub fn overid_statistic(sol: &GelSolution) -> OverIdTest {
    let stat = 2.0 * sol.n as f64 * sol.criterion;
    let dof = sol.dim_g - sol.dim_beta;
    let p_value = (dof > 0).then(|| {
        let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        chi.sf(stat.max(0.0))
    });
    OverIdTest { stat, dof, p_value }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn two_point_cue_and_el() {
        let g = col(&[-1.0, 2.0]);
        let cue = solve_lambda(&g, CarrierFamily::Cue, 1e-12).unwrap();
        assert!((cue.lambda[0] + 0.2).abs() < 1e-12);
        let el = solve_lambda(&g, CarrierFamily::El, 1e-12).unwrap();
        assert!((el.lambda[0] + 0.25).abs() < 1e-10);
        for (fam, lam) in [
            (CarrierFamily::Cue, &cue.lambda),
            (CarrierFamily::El, &el.lambda),
        ] {
            let pi = implied_probabilities(lam, &g, fam).unwrap();
            assert!((pi[0] - 2.0 / 3.0).abs() < 1e-10);
            assert!((pi[1] - 1.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_mean_columns_give_zero_lambda() {
        let g = DMatrix::from_row_slice(4, 2, &[1.0, 0.5, -1.0, -0.5, 2.0, -1.0, -2.0, 1.0]);
        for fam in [CarrierFamily::El, CarrierFamily::Et, CarrierFamily::Cue] {
            let s = solve_lambda(&g, fam, 1e-12).unwrap();
            assert!(s.lambda.norm() < 1e-14);
            assert_eq!(s.iterations, 0);
            let pi = implied_probabilities(&s.lambda, &g, fam).unwrap();
            assert!(pi.iter().all(|p| (p - 0.25).abs() < 1e-15));
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, -2.0, 0.5, 1.0]);
        assert!(matches!(
            solve_lambda(&g, CarrierFamily::El, 1e-9),
            Err(Error::SingularMoments { .. })
        ));
    }

    #[test]
    fn separated_moments_do_not_converge() {
        let g = col(&[1.0, 2.0, 3.0]);
        match solve_lambda(&g, CarrierFamily::Et, 1e-9) {
            Err(Error::NonConvergence { best, .. }) => assert_eq!(best.len(), 1),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn shrinkage_examples() {
        assert_eq!(shrink_probabilities(&[0.5, 0.5]), vec![0.5, 0.5]);
        let s = shrink_probabilities(&[0.6, 0.5, -0.1]);
        assert!(
            (s[0] - 7.0 / 13.0).abs() < 1e-15 && (s[1] - 6.0 / 13.0).abs() < 1e-15 && s[2] == 0.0
        );
        let s = shrink_probabilities(&[1.2, -0.2]);
        assert!((s[0] - 1.0).abs() < 1e-15 && s[1] == 0.0);
    }

    #[test]
    fn overid_dof() {
        let sol = GelSolution {
            family: CarrierFamily::El,
            beta_hat: vec![0.0; 3],
            lambda_hat: vec![0.0; 4],
            pi: vec![],
            criterion: 0.001,
            n: 1000,
            dim_g: 4,
            dim_beta: 3,
            converged: true,
            gradient_norm: 0.0,
            iterations: IterationCounts::default(),
        };
        let t = overid_statistic(&sol);
        assert_eq!(t.dof, 1);
        assert!((t.stat - 2.0).abs() < 1e-12);
        assert!((t.p_value.unwrap() - 0.157_299_207_050_285_1).abs() < 1e-9);
    }
}
