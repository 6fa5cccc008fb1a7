#![allow(dead_code)]

use gelkde::nalgebra::{DMatrix, DVector};
use gelkde::{CarrierFamily, MomentModel, ResidualModel};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// `u = z - beta`, with `g = u` (one moment) or `g = (u, u^2 - 1)` (two moments).
#[derive(Debug, Clone, Copy)]
pub struct Location {
    pub dim_g: usize,
}

impl MomentModel for Location {
    type Obs = f64;

    fn dim_g(&self) -> usize {
        self.dim_g
    }
    fn dim_beta(&self) -> usize {
        1
    }
    fn moments(&self, z: &f64, beta: &DVector<f64>) -> DVector<f64> {
        let u = z - beta[0];
        if self.dim_g == 1 {
            DVector::from_vec(vec![u])
        } else {
            DVector::from_vec(vec![u, u * u - 1.0])
        }
    }
    fn jacobian(&self, z: &f64, beta: &DVector<f64>) -> DMatrix<f64> {
        let u = z - beta[0];
        if self.dim_g == 1 {
            DMatrix::from_element(1, 1, -1.0)
        } else {
            DMatrix::from_column_slice(2, 1, &[-1.0, -2.0 * u])
        }
    }
    fn initial_beta(&self, data: &[f64]) -> Option<DVector<f64>> {
        Some(DVector::from_element(
            1,
            data.iter().sum::<f64>() / data.len() as f64,
        ))
    }
}

impl ResidualModel for Location {
    fn residual(&self, z: &f64, beta: &DVector<f64>) -> f64 {
        z - beta[0]
    }
    fn residual_gradient(&self, _z: &f64, _beta: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, -1.0)
    }
    fn residual_hessian(&self, _z: &f64, _beta: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(1, 1)
    }
}

pub fn normal_draws(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Fixed skewed sample so that the over-identified location model has `lambda != 0`.
pub fn skewed_fixture(n: usize, seed: u64) -> Vec<f64> {
    normal_draws(seed, n)
        .into_iter()
        .map(|e: f64| e + 0.3 * (e * e - 1.0))
        .collect()
}

/// Carrier value by hand, independent of the library.
pub fn rho_by_hand(family: CarrierFamily, v: f64) -> f64 {
    match family {
        CarrierFamily::El => {
            if v < 1.0 {
                (1.0 - v).ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        CarrierFamily::Et => 1.0 - v.exp(),
        CarrierFamily::Cue => -v * v / 2.0 - v,
        CarrierFamily::CressieRead(g) => {
            let base = 1.0 + g * v;
            if base <= 0.0 {
                return f64::NEG_INFINITY;
            }
            -(base.powf((g + 1.0) / g) - 1.0) / (g + 1.0)
        }
    }
}

/// `n^{-1} sum rho(lambda' g_i)`, the inner criterion, by a plain loop.
pub fn inner_criterion_by_hand(gmat: &DMatrix<f64>, lambda: &[f64], family: CarrierFamily) -> f64 {
    let n = gmat.nrows();
    let mut s = 0.0;
    for i in 0..n {
        let v: f64 = (0..gmat.ncols()).map(|j| gmat[(i, j)] * lambda[j]).sum();
        s += rho_by_hand(family, v);
    }
    s / n as f64
}

/// Maximise a concave function on the plane by repeated grid refinement.
pub fn zoom_max_2d(f: impl Fn(f64, f64) -> f64, half_width: f64, levels: usize) -> (f64, f64, f64) {
    let (mut cx, mut cy, mut w) = (0.0, 0.0, half_width);
    let steps = 20;
    let mut best = f(cx, cy);
    for _ in 0..levels {
        let (mut bx, mut by) = (cx, cy);
        for i in 0..=steps {
            for j in 0..=steps {
                let x = cx - w + 2.0 * w * i as f64 / steps as f64;
                let y = cy - w + 2.0 * w * j as f64 / steps as f64;
                let v = f(x, y);
                if v > best {
                    best = v;
                    bx = x;
                    by = y;
                }
            }
        }
        cx = bx;
        cy = by;
        w *= 0.35;
    }
    (cx, cy, best)
}

/// Minimise a function of one variable by grid scan then golden-section search.
pub fn scan_golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let m = 400;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=m {
        let x = lo + (hi - lo) * i as f64 / m as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let step = (hi - lo) / m as f64;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn rel_l2(est: &[f64], truth: &[f64]) -> f64 {
    let num: f64 = est.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = truth.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Gauss-Hermite rule for `E[h(Z)]`, `Z ~ N(0, 1)`, by Golub-Welsch.
pub fn gauss_hermite(m: usize) -> Vec<(f64, f64)> {
    let jac = DMatrix::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = jac.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..m)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Standard normal density, written out here so oracles do not depend on the library.
pub fn phi(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
