//! Kernels of order `2r` and the integral functionals used by bandwidth and MISE formulas.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::special::{norm_cdf, norm_pdf};

pub type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Gaussian2,
    Gaussian4,
    Custom {
        pdf: KernelFn,
        cdf: Option<KernelFn>,
        derivatives: [Option<KernelFn>; 2],
    },
}

/// Integral functionals of a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFunctionals {
    /// `R(k) = int k^2`
    pub roughness: f64,
    /// `mu_j = int x^j k`, `j = 0..=6`
    pub mu: [f64; 7],
    /// `psi(k) = 2 int x K(x) k(x) dx`
    pub psi: f64,
}

#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    order: usize,
    shape: Shape,
    support: f64,
    pub functionals: KernelFunctionals,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("functionals", &self.functionals)
            .finish()
    }
}

/// Gaussian kernel (`r = 1`) or the fourth-order Gaussian-based kernel `(3 - x^2) phi(x) / 2` (`r = 2`).
pub fn gaussian_kernel(r: usize) -> Result<KernelSpec> {
    let sp = PI.sqrt();
    match r {
        1 => Ok(KernelSpec {
            name: "gaussian".into(),
            order: 2,
            shape: Shape::Gaussian2,
            support: 20.0,
            functionals: KernelFunctionals {
                roughness: 1.0 / (2.0 * sp),
                mu: [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0],
                psi: 1.0 / sp,
            },
        }),
        2 => Ok(KernelSpec {
            name: "gaussian4".into(),
            order: 4,
            shape: Shape::Gaussian4,
            support: 20.0,
            functionals: KernelFunctionals {
                roughness: 27.0 / (32.0 * sp),
                mu: [1.0, 0.0, 0.0, 0.0, -3.0, 0.0, -30.0],
                psi: 7.0 / (16.0 * sp),
            },
        }),
        _ => Err(Error::Unsupported(format!(
            "built-in Gaussian kernel of order {}",
            2 * r
        ))),
    }
}

impl KernelSpec {
    /// A user kernel; functionals come from quadrature over `[-support, support]`.
    ///
    /// Missing `cdf` is obtained by quadrature of `pdf` at every call, and missing
    /// derivatives by central differences, so supply them when speed matters.
    pub fn custom(
        name: impl Into<String>,
        order: usize,
        support: f64,
        pdf: KernelFn,
        cdf: Option<KernelFn>,
        derivatives: [Option<KernelFn>; 2],
    ) -> Result<Self> {
        if order < 2 || order % 2 == 1 {
            return Err(Error::invalid(format!(
                "kernel order must be even and >= 2, got {order}"
            )));
        }
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::invalid("kernel support must be positive and finite"));
        }
        let functionals = match &cdf {
            Some(c) => {
                let (p, c) = (pdf.clone(), c.clone());
                functionals_with_cdf(&|x| p(x), &|x| c(x), support)?
            }
            None => {
                let p = pdf.clone();
                kernel_functionals(&|x| p(x), support)?
            }
        };
        Ok(KernelSpec {
            name: name.into(),
            order,
            shape: Shape::Custom {
                pdf,
                cdf,
                derivatives,
            },
            support,
            functionals,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The order `2r`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn r(&self) -> usize {
        self.order / 2
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn roughness(&self) -> f64 {
        self.functionals.roughness
    }

    pub fn psi(&self) -> f64 {
        self.functionals.psi
    }

    /// `mu_j(k)`; available for `j <= 6`.
    pub fn mu(&self, j: usize) -> f64 {
        self.functionals.mu[j]
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        self.eval(x, 0)
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.shape {
            Shape::Gaussian2 => norm_cdf(x),
            Shape::Gaussian4 => norm_cdf(x) + 0.5 * x * norm_pdf(x),
            Shape::Custom { cdf: Some(c), .. } => c(x),
            Shape::Custom { pdf, cdf: None, .. } => {
                let lo = -self.support;
                if x <= lo {
                    return 0.0;
                }
                let hi = x.min(self.support);
                let p = pdf.clone();
                Quadrature::with_tol(1e-12)
                    .integrate(|t| p(t), lo, hi)
                    .map(|e| e.value)
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// `d`-th derivative of `k` at `x`, `d <= 2`.
    #[inline]
    pub fn eval(&self, x: f64, d: usize) -> f64 {
        match &self.shape {
            Shape::Gaussian2 => {
                let p = norm_pdf(x);
                match d {
                    0 => p,
                    1 => -x * p,
                    _ => (x * x - 1.0) * p,
                }
            }
            Shape::Gaussian4 => {
                let p = norm_pdf(x);
                let x2 = x * x;
                match d {
                    0 => 0.5 * (3.0 - x2) * p,
                    1 => 0.5 * x * (x2 - 5.0) * p,
                    _ => 0.5 * (-x2 * x2 + 8.0 * x2 - 5.0) * p,
                }
            }
            Shape::Custom {
                pdf, derivatives, ..
            } => match d {
                0 => pdf(x),
                1 | 2 => match &derivatives[d - 1] {
                    Some(f) => f(x),
                    None => {
                        let h = 1e-4;
                        if d == 1 {
                            (pdf(x + h) - pdf(x - h)) / (2.0 * h)
                        } else {
                            (pdf(x + h) - 2.0 * pdf(x) + pdf(x - h)) / (h * h)
                        }
                    }
                },
                _ => f64::NAN,
            },
        }
    }

    /// `d`-th derivative of the scaled kernel `k_b(x) = k(x / b) / b`.
    #[inline]
    pub fn scaled(&self, x: f64, b: f64, d: usize) -> f64 {
        self.eval(x / b, d) / b.powi(d as i32 + 1)
    }
}

/// `R(k)`, `mu_0..mu_6` and `psi(k)` by adaptive quadrature on `[-support, support]`.
///
/// `K` inside `psi` is itself obtained by quadrature of `k` from the left end.
pub fn kernel_functionals(k: &dyn Fn(f64) -> f64, support: f64) -> Result<KernelFunctionals> {
    let inner = Quadrature {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        max_intervals: 500,
    };
    let cdf = |x: f64| {
        inner
            .integrate(k, -support, x)
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
    };
    let f = functionals_with_cdf(k, &cdf, support)?;
    if !f.psi.is_finite() {
        return Err(Error::Quadrature { residual: f64::NAN });
    }
    Ok(f)
}

fn functionals_with_cdf(
    k: &dyn Fn(f64) -> f64,
    cdf: &dyn Fn(f64) -> f64,
    support: f64,
) -> Result<KernelFunctionals> {
    let q = Quadrature {
        abs_tol: 1e-10,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    // a few panels so the adaptive scheme sees the bulk of the mass
    let pts: Vec<f64> = (0..=8)
        .map(|i| -support + i as f64 * support / 4.0)
        .collect();
    let roughness = q.integrate_pieces(|x| k(x) * k(x), &pts)?.value;
    let mut mu = [0.0; 7];
    for (j, m) in mu.iter_mut().enumerate() {
        *m = q.integrate_pieces(|x| x.powi(j as i32) * k(x), &pts)?.value;
    }
    let psi = 2.0 * q.integrate_pieces(|x| x * cdf(x) * k(x), &pts)?.value;
    Ok(KernelFunctionals { roughness, mu, psi })
}

/// `psi(k)` through `int K (1 - K)`, valid for symmetric second-order kernels.
pub fn psi_via_cdf_product(kernel: &KernelSpec) -> Result<f64> {
    let s = kernel.support();
    let pts: Vec<f64> = (0..=8).map(|i| -s + i as f64 * s / 4.0).collect();
    Ok(Quadrature::default()
        .integrate_pieces(
            |x| {
                let c = kernel.cdf(x);
                c * (1.0 - c)
            },
            &pts,
        )?
        .value)
}
