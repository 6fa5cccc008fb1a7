//! Population density and distribution function of `u` in the simulation designs.
//!
//! In scenarios 2 and 3, `u = w / x` with `w` a normal mixture and `x` generalised
//! gamma, so `f_u(u) = int x f_NM(u x) f_x(x) dx`. Derivatives in `u` are taken
//! under the integral using the analytic derivatives of the normal components.

use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::quadrature::Quadrature;
use crate::simulation::scenario::{MixtureComponent, ScenarioConfig};
use crate::special::{hermite_e, norm_cdf, norm_pdf, normal_density_derivative};

/// `R(phi^{(m)}) = (2m)! / (2^{2m+1} m! sqrt(pi))`.
pub fn normal_derivative_roughness(m: usize) -> f64 {
    let f = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
    f(2 * m) / (2f64.powi(2 * m as i32 + 1) * f(m) * std::f64::consts::PI.sqrt())
}

/// Population law of `u` for a scenario.
#[derive(Debug, Clone)]
pub struct TrueLaw {
    scenario: u8,
    mixture: Vec<MixtureComponent>,
    scale: f64,
    nu: f64,
    a: f64,
    log_norm: f64,
    x_max: f64,
}

impl TrueLaw {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let (nu, a) = (cfg.nu, cfg.x_scale());
        // f_x(x) = 2 x^{nu-1} exp(-(x/a)^2) / (a^nu Gamma(nu/2))
        let log_norm = 2f64.ln() - nu * a.ln() - ln_gamma(nu / 2.0);
        // (x/a)^2 ~ Gamma(nu/2, 1); this cut leaves far less than 1e-12 of the mass
        let k = nu / 2.0;
        let g_max = k + 12.0 * k.sqrt() + 40.0;
        Ok(TrueLaw {
            scenario: cfg.scenario,
            mixture: cfg.mixture_components(),
            scale: cfg.u_scale(),
            nu,
            a,
            log_norm,
            x_max: a * g_max.sqrt(),
        })
    }

    /// Density of the scale variable `x`.
    pub fn x_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (self.log_norm + (self.nu - 1.0) * x.ln() - (x / self.a).powi(2)).exp()
    }

    fn x_breaks(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0]
            .iter()
            .map(|p| p * self.a * (self.nu / 2.0).sqrt())
            .collect();
        pts.retain(|p| *p < self.x_max);
        pts.push(self.x_max);
        pts
    }

    fn mixture_derivative(&self, w: f64, k: usize) -> f64 {
        self.mixture
            .iter()
            .map(|c| c.weight * normal_density_derivative(w, c.mean, c.sd, k))
            .sum()
    }

    fn mixture_cdf(&self, w: f64) -> f64 {
        self.mixture
            .iter()
            .map(|c| c.weight * norm_cdf((w - c.mean) / c.sd))
            .sum()
    }

    /// `k`-th derivative of the density of `u` at `u`.
    pub fn density_derivative(&self, u: f64, k: usize) -> Result<f64> {
        if self.scenario == 1 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            return Ok(sign * hermite_e(k, u) * norm_pdf(u));
        }
        let s = self.scale;
        let v = s * u;
        let q = Quadrature {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        let raw = q.integrate_pieces(
            |x| x.powi(k as i32 + 1) * self.mixture_derivative(v * x, k) * self.x_density(x),
            &self.x_breaks(),
        )?;
        Ok(s.powi(k as i32 + 1) * raw.value)
    }

    pub fn density(&self, u: f64) -> Result<f64> {
        self.density_derivative(u, 0)
    }

    pub fn cdf(&self, u: f64) -> Result<f64> {
        if self.scenario == 1 {
            return Ok(norm_cdf(u));
        }
        let v = self.scale * u;
        let q = Quadrature {
            abs_tol: 1e-14,
            rel_tol: 1e-13,
            max_intervals: 2000,
        };
        Ok(q.integrate_pieces(
            |x| self.mixture_cdf(v * x) * self.x_density(x),
            &self.x_breaks(),
        )?
        .value)
    }

    /// `R(f^{(k)}) = int (f^{(k)})^2 du`.
    pub fn roughness(&self, k: usize) -> Result<f64> {
        if self.scenario == 1 {
            return Ok(normal_derivative_roughness(k));
        }
        let pts: Vec<f64> = (-30..=30).map(|i| i as f64 * 1.5).collect();
        let q = Quadrature {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            max_intervals: 4000,
        };
        let mut failure = None;
        let r = q.integrate_pieces(
            |u| match self.density_derivative(u, k) {
                Ok(v) => v * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &pts,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(r.value)
    }
}

pub fn true_density(cfg: &ScenarioConfig, grid: &[f64]) -> Result<Vec<f64>> {
    let law = TrueLaw::new(cfg)?;
    grid.iter().map(|&u| law.density(u)).collect()
}

pub fn true_cdf(cfg: &ScenarioConfig, grid: &[f64]) -> Result<Vec<f64>> {
    let law = TrueLaw::new(cfg)?;
    grid.iter().map(|&u| law.cdf(u)).collect()
}

/// `R(f^{(k)})` of the population density of `u`.
pub fn roughness(cfg: &ScenarioConfig, k: usize) -> Result<f64> {
    TrueLaw::new(cfg)?.roughness(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn normal_roughness_constants() {
        assert!((normal_derivative_roughness(4) - 105.0 / (32.0 * PI.sqrt())).abs() < 1e-14);
        assert!((normal_derivative_roughness(3) - 15.0 / (16.0 * PI.sqrt())).abs() < 1e-14);
        assert!((normal_derivative_roughness(0) - 0.5 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scale_density_has_unit_mass_and_second_moment() {
        let law = TrueLaw::new(&ScenarioConfig {
            scenario: 2,
            ..Default::default()
        })
        .unwrap();
        let q = Quadrature::default();
        let pts = law.x_breaks();
        let m0 = q
            .integrate_pieces(|x| law.x_density(x), &pts)
            .unwrap()
            .value;
        let m2 = q
            .integrate_pieces(|x| x * x * law.x_density(x), &pts)
            .unwrap()
            .value;
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_integral_of_density() {
        let law = TrueLaw::new(&ScenarioConfig {
            scenario: 3,
            ..Default::default()
        })
        .unwrap();
        let q = Quadrature::with_tol(1e-11);
        let mass = q
            .integrate(|u| law.density(u).unwrap(), -1.0, 0.7)
            .unwrap()
            .value;
        assert!((mass - (law.cdf(0.7).unwrap() - law.cdf(-1.0).unwrap())).abs() < 1e-9);
    }
}
