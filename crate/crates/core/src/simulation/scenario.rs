//! Simulation designs and their data generating processes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::carrier::CarrierFamily;
use crate::density::uniform_grid;
use crate::error::{Error, Result};
use crate::simulation::ihs::{ihs, Obs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

impl MixtureComponent {
    pub const fn new(weight: f64, mean: f64, sd: f64) -> Self {
        MixtureComponent { weight, mean, sd }
    }
}

/// Skewed unimodal mixture used by scenario 2.
pub fn skewed_unimodal() -> Vec<MixtureComponent> {
    vec![
        MixtureComponent::new(0.2, -0.75, 1.0),
        MixtureComponent::new(0.2, -0.25, 2.0 / 3.0),
        MixtureComponent::new(0.6, 1.0 / 3.0, 5.0 / 9.0),
    ]
}

/// Skewed bimodal mixture used by scenario 3.
pub fn skewed_bimodal() -> Vec<MixtureComponent> {
    vec![
        MixtureComponent::new(0.75, -1.0 / 3.0, 1.0),
        MixtureComponent::new(0.25, 1.0, 1.0 / 3.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: -5.0,
            hi: 5.0,
            points: 1000,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Vec<f64> {
        uniform_grid(self.lo, self.hi, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: u8,
    pub n: usize,
    pub d_g: usize,
    pub family: CarrierFamily,
    pub replications: usize,
    pub master_seed: u64,
    /// `(delta, gamma, theta)`
    pub beta0: [f64; 3],
    pub grid: GridSpec,
    /// Kernel order is `2r`.
    pub kernel_r: usize,
    /// Degrees of freedom of the scale variable in scenarios 2 and 3.
    pub nu: f64,
    /// Mixture for `w`; `None` selects the scenario default.
    pub mixture: Option<Vec<MixtureComponent>>,
    /// Rescale `u` to unit variance in scenarios 2 and 3.
    pub standardize: bool,
    /// Weight the density estimates with shrunk (nonnegative) implied probabilities.
    pub shrink_weights: bool,
    /// Also compute the bias-corrected weighted estimates.
    pub bias_correction: bool,
    /// Pilot bandwidth for the bias curves as a multiple of the density bandwidth.
    pub pilot_factor: f64,
    /// Also fit the just-identified `d_g = 3` model on the same samples.
    pub compare_dg3: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: 1,
            n: 100,
            d_g: 4,
            family: CarrierFamily::El,
            replications: 2000,
            master_seed: 20_240_901,
            beta0: [1.0, 2.0, 0.08],
            grid: GridSpec::default(),
            kernel_r: 2,
            nu: 8.0,
            mixture: None,
            standardize: true,
            shrink_weights: true,
            bias_correction: true,
            pilot_factor: 2.0,
            compare_dg3: true,
        }
    }
}

impl ScenarioConfig {
    /// Mixture in effect (explicit or scenario default); empty for scenario 1.
    pub fn mixture_components(&self) -> Vec<MixtureComponent> {
        match (&self.mixture, self.scenario) {
            (Some(m), _) => m.clone(),
            (None, 2) => skewed_unimodal(),
            (None, 3) => skewed_bimodal(),
            _ => Vec::new(),
        }
    }

    /// Check every field, reporting all offending ones at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(1..=3).contains(&self.scenario) {
            bad.push(format!(
                "scenario: must be 1, 2 or 3 (got {})",
                self.scenario
            ));
        }
        if self.n < 10 {
            bad.push(format!("n: must be at least 10 (got {})", self.n));
        }
        if self.d_g < 3 {
            bad.push(format!("d_g: must be at least 3 (got {})", self.d_g));
        } else if self.n <= self.d_g {
            bad.push("n: must exceed d_g".to_string());
        }
        if self.replications == 0 {
            bad.push("replications: must be positive".to_string());
        }
        if self.beta0.iter().any(|b| !b.is_finite()) {
            bad.push("beta0: must be finite".to_string());
        }
        if !(self.grid.points >= 2
            && self.grid.hi > self.grid.lo
            && self.grid.lo.is_finite()
            && self.grid.hi.is_finite())
        {
            bad.push("grid: need points >= 2 and finite lo < hi".to_string());
        }
        if !(1..=2).contains(&self.kernel_r) {
            bad.push(format!(
                "kernel_r: built-in kernels have r = 1 or 2 (got {})",
                self.kernel_r
            ));
        }
        if !(self.pilot_factor > 0.0) {
            bad.push("pilot_factor: must be positive".to_string());
        }
        if let CarrierFamily::CressieRead(g) = self.family {
            if !g.is_finite() {
                bad.push("family: Cressie-Read exponent must be finite".to_string());
            }
        }
        if self.scenario != 1 {
            if !(self.nu > 4.0) {
                bad.push(format!("nu: must exceed 4 (got {})", self.nu));
            }
            let m = self.mixture_components();
            if m.is_empty() {
                bad.push("mixture: needs at least one component".to_string());
            }
            let wsum: f64 = m.iter().map(|c| c.weight).sum();
            let mean: f64 = m.iter().map(|c| c.weight * c.mean).sum();
            if (wsum - 1.0).abs() > 1e-10 {
                bad.push(format!("mixture: weights sum to {wsum}, expected 1"));
            }
            if mean.abs() > 1e-10 {
                bad.push(format!("mixture: mean is {mean}, expected 0"));
            }
            if m.iter().any(|c| !(c.sd > 0.0) || !(c.weight >= 0.0)) {
                bad.push("mixture: need positive sd and nonnegative weights".to_string());
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid scenario config: {}",
                bad.join("; ")
            )))
        }
    }

    /// `a = sqrt(2 / nu)`, the scale of the generalised gamma variable `x`.
    pub fn x_scale(&self) -> f64 {
        (2.0 / self.nu).sqrt()
    }

    /// Standard deviation of `w / x` before any standardisation (1 in scenario 1).
    pub fn raw_u_sd(&self) -> f64 {
        if self.scenario == 1 {
            return 1.0;
        }
        let ew2: f64 = self
            .mixture_components()
            .iter()
            .map(|c| c.weight * (c.sd * c.sd + c.mean * c.mean))
            .sum();
        (ew2 * self.nu / (self.nu - 2.0)).sqrt()
    }

    /// Divisor applied to `w / x`.
    pub fn u_scale(&self) -> f64 {
        if self.scenario != 1 && self.standardize {
            self.raw_u_sd()
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSample {
    pub data: Vec<Obs>,
    /// The true errors used to generate `y`.
    pub u: Vec<f64>,
}

/// Independent stream for replication `rep_index` of the master seed.
pub fn replication_rng(master_seed: u64, rep_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(rep_index);
    rng
}

/// Draw one sample of size `cfg.n`.
pub fn sample_scenario(cfg: &ScenarioConfig, rep_index: u64) -> Result<ScenarioSample> {
    cfg.validate()?;
    let mut rng = replication_rng(cfg.master_seed, rep_index);
    let [delta, gamma, theta] = cfg.beta0;
    let mut data = Vec::with_capacity(cfg.n);
    let mut us = Vec::with_capacity(cfg.n);
    let mix = cfg.mixture_components();
    let gamma_dist = Gamma::new(cfg.nu / 2.0, 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    let (a, scale) = (cfg.x_scale(), cfg.u_scale());
    for _ in 0..cfg.n {
        let (x, u) = if cfg.scenario == 1 {
            let x: f64 = StandardNormal.sample(&mut rng);
            let u: f64 = StandardNormal.sample(&mut rng);
            (x, u)
        } else {
            let x = a * gamma_dist.sample(&mut rng).sqrt();
            let pick: f64 = rng.random();
            let mut acc = 0.0;
            let mut comp = mix[mix.len() - 1];
            for c in &mix {
                acc += c.weight;
                if pick < acc {
                    comp = *c;
                    break;
                }
            }
            let e: f64 = StandardNormal.sample(&mut rng);
            let w = comp.mean + comp.sd * e;
            (x, w / (x * scale))
        };
        let y = ihs(theta, delta + gamma * x + u);
        data.push(Obs { y, x });
        us.push(u);
    }
    Ok(ScenarioSample { data, u: us })
}
