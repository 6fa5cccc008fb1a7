//! Monte Carlo accounting of integrated squared bias, integrated variance and MISE.
//!
//! Replications are computed in parallel in fixed-size chunks and folded into the
//! accumulators strictly in replication order, so the report does not depend on
//! the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::asymptotics::asymptotic_components;
use crate::bias::{bias_corrected_cdf, bias_corrected_pdf, bias_curves, BiasCurves};
use crate::density::{
    amise_bandwidth_cdf, amise_bandwidth_pdf, kernel_cdf_sums, kernel_sums, CurveEstimate,
    CurveKind,
};
use crate::error::{Error, Result};
use crate::gel::{gel_at_beta, gel_fit, overid_statistic, GelOptions, GelSolution, InnerOptions};
use crate::kernels::{gaussian_kernel, KernelSpec};
use crate::model::residuals;
use crate::quadrature::trapezoid;
use crate::simulation::ihs::IhsModel;
use crate::simulation::scenario::{sample_scenario, ScenarioConfig};
use crate::simulation::truth::TrueLaw;
use crate::simulation::ttest::{paired_ise_ttest, PairedTTest};

use nalgebra::DVector;

const CHUNK: usize = 32;

/// Reports with more failed replications than this fraction are flagged invalid.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// The estimators tracked by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Uniform weights on the true errors.
    Tilde,
    /// Implied probabilities at the true `beta`, on the true errors.
    TildeRho,
    /// Uniform weights on the fitted residuals.
    Hat,
    /// Implied probabilities on the fitted residuals.
    HatRho,
    /// `HatRho` minus the estimated order `1/n` bias, then positive-part normalised
    /// (density) or rearranged (distribution function). The other estimators are raw.
    HatRhoCorrected,
    /// Uniform weights on the residuals of the just-identified fit.
    HatJustIdentified,
}

impl Estimator {
    pub fn id(self, kind: CurveKind) -> &'static str {
        use Estimator::*;
        match (kind, self) {
            (CurveKind::Pdf, Tilde) => "f_tilde",
            (CurveKind::Pdf, TildeRho) => "f_tilde_rho",
            (CurveKind::Pdf, Hat) => "f_hat",
            (CurveKind::Pdf, HatRho) => "f_hat_rho",
            (CurveKind::Pdf, HatRhoCorrected) => "f_hat_rho_bc",
            (CurveKind::Pdf, HatJustIdentified) => "f_hat_dg3",
            (CurveKind::Cdf, Tilde) => "F_tilde",
            (CurveKind::Cdf, TildeRho) => "F_tilde_rho",
            (CurveKind::Cdf, Hat) => "F_hat",
            (CurveKind::Cdf, HatRho) => "F_hat_rho",
            (CurveKind::Cdf, HatRhoCorrected) => "F_hat_rho_bc",
            (CurveKind::Cdf, HatJustIdentified) => "F_hat_dg3",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    /// Feasible GEL fit failed or did not converge.
    pub fit: usize,
    /// Inner problem at the true `beta` failed.
    pub known_beta: usize,
    pub just_identified: usize,
    /// Plug-in matrices or bias curves could not be formed.
    pub bias: usize,
}

/// Replications kept, but with a degraded estimator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallbackCounts {
    /// The plug-in matrices were singular (typically `theta_hat = 0`, where the Jacobian
    /// loses rank), so the corrected estimate equals the uncorrected weighted one.
    pub bias_uncorrected: usize,
}

impl FailureCounts {
    pub fn total(&self) -> usize {
        self.fit + self.known_beta + self.just_identified + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub id: String,
    pub estimator: Estimator,
    pub kind: CurveKind,
    pub isb: f64,
    pub ivar: f64,
    pub mise: f64,
    /// Average of the per-replication integrated squared errors.
    pub mean_ise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub kind: CurveKind,
    pub numerator: String,
    pub denominator: String,
    pub isb_ratio: f64,
    pub ivar_ratio: f64,
    pub mise_ratio: f64,
    /// Paired test on the ISE sequences; `None` with fewer than two replications.
    pub ttest: Option<PairedTTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCurve {
    pub id: String,
    pub mean: Vec<f64>,
    /// Population variance across replications.
    pub variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: ScenarioConfig,
    /// False when more than 5% of the replications failed.
    pub valid: bool,
    pub replications_requested: usize,
    pub replications_used: usize,
    pub failures: FailureCounts,
    pub fallbacks: FallbackCounts,
    pub bandwidth_pdf: f64,
    pub bandwidth_cdf: f64,
    pub pilot_bandwidth: f64,
    /// True probability mass of `u` outside the evaluation grid.
    pub truncated_mass: f64,
    pub estimators: Vec<EstimatorSummary>,
    pub comparisons: Vec<Comparison>,
    pub grid: Vec<f64>,
    pub truth_pdf: Vec<f64>,
    pub truth_cdf: Vec<f64>,
    pub curves: Vec<PointwiseCurve>,
}

impl McReport {
    pub fn summary(&self, id: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.id == id)
    }

    pub fn comparison(&self, numerator: &str, denominator: &str) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.numerator == numerator && c.denominator == denominator)
    }

    /// Plain-text table: absolute baselines (x 1e5) and relative ISB / IVar / MISE rows.
    /// A dagger marks a paired-t p-value in [0.01, 0.05), a double dagger p < 0.01.
    pub fn render_table(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        s.push_str(&format!(
            "scenario {}  n = {}  d_g = {}  family = {}  replications = {} used / {} requested{}\n",
            c.scenario,
            c.n,
            c.d_g,
            c.family,
            self.replications_used,
            self.replications_requested,
            if self.valid {
                ""
            } else {
                "  [INVALID: too many failed replications]"
            }
        ));
        s.push_str(&format!(
            "bandwidths: pdf {:.6}  cdf {:.6}  pilot {:.6}   mass outside grid {:.3e}\n",
            self.bandwidth_pdf, self.bandwidth_cdf, self.pilot_bandwidth, self.truncated_mass
        ));
        s.push_str(&format!(
            "failures: fit {}  known-beta {}  d_g=3 {}  bias {}   uncorrected (singular plug-in) {}\n\n",
            self.failures.fit, self.failures.known_beta, self.failures.just_identified, self.failures.bias, self.fallbacks.bias_uncorrected
        ));
        s.push_str("absolute (x 1e5)\n");
        s.push_str(&format!(
            "{:<16}{:>12}{:>12}{:>12}\n",
            "estimator", "ISB", "IVar", "MISE"
        ));
        for e in &self.estimators {
            s.push_str(&format!(
                "{:<16}{:>12.4}{:>12.4}{:>12.4}\n",
                e.id,
                e.isb * 1e5,
                e.ivar * 1e5,
                e.mise * 1e5
            ));
        }
        s.push_str(
            "\nrelative (numerator / denominator); marker on MISE from the paired ISE t-test\n",
        );
        s.push_str(&format!(
            "{:<30}{:>10}{:>10}{:>12}\n",
            "comparison", "ISB", "IVar", "MISE"
        ));
        for cmp in &self.comparisons {
            let marker = cmp.ttest.map(|t| t.significance().marker()).unwrap_or("");
            let label = format!("{} vs {}", cmp.numerator, cmp.denominator);
            s.push_str(&format!(
                "{:<30}{:>10.3}{:>10.3}{:>11.3}{}\n",
                label,
                cmp.isb_ratio,
                cmp.ivar_ratio,
                cmp.mise_ratio,
                if marker.is_empty() { " " } else { marker }
            ));
        }
        s
    }
}

/// Pointwise running mean and sum of squared deviations.
#[derive(Debug, Clone)]
struct Welford {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(m: usize) -> Self {
        Welford {
            count: 0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / k;
            *s += d * (v - *m);
        }
    }

    fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![f64::NAN; self.mean.len()];
        }
        self.m2.iter().map(|s| s / self.count as f64).collect()
    }
}

struct Track {
    estimator: Estimator,
    kind: CurveKind,
    acc: Welford,
    ise: Vec<f64>,
}

/// Curves of one successful replication, in the order of `tracked`.
type RepCurves = Vec<Vec<f64>>;

enum RepOutcome {
    /// Curves and whether the bias correction fell back to the uncorrected estimate.
    Ok(RepCurves, bool),
    Failed(FailureKind),
}

enum FailureKind {
    Fit,
    KnownBeta,
    JustIdentified,
    Bias,
}

struct Setup {
    kernel: KernelSpec,
    grid: Vec<f64>,
    b_pdf: f64,
    b_cdf: f64,
    pilot: f64,
    model: IhsModel,
    model3: Option<IhsModel>,
    tracked: Vec<Estimator>,
}

fn tracked_estimators(cfg: &ScenarioConfig) -> Vec<Estimator> {
    let mut v = vec![
        Estimator::Tilde,
        Estimator::TildeRho,
        Estimator::Hat,
        Estimator::HatRho,
    ];
    if cfg.bias_correction {
        v.push(Estimator::HatRhoCorrected);
    }
    if cfg.compare_dg3 && cfg.d_g > 3 {
        v.push(Estimator::HatJustIdentified);
    }
    v
}

fn weights(sol: &GelSolution, shrink: bool) -> Vec<f64> {
    if shrink {
        sol.shrunk_pi()
    } else {
        sol.pi.clone()
    }
}

fn one_replication(cfg: &ScenarioConfig, setup: &Setup, rep: usize) -> Result<RepOutcome> {
    let sample = sample_scenario(cfg, rep as u64)?;
    let n = cfg.n;
    let uniform = vec![1.0 / n as f64; n];
    let beta0 = DVector::from_column_slice(&cfg.beta0);
    let (grid, kernel) = (&setup.grid, &setup.kernel);

    let known = match gel_at_beta(
        &setup.model,
        &sample.data,
        &beta0,
        cfg.family,
        &InnerOptions::default(),
    ) {
        Ok(s) => s,
        Err(e) if e.is_numerical() => return Ok(RepOutcome::Failed(FailureKind::KnownBeta)),
        Err(e) => return Err(e),
    };
    let fit = match gel_fit(
        &setup.model,
        &sample.data,
        cfg.family,
        &GelOptions::default(),
    ) {
        Ok(s) if s.converged => s,
        Ok(_) => return Ok(RepOutcome::Failed(FailureKind::Fit)),
        Err(e) if e.is_numerical() => return Ok(RepOutcome::Failed(FailureKind::Fit)),
        Err(e) => return Err(e),
    };
    let u_hat = residuals(&setup.model, &sample.data, &fit.beta());
    let pi_known = weights(&known, cfg.shrink_weights);
    let pi_hat = weights(&fit, cfg.shrink_weights);

    let mut pdf_t = kernel_sums(
        &sample.u,
        &[&uniform, &pi_known],
        kernel,
        setup.b_pdf,
        grid,
        0,
    );
    let mut cdf_t = kernel_cdf_sums(&sample.u, &[&uniform, &pi_known], kernel, setup.b_cdf, grid);
    let mut pdf_h = kernel_sums(&u_hat, &[&uniform, &pi_hat], kernel, setup.b_pdf, grid, 0);
    let mut cdf_h = kernel_cdf_sums(&u_hat, &[&uniform, &pi_hat], kernel, setup.b_cdf, grid);

    let mut fallback = false;
    let mut out_pdf = Vec::with_capacity(setup.tracked.len());
    let mut out_cdf = Vec::with_capacity(setup.tracked.len());
    for est in &setup.tracked {
        let (p, c) = match est {
            Estimator::Tilde => (std::mem::take(&mut pdf_t[0]), std::mem::take(&mut cdf_t[0])),
            Estimator::TildeRho => (std::mem::take(&mut pdf_t[1]), std::mem::take(&mut cdf_t[1])),
            Estimator::Hat => (std::mem::take(&mut pdf_h[0]), std::mem::take(&mut cdf_h[0])),
            Estimator::HatRho => (pdf_h[1].clone(), cdf_h[1].clone()),
            Estimator::HatRhoCorrected => {
                let curves =
                    asymptotic_components(&fit, &setup.model, &sample.data).and_then(|m| {
                        bias_curves(
                            &fit,
                            &m,
                            &setup.model,
                            &sample.data,
                            kernel,
                            setup.pilot,
                            grid,
                            &pdf_h[1],
                        )
                    });
                let curves = match curves {
                    Ok(c) => c,
                    Err(Error::IllConditioned { .. }) => {
                        fallback = true;
                        BiasCurves::zeros(grid.clone())
                    }
                    Err(e) if e.is_numerical() => return Ok(RepOutcome::Failed(FailureKind::Bias)),
                    Err(e) => return Err(e),
                };
                let pdf = CurveEstimate {
                    grid: grid.clone(),
                    values: pdf_h[1].clone(),
                    bandwidth: setup.b_pdf,
                    kind: CurveKind::Pdf,
                    corrections: Default::default(),
                };
                let cdf = CurveEstimate {
                    values: cdf_h[1].clone(),
                    bandwidth: setup.b_cdf,
                    kind: CurveKind::Cdf,
                    ..pdf.clone()
                };
                let corrected = bias_corrected_pdf(&pdf, &curves, n)
                    .and_then(|p| Ok((p, bias_corrected_cdf(&cdf, &curves, n)?)));
                let (p, c) = match corrected {
                    Ok((p, c)) => (p.values, c.values),
                    Err(Error::Support { .. }) => return Ok(RepOutcome::Failed(FailureKind::Bias)),
                    Err(e) => return Err(e),
                };
                (p, c)
            }
            Estimator::HatJustIdentified => {
                let m3 = setup
                    .model3
                    .as_ref()
                    .expect("just-identified model configured");
                let fit3 = match gel_fit(m3, &sample.data, cfg.family, &GelOptions::default()) {
                    Ok(s) if s.converged => s,
                    Ok(_) => return Ok(RepOutcome::Failed(FailureKind::JustIdentified)),
                    Err(e) if e.is_numerical() => {
                        return Ok(RepOutcome::Failed(FailureKind::JustIdentified))
                    }
                    Err(e) => return Err(e),
                };
                let u3 = residuals(m3, &sample.data, &fit3.beta());
                let p = kernel_sums(&u3, &[&uniform], kernel, setup.b_pdf, grid, 0)
                    .pop()
                    .unwrap();
                let c = kernel_cdf_sums(&u3, &[&uniform], kernel, setup.b_cdf, grid)
                    .pop()
                    .unwrap();
                (p, c)
            }
        };
        out_pdf.push(p);
        out_cdf.push(c);
    }
    out_pdf.extend(out_cdf);
    Ok(RepOutcome::Ok(out_pdf, fallback))
}

fn prepare(cfg: &ScenarioConfig) -> Result<(Setup, TrueLaw)> {
    cfg.validate()?;
    let kernel = gaussian_kernel(cfg.kernel_r)?;
    let law = TrueLaw::new(cfg)?;
    let r = cfg.kernel_r;
    let b_pdf = amise_bandwidth_pdf(&kernel, law.roughness(2 * r)?, cfg.n)?;
    let b_cdf = amise_bandwidth_cdf(&kernel, law.roughness(2 * r - 1)?, cfg.n)?;
    let model = IhsModel::new(cfg.d_g)?;
    let model3 = (cfg.compare_dg3 && cfg.d_g > 3)
        .then(|| IhsModel::new(3))
        .transpose()?;
    let setup = Setup {
        kernel,
        grid: cfg.grid.build(),
        b_pdf,
        b_cdf,
        pilot: cfg.pilot_factor * b_pdf,
        model,
        model3,
        tracked: tracked_estimators(cfg),
    };
    Ok((setup, law))
}

/// Run the Monte Carlo experiment on the current rayon pool.
pub fn run_mc(cfg: &ScenarioConfig) -> Result<McReport> {
    let (setup, law) = prepare(cfg)?;
    let grid = &setup.grid;
    let m = grid.len();
    let truth_pdf: Vec<f64> = grid
        .iter()
        .map(|&u| law.density(u))
        .collect::<Result<_>>()?;
    let truth_cdf: Vec<f64> = grid.iter().map(|&u| law.cdf(u)).collect::<Result<_>>()?;
    let truncated_mass = 1.0 - (law.cdf(grid[m - 1])? - law.cdf(grid[0])?);

    let mut tracks: Vec<Track> = [CurveKind::Pdf, CurveKind::Cdf]
        .iter()
        .flat_map(|&kind| {
            setup
                .tracked
                .iter()
                .map(move |&estimator| (estimator, kind))
        })
        .map(|(estimator, kind)| Track {
            estimator,
            kind,
            acc: Welford::new(m),
            ise: Vec::new(),
        })
        .collect();
    let mut failures = FailureCounts::default();
    let mut fallbacks = FallbackCounts::default();

    let reps: Vec<usize> = (0..cfg.replications).collect();
    for chunk in reps.chunks(CHUNK) {
        let outcomes: Vec<Result<RepOutcome>> = chunk
            .par_iter()
            .map(|&rep| one_replication(cfg, &setup, rep))
            .collect();
        for outcome in outcomes {
            match outcome? {
                RepOutcome::Failed(kind) => match kind {
                    FailureKind::Fit => failures.fit += 1,
                    FailureKind::KnownBeta => failures.known_beta += 1,
                    FailureKind::JustIdentified => failures.just_identified += 1,
                    FailureKind::Bias => failures.bias += 1,
                },
                RepOutcome::Ok(curves, fallback) => {
                    fallbacks.bias_uncorrected += fallback as usize;
                    for (track, curve) in tracks.iter_mut().zip(&curves) {
                        let truth = if track.kind == CurveKind::Pdf {
                            &truth_pdf
                        } else {
                            &truth_cdf
                        };
                        let err: Vec<f64> = curve
                            .iter()
                            .zip(truth)
                            .map(|(a, b)| (a - b) * (a - b))
                            .collect();
                        track.ise.push(trapezoid(grid, &err));
                        track.acc.push(curve);
                    }
                }
            }
        }
    }

    let used = cfg.replications - failures.total();
    if used == 0 {
        return Err(Error::NonConvergence {
            stage: "monte carlo",
            iterations: cfg.replications,
            residual: f64::NAN,
            best: Vec::new(),
        });
    }
    let valid = (failures.total() as f64) <= MAX_FAILURE_RATE * cfg.replications as f64;

    let mut estimators = Vec::new();
    let mut curves = Vec::new();
    for t in &tracks {
        let truth = if t.kind == CurveKind::Pdf {
            &truth_pdf
        } else {
            &truth_cdf
        };
        let var = t.acc.variance();
        let sq_bias: Vec<f64> = t
            .acc
            .mean
            .iter()
            .zip(truth)
            .map(|(a, b)| (a - b) * (a - b))
            .collect();
        let total: Vec<f64> = sq_bias.iter().zip(&var).map(|(a, b)| a + b).collect();
        let id = t.estimator.id(t.kind).to_string();
        estimators.push(EstimatorSummary {
            id: id.clone(),
            estimator: t.estimator,
            kind: t.kind,
            isb: trapezoid(grid, &sq_bias),
            ivar: trapezoid(grid, &var),
            mise: trapezoid(grid, &total),
            mean_ise: t.ise.iter().sum::<f64>() / t.ise.len() as f64,
        });
        curves.push(PointwiseCurve {
            id,
            mean: t.acc.mean.clone(),
            variance: var,
        });
    }

    let mut comparisons = Vec::new();
    let pairs: &[(Estimator, Estimator)] = &[
        (Estimator::TildeRho, Estimator::Tilde),
        (Estimator::Hat, Estimator::Tilde),
        (Estimator::HatRho, Estimator::Tilde),
        (Estimator::HatRho, Estimator::Hat),
        (Estimator::HatRhoCorrected, Estimator::Tilde),
        (Estimator::HatRhoCorrected, Estimator::HatRho),
        (Estimator::HatJustIdentified, Estimator::Tilde),
        (Estimator::HatRho, Estimator::HatJustIdentified),
    ];
    for kind in [CurveKind::Pdf, CurveKind::Cdf] {
        for &(num, den) in pairs {
            let find = |e: Estimator| {
                tracks
                    .iter()
                    .position(|t| t.estimator == e && t.kind == kind)
            };
            let (Some(a), Some(b)) = (find(num), find(den)) else {
                continue;
            };
            let (sa, sb) = (&estimators[a], &estimators[b]);
            let ttest = if used >= 2 {
                Some(paired_ise_ttest(&tracks[a].ise, &tracks[b].ise)?)
            } else {
                None
            };
            comparisons.push(Comparison {
                kind,
                numerator: sa.id.clone(),
                denominator: sb.id.clone(),
                isb_ratio: sa.isb / sb.isb,
                ivar_ratio: sa.ivar / sb.ivar,
                mise_ratio: sa.mise / sb.mise,
                ttest,
            });
        }
    }

    Ok(McReport {
        config: cfg.clone(),
        valid,
        replications_requested: cfg.replications,
        replications_used: used,
        failures,
        fallbacks,
        bandwidth_pdf: setup.b_pdf,
        bandwidth_cdf: setup.b_cdf,
        pilot_bandwidth: setup.pilot,
        truncated_mass,
        estimators,
        comparisons,
        grid: setup.grid.clone(),
        truth_pdf,
        truth_cdf,
        curves,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverIdCalibration {
    pub replications_used: usize,
    pub failures: usize,
    pub dof: usize,
    pub critical_value: f64,
    pub rejection_rate: f64,
    pub statistics: Vec<f64>,
}

/// Rejection frequency of the over-identification test at the 5% chi-square critical value.
pub fn run_overid_calibration(cfg: &ScenarioConfig) -> Result<OverIdCalibration> {
    cfg.validate()?;
    let model = IhsModel::new(cfg.d_g)?;
    let dof = cfg.d_g - 3;
    if dof == 0 {
        return Err(Error::invalid("calibration needs an over-identified model"));
    }
    let critical_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::invalid(e.to_string()))?
        .inverse_cdf(0.95);
    let reps: Vec<usize> = (0..cfg.replications).collect();
    let mut statistics = Vec::with_capacity(cfg.replications);
    let mut failures = 0;
    for chunk in reps.chunks(CHUNK) {
        let outcomes: Vec<Result<Option<f64>>> = chunk
            .par_iter()
            .map(|&rep| {
                let sample = sample_scenario(cfg, rep as u64)?;
                match gel_fit(&model, &sample.data, cfg.family, &GelOptions::default()) {
                    Ok(s) if s.converged => Ok(Some(overid_statistic(&s).stat)),
                    Ok(_) => Ok(None),
                    Err(e) if e.is_numerical() => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect();
        for o in outcomes {
            match o? {
                Some(s) => statistics.push(s),
                None => failures += 1,
            }
        }
    }
    if statistics.is_empty() {
        return Err(Error::NonConvergence {
            stage: "calibration",
            iterations: cfg.replications,
            residual: f64::NAN,
            best: Vec::new(),
        });
    }
    let rejection_rate =
        statistics.iter().filter(|&&s| s > critical_value).count() as f64 / statistics.len() as f64;
    Ok(OverIdCalibration {
        replications_used: statistics.len(),
        failures,
        dof,
        critical_value,
        rejection_rate,
        statistics,
    })
}
