use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gelkde::density::uniform_grid;
use gelkde::simulation::truth::normal_derivative_roughness;
use gelkde::simulation::{GridSpec, IhsModel};
use gelkde::{
    amise_bandwidth_cdf, amise_bandwidth_pdf, asymptotic_components, bias_corrected_cdf,
    bias_corrected_pdf, bias_curves, gaussian_kernel, gel_fit, overid_statistic, weighted_kcdf,
    weighted_kde, CarrierFamily, CurveEstimate, GelOptions, ResidualModel, WeightedSample,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::data::{columns_csv, read_obs};
use crate::error::{CliError, CliResult};
use crate::manifest::{file_sha256, json_bytes, Artifact, RunOutput};
use crate::{parse_family, parse_grid};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// CSV with a header row and columns y and x.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// el, et, cue or cr:<gamma>
    #[arg(long, default_value = "el", value_parser = parse_family)]
    pub family: CarrierFamily,
    /// Number of moment conditions, u times (1, x, ..., x^{dg-1}).
    #[arg(long, default_value_t = 4)]
    pub dg: usize,
    /// Density bandwidth; defaults to the normal-reference AMISE rule.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Distribution-function bandwidth; defaults to the normal-reference AMISE rule.
    #[arg(long)]
    pub cdf_bandwidth: Option<f64>,
    /// Pilot bandwidth for the bias curves; defaults to twice the density bandwidth.
    #[arg(long)]
    pub pilot_bandwidth: Option<f64>,
    /// Kernel of order 2r.
    #[arg(long, default_value_t = 2)]
    pub kernel_r: usize,
    /// Evaluation grid `lo,hi,points`; defaults to the residual range padded by four bandwidths.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
}

fn positive(name: &str, v: Option<f64>) -> CliResult<Option<f64>> {
    match v {
        Some(b) if !(b > 0.0 && b.is_finite()) => Err(CliError::Input(format!(
            "--{name} must be positive, got {b}"
        ))),
        _ => Ok(v),
    }
}

fn write_diagnostics(out: Option<&Path>, value: serde_json::Value) {
    if let Some(out) = out {
        let written = fs::create_dir_all(out)
            .map_err(CliError::from)
            .and_then(|_| {
                Ok(fs::write(
                    out.join("diagnostics.json"),
                    json_bytes(&value)?,
                )?)
            });
        if let Err(e) = written {
            eprintln!("warning: could not write diagnostics: {e}");
        }
    }
}

pub fn run(args: &FitArgs, out: Option<&Path>) -> CliResult<RunOutput> {
    positive("bandwidth", args.bandwidth)?;
    positive("cdf-bandwidth", args.cdf_bandwidth)?;
    positive("pilot-bandwidth", args.pilot_bandwidth)?;
    let data = read_obs(&args.input)?;
    let model = IhsModel::new(args.dg)?;
    let kernel = gaussian_kernel(args.kernel_r)?;
    let n = data.len();

    let sol = match gel_fit(&model, &data, args.family, &GelOptions::default()) {
        Ok(s) if s.converged => s,
        Ok(s) => {
            write_diagnostics(
                out,
                json!({ "error": "outer solver did not converge", "solution": s }),
            );
            return Err(CliError::Numerical(format!(
                "GEL fit did not converge (gradient norm {:e})",
                s.gradient_norm
            )));
        }
        Err(e) => {
            if e.is_numerical() {
                write_diagnostics(out, json!({ "error": e.to_string() }));
            }
            return Err(e.into());
        }
    };
    let beta = sol.beta();
    let u: Vec<f64> = data.iter().map(|z| model.residual(z, &beta)).collect();

    let mean = u.iter().sum::<f64>() / n as f64;
    let sd = (u.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(CliError::Input("fitted residuals have no spread".into()));
    }
    let r = kernel.r() as i32;
    let b = match args.bandwidth {
        Some(b) => b,
        None => amise_bandwidth_pdf(
            &kernel,
            normal_derivative_roughness(2 * r as usize) / sd.powi(4 * r + 1),
            n,
        )?,
    };
    let b_cdf = match args.cdf_bandwidth {
        Some(b) => b,
        None => amise_bandwidth_cdf(
            &kernel,
            normal_derivative_roughness(2 * r as usize - 1) / sd.powi(4 * r - 1),
            n,
        )?,
    };
    let pilot = args.pilot_bandwidth.unwrap_or(2.0 * b);
    let grid = match args.grid {
        Some(g) => g.build(),
        None => {
            let pad = 4.0 * b.max(b_cdf).max(pilot);
            let lo = u.iter().copied().fold(f64::INFINITY, f64::min) - pad;
            let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad;
            uniform_grid(lo, hi, 1001)
        }
    };

    let pi = sol.shrunk_pi();
    let uniform = WeightedSample::uniform(u.clone())?;
    let weighted = WeightedSample::new(u.clone(), pi.clone())?;
    let f_uni = weighted_kde(&uniform, &kernel, b, &grid)?;
    let f_w = weighted_kde(&weighted, &kernel, b, &grid)?;
    let cdf_uni = weighted_kcdf(&uniform, &kernel, b_cdf, &grid)?;
    let cdf_w = weighted_kcdf(&weighted, &kernel, b_cdf, &grid)?;

    let corrected = asymptotic_components(&sol, &model, &data)
        .and_then(|m| bias_curves(&sol, &m, &model, &data, &kernel, pilot, &grid, &f_w.values))
        .and_then(|curves| {
            Ok((
                bias_corrected_pdf(&f_w, &curves, n)?,
                bias_corrected_cdf(&cdf_w, &curves, n)?,
            ))
        });
    let (f_bc, cdf_bc, correction_note): (CurveEstimate, CurveEstimate, Option<String>) =
        match corrected {
            Ok((p, c)) => (p, c, None),
            Err(e) if e.is_numerical() || matches!(e, gelkde::Error::Support { .. }) => {
                eprintln!("warning: bias correction unavailable ({e}); corrected columns repeat the weighted estimates");
                (f_w.clone(), cdf_w.clone(), Some(e.to_string()))
            }
            Err(e) => return Err(e.into()),
        };

    let overid = overid_statistic(&sol);
    let solution = json!({
        "model": format!("transformation model, d_g = {}", args.dg),
        "family": sol.family.to_string(),
        "n": n,
        "beta_hat": { "delta": sol.beta_hat[0], "gamma": sol.beta_hat[1], "theta": sol.beta_hat[2] },
        "lambda_hat": sol.lambda_hat,
        "criterion": sol.criterion,
        "overid": { "statistic": overid.stat, "dof": overid.dof, "p_value": overid.p_value },
        "converged": sol.converged,
        "gradient_norm": sol.gradient_norm,
        "iterations": sol.iterations,
        "negative_weights": sol.pi.iter().filter(|&&p| p < 0.0).count(),
        "kernel": { "name": kernel.name(), "order": kernel.order() },
        "bandwidths": {
            "pdf": b,
            "cdf": b_cdf,
            "pilot": pilot,
            "pdf_rule": if args.bandwidth.is_some() { "user" } else { "normal reference" },
            "cdf_rule": if args.cdf_bandwidth.is_some() { "user" } else { "normal reference" },
        },
        "grid": { "lo": grid[0], "hi": grid[grid.len() - 1], "points": grid.len() },
        "bias_correction": { "applied": correction_note.is_none(), "note": correction_note },
    });

    let index: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let artifacts = vec![
        Artifact {
            name: "solution.json",
            bytes: json_bytes(&solution)?,
        },
        Artifact {
            name: "weights.csv",
            bytes: columns_csv(&["i", "pi", "pi_shrunk"], &[&index, &sol.pi, &pi])?,
        },
        Artifact {
            name: "density.csv",
            bytes: columns_csv(
                &["u", "uniform", "weighted", "corrected"],
                &[&grid, &f_uni.values, &f_w.values, &f_bc.values],
            )?,
        },
        Artifact {
            name: "cdf.csv",
            bytes: columns_csv(
                &["u", "uniform", "weighted", "corrected"],
                &[&grid, &cdf_uni.values, &cdf_w.values, &cdf_bc.values],
            )?,
        },
    ];
    let inputs = BTreeMap::from([(args.input.display().to_string(), file_sha256(&args.input)?)]);
    let config = json!({ "family": args.family, "d_g": args.dg, "kernel_r": args.kernel_r, "bandwidth_pdf": b, "bandwidth_cdf": b_cdf, "pilot": pilot, "grid_points": grid.len() });
    Ok(RunOutput {
        artifacts,
        config,
        seed: None,
        inputs,
    })
}
