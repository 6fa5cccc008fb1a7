use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use gelkde::simulation::{run_mc, ScenarioConfig};
use gelkde::CarrierFamily;
use serde::{Deserialize, Serialize};

use crate::data::columns_csv;
use crate::error::{CliError, CliResult};
use crate::manifest::{file_sha256, json_bytes, Artifact, RunOutput};
use crate::parse_family;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// JSON scenario configuration; omitted fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Master seed of the per-replication streams.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, value_parser = parse_family)]
    pub family: Option<CarrierFamily>,
    #[arg(long)]
    pub dg: Option<usize>,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// 1 (normal), 2 (skewed unimodal) or 3 (skewed bimodal).
    #[arg(long)]
    pub scenario: Option<u8>,
}

pub fn load_config(path: Option<&PathBuf>) -> CliResult<ScenarioConfig> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Input(format!(
                    "{}: invalid scenario configuration: {e}",
                    p.display()
                ))
            })
        }
    }
}

pub fn resolve(args: &SimulateArgs) -> CliResult<ScenarioConfig> {
    let mut cfg = load_config(args.config.as_ref())?;
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if let Some(f) = args.family {
        cfg.family = f;
    }
    if let Some(d) = args.dg {
        cfg.d_g = d;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(args: &SimulateArgs) -> CliResult<RunOutput> {
    let cfg = resolve(args)?;
    let report = run_mc(&cfg)?;
    if !report.valid {
        eprintln!(
            "warning: {} of {} replications failed; the report is flagged invalid",
            report.failures.total(),
            report.replications_requested
        );
    }
    let mut header = vec![
        "u".to_string(),
        "truth_pdf".to_string(),
        "truth_cdf".to_string(),
    ];
    let mut cols: Vec<&[f64]> = vec![&report.grid, &report.truth_pdf, &report.truth_cdf];
    for c in &report.curves {
        header.push(format!("{}_mean", c.id));
        header.push(format!("{}_var", c.id));
        cols.push(&c.mean);
        cols.push(&c.variance);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let artifacts = vec![
        Artifact {
            name: "report.json",
            bytes: json_bytes(&report)?,
        },
        Artifact {
            name: "table.txt",
            bytes: report.render_table().into_bytes(),
        },
        Artifact {
            name: "curves.csv",
            bytes: columns_csv(&header, &cols)?,
        },
    ];
    let mut inputs = BTreeMap::new();
    if let Some(p) = &args.config {
        inputs.insert(p.display().to_string(), file_sha256(p)?);
    }
    Ok(RunOutput {
        artifacts,
        config: serde_json::to_value(&cfg)?,
        seed: Some(cfg.master_seed),
        inputs,
    })
}
