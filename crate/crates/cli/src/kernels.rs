use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use gelkde::density::uniform_grid;
use gelkde::gaussian_kernel;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::data::columns_csv;
use crate::error::{CliError, CliResult};
use crate::manifest::{json_bytes, Artifact, RunOutput};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KernelsArgs {
    /// Kernel indices r (order 2r), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub r: Vec<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Tabulate on [-range, range].
    #[arg(long, default_value_t = 6.0)]
    pub range: f64,
    #[arg(long, default_value_t = 601)]
    pub points: usize,
}

pub fn run(args: &KernelsArgs) -> CliResult<RunOutput> {
    if !(args.range > 0.0 && args.range.is_finite()) || args.points < 2 {
        return Err(CliError::Input(
            "--range must be positive and --points at least 2".into(),
        ));
    }
    let x = uniform_grid(-args.range, args.range, args.points);
    let mut summary = Vec::new();
    let mut header = vec!["x".to_string()];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for &r in &args.r {
        let k = gaussian_kernel(r)?;
        summary.push(json!({
            "name": k.name(),
            "r": k.r(),
            "order": k.order(),
            "roughness": k.roughness(),
            "mu": k.functionals.mu,
            "psi": k.psi(),
            "support": k.support(),
        }));
        let o = k.order();
        header.extend([
            format!("k{o}"),
            format!("K{o}"),
            format!("dk{o}"),
            format!("d2k{o}"),
        ]);
        cols.push(x.iter().map(|&v| k.pdf(v)).collect());
        cols.push(x.iter().map(|&v| k.cdf(v)).collect());
        cols.push(x.iter().map(|&v| k.eval(v, 1)).collect());
        cols.push(x.iter().map(|&v| k.eval(v, 2)).collect());
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut all: Vec<&[f64]> = vec![&x];
    all.extend(cols.iter().map(Vec::as_slice));
    let artifacts = vec![
        Artifact {
            name: "kernels.json",
            bytes: json_bytes(&summary)?,
        },
        Artifact {
            name: "kernels.csv",
            bytes: columns_csv(&header, &all)?,
        },
    ];
    Ok(RunOutput {
        artifacts,
        config: serde_json::to_value(args)?,
        seed: None,
        inputs: BTreeMap::new(),
    })
}
