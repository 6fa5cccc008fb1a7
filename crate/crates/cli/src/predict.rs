use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gelkde::gaussian_kernel;
use gelkde::simulation::{scenario1_relative_ivar_prediction, ConditionalForm, PredictionSetup};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::{file_sha256, json_bytes, Artifact, RunOutput};
use crate::simulate::load_config;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupChoice {
    /// Slope 4 and the normal-cdf form of the conditional term (tau'D tau = 9.8092 at d_g = 4).
    Reference,
    /// Every population quantity by quadrature at --beta.
    Exact,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [100, 500, 1000, 2000])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub dg: usize,
    #[arg(long, default_value_t = 2)]
    pub kernel_r: usize,
    /// Only scenario 1 has a prediction.
    #[arg(long, default_value_t = 1)]
    pub scenario: u8,
    /// Scenario configuration; its scenario, d_g and kernel_r replace the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SetupChoice::Reference)]
    pub setup: SetupChoice,
    /// `delta,gamma,theta` for --setup exact.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 2.0, 0.08])]
    pub beta: Vec<f64>,
    /// Also write prediction.txt, prediction.json and a manifest here.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &PredictArgs) -> CliResult<RunOutput> {
    let (mut scenario, mut d_g, mut kernel_r) = (args.scenario, args.dg, args.kernel_r);
    let mut inputs = BTreeMap::new();
    if let Some(p) = &args.config {
        let cfg = load_config(Some(p))?;
        (scenario, d_g, kernel_r) = (cfg.scenario, cfg.d_g, cfg.kernel_r);
        inputs.insert(p.display().to_string(), file_sha256(p)?);
    }
    if scenario != 1 {
        return Err(gelkde::Error::Unsupported(format!(
            "the variance prediction exists for scenario 1 only, got scenario {scenario}"
        ))
        .into());
    }
    if args.n.is_empty() {
        return Err(CliError::Input("--n needs at least one sample size".into()));
    }
    let setup = match args.setup {
        SetupChoice::Reference => PredictionSetup::reference(),
        SetupChoice::Exact => PredictionSetup::exact([args.beta[0], args.beta[1], args.beta[2]]),
    };
    let kernel = gaussian_kernel(kernel_r)?;
    let rows = args
        .n
        .iter()
        .map(|&n| scenario1_relative_ivar_prediction(n, d_g, &kernel, &setup))
        .collect::<gelkde::Result<Vec<_>>>()?;

    let form = match setup.conditional {
        ConditionalForm::Exact => "quadrature",
        ConditionalForm::NormalCdf => "normal-cdf form",
    };
    let [d, g, t] = setup.beta;
    let mut table = String::new();
    let _ = writeln!(
        table,
        "# setup {:?}: (delta, gamma, theta) = ({d}, {g}, {t}), tau_0|u by {form}, kernel {}",
        args.setup,
        kernel.name()
    );
    let _ = writeln!(
        table,
        "{:>6} {:>4} {:>10} {:>11} {:>11} {:>10} {:>10}",
        "n", "d_g", "bandwidth", "first", "second", "tau'Dtau", "rel_ivar"
    );
    for p in &rows {
        let _ = writeln!(
            table,
            "{:>6} {:>4} {:>10.6} {:>11.6} {:>11.6} {:>10.5} {:>10.4}",
            p.n, p.d_g, p.bandwidth, p.first_term, p.second_term, p.tau_d_tau, p.value
        );
    }
    print!("{table}");
    let artifacts = vec![
        Artifact {
            name: "prediction.txt",
            bytes: table.into_bytes(),
        },
        Artifact {
            name: "prediction.json",
            bytes: json_bytes(&rows)?,
        },
    ];
    Ok(RunOutput {
        artifacts,
        config: serde_json::to_value(setup)?,
        seed: None,
        inputs,
    })
}
