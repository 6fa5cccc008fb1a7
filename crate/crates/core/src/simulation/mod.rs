//! Monte Carlo designs built on the transformation model.

pub mod ihs;
pub mod mc;
pub mod prediction;
pub mod scenario;
pub mod truth;
pub mod ttest;

pub use ihs::{ihs, ihs_inverse, residual_map, IhsModel, Obs};
pub use mc::{
    run_mc, run_overid_calibration, Comparison, Estimator, EstimatorSummary, FailureCounts,
    FallbackCounts, McReport, OverIdCalibration, PointwiseCurve,
};
pub use prediction::{
    scenario1_relative_ivar_prediction, tau_d_tau, ConditionalForm, IvarPrediction, PredictionSetup,
};
pub use scenario::{sample_scenario, GridSpec, MixtureComponent, ScenarioConfig, ScenarioSample};
pub use truth::{roughness, true_cdf, true_density, TrueLaw};
pub use ttest::{paired_ise_ttest, PairedTTest, Significance};
