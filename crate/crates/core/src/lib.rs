//! Density and distribution function estimation for generalised residuals under
//! moment restrictions, weighted by generalised empirical likelihood (GEL)
//! implied probabilities.

pub mod asymptotics;
pub mod bias;
pub mod carrier;
pub mod density;
pub mod error;
pub mod gel;
pub mod kernels;
pub mod model;
pub mod quadrature;
pub mod simulation;
pub mod special;

pub use asymptotics::{asymptotic_components, AsymptoticMatrices};
pub use bias::{
    bias_corrected_cdf, bias_corrected_pdf, bias_curves, delta_curve, delta_rho_curve,
    known_beta_bias_curve, smooth_conditional_product, BiasCurves,
};
pub use carrier::{c_rho, carrier_derivative, CarrierFamily};
pub use density::{
    amise_bandwidth_cdf, amise_bandwidth_pdf, positive_part_normalize, rearrange_cdf,
    weighted_kcdf, weighted_kde, CurveEstimate, CurveKind, WeightedSample,
};
pub use error::{Error, Result};
pub use gel::{
    gel_at_beta, gel_fit, implied_probabilities, overid_statistic, shrink_probabilities,
    solve_lambda, GelOptions, GelSolution,
};
pub use kernels::{gaussian_kernel, kernel_functionals, KernelSpec};
pub use model::{MomentModel, ResidualModel};

pub use nalgebra;
