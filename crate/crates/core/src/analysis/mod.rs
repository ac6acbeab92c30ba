//! Curve fits for correlation profiles and entropies, and finite-size
//! scaling collapse.

mod collapse;
mod fit;
mod linalg;

pub use collapse::{
    collapse_objective, objective_parts, rescale, scaling_collapse, CollapseConfig, CollapsePoint, CollapseResult,
    ObjectiveParts, RescaledPoint, Trial,
};
pub use fit::{
    default_power_window, fit_exp_plateau, fit_linear, fit_log_area_law, fit_power_law, FitModel, FitResult, Param,
};
