//! One driver per CLI subcommand. Each returns a [`Report`]; verdict
//! failures are data, while anything that prevents a run is a [`LabError`].

mod audits;
mod convolution;
mod norm;
mod qe;
mod synthesis;

pub use audits::{run_domain_audit, run_weight_audit};
pub use convolution::run_convolution_experiment;
pub use norm::run_norm;
pub use qe::run_qe_experiment;
pub use synthesis::{run_synthesis_experiment, run_synthesize};

use varspace_core::exponents::{c_log_reciprocal, ExponentField};
use varspace_core::geometry::{Cube, CubeClass};
use varspace_core::norms::Grid;

use crate::config::ExperimentConfig;
use crate::error::{config_error, LabError};
use crate::report::Report;

/// Finest multiscale level used when estimating `c_log(1/q)`.
pub const C_LOG_FINEST: u32 = 20;

/// Runs the experiment named by a CLI subcommand.
pub fn run_named(name: &str, cfg: &ExperimentConfig) -> Result<Report, LabError> {
    if let Some(label) = &cfg.experiment {
        if label != name {
            return Err(config_error(format!("config is labelled {label:?} but was run as {name:?}")));
        }
    }
    match name {
        "norm" => run_norm(cfg),
        "audit-weights" => run_weight_audit(cfg),
        "audit-domain" => run_domain_audit(cfg),
        "verify-qe" => run_qe_experiment(cfg),
        "verify-synthesis" => run_synthesis_experiment(cfg),
        "verify-conv" => run_convolution_experiment(cfg),
        "synthesize" => run_synthesize(cfg),
        other => Err(config_error(format!("unknown experiment {other:?}"))),
    }
}

pub(crate) fn c_log_inverse(cfg: &ExperimentConfig, q: &ExponentField) -> Result<f64, LabError> {
    Ok(c_log_reciprocal(q, &cfg.working_samples()?, C_LOG_FINEST)?)
}

pub(crate) fn require_bounded(p: &ExponentField, q: &ExponentField, why: &str) -> Result<(), LabError> {
    if !p.p_plus().is_finite() || !q.p_plus().is_finite() {
        return Err(config_error(format!("{why} needs p+ < inf and q+ < inf")));
    }
    Ok(())
}

/// The closed box `d Q` lies inside the grid box, so nothing built on it wraps.
pub(crate) fn fits_grid(cube: &Cube, d: f64, grid: &Grid) -> bool {
    let b = cube.dilated_box(d);
    (0..grid.dim()).all(|a| {
        let lo = grid.origin(a);
        b.lo[a] >= lo && b.hi[a] <= lo + 2.0 * grid.half_width()
    })
}

/// Coefficients may sit on every cube, or only on interior and boundary ones.
pub(crate) fn allowed(class: CubeClass, restricted: bool) -> bool {
    !restricted || matches!(class, CubeClass::Interior | CubeClass::Boundary)
}

pub(crate) fn check_trials(cfg: &ExperimentConfig) -> Result<(), LabError> {
    if cfg.trials == 0 {
        return Err(config_error("trials must be positive"));
    }
    if !(cfg.tolerances.norm > 0.0 && cfg.tolerances.norm < 1.0) {
        return Err(config_error("tolerances.norm must lie in (0, 1)"));
    }
    Ok(())
}
