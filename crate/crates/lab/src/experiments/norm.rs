//! A single norm of a closed-form function sampled on the configured grid.

use serde_json::json;
use varspace_core::analysis::{besov_norm, besov_norm_masked, build_partition, triebel_norm, triebel_norm_masked};
use varspace_core::atoms::{holder_norm, HolderOptions};
use varspace_core::norms::{luxemburg_norm, GridFunction};

use super::require_bounded;
use crate::config::{resolvable_partition_level, ExperimentConfig, NormKind};
use crate::error::{config_error, LabError};
use crate::report::{Report, Verdict};

pub fn run_norm(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    let norm_cfg = &cfg.norm;
    if norm_cfg.function.dim() != cfg.dim() {
        return Err(config_error("norm.function dimension differs from the grid"));
    }
    let grid = cfg.grid()?;
    let domain = cfg.domain()?;
    let raw = GridFunction::from_fn(&grid, |x| norm_cfg.function.eval(x));
    let tol = cfg.tolerances.norm;
    let (p, q, w) = (cfg.p_field()?, cfg.q_field()?, cfg.weight()?);
    let partition = || -> Result<_, LabError> {
        let top = match norm_cfg.partition_level {
            Some(j) => j,
            None => resolvable_partition_level(&grid)?,
        };
        Ok(build_partition(top, &grid)?)
    };
    let value = match norm_cfg.kind {
        NormKind::Luxemburg => {
            let f = match &domain {
                Some(dom) => raw.masked(|x| dom.contains(x)),
                None => raw.clone(),
            };
            luxemburg_norm(&f, &p, tol)?
        }
        NormKind::Besov => match &domain {
            Some(dom) => besov_norm_masked(&raw, &p, &q, &w, &partition()?, dom, tol)?,
            None => besov_norm(&raw, &p, &q, &w, &partition()?, tol)?,
        },
        NormKind::Triebel => {
            require_bounded(&p, &q, "the Triebel-Lizorkin norm")?;
            match &domain {
                Some(dom) => triebel_norm_masked(&raw, &p, &q, &w, &partition()?, dom, tol)?,
                None => triebel_norm(&raw, &p, &q, &w, &partition()?, tol)?,
            }
        }
        NormKind::Holder => holder_norm(&raw, norm_cfg.smoothness, domain.as_ref(), &HolderOptions::default())?,
    };
    let mut report = Report::new("norm", cfg)?;
    report.verdicts.push(Verdict::new("finite", value.is_finite(), format!("{value:e}")));
    report.summary = json!({
        "function": norm_cfg.function.label(),
        "kind": norm_cfg.kind,
        "value": value,
        "grid_points": grid.len(),
        "domain_masked": domain.is_some(),
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_l2_norm() {
        // ||exp(-x^2 / w^2)||_2^2 = w sqrt(pi / 2).
        let cfg = ExperimentConfig::from_json(r#"{"norm": {"function": {"kind": "gaussian", "center": [0.0], "width": 0.25}, "kind": "luxemburg"}}"#).unwrap();
        let r = run_norm(&cfg).unwrap();
        let exact = (0.25 * (std::f64::consts::PI / 2.0).sqrt()).sqrt();
        assert!((r.summary["value"].as_f64().unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let cfg = ExperimentConfig::from_json(r#"{"grid": {"dim": 2, "level": 5, "half_width": 1.0}}"#).unwrap();
        assert!(matches!(run_norm(&cfg), Err(LabError::Config(_))));
    }
}
