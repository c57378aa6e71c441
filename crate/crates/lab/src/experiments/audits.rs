//! Domain regularity and weight admissibility audits.

use serde_json::json;
use varspace_core::geometry::{build_lattice, check_er, check_ir, check_mr, default_sides};
use varspace_core::sampling::{AxisBox, SampleBox};
use varspace_core::exponents::RealField;
use varspace_core::weights::{check_admissible, weight_from_smoothness};

use crate::config::{ExperimentConfig, WeightSpec};
use crate::error::{config_error, LabError};
use crate::report::{Report, Verdict};

/// MR, IR and ER at every configured raster level, plus a classification
/// census of the domain lattices. Verdicts must also agree across levels.
pub fn run_domain_audit(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    let dom_cfg = cfg.domain.as_ref().ok_or_else(|| config_error("audit-domain needs a domain"))?;
    let audit = &cfg.audit;
    let levels = if audit.levels.is_empty() { vec![dom_cfg.level] } else { audit.levels.clone() };
    let sides = default_sides(audit.sides_max_level);
    let b = cfg.shift_budget(true);
    let d = cfg.lattice.d;
    let mut report = Report::new("audit-domain", cfg)?;
    report.hypotheses.insert("floor".into(), audit.floor);
    report.hypotheses.insert("smallest_side".into(), sides[sides.len() - 1]);
    let mut per_level = Vec::new();
    let mut triples = Vec::new();
    for &level in &levels {
        let dom = cfg.domain_at(dom_cfg, level)?;
        let mr = check_mr(&dom);
        let ir = check_ir(&dom, &sides, audit.floor)?;
        let er = check_er(&dom, &sides, audit.floor)?;
        report.verdicts.push(Verdict::new(format!("MR@{level}"), mr, "closure interior equals the domain at pixel scale"));
        report.verdicts.push(Verdict::new(format!("IR@{level}"), ir.pass, format!("c = {:.6}", ir.c_estimate)));
        report.verdicts.push(Verdict::new(format!("ER@{level}"), er.pass, format!("c = {:.6}", er.c_estimate)));
        triples.push((mr, ir.pass, er.pass));
        let region = dom.bounding_box();
        let census: Vec<_> = (0..=cfg.lattice.max_level.min(level.max(0) as u32))
            .map(|nu| match build_lattice(nu, b, d, &region, Some(&dom)) {
                Ok(lat) => {
                    let (interior, boundary, exterior, other) = lat.census();
                    json!({"level": nu, "interior": interior, "boundary": boundary, "exterior": exterior, "unclassified": other})
                }
                Err(e) => json!({"level": nu, "error": e.to_string()}),
            })
            .collect();
        per_level.push(json!({
            "pixel_level": level,
            "measure": dom.measure(),
            "mr": mr,
            "ir": ir,
            "er": er,
            "census": census,
        }));
    }
    let stable = triples.windows(2).all(|w| w[0] == w[1]);
    report.verdicts.push(Verdict::new("stable", stable, format!("(MR, IR, ER) per level: {triples:?}")));
    report.summary = json!({ "levels": per_level, "sides": sides });
    Ok(report)
}

pub fn run_weight_audit(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    let wa = &cfg.weight_audit;
    let region = match &wa.region {
        Some(r) => r.clone(),
        None => AxisBox::cube(cfg.dim(), -1.0, 1.0)?,
    };
    let samples = SampleBox::new(region, wa.samples_per_axis)?;
    let w = cfg.weight()?;
    let adm = check_admissible(&w, &samples, wa.max_level, wa.c_cap)?;
    let mut report = Report::new("audit-weights", cfg)?;
    report.hypotheses.insert("alpha".into(), w.alpha());
    report.hypotheses.insert("alpha_1".into(), w.alpha1());
    report.hypotheses.insert("alpha_2".into(), w.alpha2());
    report.hypotheses.insert("c_cap".into(), wa.c_cap);
    report.verdicts.push(Verdict::new("growth", adm.cond_i_pass, format!("worst constant {:.6e}", adm.cond_i_worst_constant)));
    report.verdicts.push(Verdict::new(
        "level_ratio",
        adm.cond_ii_pass,
        format!("worst ratio {:?}", adm.cond_ii_worst_ratio),
    ));
    let log_holder = match &cfg.weight {
        WeightSpec::Smoothness { s, threshold } => {
            let field = RealField::new(cfg.dim(), s.clone())?;
            let (_, lh) = weight_from_smoothness(field, &cfg.working_samples()?, *threshold)?;
            report.verdicts.push(Verdict::new("smoothness_log_holder", lh.passes_local, format!("c_log = {:.6e}", lh.c_log_local)));
            Some(lh)
        }
        _ => None,
    };
    report.summary = json!({ "admissibility": adm, "smoothness_log_holder": log_holder });
    Ok(report)
}
