//! `||eta_{nu,R} * f_nu||` against `||f_nu||` on both mixed scales, with the
//! same sequences resampled at several grid resolutions.

use rayon::prelude::*;
use serde_json::json;
use varspace_core::analysis::{cube_set, eta_convolve, step_sequence, Scale};
use varspace_core::geometry::Cube;
use varspace_core::norms::{norm_lp_lq, norm_lq_lp, GridSequence};

use super::qe::scale_name;
use super::{c_log_inverse, check_trials, fits_grid, require_bounded};
use crate::config::ExperimentConfig;
use crate::error::{config_error, LabError};
use crate::random::{random_lambda, trial_rng};
use crate::report::{EquivalenceSummary, Report, TrialRow};

pub fn run_convolution_experiment(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    check_trials(cfg)?;
    let conv = &cfg.convolution;
    if conv.resolutions.is_empty() {
        return Err(config_error("convolution.resolutions must be nonempty"));
    }
    let n = cfg.dim() as f64;
    let (p, q, w) = (cfg.p_field()?, cfg.q_field()?, cfg.weight()?);
    let mut report = Report::new("verify-conv", cfg)?;
    let threshold = match conv.scale {
        Scale::B => {
            let clog = c_log_inverse(cfg, &q)?;
            report.hypotheses.insert("c_log_inv_q".into(), clog);
            n + clog
        }
        Scale::F => {
            require_bounded(&p, &q, "the F-type inequality")?;
            if !(p.p_minus() > 1.0 && q.p_minus() > 1.0) {
                return Err(config_error(format!(
                    "hypothesis 1 < p- and 1 < q- fails: p- = {}, q- = {}",
                    p.p_minus(),
                    q.p_minus()
                )));
            }
            n
        }
    };
    let r = conv.r.unwrap_or(threshold + 1.0);
    report.hypotheses.insert("R".into(), r);
    report.hypotheses.insert("R_threshold".into(), threshold);
    if !(r > threshold) {
        return Err(config_error(format!("hypothesis R > {threshold} fails: R = {r}")));
    }

    let grids = conv.resolutions.iter().map(|&level| cfg.grid_at(level)).collect::<Result<Vec<_>, _>>()?;
    let family = cfg.lattice_family(conv.levels, None)?;
    let d = family.dilation();
    // Every resolution must hold every cube, so eligibility uses the coarsest box (all share it).
    let eligible = |c: &Cube, _| fits_grid(c, d, &grids[0]);
    let levels: Vec<u32> = (0..=conv.levels).collect();
    let norm = |seq: &GridSequence| match conv.scale {
        Scale::B => norm_lq_lp(seq, &p, &q, cfg.tolerances.norm),
        Scale::F => norm_lp_lq(seq, &p, &q, cfg.tolerances.norm),
    };
    let per_trial: Vec<Vec<TrialRow>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let lambda = random_lambda(&family, &levels, cfg.sparsity, false, &eligible, &mut trial_rng(cfg.seed, t as u64))?;
            grids
                .iter()
                .map(|grid| {
                    let f = step_sequence(&lambda, &w, &family, grid, &cube_set, None)?;
                    let g = eta_convolve(&f, r)?;
                    Ok(TrialRow::new(format!("level={}", grid.level()), t, scale_name(conv.scale), norm(&g)?, norm(&f)?))
                })
                .collect()
        })
        .collect::<Result<_, LabError>>()?;
    report.rows = per_trial.into_iter().flatten().collect();
    let sum = EquivalenceSummary::of(&report.rows, conv.stability_factor);
    report.verdicts.push(sum.bounded_verdict("bounded"));
    report.verdicts.push(sum.stable_verdict("stable"));
    report.summary = json!({ "ratio": sum });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_are_bounded_across_resolutions() {
        let cfg = ExperimentConfig::from_json(r#"{"trials": 6, "convolution": {"resolutions": [8, 9], "levels": 3}}"#).unwrap();
        let r = run_convolution_experiment(&cfg).unwrap();
        assert!(r.passed(), "{:?}", r.verdicts);
        assert_eq!(r.hypotheses["R"], 2.0);
    }

    #[test]
    fn kernel_below_threshold_is_refused() {
        let cfg = ExperimentConfig::from_json(r#"{"convolution": {"r": 1.0}}"#).unwrap();
        assert!(matches!(run_convolution_experiment(&cfg), Err(LabError::Config(_))));
    }

    #[test]
    fn f_type_needs_exponents_above_one() {
        let cfg = ExperimentConfig::from_json(
            r#"{"p": {"field": {"kind": "constant", "value": 1.0}}, "convolution": {"scale": "f"}}"#,
        )
        .unwrap();
        assert!(matches!(run_convolution_experiment(&cfg), Err(LabError::Config(_))));
    }
}
