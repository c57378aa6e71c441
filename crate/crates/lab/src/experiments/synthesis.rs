//! Upper-bound direction of the atomic decomposition: the function-space
//! norm of `sum lambda a` against the sequence norm of `lambda`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;
use varspace_core::analysis::{
    besov_norm, besov_norm_masked, build_partition, sequence_norm, synthesize, triebel_norm, triebel_norm_masked,
    CoefficientSequence, LatticeFamily, PartitionOfUnity, ReferenceAtoms, Scale,
};
use varspace_core::exponents::{sigma_p, sigma_pq, ExponentField};
use varspace_core::geometry::{Cube, RasterDomain};
use varspace_core::norms::{Grid, GridFunction};
use varspace_core::weights::WeightSequence;

use super::qe::scale_name;
use super::{allowed, c_log_inverse, check_trials, fits_grid, require_bounded};
use crate::config::{resolvable_partition_level, ExperimentConfig};
use crate::error::{config_error, LabError};
use crate::random::{random_lambda, trial_rng};
use crate::report::{EquivalenceSummary, Report, TrialRow, Verdict};

/// Everything a synthesis run needs once the hypotheses have been checked.
struct Setup {
    grid: Grid,
    p: ExponentField,
    q: ExponentField,
    w: WeightSequence,
    pou: PartitionOfUnity,
    domain: Option<RasterDomain>,
    atoms: ReferenceAtoms,
    scale: Scale,
    hypotheses: BTreeMap<String, f64>,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        check_trials(cfg)?;
        let syn = &cfg.synthesis;
        let n = cfg.dim();
        let (p, q, w) = (cfg.p_field()?, cfg.q_field()?, cfg.weight()?);
        let (k, l) = (syn.k, syn.l);
        let (a1, a2) = (w.alpha1(), w.alpha2());
        let clog = c_log_inverse(cfg, &q)?;
        let mut hyp = BTreeMap::new();
        hyp.insert("K".to_string(), k);
        hyp.insert("L".to_string(), l);
        hyp.insert("alpha_1".to_string(), a1);
        hyp.insert("alpha_2".to_string(), a2);
        hyp.insert("c_log_inv_q".to_string(), clog);
        if !(k > a2) {
            return Err(config_error(format!("hypothesis K > alpha_2 fails: K = {k}, alpha_2 = {a2}")));
        }
        match syn.scale {
            Scale::B => {
                let sigma = sigma_p(p.p_minus(), n)?;
                let bound = sigma - a1 + clog;
                hyp.insert("sigma_p".to_string(), sigma);
                hyp.insert("L_threshold".to_string(), bound);
                if !(l > bound) {
                    return Err(config_error(format!(
                        "hypothesis L > sigma_p - alpha_1 + c_log(1/q) fails: L = {l}, sigma_p = {sigma}, alpha_1 = {a1}, c_log(1/q) = {clog}"
                    )));
                }
            }
            Scale::F => {
                require_bounded(&p, &q, "the F scale")?;
                let sigma = sigma_pq(p.p_minus(), q.p_minus(), n)?;
                let bound = sigma - a1;
                hyp.insert("sigma_pq".to_string(), sigma);
                hyp.insert("L_threshold".to_string(), bound);
                if !(l > bound) {
                    return Err(config_error(format!(
                        "hypothesis L > sigma_pq - alpha_1 fails: L = {l}, sigma_pq = {sigma}, alpha_1 = {a1}"
                    )));
                }
            }
        }
        let grid = cfg.grid()?;
        let top = match syn.partition_level {
            Some(j) => j,
            None => resolvable_partition_level(&grid)?,
        };
        let pou = build_partition(top, &grid)?;
        let domain = cfg.regular_domain()?;
        let atoms = match &domain {
            Some(dom) => ReferenceAtoms::on_domain(k, l, cfg.lattice.d, dom)?,
            None => ReferenceAtoms::global(k, l, n, cfg.lattice.d)?,
        };
        Ok(Self { grid, p, q, w, pou, domain, atoms, scale: syn.scale, hypotheses: hyp })
    }

    fn family(&self, cfg: &ExperimentConfig, max_level: u32) -> Result<LatticeFamily, LabError> {
        cfg.lattice_family(max_level, self.domain.as_ref())
    }

    fn draw(&self, cfg: &ExperimentConfig, family: &LatticeFamily, stream: u64) -> Result<CoefficientSequence, LabError> {
        let restricted = self.domain.is_some();
        let d = family.dilation();
        let eligible = |c: &Cube, k| allowed(k, restricted) && fits_grid(c, d, &self.grid);
        let levels: Vec<u32> = (0..=family.max_level()).collect();
        random_lambda(family, &levels, cfg.sparsity, restricted, &eligible, &mut trial_rng(cfg.seed, stream))
    }

    /// `(||sum lambda a||, ||lambda||, f)` on the configured scale.
    fn norms(
        &self,
        cfg: &ExperimentConfig,
        family: &LatticeFamily,
        lambda: &CoefficientSequence,
    ) -> Result<(f64, f64, GridFunction), LabError> {
        let tol = cfg.tolerances.norm;
        let f = synthesize(lambda, &self.atoms, family, family.max_level(), &self.grid)?;
        let (p, q, w, pou) = (&self.p, &self.q, &self.w, &self.pou);
        let fn_norm = match (self.scale, &self.domain) {
            (Scale::B, None) => besov_norm(&f, p, q, w, pou, tol)?,
            (Scale::F, None) => triebel_norm(&f, p, q, w, pou, tol)?,
            (Scale::B, Some(dom)) => besov_norm_masked(&f, p, q, w, pou, dom, tol)?,
            (Scale::F, Some(dom)) => triebel_norm_masked(&f, p, q, w, pou, dom, tol)?,
        };
        let seq_norm = sequence_norm(lambda, w, p, q, self.scale, family, &self.grid, self.domain.as_ref(), tol)?;
        Ok((fn_norm, seq_norm, f))
    }
}

pub fn run_synthesis_experiment(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    let setup = Setup::new(cfg)?;
    let syn = &cfg.synthesis;
    if syn.max_levels.is_empty() {
        return Err(config_error("synthesis.max_levels must be nonempty"));
    }
    let mut report = Report::new("verify-synthesis", cfg)?;
    report.hypotheses = setup.hypotheses.clone();
    let scale = scale_name(setup.scale);
    for &top in &syn.max_levels {
        let family = setup.family(cfg, top)?;
        let rows: Vec<TrialRow> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let lambda = setup.draw(cfg, &family, ((top as u64) << 32) | t as u64)?;
                let (a, b, _) = setup.norms(cfg, &family, &lambda)?;
                Ok(TrialRow::new(format!("nu_max={top}"), t, scale, a, b))
            })
            .collect::<Result<_, LabError>>()?;
        report.rows.extend(rows);
    }
    let sum = EquivalenceSummary::of(&report.rows, cfg.tolerances.stability_factor);
    report.verdicts.push(sum.bounded_verdict("bounded"));
    report.verdicts.push(sum.stable_verdict("stable"));
    report.summary = json!({
        "ratio": sum,
        "domain": setup.domain.is_some(),
        "partition_level": setup.pou.max_level(),
    });
    Ok(report)
}

/// One random sequence at the largest configured level, synthesized and measured.
pub fn run_synthesize(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    let setup = Setup::new(cfg)?;
    let top = *cfg.synthesis.max_levels.iter().max().ok_or_else(|| config_error("synthesis.max_levels must be nonempty"))?;
    let family = setup.family(cfg, top)?;
    let lambda = setup.draw(cfg, &family, 0)?;
    let (a, b, f) = setup.norms(cfg, &family, &lambda)?;
    let mut report = Report::new("synthesize", cfg)?;
    report.hypotheses = setup.hypotheses.clone();
    let row = TrialRow::new(format!("nu_max={top}"), 0, scale_name(setup.scale), a, b);
    let finite = row.ratio.is_finite();
    report.verdicts.push(Verdict::new("finite", finite, format!("function norm {a:e}, sequence norm {b:e}")));
    let coefficients: Vec<_> = lambda.iter().map(|(nu, m, v)| json!({"level": nu, "index": m, "value": v.re})).collect();
    report.summary = json!({
        "coefficients": coefficients,
        "function_norm": a,
        "sequence_norm": b,
        "ratio": row.ratio,
        "sup": f.sup_abs(),
    });
    report.rows.push(row);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_global_run_is_bounded() {
        let cfg = ExperimentConfig::from_json(
            r#"{"trials": 4, "grid": {"dim": 1, "level": 9, "half_width": 2.0}, "synthesis": {"max_levels": [2, 3]}}"#,
        )
        .unwrap();
        let r = run_synthesis_experiment(&cfg).unwrap();
        assert!(r.verdict("bounded").unwrap().pass, "{:?}", r.verdicts);
        assert_eq!(r.rows.len(), 8);
        assert_eq!(r.hypotheses["K"], 1.7);
    }

    #[test]
    fn violated_smoothness_hypothesis_is_quoted() {
        let cfg = ExperimentConfig::from_json(r#"{"weight": {"kind": "classical", "s": 2.0}, "synthesis": {"k": 1.5}}"#).unwrap();
        match run_synthesis_experiment(&cfg) {
            Err(LabError::Config(msg)) => assert!(msg.contains("K > alpha_2"), "{msg}"),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn violated_moment_hypothesis_is_quoted() {
        let cfg = ExperimentConfig::from_json(
            r#"{"p": {"field": {"kind": "constant", "value": 0.5}}, "synthesis": {"l": 0.5}}"#,
        )
        .unwrap();
        match run_synthesis_experiment(&cfg) {
            Err(LabError::Config(msg)) => assert!(msg.contains("L > sigma_p"), "{msg}"),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn single_run_reports_coefficients() {
        let cfg = ExperimentConfig::from_json(r#"{"grid": {"dim": 1, "level": 9, "half_width": 2.0}, "synthesis": {"max_levels": [2]}}"#).unwrap();
        let r = run_synthesize(&cfg).unwrap();
        assert!(r.passed());
        assert!(!r.summary["coefficients"].as_array().unwrap().is_empty());
    }
}
