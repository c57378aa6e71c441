//! Replacing every `chi_Q` in the sequence norm by `chi_E` with
//! `E in d Q`, `|E| >= eps |Q|` changes the norm by a bounded factor.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;
use varspace_core::analysis::{cube_set, sequence_norm_with_sets, CoefficientSequence, LatticeFamily, Scale};
use varspace_core::geometry::Cube;
use varspace_core::norms::Grid;
use varspace_core::sampling::AxisBox;

use super::{allowed, check_trials, fits_grid, require_bounded};
use crate::config::{ExperimentConfig, SetGenerator};
use crate::error::{config_error, LabError};
use crate::random::{random_lambda, trial_rng};
use crate::report::{EquivalenceSummary, Report, TrialRow, Verdict};

type SetMap = BTreeMap<(u32, Vec<i64>), AxisBox>;

pub fn run_qe_experiment(cfg: &ExperimentConfig) -> Result<Report, LabError> {
    check_trials(cfg)?;
    let qe = &cfg.qe;
    if !(qe.eps > 0.0 && qe.eps <= 1.0) {
        return Err(config_error(format!("qe.eps must lie in (0, 1], got {}", qe.eps)));
    }
    if qe.sets == SetGenerator::LeftHalf && qe.eps > 0.5 {
        return Err(config_error(format!("left halves have |E| = |Q|/2 < eps |Q| for eps = {}", qe.eps)));
    }
    if qe.levels.is_empty() || qe.scales.is_empty() {
        return Err(config_error("qe.levels and qe.scales must be nonempty"));
    }
    let grid = cfg.grid()?;
    let (p, q, w) = (cfg.p_field()?, cfg.q_field()?, cfg.weight()?);
    if qe.scales.contains(&Scale::F) {
        require_bounded(&p, &q, "the F scale")?;
    }
    let domain = cfg.regular_domain()?;
    let restricted = domain.is_some();
    let max_level = *qe.levels.iter().max().unwrap_or(&0);
    let family = cfg.lattice_family(max_level, domain.as_ref())?;
    let d = family.dilation();

    let mut report = Report::new("verify-qe", cfg)?;
    report.hypotheses.insert("eps".into(), qe.eps);
    report.hypotheses.insert("b".into(), family.shift_budget());
    report.hypotheses.insert("d".into(), d);

    let jobs: Vec<(u32, usize)> = qe.levels.iter().flat_map(|&nu| (0..cfg.trials).map(move |t| (nu, t))).collect();
    let eligible = |c: &Cube, k| allowed(k, restricted) && fits_grid(c, d, &grid);
    let per_job: Vec<Vec<TrialRow>> = jobs
        .par_iter()
        .map(|&(nu, t)| {
            let mut rng = trial_rng(cfg.seed, ((nu as u64) << 32) | t as u64);
            let lambda = random_lambda(&family, &[nu], cfg.sparsity, restricted, &eligible, &mut rng)?;
            let sets = subsets(&lambda, &family, &grid, qe.sets, qe.eps, &mut rng)?;
            let e_of = |c: &Cube| sets[&(c.level, c.index.clone())].clone();
            qe.scales
                .iter()
                .map(|&scale| {
                    let norm = |set_of: &dyn Fn(&Cube) -> AxisBox| {
                        sequence_norm_with_sets(&lambda, &w, &p, &q, scale, &family, &grid, set_of, domain.as_ref(), cfg.tolerances.norm)
                    };
                    let whole = norm(&cube_set)?;
                    let part = norm(&e_of)?;
                    Ok(TrialRow::new(format!("nu={nu}"), t, scale_name(scale), whole, part))
                })
                .collect()
        })
        .collect::<Result<_, LabError>>()?;
    report.rows = per_job.into_iter().flatten().collect();

    let mut summary = serde_json::Map::new();
    for &scale in &qe.scales {
        let name = scale_name(scale);
        let sum = EquivalenceSummary::of(report.rows.iter().filter(|r| r.scale == name), cfg.tolerances.stability_factor);
        report.verdicts.push(sum.bounded_verdict(&format!("bounded[{name}]")));
        report.verdicts.push(sum.stable_verdict(&format!("stable[{name}]")));
        summary.insert(name.to_string(), serde_json::to_value(&sum)?);
    }
    if qe.sets == SetGenerator::Whole {
        let off = report.rows.iter().filter(|r| r.ratio != 1.0).count();
        report.verdicts.push(Verdict::new("identity", off == 0, format!("{off} trials with ratio != 1")));
    }
    summary.insert("set_generator".into(), json!(qe.sets));
    report.summary = serde_json::Value::Object(summary);
    Ok(report)
}

pub(crate) fn scale_name(scale: Scale) -> &'static str {
    match scale {
        Scale::B => "B",
        Scale::F => "F",
    }
}

/// `E` for every key of `lambda`, each checked against `E in d Q` and
/// `|E| >= eps |Q|` as counted in grid cells.
fn subsets(
    lambda: &CoefficientSequence,
    family: &LatticeFamily,
    grid: &Grid,
    generator: SetGenerator,
    eps: f64,
    rng: &mut impl Rng,
) -> Result<SetMap, LabError> {
    let d = family.dilation();
    let n = grid.dim();
    let h = grid.spacing();
    let mut out = SetMap::new();
    for (nu, m, _) in lambda.iter() {
        let (cube, _) = family.lookup(nu, m)?;
        let set = match generator {
            SetGenerator::Whole => cube_set(cube),
            SetGenerator::LeftHalf => {
                let mut b = cube_set(cube);
                b.hi[0] = cube.center[0];
                b
            }
            SetGenerator::RandomBoxes => {
                let outer = cube.dilated_box(d);
                let cells = (eps.powf(1.0 / n as f64) * cube.side / h - 1e-9).ceil().max(1.0);
                let mut lo = Vec::with_capacity(n);
                let mut hi = Vec::with_capacity(n);
                for a in 0..n {
                    let origin = grid.origin(a);
                    let first = ((outer.lo[a] - origin) / h - 1e-9).ceil();
                    let last = ((outer.hi[a] - origin) / h + 1e-9).floor() - cells;
                    if last < first {
                        return Err(config_error(format!("cube ({nu}, {m:?}) is too small for the grid to hold E")));
                    }
                    let start = rng.gen_range(first as i64..=last as i64) as f64;
                    lo.push(origin + start * h);
                    hi.push(origin + (start + cells) * h);
                }
                AxisBox { lo, hi }
            }
        };
        let outer = cube.dilated_box(d);
        let slack = 1e-12 * cube.side;
        if (0..n).any(|a| set.lo[a] < outer.lo[a] - slack || set.hi[a] > outer.hi[a] + slack) {
            return Err(config_error(format!("set for cube ({nu}, {m:?}) leaves d Q")));
        }
        let measured: f64 = (0..n)
            .map(|a| {
                let (i, j) = grid.index_span(a, set.lo[a], set.hi[a], true);
                (j - i + 1).max(0) as f64 * h
            })
            .product();
        let target = eps * cube.side.powi(n as i32);
        if measured < target * (1.0 - 1e-9) {
            return Err(config_error(format!(
                "set for cube ({nu}, {m:?}) has |E| = {measured} < eps |Q| = {target} on this grid"
            )));
        }
        out.insert((nu, m.to_vec()), set);
    }
    Ok(out)
}
