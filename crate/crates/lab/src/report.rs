//! Run reports: provenance, enforced hypotheses, verdicts and per-trial rows.
//!
//! Serialization order is fixed by the struct layouts and `BTreeMap`s, so a
//! report is a pure function of the config.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::LabError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    /// SHA-256 of the config re-serialized with every default filled in.
    pub config_sha256: String,
    pub core_version: String,
    pub lab_version: String,
    pub seed: u64,
}

impl Provenance {
    pub fn of(cfg: &ExperimentConfig) -> Result<Self, LabError> {
        let canonical = serde_json::to_vec(cfg)?;
        Ok(Self {
            config_sha256: hex::encode(Sha256::digest(&canonical)),
            core_version: varspace_core::VERSION.to_string(),
            lab_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// One CSV line. `group` names the sweep bucket (level, resolution, ...).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub group: String,
    pub trial: usize,
    pub scale: String,
    pub norm_a: f64,
    pub norm_b: f64,
    pub ratio: f64,
}

impl TrialRow {
    /// `ratio = norm_a / norm_b`, NaN when both vanish (the trial is skipped).
    pub fn new(group: impl Into<String>, trial: usize, scale: impl Into<String>, norm_a: f64, norm_b: f64) -> Self {
        let ratio = if norm_a == 0.0 && norm_b == 0.0 { f64::NAN } else { norm_a / norm_b };
        Self { group: group.into(), trial, scale: scale.into(), norm_a, norm_b, ratio }
    }

    pub fn skipped(&self) -> bool {
        self.ratio.is_nan()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub provenance: Provenance,
    /// Quantities the run checked before starting, such as `K`, `alpha_2`.
    pub hypotheses: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
    pub verdicts: Vec<Verdict>,
    pub summary: serde_json::Value,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

impl Report {
    pub fn new(experiment: &str, cfg: &ExperimentConfig) -> Result<Self, LabError> {
        Ok(Self {
            experiment: experiment.to_string(),
            provenance: Provenance::of(cfg)?,
            hypotheses: BTreeMap::new(),
            config: cfg.clone(),
            verdicts: Vec::new(),
            summary: serde_json::Value::Null,
            rows: Vec::new(),
        })
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn to_json(&self) -> Result<String, LabError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Ratio statistics over the non-skipped trials of one group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupStats {
    pub trials: usize,
    pub skipped: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl GroupStats {
    pub fn of(ratios: &[f64]) -> Self {
        let mut kept: Vec<f64> = ratios.iter().copied().filter(|r| !r.is_nan()).collect();
        kept.sort_by(f64::total_cmp);
        let skipped = ratios.len() - kept.len();
        let (min, median, max) = match kept.len() {
            0 => (f64::NAN, f64::NAN, f64::NAN),
            k => {
                let median = if k % 2 == 1 { kept[k / 2] } else { 0.5 * (kept[k / 2 - 1] + kept[k / 2]) };
                (kept[0], median, kept[k - 1])
            }
        };
        Self { trials: ratios.len(), skipped, min, median, max }
    }

    pub fn finite(&self) -> bool {
        self.trials > self.skipped && self.min.is_finite() && self.max.is_finite() && self.min > 0.0
    }
}

/// Per-group statistics of one ratio band plus its stability across groups.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceSummary {
    pub groups: BTreeMap<String, GroupStats>,
    /// Largest group maximum over the smallest group maximum.
    pub upper_spread: f64,
    pub all_finite: bool,
    pub factor: f64,
    pub stable: bool,
}

impl EquivalenceSummary {
    /// Rows are grouped by `row.group`; `factor` bounds the upper spread.
    pub fn of<'a>(rows: impl IntoIterator<Item = &'a TrialRow>, factor: f64) -> Self {
        let mut by_group: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in rows {
            by_group.entry(r.group.clone()).or_default().push(r.ratio);
        }
        let groups: BTreeMap<String, GroupStats> = by_group.iter().map(|(g, v)| (g.clone(), GroupStats::of(v))).collect();
        let all_finite = !groups.is_empty() && groups.values().all(GroupStats::finite);
        let upper_spread = if all_finite {
            let hi = groups.values().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max);
            let lo = groups.values().map(|s| s.max).fold(f64::INFINITY, f64::min);
            hi / lo
        } else {
            f64::NAN
        };
        Self { groups, upper_spread, all_finite, factor, stable: all_finite && upper_spread <= factor }
    }

    /// Ratios are finite and positive in every group.
    pub fn bounded_verdict(&self, name: &str) -> Verdict {
        let detail = self
            .groups
            .iter()
            .map(|(g, s)| format!("{g}: [{:.6e}, {:.6e}]", s.min, s.max))
            .collect::<Vec<_>>()
            .join("; ");
        Verdict::new(name, self.all_finite, detail)
    }

    pub fn stable_verdict(&self, name: &str) -> Verdict {
        Verdict::new(name, self.stable, format!("upper spread {:.6} against factor {}", self.upper_spread, self.factor))
    }
}
