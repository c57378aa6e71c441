//! JSON experiment configuration and its resolution into core objects.
//!
//! Every section has defaults, so a config only names what it changes.
//! Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use varspace_core::analysis::{LatticeFamily, Scale};
use varspace_core::atoms::TestFunction;
use varspace_core::exponents::{ExponentField, FieldSpec, RealField};
use varspace_core::geometry::{check_mr, parse_pbm, shapes, RasterDomain, DEFAULT_SHIFT_BUDGET, DOMAIN_SHIFT_BUDGET};
use varspace_core::norms::Grid;
use varspace_core::sampling::{AxisBox, SampleBox};
use varspace_core::weights::{weight_classical, weight_from_smoothness, weight_generalized, WeightSequence};

use crate::error::{config_error, LabError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional label; when present it must match the subcommand.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub lattice: LatticeSpec,
    #[serde(default = "ExponentSpec::two")]
    pub p: ExponentSpec,
    #[serde(default = "ExponentSpec::two")]
    pub q: ExponentSpec,
    #[serde(default)]
    pub weight: WeightSpec,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Probability that a given cube carries a random coefficient.
    #[serde(default = "default_sparsity")]
    pub sparsity: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub qe: QeSpec,
    #[serde(default)]
    pub synthesis: SynthesisSpec,
    #[serde(default)]
    pub convolution: ConvolutionSpec,
    #[serde(default)]
    pub audit: AuditSpec,
    #[serde(default)]
    pub weight_audit: WeightAuditSpec,
    #[serde(default)]
    pub norm: NormSpec,
}

fn default_trials() -> usize {
    100
}

fn default_sparsity() -> f64 {
    0.1
}

/// `center + [-half_width, half_width)^dim` with `2^level` cells per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub level: u32,
    pub half_width: f64,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { dim: 1, level: 10, half_width: 2.0, center: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    /// Shift budget; defaults to 1/2 on R^n and to the domain budget otherwise.
    #[serde(default)]
    pub b: Option<f64>,
    pub d: f64,
    pub max_level: u32,
    /// Cube centres are drawn from this box; defaults to `[-1, 1]^n`.
    #[serde(default)]
    pub region: Option<AxisBox>,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self { b: None, d: 2.0, max_level: 4, region: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSpec {
    pub field: FieldSpec,
    /// Box on which the exponent is infinite.
    #[serde(default)]
    pub infinity: Option<AxisBox>,
}

impl ExponentSpec {
    pub fn two() -> Self {
        Self::constant(2.0)
    }

    pub fn constant(value: f64) -> Self {
        Self { field: FieldSpec::Constant { value }, infinity: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Classical {
        s: f64,
    },
    Smoothness {
        s: FieldSpec,
        #[serde(default = "default_log_threshold")]
        threshold: f64,
    },
    Generalized {
        sigma: Vec<f64>,
        d0: f64,
        d1: f64,
    },
}

fn default_log_threshold() -> f64 {
    10.0
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self::Classical { s: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: ShapeSpec,
    /// Pixels have side `2^-level`.
    pub level: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    UnitSquare,
    LHexomino,
    Disk { radius: f64 },
    SlitSquare,
    Carpet { depth: u32 },
    Cusp,
    NotchedSquare,
    Pbm { path: PathBuf, origin: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of every Luxemburg-type root solve.
    pub norm: f64,
    /// Largest allowed ratio between the upper band edges of any two groups.
    pub stability_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { norm: 1e-10, stability_factor: 4.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetGenerator {
    /// `E = Q`.
    Whole,
    /// The half of `Q` below its centre on the first axis.
    LeftHalf,
    /// A grid-aligned box of volume at least `eps |Q|` placed at random in `d Q`.
    RandomBoxes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QeSpec {
    pub eps: f64,
    pub sets: SetGenerator,
    pub levels: Vec<u32>,
    pub scales: Vec<Scale>,
}

impl Default for QeSpec {
    fn default() -> Self {
        Self { eps: 0.5, sets: SetGenerator::LeftHalf, levels: vec![0, 1, 2, 3, 4], scales: vec![Scale::B, Scale::F] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisSpec {
    pub k: f64,
    pub l: f64,
    pub max_levels: Vec<u32>,
    pub scale: Scale,
    /// Highest Littlewood-Paley level; defaults to the largest the grid resolves.
    #[serde(default)]
    pub partition_level: Option<u32>,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        Self { k: 1.7, l: 1.0, max_levels: vec![3, 4, 5], scale: Scale::B, partition_level: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvolutionSpec {
    /// Kernel decay; defaults to one above the threshold of the chosen scale.
    #[serde(default)]
    pub r: Option<f64>,
    pub scale: Scale,
    /// Grid levels to compare.
    pub resolutions: Vec<u32>,
    /// Sequences have levels `0..=levels`.
    pub levels: u32,
    pub stability_factor: f64,
}

impl Default for ConvolutionSpec {
    fn default() -> Self {
        Self { r: None, scale: Scale::B, resolutions: vec![8, 9, 10], levels: 4, stability_factor: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSpec {
    /// Raster levels to audit; empty means the domain's own level.
    pub levels: Vec<i32>,
    /// Cube sides `1, 1/2, ..., 2^-sides_max_level`.
    pub sides_max_level: u32,
    pub floor: f64,
}

impl Default for AuditSpec {
    fn default() -> Self {
        Self { levels: Vec::new(), sides_max_level: 4, floor: varspace_core::geometry::DEFAULT_FLOOR }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightAuditSpec {
    /// Defaults to `[-1, 1]^n`.
    #[serde(default)]
    pub region: Option<AxisBox>,
    pub samples_per_axis: usize,
    pub max_level: u32,
    pub c_cap: f64,
}

impl Default for WeightAuditSpec {
    fn default() -> Self {
        Self { region: None, samples_per_axis: 33, max_level: 8, c_cap: 1e3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Luxemburg,
    Besov,
    Triebel,
    Holder,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormSpec {
    pub function: TestFunction,
    pub kind: NormKind,
    /// Hoelder index for `kind = holder`.
    #[serde(default)]
    pub smoothness: f64,
    #[serde(default)]
    pub partition_level: Option<u32>,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self { function: TestFunction::Gaussian { center: vec![0.0], width: 0.25 }, kind: NormKind::Luxemburg, smoothness: 0.0, partition_level: None }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| config_error(format!("cannot parse config: {e}")))
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn grid(&self) -> Result<Grid, LabError> {
        self.grid_at(self.grid.level)
    }

    /// The configured grid box with `2^level` cells per axis.
    pub fn grid_at(&self, level: u32) -> Result<Grid, LabError> {
        let center = self.grid.center.clone().unwrap_or_else(|| vec![0.0; self.grid.dim]);
        Ok(Grid::with_center(self.grid.dim, level, self.grid.half_width, center)?)
    }

    /// Uniform samples of the grid box, used for exponent bounds and `c_log`.
    pub fn working_samples(&self) -> Result<SampleBox, LabError> {
        let grid = self.grid()?;
        let lo: Vec<f64> = (0..grid.dim()).map(|a| grid.origin(a)).collect();
        let hi: Vec<f64> = lo.iter().map(|o| o + 2.0 * grid.half_width()).collect();
        let per_axis = if grid.dim() == 1 { 129 } else { 17 };
        Ok(SampleBox::new(AxisBox::new(lo, hi)?, per_axis)?)
    }

    pub fn exponent(&self, spec: &ExponentSpec) -> Result<ExponentField, LabError> {
        let field = RealField::new(self.dim(), spec.field.clone())?;
        Ok(ExponentField::new(field, spec.infinity.clone(), &self.working_samples()?)?)
    }

    pub fn p_field(&self) -> Result<ExponentField, LabError> {
        self.exponent(&self.p)
    }

    pub fn q_field(&self) -> Result<ExponentField, LabError> {
        self.exponent(&self.q)
    }

    pub fn weight(&self) -> Result<WeightSequence, LabError> {
        Ok(match &self.weight {
            WeightSpec::Classical { s } => weight_classical(*s),
            WeightSpec::Smoothness { s, threshold } => {
                let field = RealField::new(self.dim(), s.clone())?;
                weight_from_smoothness(field, &self.working_samples()?, *threshold)?.0
            }
            WeightSpec::Generalized { sigma, d0, d1 } => weight_generalized(sigma.clone(), *d0, *d1)?,
        })
    }

    pub fn region(&self) -> Result<AxisBox, LabError> {
        match &self.lattice.region {
            Some(r) if r.dim() != self.dim() => Err(config_error("lattice region dimension differs from the grid")),
            Some(r) => Ok(r.clone()),
            None => Ok(AxisBox::cube(self.dim(), -1.0, 1.0)?),
        }
    }

    pub fn domain(&self) -> Result<Option<RasterDomain>, LabError> {
        self.domain.as_ref().map(|d| self.domain_at(d, d.level)).transpose()
    }

    pub fn domain_at(&self, spec: &DomainSpec, level: i32) -> Result<RasterDomain, LabError> {
        let dom = match &spec.shape {
            ShapeSpec::UnitSquare => shapes::unit_square(self.dim(), level)?,
            ShapeSpec::LHexomino => shapes::l_hexomino(level)?,
            ShapeSpec::Disk { radius } => shapes::disk(level, *radius)?,
            ShapeSpec::SlitSquare => shapes::slit_square(level)?,
            ShapeSpec::Carpet { depth } => shapes::carpet(level, *depth)?,
            ShapeSpec::Cusp => shapes::cusp(level)?,
            ShapeSpec::NotchedSquare => shapes::notched_square(level)?,
            ShapeSpec::Pbm { path, origin } => {
                let bytes = std::fs::read(path)?;
                parse_pbm(&bytes, *origin, level)?
            }
        };
        if dom.dim() != self.dim() {
            return Err(config_error(format!("domain has dimension {}, grid has {}", dom.dim(), self.dim())));
        }
        Ok(dom)
    }

    /// The domain, refused unless it is MR at pixel scale.
    pub fn regular_domain(&self) -> Result<Option<RasterDomain>, LabError> {
        let dom = self.domain()?;
        if let Some(d) = &dom {
            if !check_mr(d) {
                return Err(config_error("domain fails the MR check; run audit-domain for details"));
            }
        }
        Ok(dom)
    }

    pub fn shift_budget(&self, with_domain: bool) -> f64 {
        match self.lattice.b {
            Some(b) => b,
            None if with_domain => DOMAIN_SHIFT_BUDGET,
            None => DEFAULT_SHIFT_BUDGET,
        }
    }

    pub fn lattice_family(&self, max_level: u32, domain: Option<&RasterDomain>) -> Result<LatticeFamily, LabError> {
        let b = self.shift_budget(domain.is_some());
        Ok(LatticeFamily::build(max_level, b, self.lattice.d, &self.region()?, domain)?)
    }
}

/// Largest `J` with `2^{J+1}` at most the grid's Nyquist frequency.
pub fn resolvable_partition_level(grid: &Grid) -> Result<u32, LabError> {
    let top = grid.nyquist().log2().floor() - 1.0;
    if top < 1.0 {
        return Err(config_error("grid too coarse for a Littlewood-Paley partition"));
    }
    Ok(top as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.grid, GridSpec::default());
        assert_eq!(resolvable_partition_level(&cfg.grid().unwrap()).unwrap(), 6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"trails": 3}"#).is_err());
    }

    #[test]
    fn nested_specs_parse() {
        let cfg = ExperimentConfig::from_json(
            r#"{"p": {"field": {"kind": "sinusoidal", "base": 1.5, "amplitude": 1.0, "frequency": [1.0, 1.0]}},
                "weight": {"kind": "smoothness", "s": {"kind": "constant", "value": 0.5}},
                "domain": {"shape": {"kind": "unit_square"}, "level": 6},
                "grid": {"dim": 2, "level": 6, "half_width": 1.0}}"#,
        )
        .unwrap();
        assert!((cfg.p_field().unwrap().p_plus() - 2.5).abs() < 1e-2);
        assert!(cfg.regular_domain().unwrap().is_some());
        assert_eq!(cfg.weight().unwrap().alpha2(), 0.5);
    }
}
