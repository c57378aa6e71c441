//! Admissible weight sequences `w = (w_j)` and the audit of their two
//! defining conditions.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponents::{audit_pairs, field_bounds, log_holder_audit, LogHolderOptions, LogHolderReport, RealField};
use crate::sampling::{dist2, SampleBox};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Classical,
    VariableSmoothness,
    Generalized,
    Custom,
}

type CustomFn = Arc<dyn Fn(u32, &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Evaluator {
    Classical { s: f64 },
    Smoothness { s: RealField },
    Generalized { sigma: Vec<f64> },
    Custom(CustomFn),
}

/// A weight sequence together with its declared class parameters
/// `(alpha, alpha1, alpha2)`.
#[derive(Clone)]
pub struct WeightSequence {
    eval: Evaluator,
    kind: WeightKind,
    alpha: f64,
    alpha1: f64,
    alpha2: f64,
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSequence")
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("alpha1", &self.alpha1)
            .field("alpha2", &self.alpha2)
            .finish()
    }
}

impl WeightSequence {
    fn declared(eval: Evaluator, kind: WeightKind, alpha: f64, alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(invalid(format!("declared alpha must be >= 0, got {alpha}")));
        }
        if !(alpha1 <= alpha2) {
            return Err(invalid(format!("declared alpha1 = {alpha1} exceeds alpha2 = {alpha2}")));
        }
        Ok(Self { eval, kind, alpha, alpha1, alpha2 })
    }

    /// Arbitrary evaluator with declared parameters; positivity is only
    /// checked by [`check_admissible`].
    pub fn custom(
        f: impl Fn(u32, &[f64]) -> f64 + Send + Sync + 'static,
        alpha: f64,
        alpha1: f64,
        alpha2: f64,
    ) -> Result<Self> {
        Self::declared(Evaluator::Custom(Arc::new(f)), WeightKind::Custom, alpha, alpha1, alpha2)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn value(&self, level: u32, x: &[f64]) -> f64 {
        match &self.eval {
            Evaluator::Classical { s } => (level as f64 * s).exp2(),
            Evaluator::Smoothness { s } => (level as f64 * s.eval(x)).exp2(),
            Evaluator::Generalized { sigma } => {
                let j = level as usize;
                if j < sigma.len() {
                    sigma[j]
                } else {
                    // Geometric continuation with the last stored ratio.
                    let last = sigma[sigma.len() - 1];
                    let ratio = if sigma.len() >= 2 { last / sigma[sigma.len() - 2] } else { 1.0 };
                    last * ratio.powi((j + 1 - sigma.len()) as i32)
                }
            }
            Evaluator::Custom(f) => f(level, x),
        }
    }
}

/// `w_j(x) = 2^{js}`, declared `(0, s, s)`.
pub fn weight_classical(s: f64) -> WeightSequence {
    WeightSequence { eval: Evaluator::Classical { s }, kind: WeightKind::Classical, alpha: 0.0, alpha1: s, alpha2: s }
}

/// `w_j(x) = 2^{j s(x)}` with `alpha = c_log(s)` measured on `samples`,
/// `alpha1 = s_minus`, `alpha2 = s_plus`. A constant field yields the
/// classical sequence.
///
/// With `alpha = c_log(s)` condition (i) holds with constant `e^{c_log(s)}`:
/// for `t = 2^j |x - y|` one has `j |s(x) - s(y)| ln 2 <= c_log ln(1 + t) + c_log`.
pub fn weight_from_smoothness(
    s: RealField,
    samples: &SampleBox,
    threshold: f64,
) -> Result<(WeightSequence, LogHolderReport)> {
    let (s_minus, s_plus) = field_bounds(&s, samples)?;
    if !s_minus.is_finite() || !s_plus.is_finite() {
        return Err(invalid("smoothness field must have finite bounds"));
    }
    let pairs = audit_pairs(samples, 40);
    let opts = LogHolderOptions { local_threshold: threshold, global_threshold: f64::INFINITY, g_infinity: None };
    let report = log_holder_audit(&s, &pairs, &opts)?;
    if !report.passes_local {
        return Err(Error::Construction(format!(
            "smoothness field is not locally log-Hoelder within {threshold}: observed c_log = {:.4} at pair {:?}",
            report.c_log_local, report.worst_pair
        )));
    }
    if let Some(v) = s.as_constant() {
        return Ok((weight_classical(v), report));
    }
    let w = WeightSequence::declared(
        Evaluator::Smoothness { s },
        WeightKind::VariableSmoothness,
        report.c_log_local,
        s_minus,
        s_plus,
    )?;
    Ok((w, report))
}

/// x-independent `w_j = sigma_j` with `d0 sigma_j <= sigma_{j+1} <= d1 sigma_j`;
/// declared `(0, log2 d0, log2 d1)`.
pub fn weight_generalized(sigma: Vec<f64>, d0: f64, d1: f64) -> Result<WeightSequence> {
    if sigma.is_empty() {
        return Err(invalid("sigma must be nonempty"));
    }
    if let Some(j) = sigma.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(invalid(format!("sigma_{j} = {} is not a positive real", sigma[j])));
    }
    if !(d0 > 0.0 && d0 <= d1) {
        return Err(invalid("need 0 < d0 <= d1"));
    }
    let slack = 1e-12;
    for j in 0..sigma.len() - 1 {
        let r = sigma[j + 1] / sigma[j];
        if r < d0 * (1.0 - slack) || r > d1 * (1.0 + slack) {
            return Err(invalid(format!("ratio sigma_{}/sigma_{j} = {r} outside [{d0}, {d1}]", j + 1)));
        }
    }
    WeightSequence::declared(Evaluator::Generalized { sigma }, WeightKind::Generalized, 0.0, d0.log2(), d1.log2())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityOptions {
    pub max_level: u32,
    pub c_cap: f64,
    /// Near-diagonal random pairs per level at separation about `2^-j`.
    pub random_pairs_per_level: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub cond_i_pass: bool,
    pub cond_i_worst_constant: f64,
    pub cond_i_worst_witness: Option<(u32, Vec<f64>, Vec<f64>)>,
    pub cond_ii_pass: bool,
    pub cond_ii_worst_pair: Option<(u32, Vec<f64>)>,
    /// Level ratio `w_{j+1}/w_j` at the worst witness.
    pub cond_ii_worst_ratio: Option<f64>,
    pub levels_checked: u32,
    pub samples_checked: usize,
}

pub fn check_admissible(w: &WeightSequence, samples: &SampleBox, max_level: u32, c_cap: f64) -> Result<AdmissibilityReport> {
    let opts = AdmissibilityOptions { max_level, c_cap, random_pairs_per_level: 512, seed: 0x7765_6967 };
    check_admissible_with(w, samples, &opts)
}

pub fn check_admissible_with(w: &WeightSequence, samples: &SampleBox, opts: &AdmissibilityOptions) -> Result<AdmissibilityReport> {
    if opts.max_level < 1 {
        return Err(invalid("max_level must be at least 1"));
    }
    if !(opts.c_cap > 0.0) {
        return Err(invalid("c_cap must be positive"));
    }
    let points: Vec<Vec<f64>> = samples.points().collect();
    let n = samples.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // Every weight value used below, indexed [level][point]; also the positivity check.
    let positive = |j: u32, x: &[f64]| -> Result<f64> {
        let v = w.value(j, x);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Data(format!("weight w_{j}({x:?}) = {v} is not a positive real")))
        }
    };

    let mut worst_c = 1.0f64;
    let mut worst_i = None;
    let mut worst_ii_margin = f64::NEG_INFINITY;
    let mut worst_ii = None;
    let mut worst_ii_ratio = None;
    let lo = 2f64.powf(w.alpha1);
    let hi = 2f64.powf(w.alpha2);
    let rel = 1e-12;

    for j in 0..=opts.max_level {
        let vals: Vec<f64> = points.iter().map(|x| positive(j, x)).collect::<Result<_>>()?;
        let scale = (j as f64).exp2();
        let mut consider = |x: &[f64], y: &[f64], wx: f64, wy: f64| {
            let c = wx / (wy * (1.0 + scale * dist2(x, y)).powf(w.alpha));
            if c > worst_c {
                worst_c = c;
                worst_i = Some((j, x.to_vec(), y.to_vec()));
            }
        };
        for (a, x) in points.iter().enumerate() {
            for (b, y) in points.iter().enumerate() {
                if a != b {
                    consider(x, y, vals[a], vals[b]);
                }
            }
        }
        for _ in 0..opts.random_pairs_per_level {
            let x = &points[rng.gen_range(0..points.len())];
            let y: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(axis, v)| {
                    let t = v + rng.gen_range(-1.0..1.0) / scale;
                    t.clamp(samples.bounds.lo[axis], samples.bounds.hi[axis])
                })
                .collect();
            if y.len() != n || dist2(x, &y) == 0.0 {
                continue;
            }
            let (wx, wy) = (positive(j, x)?, positive(j, &y)?);
            consider(x, &y, wx, wy);
            consider(&y, x, wy, wx);
        }
        if j < opts.max_level {
            for (a, x) in points.iter().enumerate() {
                let next = positive(j + 1, x)?;
                let ratio = next / vals[a];
                // Positive margin means the two-sided bound is violated.
                let margin = (lo / ratio - 1.0).max(ratio / hi - 1.0);
                if margin > worst_ii_margin {
                    worst_ii_margin = margin;
                    worst_ii = Some((j, x.clone()));
                    worst_ii_ratio = Some(ratio);
                }
            }
        }
    }
    Ok(AdmissibilityReport {
        cond_i_pass: worst_c <= opts.c_cap * (1.0 + rel),
        cond_i_worst_constant: worst_c,
        cond_i_worst_witness: worst_i,
        cond_ii_pass: worst_ii_margin <= rel,
        cond_ii_worst_pair: worst_ii,
        cond_ii_worst_ratio: worst_ii_ratio,
        levels_checked: opts.max_level + 1,
        samples_checked: points.len(),
    })
}
