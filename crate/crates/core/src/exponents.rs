//! Variable exponents p(.) and q(.), their essential bounds, log-Hoelder
//! diagnostics and the derived indices sigma_p and sigma_{p,q}.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sampling::{dist2, norm2, AxisBox, SampleBox};

/// Anything that can be evaluated pointwise on R^n to a real number.
pub trait ScalarField: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

/// Built-in closed-form real fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Constant {
        value: f64,
    },
    /// `base + slope . x`, clamped to `[min, max]`.
    AffineClamped {
        base: f64,
        slope: Vec<f64>,
        min: f64,
        max: f64,
    },
    /// `base + amplitude * sin^2(frequency . x)`.
    Sinusoidal {
        base: f64,
        amplitude: f64,
        frequency: Vec<f64>,
    },
    /// `left` below `center` on `axis`, `right` above, joined by a cubic
    /// smoothstep of the given width. Width 0 is a hard jump with `right`
    /// taken at the jump itself.
    SmoothedStep {
        left: f64,
        right: f64,
        center: f64,
        width: f64,
        #[serde(default)]
        axis: usize,
    },
    /// `base + amplitude / ln(e + 1/|x - center|)`, equal to `base` at `center`.
    /// Log-Hoelder continuous but not Hoelder continuous of any order.
    LogHolderCritical {
        base: f64,
        amplitude: f64,
        center: Vec<f64>,
    },
}

/// A validated closed-form real field on R^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealField {
    dim: usize,
    spec: FieldSpec,
}

impl RealField {
    pub fn new(dim: usize, spec: FieldSpec) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("field dimension must be positive"));
        }
        let check_len = |v: &Vec<f64>, what: &str| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(invalid(format!("{what} has length {} but the field lives in dimension {dim}", v.len())))
            }
        };
        match &spec {
            FieldSpec::Constant { value } => {
                if value.is_nan() {
                    return Err(invalid("constant field value is NaN"));
                }
            }
            FieldSpec::AffineClamped { slope, min, max, .. } => {
                check_len(slope, "slope")?;
                if min > max {
                    return Err(invalid("affine clamp needs min <= max"));
                }
            }
            FieldSpec::Sinusoidal { frequency, .. } => check_len(frequency, "frequency")?,
            FieldSpec::SmoothedStep { width, axis, .. } => {
                if *width < 0.0 {
                    return Err(invalid("step width must be nonnegative"));
                }
                if *axis >= dim {
                    return Err(invalid(format!("step axis {axis} out of range for dimension {dim}")));
                }
            }
            FieldSpec::LogHolderCritical { center, .. } => check_len(center, "center")?,
        }
        Ok(Self { dim, spec })
    }

    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::new(dim, FieldSpec::Constant { value })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.spec {
            FieldSpec::Constant { value } => Some(value),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.spec {
            FieldSpec::Constant { value } => *value,
            FieldSpec::AffineClamped { base, slope, min, max } => {
                let v = base + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                v.clamp(*min, *max)
            }
            FieldSpec::Sinusoidal { base, amplitude, frequency } => {
                let phase: f64 = frequency.iter().zip(x).map(|(a, b)| a * b).sum();
                let s = phase.sin();
                base + amplitude * s * s
            }
            FieldSpec::SmoothedStep { left, right, center, width, axis } => {
                let t = x[*axis] - center;
                if *width == 0.0 {
                    return if t < 0.0 { *left } else { *right };
                }
                let u = (t / width + 0.5).clamp(0.0, 1.0);
                let ramp = u * u * (3.0 - 2.0 * u);
                left + (right - left) * ramp
            }
            FieldSpec::LogHolderCritical { base, amplitude, center } => {
                let r = dist2(x, center);
                if r == 0.0 {
                    *base
                } else {
                    base + amplitude / (E + 1.0 / r).ln()
                }
            }
        }
    }
}

impl ScalarField for RealField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

/// Min and max of a real field over a sample set.
pub fn field_bounds(field: &dyn ScalarField, samples: &SampleBox) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(invalid("empty sample set"));
    }
    if samples.dim() != field.dim() {
        return Err(invalid("sample box and field dimensions differ"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in samples.points() {
        let v = field.value(&x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// A variable exponent with values in (0, infinity]; the set where it is
/// infinite is an explicit box mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentField {
    field: RealField,
    infinity: Option<AxisBox>,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentField {
    /// Validates the field on `working` and caches its bounds there.
    pub fn new(field: RealField, infinity: Option<AxisBox>, working: &SampleBox) -> Result<Self> {
        if let Some(mask) = &infinity {
            if mask.dim() != field.dim {
                return Err(invalid("infinity mask dimension differs from the field"));
            }
        }
        let (p_minus, p_plus) = masked_bounds(&field, infinity.as_ref(), working)?;
        Self::finish(field, infinity, p_minus, p_plus)
    }

    /// A constant exponent; `f64::INFINITY` gives p = infinity everywhere.
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        if value == f64::INFINITY {
            let field = RealField::constant(dim, 1.0)?;
            return Self::finish(field, Some(AxisBox::everything(dim)), f64::INFINITY, f64::INFINITY);
        }
        Self::finish(RealField::constant(dim, value)?, None, value, value)
    }

    fn finish(field: RealField, infinity: Option<AxisBox>, p_minus: f64, p_plus: f64) -> Result<Self> {
        if !(p_minus > 0.0) {
            return Err(invalid(format!("exponent must be bounded away from zero, got p_minus = {p_minus}")));
        }
        Ok(Self { field, infinity, p_minus, p_plus })
    }

    pub fn dim(&self) -> usize {
        self.field.dim
    }

    pub fn field(&self) -> &RealField {
        &self.field
    }

    pub fn infinity_mask(&self) -> Option<&AxisBox> {
        self.infinity.as_ref()
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// `None` where the exponent is infinite.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        match &self.infinity {
            Some(mask) if mask.contains(x) => None,
            _ => Some(self.field.eval(x)),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match &self.infinity {
            None => self.field.as_constant(),
            Some(mask) if mask.lo.iter().all(|v| *v == f64::NEG_INFINITY) && mask.hi.iter().all(|v| *v == f64::INFINITY) => {
                Some(f64::INFINITY)
            }
            Some(_) => None,
        }
    }
}

impl ScalarField for ExponentField {
    fn dim(&self) -> usize {
        self.field.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).unwrap_or(f64::INFINITY)
    }
}

/// `1/p`, with `1/infinity = 0`; the field audited for membership in the
/// log-Hoelder exponent class.
pub struct Reciprocal<'a>(pub &'a ExponentField);

impl ScalarField for Reciprocal<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.eval(x).map_or(0.0, |p| 1.0 / p)
    }
}

fn masked_bounds(field: &RealField, mask: Option<&AxisBox>, samples: &SampleBox) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(invalid("empty sample set"));
    }
    if samples.dim() != field.dim {
        return Err(invalid("sample box and field dimensions differ"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in samples.points() {
        if mask.is_some_and(|m| m.contains(&x)) {
            hi = f64::INFINITY;
            continue;
        }
        let v = field.eval(&x);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// `(p_minus, p_plus)` over the sample set; `p_plus` is infinite when the
/// mask hits any sample.
pub fn exponent_bounds(field: &ExponentField, samples: &SampleBox) -> Result<(f64, f64)> {
    masked_bounds(&field.field, field.infinity.as_ref(), samples)
}

/// Thresholds for the log-Hoelder verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHolderOptions {
    pub local_threshold: f64,
    pub global_threshold: f64,
    /// Candidate limit at infinity; when absent the value at the sampled
    /// point farthest from the origin is used.
    pub g_infinity: Option<f64>,
}

impl Default for LogHolderOptions {
    fn default() -> Self {
        Self { local_threshold: 10.0, global_threshold: 10.0, g_infinity: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHolderReport {
    pub c_log_local: f64,
    pub c_log_at_infinity: f64,
    pub g_infinity: f64,
    pub passes_local: bool,
    pub passes_global: bool,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
}

/// Observed log-Hoelder constants of `field` over the given pairs.
///
/// To audit an exponent p for the class where `1/p` is log-Hoelder, pass
/// [`Reciprocal`] rather than p itself.
pub fn log_holder_audit(
    field: &dyn ScalarField,
    pairs: &[(Vec<f64>, Vec<f64>)],
    opts: &LogHolderOptions,
) -> Result<LogHolderReport> {
    let n = field.dim();
    let mut c_local = 0.0f64;
    let mut worst = None;
    let mut far_point: Option<(&[f64], f64)> = None;
    for (x, y) in pairs {
        if x.len() != n || y.len() != n {
            return Err(invalid("pair dimension differs from the field"));
        }
        let r = dist2(x, y);
        if r == 0.0 {
            return Err(invalid(format!("coincident pair at {x:?}")));
        }
        let q = (field.value(x) - field.value(y)).abs() * (E + 1.0 / r).ln();
        if worst.is_none() || q > c_local {
            c_local = c_local.max(q);
            worst = Some((x.clone(), y.clone()));
        }
        for p in [x, y] {
            let m = norm2(p);
            if far_point.map_or(true, |(_, best)| m > best) {
                far_point = Some((p, m));
            }
        }
    }
    let g_inf = match (opts.g_infinity, far_point) {
        (Some(g), _) => g,
        (None, Some((p, _))) => field.value(p),
        (None, None) => 0.0,
    };
    let mut c_inf = 0.0f64;
    for (x, y) in pairs {
        for p in [x, y] {
            c_inf = c_inf.max((field.value(p) - g_inf).abs() * (E + norm2(p)).ln());
        }
    }
    let passes_local = c_local <= opts.local_threshold;
    Ok(LogHolderReport {
        c_log_local: c_local,
        c_log_at_infinity: c_inf,
        g_infinity: g_inf,
        passes_local,
        passes_global: passes_local && c_inf <= opts.global_threshold,
        worst_pair: worst,
    })
}

/// Pairs at every sample point and every scale `spacing * 2^-k`, `k <= finest`,
/// along each axis: both the symmetric pair straddling the sample and the
/// pair anchored at it.
pub fn multiscale_pairs(samples: &SampleBox, finest: u32) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = samples.dim();
    let h0 = samples.spacing();
    let mut out = Vec::with_capacity(samples.len() * (finest as usize + 1) * n * 2);
    for x in samples.points() {
        for k in 0..=finest {
            let h = h0 * 0.5f64.powi(k as i32);
            for axis in 0..n {
                let mut lo = x.clone();
                let mut hi = x.clone();
                lo[axis] -= 0.5 * h;
                hi[axis] += 0.5 * h;
                if lo != hi {
                    out.push((lo, hi));
                }
                let mut step = x.clone();
                step[axis] += h;
                if step != x {
                    out.push((x.clone(), step));
                }
            }
        }
    }
    out
}

/// Every unordered pair of distinct sample points.
pub fn sample_pairs(samples: &SampleBox) -> Vec<(Vec<f64>, Vec<f64>)> {
    let pts: Vec<Vec<f64>> = samples.points().collect();
    let mut out = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
    for (i, x) in pts.iter().enumerate() {
        for y in &pts[i + 1..] {
            out.push((x.clone(), y.clone()));
        }
    }
    out
}

/// Far pairs from [`sample_pairs`] together with the [`multiscale_pairs`].
pub fn audit_pairs(samples: &SampleBox, finest: u32) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut pairs = sample_pairs(samples);
    pairs.extend(multiscale_pairs(samples, finest));
    pairs
}

/// Local log-Hoelder constant of `1/q` over [`audit_pairs`] on `samples`.
pub fn c_log_reciprocal(q: &ExponentField, samples: &SampleBox, finest: u32) -> Result<f64> {
    let pairs = audit_pairs(samples, finest);
    Ok(log_holder_audit(&Reciprocal(q), &pairs, &LogHolderOptions::default())?.c_log_local)
}

/// `n (1/p_minus - 1)_+`.
pub fn sigma_p(p_minus: f64, n: usize) -> Result<f64> {
    if !(p_minus > 0.0) {
        return Err(invalid("sigma_p needs p_minus > 0"));
    }
    Ok(n as f64 * (1.0 / p_minus - 1.0).max(0.0))
}

/// `n (1/min(1, p_minus, q_minus) - 1)`.
pub fn sigma_pq(p_minus: f64, q_minus: f64, n: usize) -> Result<f64> {
    if !(p_minus > 0.0) || !(q_minus > 0.0) {
        return Err(invalid("sigma_pq needs p_minus > 0 and q_minus > 0"));
    }
    Ok(n as f64 * (1.0 / 1.0f64.min(p_minus).min(q_minus) - 1.0))
}

pub(crate) fn require_same_dim(a: usize, b: usize, what: &str) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what}: dimension {a} does not match {b}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(lo: f64, hi: f64, k: usize) -> SampleBox {
        SampleBox::interval(lo, hi, k).unwrap()
    }

    #[test]
    fn constant_bounds_are_equal() {
        let p = ExponentField::constant(1, 2.0).unwrap();
        assert_eq!(exponent_bounds(&p, &line(0.0, 1.0, 11)).unwrap(), (2.0, 2.0));
    }

    #[test]
    fn sinusoidal_bounds_match_dense_oracle() {
        let f = RealField::new(1, FieldSpec::Sinusoidal { base: 2.0, amplitude: 1.0, frequency: vec![1.0] }).unwrap();
        let samples = line(0.0, 2.0 * PI, 4001);
        let p = ExponentField::new(f, None, &samples).unwrap();
        let oracle = (0..=4000).map(|i| {
            let x = 2.0 * PI * i as f64 / 4000.0;
            2.0 + x.sin().powi(2)
        });
        let (lo, hi) = oracle.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let (pm, pp) = exponent_bounds(&p, &samples).unwrap();
        assert_eq!((pm, pp), (lo, hi));
        assert!((pm - 2.0).abs() < 1e-12 && (pp - 3.0).abs() < 1e-6);
    }

    #[test]
    fn infinity_mask_makes_p_plus_infinite() {
        let f = RealField::constant(1, 3.0).unwrap();
        let mask = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let p = ExponentField::new(f, Some(mask), &line(-1.0, 2.0, 31)).unwrap();
        assert_eq!(p.p_plus(), f64::INFINITY);
        assert_eq!(p.p_minus(), 3.0);
        assert_eq!(p.eval(&[0.5]), None);
        assert_eq!(p.eval(&[1.5]), Some(3.0));
    }

    #[test]
    fn nonpositive_exponent_is_rejected() {
        assert!(ExponentField::constant(1, 0.0).is_err());
        let f = RealField::new(1, FieldSpec::AffineClamped { base: 0.0, slope: vec![1.0], min: -1.0, max: 2.0 }).unwrap();
        assert!(ExponentField::new(f, None, &line(0.0, 1.0, 5)).is_err());
    }

    #[test]
    fn audit_of_constant_is_zero() {
        let g = RealField::constant(1, 0.7).unwrap();
        let pairs = multiscale_pairs(&line(-1.0, 1.0, 21), 20);
        let rep = log_holder_audit(&g, &pairs, &LogHolderOptions::default()).unwrap();
        assert_eq!(rep.c_log_local, 0.0);
        assert!(rep.passes_local && rep.passes_global);
    }

    #[test]
    fn audit_of_step_grows_with_scale() {
        let g = RealField::new(1, FieldSpec::SmoothedStep { left: 0.0, right: 1.0, center: 0.0, width: 0.0, axis: 0 }).unwrap();
        let samples = line(-1.0, 1.0, 21);
        let coarse = log_holder_audit(&g, &multiscale_pairs(&samples, 5), &LogHolderOptions::default()).unwrap();
        let fine = log_holder_audit(&g, &multiscale_pairs(&samples, 40), &LogHolderOptions::default()).unwrap();
        assert!(fine.c_log_local > coarse.c_log_local + 20.0);
        // The straddling quotient is ln(e + 1/h) for jump 1; at h = 0.1 * 2^-40 it exceeds 29.
        assert!(fine.c_log_local > 29.0);
        assert!(!fine.passes_local);
    }

    #[test]
    fn audit_of_critical_field_is_bounded() {
        let g = RealField::new(1, FieldSpec::LogHolderCritical { base: 0.0, amplitude: 1.0, center: vec![0.0] }).unwrap();
        let samples = line(-1.0, 1.0, 41);
        let mut last = 0.0;
        for finest in [10, 20, 30, 40] {
            let rep = log_holder_audit(&g, &multiscale_pairs(&samples, finest), &LogHolderOptions::default()).unwrap();
            assert!(rep.c_log_local < 2.0, "c_log = {}", rep.c_log_local);
            assert!(rep.c_log_local >= last);
            last = rep.c_log_local;
        }
        // Pairs anchored at the singular point give quotient exactly 1.
        assert!(last >= 1.0 - 1e-12);
    }

    #[test]
    fn coincident_pair_is_rejected() {
        let g = RealField::constant(1, 1.0).unwrap();
        let err = log_holder_audit(&g, &[(vec![0.5], vec![0.5])], &LogHolderOptions::default());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_p(0.5, 2).unwrap(), 2.0);
        assert_eq!(sigma_p(1.5, 3).unwrap(), 0.0);
        assert_eq!(sigma_pq(1.0, 0.5, 1).unwrap(), 1.0);
        assert!(sigma_p(0.0, 1).is_err());
        assert!(sigma_pq(1.0, -1.0, 1).is_err());
    }

    #[test]
    fn reciprocal_maps_infinity_to_zero() {
        let q = ExponentField::constant(1, f64::INFINITY).unwrap();
        assert_eq!(Reciprocal(&q).value(&[0.3]), 0.0);
        let q2 = ExponentField::constant(1, 4.0).unwrap();
        assert_eq!(Reciprocal(&q2).value(&[0.3]), 0.25);
    }
}
