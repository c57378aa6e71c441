//! Modulars and Luxemburg-type norms on grid samples.
//!
//! All infima are found by a bracketed root search on `u = ln(lambda)`:
//! the logarithm of a modular `sum_k S_k lambda^{-e_k}` (plus ess-sup terms)
//! is a convex decreasing function of `u`, so Newton steps taken inside a
//! maintained bracket converge quadratically and fall back to bisection
//! whenever they would leave it.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::exponents::{require_same_dim, ExponentField};

use super::grid::{Grid, GridFunction, GridSequence};

/// Exponent values at the grid cells; `None` where the exponent is infinite.
pub fn sample_exponent(p: &ExponentField, grid: &Grid) -> Vec<Option<f64>> {
    (0..grid.len()).map(|k| p.eval(&grid.point(k))).collect()
}

/// `ln g` and its partial derivatives for `g(mu, lam) = sum_k S_k mu^{-a_k} lam^{-b_k}
/// + max_k A_k mu^{-c_k} lam^{-d_k}`, evaluated at `(ln mu, ln lam)`.
#[derive(Clone, Debug, Default)]
struct LogModular {
    // (ln S, a, b)
    sums: Vec<(f64, f64, f64)>,
    // (ln A, c, d)
    sups: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Copy, Debug)]
struct LogEval {
    value: f64,
    d_mu: f64,
    d_lam: f64,
}

impl LogModular {
    /// Groups cells by exponent pair so repeated evaluations cost one term per
    /// distinct exponent instead of one per cell. `rate` maps a finite cell
    /// exponent to its `lam` rate; `sup_rate` gives the `lam` rate of an
    /// infinite-exponent cell.
    fn build(
        abs: &[f64],
        exps: &[Option<f64>],
        cell_volume: f64,
        rate: impl Fn(usize, f64) -> f64,
        sup_rate: impl Fn(usize) -> f64,
    ) -> Self {
        let mut sums: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        let mut sups: BTreeMap<u64, f64> = BTreeMap::new();
        for (k, (&a, e)) in abs.iter().zip(exps).enumerate() {
            if a == 0.0 {
                continue;
            }
            match e {
                Some(p) => {
                    let r = rate(k, *p);
                    *sums.entry((p.to_bits(), r.to_bits())).or_insert(0.0) += a.powf(*p) * cell_volume;
                }
                None => {
                    let d = sup_rate(k);
                    let slot = sups.entry(d.to_bits()).or_insert(0.0);
                    *slot = slot.max(a);
                }
            }
        }
        Self {
            sums: sums.into_iter().map(|((p, r), s)| (s.ln(), f64::from_bits(p), f64::from_bits(r))).collect(),
            sups: sups.into_iter().map(|(d, a)| (a.ln(), 1.0, f64::from_bits(d))).collect(),
        }
    }

    fn is_empty(&self) -> bool {
        self.sums.is_empty() && self.sups.is_empty()
    }

    fn has_lam_dependence(&self) -> bool {
        self.sums.iter().any(|t| t.2 > 0.0) || self.sups.iter().any(|t| t.2 > 0.0)
    }

    fn eval(&self, u_mu: f64, u_lam: f64) -> LogEval {
        let mut top = f64::NEG_INFINITY;
        let mut exps: Vec<(f64, f64, f64)> = Vec::with_capacity(self.sums.len() + 1);
        for &(ls, a, b) in &self.sums {
            let e = ls - a * u_mu - b * u_lam;
            top = top.max(e);
            exps.push((e, a, b));
        }
        if let Some(best) = self
            .sups
            .iter()
            .map(|&(la, c, d)| (la - c * u_mu - d * u_lam, c, d))
            .max_by(|x, y| x.0.total_cmp(&y.0))
        {
            top = top.max(best.0);
            exps.push(best);
        }
        if exps.is_empty() {
            return LogEval { value: f64::NEG_INFINITY, d_mu: 0.0, d_lam: 0.0 };
        }
        let (mut total, mut dm, mut dl) = (0.0, 0.0, 0.0);
        for (e, a, b) in exps {
            let w = (e - top).exp();
            total += w;
            dm -= w * a;
            dl -= w * b;
        }
        LogEval { value: top + total.ln(), d_mu: dm / total, d_lam: dl / total }
    }
}

/// Root of a decreasing `phi` in `u`, returned as the feasible bracket end
/// (`phi <= 0`) once the bracket is narrower than `ln(1 + tol)`.
fn solve_decreasing(mut phi: impl FnMut(f64) -> Result<(f64, f64)>, u0: f64, tol: f64, what: &str) -> Result<f64> {
    const CAP: usize = 400;
    let width = (1.0 + tol).ln();
    let (f0, d0) = phi(u0)?;
    if f0 == 0.0 {
        return Ok(u0);
    }
    // Bracket by doubling the step in u (squaring lambda's scale factor).
    let (mut a, mut b);
    let mut step = std::f64::consts::LN_2;
    let mut cur = (u0, f0, d0);
    let mut iters = 0;
    if f0 > 0.0 {
        loop {
            let u = cur.0 + step;
            let (f, d) = phi(u)?;
            iters += 1;
            if f <= 0.0 {
                (a, b) = (cur.0, u);
                cur = (u, f, d);
                break;
            }
            cur = (u, f, d);
            step *= 2.0;
            if iters > 60 || !u.is_finite() {
                return Err(Error::Numeric(format!("{what}: bracket expansion upward failed")));
            }
        }
    } else {
        loop {
            let u = cur.0 - step;
            let (f, d) = phi(u)?;
            iters += 1;
            if f > 0.0 {
                (a, b) = (u, cur.0);
                cur = (u, f, d);
                break;
            }
            cur = (u, f, d);
            step *= 2.0;
            if iters > 60 || !u.is_finite() {
                return Err(Error::Numeric(format!("{what}: bracket expansion downward failed")));
            }
        }
    }
    for _ in 0..CAP {
        if b - a <= width {
            return Ok(b);
        }
        let (u, f, d) = cur;
        let mut next = if f.is_finite() && d.is_finite() && d < 0.0 { u - f / d } else { f64::NAN };
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let (fnext, dnext) = phi(next)?;
        if fnext == 0.0 {
            return Ok(next);
        }
        if fnext > 0.0 {
            a = next;
        } else {
            b = next;
        }
        cur = (next, fnext, dnext);
        // Newton converges from one side; probe the other to close the bracket.
        if (next - u).abs() < 0.25 * width && b - a > width {
            let probe = if fnext > 0.0 { next + 0.5 * width } else { next - 0.5 * width };
            if probe > a && probe < b {
                let (fp, _) = phi(probe)?;
                if fp > 0.0 {
                    a = probe;
                } else {
                    b = probe;
                }
            }
        }
    }
    Err(Error::Numeric(format!("{what}: root search did not converge")))
}

/// Smallest `lam` with `g(mu, lam) <= 1` at fixed `mu`, or 0 / infinity in
/// the degenerate cases where `g` does not depend on `lam`.
fn inner_infimum(m: &LogModular, u_mu: f64, tol: f64, what: &str) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    if !m.has_lam_dependence() {
        return Ok(if m.eval(u_mu, 0.0).value <= 0.0 { 0.0 } else { f64::INFINITY });
    }
    // Terms without lam dependence form a floor; if it already exceeds 1 the set is empty.
    let floor = LogModular {
        sums: m.sums.iter().copied().filter(|t| t.2 == 0.0).collect(),
        sups: m.sups.iter().copied().filter(|t| t.2 == 0.0).collect(),
    };
    if !floor.is_empty() && floor.eval(u_mu, 0.0).value >= 0.0 {
        return Ok(f64::INFINITY);
    }
    let u = solve_decreasing(|u| Ok({
        let e = m.eval(u_mu, u);
        (e.value, e.d_lam)
    }), 0.0, tol, what)?;
    Ok(u.exp())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("tolerance must lie in (0, 1), got {tol}")))
    }
}

/// Midpoint-rule modular: integral of `|f|^p` over finite-exponent cells
/// plus the max of `|f|` over cells where `p` is infinite.
pub fn modular_lp(f: &GridFunction, p: &ExponentField) -> Result<f64> {
    require_same_dim(f.grid().dim(), p.dim(), "modular_lp")?;
    let exps = sample_exponent(p, f.grid());
    Ok(modular_from_samples(&f.abs_values(), &exps, f.grid().cell_volume()))
}

pub(crate) fn modular_from_samples(abs: &[f64], exps: &[Option<f64>], vol: f64) -> f64 {
    let mut integral = 0.0;
    let mut sup = 0.0f64;
    for (&a, e) in abs.iter().zip(exps) {
        match e {
            Some(p) => integral += a.powf(*p) * vol,
            None => sup = sup.max(a),
        }
    }
    integral + sup
}

/// Luxemburg norm from precomputed magnitudes and exponents.
pub(crate) fn luxemburg_from_samples(abs: &[f64], exps: &[Option<f64>], vol: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let sup = abs.iter().copied().fold(0.0, f64::max);
    if sup == 0.0 {
        return Ok(0.0);
    }
    if !sup.is_finite() {
        return Err(Error::Data("non-finite sample in Luxemburg norm".into()));
    }
    let m = LogModular::build(abs, exps, vol, |_, _| 0.0, |_| 0.0);
    let p_minus = exps.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let p_minus = if p_minus.is_finite() { p_minus } else { 1.0 };
    let start = sup.max(1.0) * (abs.len() as f64).powf(1.0 / p_minus);
    let u = solve_decreasing(|u| {
        let e = m.eval(u, 0.0);
        Ok((e.value, e.d_mu))
    }, start.ln(), tol, "Luxemburg norm")?;
    Ok(u.exp())
}

/// `inf { lam > 0 : modular_lp(f / lam) <= 1 }`, to relative accuracy `tol`.
pub fn luxemburg_norm(f: &GridFunction, p: &ExponentField, tol: f64) -> Result<f64> {
    require_same_dim(f.grid().dim(), p.dim(), "luxemburg_norm")?;
    let exps = sample_exponent(p, f.grid());
    luxemburg_from_samples(&f.abs_values(), &exps, f.grid().cell_volume(), tol)
}

/// Per-level grouped modulars for the mixed `l_q(L_p)` problems.
fn mixed_levels(seq: &GridSequence, p: &ExponentField, q: &ExponentField) -> Result<Vec<LogModular>> {
    let grid = seq.grid();
    require_same_dim(grid.dim(), p.dim(), "mixed modular (p)")?;
    require_same_dim(grid.dim(), q.dim(), "mixed modular (q)")?;
    if !(q.p_minus() > 0.0) {
        return Err(Error::Precondition("q_minus must be positive".into()));
    }
    let ps = sample_exponent(p, grid);
    let qs = sample_exponent(q, grid);
    let vol = grid.cell_volume();
    Ok(seq
        .levels()
        .par_iter()
        .map(|f| {
            LogModular::build(
                &f.abs_values(),
                &ps,
                vol,
                |k, pk| qs[k].map_or(0.0, |qk| pk / qk),
                |k| qs[k].map_or(0.0, |qk| 1.0 / qk),
            )
        })
        .collect())
}

/// `sum_nu inf { lam_nu > 0 : modular_lp(f_nu / lam_nu^{1/q}) <= 1 }`.
pub fn modular_mixed(seq: &GridSequence, p: &ExponentField, q: &ExponentField, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let levels = mixed_levels(seq, p, q)?;
    let parts: Vec<f64> = levels
        .par_iter()
        .enumerate()
        .map(|(nu, m)| inner_infimum(m, 0.0, tol, &format!("mixed modular, level {nu}")))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// `sum_nu || |f_nu|^q | L_{p/q} ||`; requires `q` bounded on the grid.
pub fn modular_mixed_simple(seq: &GridSequence, p: &ExponentField, q: &ExponentField, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let grid = seq.grid();
    require_same_dim(grid.dim(), p.dim(), "mixed modular (p)")?;
    require_same_dim(grid.dim(), q.dim(), "mixed modular (q)")?;
    let qs = sample_exponent(q, grid);
    if q.p_plus() == f64::INFINITY || qs.iter().any(|v| v.is_none()) {
        return Err(Error::Precondition("the simple mixed modular needs q_plus < infinity".into()));
    }
    let ps = sample_exponent(p, grid);
    let ratio: Vec<Option<f64>> = ps.iter().zip(&qs).map(|(pk, qk)| pk.map(|pk| pk / qk.unwrap())).collect();
    let vol = grid.cell_volume();
    let parts: Vec<f64> = seq
        .levels()
        .par_iter()
        .map(|f| {
            let powered: Vec<f64> = f.abs_values().iter().zip(&qs).map(|(a, qk)| a.powf(qk.unwrap())).collect();
            luxemburg_from_samples(&powered, &ratio, vol, tol)
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// `inf { mu > 0 : modular_mixed(f / mu) <= 1 }`.
pub fn norm_lq_lp(seq: &GridSequence, p: &ExponentField, q: &ExponentField, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    let levels = mixed_levels(seq, p, q)?;
    if levels.iter().all(|m| m.is_empty()) {
        return Ok(0.0);
    }
    let inner_tol = (tol * 1e-2).max(1e-15);
    let sup = seq.levels().iter().map(|f| f.sup_abs()).fold(0.0, f64::max);
    let cells = seq.grid().len() as f64 * seq.len() as f64;
    let start = sup.max(1.0) * cells.powf(1.0 / p.p_minus().min(q.p_minus()).max(1e-3).min(1e3));
    // ln M(mu) with dM/du from implicit differentiation of each level's equation.
    let outer = |u_mu: f64| -> Result<(f64, f64)> {
        let parts: Vec<(f64, f64)> = levels
            .par_iter()
            .enumerate()
            .map(|(nu, m)| {
                let lam = inner_infimum(m, u_mu, inner_tol, &format!("mixed norm, level {nu}"))?;
                if lam == 0.0 || !lam.is_finite() {
                    return Ok((lam, 0.0));
                }
                let e = m.eval(u_mu, lam.ln());
                let slope = if e.d_lam < 0.0 { -e.d_mu / e.d_lam } else { 0.0 };
                Ok((lam, lam * slope))
            })
            .collect::<Result<_>>()?;
        let total: f64 = parts.iter().map(|t| t.0).sum();
        let dtotal: f64 = parts.iter().map(|t| t.1).sum();
        if total == 0.0 {
            return Ok((f64::NEG_INFINITY, f64::NAN));
        }
        Ok((total.ln(), dtotal / total))
    };
    let u = solve_decreasing(outer, start.ln(), tol, "mixed l_q(L_p) norm")?;
    Ok(u.exp())
}

/// Pointwise `(sum_nu |f_nu(x)|^{q(x)})^{1/q(x)}` (max where q is infinite).
pub fn pointwise_lq(seq: &GridSequence, q: &ExponentField) -> Result<Vec<f64>> {
    let grid = seq.grid();
    require_same_dim(grid.dim(), q.dim(), "pointwise l_q")?;
    let qs = sample_exponent(q, grid);
    let abs: Vec<Vec<f64>> = seq.levels().iter().map(|f| f.abs_values()).collect();
    Ok((0..grid.len())
        .map(|k| {
            let top = abs.iter().map(|a| a[k]).fold(0.0, f64::max);
            match qs[k] {
                _ if top == 0.0 => 0.0,
                None => top,
                Some(qk) => top * abs.iter().map(|a| (a[k] / top).powf(qk)).sum::<f64>().powf(1.0 / qk),
            }
        })
        .collect())
}

/// `|| (sum_nu |f_nu|^q)^{1/q} | L_p ||`.
pub fn norm_lp_lq(seq: &GridSequence, p: &ExponentField, q: &ExponentField, tol: f64) -> Result<f64> {
    require_same_dim(seq.grid().dim(), p.dim(), "norm_lp_lq")?;
    let reduced = pointwise_lq(seq, q)?;
    let exps = sample_exponent(p, seq.grid());
    luxemburg_from_samples(&reduced, &exps, seq.grid().cell_volume(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{FieldSpec, RealField};
    use crate::sampling::{AxisBox, SampleBox};

    const TOL: f64 = 1e-12;

    fn grid() -> Grid {
        Grid::new(1, 10, 2.0).unwrap()
    }

    fn indicator(c: f64) -> GridFunction {
        GridFunction::from_fn(&grid(), |x| if (0.0..1.0).contains(&x[0]) { c } else { 0.0 })
    }

    fn constant(p: f64) -> ExponentField {
        ExponentField::constant(1, p).unwrap()
    }

    fn affine() -> ExponentField {
        let f = RealField::new(1, FieldSpec::AffineClamped { base: 2.0, slope: vec![1.0], min: 2.0, max: 3.0 }).unwrap();
        ExponentField::new(f, None, &SampleBox::interval(-2.0, 2.0, 101).unwrap()).unwrap()
    }

    #[test]
    fn modular_examples() {
        assert!((modular_lp(&indicator(2.0), &constant(2.0)).unwrap() - 4.0).abs() < 1e-12);
        let mask = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let p = ExponentField::new(RealField::constant(1, 2.0).unwrap(), Some(mask), &SampleBox::interval(-2.0, 2.0, 9).unwrap()).unwrap();
        assert_eq!(modular_lp(&indicator(3.0), &p).unwrap(), 3.0);
        assert!((modular_lp(&indicator(1.0), &affine()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn luxemburg_examples() {
        assert!((luxemburg_norm(&indicator(1.0), &constant(2.0), TOL).unwrap() - 1.0).abs() < 1e-10);
        assert!((luxemburg_norm(&indicator(-3.5), &constant(2.0), TOL).unwrap() - 3.5).abs() < 1e-10);
        assert_eq!(luxemburg_norm(&indicator(0.0), &constant(2.0), TOL).unwrap(), 0.0);
    }

    #[test]
    fn luxemburg_variable_exponent_matches_root_oracle() {
        // Midpoint version of int_0^1 lam^{-(2+x)} dx = 1, solved by plain bisection.
        let g = grid();
        let xs: Vec<f64> = (0..g.len()).map(|k| g.coord(0, k)).filter(|x| (0.0..1.0).contains(x)).collect();
        let h = g.spacing();
        let rho = |lam: f64| xs.iter().map(|x| lam.powf(-(2.0 + x)) * h).sum::<f64>();
        let (mut lo, mut hi) = (0.1, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rho(mid) > 1.0 { lo = mid } else { hi = mid }
        }
        let got = luxemburg_norm(&indicator(1.0), &affine(), TOL).unwrap();
        assert!((got - hi).abs() < 1e-10 * hi, "{got} vs {hi}");
    }

    #[test]
    fn infinite_exponent_norm_is_sup() {
        let p = constant(f64::INFINITY);
        assert!((luxemburg_norm(&indicator(2.5), &p, TOL).unwrap() - 2.5).abs() < 1e-10);
    }

    fn seq(levels: Vec<GridFunction>) -> GridSequence {
        GridSequence::new(levels).unwrap()
    }

    #[test]
    fn mixed_examples() {
        let s = seq(vec![indicator(1.0)]);
        let two = constant(2.0);
        assert!((modular_mixed(&s, &two, &two, TOL).unwrap() - 1.0).abs() < 1e-10);
        assert!((modular_mixed_simple(&s, &two, &two, TOL).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(modular_mixed(&seq(vec![indicator(0.0), indicator(0.0)]), &two, &two, TOL).unwrap(), 0.0);

        let single = modular_mixed_simple(&s, &two, &two, TOL).unwrap();
        let double = modular_mixed_simple(&seq(vec![indicator(1.0), indicator(1.0)]), &two, &two, TOL).unwrap();
        assert_eq!(double, 2.0 * single);
        assert!((modular_mixed_simple(&s, &constant(4.0), &two, TOL).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn forms_split_when_p_is_partly_infinite() {
        // f = 1 on [0, 2), p = 2 on [0, 1) and infinite on [1, 2), q = 2.
        // Inner infimum: 1/lam + lam^{-1/2} = 1, so lam = golden ratio squared;
        // the simple form sees 1/mu + 1/mu = 1, so mu = 2. With the ess-sup
        // term the two agree only where p is finite or infinite throughout.
        let f = GridFunction::from_fn(&grid(), |x| if (0.0..2.0).contains(&x[0]) { 1.0 } else { 0.0 });
        let mask = AxisBox::new(vec![1.0], vec![2.5]).unwrap();
        let p = ExponentField::new(RealField::constant(1, 2.0).unwrap(), Some(mask), &SampleBox::interval(-2.0, 2.0, 9).unwrap()).unwrap();
        let s = seq(vec![f]);
        let golden = 0.5 * (1.0 + 5f64.sqrt());
        assert!((modular_mixed(&s, &p, &constant(2.0), TOL).unwrap() - golden * golden).abs() < 1e-9);
        assert!((modular_mixed_simple(&s, &p, &constant(2.0), TOL).unwrap() - 2.0).abs() < 1e-9);

        let everywhere = ExponentField::constant(1, f64::INFINITY).unwrap();
        let a = modular_mixed(&s, &everywhere, &constant(2.0), TOL).unwrap();
        assert!((a - modular_mixed_simple(&s, &everywhere, &constant(2.0), TOL).unwrap()).abs() < 1e-9 * a);
    }

    #[test]
    fn simple_form_rejects_unbounded_q() {
        let s = seq(vec![indicator(1.0)]);
        let err = modular_mixed_simple(&s, &constant(2.0), &constant(f64::INFINITY), TOL);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn mixed_norm_examples() {
        let two = constant(2.0);
        let f = indicator(1.5);
        let l2 = luxemburg_norm(&f, &two, TOL).unwrap();
        assert!((norm_lq_lp(&seq(vec![f.clone()]), &two, &two, TOL).unwrap() - l2).abs() < 1e-9);
        let n = 5;
        let copies = seq(vec![f.clone(); n]);
        let got = norm_lq_lp(&copies, &two, &two, TOL).unwrap();
        assert!((got - (n as f64).sqrt() * l2).abs() < 1e-9 * got);
        assert_eq!(norm_lq_lp(&seq(vec![indicator(0.0)]), &two, &two, TOL).unwrap(), 0.0);
    }

    #[test]
    fn lp_lq_examples() {
        let two = constant(2.0);
        let f0 = indicator(1.0);
        let f1 = GridFunction::from_fn(&grid(), |x| if (-1.0..0.0).contains(&x[0]) { 2.0 } else { 0.0 });
        let single = norm_lp_lq(&seq(vec![f0.clone()]), &affine(), &two, TOL).unwrap();
        assert!((single - luxemburg_norm(&f0, &affine(), TOL).unwrap()).abs() < 1e-10);
        let both = norm_lp_lq(&seq(vec![f0, f1]), &two, &two, TOL).unwrap();
        assert!((both - 5f64.sqrt()).abs() < 1e-10);
        assert_eq!(norm_lp_lq(&seq(vec![indicator(0.0)]), &two, &two, TOL).unwrap(), 0.0);
    }

    #[test]
    fn q_infinity_gives_sup_over_levels() {
        let two = constant(2.0);
        let inf = constant(f64::INFINITY);
        let s = seq(vec![indicator(1.0), indicator(3.0), indicator(2.0)]);
        let got = norm_lq_lp(&s, &two, &inf, 1e-10).unwrap();
        assert!((got - 3.0).abs() < 1e-8, "{got}");
    }
}
