//! Seeded random coefficient sequences.
//!
//! Trial `t` under seed `s` draws from ChaCha stream `t` of key `s`, so a
//! trial's sequence does not depend on how many trials run or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varspace_core::analysis::{CoefficientSequence, LatticeFamily};
use varspace_core::geometry::{Cube, CubeClass};
use varspace_core::Complex64;

use crate::error::{config_error, LabError};

/// Magnitudes are log-uniform on `[10^-LOG_SPAN, 10^LOG_SPAN]`.
pub const LOG_SPAN: f64 = 2.0;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Each eligible cube on `levels` carries a coefficient with probability
/// `sparsity`; a draw that selects nothing falls back to one uniformly
/// chosen eligible cube, so every trial has a nonzero sequence.
pub fn random_lambda(
    family: &LatticeFamily,
    levels: &[u32],
    sparsity: f64,
    restricted: bool,
    eligible: &dyn Fn(&Cube, CubeClass) -> bool,
    rng: &mut ChaCha8Rng,
) -> Result<CoefficientSequence, LabError> {
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(config_error(format!("sparsity must lie in (0, 1], got {sparsity}")));
    }
    let mut lambda = CoefficientSequence::new(family.shift_budget(), family.dilation(), restricted);
    let mut pool = Vec::new();
    for &nu in levels {
        let lat = family.level(nu).ok_or_else(|| config_error(format!("level {nu} exceeds the lattice family")))?;
        for (cube, class) in lat.entries() {
            if !eligible(cube, class) {
                continue;
            }
            pool.push((nu, cube.index.clone()));
            if rng.gen_bool(sparsity) {
                lambda.insert(nu, cube.index.clone(), draw_value(rng));
            }
        }
    }
    if pool.is_empty() {
        return Err(config_error("no eligible cube on the requested levels"));
    }
    if lambda.is_empty() {
        let (nu, m) = pool.swap_remove(rng.gen_range(0..pool.len()));
        lambda.insert(nu, m, draw_value(rng));
    }
    Ok(lambda)
}

fn draw_value(rng: &mut ChaCha8Rng) -> Complex64 {
    let magnitude = 10f64.powf(rng.gen_range(-LOG_SPAN..=LOG_SPAN));
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Complex64::new(sign * magnitude, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use varspace_core::sampling::AxisBox;

    fn family() -> LatticeFamily {
        LatticeFamily::build(3, 0.5, 2.0, &AxisBox::cube(1, -1.0, 1.0).unwrap(), None).unwrap()
    }

    #[test]
    fn reproducible_per_trial() {
        let fam = family();
        let draw = |t| random_lambda(&fam, &[0, 1, 2, 3], 0.1, false, &|_, _| true, &mut trial_rng(7, t)).unwrap();
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn never_empty_and_in_range() {
        let fam = family();
        for t in 0..50 {
            let lam = random_lambda(&fam, &[0], 0.01, false, &|_, _| true, &mut trial_rng(1, t)).unwrap();
            assert!(!lam.is_empty());
            for (nu, _, v) in lam.iter() {
                assert_eq!(nu, 0);
                assert!(v.norm() >= 1e-2 && v.norm() <= 1e2);
            }
        }
    }

    #[test]
    fn nothing_eligible_is_a_config_error() {
        let fam = family();
        assert!(matches!(
            random_lambda(&fam, &[1], 0.5, false, &|_, _| false, &mut trial_rng(0, 0)),
            Err(LabError::Config(_))
        ));
    }
}
