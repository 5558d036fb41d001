use serde::{Deserialize, Serialize};

use super::empirical::empirical_rip_operator;
use super::{EmpiricalOptions, LevelResult, RipMethod, RipReport};
use crate::error::{invalid, Result};
use crate::group_ops::MeasurementEnsemble;
use crate::rng::SeededRng;
use crate::sparsity::{s_max, SparsityModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MripOptions {
    pub search: EmpiricalOptions,
    /// Multiply each level threshold by an extra `2^{l/2}` (the looser form
    /// of the level condition).
    pub extra_level_factor: bool,
}

impl Default for MripOptions {
    fn default() -> Self {
        MripOptions { search: EmpiricalOptions::default(), extra_level_factor: false }
    }
}

/// Levels `⌊−log₂ s⌋ ..= ⌈log₂(s_max / s)⌉`.
pub fn mrip_levels(s: f64, s_max: f64) -> Result<std::ops::RangeInclusive<i32>> {
    if !(s >= 1.0 && s.is_finite()) {
        return invalid("s must be >= 1");
    }
    let lo = (-s.log2()).floor() as i32;
    let hi = (s_max / s).log2().ceil() as i32;
    Ok(lo..=hi.max(lo))
}

/// `max(2^{l/2} δ, 2^l δ²)`, optionally times `2^{l/2}`.
pub fn mrip_threshold(level: i32, delta: f64, extra_level_factor: bool) -> f64 {
    let half = 2f64.powf(f64::from(level) / 2.0);
    let base = (half * delta).max(half * half * delta * delta);
    if extra_level_factor {
        half * base
    } else {
        base
    }
}

fn level_sups(
    op: &crate::numerics::CMatrix,
    q: f64,
    s: f64,
    search: &EmpiricalOptions,
    rng: &SeededRng,
) -> Result<Vec<(i32, f64, f64)>> {
    let dim = op.ncols();
    let cap = s_max(q, dim)?;
    let levels = mrip_levels(s, cap)?;
    levels
        .map(|l| {
            let level_sparsity = 2f64.powi(l) * s;
            let effective = level_sparsity.min(cap);
            let sup = if effective < 1.0 {
                // no nonzero vector has ‖x‖_q < ‖x‖₂
                0.0
            } else {
                let model = SparsityModel::LqCap { q, s: effective };
                empirical_rip_operator(op, &model, search, &rng.substream(l.rem_euclid(1 << 16) as u64))?.0
            };
            Ok((l, level_sparsity, sup))
        })
        .collect()
}

/// Multiresolution check of `A` on `(ℓ_q, 2^l s)`-sparse vectors at every level.
pub fn mrip_check(
    a: &MeasurementEnsemble,
    q: f64,
    s: f64,
    delta: f64,
    opts: &MripOptions,
    rng: &SeededRng,
) -> Result<RipReport> {
    if !(delta > 0.0) {
        return invalid("delta must be positive");
    }
    let op = a.operator();
    let sups = level_sups(&op, q, s, &opts.search, rng)?;
    let levels: Vec<LevelResult> = sups
        .into_iter()
        .map(|(level, level_sparsity, observed_sup)| {
            let threshold = mrip_threshold(level, delta, opts.extra_level_factor);
            LevelResult { level, level_sparsity, observed_sup, threshold, pass: observed_sup <= threshold }
        })
        .collect();
    Ok(RipReport {
        delta_hat: levels.iter().map(|l| l.observed_sup).fold(0.0, f64::max),
        method: RipMethod::MonteCarlo { trials: opts.search.trials, ascent_steps: opts.search.ascent_steps },
        model: SparsityModel::LqCap { q, s },
        m: op.nrows(),
        levels,
    })
}

/// Smallest `δ` for which every measured level sup sits under its threshold.
///
/// At level `l` the threshold reaches `v` once `2^{l/2}δ ≥ v` or `2^l δ² ≥ v`,
/// so the level needs `δ_l = 2^{-l/2} min(v, √v)`; the result is `max_l δ_l`.
pub fn calibrate_mrip_delta(
    a: &MeasurementEnsemble,
    q: f64,
    s: f64,
    opts: &MripOptions,
    rng: &SeededRng,
) -> Result<f64> {
    let op = a.operator();
    let sups = level_sups(&op, q, s, &opts.search, rng)?;
    let delta = sups
        .iter()
        .map(|&(l, _, v)| {
            let half = 2f64.powf(f64::from(l) / 2.0);
            if opts.extra_level_factor {
                // threshold 2^{l/2}·max(2^{l/2}δ, 2^l δ²)
                (v / (half * half)).min((v / (half * half * half)).sqrt())
            } else {
                v.min(v.sqrt()) / half
            }
        })
        .fold(0.0, f64::max);
    Ok(delta.max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::CMatrix;

    #[test]
    fn level_range_examples() {
        assert_eq!(mrip_levels(1.0, 16.0).unwrap(), 0..=4);
        assert_eq!(mrip_levels(2.0, 64.0).unwrap(), -1..=5);
        assert_eq!(mrip_levels(3.0, 16.0).unwrap(), -2..=3);
        assert!(mrip_levels(0.5, 16.0).is_err());
    }

    #[test]
    fn thresholds() {
        assert!((mrip_threshold(0, 0.1, false) - 0.1).abs() < 1e-15);
        assert!((mrip_threshold(2, 0.1, false) - 0.2).abs() < 1e-15);
        assert!((mrip_threshold(2, 0.8, false) - 4.0 * 0.64).abs() < 1e-12);
        assert!((mrip_threshold(2, 0.1, true) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn identity_passes_everywhere() {
        let a = MeasurementEnsemble::from_operator(&CMatrix::identity(16, 16)).unwrap();
        let opts = MripOptions { search: EmpiricalOptions::new(4, 5), extra_level_factor: false };
        let report = mrip_check(&a, 1.0, 1.0, 1e-6, &opts, &SeededRng::new(1, 0)).unwrap();
        assert_eq!(report.levels.len(), 5);
        assert_eq!(report.passed(), Some(true));
    }

    #[test]
    fn calibrated_delta_passes_its_own_check() {
        let a = crate::group_ops::gaussian_ensemble(16, 40, &mut SeededRng::new(3, 0)).unwrap();
        let rng = SeededRng::new(4, 0);
        for extra in [false, true] {
            let opts = MripOptions { search: EmpiricalOptions::new(6, 10), extra_level_factor: extra };
            let delta = calibrate_mrip_delta(&a, 1.0, 2.0, &opts, &rng).unwrap();
            let report = mrip_check(&a, 1.0, 2.0, delta * (1.0 + 1e-9), &opts, &rng).unwrap();
            assert_eq!(report.passed(), Some(true));
        }
    }
}
