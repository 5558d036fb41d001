use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_unchecked, GroupElement, GroupVariant};
use crate::error::{invalid, Error, Result};
use crate::instruments::Instrument;
use crate::numerics::{hermitian_extremes, CMatrix, CVector, C64};
use crate::rng::SeededRng;

const MAX_SHIFT_MOD: usize = 16;
const MAX_DOUBLE_QFT: usize = 4;
const MAX_SIGN_SHIFT: usize = 8;

fn enumeration_limit(variant: GroupVariant) -> usize {
    match variant {
        GroupVariant::ShiftMod => MAX_SHIFT_MOD,
        GroupVariant::DoubleQft => MAX_DOUBLE_QFT,
        GroupVariant::SignShift => MAX_SIGN_SHIFT,
    }
}

fn check_instrument_variant(instrument: &Instrument, variant: GroupVariant) -> Result<()> {
    if (variant == GroupVariant::DoubleQft) != instrument.is_matrix() {
        return invalid("DoubleQft pairs with matrix instruments, the vector groups with vector instruments");
    }
    Ok(())
}

/// `‖|G|^{-1} Σ_g σ(g)η (σ(g)η)* − Id‖_{S∞}`, by exhaustive enumeration.
pub fn isotropy_defect(instrument: &Instrument, variant: GroupVariant) -> Result<f64> {
    check_instrument_variant(instrument, variant)?;
    let n = instrument.modulus();
    let limit = enumeration_limit(variant);
    if n > limit {
        return Err(Error::Capacity(format!("{variant:?} enumeration supports modulus <= {limit}, got {n}")));
    }
    let eta = instrument.flattened();
    let elements = GroupElement::enumerate(variant, n);
    let dim = eta.len();
    let cols: Vec<CVector> = elements.iter().map(|g| apply_unchecked(g, eta.as_slice(), false)).collect();
    let frame = CMatrix::from_columns(&cols);
    let mut avg = &frame * frame.adjoint() / C64::from(elements.len() as f64);
    for i in 0..dim {
        avg[(i, i)] -= C64::from(1.0);
    }
    let (lo, hi) = hermitian_extremes(&avg);
    Ok(lo.abs().max(hi.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosenthalStat {
    pub m: usize,
    pub median: f64,
    pub mean: f64,
    pub trials: usize,
}

/// For each `M`, median and mean over trials of
/// `‖M^{-1} Σ_j σ(g_j)* u* u σ(g_j) − Id‖_{S∞}` with i.i.d. uniform `g_j`.
/// `u` is `d × dim` with `tr(u* u) = dim`; `modulus` is the group modulus.
pub fn rosenthal_deviation(
    u: &CMatrix,
    variant: GroupVariant,
    modulus: usize,
    m_list: &[usize],
    trials: usize,
    rng: &SeededRng,
) -> Result<Vec<RosenthalStat>> {
    let dim = u.ncols();
    let expected_dim = if variant == GroupVariant::DoubleQft { modulus * modulus } else { modulus };
    if dim != expected_dim || dim == 0 {
        return invalid(format!("u must have {expected_dim} columns, got {dim}"));
    }
    let trace: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    if (trace - dim as f64).abs() > 1e-8 * (dim as f64).max(1.0) {
        return invalid(format!("u must satisfy tr(u*u) = {dim}, got {trace}"));
    }
    if trials == 0 || m_list.iter().any(|&m| m == 0) {
        return invalid("trials and every M must be >= 1");
    }
    // Columns of u*; σ(g)* applied to each gives the columns of (u σ(g))*.
    let u_adj: Vec<CVector> = (0..u.nrows()).map(|r| u.row(r).adjoint()).collect();

    m_list
        .iter()
        .enumerate()
        .map(|(mi, &m)| {
            let base = rng.substream(mi as u64);
            let mut devs: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut trng = base.substream(trial as u64);
                    let mut cols = Vec::with_capacity(m * u_adj.len());
                    for _ in 0..m {
                        let g = GroupElement::random(variant, modulus, &mut trng);
                        for col in &u_adj {
                            cols.push(apply_unchecked(&g, col.as_slice(), true));
                        }
                    }
                    let w = CMatrix::from_columns(&cols);
                    let mut s = &w * w.adjoint() / C64::from(m as f64);
                    for i in 0..dim {
                        s[(i, i)] -= C64::from(1.0);
                    }
                    let (lo, hi) = hermitian_extremes(&s);
                    lo.abs().max(hi.abs())
                })
                .collect();
            devs.sort_by(f64::total_cmp);
            let median = median_sorted(&devs);
            let mean = devs.iter().sum::<f64>() / devs.len() as f64;
            Ok(RosenthalStat { m, median, mean, trials })
        })
        .collect()
}

pub(crate) fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::{make_decaying_window, make_flat, make_scaled_identity_matrix, make_schatten_decay_matrix};

    #[test]
    fn exact_isotropy_examples() {
        assert!(isotropy_defect(&make_flat(4).unwrap(), GroupVariant::ShiftMod).unwrap() <= 1e-12);
        let w = make_decaying_window(8, 4, 0.3).unwrap();
        assert!(isotropy_defect(&w, GroupVariant::ShiftMod).unwrap() <= 1e-12);
        assert!(isotropy_defect(&w, GroupVariant::SignShift).unwrap() <= 1e-12);
        let id = make_scaled_identity_matrix(2).unwrap();
        assert!(isotropy_defect(&id, GroupVariant::DoubleQft).unwrap() <= 1e-12);
        let mut rng = SeededRng::new(3, 0);
        let s = make_schatten_decay_matrix(3, 0.35, &mut rng).unwrap();
        assert!(isotropy_defect(&s, GroupVariant::DoubleQft).unwrap() <= 1e-12);
    }

    #[test]
    fn large_groups_hit_capacity() {
        let eta = make_flat(17).unwrap();
        assert!(matches!(isotropy_defect(&eta, GroupVariant::ShiftMod), Err(Error::Capacity(_))));
        let big = make_scaled_identity_matrix(5).unwrap();
        assert!(matches!(isotropy_defect(&big, GroupVariant::DoubleQft), Err(Error::Capacity(_))));
    }

    #[test]
    fn identity_u_has_zero_deviation() {
        let u = CMatrix::identity(8, 8);
        let stats = rosenthal_deviation(&u, GroupVariant::ShiftMod, 8, &[1, 4, 16], 5, &SeededRng::new(1, 0)).unwrap();
        assert!(stats.iter().all(|s| s.median < 1e-12 && s.mean < 1e-12));
    }

    #[test]
    fn rejects_bad_normalization() {
        let u = CMatrix::identity(2, 8);
        assert!(rosenthal_deviation(&u, GroupVariant::ShiftMod, 8, &[4], 3, &SeededRng::new(1, 0)).is_err());
    }
}
