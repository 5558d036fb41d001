//! Group actions on `C^N` and `M_n`, sampled measurement ensembles, and the
//! isotropy / concentration diagnostics built on them.
//!
//! Index conventions: entries are 0-based in memory, but the modulation
//! `Λ e_l = e^{2πi l/N} e_l` uses `l = 1..N`, so memory index `i` picks up the
//! phase `e^{2πi (i+1) t/N}`. The shift is `Sh e_l = e_{l+1}` cyclically, i.e.
//! `(Sh^k x)_i = x_{i-k mod N}`.

mod ensemble;
mod isotropy;
pub(crate) use isotropy::median_sorted;

pub use ensemble::{
    compose_gaussian, compose_with_matrix, gaussian_ensemble, sample_ensemble, EnsembleDoc,
    EnsembleSource, GaussianStage, MeasurementEnsemble, SignMode,
};
pub use isotropy::{isotropy_defect, rosenthal_deviation, RosenthalStat};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::{CMatrix, CVector, C64};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupVariant {
    /// Time-frequency shifts `Λ^t Sh^k` on `C^N`.
    ShiftMod,
    /// Two-sided time-frequency shifts on `M_n`.
    DoubleQft,
    /// `{−1,1}^N ⋊ Z_N`: entrywise signs followed by a cyclic shift.
    SignShift,
}

impl std::str::FromStr for GroupVariant {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "shift_mod" | "shiftmod" | "stft" => Ok(GroupVariant::ShiftMod),
            "double_qft" | "doubleqft" => Ok(GroupVariant::DoubleQft),
            "sign_shift" | "signshift" => Ok(GroupVariant::SignShift),
            other => invalid(format!("unknown group variant '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GroupElement {
    ShiftMod { n: usize, t: usize, k: usize },
    DoubleQft { n: usize, k: usize, j: usize, kp: usize, jp: usize },
    SignShift { signs: Vec<i8>, shift: usize },
}

impl GroupElement {
    pub fn shift_mod(n: usize, t: i64, k: i64) -> Result<Self> {
        if n == 0 {
            return invalid("modulus must be >= 1");
        }
        Ok(GroupElement::ShiftMod { n, t: reduce(t, n), k: reduce(k, n) })
    }

    pub fn double_qft(n: usize, k: i64, j: i64, kp: i64, jp: i64) -> Result<Self> {
        if n == 0 {
            return invalid("modulus must be >= 1");
        }
        Ok(GroupElement::DoubleQft { n, k: reduce(k, n), j: reduce(j, n), kp: reduce(kp, n), jp: reduce(jp, n) })
    }

    pub fn sign_shift(signs: Vec<i8>, shift: i64) -> Result<Self> {
        if signs.is_empty() {
            return invalid("sign vector must be nonempty");
        }
        if signs.iter().any(|&e| e != 1 && e != -1) {
            return invalid("sign entries must be +1 or -1");
        }
        let n = signs.len();
        Ok(GroupElement::SignShift { signs, shift: reduce(shift, n) })
    }

    pub fn variant(&self) -> GroupVariant {
        match self {
            GroupElement::ShiftMod { .. } => GroupVariant::ShiftMod,
            GroupElement::DoubleQft { .. } => GroupVariant::DoubleQft,
            GroupElement::SignShift { .. } => GroupVariant::SignShift,
        }
    }

    /// Length of the vectors the element acts on (`n²` for `DoubleQft`).
    pub fn dim(&self) -> usize {
        match self {
            GroupElement::ShiftMod { n, .. } => *n,
            GroupElement::DoubleQft { n, .. } => n * n,
            GroupElement::SignShift { signs, .. } => signs.len(),
        }
    }

    /// Uniform draw from the group with the given modulus.
    pub fn random(variant: GroupVariant, n: usize, rng: &mut SeededRng) -> Self {
        match variant {
            GroupVariant::ShiftMod => GroupElement::ShiftMod { n, t: rng.below(n), k: rng.below(n) },
            GroupVariant::DoubleQft => GroupElement::DoubleQft {
                n,
                k: rng.below(n),
                j: rng.below(n),
                kp: rng.below(n),
                jp: rng.below(n),
            },
            GroupVariant::SignShift => {
                let signs = (0..n).map(|_| rng.rademacher()).collect();
                GroupElement::SignShift { signs, shift: rng.below(n) }
            }
        }
    }

    /// Every element of the (finite) group, in a fixed order.
    pub fn enumerate(variant: GroupVariant, n: usize) -> Vec<Self> {
        match variant {
            GroupVariant::ShiftMod => {
                (0..n).flat_map(|t| (0..n).map(move |k| GroupElement::ShiftMod { n, t, k })).collect()
            }
            GroupVariant::DoubleQft => {
                let mut out = Vec::with_capacity(n.pow(4));
                for k in 0..n {
                    for j in 0..n {
                        for kp in 0..n {
                            for jp in 0..n {
                                out.push(GroupElement::DoubleQft { n, k, j, kp, jp });
                            }
                        }
                    }
                }
                out
            }
            GroupVariant::SignShift => {
                let mut out = Vec::with_capacity(n << n);
                for mask in 0..(1usize << n) {
                    let signs: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                    for shift in 0..n {
                        out.push(GroupElement::SignShift { signs: signs.clone(), shift });
                    }
                }
                out
            }
        }
    }

    /// Group order for modulus `n`, or `None` on overflow.
    pub fn order(variant: GroupVariant, n: usize) -> Option<u128> {
        let n128 = n as u128;
        match variant {
            GroupVariant::ShiftMod => n128.checked_mul(n128),
            GroupVariant::DoubleQft => n128.checked_pow(4),
            GroupVariant::SignShift => {
                if n >= 120 {
                    None
                } else {
                    (1u128 << n).checked_mul(n128)
                }
            }
        }
    }
}

fn reduce(v: i64, n: usize) -> usize {
    v.rem_euclid(n as i64) as usize
}

fn root_of_unity(n: usize, power: usize) -> C64 {
    C64::from_polar(1.0, TAU * ((power % n) as f64) / n as f64)
}

/// `σ(g) x` for a vector (matrices in row-major flattened form).
pub fn apply_group(g: &GroupElement, x: &[C64]) -> Result<CVector> {
    check_dim(g, x.len())?;
    Ok(apply_unchecked(g, x, false))
}

/// `σ(g)* x`.
pub fn apply_group_adjoint(g: &GroupElement, x: &[C64]) -> Result<CVector> {
    check_dim(g, x.len())?;
    Ok(apply_unchecked(g, x, true))
}

/// `σ(g) a` for a square matrix argument of a `DoubleQft` element.
pub fn apply_group_matrix(g: &GroupElement, a: &CMatrix) -> Result<CMatrix> {
    let GroupElement::DoubleQft { n, .. } = g else {
        return invalid("matrix arguments require a DoubleQft element");
    };
    if a.nrows() != *n || a.ncols() != *n {
        return invalid(format!("expected a {n}x{n} matrix, got {}x{}", a.nrows(), a.ncols()));
    }
    let flat = crate::instruments::flatten_row_major(a);
    let out = apply_unchecked(g, flat.as_slice(), false);
    Ok(crate::instruments::unflatten_row_major(out.as_slice(), *n))
}

fn check_dim(g: &GroupElement, len: usize) -> Result<()> {
    if g.dim() != len {
        return invalid(format!("dimension mismatch: group acts on length {}, got {len}", g.dim()));
    }
    Ok(())
}

pub(crate) fn apply_unchecked(g: &GroupElement, x: &[C64], adjoint: bool) -> CVector {
    match g {
        GroupElement::ShiftMod { n, t, k } => {
            let n = *n;
            if !adjoint {
                // (Λ^t Sh^k x)_i = e^{2πi(i+1)t/N} x_{i-k}
                CVector::from_fn(n, |i, _| root_of_unity(n, (i + 1) * t) * x[(i + n - k) % n])
            } else {
                // (Sh^{-k} Λ^{-t} y)_i = e^{-2πi(i+k+1)t/N} y_{i+k}
                CVector::from_fn(n, |i, _| {
                    let src = (i + k) % n;
                    root_of_unity(n, (src + 1) * t).conj() * x[src]
                })
            }
        }
        GroupElement::DoubleQft { n, k, j, kp, jp } => {
            let n = *n;
            // σ(a)[r,c] = ω^{(r+1)k - (c+1)k'} a[r-j, c-j']
            CVector::from_fn(n * n, |idx, _| {
                let (r, c) = (idx / n, idx % n);
                if !adjoint {
                    let src = ((r + n - j) % n) * n + (c + n - jp) % n;
                    root_of_unity(n, (r + 1) * k) * root_of_unity(n, (c + 1) * kp).conj() * x[src]
                } else {
                    let (sr, sc) = ((r + j) % n, (c + jp) % n);
                    let phase = root_of_unity(n, (sr + 1) * k) * root_of_unity(n, (sc + 1) * kp).conj();
                    phase.conj() * x[sr * n + sc]
                }
            })
        }
        GroupElement::SignShift { signs, shift } => {
            let n = signs.len();
            if !adjoint {
                CVector::from_fn(n, |i, _| {
                    let src = (i + n - shift) % n;
                    x[src] * f64::from(signs[src])
                })
            } else {
                CVector::from_fn(n, |i, _| x[(i + shift) % n] * f64::from(signs[i]))
            }
        }
    }
}
