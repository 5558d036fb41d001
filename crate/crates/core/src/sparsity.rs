//! Generalized sparsity: `x` is `(K, s)`-sparse when `‖x‖_X ≤ √s ‖x‖₂`.
//! Models, witness generators, the optimized sparsity parameter of an
//! instrument, and the largest meaningful sparsity `s_max`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instruments::Instrument;
use crate::numerics::{l2_norm, lq_norm, magnitude_norm, schatten_norm, CMatrix, CVector, Exponent, C64};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SparsityModel {
    /// At most `k` nonzero coordinates.
    Canonical { k: usize },
    /// `‖x‖_q ≤ √s ‖x‖₂` with `q ∈ [1, 2)`.
    LqCap { q: f64, s: f64 },
    /// Square matrices (flattened row-major) of rank at most `r`.
    LowRank { r: usize },
    /// `d`-fold tensors on `C^n` (flattened, first index slowest) of rank at most `s`.
    TensorRank { s: usize, n: usize, d: usize },
}

impl SparsityModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SparsityModel::Canonical { k } if k < 1 => invalid("k must be >= 1"),
            SparsityModel::LqCap { q, .. } if !(1.0..2.0).contains(&q) => invalid("q must be in [1, 2)"),
            SparsityModel::LqCap { s, .. } if !(s > 0.0 && s.is_finite()) => invalid("s must be positive"),
            SparsityModel::LowRank { r } if r < 1 => invalid("r must be >= 1"),
            SparsityModel::TensorRank { s, n, d } if s < 1 || n < 1 || d < 1 => {
                invalid("tensor rank, n and d must be >= 1")
            }
            _ => Ok(()),
        }
    }

    /// Checks the model against an ambient vector length.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        self.validate()?;
        match *self {
            SparsityModel::Canonical { k } if k > dim => invalid(format!("k = {k} exceeds N = {dim}")),
            SparsityModel::LqCap { q, s } => {
                if s < 1.0 {
                    return invalid("s must be >= 1: no nonzero vector has ||x||_q < ||x||_2");
                }
                let _ = lq_support(q, s, dim);
                Ok(())
            }
            SparsityModel::LowRank { r } => {
                let n = square_side(dim)?;
                if r > n {
                    return invalid(format!("rank {r} exceeds matrix size {n}"));
                }
                Ok(())
            }
            SparsityModel::TensorRank { n, d, .. } => {
                if (n as u128).checked_pow(d as u32) != Some(dim as u128) {
                    return invalid(format!("tensor space n^d = {n}^{d} does not match dimension {dim}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SparsityModel::Canonical { k } => format!("canonical(k={k})"),
            SparsityModel::LqCap { q, s } => format!("lq_cap(q={q},s={s})"),
            SparsityModel::LowRank { r } => format!("low_rank(r={r})"),
            SparsityModel::TensorRank { s, n, d } => format!("tensor_rank(s={s},n={n},d={d})"),
        }
    }
}

pub(crate) fn square_side(dim: usize) -> Result<usize> {
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim {
        return invalid(format!("dimension {dim} is not a perfect square"));
    }
    Ok(n)
}

/// Largest support size `j ≤ dim` with `j^{2/q−1} ≤ s`: flat vectors on `j`
/// coordinates are exactly the extremal `(ℓ_q, s)`-sparse witnesses.
pub fn lq_support(q: f64, s: f64, dim: usize) -> usize {
    let e = 2.0 / q - 1.0;
    if e <= 0.0 {
        return dim;
    }
    let mut j = (s.powf(1.0 / e).floor() as usize).clamp(1, dim.max(1));
    while j < dim && ((j + 1) as f64).powf(e) <= s * (1.0 + 1e-12) {
        j += 1;
    }
    while j > 1 && (j as f64).powf(e) > s * (1.0 + 1e-12) {
        j -= 1;
    }
    j
}

/// `‖x‖_q² / ‖x‖₂²`, the least `s` for which `x` is `(ℓ_q, s)`-sparse.
pub fn sparsity_level(x: &[C64], q: Exponent) -> Result<f64> {
    let two = l2_norm(x);
    if two == 0.0 {
        return invalid("sparsity level of the zero vector is undefined");
    }
    Ok((lq_norm(x, q)? / two).powi(2))
}

/// `‖a‖_{S_q}² / ‖a‖_{S₂}²`.
pub fn sparsity_level_schatten(a: &CMatrix, q: Exponent) -> Result<f64> {
    let two = crate::numerics::frobenius_norm(a);
    if two == 0.0 {
        return invalid("sparsity level of the zero matrix is undefined");
    }
    Ok((schatten_norm(a, q)? / two).powi(2))
}

/// `N^{2/q−1} = sup_x ‖x‖_q² / ‖x‖₂²` over `C^N`.
pub fn s_max(q: f64, n: usize) -> Result<f64> {
    if !(1.0..2.0).contains(&q) {
        return invalid("q must be in [1, 2)");
    }
    if n < 1 {
        return invalid("N must be >= 1");
    }
    Ok((n as f64).powf(2.0 / q - 1.0))
}

fn normalize(mut v: CVector) -> CVector {
    let norm = v.norm();
    if norm > 0.0 {
        v /= C64::from(norm);
    }
    v
}

/// A random unit vector of the model, of length `dim`.
pub fn sample_sparse(model: &SparsityModel, dim: usize, rng: &mut SeededRng) -> Result<CVector> {
    model.check_dim(dim)?;
    Ok(match *model {
        SparsityModel::Canonical { k } => {
            let mut v = CVector::zeros(dim);
            for i in rng.choose_distinct(dim, k) {
                v[i] = rng.complex_normal();
            }
            normalize(v)
        }
        SparsityModel::LqCap { q, s } => {
            let j = lq_support(q, s, dim);
            let amp = 1.0 / (j as f64).sqrt();
            let mut v = CVector::zeros(dim);
            for i in rng.choose_distinct(dim, j) {
                v[i] = rng.unit_phase() * amp;
            }
            v
        }
        SparsityModel::LowRank { r } => {
            let n = square_side(dim)?;
            let u = CMatrix::from_fn(n, r, |_, _| rng.complex_normal());
            let w = CMatrix::from_fn(n, r, |_, _| rng.complex_normal());
            let a = u * w.adjoint();
            normalize(crate::instruments::flatten_row_major(&a))
        }
        SparsityModel::TensorRank { s, n, d } => {
            let mut t = CVector::zeros(dim);
            for _ in 0..s {
                let factors: Vec<CVector> = (0..d).map(|_| CVector::from_fn(n, |_, _| rng.complex_normal())).collect();
                t += rank_one_tensor(&factors);
            }
            normalize(t)
        }
    })
}

/// `u₁ ⊗ … ⊗ u_d`, first factor slowest.
pub fn rank_one_tensor(factors: &[CVector]) -> CVector {
    let mut out = CVector::from_element(1, C64::new(1.0, 0.0));
    for f in factors {
        let prev = out;
        out = CVector::from_fn(prev.len() * f.len(), |idx, _| prev[idx / f.len()] * f[idx % f.len()]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub points: usize,
    pub include_infinity: bool,
}

impl Default for SpGrid {
    fn default() -> Self {
        SpGrid { q_min: 2.0 + 1e-3, q_max: 128.0, points: 200, include_infinity: true }
    }
}

impl SpGrid {
    /// Log-spaced points on `[q_min, q_max]`, then `∞` if requested.
    pub fn points(&self) -> Result<Vec<Exponent>> {
        if !(self.q_min > 2.0 && self.q_max >= self.q_min && self.q_max.is_finite()) {
            return invalid("grid needs 2 < q'_min <= q'_max < inf");
        }
        if self.points == 0 && !self.include_infinity {
            return invalid("grid is empty");
        }
        let mut out: Vec<Exponent> = match self.points {
            0 => Vec::new(),
            1 => vec![Exponent::Finite(self.q_min)],
            p => {
                let (a, b) = (self.q_min.ln(), self.q_max.ln());
                (0..p).map(|i| Exponent::Finite((a + (b - a) * i as f64 / (p - 1) as f64).exp())).collect()
            }
        };
        if self.include_infinity {
            out.push(Exponent::Infinity);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpOptResult {
    pub q_opt: Exponent,
    pub value: f64,
    pub grid: Vec<Exponent>,
    pub values: Vec<f64>,
}

/// `(q')³ r^{1−2/q'} ‖η‖_{q'}²` for a magnitude profile (entries or singular
/// values). At `q' = ∞` the diverging cubic factor is capped at `q_cap³`.
pub fn sp_objective(profile: &[f64], r: f64, q: Exponent, q_cap: f64) -> Result<f64> {
    let norm = magnitude_norm(profile, q)?;
    Ok(match q {
        Exponent::Finite(qp) => qp.powi(3) * r.powf(1.0 - 2.0 / qp) * norm * norm,
        Exponent::Infinity => q_cap.powi(3) * r * norm * norm,
    })
}

/// Minimizes the sparsity-parameter objective over the grid; ties go to the
/// smaller exponent.
pub fn sp_eta_optimize(instrument: &Instrument, r: usize, grid: &SpGrid) -> Result<SpOptResult> {
    if r < 1 {
        return invalid("r must be >= 1");
    }
    let points = grid.points()?;
    let profile = instrument.magnitude_profile();
    let values = points
        .iter()
        .map(|&q| sp_objective(&profile, r as f64, q, grid.q_max))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    Ok(SpOptResult { q_opt: points[best], value: values[best], grid: points, values })
}
