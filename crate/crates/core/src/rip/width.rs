use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::empirical::{project_low_rank, project_tensor_rank};
use crate::error::{invalid, Result};
use crate::numerics::{CVector, C64};
use crate::rng::SeededRng;
use crate::sparsity::{square_side, SparsityModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Whether each per-draw supremum is computed exactly (otherwise it is a
    /// lower bound and so is the mean).
    pub exact: bool,
}

/// Monte Carlo estimate of `E sup_{x ∈ D} ⟨ξ, x⟩` over the unit vectors `D`
/// of the model, for real standard Gaussian `ξ ∈ R^N`.
pub fn gaussian_width(model: &SparsityModel, dim: usize, trials: usize, rng: &SeededRng) -> Result<WidthEstimate> {
    if trials < 2 {
        return invalid("trials must be >= 2");
    }
    model.check_dim(dim)?;
    let exact = match *model {
        SparsityModel::Canonical { .. } | SparsityModel::LowRank { .. } => true,
        SparsityModel::LqCap { q, .. } => q == 1.0,
        SparsityModel::TensorRank { .. } => false,
    };
    let draws: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut trng = rng.substream(t as u64);
            let xi: Vec<f64> = (0..dim).map(|_| trng.normal()).collect();
            sup_over_model(model, &xi, &mut trng)
        })
        .collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(WidthEstimate { mean, stderr: (var / n).sqrt(), exact })
}

fn sup_over_model(model: &SparsityModel, xi: &[f64], rng: &mut SeededRng) -> f64 {
    let dim = xi.len();
    match *model {
        SparsityModel::Canonical { k } => {
            let mut sq: Vec<f64> = xi.iter().map(|v| v * v).collect();
            sq.sort_by(|a, b| b.total_cmp(a));
            sq[..k].iter().sum::<f64>().sqrt()
        }
        SparsityModel::LqCap { q, s } if q == 1.0 => l1_cap_sup(xi, s),
        SparsityModel::LqCap { q, s } => {
            let z = CVector::from_iterator(dim, xi.iter().map(|v| C64::new(*v, 0.0)));
            inner_with_unit(xi, &super::project_lq_cap(&z, q, s))
        }
        SparsityModel::LowRank { r } => {
            let n = square_side(dim).expect("checked by model");
            let z = CVector::from_iterator(dim, xi.iter().map(|v| C64::new(*v, 0.0)));
            inner_with_unit(xi, &project_low_rank(&z, n, r))
        }
        SparsityModel::TensorRank { s, n, d } => {
            let z = CVector::from_iterator(dim, xi.iter().map(|v| C64::new(*v, 0.0)));
            inner_with_unit(xi, &project_tensor_rank(&z, n, d, s, rng))
        }
    }
}

fn inner_with_unit(xi: &[f64], x: &CVector) -> f64 {
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    xi.iter().zip(x.iter()).map(|(a, b)| a * b.re).sum::<f64>() / norm
}

/// `sup { ⟨ξ, x⟩ : ‖x‖₂ = 1, ‖x‖₁ ≤ √s }`, attained by a normalized
/// soft-thresholding of `ξ` whose threshold makes the `ℓ₁` constraint active.
fn l1_cap_sup(xi: &[f64], s: f64) -> f64 {
    let mags: Vec<f64> = xi.iter().map(|v| v.abs()).collect();
    let value = |tau: f64| -> (f64, f64) {
        let (mut l1, mut l2sq, mut dot) = (0.0, 0.0, 0.0);
        for &m in &mags {
            let t = (m - tau).max(0.0);
            l1 += t;
            l2sq += t * t;
            dot += m * t;
        }
        let l2 = l2sq.sqrt();
        if l2 == 0.0 {
            (0.0, 0.0)
        } else {
            (l1 / l2, dot / l2)
        }
    };
    let root_s = s.sqrt();
    let (ratio0, dot0) = value(0.0);
    if ratio0 <= root_s {
        return dot0;
    }
    let top = mags.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (r, _) = value(mid);
        if r > 0.0 && r <= root_s {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    value(hi).1
}
