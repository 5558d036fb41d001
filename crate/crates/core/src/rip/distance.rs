use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::group_ops::MeasurementEnsemble;
use crate::numerics::{l2_norm, lq_norm, CVector, Exponent, C64};

const UNIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedBound {
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceCheck {
    /// `|‖Ax − Ay‖² − ‖x − y‖²|`.
    pub observed: f64,
    pub bound: f64,
    pub pass: bool,
    /// The sharper bound for sparse pairs whose difference is not too spread
    /// out; `None` when its hypothesis fails.
    pub refined: Option<RefinedBound>,
}

/// Distortion of the difference `x − y` against the multiresolution bound
/// `max(√2 δ ‖h‖_X ‖h‖₂ / √s, 2 δ² ‖h‖_X² / s)`, `X = ℓ_q`.
pub fn distance_bound_check(
    a: &MeasurementEnsemble,
    x: &[C64],
    y: &[C64],
    s: f64,
    delta: f64,
    q: f64,
    epsilon: f64,
) -> Result<DistanceCheck> {
    if x.len() != y.len() {
        return invalid("x and y must have equal length");
    }
    if !(s > 0.0 && delta > 0.0 && epsilon > 0.0) {
        return invalid("s, delta and epsilon must be positive");
    }
    let h: Vec<C64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let h_two = l2_norm(&h);
    if h_two == 0.0 {
        return invalid("x and y must differ");
    }
    let h_x = lq_norm(&h, Exponent::finite(q)?)?;
    let ah = a.measure(&h)?;
    let observed = (ah.norm_squared() - h_two * h_two).abs();
    let sqrt2 = std::f64::consts::SQRT_2;
    let bound = (sqrt2 * delta * h_x * h_two / s.sqrt()).max(2.0 * delta * delta * h_x * h_x / s);

    let refined = if h_x <= s.sqrt() * h_two / (sqrt2 * (1.0 + epsilon) * delta) {
        let r = (h_two * h_two / (1.0 + epsilon)).min(sqrt2 * delta * (l2_norm(x) + l2_norm(y)) * h_two);
        Some(RefinedBound { bound: r, pass: observed <= r })
    } else {
        None
    };
    Ok(DistanceCheck { observed, bound, pass: observed <= bound, refined })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DiffVerdict {
    /// `lower ≤ ‖x − y‖² ≤ upper`.
    Separated { lower: f64, upper: f64 },
    /// `‖x − y‖ ≤ radius`.
    Close { radius: f64 },
}

/// Separation threshold `α` and fallback radius factor `β`; the defaults are
/// `α = 4√2`, `β = 8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakDiffParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for WeakDiffParams {
    fn default() -> Self {
        WeakDiffParams { alpha: 4.0 * std::f64::consts::SQRT_2, beta: 8.0 }
    }
}

impl WeakDiffParams {
    /// Sandwich factor `2√2 / √(α(α − 2√2))`.
    pub fn spread(&self) -> Result<f64> {
        let r = 2.0 * std::f64::consts::SQRT_2;
        if !(self.alpha > r) {
            return invalid("alpha must exceed 2*sqrt(2)");
        }
        let spread = r / (self.alpha * (self.alpha - r)).sqrt();
        if spread >= 1.0 {
            return invalid(format!(
                "alpha = {} gives a non-positive lower factor (needs alpha*(alpha - 2*sqrt(2)) > 8)",
                self.alpha
            ));
        }
        if !(self.beta > 0.0 && self.beta * (self.beta - r) > self.alpha * self.alpha) {
            return invalid("beta must satisfy beta*(beta - 2*sqrt(2)) > alpha^2");
        }
        Ok(spread)
    }
}

/// Either certifies that unit vectors `x`, `y` are well separated with
/// `‖x − y‖²` sandwiched by `‖Ax − Ay‖²`, or that they are `βδ`-close.
pub fn weak_diff_classify(
    a: &MeasurementEnsemble,
    x: &[C64],
    y: &[C64],
    delta: f64,
    params: &WeakDiffParams,
) -> Result<DiffVerdict> {
    for (name, v) in [("x", x), ("y", y)] {
        if (l2_norm(v) - 1.0).abs() > UNIT_TOL {
            return invalid(format!("{name} must be a unit vector"));
        }
    }
    if x.len() != y.len() {
        return invalid("x and y must have equal length");
    }
    if !(delta > 0.0) {
        return invalid("delta must be positive");
    }
    let spread = params.spread()?;
    let h: Vec<C64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let ah: CVector = a.measure(&h)?;
    let dist = ah.norm();
    Ok(if dist >= params.alpha * delta {
        let sq = dist * dist;
        DiffVerdict::Separated { lower: (1.0 - spread) * sq, upper: (1.0 + spread) * sq }
    } else {
        DiffVerdict::Close { radius: params.beta * delta }
    })
}
