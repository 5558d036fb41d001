use serde::{Deserialize, Serialize};

use super::measure::{dyadic_block, dyadic_measure};
use super::FourierFunction;
use crate::error::{invalid, Result};

/// Smallest `l₀ ≥ 1` with `2^{−2l₀/q'} ≤ δ / (2 C₂ s)`.
pub fn truncation_level(q: f64, s: f64, delta: f64, c2: f64) -> Result<u32> {
    if !(q > 1.0 && q <= 2.0) {
        return invalid("q must be in (1, 2]");
    }
    if !(s > 0.0 && delta > 0.0 && c2 > 0.0) || !(s.is_finite() && c2.is_finite()) {
        return invalid("s, delta and C2 must be positive and finite");
    }
    let q_conj = q / (q - 1.0);
    let target = delta / (2.0 * c2 * s);
    let holds = |l: u32| (-2.0 * l as f64 / q_conj).exp2() <= target;
    let guess = (0.5 * q_conj * (1.0 / target).log2()).ceil().max(1.0);
    if guess > 1e6 {
        return invalid("truncation level out of range");
    }
    let mut l = (guess as u32).saturating_sub(1).max(1);
    while !holds(l) {
        l += 1;
    }
    Ok(l)
}

/// Number of dyadic levels needed to cover the band of `g`.
fn top_level(g: &FourierFunction) -> u32 {
    let mut l = 1;
    while (1usize << (l - 1)) < g.n_big() {
        l += 1;
    }
    l
}

/// `Σ_{l>l₀} |u_l(τ_t g')|²` at shift `t`, or its expectation over `t`
/// (the energy of `ĝ` beyond `|k| = 2^{l₀−1}`) when `t` is `None`.
pub fn dyadic_tail(g: &FourierFunction, l0: u32, t: Option<f64>) -> f64 {
    let top = top_level(g);
    (l0 + 1..=top)
        .map(|l| match t {
            Some(t) => dyadic_measure(g, t, l).norm_sqr(),
            None => dyadic_block(l).into_iter().map(|k| g.coeff(k).norm_sqr()).sum(),
        })
        .sum()
}

/// Tails for `l₀ = 0, 1, …` up to the band edge, maximized over the given
/// shifts (expectation if none are given).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub tails: Vec<f64>,
}

impl TailProfile {
    pub fn of(g: &FourierFunction, shifts: &[f64]) -> TailProfile {
        let top = top_level(g);
        let tails = (0..=top)
            .map(|l0| {
                if shifts.is_empty() {
                    dyadic_tail(g, l0, None)
                } else {
                    shifts.iter().map(|t| dyadic_tail(g, l0, Some(*t))).fold(0.0, f64::max)
                }
            })
            .collect();
        TailProfile { tails }
    }

    pub fn at(&self, l0: u32) -> f64 {
        self.tails.get(l0 as usize).copied().unwrap_or(0.0)
    }

    pub fn is_non_increasing(&self) -> bool {
        self.tails.windows(2).all(|w| w[1] <= w[0])
    }

    /// `max_{l ≥ anchor} tail(l) / (tail(anchor) 2^{−(l−anchor)})`.
    pub fn envelope_ratio(&self, anchor: u32) -> f64 {
        let base = self.at(anchor);
        if base == 0.0 {
            return if self.tails.iter().skip(anchor as usize).all(|t| *t == 0.0) { 0.0 } else { f64::INFINITY };
        }
        (anchor..self.tails.len() as u32)
            .map(|l| self.at(l) / (base * (-((l - anchor) as f64)).exp2()))
            .fold(0.0, f64::max)
    }
}

/// Smallest `C₂` with `tail(l) ≤ C₂ s 2^{−2l/q'} ‖g‖²` for every `l ≥ 1` and
/// every `(g, s)` given.
pub fn calibrate_tail_constant(pairs: &[(FourierFunction, f64)], q: f64, shifts: &[f64]) -> Result<f64> {
    if !(q > 1.0 && q <= 2.0) {
        return invalid("q must be in (1, 2]");
    }
    if pairs.is_empty() {
        return invalid("need at least one calibration pair");
    }
    let q_conj = q / (q - 1.0);
    let mut c2: f64 = 0.0;
    for (g, s) in pairs {
        if !(*s > 0.0) {
            return invalid("sparsity levels must be positive");
        }
        let norm_sq = g.l2_norm().powi(2);
        if norm_sq == 0.0 {
            return invalid("calibration function is zero");
        }
        let profile = TailProfile::of(g, shifts);
        for l in 1..profile.tails.len() as u32 {
            let scale = s * norm_sq * (-2.0 * l as f64 / q_conj).exp2();
            c2 = c2.max(profile.at(l) / scale);
        }
    }
    Ok(c2)
}
