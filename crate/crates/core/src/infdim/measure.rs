use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::FourierFunction;
use crate::error::{invalid, Result};
use crate::numerics::C64;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMode {
    Deterministic,
    Rademacher,
}

/// `d` functionals, functional `l` summing the coefficients of the
/// contiguous block `J_l = {−N + lL + j : 0 ≤ j < L}` (0-based `l`),
/// optionally with one sign pattern of length `L` shared by all blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInstrument {
    pub n: usize,
    pub l: usize,
    pub d: usize,
    pub mode: BlockMode,
    pub signs: Option<Vec<i8>>,
}

impl BlockInstrument {
    pub fn deterministic(n: usize, l: usize) -> Result<Self> {
        Self::check(n, l)?;
        Ok(BlockInstrument { n, l, d: 2 * n / l, mode: BlockMode::Deterministic, signs: None })
    }

    pub fn rademacher(n: usize, l: usize, rng: &mut SeededRng) -> Result<Self> {
        Self::check(n, l)?;
        let signs = (0..l).map(|_| rng.rademacher()).collect();
        Ok(BlockInstrument { n, l, d: 2 * n / l, mode: BlockMode::Rademacher, signs: Some(signs) })
    }

    pub fn new(n: usize, l: usize, mode: BlockMode, rng: &mut SeededRng) -> Result<Self> {
        match mode {
            BlockMode::Deterministic => Self::deterministic(n, l),
            BlockMode::Rademacher => Self::rademacher(n, l, rng),
        }
    }

    fn check(n: usize, l: usize) -> Result<()> {
        if n == 0 || l == 0 || (2 * n) % l != 0 {
            return invalid(format!("block length L={l} must divide 2N={}", 2 * n));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Self::check(self.n, self.l)?;
        if self.d * self.l != 2 * self.n {
            return invalid("need 2N = L*d");
        }
        match (&self.mode, &self.signs) {
            (BlockMode::Deterministic, None) => Ok(()),
            (BlockMode::Rademacher, Some(s)) if s.len() == self.l && s.iter().all(|v| *v == 1 || *v == -1) => Ok(()),
            _ => invalid("signs must be absent for deterministic blocks and a ±1 vector of length L otherwise"),
        }
    }

    /// Frequencies of block `index` (0-based).
    pub fn block(&self, index: usize) -> std::ops::Range<i64> {
        let start = -(self.n as i64) + (index * self.l) as i64;
        start..start + self.l as i64
    }

    fn sign(&self, j: usize) -> f64 {
        self.signs.as_ref().map_or(1.0, |s| s[j] as f64)
    }
}

/// `u(τ_t f)` for a block instrument.
pub fn block_measure(f: &FourierFunction, inst: &BlockInstrument, t: f64) -> Result<Vec<C64>> {
    inst.validate()?;
    Ok((0..inst.d)
        .map(|b| {
            inst.block(b)
                .enumerate()
                .map(|(j, k)| f.coeff(k) * C64::from_polar(inst.sign(j), -TAU * k as f64 * t))
                .sum()
        })
        .collect())
}

/// `g(t)` computed from the derivative as `Σ_{j≠0} (Dg)^(j)/j · e^{2πijt}`.
pub fn time_sample_measure(g: &FourierFunction, t: f64) -> Result<C64> {
    if g.coeff(0).norm() > 0.0 {
        return invalid("time sampling needs a DC-free function; measure the mean separately");
    }
    let dg = g.differentiate(super::DiffDirection::Derivative)?;
    Ok(dg
        .frequencies()
        .filter(|k| *k != 0)
        .map(|k| dg.coeff(k) / k as f64 * C64::from_polar(1.0, TAU * k as f64 * t))
        .sum())
}

/// `I_l = {k : 2^{l−2} < |k| ≤ 2^{l−1}}` for `l ≥ 1`; `I_0 = {0}`.
pub fn dyadic_block(l: u32) -> Vec<i64> {
    if l == 0 {
        return vec![0];
    }
    let hi = 1i64 << (l - 1);
    let lo = if l == 1 { 0 } else { 1i64 << (l - 2) };
    (lo + 1..=hi).flat_map(|k| [-k, k]).collect()
}

/// `Σ_{k∈I_l} e^{−2πikt} ĝ(k)`.
pub fn dyadic_measure(g: &FourierFunction, t: f64, l: u32) -> C64 {
    dyadic_block(l)
        .into_iter()
        .map(|k| g.coeff(k) * C64::from_polar(1.0, -TAU * k as f64 * t))
        .sum()
}
