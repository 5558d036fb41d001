//! Functions on the circle `(0,1)` represented by Fourier coefficients, the
//! weighted (semi)norms measured by shifted instruments, smooth-and-sparse
//! bump models, the measurement schemes, and dyadic truncation.
//!
//! Derivatives use the normalized convention `(Df)^(k) = k f̂(k)`, i.e.
//! `f'/(2πi)`; the physical derivative norm is `2π ‖Df‖`.

mod bumps;
mod experiment;
mod measure;
mod truncation;

pub use bumps::{bump, bump_derivative, bump_norm, bump_sobolev_ratio, BumpModel, BumpSpec};
pub use experiment::{infdim_rip_experiment, InfdimReport, Scheme};
pub use measure::{block_measure, dyadic_block, dyadic_measure, time_sample_measure, BlockInstrument, BlockMode};
pub use truncation::{calibrate_tail_constant, dyadic_tail, truncation_level, TailProfile};

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::C64;

/// Oversampling factor of the time grid used for quadrature.
pub const OVERSAMPLE: usize = 8;

/// A trigonometric polynomial `Σ_{−N_big ≤ k < N_big} c_k e^{2πikt}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierFunction {
    n_big: usize,
    /// `coeffs[k + n_big]` is the coefficient of frequency `k`.
    coeffs: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffDirection {
    Derivative,
    Antiderivative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w_k = 1` for `−N ≤ k < N`, else 0.
    Truncated { n: usize },
    /// `w_k = 1 / max(k², 1)`.
    InverseSquare,
    /// Weights for `k = −N_big .. N_big − 1`, in order.
    Custom { weights: Vec<f64> },
}

impl WeightSpec {
    pub fn weight(&self, k: i64, n_big: usize) -> f64 {
        match self {
            WeightSpec::Truncated { n } => {
                let n = *n as i64;
                if -n <= k && k < n {
                    1.0
                } else {
                    0.0
                }
            }
            WeightSpec::InverseSquare => 1.0 / ((k * k).max(1) as f64),
            WeightSpec::Custom { weights } => {
                let idx = k + n_big as i64;
                if idx >= 0 && (idx as usize) < weights.len() {
                    weights[idx as usize]
                } else {
                    0.0
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let WeightSpec::Custom { weights } = self {
            if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
                return invalid("weights must be finite and nonnegative");
            }
        }
        Ok(())
    }
}

impl FourierFunction {
    pub fn new(n_big: usize, coeffs: Vec<C64>) -> Result<Self> {
        if n_big == 0 {
            return invalid("N_big must be >= 1");
        }
        if coeffs.len() != 2 * n_big {
            return invalid(format!("expected {} coefficients, got {}", 2 * n_big, coeffs.len()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return invalid("coefficients must be finite");
        }
        Ok(FourierFunction { n_big, coeffs })
    }

    pub fn zeros(n_big: usize) -> Self {
        FourierFunction { n_big, coeffs: vec![C64::new(0.0, 0.0); 2 * n_big] }
    }

    /// `ψ_k(t) = e^{2πikt}`.
    pub fn psi(k: i64, n_big: usize) -> Result<Self> {
        let mut f = FourierFunction::zeros(n_big);
        f.set_coeff(k, C64::new(1.0, 0.0))?;
        Ok(f)
    }

    pub fn n_big(&self) -> usize {
        self.n_big
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn frequencies(&self) -> std::ops::Range<i64> {
        -(self.n_big as i64)..self.n_big as i64
    }

    /// `f̂(k)`, zero outside the simulated band.
    pub fn coeff(&self, k: i64) -> C64 {
        let idx = k + self.n_big as i64;
        if idx >= 0 && (idx as usize) < self.coeffs.len() {
            self.coeffs[idx as usize]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn set_coeff(&mut self, k: i64, value: C64) -> Result<()> {
        let idx = k + self.n_big as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            return invalid(format!("frequency {k} outside [-{0}, {0})", self.n_big));
        }
        self.coeffs[idx as usize] = value;
        Ok(())
    }

    fn map_coeffs(&self, f: impl Fn(i64, C64) -> C64) -> FourierFunction {
        let coeffs = self.frequencies().zip(&self.coeffs).map(|(k, c)| f(k, *c)).collect();
        FourierFunction { n_big: self.n_big, coeffs }
    }

    pub fn scaled(&self, a: C64) -> FourierFunction {
        self.map_coeffs(|_, c| c * a)
    }

    pub fn add(&self, other: &FourierFunction) -> Result<FourierFunction> {
        if other.n_big != self.n_big {
            return invalid("functions must share N_big");
        }
        Ok(self.map_coeffs(|k, c| c + other.coeff(k)))
    }

    /// `τ_t f = f(· − t)`: coefficient `k` picks up `e^{−2πikt}`.
    pub fn shift(&self, t: f64) -> FourierFunction {
        self.map_coeffs(|k, c| c * C64::from_polar(1.0, -TAU * (k as f64) * t.rem_euclid(1.0)))
    }

    pub fn differentiate(&self, direction: DiffDirection) -> Result<FourierFunction> {
        match direction {
            DiffDirection::Derivative => Ok(self.map_coeffs(|k, c| c * k as f64)),
            DiffDirection::Antiderivative => {
                if self.coeff(0).norm() > 0.0 {
                    return invalid("antiderivative needs a function with zero mean (DC coefficient 0)");
                }
                Ok(self.map_coeffs(|k, c| if k == 0 { C64::new(0.0, 0.0) } else { c / k as f64 }))
            }
        }
    }

    /// The same function with its mean removed.
    pub fn without_dc(&self) -> FourierFunction {
        self.map_coeffs(|k, c| if k == 0 { C64::new(0.0, 0.0) } else { c })
    }

    /// `(Σ_k w_k |f̂(k)|²)^{1/2}`.
    pub fn weighted_seminorm(&self, w: &WeightSpec) -> f64 {
        self.frequencies()
            .zip(&self.coeffs)
            .map(|(k, c)| w.weight(k, self.n_big) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖f‖_{L₂}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `f(t)` by direct summation.
    pub fn evaluate(&self, t: f64) -> C64 {
        self.frequencies()
            .zip(&self.coeffs)
            .map(|(k, c)| c * C64::from_polar(1.0, TAU * (k as f64) * t))
            .sum()
    }

    /// Values at `t_n = n / P`, `P = OVERSAMPLE · 2 N_big`.
    pub fn samples(&self) -> Vec<C64> {
        let p = self.grid_len();
        let mut buf = vec![C64::new(0.0, 0.0); p];
        for (k, c) in self.frequencies().zip(&self.coeffs) {
            buf[k.rem_euclid(p as i64) as usize] = *c;
        }
        plan(p, true).process(&mut buf);
        buf
    }

    pub fn grid_len(&self) -> usize {
        OVERSAMPLE * 2 * self.n_big
    }

    /// `‖f‖_{L_q(0,1)}` by the (spectrally accurate) periodic trapezoid rule.
    pub fn lq_norm_function(&self, q: f64) -> Result<f64> {
        if !(q >= 1.0 && q.is_finite()) {
            return invalid("q must be in [1, inf)");
        }
        let vals = self.samples();
        let mags: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return Ok(0.0);
        }
        let mean = mags.iter().map(|m| (m / max).powf(q)).sum::<f64>() / mags.len() as f64;
        Ok(max * mean.powf(1.0 / q))
    }

    /// Fraction of grid samples where `|f| > tol · max |f|`.
    pub fn support_fraction(&self, tol: f64) -> f64 {
        let vals = self.samples();
        let max = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        vals.iter().filter(|v| v.norm() > tol * max).count() as f64 / vals.len() as f64
    }

    /// Coefficients of a function given on the uniform grid of length `p`
    /// (`p ≥ 2 N_big`), keeping `−N_big ≤ k < N_big`.
    pub fn from_samples(values: &[C64], n_big: usize) -> Result<Self> {
        let p = values.len();
        if p < 2 * n_big {
            return invalid("grid too coarse for the requested band");
        }
        let mut buf = values.to_vec();
        plan(p, false).process(&mut buf);
        let scale = 1.0 / p as f64;
        let coeffs = (-(n_big as i64)..n_big as i64).map(|k| buf[k.rem_euclid(p as i64) as usize] * scale).collect();
        FourierFunction::new(n_big, coeffs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("function serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: FourierFunction =
            serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("function json: {e}")))?;
        FourierFunction::new(f.n_big, f.coeffs)
    }
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    /// Membership with the physical derivative `‖f'‖ = 2π ‖Df‖`.
    pub member: bool,
    /// Membership with the normalized derivative `‖Df‖`.
    pub member_normalized: bool,
    pub measured_rho: f64,
    pub measured_rho_normalized: f64,
    pub measured_gamma: f64,
}

/// Tests `‖f'‖ ≤ ρ ‖f‖` and `λ(supp f) ≤ γ`, the support measured on the
/// quadrature grid with a relative threshold.
pub fn k_rho_gamma_membership(f: &FourierFunction, rho: f64, gamma: f64, support_tol: f64) -> Result<Membership> {
    if !(support_tol > 0.0) {
        return invalid("support_tol must be positive");
    }
    let norm = f.l2_norm();
    if norm == 0.0 {
        return invalid("membership of the zero function is undefined");
    }
    let normalized = f.differentiate(DiffDirection::Derivative)?.l2_norm() / norm;
    let physical = TAU * normalized;
    let measured_gamma = f.support_fraction(support_tol);
    Ok(Membership {
        member: physical <= rho && measured_gamma <= gamma,
        member_normalized: normalized <= rho && measured_gamma <= gamma,
        measured_rho: physical,
        measured_rho_normalized: normalized,
        measured_gamma,
    })
}

/// Sparsity level guaranteed for smooth, sparsely supported functions:
/// `(1 + 4ρ²/N²) γ^{2/q − 1}`, valid for `ρ ≤ N/2`.
pub fn smooth_sparsity_level(rho: f64, gamma: f64, n: usize, q: f64) -> Result<f64> {
    let nf = n as f64;
    if !(rho >= 0.0 && rho <= nf / 2.0) {
        return invalid("rho must be in [0, N/2]");
    }
    if !(gamma > 0.0 && gamma <= 1.0) || !(q > 1.0 && q <= 2.0) {
        return invalid("need gamma in (0, 1] and q in (1, 2]");
    }
    Ok((1.0 + 4.0 * rho * rho / (nf * nf)) * gamma.powf(2.0 / q - 1.0))
}
