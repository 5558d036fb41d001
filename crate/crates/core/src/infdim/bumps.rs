use serde::{Deserialize, Serialize};

use super::FourierFunction;
use crate::error::{invalid, Error, Result};
use crate::numerics::C64;
use crate::rng::SeededRng;

/// `φ(x) = exp(1 − 1/(1 − 4x²))` on `|x| < 1/2`, zero elsewhere; `φ(0) = 1`.
pub fn bump(x: f64) -> f64 {
    let u = 1.0 - 4.0 * x * x;
    if u <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / u).exp()
    }
}

pub fn bump_derivative(x: f64) -> f64 {
    let u = 1.0 - 4.0 * x * x;
    if u <= 0.0 {
        0.0
    } else {
        bump(x) * (-8.0 * x / (u * u))
    }
}

const BUMP_CELLS: usize = 1 << 14;

fn trapezoid(f: impl Fn(f64) -> f64) -> f64 {
    // Integrand vanishes to all orders at ±1/2, so the plain rule converges spectrally.
    let h = 1.0 / BUMP_CELLS as f64;
    (0..=BUMP_CELLS).map(|i| f(-0.5 + i as f64 * h)).sum::<f64>() * h
}

/// `‖φ‖_{L_p(ℝ)}`.
pub fn bump_norm(p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid("p must be in [1, inf)");
    }
    Ok(trapezoid(|x| bump(x).powf(p)).powf(1.0 / p))
}

/// `‖φ'‖_{L₂} / ‖φ‖_{L₂}`.
pub fn bump_sobolev_ratio() -> f64 {
    (trapezoid(|x| bump_derivative(x).powi(2)) / trapezoid(|x| bump(x).powi(2))).sqrt()
}

/// `Σ_j α_j φ_T(t − t_j)` with `φ_T(x) = T φ(T x)` on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub t: f64,
    pub centers: Vec<f64>,
    pub alphas: Vec<C64>,
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

impl BumpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 1.0 && self.t.is_finite()) {
            return invalid("T must be >= 1 so each bump fits on the circle without wrapping onto itself");
        }
        if self.centers.len() != self.alphas.len() || self.centers.is_empty() {
            return invalid("need matching, nonempty centers and coefficients");
        }
        if self.centers.iter().any(|c| !c.is_finite()) {
            return invalid("centers must be finite");
        }
        for (i, a) in self.centers.iter().enumerate() {
            for b in &self.centers[i + 1..] {
                let d = circular_distance(*a, *b);
                if d == 0.0 {
                    return invalid("bump centers collide");
                }
                if d <= 1.0 / self.t {
                    return invalid(format!("bump supports overlap: centers {a} and {b} closer than 1/T"));
                }
            }
        }
        Ok(())
    }

    /// Measure of the support, exact for a valid configuration.
    pub fn support_measure(&self) -> f64 {
        self.centers.len() as f64 / self.t
    }

    pub fn evaluate(&self, x: f64) -> C64 {
        self.centers
            .iter()
            .zip(&self.alphas)
            .map(|(c, a)| {
                let mut d = (x - c).rem_euclid(1.0);
                if d > 0.5 {
                    d -= 1.0;
                }
                a * (self.t * bump(self.t * d))
            })
            .sum()
    }

    /// `Σ |α_j|^p`.
    pub fn alpha_power_sum(&self, p: f64) -> f64 {
        self.alphas.iter().map(|a| a.norm().powf(p)).sum()
    }
}

impl FourierFunction {
    /// Fourier coefficients of a bump superposition, by the oversampled
    /// discrete transform of its exact samples.
    pub fn from_bumps(spec: &BumpSpec, n_big: usize) -> Result<FourierFunction> {
        spec.validate()?;
        if n_big == 0 {
            return invalid("N_big must be >= 1");
        }
        let p = super::OVERSAMPLE * 2 * n_big;
        let values: Vec<C64> = (0..p).map(|i| spec.evaluate(i as f64 / p as f64)).collect();
        FourierFunction::from_samples(&values, n_big)
    }
}

/// Random superpositions of `count` bumps with `T` uniform in
/// `[t_min, t_max]`, centers uniform subject to separation, and complex
/// normal coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpModel {
    pub count: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_big: usize,
}

const PLACEMENT_ATTEMPTS: usize = 10_000;

impl BumpModel {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 || self.n_big == 0 {
            return invalid("count and N_big must be >= 1");
        }
        if !(self.t_min >= 1.0 && self.t_max >= self.t_min && self.t_max.is_finite()) {
            return invalid("need 1 <= t_min <= t_max");
        }
        // Disjoint supports need count/T < 1 with room to spare for sampling.
        if 2.0 * self.count as f64 > self.t_min {
            return invalid("too many bumps for the narrowest width; need t_min >= 2*count");
        }
        Ok(())
    }

    pub fn sample_spec(&self, rng: &mut SeededRng) -> Result<BumpSpec> {
        self.validate()?;
        let t = self.t_min + (self.t_max - self.t_min) * rng.uniform();
        let mut centers: Vec<f64> = Vec::with_capacity(self.count);
        let mut attempts = 0;
        while centers.len() < self.count {
            attempts += 1;
            if attempts > PLACEMENT_ATTEMPTS {
                return Err(Error::Capacity("could not place separated bump centers".into()));
            }
            let c = rng.uniform();
            if centers.iter().all(|d| circular_distance(c, *d) > 1.0 / t) {
                centers.push(c);
            }
        }
        let alphas = (0..self.count).map(|_| rng.complex_normal()).collect();
        Ok(BumpSpec { t, centers, alphas })
    }

    pub fn sample(&self, rng: &mut SeededRng) -> Result<(BumpSpec, FourierFunction)> {
        let spec = self.sample_spec(rng)?;
        let f = FourierFunction::from_bumps(&spec, self.n_big)?;
        Ok((spec, f))
    }
}
