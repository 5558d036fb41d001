//! Norms, singular values and operator norms on complex vectors and matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

/// An exponent in `[1, ∞]`, with infinity as its own tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(q: f64) -> Result<Self> {
        let e = Exponent::Finite(q);
        e.check()?;
        Ok(e)
    }

    /// Rejects exponents below one and non-finite tags hiding in `Finite`.
    pub fn check(self) -> Result<()> {
        match self {
            Exponent::Infinity => Ok(()),
            Exponent::Finite(q) if q.is_finite() && q >= 1.0 => Ok(()),
            Exponent::Finite(q) => invalid(format!("exponent must be >= 1, got {q}")),
        }
    }

    /// `1/q`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(q) => 1.0 / q,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate `q' = q/(q-1)`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(q) if q == 1.0 => Exponent::Infinity,
            Exponent::Finite(q) => Exponent::Finite(q / (q - 1.0)),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let q: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("not an exponent: {other:?}")))?;
                Exponent::finite(q)
            }
        }
    }
}

impl From<Exponent> for String {
    fn from(e: Exponent) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// ℓ_q norm of a sequence of nonnegative magnitudes, computed with scaling by
/// the maximum so that large `q` does not overflow.
pub fn magnitude_norm(mags: &[f64], q: Exponent) -> Result<f64> {
    q.check()?;
    let max = mags.iter().copied().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    match q {
        Exponent::Infinity => Ok(max),
        Exponent::Finite(q) => {
            let sum: f64 = mags.iter().map(|m| (m / max).powf(q)).sum();
            Ok(max * sum.powf(1.0 / q))
        }
    }
}

pub fn lq_norm(x: &[C64], q: Exponent) -> Result<f64> {
    let mags: Vec<f64> = x.iter().map(|z| z.norm()).collect();
    magnitude_norm(&mags, q)
}

pub fn l2_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨u, v⟩ = Σ conj(u_j) v_j`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Singular values in non-increasing order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn schatten_norm(a: &CMatrix, q: Exponent) -> Result<f64> {
    q.check()?;
    magnitude_norm(&singular_values(a), q)
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
///
/// Only the lower triangle is trusted, as in the underlying LAPACK-style
/// routine; callers pass matrices that are Hermitian up to rounding.
pub fn hermitian_extremes(h: &CMatrix) -> (f64, f64) {
    let n = h.nrows();
    if n == 1 {
        let v = h[(0, 0)].re;
        return (v, v);
    }
    if n == 2 {
        // Closed form keeps the hot 2x2 path of support scans cheap.
        let a = h[(0, 0)].re;
        let d = h[(1, 1)].re;
        let b = h[(1, 0)].norm();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        return (mid - rad, mid + rad);
    }
    let eig = h.clone().symmetric_eigenvalues();
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Spectral radius of a Hermitian matrix together with a unit eigenvector
/// attaining it.
pub fn hermitian_extreme_pair(h: &CMatrix) -> (f64, CVector) {
    let eig = h.clone().symmetric_eigen();
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |best, (i, v)| if v.abs() > best.1.abs() || i == 0 { (i, *v) } else { best });
    (val.abs(), eig.eigenvectors.column(idx).into_owned())
}

/// Embeds a real matrix into the complex field.
pub fn complexify(a: &DMatrix<f64>) -> CMatrix {
    a.map(|v| C64::new(v, 0.0))
}
