//! Measurement instruments: the fixed vector or matrix whose group orbit
//! generates every measurement functional.
//!
//! Vector instruments of length `N` are normalized to `‖η‖₂ = √N`; matrix
//! instruments in `M_n` to `‖η‖_{S₂} = n`. With that normalization every
//! isotropic group action averages `σ(g)η η* σ(g)*` to the identity.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{frobenius_norm, l2_norm, CMatrix, CVector, C64};
use crate::rng::SeededRng;

const VECTOR_NORM_TOL: f64 = 1e-10;
const MATRIX_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstrumentKind {
    Flat,
    DecayingWindow { alpha: f64, support: usize },
    ScaledIdentityMatrix,
    SchattenDecayMatrix { alpha: f64 },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Vector(CVector),
    Matrix(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    kind: InstrumentKind,
    payload: Payload,
}

impl Instrument {
    pub fn kind(&self) -> &InstrumentKind {
        &self.kind
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self.payload, Payload::Matrix(_))
    }

    /// Length of the vectors the instrument probes: `N`, or `n²` for a
    /// matrix instrument acting on `M_n`.
    pub fn ambient_dim(&self) -> usize {
        match &self.payload {
            Payload::Vector(v) => v.len(),
            Payload::Matrix(a) => a.nrows() * a.ncols(),
        }
    }

    /// Group modulus: `N` for vectors, `n` for `n × n` matrices.
    pub fn modulus(&self) -> usize {
        match &self.payload {
            Payload::Vector(v) => v.len(),
            Payload::Matrix(a) => a.nrows(),
        }
    }

    /// Entries in row-major order.
    pub fn flattened(&self) -> CVector {
        match &self.payload {
            Payload::Vector(v) => v.clone(),
            Payload::Matrix(a) => flatten_row_major(a),
        }
    }

    /// Magnitude profile entering `‖η‖_{q'}`: entry moduli for a vector,
    /// singular values for a matrix.
    pub fn magnitude_profile(&self) -> Vec<f64> {
        match &self.payload {
            Payload::Vector(v) => v.iter().map(|z| z.norm()).collect(),
            Payload::Matrix(a) => crate::numerics::singular_values(a),
        }
    }

    /// Wraps a caller-supplied vector; it must already satisfy `‖η‖₂ = √N`.
    pub fn custom_vector(entries: CVector) -> Result<Self> {
        let inst = Instrument { kind: InstrumentKind::Custom, payload: Payload::Vector(entries) };
        inst.check_normalization()?;
        Ok(inst)
    }

    /// Wraps a caller-supplied square matrix; it must satisfy `‖η‖_{S₂} = n`.
    pub fn custom_matrix(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return invalid("matrix instruments must be square");
        }
        let inst = Instrument { kind: InstrumentKind::Custom, payload: Payload::Matrix(entries) };
        inst.check_normalization()?;
        Ok(inst)
    }

    /// Rescales an arbitrary nonzero vector to `‖η‖₂ = √N`.
    pub fn normalized_custom_vector(entries: CVector) -> Result<Self> {
        let n = entries.len();
        let norm = l2_norm(entries.as_slice());
        if n == 0 || norm == 0.0 {
            return invalid("instrument must be a nonzero vector");
        }
        Instrument::custom_vector(entries * C64::from((n as f64).sqrt() / norm))
    }

    pub fn check_normalization(&self) -> Result<()> {
        match &self.payload {
            Payload::Vector(v) => {
                if v.is_empty() {
                    return invalid("instrument must have length >= 1");
                }
                if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return invalid("instrument entries must be finite");
                }
                let target = (v.len() as f64).sqrt();
                let norm = l2_norm(v.as_slice());
                if (norm - target).abs() > VECTOR_NORM_TOL * target {
                    return invalid(format!("vector instrument must satisfy ||eta||_2 = sqrt(N) = {target}, got {norm}"));
                }
            }
            Payload::Matrix(a) => {
                let n = a.nrows() as f64;
                let norm = frobenius_norm(a);
                if (norm - n).abs() > MATRIX_NORM_TOL * n {
                    return invalid(format!("matrix instrument must satisfy ||eta||_S2 = n = {n}, got {norm}"));
                }
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> InstrumentDoc {
        let (shape, entries) = match &self.payload {
            Payload::Vector(v) => (vec![v.len()], v.iter().map(|z| [z.re, z.im]).collect()),
            Payload::Matrix(a) => (
                vec![a.nrows(), a.ncols()],
                flatten_row_major(a).iter().map(|z| [z.re, z.im]).collect(),
            ),
        };
        InstrumentDoc { kind: self.kind.clone(), shape, entries }
    }

    pub fn from_doc(doc: &InstrumentDoc) -> Result<Self> {
        let values: Vec<C64> = doc.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let payload = match doc.shape.as_slice() {
            [n] if *n == values.len() => Payload::Vector(DVector::from_vec(values)),
            [r, c] if r * c == values.len() => Payload::Matrix(CMatrix::from_row_slice(*r, *c, &values)),
            _ => return invalid("instrument shape does not match entry count"),
        };
        let inst = Instrument { kind: doc.kind.clone(), payload };
        inst.check_normalization()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("instrument document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: InstrumentDoc =
            serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("instrument json: {e}")))?;
        Instrument::from_doc(&doc)
    }
}

/// Serialized instrument: `{kind, params..., shape, entries: [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstrumentDoc {
    #[serde(flatten)]
    pub kind: InstrumentKind,
    pub shape: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

pub(crate) fn flatten_row_major(a: &CMatrix) -> CVector {
    let (r, c) = a.shape();
    CVector::from_fn(r * c, |i, _| a[(i / c, i % c)])
}

pub(crate) fn unflatten_row_major(x: &[C64], n: usize) -> CMatrix {
    CMatrix::from_row_slice(n, n, x)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return invalid("alpha must be in (0, 0.5)");
    }
    Ok(())
}

/// The all-ones vector of length `n`.
pub fn make_flat(n: usize) -> Result<Instrument> {
    if n < 1 {
        return invalid("N must be >= 1");
    }
    Ok(Instrument {
        kind: InstrumentKind::Flat,
        payload: Payload::Vector(CVector::from_element(n, C64::new(1.0, 0.0))),
    })
}

/// Window with magnitudes `c·j^{-α}` for `j = 1..support`, placed from index 0
/// in non-increasing order, zero elsewhere, `c` fixing `‖η‖₂ = √N`.
pub fn make_decaying_window(n: usize, support: usize, alpha: f64) -> Result<Instrument> {
    check_alpha(alpha)?;
    if support < 1 || support > n {
        return invalid("window support must satisfy 1 <= N_eta <= N");
    }
    let mass: f64 = (1..=support).map(|j| (j as f64).powf(-2.0 * alpha)).sum();
    let c = (n as f64 / mass).sqrt();
    let v = CVector::from_fn(n, |i, _| {
        if i < support {
            C64::new(c * ((i + 1) as f64).powf(-alpha), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(Instrument { kind: InstrumentKind::DecayingWindow { alpha, support }, payload: Payload::Vector(v) })
}

/// `√n · Id_n`.
pub fn make_scaled_identity_matrix(n: usize) -> Result<Instrument> {
    if n < 1 {
        return invalid("n must be >= 1");
    }
    let a = CMatrix::identity(n, n) * C64::new((n as f64).sqrt(), 0.0);
    Ok(Instrument { kind: InstrumentKind::ScaledIdentityMatrix, payload: Payload::Matrix(a) })
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix, with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut SeededRng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| rng.complex_normal());
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U · diag(c·j^{-α}) · V*` with Haar-random `U`, `V` and `c` fixing
/// `‖η‖_{S₂} = n`.
pub fn make_schatten_decay_matrix(n: usize, alpha: f64, rng: &mut SeededRng) -> Result<Instrument> {
    check_alpha(alpha)?;
    if n < 1 {
        return invalid("n must be >= 1");
    }
    let mass: f64 = (1..=n).map(|j| (j as f64).powf(-2.0 * alpha)).sum();
    let c = n as f64 / mass.sqrt();
    let u = haar_unitary(n, rng);
    let v = haar_unitary(n, rng);
    let sigma = CVector::from_fn(n, |j, _| C64::new(c * ((j + 1) as f64).powf(-alpha), 0.0));
    let a = &u * CMatrix::from_diagonal(&sigma) * v.adjoint();
    Ok(Instrument { kind: InstrumentKind::SchattenDecayMatrix { alpha }, payload: Payload::Matrix(a) })
}
