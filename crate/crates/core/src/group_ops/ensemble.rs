use serde::{Deserialize, Serialize};

use super::{apply_unchecked, GroupElement, GroupVariant};
use crate::error::{invalid, Error, Result};
use crate::instruments::{Instrument, InstrumentDoc};
use crate::numerics::{CMatrix, CVector, C64};
use crate::rng::{RngState, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    None,
    /// One sign vector `ε` shared by every row: rows `D_ε σ(g_j) η`.
    RandomSign,
    /// Fresh `(ε_j, shift_j)` per row, drawn from `{−1,1}^N ⋊ Z_N`.
    Absorbed,
}

impl std::str::FromStr for SignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => Ok(SignMode::None),
            "random_sign" | "randomsign" | "random" => Ok(SignMode::RandomSign),
            "absorbed" => Ok(SignMode::Absorbed),
            other => invalid(format!("unknown sign mode '{other}'")),
        }
    }
}

/// How the rows were produced. Together with the instrument this is enough
/// to regenerate the ensemble bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum EnsembleSource {
    Group {
        variant: GroupVariant,
        sign_mode: SignMode,
        signs: Option<Vec<i8>>,
        elements: Vec<GroupElement>,
        rng: RngState,
    },
    /// Dense real Gaussian rows with `N(0, 1/m)` entries.
    Gaussian { dim: usize, rng: RngState },
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianStage {
    pub m_out: usize,
    /// `None` when the matrix was supplied directly rather than sampled.
    pub rng: Option<RngState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    rows: Vec<CVector>,
    dim: usize,
    source: EnsembleSource,
    stage: Option<(GaussianStage, CMatrix)>,
}

impl MeasurementEnsemble {
    /// Wraps explicit rows `r_j`; the measurement of `x` is `⟨r_j, x⟩`.
    pub fn from_rows(rows: Vec<CVector>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("an ensemble needs at least one row");
        };
        let dim = first.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return invalid("ensemble rows must be nonempty and of equal length");
        }
        Ok(MeasurementEnsemble { rows, dim, source: EnsembleSource::Explicit, stage: None })
    }

    /// Wraps an operator matrix `A`, whose rows are `conj(r_j)`.
    pub fn from_operator(a: &CMatrix) -> Result<Self> {
        let rows = (0..a.nrows()).map(|j| a.row(j).adjoint()).collect();
        MeasurementEnsemble::from_rows(rows)
    }

    pub fn rows(&self) -> &[CVector] {
        &self.rows
    }

    /// Number of group-stage rows `m` (before any Gaussian compression).
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Number of measurements actually produced.
    pub fn measurements(&self) -> usize {
        self.stage.as_ref().map_or(self.rows.len(), |(s, _)| s.m_out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> &EnsembleSource {
        &self.source
    }

    pub fn gaussian_stage(&self) -> Option<&GaussianStage> {
        self.stage.as_ref().map(|(s, _)| s)
    }

    /// The group-stage operator `A` with `(A x)_j = ⟨r_j, x⟩`.
    pub fn group_operator(&self) -> CMatrix {
        CMatrix::from_fn(self.rows.len(), self.dim, |j, i| self.rows[j][i].conj())
    }

    /// The effective operator: `Ξ A` when a Gaussian stage is attached.
    pub fn operator(&self) -> CMatrix {
        let a = self.group_operator();
        match &self.stage {
            Some((_, xi)) => xi * a,
            None => a,
        }
    }

    pub fn measure(&self, x: &[C64]) -> Result<CVector> {
        if x.len() != self.dim {
            return invalid(format!("expected a vector of length {}, got {}", self.dim, x.len()));
        }
        let y = CVector::from_fn(self.rows.len(), |j, _| crate::numerics::inner(self.rows[j].as_slice(), x));
        Ok(match &self.stage {
            Some((_, xi)) => xi * y,
            None => y,
        })
    }

    pub fn to_doc(&self, instrument: Option<&Instrument>) -> EnsembleDoc {
        EnsembleDoc {
            instrument: instrument.map(Instrument::to_doc),
            m: self.rows.len(),
            dim: self.dim,
            source: self.source.clone(),
            gaussian_stage: self.gaussian_stage().cloned(),
            rows: self.rows.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
    }

    pub fn to_json(&self, instrument: Option<&Instrument>) -> String {
        serde_json::to_string(&self.to_doc(instrument)).expect("ensemble document serializes")
    }

    /// Rebuilds an ensemble from its provenance alone, re-running the RNG.
    pub fn regenerate(doc: &EnsembleDoc) -> Result<Self> {
        let base = match &doc.source {
            EnsembleSource::Group { variant, sign_mode, rng, .. } => {
                let Some(inst) = &doc.instrument else {
                    return invalid("group ensembles need their instrument to regenerate");
                };
                let inst = Instrument::from_doc(inst)?;
                sample_ensemble(&inst, *variant, doc.m, *sign_mode, &mut SeededRng::from_state(rng.clone()))?
            }
            EnsembleSource::Gaussian { dim, rng } => {
                gaussian_ensemble(*dim, doc.m, &mut SeededRng::from_state(rng.clone()))?
            }
            EnsembleSource::Explicit => {
                let rows = doc
                    .rows
                    .iter()
                    .map(|r| CVector::from_iterator(r.len(), r.iter().map(|[re, im]| C64::new(*re, *im))))
                    .collect();
                MeasurementEnsemble::from_rows(rows)?
            }
        };
        match &doc.gaussian_stage {
            None => Ok(base),
            Some(GaussianStage { m_out, rng: Some(state) }) => {
                compose_gaussian(&base, *m_out, &mut SeededRng::from_state(state.clone()))
            }
            Some(GaussianStage { rng: None, .. }) => invalid("a directly supplied Gaussian stage cannot be regenerated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDoc {
    pub instrument: Option<InstrumentDoc>,
    pub m: usize,
    pub dim: usize,
    pub source: EnsembleSource,
    pub gaussian_stage: Option<GaussianStage>,
    pub rows: Vec<Vec<[f64; 2]>>,
}

/// Rows `r_j = m^{-1/2} D_ε σ(g_j) η` with `g_j` i.i.d. uniform on the group.
pub fn sample_ensemble(
    instrument: &Instrument,
    variant: GroupVariant,
    m: usize,
    sign_mode: SignMode,
    rng: &mut SeededRng,
) -> Result<MeasurementEnsemble> {
    if m < 1 {
        return invalid("m must be >= 1");
    }
    let start = rng.state();
    let eta = instrument.flattened();
    let modulus = instrument.modulus();
    match (variant, instrument.is_matrix()) {
        (GroupVariant::DoubleQft, false) => return invalid("DoubleQft needs a matrix instrument"),
        (GroupVariant::ShiftMod | GroupVariant::SignShift, true) => {
            return invalid("ShiftMod and SignShift need a vector instrument")
        }
        _ => {}
    }
    if sign_mode == SignMode::Absorbed && variant == GroupVariant::DoubleQft {
        return invalid("absorbed signs are defined for vector groups only");
    }
    let dim = eta.len();
    let scale = 1.0 / (m as f64).sqrt();

    let signs = match sign_mode {
        SignMode::RandomSign => Some((0..dim).map(|_| rng.rademacher()).collect::<Vec<i8>>()),
        _ => None,
    };
    let element_variant = if sign_mode == SignMode::Absorbed { GroupVariant::SignShift } else { variant };
    let mut elements = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let g = GroupElement::random(element_variant, modulus, rng);
        let mut row = apply_unchecked(&g, eta.as_slice(), false);
        if let Some(eps) = &signs {
            for (z, &e) in row.iter_mut().zip(eps) {
                *z *= f64::from(e);
            }
        }
        row *= C64::from(scale);
        rows.push(row);
        elements.push(g);
    }
    Ok(MeasurementEnsemble {
        rows,
        dim,
        source: EnsembleSource::Group { variant, sign_mode, signs, elements, rng: start },
        stage: None,
    })
}

/// Unstructured baseline: `m` rows of i.i.d. real `N(0, 1/m)` entries.
pub fn gaussian_ensemble(dim: usize, m: usize, rng: &mut SeededRng) -> Result<MeasurementEnsemble> {
    if m < 1 || dim < 1 {
        return invalid("m and N must be >= 1");
    }
    let start = rng.state();
    let scale = 1.0 / (m as f64).sqrt();
    let rows = (0..m).map(|_| CVector::from_fn(dim, |_, _| C64::new(scale * rng.normal(), 0.0))).collect();
    Ok(MeasurementEnsemble { rows, dim, source: EnsembleSource::Gaussian { dim, rng: start }, stage: None })
}

/// Attaches a Gaussian stage `Ξ` (`m_out × m`, i.i.d. `N(0, 1/m_out)`).
pub fn compose_gaussian(a: &MeasurementEnsemble, m_out: usize, rng: &mut SeededRng) -> Result<MeasurementEnsemble> {
    if m_out < 1 {
        return invalid("m_out must be >= 1");
    }
    let start = rng.state();
    let scale = 1.0 / (m_out as f64).sqrt();
    let xi = CMatrix::from_fn(m_out, a.m(), |_, _| C64::new(scale * rng.normal(), 0.0));
    let mut out = a.clone();
    out.stage = Some((GaussianStage { m_out, rng: Some(start) }, xi));
    Ok(out)
}

/// Attaches a caller-chosen second stage (`m_out × m`).
pub fn compose_with_matrix(a: &MeasurementEnsemble, xi: CMatrix) -> Result<MeasurementEnsemble> {
    if xi.ncols() != a.m() || xi.nrows() == 0 {
        return invalid(format!("second stage must have {} columns", a.m()));
    }
    let mut out = a.clone();
    out.stage = Some((GaussianStage { m_out: xi.nrows(), rng: None }, xi));
    Ok(out)
}
