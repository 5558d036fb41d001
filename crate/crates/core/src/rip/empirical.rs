use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::{binomial, gram_minus_identity, principal_submatrix};
use super::{RipMethod, RipReport};
use crate::error::{invalid, Result};
use crate::group_ops::MeasurementEnsemble;
use crate::numerics::{hermitian_extreme_pair, hermitian_extremes, magnitude_norm, CMatrix, CVector, Exponent, C64};
use crate::rng::SeededRng;
use crate::sparsity::{lq_support, sample_sparse, square_side, SparsityModel};

const HOPM_SWEEPS: usize = 8;
const PROJECTION_BISECTIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Each trial starts from a random model witness.
    Random,
    /// Canonical models: trial `i` starts from the `i`-th support in
    /// lexicographic order (wrapping), so `C(N, k)` trials visit every support.
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalOptions {
    pub trials: usize,
    pub ascent_steps: usize,
    pub schedule: Schedule,
}

impl Default for EmpiricalOptions {
    fn default() -> Self {
        EmpiricalOptions { trials: 200, ascent_steps: 50, schedule: Schedule::Random }
    }
}

impl EmpiricalOptions {
    pub fn new(trials: usize, ascent_steps: usize) -> Self {
        EmpiricalOptions { trials, ascent_steps, schedule: Schedule::Random }
    }
}

/// `|x* H x| / ‖x‖²`: the RIP deviation of `x` when `H = A*A − Id`.
pub fn deviation_form(h: &CMatrix, x: &CVector) -> f64 {
    let norm_sqr = x.norm_squared();
    if norm_sqr == 0.0 {
        return 0.0;
    }
    (x.dotc(&(h * x))).re.abs() / norm_sqr
}

fn signed_form(h: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(h * x)).re
}

/// Monte Carlo lower bound on `sup_{x ∈ model, ‖x‖=1} |‖Ax‖² − 1|`.
pub fn empirical_rip(
    a: &MeasurementEnsemble,
    model: &SparsityModel,
    opts: &EmpiricalOptions,
    rng: &SeededRng,
) -> Result<RipReport> {
    empirical_rip_with_witness(a, model, opts, rng).map(|(r, _)| r)
}

/// Like [`empirical_rip`], also returning the unit vector attaining the bound.
pub fn empirical_rip_with_witness(
    a: &MeasurementEnsemble,
    model: &SparsityModel,
    opts: &EmpiricalOptions,
    rng: &SeededRng,
) -> Result<(RipReport, CVector)> {
    let op = a.operator();
    let (delta, witness) = empirical_rip_operator(&op, model, opts, rng)?;
    let report = RipReport {
        delta_hat: delta,
        method: RipMethod::MonteCarlo { trials: opts.trials, ascent_steps: opts.ascent_steps },
        model: model.clone(),
        m: op.nrows(),
        levels: Vec::new(),
    };
    Ok((report, witness))
}

pub(crate) fn empirical_rip_operator(
    op: &CMatrix,
    model: &SparsityModel,
    opts: &EmpiricalOptions,
    rng: &SeededRng,
) -> Result<(f64, CVector)> {
    if opts.trials < 1 {
        return invalid("trials must be >= 1");
    }
    let dim = op.ncols();
    model.check_dim(dim)?;
    let h = gram_minus_identity(op);
    let (lo, hi) = hermitian_extremes(&h);
    let scale = lo.abs().max(hi.abs());
    let search = Search { h: &h, scale, steps: opts.ascent_steps };

    let results: Vec<(f64, CVector)> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let mut trng = rng.substream(trial as u64);
            match *model {
                SparsityModel::Canonical { k } => {
                    let start = match opts.schedule {
                        Schedule::Random => sorted(trng.choose_distinct(dim, k)),
                        Schedule::Enumerate => unrank_combination(dim, k, trial as u128 % binomial(dim, k)),
                    };
                    search.canonical(start)
                }
                SparsityModel::LqCap { q, s } => {
                    let j = lq_support(q, s, dim);
                    let (v0, x0) = search.canonical(sorted(trng.choose_distinct(dim, j)));
                    let (v1, x1) = search.dense(x0.clone(), |z| project_lq_cap(&z, q, s));
                    if v1 > v0 {
                        (v1, x1)
                    } else {
                        (v0, x0)
                    }
                }
                SparsityModel::LowRank { r } => {
                    let n = square_side(dim).expect("checked by model");
                    let x0 = sample_sparse(model, dim, &mut trng).expect("checked by model");
                    search.dense(x0, |z| project_low_rank(&z, n, r))
                }
                SparsityModel::TensorRank { s, n, d } => {
                    let x0 = sample_sparse(model, dim, &mut trng).expect("checked by model");
                    let mut prng = trng.substream(0);
                    search.dense(x0, |z| project_tensor_rank(&z, n, d, s, &mut prng))
                }
            }
        })
        .collect();

    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    let (value, witness) = results.into_iter().nth(best).expect("at least one trial");
    Ok((value, witness))
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub(crate) fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        loop {
            let remaining = binomial(n - next - 1, k - slot - 1);
            if rank < remaining {
                out.push(next);
                next += 1;
                break;
            }
            rank -= remaining;
            next += 1;
        }
    }
    out
}

struct Search<'a> {
    h: &'a CMatrix,
    scale: f64,
    steps: usize,
}

impl Search<'_> {
    /// Exact maximization on a support, then moves to the `k` coordinates
    /// where a shifted power step concentrates, until the support repeats.
    fn canonical(&self, mut support: Vec<usize>) -> (f64, CVector) {
        let dim = self.h.nrows();
        let k = support.len();
        let mut best = (0.0, CVector::zeros(dim));
        let mut visited: Vec<Vec<usize>> = Vec::new();
        for _ in 0..=self.steps {
            let (value, local) = hermitian_extreme_pair(&principal_submatrix(self.h, &support));
            let mut x = CVector::zeros(dim);
            for (i, &idx) in support.iter().enumerate() {
                x[idx] = local[i];
            }
            if value > best.0 || visited.is_empty() {
                best = (value, x.clone());
            }
            visited.push(support.clone());
            if self.scale == 0.0 || k == dim {
                break;
            }
            let z = self.step(&x);
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| z[b].norm().total_cmp(&z[a].norm()).then(a.cmp(&b)));
            let next = sorted(order[..k].to_vec());
            if visited.contains(&next) {
                break;
            }
            support = next;
        }
        best
    }

    /// Projected shifted power ascent; every evaluated point is feasible.
    fn dense(&self, x0: CVector, mut project: impl FnMut(CVector) -> CVector) -> (f64, CVector) {
        let mut x = normalized(x0);
        let mut best = (deviation_form(self.h, &x), x.clone());
        if self.scale == 0.0 {
            return best;
        }
        for _ in 0..self.steps {
            let z = self.step(&x);
            let next = normalized(project(z));
            if next.norm_squared() == 0.0 {
                break;
            }
            let value = deviation_form(self.h, &next);
            if value > best.0 {
                best = (value, next.clone());
            }
            if (&next - &x).norm() < 1e-12 {
                break;
            }
            x = next;
        }
        best
    }

    /// `x + sign(x*Hx) H x / ‖H‖`, an ascent step for `|x* H x|`.
    fn step(&self, x: &CVector) -> CVector {
        let hx = self.h * x;
        let sign = if signed_form(self.h, x) >= 0.0 { 1.0 } else { -1.0 };
        x + hx * C64::from(sign / self.scale)
    }
}

fn normalized(mut x: CVector) -> CVector {
    let n = x.norm();
    if n > 0.0 {
        x /= C64::from(n);
    }
    x
}

fn lq_ratio_sqr(mags: &[f64], q: f64) -> f64 {
    let two = magnitude_norm(mags, Exponent::Finite(2.0)).expect("valid exponent");
    if two == 0.0 {
        return 0.0;
    }
    let qn = magnitude_norm(mags, Exponent::Finite(q)).expect("valid exponent");
    (qn / two).powi(2)
}

/// Maps `z` into `{‖x‖_q ≤ √s ‖x‖₂}` by soft-thresholding the moduli (phases
/// kept), with the threshold found by bisection. Falls back to the best
/// `j`-term approximation, which is always feasible.
pub fn project_lq_cap(z: &CVector, q: f64, s: f64) -> CVector {
    let mags: Vec<f64> = z.iter().map(|c| c.norm()).collect();
    let tol = s * (1.0 + 1e-12);
    if lq_ratio_sqr(&mags, q) <= tol {
        return z.clone();
    }
    let shrink = |tau: f64| -> Vec<f64> { mags.iter().map(|m| (m - tau).max(0.0)).collect() };
    let top = mags.iter().cloned().fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..PROJECTION_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let m = shrink(mid);
        if m.iter().any(|v| *v > 0.0) && lq_ratio_sqr(&m, q) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let m = shrink(hi);
    if m.iter().any(|v| *v > 0.0) && lq_ratio_sqr(&m, q) <= tol {
        return CVector::from_fn(z.len(), |i, _| {
            if mags[i] > 0.0 {
                z[i] * (m[i] / mags[i])
            } else {
                C64::new(0.0, 0.0)
            }
        });
    }
    let j = lq_support(q, s, z.len());
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    let mut out = CVector::zeros(z.len());
    for &i in &order[..j] {
        out[i] = z[i];
    }
    out
}

pub(crate) fn project_low_rank(z: &CVector, n: usize, r: usize) -> CVector {
    let a = crate::instruments::unflatten_row_major(z.as_slice(), n);
    let svd = a.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = CMatrix::zeros(n, n);
    for &i in order.iter().take(r) {
        out += u.column(i) * vt.row(i) * C64::from(svd.singular_values[i]);
    }
    crate::instruments::flatten_row_major(&out)
}

/// Greedy rank-`s` approximation: `s` rounds of rank-one power iteration
/// (HOPM) on the running residual.
pub(crate) fn project_tensor_rank(z: &CVector, n: usize, d: usize, s: usize, rng: &mut SeededRng) -> CVector {
    let mut residual = z.clone();
    let mut approx = CVector::zeros(z.len());
    for _ in 0..s {
        let mut factors: Vec<CVector> = (0..d).map(|_| CVector::from_fn(n, |_, _| rng.complex_normal())).collect();
        for f in factors.iter_mut() {
            *f = normalized(f.clone());
        }
        for _ in 0..HOPM_SWEEPS {
            for mode in 0..d {
                let updated = contract_except(&residual, &factors, n, d, mode);
                if updated.norm() == 0.0 {
                    break;
                }
                factors[mode] = normalized(updated);
            }
        }
        let unit = crate::sparsity::rank_one_tensor(&factors);
        let weight = unit.dotc(&residual);
        let term = unit * weight;
        residual -= &term;
        approx += term;
    }
    approx
}

/// `Σ_{idx: idx_mode = i} T[idx] Π_{p ≠ mode} conj(u_p[idx_p])`.
fn contract_except(t: &CVector, factors: &[CVector], n: usize, d: usize, mode: usize) -> CVector {
    let mut out = CVector::zeros(n);
    for (flat, value) in t.iter().enumerate() {
        let mut rest = flat;
        let mut coeff = *value;
        let mut own = 0;
        for p in (0..d).rev() {
            let idx = rest % n;
            rest /= n;
            if p == mode {
                own = idx;
            } else {
                coeff *= factors[p][idx].conj();
            }
        }
        out[own] += coeff;
    }
    out
}
