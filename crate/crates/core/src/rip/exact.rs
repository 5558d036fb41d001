use rayon::prelude::*;

use super::{RipMethod, RipReport};
use crate::error::{invalid, Error, Result};
use crate::group_ops::MeasurementEnsemble;
use crate::numerics::{hermitian_extremes, CMatrix, C64};
use crate::sparsity::SparsityModel;

/// Largest number of supports `exact_rip_canonical` will enumerate.
pub const EXACT_SUPPORT_LIMIT: u128 = 1_000_000;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `max_{|S| = k} ‖A_S* A_S − Id‖_{S∞}` over the effective operator.
pub fn exact_rip_canonical(a: &MeasurementEnsemble, k: usize) -> Result<RipReport> {
    let op = a.operator();
    let delta = exact_rip_operator(&op, k)?;
    Ok(RipReport {
        delta_hat: delta,
        method: RipMethod::ExactEnumeration,
        model: SparsityModel::Canonical { k },
        m: op.nrows(),
        levels: Vec::new(),
    })
}

/// Exact canonical RIP constant of an operator matrix.
pub fn exact_rip_operator(op: &CMatrix, k: usize) -> Result<f64> {
    let n = op.ncols();
    if k < 1 || k > n {
        return invalid(format!("k must be in 1..={n}"));
    }
    let count = binomial(n, k);
    if count > EXACT_SUPPORT_LIMIT {
        return Err(Error::Capacity(format!(
            "C({n},{k}) = {count} supports exceeds the enumeration limit {EXACT_SUPPORT_LIMIT}; use empirical_rip"
        )));
    }
    let gram = gram_minus_identity(op);
    let best = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut support: Vec<usize> = (first..first + k).collect();
            let mut best = 0.0f64;
            loop {
                best = best.max(support_deviation(&gram, &support));
                if !next_combination_fixed_first(&mut support, n) {
                    break;
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `A* A − Id`.
pub(crate) fn gram_minus_identity(op: &CMatrix) -> CMatrix {
    let mut g = op.adjoint() * op;
    for i in 0..g.nrows() {
        g[(i, i)] -= C64::from(1.0);
    }
    g
}

pub(crate) fn principal_submatrix(h: &CMatrix, support: &[usize]) -> CMatrix {
    CMatrix::from_fn(support.len(), support.len(), |i, j| h[(support[i], support[j])])
}

pub(crate) fn support_deviation(h: &CMatrix, support: &[usize]) -> f64 {
    if support.len() == 1 {
        return h[(support[0], support[0])].re.abs();
    }
    let (lo, hi) = hermitian_extremes(&principal_submatrix(h, support));
    lo.abs().max(hi.abs())
}

/// Advances a sorted combination lexicographically, keeping its first entry.
fn next_combination_fixed_first(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 1 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Advances a sorted combination lexicographically.
#[cfg(test)]
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
