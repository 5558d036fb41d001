use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{block_measure, dyadic_measure, time_sample_measure, BlockInstrument};
use super::{DiffDirection, FourierFunction, WeightSpec};
use crate::error::{invalid, Error, Result};
use crate::rng::SeededRng;
use crate::group_ops::median_sorted;

/// How a shifted function is measured. The time-sampling and dyadic schemes
/// act on `f = g'` through `g`, and measure the mean of `f` as one extra
/// functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum Scheme {
    Blocks { instrument: BlockInstrument },
    TimeSampling,
    Dyadic { l0: u32 },
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Blocks { instrument } => match instrument.mode {
                super::BlockMode::Deterministic => "blocks_deterministic".into(),
                super::BlockMode::Rademacher => "blocks_rademacher".into(),
            },
            Scheme::TimeSampling => "time_sampling".into(),
            Scheme::Dyadic { .. } => "dyadic".into(),
        }
    }

    /// `w_k = ‖u(ψ_k)‖²` for this scheme.
    pub fn weights(&self, n_big: usize) -> WeightSpec {
        match self {
            Scheme::Blocks { instrument } => WeightSpec::Truncated { n: instrument.n },
            Scheme::TimeSampling => WeightSpec::InverseSquare,
            Scheme::Dyadic { l0 } => {
                let cutoff = if *l0 == 0 { 0 } else { 1i64 << (l0 - 1) };
                let weights = (-(n_big as i64)..n_big as i64)
                    .map(|k| match k.abs() {
                        0 => 1.0,
                        a if a <= cutoff => 1.0 / (k * k) as f64,
                        _ => 0.0,
                    })
                    .collect();
                WeightSpec::Custom { weights }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Scheme::Blocks { instrument } = self {
            instrument.validate()?;
        }
        Ok(())
    }
}

/// Precomputed state for measuring shifts of one function.
enum Prepared<'a> {
    Blocks(&'a FourierFunction, &'a BlockInstrument),
    Through { dc_sq: f64, g: FourierFunction, l0: Option<u32> },
}

impl Prepared<'_> {
    fn energy(&self, t: f64) -> Result<f64> {
        match self {
            Prepared::Blocks(f, inst) => Ok(block_measure(f, inst, t)?.iter().map(|v| v.norm_sqr()).sum()),
            Prepared::Through { dc_sq, g, l0: None } => Ok(dc_sq + time_sample_measure(g, t)?.norm_sqr()),
            Prepared::Through { dc_sq, g, l0: Some(l0) } => {
                Ok(dc_sq + (1..=*l0).map(|l| dyadic_measure(g, t, l).norm_sqr()).sum::<f64>())
            }
        }
    }
}

fn prepare<'a>(f: &'a FourierFunction, scheme: &'a Scheme) -> Result<Prepared<'a>> {
    Ok(match scheme {
        Scheme::Blocks { instrument } => Prepared::Blocks(f, instrument),
        Scheme::TimeSampling | Scheme::Dyadic { .. } => {
            let g = f.without_dc().differentiate(DiffDirection::Antiderivative)?;
            let l0 = if let Scheme::Dyadic { l0 } = scheme { Some(*l0) } else { None };
            Prepared::Through { dc_sq: f.coeff(0).norm_sqr(), g, l0 }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfdimReport {
    pub scheme: String,
    pub m: usize,
    pub trials: usize,
    pub deviations: Vec<f64>,
    pub delta_hat: f64,
    pub median: f64,
}

const MIN_WEIGHTED_NORM: f64 = 1e-8;
const RESAMPLE_ATTEMPTS: usize = 100;

/// Per trial: draw a model function, normalize it to `‖f‖_{2,w} = 1`, draw
/// `m` uniform shifts and record `|(1/m) Σ_j ‖u(τ_{t_j} f)‖² − 1|`.
///
/// Trial `i` uses `rng.substream(i)`, so runs with the same sampler and seed
/// see the same functions and shifts whatever the scheme.
pub fn infdim_rip_experiment<F>(sampler: F, scheme: &Scheme, m: usize, trials: usize, rng: &SeededRng) -> Result<InfdimReport>
where
    F: Fn(&mut SeededRng) -> Result<FourierFunction> + Sync,
{
    if m == 0 || trials == 0 {
        return invalid("m and trials must be >= 1");
    }
    scheme.validate()?;
    let deviations = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = rng.substream(trial as u64);
            let mut attempt = 0;
            let (f, norm) = loop {
                attempt += 1;
                if attempt > RESAMPLE_ATTEMPTS {
                    return Err(Error::Numerical("model keeps producing functions with vanishing weighted norm".into()));
                }
                let f = sampler(&mut r)?;
                let norm = f.weighted_seminorm(&scheme.weights(f.n_big()));
                if norm >= MIN_WEIGHTED_NORM {
                    break (f, norm);
                }
            };
            let f = f.scaled((1.0 / norm).into());
            let prepared = prepare(&f, scheme)?;
            let mut sum = 0.0;
            for _ in 0..m {
                sum += prepared.energy(r.uniform())?;
            }
            Ok((sum / m as f64 - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = deviations.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(InfdimReport {
        scheme: scheme.label(),
        m,
        trials,
        delta_hat: *sorted.last().expect("trials >= 1"),
        median: median_sorted(&sorted),
        deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infdim::BumpModel;

    #[test]
    fn constant_with_unit_blocks_has_no_deviation() {
        let scheme = Scheme::Blocks { instrument: BlockInstrument::deterministic(8, 1).unwrap() };
        let rep = infdim_rip_experiment(|_| FourierFunction::psi(0, 32), &scheme, 5, 4, &SeededRng::new(1, 0)).unwrap();
        assert!(rep.delta_hat < 1e-14);
    }

    #[test]
    fn weights_make_every_scheme_unbiased() {
        let mut rng = SeededRng::new(2, 0);
        let n_big = 64;
        let mut f = FourierFunction::zeros(n_big);
        for k in f.frequencies() {
            f.set_coeff(k, rng.complex_normal()).unwrap();
        }
        let schemes = [
            Scheme::Blocks { instrument: BlockInstrument::rademacher(16, 4, &mut rng).unwrap() },
            Scheme::TimeSampling,
            Scheme::Dyadic { l0: 4 },
        ];
        for scheme in schemes {
            let prepared = prepare(&f, &scheme).unwrap();
            let grid = 4 * n_big;
            let avg = (0..grid).map(|j| prepared.energy(j as f64 / grid as f64).unwrap()).sum::<f64>() / grid as f64;
            let w = f.weighted_seminorm(&scheme.weights(n_big)).powi(2);
            assert!((avg - w).abs() < 1e-10 * w, "{}", scheme.label());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let model = BumpModel { count: 1, t_min: 8.0, t_max: 12.0, n_big: 128 };
        let scheme = Scheme::TimeSampling;
        let run = || {
            infdim_rip_experiment(|r| Ok(model.sample(r)?.1), &scheme, 16, 6, &SeededRng::new(3, 0)).unwrap()
        };
        assert_eq!(run(), run());
    }
}
