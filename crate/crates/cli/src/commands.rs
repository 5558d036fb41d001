//! Subcommand table: key schemas and the experiment each one runs.
//!
//! Every run function first builds and validates its domain objects, which is
//! all `--check` does, and then executes. Random draws come from fixed streams
//! of the run seed, one per purpose, so adding draws of one kind never shifts
//! another.

use std::f64::consts::TAU;

use riplab::group_ops::{
    gaussian_ensemble, isotropy_defect, rosenthal_deviation, sample_ensemble, GroupVariant, MeasurementEnsemble, SignMode,
};
use riplab::infdim::{
    bump_norm, bump_sobolev_ratio, calibrate_tail_constant, infdim_rip_experiment, truncation_level, BlockInstrument,
    BlockMode, BumpModel, DiffDirection, FourierFunction, Scheme, TailProfile,
};
use riplab::instruments::{
    make_decaying_window, make_flat, make_scaled_identity_matrix, make_schatten_decay_matrix, Instrument,
};
use riplab::rip::{
    binomial, calibrate_mrip_delta, distance_bound_check, empirical_rip, exact_rip_canonical, gaussian_width, gordon_m,
    mrip_check, table1_m, weak_diff_classify, DiffVerdict, EmpiricalOptions, MripOptions, Table1Row, WeakDiffParams,
    EXACT_SUPPORT_LIMIT,
};
use riplab::sparsity::{s_max, sample_sparse, sp_eta_optimize, SpGrid, SparsityModel};
use riplab::{CMatrix, CVector, Error as CoreError, SeededRng, C64};
use serde_json::{json, Value};

use crate::config::{key, required, KeySpec, Kind, Params};
use crate::output::{jnum, num, Report};

const STREAM_INSTRUMENT: u64 = 1;
const STREAM_ENSEMBLE: u64 = 2;
const STREAM_SEARCH: u64 = 3;
const STREAM_PAIRS: u64 = 4;
const STREAM_WIDTH: u64 = 5;
const STREAM_SIGNS: u64 = 6;
const STREAM_RUN: u64 = 7;
const STREAM_SHIFTS: u64 = 8;

#[derive(Debug)]
pub enum CliError {
    Config(Vec<String>),
    Core(CoreError),
    Io(std::io::Error),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<String> for CliError {
    fn from(e: String) -> Self {
        CliError::Config(vec![e])
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Core(CoreError::InvalidParameter(_)) => 2,
            CliError::Core(CoreError::Capacity(_)) => 3,
            CliError::Core(CoreError::Numerical(_)) => 4,
        }
    }

    /// Diagnostics as shown to the user; parameter errors lose their prefix so
    /// they read like the precondition that failed.
    pub fn messages(&self) -> Vec<String> {
        match self {
            CliError::Config(v) => v.clone(),
            CliError::Core(CoreError::InvalidParameter(m)) => vec![m.clone()],
            CliError::Core(e) => vec![e.to_string()],
            CliError::Io(e) => vec![format!("i/o error: {e}")],
        }
    }
}

type RunResult = Result<Option<Report>, CliError>;

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: Vec<KeySpec>,
    /// Runs the experiment; with `check_only` it stops after validation.
    pub run: fn(&Params, bool) -> RunResult,
}

const ETA: &[&str] = &["flat", "decaying", "scaled_identity", "schatten_decay"];
const ENSEMBLES: &[&str] = &["shiftmod", "doubleqft", "signshift", "gaussian"];
const SIGNS: &[&str] = &["none", "random", "absorbed"];
const MODELS: &[&str] = &["canonical", "lqcap", "lowrank", "tensor"];
const GROUPS: &[&str] = &["shiftmod", "doubleqft", "signshift"];

fn instrument_keys() -> Vec<KeySpec> {
    vec![
        key("eta", Kind::Choice(ETA), Some("flat"), "instrument family"),
        required("N", Kind::Int, "vector length, or matrix side for matrix instruments"),
        key("Neta", Kind::Int, None, "support of the decaying window"),
        key("alpha", Kind::Float, Some("0.25"), "decay exponent, in (0, 0.5)"),
    ]
}

fn ensemble_keys() -> Vec<KeySpec> {
    vec![
        key("ensemble", Kind::Choice(ENSEMBLES), Some("shiftmod"), "measurement ensemble"),
        key("sign", Kind::Choice(SIGNS), Some("none"), "random sign mode for group ensembles"),
    ]
}

fn search_keys() -> Vec<KeySpec> {
    vec![
        key("trials", Kind::Int, Some("200"), "random restarts of the sup search"),
        key("steps", Kind::Int, Some("50"), "ascent steps per restart"),
    ]
}

fn model_keys() -> Vec<KeySpec> {
    vec![
        key("model", Kind::Choice(MODELS), Some("canonical"), "sparsity model"),
        key("k", Kind::Int, Some("1"), "canonical sparsity"),
        key("q", Kind::Float, Some("1"), "exponent of the l_q cap"),
        key("s", Kind::Float, Some("2"), "sparsity level of the l_q cap"),
        key("rank", Kind::Int, Some("1"), "rank for the low-rank and tensor models"),
        key("tn", Kind::Int, None, "tensor factor dimension"),
        key("td", Kind::Int, None, "tensor order"),
    ]
}

fn lq_keys() -> Vec<KeySpec> {
    vec![
        required("m", Kind::Int, "number of measurements"),
        key("q", Kind::Float, Some("1"), "exponent of the l_q cap, in [1, 2)"),
        key("s", Kind::Float, Some("2"), "base sparsity level, >= 1"),
        key("delta", Kind::Float, None, "level parameter; calibrated from the ensemble when absent"),
    ]
}

fn join(parts: Vec<Vec<KeySpec>>) -> Vec<KeySpec> {
    parts.into_iter().flatten().collect()
}

pub fn commands() -> Vec<Command> {
    vec![
        Command {
            name: "isotropy",
            about: "Isotropy defect of a group orbit, by exhaustive enumeration",
            keys: join(vec![
                instrument_keys(),
                vec![key("group", Kind::Choice(&["auto", "shiftmod", "doubleqft", "signshift"]), Some("auto"), "group action")],
            ]),
            run: run_isotropy,
        },
        Command {
            name: "sp-opt",
            about: "Sparsity-parameter objective over the exponent grid",
            keys: join(vec![
                instrument_keys(),
                vec![
                    key("r", Kind::Int, Some("1"), "sparsity level r"),
                    key("q_min", Kind::Float, Some("2.001"), "smallest grid exponent"),
                    key("q_max", Kind::Float, Some("128"), "largest finite grid exponent"),
                    key("points", Kind::Int, Some("200"), "finite grid points"),
                    key("infinity", Kind::Bool, Some("true"), "append the infinite exponent"),
                ],
            ]),
            run: run_sp_opt,
        },
        Command {
            name: "rip-scan",
            about: "Monte Carlo RIP deviation against the number of measurements",
            keys: join(vec![
                instrument_keys(),
                ensemble_keys(),
                model_keys(),
                search_keys(),
                vec![
                    required("m", Kind::IntList, "measurement counts"),
                    key("draws", Kind::Int, Some("10"), "ensembles drawn per m"),
                ],
            ]),
            run: run_rip_scan,
        },
        Command {
            name: "rip-exact",
            about: "Exact canonical RIP constant by support enumeration",
            keys: join(vec![
                instrument_keys(),
                ensemble_keys(),
                vec![
                    required("k", Kind::Int, "canonical sparsity"),
                    required("m", Kind::IntList, "measurement counts"),
                    key("draws", Kind::Int, Some("10"), "ensembles drawn per m"),
                ],
            ]),
            run: run_rip_exact,
        },
        Command {
            name: "mrip",
            about: "Multiresolution check of one ensemble at every level",
            keys: join(vec![
                instrument_keys(),
                ensemble_keys(),
                lq_keys(),
                search_keys(),
                vec![key("extra", Kind::Bool, Some("false"), "use the looser level threshold")],
            ]),
            run: run_mrip,
        },
        Command {
            name: "distance",
            about: "Distance distortion of sparse pairs against the multiresolution bound",
            keys: join(vec![
                instrument_keys(),
                ensemble_keys(),
                lq_keys(),
                search_keys(),
                vec![
                    key("epsilon", Kind::Float, Some("1"), "slack of the refined bound"),
                    key("pairs", Kind::Int, Some("100"), "number of pairs"),
                ],
            ]),
            run: run_distance,
        },
        Command {
            name: "weakdiff",
            about: "Separated-or-close classification of unit sparse pairs",
            keys: join(vec![
                instrument_keys(),
                ensemble_keys(),
                lq_keys(),
                search_keys(),
                vec![
                    key("wd_alpha", Kind::Float, Some("5.656854249492381"), "separation threshold factor"),
                    key("wd_beta", Kind::Float, Some("8"), "closeness radius factor"),
                    key("pairs", Kind::Int, Some("100"), "number of pairs"),
                    key("close_fraction", Kind::Float, Some("0.25"), "share of near-duplicate pairs"),
                ],
            ]),
            run: run_weakdiff,
        },
        Command {
            name: "gordon",
            about: "Gaussian width, the resulting measurement count and its exact RIP check",
            keys: vec![
                required("N", Kind::Int, "vector length"),
                required("k", Kind::Int, "canonical sparsity"),
                key("delta", Kind::Float, Some("0.5"), "target deviation"),
                key("zeta", Kind::Float, Some("0.1"), "failure probability, in (0, 2]"),
                key("width_trials", Kind::Int, Some("10000"), "Monte Carlo draws for the width"),
                key("draws", Kind::Int, Some("100"), "Gaussian ensembles checked"),
            ],
            run: run_gordon,
        },
        Command {
            name: "rosenthal",
            about: "Concentration of empirical orbit averages of a fixed generator",
            keys: vec![
                key("group", Kind::Choice(GROUPS), Some("shiftmod"), "group action"),
                required("N", Kind::Int, "group modulus"),
                key("d", Kind::Int, Some("4"), "rows of the generator"),
                required("M", Kind::IntList, "orbit sample sizes"),
                key("trials", Kind::Int, Some("50"), "trials per M"),
            ],
            run: run_rosenthal,
        },
        Command {
            name: "table1",
            about: "Measurement counts for rank-s tensors, log factors dropped",
            keys: vec![
                required("s", Kind::Int, "tensor rank"),
                required("n", Kind::Int, "factor dimension"),
                required("d", Kind::Int, "tensor order"),
            ],
            run: run_table1,
        },
        Command {
            name: "infdim-scan",
            about: "Shift-sampling deviation for random bump superpositions",
            keys: vec![
                key("scheme", Kind::Choice(&["blocks", "time_sampling", "dyadic"]), Some("blocks"), "measurement scheme"),
                key("mode", Kind::Choice(&["deterministic", "rademacher"]), Some("deterministic"), "block signs"),
                key("N", Kind::Int, Some("64"), "block bandwidth"),
                key("L", Kind::Int, Some("4"), "block length"),
                key("l0", Kind::Int, Some("4"), "dyadic truncation level"),
                key("count", Kind::Int, Some("1"), "bumps per function"),
                key("tmin", Kind::Float, Some("16"), "smallest bump scale"),
                key("tmax", Kind::Float, Some("28"), "largest bump scale"),
                key("n_big", Kind::Int, Some("2048"), "simulated band limit"),
                required("m", Kind::IntList, "shifts per trial"),
                key("trials", Kind::Int, Some("10"), "trials per m"),
            ],
            run: run_infdim_scan,
        },
        Command {
            name: "bump-check",
            about: "Closed-form bump norms against the simulated function",
            keys: vec![
                key("count", Kind::Int, Some("1"), "number of bumps"),
                key("T", Kind::Float, Some("8"), "bump scale"),
                key("n_big", Kind::Int, Some("0"), "simulated band limit; 0 picks 64*ceil(T)"),
            ],
            run: run_bump_check,
        },
        Command {
            name: "truncation",
            about: "Dyadic truncation levels and tail budgets",
            keys: vec![
                key("q", Kind::Float, Some("2"), "exponent, in (1, 2]"),
                key("delta", Kind::Float, Some("0.1"), "target deviation"),
                key("count", Kind::Int, Some("1"), "bumps per function"),
                key("tmin", Kind::Float, Some("4"), "smallest bump scale"),
                key("tmax", Kind::Float, Some("8"), "largest bump scale"),
                key("n_big", Kind::Int, Some("512"), "simulated band limit"),
                key("calibration", Kind::Int, Some("30"), "functions used to calibrate the tail constant"),
                key("pairs", Kind::Int, Some("50"), "functions checked"),
                key("shifts", Kind::Int, Some("8"), "shifts for the pointwise tails"),
                key("s", Kind::Float, None, "also report the level for this sparsity"),
            ],
            run: run_truncation,
        },
    ]
}

fn build_instrument(p: &Params) -> Result<Instrument, CliError> {
    let n = p.usize("N")?;
    let alpha = p.f64("alpha")?;
    Ok(match p.text("eta")? {
        "flat" => make_flat(n)?,
        "decaying" => {
            if !p.has("Neta") {
                return Err("missing required key Neta (needed by eta=decaying)".to_string().into());
            }
            make_decaying_window(n, p.usize("Neta")?, alpha)?
        }
        "scaled_identity" => make_scaled_identity_matrix(n)?,
        _ => make_schatten_decay_matrix(n, alpha, &mut SeededRng::new(p.seed, STREAM_INSTRUMENT))?,
    })
}

fn build_ensemble(p: &Params, inst: &Instrument, m: usize, rng: &mut SeededRng) -> Result<MeasurementEnsemble, CliError> {
    let name = p.text("ensemble")?;
    if name == "gaussian" {
        return Ok(gaussian_ensemble(inst.ambient_dim(), m, rng)?);
    }
    let variant: GroupVariant = name.parse()?;
    let sign: SignMode = p.text("sign")?.parse()?;
    Ok(sample_ensemble(inst, variant, m, sign, rng)?)
}

/// Instrument plus a one-row probe ensemble, so pairing errors surface
/// during validation.
fn checked_instrument(p: &Params) -> Result<Instrument, CliError> {
    let inst = build_instrument(p)?;
    build_ensemble(p, &inst, 1, &mut SeededRng::new(p.seed, STREAM_ENSEMBLE))?;
    Ok(inst)
}

fn build_model(p: &Params) -> Result<SparsityModel, CliError> {
    Ok(match p.text("model")? {
        "canonical" => SparsityModel::Canonical { k: p.usize("k")? },
        "lqcap" => SparsityModel::LqCap { q: p.f64("q")?, s: p.f64("s")? },
        "lowrank" => SparsityModel::LowRank { r: p.usize("rank")? },
        _ => {
            if !(p.has("tn") && p.has("td")) {
                return Err("missing required keys tn and td (needed by model=tensor)".to_string().into());
            }
            SparsityModel::TensorRank { s: p.usize("rank")?, n: p.usize("tn")?, d: p.usize("td")? }
        }
    })
}

fn search_options(p: &Params) -> Result<EmpiricalOptions, CliError> {
    let opts = EmpiricalOptions::new(p.usize("trials")?, p.usize("steps")?);
    if opts.trials == 0 {
        return Err("trials must be >= 1".to_string().into());
    }
    Ok(opts)
}

fn positive_list(p: &Params, k: &str) -> Result<Vec<usize>, CliError> {
    let v = p.list(k)?;
    if v.contains(&0) {
        return Err(format!("every {k} value must be >= 1").into());
    }
    Ok(v)
}

fn at_least_one(p: &Params, k: &str) -> Result<usize, CliError> {
    let v = p.usize(k)?;
    if v == 0 {
        return Err(format!("{k} must be >= 1").into());
    }
    Ok(v)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn run_isotropy(p: &Params, check_only: bool) -> RunResult {
    let inst = build_instrument(p)?;
    let variant = match p.text("group")? {
        "auto" if inst.is_matrix() => GroupVariant::DoubleQft,
        "auto" => GroupVariant::ShiftMod,
        other => other.parse()?,
    };
    if check_only {
        return Ok(None);
    }
    let defect = isotropy_defect(&inst, variant)?;
    let mut rep = Report::new(&["variant", "N", "defect"]);
    let label = serde_json::to_value(variant).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    rep.row(vec![label, inst.modulus().to_string(), num(defect)]);
    rep.set("defect", jnum(defect));
    Ok(Some(rep))
}

fn run_sp_opt(p: &Params, check_only: bool) -> RunResult {
    let inst = build_instrument(p)?;
    let grid = SpGrid {
        q_min: p.f64("q_min")?,
        q_max: p.f64("q_max")?,
        points: p.usize("points")?,
        include_infinity: p.bool("infinity")?,
    };
    grid.points()?;
    let r = at_least_one(p, "r")?;
    if check_only {
        return Ok(None);
    }
    let res = sp_eta_optimize(&inst, r, &grid)?;
    let mut rep = Report::new(&["q_prime", "f"]);
    for (q, v) in res.grid.iter().zip(&res.values) {
        rep.row(vec![q.to_string(), num(*v)]);
    }
    rep.set("q_opt", res.q_opt.to_string());
    rep.set("value", jnum(res.value));
    Ok(Some(rep))
}

fn run_rip_scan(p: &Params, check_only: bool) -> RunResult {
    let inst = checked_instrument(p)?;
    let model = build_model(p)?;
    model.check_dim(inst.ambient_dim())?;
    let ms = positive_list(p, "m")?;
    let draws = at_least_one(p, "draws")?;
    let opts = search_options(p)?;
    if check_only {
        return Ok(None);
    }
    let mut rep = Report::new(&["m", "delta_hat", "model", "seed"]);
    let mut medians = Vec::new();
    for (mi, &m) in ms.iter().enumerate() {
        let mut devs = Vec::with_capacity(draws);
        for draw in 0..draws {
            let tag = ((mi as u64) << 32) | draw as u64;
            let a = build_ensemble(p, &inst, m, &mut SeededRng::new(p.seed, STREAM_ENSEMBLE).substream(tag))?;
            let r = empirical_rip(&a, &model, &opts, &SeededRng::new(p.seed, STREAM_SEARCH).substream(tag))?;
            rep.row(vec![m.to_string(), num(r.delta_hat), model.label(), p.seed.to_string()]);
            devs.push(r.delta_hat);
        }
        medians.push(json!({"m": m, "median": jnum(median(&devs))}));
    }
    rep.set("medians", Value::Array(medians));
    Ok(Some(rep))
}

fn run_rip_exact(p: &Params, check_only: bool) -> RunResult {
    let inst = checked_instrument(p)?;
    let k = p.usize("k")?;
    let model = SparsityModel::Canonical { k };
    model.check_dim(inst.ambient_dim())?;
    let supports = binomial(inst.ambient_dim(), k);
    if supports > EXACT_SUPPORT_LIMIT {
        return Err(CoreError::Capacity(format!(
            "C({},{k}) = {supports} supports exceeds the enumeration limit {EXACT_SUPPORT_LIMIT}",
            inst.ambient_dim()
        ))
        .into());
    }
    let ms = positive_list(p, "m")?;
    let draws = at_least_one(p, "draws")?;
    if check_only {
        return Ok(None);
    }
    let mut rep = Report::new(&["m", "delta_hat", "model", "seed"]);
    let mut medians = Vec::new();
    for (mi, &m) in ms.iter().enumerate() {
        let mut devs = Vec::with_capacity(draws);
        for draw in 0..draws {
            let tag = ((mi as u64) << 32) | draw as u64;
            let a = build_ensemble(p, &inst, m, &mut SeededRng::new(p.seed, STREAM_ENSEMBLE).substream(tag))?;
            let r = exact_rip_canonical(&a, k)?;
            rep.row(vec![m.to_string(), num(r.delta_hat), model.label(), p.seed.to_string()]);
            devs.push(r.delta_hat);
        }
        medians.push(json!({"m": m, "median": jnum(median(&devs))}));
    }
    rep.set("medians", Value::Array(medians));
    Ok(Some(rep))
}

/// Shared setup for the multiresolution commands: the ensemble and the level
/// parameter, calibrated with the same search stream the check uses.
struct LqSetup {
    a: MeasurementEnsemble,
    q: f64,
    s: f64,
    delta: f64,
    calibrated: bool,
    opts: MripOptions,
}

fn lq_setup(p: &Params, check_only: bool, extra: bool) -> Result<Option<LqSetup>, CliError> {
    let inst = checked_instrument(p)?;
    let (q, s) = (p.f64("q")?, p.f64("s")?);
    let dim = inst.ambient_dim();
    SparsityModel::LqCap { q, s }.check_dim(dim)?;
    s_max(q, dim)?;
    let m = at_least_one(p, "m")?;
    let given = p.opt_f64("delta")?;
    if let Some(d) = given {
        if !(d > 0.0) {
            return Err("delta must be positive".to_string().into());
        }
    }
    let opts = MripOptions { search: search_options(p)?, extra_level_factor: extra };
    if check_only {
        return Ok(None);
    }
    let a = build_ensemble(p, &inst, m, &mut SeededRng::new(p.seed, STREAM_ENSEMBLE))?;
    let delta = match given {
        Some(d) => d,
        None => calibrate_mrip_delta(&a, q, s, &opts, &SeededRng::new(p.seed, STREAM_SEARCH))?,
    };
    Ok(Some(LqSetup { a, q, s, delta, calibrated: given.is_none(), opts }))
}

fn run_mrip(p: &Params, check_only: bool) -> RunResult {
    let Some(st) = lq_setup(p, check_only, p.bool("extra")?)? else {
        return Ok(None);
    };
    let r = mrip_check(&st.a, st.q, st.s, st.delta, &st.opts, &SeededRng::new(p.seed, STREAM_SEARCH))?;
    let mut rep = Report::new(&["level", "level_sparsity", "observed_sup", "threshold", "pass"]);
    for l in &r.levels {
        rep.row(vec![l.level.to_string(), num(l.level_sparsity), num(l.observed_sup), num(l.threshold), l.pass.to_string()]);
    }
    rep.set("delta", jnum(st.delta));
    rep.set("calibrated", st.calibrated);
    rep.set("passed", r.passed().unwrap_or(true));
    rep.set("delta_hat", jnum(r.delta_hat));
    Ok(Some(rep))
}

fn draw_pair(st: &LqSetup, rng: &mut SeededRng) -> Result<(CVector, CVector), CliError> {
    let model = SparsityModel::LqCap { q: st.q, s: st.s };
    let x = sample_sparse(&model, st.a.dim(), rng)?;
    let y = sample_sparse(&model, st.a.dim(), rng)?;
    Ok((x, y))
}

fn run_distance(p: &Params, check_only: bool) -> RunResult {
    let epsilon = p.f64("epsilon")?;
    if !(epsilon > 0.0) {
        return Err("epsilon must be positive".to_string().into());
    }
    let pairs = at_least_one(p, "pairs")?;
    let Some(st) = lq_setup(p, check_only, false)? else {
        return Ok(None);
    };
    let mut rng = SeededRng::new(p.seed, STREAM_PAIRS);
    let mut rep = Report::new(&["pair", "observed", "bound", "pass", "refined_bound", "refined_pass"]);
    let mut violations = 0;
    for i in 0..pairs {
        let (x, y) = draw_pair(&st, &mut rng)?;
        if x == y {
            continue;
        }
        let c = distance_bound_check(&st.a, x.as_slice(), y.as_slice(), st.s, st.delta, st.q, epsilon)?;
        if !c.pass {
            violations += 1;
        }
        let (rb, rp) = match c.refined {
            Some(r) => (num(r.bound), r.pass.to_string()),
            None => (String::new(), String::new()),
        };
        rep.row(vec![i.to_string(), num(c.observed), num(c.bound), c.pass.to_string(), rb, rp]);
    }
    rep.set("delta", jnum(st.delta));
    rep.set("calibrated", st.calibrated);
    rep.set("pairs", rep.rows.len());
    rep.set("violations", violations);
    Ok(Some(rep))
}

fn unit(v: CVector) -> CVector {
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn run_weakdiff(p: &Params, check_only: bool) -> RunResult {
    let params = WeakDiffParams { alpha: p.f64("wd_alpha")?, beta: p.f64("wd_beta")? };
    params.spread()?;
    let close_fraction = p.f64("close_fraction")?;
    if !(0.0..=1.0).contains(&close_fraction) {
        return Err("close_fraction must be in [0, 1]".to_string().into());
    }
    let pairs = at_least_one(p, "pairs")?;
    let Some(st) = lq_setup(p, check_only, false)? else {
        return Ok(None);
    };
    let mut rng = SeededRng::new(p.seed, STREAM_PAIRS);
    let mut rep = Report::new(&["pair", "verdict", "dist_sq", "lower", "upper", "radius", "ok"]);
    let (mut separated, mut close, mut violations) = (0usize, 0usize, 0usize);
    for i in 0..pairs {
        let (x, y) = draw_pair(&st, &mut rng)?;
        let x = unit(x);
        let y = if rng.uniform() < close_fraction {
            let mut y = x.clone();
            let j = rng.below(y.len());
            y[j] += rng.complex_normal() * 0.05;
            unit(y)
        } else {
            unit(y)
        };
        let dist_sq = (&x - &y).norm_squared();
        let row = match weak_diff_classify(&st.a, x.as_slice(), y.as_slice(), st.delta, &params)? {
            DiffVerdict::Separated { lower, upper } => {
                separated += 1;
                let ok = lower <= dist_sq && dist_sq <= upper;
                violations += usize::from(!ok);
                vec![i.to_string(), "separated".into(), num(dist_sq), num(lower), num(upper), String::new(), ok.to_string()]
            }
            DiffVerdict::Close { radius } => {
                close += 1;
                let ok = dist_sq.sqrt() <= radius;
                violations += usize::from(!ok);
                vec![i.to_string(), "close".into(), num(dist_sq), String::new(), String::new(), num(radius), ok.to_string()]
            }
        };
        rep.row(row);
    }
    rep.set("delta", jnum(st.delta));
    rep.set("calibrated", st.calibrated);
    rep.set("separated", separated);
    rep.set("close", close);
    rep.set("violations", violations);
    Ok(Some(rep))
}

fn run_gordon(p: &Params, check_only: bool) -> RunResult {
    let n = p.usize("N")?;
    let k = p.usize("k")?;
    let model = SparsityModel::Canonical { k };
    model.check_dim(n)?;
    let (delta, zeta) = (p.f64("delta")?, p.f64("zeta")?);
    gordon_m(0.0, delta, zeta)?;
    let width_trials = p.usize("width_trials")?;
    if width_trials < 2 {
        return Err("width_trials must be >= 2".to_string().into());
    }
    let draws = at_least_one(p, "draws")?;
    let supports = binomial(n, k);
    if supports > EXACT_SUPPORT_LIMIT {
        return Err(CoreError::Capacity(format!(
            "C({n},{k}) = {supports} supports exceeds the enumeration limit {EXACT_SUPPORT_LIMIT}"
        ))
        .into());
    }
    if check_only {
        return Ok(None);
    }
    let width = gaussian_width(&model, n, width_trials, &SeededRng::new(p.seed, STREAM_WIDTH))?;
    let m = gordon_m(width.mean, delta, zeta)? as usize;
    let mut rep = Report::new(&["draw", "delta_hat", "within"]);
    let mut within = 0usize;
    for draw in 0..draws {
        let a = gaussian_ensemble(n, m, &mut SeededRng::new(p.seed, STREAM_ENSEMBLE).substream(draw as u64))?;
        let d = exact_rip_canonical(&a, k)?.delta_hat;
        within += usize::from(d <= delta);
        rep.row(vec![draw.to_string(), num(d), (d <= delta).to_string()]);
    }
    rep.set("width", jnum(width.mean));
    rep.set("width_stderr", jnum(width.stderr));
    rep.set("m", m);
    rep.set("fraction", jnum(within as f64 / draws as f64));
    Ok(Some(rep))
}

fn run_rosenthal(p: &Params, check_only: bool) -> RunResult {
    let variant: GroupVariant = p.text("group")?.parse()?;
    let n = at_least_one(p, "N")?;
    let d = at_least_one(p, "d")?;
    let dim = if variant == GroupVariant::DoubleQft { n * n } else { n };
    if d > dim {
        return Err(format!("d = {d} exceeds the dimension {dim}").into());
    }
    let ms = positive_list(p, "M")?;
    let trials = at_least_one(p, "trials")?;
    if check_only {
        return Ok(None);
    }
    // Coordinate selector on d evenly spaced columns, scaled to tr(u*u) = dim.
    let scale = (dim as f64 / d as f64).sqrt();
    let mut u = CMatrix::zeros(d, dim);
    for r in 0..d {
        u[(r, r * dim / d)] = C64::new(scale, 0.0);
    }
    let stats = rosenthal_deviation(&u, variant, n, &ms, trials, &SeededRng::new(p.seed, STREAM_RUN))?;
    let mut rep = Report::new(&["M", "median", "mean", "trials"]);
    for s in &stats {
        rep.row(vec![s.m.to_string(), num(s.median), num(s.mean), s.trials.to_string()]);
    }
    if stats.len() >= 2 {
        let xs: Vec<f64> = stats.iter().map(|s| s.m as f64).collect();
        let ys: Vec<f64> = stats.iter().map(|s| s.median).collect();
        rep.set("slope", jnum(log_log_slope(&xs, &ys)));
    }
    Ok(Some(rep))
}

fn run_table1(p: &Params, check_only: bool) -> RunResult {
    let (s, n, d) = (p.u64("s")?, p.u64("n")?, p.u64("d")?);
    let counts = [Table1Row::Gauss, Table1Row::Group, Table1Row::GroupSign]
        .into_iter()
        .map(|row| table1_m(row, s, n, d))
        .collect::<Result<Vec<u64>, _>>()?;
    if check_only {
        return Ok(None);
    }
    let mut rep = Report::new(&["s", "n", "d", "gauss", "group", "group_sign"]);
    rep.row(vec![s.to_string(), n.to_string(), d.to_string(), counts[0].to_string(), counts[1].to_string(), counts[2].to_string()]);
    rep.set("gauss", counts[0]);
    rep.set("group", counts[1]);
    rep.set("group_sign", counts[2]);
    Ok(Some(rep))
}

fn run_infdim_scan(p: &Params, check_only: bool) -> RunResult {
    let model = BumpModel {
        count: p.usize("count")?,
        t_min: p.f64("tmin")?,
        t_max: p.f64("tmax")?,
        n_big: p.usize("n_big")?,
    };
    model.validate()?;
    let (n, l, l0) = (p.usize("N")?, p.usize("L")?, p.usize("l0")?);
    let scheme = match p.text("scheme")? {
        "blocks" => {
            let mode = if p.text("mode")? == "rademacher" { BlockMode::Rademacher } else { BlockMode::Deterministic };
            Scheme::Blocks { instrument: BlockInstrument::new(n, l, mode, &mut SeededRng::new(p.seed, STREAM_SIGNS))? }
        }
        "time_sampling" => Scheme::TimeSampling,
        _ => {
            if l0 > 40 {
                return Err("l0 must be <= 40".to_string().into());
            }
            Scheme::Dyadic { l0: l0 as u32 }
        }
    };
    let ms = positive_list(p, "m")?;
    let trials = at_least_one(p, "trials")?;
    if check_only {
        return Ok(None);
    }
    let (n_col, l_col, d_col) = match &scheme {
        Scheme::Blocks { instrument } => (instrument.n.to_string(), instrument.l.to_string(), instrument.d.to_string()),
        // one mean functional plus one per shift sample or dyadic block
        Scheme::TimeSampling => (String::new(), String::new(), "2".into()),
        Scheme::Dyadic { l0 } => (String::new(), String::new(), (l0 + 1).to_string()),
    };
    let gamma = model.count as f64 / model.t_min;
    let rho = bump_sobolev_ratio() * model.t_max / TAU;
    let sampler = |r: &mut SeededRng| model.sample(r).map(|(_, f)| f);
    let run_rng = SeededRng::new(p.seed, STREAM_RUN);
    let label = scheme.label();
    let mut rep = Report::new(&["scheme", "N", "L", "d", "gamma", "rho", "m", "trial", "deviation"]);
    let mut medians = Vec::new();
    for &m in &ms {
        let r = infdim_rip_experiment(sampler, &scheme, m, trials, &run_rng)?;
        for (i, dev) in r.deviations.iter().enumerate() {
            rep.row(vec![
                label.clone(),
                n_col.clone(),
                l_col.clone(),
                d_col.clone(),
                num(gamma),
                num(rho),
                m.to_string(),
                i.to_string(),
                num(*dev),
            ]);
        }
        medians.push(json!({"m": m, "median": jnum(r.median), "delta_hat": jnum(r.delta_hat)}));
    }
    rep.set("medians", Value::Array(medians));
    Ok(Some(rep))
}

fn run_bump_check(p: &Params, check_only: bool) -> RunResult {
    let t = p.f64("T")?;
    let n_big = match p.usize("n_big")? {
        0 if t.is_finite() && t > 0.0 => 64 * t.ceil() as usize,
        v => v,
    };
    let model = BumpModel { count: p.usize("count")?, t_min: t, t_max: t, n_big };
    model.validate()?;
    if check_only {
        return Ok(None);
    }
    let (spec, f) = model.sample(&mut SeededRng::new(p.seed, STREAM_RUN))?;
    let mut rep = Report::new(&["identity", "parameter", "measured", "expected", "rel_error"]);
    let mut worst: f64 = 0.0;
    let mut push = |rep: &mut Report, name: &str, param: f64, measured: f64, expected: f64| {
        let rel = (measured - expected).abs() / expected;
        worst = worst.max(rel);
        rep.row(vec![name.into(), num(param), num(measured), num(expected), num(rel)]);
    };
    for q in [1.0, 1.5, 2.0, 3.0, 4.0] {
        let expected = bump_norm(q)? * t.powf(1.0 - 1.0 / q) * spec.alpha_power_sum(q).powf(1.0 / q);
        push(&mut rep, "lp_norm", q, f.lq_norm_function(q)?, expected);
    }
    let ratio = f.differentiate(DiffDirection::Derivative)?.l2_norm() / f.l2_norm();
    push(&mut rep, "derivative_ratio", t, ratio, bump_sobolev_ratio() * t / TAU);
    rep.set("max_rel_error", jnum(worst));
    rep.set("n_big", n_big);
    Ok(Some(rep))
}

fn bump_pair(model: &BumpModel, rng: &mut SeededRng) -> Result<(FourierFunction, f64), CliError> {
    let f = model.sample(rng)?.1.without_dc();
    let g = f.differentiate(DiffDirection::Antiderivative)?;
    let s = (f.l2_norm() / g.l2_norm()).powi(2);
    Ok((g, s))
}

fn run_truncation(p: &Params, check_only: bool) -> RunResult {
    let (q, delta) = (p.f64("q")?, p.f64("delta")?);
    truncation_level(q, 1.0, delta, 1.0)?;
    let model = BumpModel {
        count: p.usize("count")?,
        t_min: p.f64("tmin")?,
        t_max: p.f64("tmax")?,
        n_big: p.usize("n_big")?,
    };
    model.validate()?;
    let calibration = at_least_one(p, "calibration")?;
    let pairs = at_least_one(p, "pairs")?;
    let shift_count = p.usize("shifts")?;
    let target_s = p.opt_f64("s")?;
    if let Some(s) = target_s {
        truncation_level(q, s, delta, 1.0)?;
    }
    if check_only {
        return Ok(None);
    }
    let mut srng = SeededRng::new(p.seed, STREAM_SHIFTS);
    let shifts: Vec<f64> = (0..shift_count).map(|_| srng.uniform()).collect();
    let mut rng = SeededRng::new(p.seed, STREAM_RUN);
    let fitted = (0..calibration).map(|_| bump_pair(&model, &mut rng)).collect::<Result<Vec<_>, _>>()?;
    let c2 = calibrate_tail_constant(&fitted, q, &shifts)?;
    let mut rep = Report::new(&["pair", "s", "l0", "tail", "budget", "pass"]);
    let mut violations = 0usize;
    for i in 0..pairs {
        let (g, s) = bump_pair(&model, &mut rng)?;
        let l0 = truncation_level(q, s, delta, c2)?;
        let tail = TailProfile::of(&g, &shifts).at(l0);
        let budget = delta / 2.0 * g.l2_norm().powi(2);
        violations += usize::from(tail > budget);
        rep.row(vec![i.to_string(), num(s), l0.to_string(), num(tail), num(budget), (tail <= budget).to_string()]);
    }
    rep.set("c2", jnum(c2));
    rep.set("violations", violations);
    if let Some(s) = target_s {
        rep.set("l0_for_s", truncation_level(q, s, delta, c2)?);
    }
    Ok(Some(rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_are_unique_and_keys_distinct() {
        let cmds = commands();
        let mut names: Vec<&str> = cmds.iter().map(|c| c.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), cmds.len());
        for c in &cmds {
            let mut keys: Vec<&str> = c.keys.iter().map(|k| k.name).collect();
            keys.sort_unstable();
            let before = keys.len();
            keys.dedup();
            assert_eq!(before, keys.len(), "duplicate key in {}", c.name);
        }
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::Config(vec![]).exit_code(), 2);
        assert_eq!(CliError::Core(CoreError::Capacity("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::Numerical("x".into())).exit_code(), 4);
        assert_eq!(CliError::Core(CoreError::InvalidParameter("a".into())).messages(), vec!["a".to_string()]);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }
}
