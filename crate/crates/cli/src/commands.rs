//! Subcommand implementations. Each run builds one resolved config
//! record (embedded and hashed into the output), computes its data, and
//! writes through [`output::Sink`].

use crate::config::Resolved;
use crate::output::{fmt_f64, Sink};
use clap::Args;
use dlab_core::cadlag::CadlagFn;
use dlab_core::counterexample::{
    build_example, common_reparam_obstruction, deviation_report, obstruction_search, Variant,
};
use dlab_core::limits::rate::{rate_bound_exact, toy_model, FiniteDist, RateError, RateModel};
use dlab_core::limits::{
    convergence_sweep, lemma_check, shift_family, staircase_index, Functional, LimitsError,
    SweepModel, LEMMA_RUNGS,
};
use dlab_core::processes::{
    donsker_polygon, poisson_index, sample_wiener, IncrementSpec, SampleError, Seed,
};
use dlab_core::skorokhod::OracleError;
use dlab_core::{distance, distance_oracle, DistanceOpts, ExecMode};
use serde::Serialize;
use serde_json::json;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum RunError {
    /// Model or hypothesis violation (exit 1).
    Model(String),
    /// I/O or schema problem (exit 2).
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Model(_) => 1,
            RunError::Io(_) => 2,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Model(m) => write!(f, "{m}"),
            RunError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<anyhow::Error> for RunError {
    fn from(e: anyhow::Error) -> Self {
        RunError::Io(format!("{e:#}"))
    }
}

impl From<SampleError> for RunError {
    fn from(e: SampleError) -> Self {
        RunError::Model(e.to_string())
    }
}

impl From<LimitsError> for RunError {
    fn from(e: LimitsError) -> Self {
        RunError::Model(e.to_string())
    }
}

impl From<RateError> for RunError {
    fn from(e: RateError) -> Self {
        RunError::Model(e.to_string())
    }
}

impl From<OracleError> for RunError {
    fn from(e: OracleError) -> Self {
        RunError::Model(e.to_string())
    }
}

fn load_function(path: &PathBuf) -> Result<CadlagFn, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RunError::Io(format!("parsing {}: {e}", path.display())))
}

fn parse_range(s: &str) -> Result<(u32, u32), RunError> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| RunError::Io(format!("range {s:?} must look like 1..8")))?;
    let lo: u32 = lo
        .parse()
        .map_err(|_| RunError::Io(format!("bad range start {lo:?}")))?;
    let hi: u32 = hi
        .parse()
        .map_err(|_| RunError::Io(format!("bad range end {hi:?}")))?;
    if hi < lo {
        return Err(RunError::Io(format!("empty range {s:?}")));
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------
// distance

#[derive(Args, Debug)]
pub struct DistanceArgs {
    /// First function (JSON file with a knot list).
    #[arg(long)]
    pub f: PathBuf,
    /// Second function.
    #[arg(long)]
    pub g: PathBuf,
    /// Oracle grid size.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 8)]
    pub knot_budget: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Skip the oracle cross-check.
    #[arg(long, default_value_t = false)]
    pub no_oracle: bool,
}

#[derive(Serialize)]
struct DistanceConfig<'a> {
    command: &'static str,
    f: String,
    g: String,
    grid: usize,
    restarts: usize,
    knot_budget: usize,
    tolerance: f64,
    no_oracle: bool,
    seed: u64,
    format: &'a crate::config::Format,
}

pub fn run_distance(args: &DistanceArgs, resolved: &Resolved) -> Result<(), RunError> {
    let f = load_function(&args.f)?;
    let g = load_function(&args.g)?;
    let opts = DistanceOpts {
        knot_budget: args.knot_budget,
        restarts: args.restarts,
        tolerance: args.tolerance,
        exec: ExecMode::Parallel,
    };
    let optimized = distance(&f, &g, &opts);
    let oracle = if args.no_oracle {
        None
    } else {
        Some(distance_oracle(&f, &g, args.grid)?)
    };

    let best = match &oracle {
        Some(o) if o.upper < optimized.upper => o.clone(),
        _ => optimized.clone(),
    };
    let data = json!({
        "upper": best.upper,
        "lower": best.lower,
        "value_part": best.value_part,
        "slope_part": best.slope_part,
        "budget_exhausted": optimized.budget_exhausted,
        "witness": best.witness,
        "optimizer_upper": optimized.upper,
        "oracle_upper": oracle.as_ref().map(|o| o.upper),
    });
    let record = DistanceConfig {
        command: "distance",
        f: args.f.display().to_string(),
        g: args.g.display().to_string(),
        grid: args.grid,
        restarts: args.restarts,
        knot_budget: args.knot_budget,
        tolerance: args.tolerance,
        no_oracle: args.no_oracle,
        seed: resolved.seed,
        format: &resolved.format,
    };
    Sink::new(resolved).write_json(&record, &data)?;
    Ok(())
}

// ---------------------------------------------------------------------
// sample

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// What to sample.
    #[arg(long, value_parser = ["donsker", "wiener", "poisson-index"])]
    pub what: String,
    /// Steps (donsker), grid (wiener) or scale (poisson-index).
    #[arg(long)]
    pub n: u64,
    /// Increment law for walks.
    #[arg(long, default_value = "rademacher",
          value_parser = ["rademacher", "standard-normal", "centered-uniform", "geometric-decay"])]
    pub increments: String,
    /// Base for geometric-decay increments.
    #[arg(long, default_value_t = 2.0)]
    pub decay_base: f64,
    /// Offset for the counting-process index.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Replicate index within the root seed.
    #[arg(long, default_value_t = 0)]
    pub rep: u64,
}

#[derive(Serialize)]
struct SampleConfig<'a> {
    command: &'static str,
    what: &'a str,
    n: u64,
    increments: &'a str,
    decay_base: f64,
    a: f64,
    rep: u64,
    seed: u64,
}

fn increment_spec(name: &str, decay_base: f64) -> IncrementSpec {
    match name {
        "standard-normal" => IncrementSpec::standard_normal(),
        "centered-uniform" => IncrementSpec::centered_uniform(),
        "geometric-decay" => IncrementSpec::geometric_decay(decay_base),
        _ => IncrementSpec::rademacher(),
    }
}

pub fn run_sample(args: &SampleArgs, resolved: &Resolved) -> Result<(), RunError> {
    let seed = Seed::new(resolved.seed).replicate(args.rep);
    let record = SampleConfig {
        command: "sample",
        what: &args.what,
        n: args.n,
        increments: &args.increments,
        decay_base: args.decay_base,
        a: args.a,
        rep: args.rep,
        seed: resolved.seed,
    };
    let sink = Sink::new(resolved);
    match args.what.as_str() {
        "donsker" => {
            let spec = increment_spec(&args.increments, args.decay_base);
            let n = u32::try_from(args.n)
                .map_err(|_| RunError::Model(format!("step count {} too large", args.n)))?;
            let f = donsker_polygon(&spec, n, seed)?;
            sink.write_json(&record, &f.canonical())?;
        }
        "wiener" => {
            let m = u32::try_from(args.n)
                .map_err(|_| RunError::Model(format!("grid {} too large", args.n)))?;
            let w = sample_wiener(m, seed)?;
            sink.write_json(&record, &w.canonical())?;
        }
        "poisson-index" => {
            let p = poisson_index(args.n, args.a, seed)?;
            sink.write_json(&record, &p)?;
        }
        other => return Err(RunError::Io(format!("unknown sample kind {other:?}"))),
    }
    Ok(())
}

// ---------------------------------------------------------------------
// sweep

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Experiment model (JSON file, schema: {family, index, reference}).
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated increasing scales.
    #[arg(long, value_delimiter = ',')]
    pub ns: Vec<u64>,
    /// Functional reducing each path to a real.
    #[arg(long, default_value = "terminal")]
    pub functional: String,
    /// Evaluation time for the eval-at functional.
    #[arg(long, default_value_t = 1.0)]
    pub at: f64,
    #[arg(long, default_value_t = 2000)]
    pub reps: u32,
}

#[derive(Serialize)]
struct SweepConfig<'a> {
    command: &'static str,
    model: &'a SweepModel,
    ns: &'a [u64],
    functional: String,
    reps: u32,
    seed: u64,
}

fn parse_functional(name: &str, at: f64) -> Result<Functional, RunError> {
    match name {
        "terminal" => Ok(Functional::Terminal),
        "sup" => Ok(Functional::Sup),
        "integral" => Ok(Functional::Integral),
        "eval-at" => Ok(Functional::EvalAt { t: at }),
        other => Err(RunError::Io(format!(
            "unknown functional {other:?} (expected terminal|sup|integral|eval-at)"
        ))),
    }
}

pub fn run_sweep(args: &SweepArgs, resolved: &Resolved) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| RunError::Io(format!("reading {}: {e}", args.model.display())))?;
    let model: SweepModel = serde_json::from_str(&text)
        .map_err(|e| RunError::Io(format!("parsing {}: {e}", args.model.display())))?;
    let functional = parse_functional(&args.functional, args.at)?;
    let rows = convergence_sweep(
        &model,
        &args.ns,
        functional,
        args.reps,
        resolved.seed,
        ExecMode::Parallel,
    )?;
    let record = SweepConfig {
        command: "sweep",
        model: &model,
        ns: &args.ns,
        functional: functional.label(),
        reps: args.reps,
        seed: resolved.seed,
    };
    Sink::new(resolved).write_table(
        &record,
        &["n", "functional", "ks", "stderr", "reps"],
        &rows,
        |r| {
            vec![
                r.n.to_string(),
                r.functional.clone(),
                fmt_f64(r.ks),
                fmt_f64(r.stderr),
                r.reps.to_string(),
            ]
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------
// rate-bound

#[derive(Args, Debug)]
pub struct RateBoundArgs {
    /// Model file: {"kind":"toy"} or {"kind":"explicit", ...}.
    #[arg(long)]
    pub model: PathBuf,
    /// Inclusive scale range for the toy model, e.g. 1..20.
    #[arg(long, default_value = "1..20")]
    pub n_range: String,
}

#[derive(Debug, serde::Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum RateModelSpec {
    Toy,
    Explicit {
        /// Each distribution is a list of `[value_num, value_den,
        /// prob_num, prob_den]` atoms.
        family: Vec<Vec<[i64; 4]>>,
        limit: Vec<[i64; 4]>,
        index: Vec<[i64; 4]>,
        nu: Vec<[i64; 4]>,
        f_n: [i64; 2],
        c: [i64; 2],
        n: u32,
    },
}

fn dist_from_atoms(atoms: &[[i64; 4]]) -> Result<FiniteDist, RunError> {
    use dlab_core::limits::rate::rat;
    let pairs = atoms
        .iter()
        .map(|a| (rat(a[0], a[1]), rat(a[2], a[3])))
        .collect();
    FiniteDist::new(pairs).map_err(RunError::from)
}

#[derive(Serialize)]
struct RateConfig<'a> {
    command: &'static str,
    model: &'a RateModelSpec,
    n_range: &'a str,
    seed: u64,
}

pub fn run_rate_bound(args: &RateBoundArgs, resolved: &Resolved) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| RunError::Io(format!("reading {}: {e}", args.model.display())))?;
    let spec: RateModelSpec = serde_json::from_str(&text)
        .map_err(|e| RunError::Io(format!("parsing {}: {e}", args.model.display())))?;

    let models: Vec<RateModel> = match &spec {
        RateModelSpec::Toy => {
            let (lo, hi) = parse_range(&args.n_range)?;
            (lo.max(1)..=hi).map(toy_model).collect()
        }
        RateModelSpec::Explicit {
            family,
            limit,
            index,
            nu,
            f_n,
            c,
            n,
        } => {
            use dlab_core::limits::rate::rat;
            let family = family
                .iter()
                .map(|d| dist_from_atoms(d))
                .collect::<Result<Vec<_>, _>>()?;
            vec![RateModel {
                family,
                limit: dist_from_atoms(limit)?,
                index: dist_from_atoms(index)?,
                nu: dist_from_atoms(nu)?,
                f_n: rat(f_n[0], f_n[1]),
                c: rat(c[0], c[1]),
                n: *n,
            }]
        }
    };

    let mut rows = Vec::with_capacity(models.len());
    let mut all_hold = true;
    for model in &models {
        let report = rate_bound_exact(model)?;
        all_hold &= report.holds;
        rows.push(report.to_row());
    }
    let record = RateConfig {
        command: "rate-bound",
        model: &spec,
        n_range: &args.n_range,
        seed: resolved.seed,
    };
    let data = json!({ "all_hold": all_hold, "rows": rows });
    Sink::new(resolved).write_json(&record, &data)?;
    Ok(())
}

// ---------------------------------------------------------------------
// counterexample

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    /// Inclusive range of the construction parameter, e.g. 1..8.
    #[arg(long, default_value = "1..6")]
    pub n: String,
    #[arg(long, default_value = "printed", value_parser = ["printed", "step"])]
    pub variant: String,
    /// Search lattice size for the obstruction minima.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
}

#[derive(Serialize)]
struct CounterexampleConfig<'a> {
    command: &'static str,
    n: &'a str,
    variant: &'a str,
    grid: usize,
    seed: u64,
}

#[derive(Serialize)]
struct CeRow {
    n: u32,
    variant: String,
    d_a_even: f64,
    d_b_even: f64,
    d_a_odd: f64,
    d_b_odd: f64,
    dist_even_lower: f64,
    dist_even_upper: f64,
    dist_odd_lower: f64,
    dist_odd_upper: f64,
    obstruction: f64,
    eq2_value: f64,
}

pub fn run_counterexample(args: &CounterexampleArgs, resolved: &Resolved) -> Result<(), RunError> {
    let (lo, hi) = parse_range(&args.n)?;
    let variant = match args.variant.as_str() {
        "step" => Variant::Step,
        _ => Variant::Printed,
    };
    let opts = DistanceOpts::default();
    let mut rows = Vec::new();
    for n in lo.max(1)..=hi {
        let inst = build_example(n, variant).map_err(|e| RunError::Model(e.to_string()))?;
        let report = deviation_report(&inst, &opts);
        let obstruction = common_reparam_obstruction(&inst, args.grid)
            .map_err(|e| RunError::Model(e.to_string()))?;
        let search = obstruction_search(&inst, args.grid, ExecMode::Parallel)
            .map_err(|e| RunError::Model(e.to_string()))?;
        rows.push(CeRow {
            n,
            variant: variant.to_string(),
            d_a_even: report.d_a_even,
            d_b_even: report.d_b_even,
            d_a_odd: report.d_a_odd,
            d_b_odd: report.d_b_odd,
            dist_even_lower: report.dist_even.lower,
            dist_even_upper: report.dist_even.upper,
            dist_odd_lower: report.dist_odd.lower,
            dist_odd_upper: report.dist_odd.upper,
            obstruction,
            eq2_value: search.min_avg,
        });
    }
    let record = CounterexampleConfig {
        command: "counterexample",
        n: &args.n,
        variant: &args.variant,
        grid: args.grid,
        seed: resolved.seed,
    };
    Sink::new(resolved).write_table(
        &record,
        &[
            "n",
            "variant",
            "d_a_even",
            "d_b_even",
            "d_a_odd",
            "d_b_odd",
            "dist_even_lower",
            "dist_even_upper",
            "dist_odd_lower",
            "dist_odd_upper",
            "obstruction",
            "eq2_value",
        ],
        &rows,
        |r| {
            vec![
                r.n.to_string(),
                r.variant.clone(),
                fmt_f64(r.d_a_even),
                fmt_f64(r.d_b_even),
                fmt_f64(r.d_a_odd),
                fmt_f64(r.d_b_odd),
                fmt_f64(r.dist_even_lower),
                fmt_f64(r.dist_even_upper),
                fmt_f64(r.dist_odd_lower),
                fmt_f64(r.dist_odd_upper),
                fmt_f64(r.obstruction),
                fmt_f64(r.eq2_value),
            ]
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------------------
// lemma-check

#[derive(Args, Debug)]
pub struct LemmaCheckArgs {
    /// Family: constant shifts 1/k over the zero limit, or a family
    /// identically equal to its limit.
    #[arg(long, default_value = "shift", value_parser = ["shift", "identical"])]
    pub family: String,
    /// Comma-separated scales for the staircase index.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10u32, 100, 1000])]
    pub ns: Vec<u32>,
}

#[derive(Serialize)]
struct LemmaConfig<'a> {
    command: &'static str,
    family: &'a str,
    ns: &'a [u32],
    seed: u64,
}

#[derive(Serialize)]
struct LemmaRow {
    n: u32,
    deviation: f64,
    below_0_1: bool,
    below_0_01: bool,
    below_0_001: bool,
}

pub fn run_lemma_check(args: &LemmaCheckArgs, resolved: &Resolved) -> Result<(), RunError> {
    let family = match args.family.as_str() {
        "identical" => {
            let x = CadlagFn::unit_step(0.5).map_err(|e| RunError::Model(e.to_string()))?;
            let member = x.clone();
            dlab_core::cadlag::IndexedFamily::from_fn(move |_| Some(member.clone())).with_limit(x)
        }
        _ => shift_family(CadlagFn::zero()),
    };
    let indices = args
        .ns
        .iter()
        .map(|&n| staircase_index(n))
        .collect::<Result<Vec<_>, _>>()?;
    let report = lemma_check(&family, &indices)?;
    let rows: Vec<LemmaRow> = args
        .ns
        .iter()
        .zip(&report.deviations)
        .map(|(&n, &d)| LemmaRow {
            n,
            deviation: d,
            below_0_1: d <= LEMMA_RUNGS[0],
            below_0_01: d <= LEMMA_RUNGS[1],
            below_0_001: d <= LEMMA_RUNGS[2],
        })
        .collect();
    let record = LemmaConfig {
        command: "lemma-check",
        family: &args.family,
        ns: &args.ns,
        seed: resolved.seed,
    };
    Sink::new(resolved).write_table(
        &record,
        &["n", "deviation", "below_0.1", "below_0.01", "below_0.001"],
        &rows,
        |r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.deviation),
                r.below_0_1.to_string(),
                r.below_0_01.to_string(),
                r.below_0_001.to_string(),
            ]
        },
    )?;
    Ok(())
}
