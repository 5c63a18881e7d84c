//! Command-line front end. Each subcommand only wires library calls together.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::adaptive::{fit_adaptive, AdaptiveConfig};
use crate::benchmark::{self, BenchmarkCase, EvalReport, Method, MethodConfig, Status};
use crate::complexity::{worst_case_curve, ComplexityReport};
use crate::direct::{fit_direct, BarycentricModel, FitConfig};
use crate::error::{Error, Result};
use crate::loewner::NullMethod;
use crate::models::{emit_network_graph, eval_kst, eval_monomial, to_kst, to_monomial, GraphPart};
use crate::par::{self, Execution};
use crate::rng::case_seed;
use crate::tensor::{sample_grid, FnSampler, GridAxis, GridTensor};

#[derive(Parser, Debug)]
#[command(name = "mloewner", version, about = "Rational surrogates of dense grid tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a catalog function on its grid and save the tensor as JSON.
    Sample(SampleArgs),
    /// Fit a surrogate to a catalog function or a saved tensor.
    Fit(FitArgs),
    /// Evaluate a saved model at points.
    Eval(EvalArgs),
    /// Convert a saved model to monomial, KST or graph form.
    Convert(ConvertArgs),
    /// Sweep configurations over catalog cases and write a CSV report.
    Bench(BenchArgs),
    /// Flop and storage counts of the recursive and full null-space solves.
    Complexity(ComplexityArgs),
}

#[derive(Args, Debug, Clone)]
struct DomainArgs {
    /// Catalog case id (1-50).
    #[arg(long)]
    case: Option<usize>,
    /// Number of variables; checked against the case or tensor.
    #[arg(long)]
    omega: Option<usize>,
    /// Per-variable bounds l:u[,l:u...]; a single pair applies to all variables.
    #[arg(long)]
    bounds: Option<String>,
    /// Grid points per variable n[,n...]; a single value applies to all variables.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Direct,
    Adaptive,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Adaptive => Method::Adaptive,
        }
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Saved tensor to fit instead of a catalog case.
    #[arg(long, conflicts_with_all = ["case", "bounds", "grid"])]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "direct")]
    method: MethodArg,
    /// Order-detection threshold (direct only).
    #[arg(long)]
    tol_ord: Option<f64>,
    /// Residual tolerance (adaptive only).
    #[arg(long)]
    tol: Option<f64>,
    /// Weight pruning threshold; negative keeps all (direct only).
    #[arg(long)]
    tol_k: Option<f64>,
    /// svd, qr, solve or 1, 2, 3.
    #[arg(long, default_value = "svd")]
    null_method: NullMethod,
    /// Explicit orders k1[,k2...] instead of detection (direct only).
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// RMSE draws after the fit (catalog cases only); 0 skips scoring.
    #[arg(long, default_value_t = 0)]
    draws: usize,
    #[arg(long, env = "MLOEWNER_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Graphviz file of the denominator network.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    /// CSV trace of an adaptive fit.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Exit 2 when an adaptive fit stops short of its tolerance.
    #[arg(long)]
    strict: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Barycentric,
    Monomial,
    Kst,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    /// Evaluation point x1[,x2...]; repeat for more points.
    #[arg(long = "at", required = true, allow_hyphen_values = true)]
    at: Vec<String>,
    #[arg(long, value_enum, default_value = "barycentric")]
    form: Form,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Monomial,
    Kst,
    Graph,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum PartArg {
    Numerator,
    Denominator,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    to: Target,
    #[arg(long, value_enum, default_value = "denominator")]
    part: PartArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Case ids c1[,c2...]; every available case when absent.
    #[arg(long)]
    cases: Option<String>,
    /// Single-case shorthand.
    #[arg(long, conflicts_with = "cases")]
    case: Option<usize>,
    #[arg(long, value_enum, default_value = "direct")]
    method: MethodArg,
    /// Restrict the sweep to one order threshold (direct only).
    #[arg(long)]
    tol_ord: Option<f64>,
    /// Restrict the sweep to one residual tolerance (adaptive only).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    tol_k: Option<f64>,
    /// Restrict the sweep to one null-space method.
    #[arg(long)]
    null_method: Option<NullMethod>,
    #[arg(long, default_value_t = 500)]
    draws: usize,
    #[arg(long, env = "MLOEWNER_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// CSV with the best row per case.
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV with every swept configuration.
    #[arg(long)]
    all_report: Option<PathBuf>,
    /// Exit 2 if any best row stopped short of convergence.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct ComplexityArgs {
    /// Orders k1[,k2...].
    #[arg(long)]
    k: Option<String>,
    /// Per-variable order of the worst-case curve.
    #[arg(long)]
    worst_k: Option<usize>,
    #[arg(long, default_value_t = 50)]
    max_omega: usize,
    /// CSV file for the worst-case curve.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(Error),
    /// Finished, but a strict check failed.
    Strict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn numerical(e: &Error) -> bool {
    matches!(
        e,
        Error::PoleEncountered(_)
            | Error::SweepExhausted(_)
            | Error::DegenerateSlice(_)
            | Error::DegenerateSupport(_)
            | Error::OverPrunedModel(_)
            | Error::Sampling(_)
    )
}

/// Parse `argv` (program name first), run, and return the process exit code:
/// 0 on success, 1 on usage or input errors, 2 on numerical failure.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            let mut cmd = <Cli as clap::CommandFactory>::command();
            eprintln!("{}", cmd.render_usage());
            1
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if numerical(&e) {
                2
            } else {
                1
            }
        }
        Err(Failure::Strict(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Sample(a) => sample(a),
        Command::Fit(a) => fit(a),
        Command::Eval(a) => eval(a),
        Command::Convert(a) => convert(a),
        Command::Bench(a) => bench(a),
        Command::Complexity(a) => complexity(a),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> std::result::Result<Vec<T>, Failure> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| usage(format!("bad {what} entry '{s}' in '{text}'"))))
        .collect()
}

/// Broadcast a one-element list to `omega` entries.
fn broadcast<T: Clone>(v: Vec<T>, omega: usize, what: &str) -> std::result::Result<Vec<T>, Failure> {
    match v.len() {
        1 => Ok(vec![v[0].clone(); omega]),
        n if n == omega => Ok(v),
        n => Err(usage(format!("{n} {what} for {omega} variables"))),
    }
}

fn parse_bounds(text: &str, omega: usize) -> std::result::Result<Vec<(f64, f64)>, Failure> {
    let pairs = text
        .split(',')
        .map(|p| {
            let (l, u) = p.split_once(':').ok_or_else(|| usage(format!("bound '{p}' is not l:u")))?;
            let l: f64 = l.trim().parse().map_err(|_| usage(format!("bad lower bound in '{p}'")))?;
            let u: f64 = u.trim().parse().map_err(|_| usage(format!("bad upper bound in '{p}'")))?;
            Ok((l, u))
        })
        .collect::<std::result::Result<Vec<_>, Failure>>()?;
    broadcast(pairs, omega, "bounds")
}

/// Catalog case with any bounds or grid overrides applied.
fn resolve_case(d: &DomainArgs) -> std::result::Result<BenchmarkCase, Failure> {
    let id = d.case.ok_or_else(|| usage("--case is required"))?;
    let mut c = benchmark::case(id).map_err(|e| usage(e.to_string()))?;
    if let Some(o) = d.omega {
        if o != c.omega {
            return Err(usage(format!("case #{id} has {} variables, not {o}", c.omega)));
        }
    }
    if let Some(b) = &d.bounds {
        c.bounds = parse_bounds(b, c.omega)?;
    }
    if let Some(g) = &d.grid {
        c.grid = broadcast(parse_list(g, "grid")?, c.omega, "grid sizes")?;
    }
    c.formula()?;
    Ok(c)
}

fn sample(a: SampleArgs) -> Outcome {
    let c = resolve_case(&a.domain)?;
    let t = sample_grid(c.formula()?, &c.axes()?, Execution::Sequential)?;
    t.save(&a.out)?;
    println!("sampled case #{} on {:?} nodes -> {}", c.id, t.shape(), a.out.display());
    Ok(())
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn fit(a: FitArgs) -> Outcome {
    let method: Method = a.method.into();
    if method == Method::Adaptive {
        for (set, flag) in [(a.tol_ord.is_some(), "--tol-ord"), (a.tol_k.is_some(), "--tol-k"), (a.k.is_some(), "--k")] {
            if set {
                return Err(usage(format!("{flag} applies to the direct method only")));
            }
        }
    } else {
        for (set, flag) in [(a.tol.is_some(), "--tol"), (a.max_iters.is_some(), "--max-iters"), (a.trace_out.is_some(), "--trace-out")] {
            if set {
                return Err(usage(format!("{flag} applies to the adaptive method only")));
            }
        }
    }
    let exec = Execution::Sequential;

    // the data source: a catalog formula or a saved tensor
    let (case, tensor): (Option<BenchmarkCase>, Option<GridTensor>) = match &a.input {
        Some(p) => {
            let t = GridTensor::load(p)?;
            if let Some(o) = a.domain.omega {
                if o != t.omega() {
                    return Err(usage(format!("tensor has {} variables, not {o}", t.omega())));
                }
            }
            (None, Some(t))
        }
        None => (Some(resolve_case(&a.domain)?), None),
    };
    if a.draws > 0 && case.is_none() {
        return Err(usage("--draws needs --case"));
    }
    let axes: Vec<GridAxis> = match (&case, &tensor) {
        (Some(c), _) => c.axes()?,
        (_, Some(t)) => t.axes().to_vec(),
        _ => unreachable!(),
    };

    let model = match method {
        Method::Direct => {
            let mut cfg = FitConfig { exec, null_method: a.null_method, seed: a.seed, ..FitConfig::default() };
            if let Some(t) = a.tol_ord {
                cfg.tol_ord = t;
            }
            if let Some(t) = a.tol_k {
                cfg.tol_k = t;
            }
            if let Some(k) = &a.k {
                cfg.orders = Some(broadcast(parse_list(k, "order")?, axes.len(), "orders")?);
            }
            let fit = match (&case, &tensor) {
                (Some(c), _) => fit_direct(&FnSampler::new(c.formula()?, c.omega), &axes, &cfg)?,
                (_, Some(t)) => fit_direct(t, &axes, &cfg)?,
                _ => unreachable!(),
            };
            if let Some(d) = &fit.detected {
                println!("detected orders {d:?}");
            }
            println!("k = {:?}, K = {}, dim = {}", fit.model.k(), fit.model.weights().len(), fit.model.scalar_count());
            println!(
                "flops recursive {} vs full {} ({} solves, {} fallbacks)",
                fit.report.flops_recursive, fit.report.flops_full, fit.stats.solves, fit.stats.fallbacks
            );
            fit.model
        }
        Method::Adaptive => {
            let t = match (tensor, &case) {
                (Some(t), _) => t,
                (None, Some(c)) => sample_grid(c.formula()?, &axes, exec)?,
                _ => unreachable!(),
            };
            let mut cfg = AdaptiveConfig { null_method: a.null_method, exec, ..AdaptiveConfig::default() };
            if let Some(t) = a.tol {
                cfg.tol = t;
            }
            if let Some(m) = a.max_iters {
                cfg.max_iters = m;
            }
            let fit = fit_adaptive(&t, &cfg)?;
            if let Some(p) = &a.trace_out {
                fit.trace.write_csv(std::fs::File::create(p).map_err(Error::from)?)?;
            }
            let last = fit.trace.records.iter().find(|r| r.iter == fit.best_iter);
            println!(
                "status {}, {} iterations, best at {} with residual {:e}",
                fit.status,
                fit.trace.records.len(),
                fit.best_iter,
                last.map_or(f64::NAN, |r| r.max_residual)
            );
            println!("k = {:?}, K = {}, dim = {}", fit.model.k(), fit.model.weights().len(), fit.model.scalar_count());
            if a.strict && !fit.status.is_converged() {
                if let Some(p) = &a.out {
                    fit.model.save(p)?;
                }
                return Err(Failure::Strict(format!("adaptive fit did not converge ({})", fit.status)));
            }
            fit.model
        }
    };

    if let Some(p) = &a.out {
        model.save(p)?;
        println!("model -> {}", p.display());
    }
    if let Some(p) = &a.graph_out {
        write_text(p, &emit_network_graph(&model, GraphPart::Denominator).dot)?;
    }
    if let Some(c) = case.filter(|_| a.draws > 0) {
        let r = benchmark::rmse_with_redraws(&model, c.formula()?, &c.bounds, a.draws, case_seed(a.seed, c.id), exec)?;
        println!("rmse {:e} over {} draws ({} redraws)", r.rmse, a.draws, r.redraws);
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Outcome {
    let model = BarycentricModel::load(&a.model)?;
    let points = a
        .at
        .iter()
        .map(|p| parse_list::<f64>(p, "coordinate"))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(p) = points.iter().find(|p| p.len() != model.omega()) {
        return Err(usage(format!("point has {} coordinates, model has {} variables", p.len(), model.omega())));
    }
    let mono = if a.form == Form::Monomial { Some(to_monomial(&model)?) } else { None };
    let kst = if a.form == Form::Kst { Some(to_kst(&model)?) } else { None };
    let mut out = std::io::stdout().lock();
    for x in &points {
        let y = match a.form {
            Form::Barycentric => crate::models::eval_barycentric(&model, x)?,
            Form::Monomial => eval_monomial(mono.as_ref().unwrap(), x)?,
            Form::Kst => eval_kst(kst.as_ref().unwrap(), x)?,
        };
        writeln!(out, "{y:e}").map_err(Error::from)?;
    }
    Ok(())
}

fn convert(a: ConvertArgs) -> Outcome {
    let model = BarycentricModel::load(&a.model)?;
    if a.to == Target::Graph && a.out.is_some() && a.graph_out.is_some() {
        return Err(usage("give either --out or --graph-out for a graph"));
    }
    let text = match a.to {
        Target::Monomial => to_monomial(&model)?.to_json()?,
        Target::Kst => to_kst(&model)?.to_json()?,
        Target::Graph => {
            let part = match a.part {
                PartArg::Numerator => GraphPart::Numerator,
                PartArg::Denominator => GraphPart::Denominator,
            };
            emit_network_graph(&model, part).dot
        }
    };
    let dest = if a.to == Target::Graph { a.graph_out.or(a.out) } else { a.out };
    match dest {
        Some(p) => write_text(&p, &text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn bench_grid(a: &BenchArgs) -> std::result::Result<Vec<MethodConfig>, Failure> {
    let method: Method = a.method.into();
    let grid = match method {
        Method::Direct => {
            if a.tol.is_some() {
                return Err(usage("--tol applies to the adaptive method only"));
            }
            let tols = a.tol_ord.map_or(benchmark::TOL_ORD_GRID.to_vec(), |t| vec![t]);
            let mut g = Vec::new();
            for &t in &tols {
                for &m in &NullMethod::ALL {
                    g.push(MethodConfig::Direct { tol_ord: t, null_method: m, tol_k: a.tol_k.unwrap_or(-1.0) });
                }
            }
            g
        }
        Method::Adaptive => {
            if a.tol_ord.is_some() || a.tol_k.is_some() {
                return Err(usage("--tol-ord and --tol-k apply to the direct method only"));
            }
            NullMethod::ALL.iter().map(|&m| MethodConfig::adaptive(a.tol.unwrap_or(1e-15), m)).collect()
        }
    };
    Ok(match a.null_method {
        Some(nm) => grid
            .into_iter()
            .filter(|c| matches!(c, MethodConfig::Direct { null_method, .. } | MethodConfig::Adaptive { null_method, .. } if *null_method == nm))
            .collect(),
        None => grid,
    })
}

fn bench(a: BenchArgs) -> Outcome {
    let grid = bench_grid(&a)?;
    let cases: Vec<BenchmarkCase> = match (&a.cases, a.case) {
        (Some(list), _) => parse_list::<usize>(list, "case")?
            .into_iter()
            .map(benchmark::case)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| usage(e.to_string()))?,
        (None, Some(id)) => vec![benchmark::case(id).map_err(|e| usage(e.to_string()))?],
        (None, None) => benchmark::catalog().into_iter().filter(|c| c.available()).collect(),
    };
    if let Some(c) = cases.iter().find(|c| !c.available()) {
        return Err(Failure::Run(Error::CaseUnavailable(c.id)));
    }
    let (draws, seed) = (a.draws, a.seed);
    let sweeps = par::with_jobs(a.jobs, || {
        par::map_slice(Execution::Parallel, &cases, |c| benchmark::sweep_configs(c, &grid, draws, seed, Execution::Parallel))
    });

    let mut best: Vec<EvalReport> = Vec::new();
    let mut all: Vec<EvalReport> = Vec::new();
    let mut first_err = None;
    for (c, s) in cases.iter().zip(sweeps) {
        match s {
            Ok(s) => {
                println!("case {:>2} {:<11} rmse {:e}  dim {}  [{}]", c.id, c.klass, s.best.rmse, s.best.dim, s.best.config);
                best.push(s.best);
                all.extend(s.all);
            }
            Err(e) => {
                println!("case {:>2} {:<11} {e}", c.id, c.klass);
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(p) = &a.report {
        benchmark::write_report(&best, p)?;
    }
    if let Some(p) = &a.all_report {
        benchmark::write_report(&all, p)?;
    }
    if let Some(e) = first_err {
        return Err(Failure::Run(e));
    }
    if a.strict {
        if let Some(r) = best.iter().find(|r| matches!(&r.status, Status::Ok { stop: Some(_), .. })) {
            return Err(Failure::Strict(format!("case #{} did not converge ({})", r.case_id, r.status)));
        }
    }
    Ok(())
}

fn complexity(a: ComplexityArgs) -> Outcome {
    if a.k.is_none() && a.worst_k.is_none() {
        return Err(usage("give --k and/or --worst-k"));
    }
    if let Some(k) = &a.k {
        let k: Vec<usize> = parse_list(k, "order")?;
        println!("{}", ComplexityReport::new(&k)?);
    }
    if let Some(wk) = a.worst_k {
        let rows = worst_case_curve(wk, a.max_omega)?;
        let mut w: Box<dyn Write> = match &a.out {
            Some(p) => Box::new(std::fs::File::create(p).map_err(Error::from)?),
            None => Box::new(std::io::stdout().lock()),
        };
        let mut csv = csv::Writer::from_writer(&mut w);
        csv.write_record(["omega", "k", "n", "flops_recursive", "flops_full", "exponent"]).map_err(Error::from)?;
        for r in rows {
            csv.write_record([
                r.omega.to_string(),
                r.k.to_string(),
                r.n.to_string(),
                r.flops_recursive.to_string(),
                r.flops_full.to_string(),
                r.exponent.to_string(),
            ])
            .map_err(Error::from)?;
        }
        csv.flush().map_err(Error::from)?;
    }
    Ok(())
}
