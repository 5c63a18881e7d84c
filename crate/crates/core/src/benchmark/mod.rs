//! Benchmark harness: sweep fit configurations over the test catalog, score
//! each surrogate by RMSE on seeded random draws, keep the best, write CSV.

mod catalog;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

pub use catalog::{case, catalog, BenchmarkCase, Klass};

use crate::adaptive::{fit_adaptive, AdaptiveConfig, AdaptiveStatus};
use crate::direct::{fit_direct, FitConfig};
use crate::error::{Error, Point, Result};
use crate::loewner::NullMethod;
use crate::models::Surrogate;
use crate::par::{self, Execution};
use crate::rng::{case_seed, SplitMix64};
use crate::tensor::{sample_grid, FnSampler, Function};

/// Order-detection thresholds swept by default for the direct fit.
pub const TOL_ORD_GRID: [f64; 12] = [0.5, 1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9, 1e-10, 1e-11, 1e-12, 1e-13, 1e-14];

/// Redraws allowed per test point that lands on a surrogate pole.
pub const MAX_REDRAWS: usize = 10;

/// Adaptive fits on larger tensors are refused rather than sampled.
pub const MAX_ADAPTIVE_NODES: usize = 4_000_000;

const REDRAW_SALT: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Direct,
    Adaptive,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "adaptive" => Ok(Method::Adaptive),
            _ => Err(Error::InvalidInput(format!("unknown method '{s}' (expected direct or adaptive)"))),
        }
    }
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodConfig {
    Direct { tol_ord: f64, null_method: NullMethod, tol_k: f64 },
    Adaptive { tol: f64, null_method: NullMethod, max_iters: usize },
}

impl MethodConfig {
    pub fn direct(tol_ord: f64, null_method: NullMethod) -> Self {
        MethodConfig::Direct { tol_ord, null_method, tol_k: -1.0 }
    }

    pub fn adaptive(tol: f64, null_method: NullMethod) -> Self {
        MethodConfig::Adaptive { tol, null_method, max_iters: AdaptiveConfig::default().max_iters }
    }

    pub fn method(&self) -> Method {
        match self {
            MethodConfig::Direct { .. } => Method::Direct,
            MethodConfig::Adaptive { .. } => Method::Adaptive,
        }
    }

    /// The snapshot stored in the report's `config` column.
    pub fn snapshot(&self) -> String {
        match self {
            MethodConfig::Direct { tol_ord, null_method, tol_k } => {
                format!("tol_ord={tol_ord:e};null_method={null_method};tol_k={tol_k}")
            }
            MethodConfig::Adaptive { tol, null_method, max_iters } => {
                format!("tol={tol:e};null_method={null_method};max_iters={max_iters}")
            }
        }
    }
}

/// Every order threshold with every null-space method.
pub fn default_direct_grid() -> Vec<MethodConfig> {
    TOL_ORD_GRID
        .iter()
        .flat_map(|&t| NullMethod::ALL.iter().map(move |&m| MethodConfig::direct(t, m)))
        .collect()
}

/// Residual tolerance 1e-15 with every null-space method.
pub fn default_adaptive_grid() -> Vec<MethodConfig> {
    NullMethod::ALL.iter().map(|&m| MethodConfig::adaptive(1e-15, m)).collect()
}

pub fn default_grid(method: Method) -> Vec<MethodConfig> {
    match method {
        Method::Direct => default_direct_grid(),
        Method::Adaptive => default_adaptive_grid(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    /// `redraws` counts test points moved off a pole; `stop` is set when an
    /// adaptive fit ended before reaching its tolerance.
    Ok { redraws: usize, stop: Option<String> },
    NotConverged(String),
}

impl Status {
    pub fn is_ok(&self) -> bool {
        matches!(self, Status::Ok { .. })
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok { redraws, stop } => {
                f.write_str("ok")?;
                if let Some(s) = stop {
                    write!(f, "; stopped={s}")?;
                }
                if *redraws > 0 {
                    write!(f, "; redraws={redraws}")?;
                }
                Ok(())
            }
            Status::NotConverged(why) => write!(f, "not_converged: {why}"),
        }
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(why) = s.strip_prefix("not_converged: ") {
            return Ok(Status::NotConverged(why.to_string()));
        }
        let mut parts = s.split("; ");
        if parts.next() != Some("ok") {
            return Err(Error::InvalidInput(format!("bad status '{s}'")));
        }
        let (mut redraws, mut stop) = (0, None);
        for p in parts {
            if let Some(v) = p.strip_prefix("redraws=") {
                redraws = v.parse().map_err(|_| Error::InvalidInput(format!("bad status '{s}'")))?;
            } else if let Some(v) = p.strip_prefix("stopped=") {
                stop = Some(v.to_string());
            } else {
                return Err(Error::InvalidInput(format!("bad status '{s}'")));
            }
        }
        Ok(Status::Ok { redraws, stop })
    }
}

/// One fitted and scored configuration. Failed rows carry `rmse = inf`, `dim = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub case_id: usize,
    pub klass: Klass,
    pub method: Method,
    pub config: String,
    /// Stored scalars of the surrogate, `(ω+2)·K`.
    pub dim: usize,
    /// Wall time of the fit alone.
    pub cpu_s: f64,
    pub rmse: f64,
    pub status: Status,
}

impl EvalReport {
    fn sort_key(&self) -> (usize, Method, &str) {
        (self.case_id, self.method, &self.config)
    }
}

/// RMSE together with the number of redrawn test points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseOutcome {
    pub rmse: f64,
    pub redraws: usize,
}

fn draw_point(rng: &mut SplitMix64, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds.iter().map(|&(lo, hi)| rng.uniform(lo, hi)).collect()
}

/// Squared error at draw `i`, redrawing from a stream salted by `i` while the
/// surrogate has a pole there.
fn draw_error(
    model: &dyn Surrogate,
    f: &Function,
    bounds: &[(f64, f64)],
    seed: u64,
    i: usize,
    base: Vec<f64>,
) -> Result<(f64, usize)> {
    let mut x = base;
    let mut retry = SplitMix64::new(seed ^ REDRAW_SALT.wrapping_mul(i as u64 + 1));
    let mut redraws = 0;
    loop {
        let g = match model.eval(&x) {
            Ok(g) if g.is_finite() => Some(g),
            Ok(_) | Err(Error::PoleEncountered(_)) => None,
            Err(e) => return Err(e),
        };
        if let Some(g) = g {
            let fx = f(&x);
            if !fx.is_finite() {
                return Err(Error::Sampling(Point(x)));
            }
            return Ok(((g - fx) * (g - fx), redraws));
        }
        if redraws == MAX_REDRAWS {
            return Err(Error::PoleEncountered(Point(x)));
        }
        redraws += 1;
        x = draw_point(&mut retry, bounds);
    }
}

/// `sqrt(mean (G(x) − f(x))²)` over `draws` points uniform in `bounds`.
pub fn rmse_with_redraws(
    model: &dyn Surrogate,
    f: &Function,
    bounds: &[(f64, f64)],
    draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<RmseOutcome> {
    if draws == 0 {
        return Err(Error::InvalidInput("RMSE needs at least one draw".into()));
    }
    if bounds.len() != model.omega() {
        return Err(Error::InvalidInput(format!(
            "{} bounds for a {}-variable model",
            bounds.len(),
            model.omega()
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let points: Vec<Vec<f64>> = (0..draws).map(|_| draw_point(&mut rng, bounds)).collect();
    let errors = par::try_map_range(exec, draws, |i| draw_error(model, f, bounds, seed, i, points[i].clone()))?;
    // summed in index order so the result does not depend on scheduling
    let (mut sum, mut redraws) = (0.0, 0);
    for (e, r) in errors {
        sum += e;
        redraws += r;
    }
    Ok(RmseOutcome { rmse: (sum / draws as f64).sqrt(), redraws })
}

pub fn rmse(model: &dyn Surrogate, f: &Function, bounds: &[(f64, f64)], draws: usize, seed: u64) -> Result<f64> {
    rmse_with_redraws(model, f, bounds, draws, seed, Execution::Parallel).map(|o| o.rmse)
}

fn failed(case: &BenchmarkCase, config: &MethodConfig, cpu_s: f64, why: String) -> EvalReport {
    EvalReport {
        case_id: case.id,
        klass: case.klass,
        method: config.method(),
        config: config.snapshot(),
        dim: 0,
        cpu_s,
        rmse: f64::INFINITY,
        status: Status::NotConverged(why),
    }
}

/// Fit one configuration and score it. Test points depend only on
/// `(case, seed)`, so every configuration of a case sees the same draws.
pub fn run_case(
    case: &BenchmarkCase,
    config: &MethodConfig,
    draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<EvalReport> {
    let f = case.formula()?;
    let axes = case.axes()?;
    let (model, stop, cpu_s) = match *config {
        MethodConfig::Direct { tol_ord, null_method, tol_k } => {
            let cfg = FitConfig { tol_ord, null_method, tol_k, exec, ..FitConfig::default() };
            let sampler = FnSampler::new(f, case.omega);
            let t0 = Instant::now();
            let fit = fit_direct(&sampler, &axes, &cfg);
            let dt = t0.elapsed().as_secs_f64();
            match fit {
                Ok(fit) => (fit.model, None, dt),
                Err(e) => return Ok(failed(case, config, dt, e.to_string())),
            }
        }
        MethodConfig::Adaptive { tol, null_method, max_iters } => {
            let nodes: usize = case.grid.iter().product();
            if nodes > MAX_ADAPTIVE_NODES {
                return Ok(failed(case, config, 0.0, format!("tensor of {nodes} nodes exceeds the adaptive limit")));
            }
            let tensor = match sample_grid(f, &axes, exec) {
                Ok(t) => t,
                Err(e) => return Ok(failed(case, config, 0.0, e.to_string())),
            };
            let cfg = AdaptiveConfig { tol, null_method, max_iters, seed_k: None, exec };
            let t0 = Instant::now();
            let fit = fit_adaptive(&tensor, &cfg);
            let dt = t0.elapsed().as_secs_f64();
            match fit {
                Ok(fit) => {
                    let stop = match fit.status {
                        AdaptiveStatus::Converged => None,
                        s => Some(s.to_string()),
                    };
                    (fit.model, stop, dt)
                }
                Err(e) => return Ok(failed(case, config, dt, e.to_string())),
            }
        }
    };
    match rmse_with_redraws(&model, f, &case.bounds, draws, case_seed(seed, case.id), exec) {
        Ok(o) => Ok(EvalReport {
            case_id: case.id,
            klass: case.klass,
            method: config.method(),
            config: config.snapshot(),
            dim: model.scalar_count(),
            cpu_s,
            rmse: o.rmse,
            status: Status::Ok { redraws: o.redraws, stop },
        }),
        Err(e) => Ok(failed(case, config, cpu_s, e.to_string())),
    }
}

/// Best report of a sweep plus every report in grid order.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub best: EvalReport,
    pub all: Vec<EvalReport>,
}

fn better(a: &EvalReport, b: &EvalReport) -> bool {
    (a.rmse, a.dim, &a.config) < (b.rmse, b.dim, &b.config)
}

/// Run every configuration and keep the lowest RMSE among the ok reports;
/// ties go to the smaller model, then to the lexicographically smaller config.
pub fn sweep_configs(
    case: &BenchmarkCase,
    grid: &[MethodConfig],
    draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<Sweep> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty configuration grid".into()));
    }
    case.formula()?;
    let all = par::map_slice(exec, grid, |c| run_case(case, c, draws, seed, exec))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best = all
        .iter()
        .filter(|r| r.status.is_ok())
        .fold(None::<&EvalReport>, |acc, r| match acc {
            Some(b) if !better(r, b) => Some(b),
            _ => Some(r),
        })
        .ok_or(Error::SweepExhausted(case.id))?
        .clone();
    Ok(Sweep { best, all })
}

pub const REPORT_HEADER: [&str; 8] = ["case_id", "klass", "method", "config", "dim", "cpu_s", "rmse", "status"];

/// Reports sorted by case, method and config.
pub fn sorted(reports: &[EvalReport]) -> Vec<EvalReport> {
    let mut out = reports.to_vec();
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    out
}

pub fn write_report_to<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in sorted(reports) {
        w.write_record([
            r.case_id.to_string(),
            r.klass.to_string(),
            r.method.to_string(),
            r.config.clone(),
            r.dim.to_string(),
            r.cpu_s.to_string(),
            r.rmse.to_string(),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Path of the per-class summary written next to `path`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_summary.csv"))
}

/// Write the report CSV and its per-class summary.
pub fn write_report(reports: &[EvalReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_report_to(reports, std::fs::File::create(path)?)?;
    write_summary_to(reports, std::fs::File::create(summary_path(path))?)
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::InvalidInput(format!("bad report field '{}' in {:?}", REPORT_HEADER[i], rec)))
}

pub fn parse_report(text: &str) -> Result<Vec<EvalReport>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    if rd.headers()?.iter().ne(REPORT_HEADER) {
        return Err(Error::InvalidInput("report header mismatch".into()));
    }
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(EvalReport {
                case_id: field(&rec, 0)?,
                klass: field(&rec, 1)?,
                method: field(&rec, 2)?,
                config: rec.get(3).unwrap_or_default().to_string(),
                dim: field(&rec, 4)?,
                cpu_s: field(&rec, 5)?,
                rmse: field(&rec, 6)?,
                status: rec.get(7).unwrap_or_default().parse()?,
            })
        })
        .collect()
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<EvalReport>> {
    parse_report(&std::fs::read_to_string(path)?)
}

/// Min and median RMSE of the ok reports of one class and method.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub klass: Klass,
    pub method: Method,
    pub reports: usize,
    pub ok: usize,
    pub min_rmse: f64,
    pub median_rmse: f64,
}

pub fn summarize(reports: &[EvalReport]) -> Vec<SummaryRow> {
    let mut groups: std::collections::BTreeMap<(Klass, Method), (usize, Vec<f64>)> = Default::default();
    for r in reports {
        let g = groups.entry((r.klass, r.method)).or_default();
        g.0 += 1;
        if r.status.is_ok() {
            g.1.push(r.rmse);
        }
    }
    groups
        .into_iter()
        .map(|((klass, method), (n, mut v))| {
            v.sort_by(f64::total_cmp);
            let median = match v.len() {
                0 => f64::NAN,
                m if m % 2 == 1 => v[m / 2],
                m => 0.5 * (v[m / 2 - 1] + v[m / 2]),
            };
            SummaryRow {
                klass,
                method,
                reports: n,
                ok: v.len(),
                min_rmse: v.first().copied().unwrap_or(f64::NAN),
                median_rmse: median,
            }
        })
        .collect()
}

pub fn write_summary_to<W: Write>(reports: &[EvalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["klass", "method", "reports", "ok", "min_rmse", "median_rmse"])?;
    for s in summarize(reports) {
        w.write_record([
            s.klass.to_string(),
            s.method.to_string(),
            s.reports.to_string(),
            s.ok.to_string(),
            s.min_rmse.to_string(),
            s.median_rmse.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::BarycentricModel;

    struct Offset<'a> {
        f: &'a Function,
        omega: usize,
        eps: f64,
    }

    impl Surrogate for Offset<'_> {
        fn omega(&self) -> usize {
            self.omega
        }
        fn eval(&self, x: &[f64]) -> Result<f64> {
            Ok((self.f)(x) + self.eps)
        }
    }

    /// Has a pole on the half-plane x1 < 0.
    struct HalfPole;

    impl Surrogate for HalfPole {
        fn omega(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64]) -> Result<f64> {
            if x[0] < 0.0 {
                Err(Error::PoleEncountered(Point(x.to_vec())))
            } else {
                Ok(x[0] * x[1])
            }
        }
    }

    #[test]
    fn offset_model_scores_its_offset() {
        let c = case(3).unwrap();
        let f = c.formula().unwrap();
        let zero = rmse(&Offset { f, omega: 2, eps: 0.0 }, f, &c.bounds, 500, 1).unwrap();
        assert_eq!(zero, 0.0);
        let eps = 0.25;
        let r = rmse(&Offset { f, omega: 2, eps }, f, &c.bounds, 500, 1).unwrap();
        assert!((r - eps).abs() <= 1e-15, "{r}");
    }

    #[test]
    fn draws_follow_the_generator() {
        // one draw, identity model + 1 at the first SplitMix64 point
        let f: &Function = &|x: &[f64]| x[0];
        let mut g = SplitMix64::new(99);
        let x0 = g.uniform(2.0, 3.0);
        struct Sq;
        impl Surrogate for Sq {
            fn omega(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64]) -> Result<f64> {
                Ok(x[0] * x[0])
            }
        }
        let r = rmse(&Sq, f, &[(2.0, 3.0)], 1, 99).unwrap();
        assert_eq!(r, (x0 * x0 - x0).abs());
    }

    #[test]
    fn poles_are_redrawn_and_counted() {
        let f: &Function = &|x: &[f64]| x[0] * x[1];
        let o = rmse_with_redraws(&HalfPole, f, &[(-1.0, 1.0), (-1.0, 1.0)], 200, 5, Execution::Parallel).unwrap();
        assert_eq!(o.rmse, 0.0);
        assert!(o.redraws > 50, "{}", o.redraws);
        let again = rmse_with_redraws(&HalfPole, f, &[(-1.0, 1.0), (-1.0, 1.0)], 200, 5, Execution::Sequential).unwrap();
        assert_eq!(o, again);
        // a pole everywhere exhausts the retries
        let r = rmse(&HalfPole, f, &[(-1.0, -0.5), (-1.0, 1.0)], 3, 5);
        assert!(matches!(r, Err(Error::PoleEncountered(_))));
    }

    #[test]
    fn case_3_direct() {
        let c = case(3).unwrap();
        let r = run_case(&c, &MethodConfig::direct(1e-2, NullMethod::Svd), 500, 0, Execution::Parallel).unwrap();
        assert!(r.status.is_ok(), "{r:?}");
        assert!(r.rmse <= 1e-13, "{}", r.rmse);
        assert_eq!(r.dim, 16);
        assert_eq!(r.config, "tol_ord=1e-2;null_method=svd;tol_k=-1");
    }

    #[test]
    fn case_48_coarse_threshold() {
        let c = case(48).unwrap();
        let r = run_case(&c, &MethodConfig::direct(0.5, NullMethod::Svd), 500, 3, Execution::Parallel).unwrap();
        assert!(r.status.is_ok(), "{r:?}");
        assert!(r.rmse <= 1e-12, "{}", r.rmse);
    }

    #[test]
    fn unavailable_case_is_rejected() {
        let c = case(30).unwrap();
        let r = run_case(&c, &MethodConfig::direct(1e-2, NullMethod::Svd), 10, 0, Execution::Sequential);
        assert!(matches!(r, Err(Error::CaseUnavailable(30))));
        let s = sweep_configs(&c, &default_direct_grid(), 10, 0, Execution::Sequential);
        assert!(matches!(s, Err(Error::CaseUnavailable(30))));
    }

    #[test]
    fn sweeps_pick_the_minimum() {
        let c3 = case(3).unwrap();
        let s = sweep_configs(&c3, &default_direct_grid(), 500, 11, Execution::Parallel).unwrap();
        assert_eq!(s.all.len(), 36);
        assert!(s.best.rmse <= 1e-13);
        assert!(s.all.iter().filter(|r| r.status.is_ok()).all(|r| r.rmse >= s.best.rmse));

        let c25 = case(25).unwrap();
        let s = sweep_configs(&c25, &default_direct_grid(), 500, 11, Execution::Parallel).unwrap();
        assert!(s.best.rmse <= 1e-12, "{}", s.best.rmse);

        let one = [MethodConfig::direct(1e-3, NullMethod::Qr)];
        let s = sweep_configs(&c25, &one, 100, 2, Execution::Parallel).unwrap();
        assert_eq!(s.all.len(), 1);
        assert_eq!(s.best, s.all[0]);
    }

    #[test]
    fn deterministic_rmse() {
        let c = case(16).unwrap();
        let cfg = MethodConfig::direct(1e-10, NullMethod::Solve);
        let a = run_case(&c, &cfg, 300, 9, Execution::Parallel).unwrap();
        let b = run_case(&c, &cfg, 300, 9, Execution::Sequential).unwrap();
        assert_eq!(a.rmse.to_bits(), b.rmse.to_bits());
        assert_eq!(a.dim, b.dim);
    }

    #[test]
    fn adaptive_case_3() {
        let c = case(3).unwrap();
        let r = run_case(&c, &MethodConfig::adaptive(1e-15, NullMethod::Svd), 500, 0, Execution::Parallel).unwrap();
        assert_eq!(r.status, Status::Ok { redraws: 0, stop: None });
        assert!(r.rmse <= 1e-13, "{}", r.rmse);
        assert_eq!(r.config, "tol=1e-15;null_method=svd;max_iters=100");
    }

    #[test]
    fn ties_prefer_smaller_models_then_config() {
        let mk = |rmse, dim, config: &str| EvalReport {
            case_id: 1,
            klass: Klass::Rational,
            method: Method::Direct,
            config: config.into(),
            dim,
            cpu_s: 0.0,
            rmse,
            status: Status::Ok { redraws: 0, stop: None },
        };
        assert!(better(&mk(1e-3, 99, "z"), &mk(1e-2, 1, "a")));
        assert!(better(&mk(1e-3, 4, "z"), &mk(1e-3, 8, "a")));
        assert!(better(&mk(1e-3, 4, "a"), &mk(1e-3, 4, "b")));
    }

    fn random_report(g: &mut SplitMix64) -> EvalReport {
        let pick = |g: &mut SplitMix64, n: u64| (g.next_u64() % n) as usize;
        let klass = [Klass::Polynomial, Klass::Rational, Klass::Irrational][pick(g, 3)];
        let method = [Method::Direct, Method::Adaptive][pick(g, 2)];
        let status = match pick(g, 3) {
            0 => Status::Ok { redraws: pick(g, 4), stop: None },
            1 => Status::Ok { redraws: 0, stop: Some("max_iters".into()) },
            _ => Status::NotConverged("1-D solve failed, \"quoted\"\nsecond line".into()),
        };
        let rmse = if status.is_ok() { g.next_f64() * 10f64.powi(-(pick(g, 17) as i32)) } else { f64::INFINITY };
        EvalReport {
            case_id: 1 + pick(g, 50),
            klass,
            method,
            config: MethodConfig::direct(TOL_ORD_GRID[pick(g, 12)], NullMethod::ALL[pick(g, 3)]).snapshot(),
            dim: pick(g, 10_000),
            cpu_s: g.next_f64(),
            rmse,
            status,
        }
    }

    #[test]
    fn report_round_trip() {
        let mut g = SplitMix64::new(2024);
        let reports: Vec<EvalReport> = (0..50).map(|_| random_report(&mut g)).collect();
        let mut buf = Vec::new();
        write_report_to(&reports, &mut buf).unwrap();
        let back = parse_report(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, sorted(&reports));
    }

    #[test]
    fn report_line_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_report(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "case_id,klass,method,config,dim,cpu_s,rmse,status\n");
        let mut g = SplitMix64::new(1);
        let two = [random_report(&mut g), random_report(&mut g)];
        let two: Vec<EvalReport> =
            two.into_iter().map(|mut r| { r.status = Status::Ok { redraws: 0, stop: None }; r }).collect();
        write_report(&two, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        assert!(summary_path(&path).exists());
    }

    #[test]
    fn summary_min_and_median() {
        let mk = |klass, rmse: f64, ok: bool| EvalReport {
            case_id: 1,
            klass,
            method: Method::Direct,
            config: String::new(),
            dim: 1,
            cpu_s: 0.0,
            rmse,
            status: if ok { Status::Ok { redraws: 0, stop: None } } else { Status::NotConverged("x".into()) },
        };
        let rows = summarize(&[
            mk(Klass::Rational, 4.0, true),
            mk(Klass::Rational, 1.0, true),
            mk(Klass::Rational, 2.0, true),
            mk(Klass::Rational, 3.0, true),
            mk(Klass::Rational, f64::INFINITY, false),
            mk(Klass::Polynomial, 5.0, true),
        ]);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].klass, rows[0].min_rmse, rows[0].median_rmse), (Klass::Polynomial, 5.0, 5.0));
        assert_eq!((rows[1].reports, rows[1].ok, rows[1].min_rmse, rows[1].median_rmse), (5, 4, 1.0, 2.5));
    }

    #[test]
    fn model_file_scores_like_the_fit() {
        let c = case(11).unwrap();
        let f = c.formula().unwrap();
        let fit = fit_direct(&FnSampler::new(f, 2), &c.axes().unwrap(), &FitConfig::default()).unwrap();
        let back = BarycentricModel::from_json(&fit.model.to_json().unwrap()).unwrap();
        let a = rmse(&fit.model, f, &c.bounds, 100, 4).unwrap();
        let b = rmse(&back, f, &c.bounds, 100, 4).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
