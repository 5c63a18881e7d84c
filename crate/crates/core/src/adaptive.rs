//! Greedy adaptive fit on a sampled grid tensor.
//!
//! Start from one column point per variable, fit, sweep the residual over the
//! grid, and add the coordinates of the worst node to the column sets. Row
//! points are always every remaining axis point, so the 1-D solves are tall
//! least-squares problems.

use std::io::Write;

use crate::direct::{recursive_nullspace, BarycentricModel};
use crate::error::{Error, Result};
use crate::loewner::NullMethod;
use crate::models::eval_barycentric;
use crate::par::{self, Execution};
use crate::tensor::{gather_tensor, split_support, unflatten, GridTensor};

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveConfig {
    /// Stop once the largest residual relative to `max|H|` is at most this.
    pub tol: f64,
    pub null_method: NullMethod,
    pub max_iters: usize,
    /// Starting column counts; one per variable when absent.
    pub seed_k: Option<Vec<usize>>,
    pub exec: Execution,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            tol: 1e-15,
            null_method: NullMethod::Svd,
            max_iters: 100,
            seed_k: None,
            exec: Execution::Parallel,
        }
    }
}

/// Why the greedy loop stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptiveStatus {
    Converged,
    MaxIters,
    /// The worst node offered no coordinate that could still be added.
    Exhausted,
    /// A fit inside the loop failed; the previous model is returned.
    Failed(String),
}

impl AdaptiveStatus {
    pub fn is_converged(&self) -> bool {
        *self == AdaptiveStatus::Converged
    }
}

impl std::fmt::Display for AdaptiveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdaptiveStatus::Converged => f.write_str("converged"),
            AdaptiveStatus::MaxIters => f.write_str("max_iters"),
            AdaptiveStatus::Exhausted => f.write_str("exhausted"),
            AdaptiveStatus::Failed(e) => write!(f, "failed: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// 1-based variables whose column set grew after this iteration.
    pub added: Vec<usize>,
    /// Grid node of the largest residual.
    pub point: Vec<f64>,
    pub max_residual: f64,
    /// Column counts of the model measured in this iteration.
    pub k: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdaptiveTrace {
    pub records: Vec<TraceRecord>,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl AdaptiveTrace {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "variable_added_csv", "point", "max_residual", "k_vector"])?;
        for r in &self.records {
            w.write_record([
                r.iter.to_string(),
                join(&r.added),
                join(&r.point),
                r.max_residual.to_string(),
                join(&r.k),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveFit {
    /// Model with the smallest residual seen, not necessarily the last one.
    pub model: BarycentricModel,
    /// Iteration that produced `model`.
    pub best_iter: usize,
    pub trace: AdaptiveTrace,
    pub status: AdaptiveStatus,
}

/// Residual reported for a node where the model has a pole.
const POLE_RESIDUAL: f64 = f64::MAX;

/// Largest weighted residual over nodes that are not full support combinations;
/// ties go to the smallest flat index.
fn worst_node(t: &GridTensor, m: &BarycentricModel, lambda_idx: &[Vec<bool>], scale: f64, exec: Execution) -> (f64, usize) {
    let shape = t.shape();
    let total = t.values().len();
    let chunk = 4096;
    let parts = par::map_range(exec, total.div_ceil(chunk), |c| {
        let mut idx = vec![0; shape.len()];
        let mut best = (-1.0f64, usize::MAX);
        for flat in c * chunk..((c + 1) * chunk).min(total) {
            unflatten(&shape, flat, &mut idx);
            if idx.iter().zip(lambda_idx).all(|(&i, s)| s[i]) {
                continue;
            }
            let x: Vec<f64> = idx.iter().zip(t.axes()).map(|(&i, a)| a.points()[i]).collect();
            let r = match eval_barycentric(m, &x) {
                Ok(g) if g.is_finite() => ((g - t.values()[flat]).abs() / scale).min(POLE_RESIDUAL),
                _ => POLE_RESIDUAL,
            };
            if r > best.0 {
                best = (r, flat);
            }
        }
        best
    });
    parts.into_iter().fold((-1.0, usize::MAX), |a, b| if b.0 > a.0 { b } else { a })
}

/// Greedy fit of `t` until the weighted residual is below `config.tol`.
pub fn fit_adaptive(t: &GridTensor, config: &AdaptiveConfig) -> Result<AdaptiveFit> {
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tol must be positive, got {}", config.tol)));
    }
    if config.max_iters == 0 {
        return Err(Error::InvalidInput("max_iters must be at least 1".into()));
    }
    let axes = t.axes();
    if let Some(a) = axes.iter().find(|a| a.len() < 2) {
        return Err(Error::InvalidAxis(format!("{}: need at least 2 points", a.name())));
    }
    if t.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("tensor has non-finite entries".into()));
    }
    let omega = axes.len();
    let seed = config.seed_k.clone().unwrap_or_else(|| vec![1; omega]);
    if seed.len() != omega {
        return Err(Error::InvalidInput(format!("{} seed sizes for {omega} variables", seed.len())));
    }
    let mut lambda = Vec::with_capacity(omega);
    for (a, &k) in axes.iter().zip(&seed) {
        lambda.push(split_support(a, k, 1)?.0);
    }
    let scale = match t.max_abs() {
        s if s > 0.0 => s,
        _ => 1.0,
    };

    let mut trace = AdaptiveTrace::default();
    let mut best: Option<(f64, usize, BarycentricModel)> = None;
    let mut status = AdaptiveStatus::MaxIters;
    for iter in 1..=config.max_iters {
        let mu: Vec<Vec<f64>> = axes
            .iter()
            .zip(&lambda)
            .map(|(a, lam)| a.points().iter().copied().filter(|p| !lam.contains(p)).collect())
            .collect();
        let fitted = recursive_nullspace(t, &lambda, &mu, config.null_method, config.exec).and_then(|ns| {
            let values = gather_tensor(t, &lambda)?;
            BarycentricModel::new(lambda.clone(), ns.weights, values, Some(ns.factors))
        });
        let model = match fitted {
            Ok(m) => m,
            Err(e) => {
                status = AdaptiveStatus::Failed(e.to_string());
                break;
            }
        };
        let in_lambda: Vec<Vec<bool>> = axes
            .iter()
            .zip(&lambda)
            .map(|(a, lam)| a.points().iter().map(|p| lam.contains(p)).collect())
            .collect();
        let (r, flat) = worst_node(t, &model, &in_lambda, scale, config.exec);
        let k: Vec<usize> = lambda.iter().map(Vec::len).collect();
        let r = r.max(0.0);
        if best.as_ref().is_none_or(|b| r < b.0) {
            best = Some((r, iter, model));
        }
        if flat == usize::MAX {
            // every node is a support combination
            trace.records.push(TraceRecord { iter, added: vec![], point: vec![], max_residual: 0.0, k });
            status = AdaptiveStatus::Converged;
            break;
        }
        let point = t.node(flat);
        let mut record = TraceRecord { iter, added: vec![], point: point.clone(), max_residual: r, k };
        if r <= config.tol {
            trace.records.push(record);
            status = AdaptiveStatus::Converged;
            break;
        }
        for (l, &p) in point.iter().enumerate() {
            if !lambda[l].contains(&p) && lambda[l].len() < axes[l].len() - 1 {
                lambda[l].push(p);
                record.added.push(l + 1);
            }
        }
        let grew = !record.added.is_empty();
        trace.records.push(record);
        if !grew {
            status = AdaptiveStatus::Exhausted;
            break;
        }
    }
    let (_, best_iter, model) = best.ok_or_else(|| match &status {
        AdaptiveStatus::Failed(e) => Error::InvalidInput(format!("seed fit failed: {e}")),
        _ => Error::InvalidInput("no model fitted".into()),
    })?;
    Ok(AdaptiveFit { model, best_iter, trace, status })
}
