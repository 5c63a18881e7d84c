//! Direct fit: detect per-variable orders, split support points, and build the
//! ω-D barycentric weights from univariate null vectors only.
//!
//! Variable `l` contributes one factor vector per combination of the column
//! points of the variables before it. The slice for prefix `(j_1, …, j_{l−1})`
//! freezes those variables at their column points and every later variable at
//! its last column point. Normalizing each 1-D null vector to last entry one
//! makes the product of factors along a multi-index the ω-D null vector.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complexity::ComplexityReport;
use crate::error::{Error, Point, Result};
use crate::loewner::{
    build_loewner_1d, estimate_order, normalize_null, null_vector, polynomial_weights,
    prune_weights, NullMethod,
};
use crate::par::{self, Execution};
use crate::rng::SplitMix64;
use crate::tensor::{
    flat_index, gather_tensor, next_index, split_support_with, unflatten, GridAxis, Sampler,
    SupportRule,
};

/// Rational model in barycentric form over a tensor-product support grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricModel {
    lambda: Vec<Vec<f64>>,
    weights: Vec<f64>,
    values: Vec<f64>,
    factors: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    lambda: Vec<Vec<f64>>,
    weights: Vec<f64>,
    values: Vec<f64>,
    factors: Option<Vec<Vec<f64>>>,
}

impl BarycentricModel {
    pub fn new(
        lambda: Vec<Vec<f64>>,
        weights: Vec<f64>,
        values: Vec<f64>,
        factors: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if lambda.is_empty() || lambda.iter().any(Vec::is_empty) {
            return Err(Error::InvalidInput("model needs at least one point per variable".into()));
        }
        for (l, lam) in lambda.iter().enumerate() {
            if lam.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("variable {}: non-finite support point", l + 1)));
            }
            for (i, a) in lam.iter().enumerate() {
                if lam[..i].contains(a) {
                    return Err(Error::DegenerateSupport(format!(
                        "variable {}: repeated support point {a}",
                        l + 1
                    )));
                }
            }
        }
        let k: Vec<usize> = lambda.iter().map(Vec::len).collect();
        let total: usize = k.iter().product();
        if weights.len() != total || values.len() != total {
            return Err(Error::InvalidInput(format!(
                "support grid has {total} combinations, got {} weights and {} values",
                weights.len(),
                values.len()
            )));
        }
        if weights.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite weight or value".into()));
        }
        if weights.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidInput("weights are identically zero".into()));
        }
        if let Some(f) = &factors {
            let ok = f.len() == k.len()
                && f.iter().enumerate().all(|(l, fl)| fl.len() == k[..=l].iter().product::<usize>());
            if !ok {
                return Err(Error::InvalidInput("factor shapes do not match the support".into()));
            }
        }
        Ok(BarycentricModel { lambda, weights, values, factors })
    }

    pub fn lambda(&self) -> &[Vec<f64>] {
        &self.lambda
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn factors(&self) -> Option<&[Vec<f64>]> {
        self.factors.as_deref()
    }

    pub fn omega(&self) -> usize {
        self.lambda.len()
    }

    /// Support sizes `k_1, …, k_ω`.
    pub fn k(&self) -> Vec<usize> {
        self.lambda.iter().map(Vec::len).collect()
    }

    /// Model size `(ω + 2)·K`: one weight, one value and ω support coordinates
    /// per term of the barycentric sum.
    pub fn scalar_count(&self) -> usize {
        (self.omega() + 2) * self.weights.len()
    }

    /// Same model with weights multiplied by `alpha` (factors are dropped).
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        let w = self.weights.iter().map(|c| c * alpha).collect();
        Self::new(self.lambda.clone(), w, self.values.clone(), None)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            lambda: self.lambda.clone(),
            weights: self.weights.clone(),
            values: self.values.clone(),
            factors: self.factors.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        Self::new(f.lambda, f.weights, f.values, f.factors)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `c[j] = Π_l factor_l[(j_1, …, j_l)]`, the product taken in variable order.
pub fn compose_factors(k: &[usize], factors: &[Vec<f64>]) -> Vec<f64> {
    let total: usize = k.iter().product();
    // trailing[l] = Π_{j>l} k_j: dividing a flat index by it leaves the prefix up to l
    let mut trailing = vec![1usize; k.len()];
    for l in (0..k.len().saturating_sub(1)).rev() {
        trailing[l] = trailing[l + 1] * k[l + 1];
    }
    (0..total)
        .map(|j| {
            let mut c = factors[0][j / trailing[0]];
            for l in 1..k.len() {
                c *= factors[l][j / trailing[l]];
            }
            c
        })
        .collect()
}

/// Counters gathered during a recursive null-space computation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Number of univariate null-space solves.
    pub solves: u64,
    /// `k³` per square `k×k` solve, `q·k²` per tall `q×k` solve.
    pub flops: u128,
    /// Entries of the largest Loewner matrix held at once.
    pub max_entries: usize,
    /// Solves where the requested method fell back to SVD.
    pub fallbacks: u64,
    /// Slices whose Loewner matrix vanished, filled with polynomial weights.
    pub polynomial_slices: u64,
}

/// Weights, the factors they were composed from, and solver counters.
#[derive(Debug, Clone)]
pub struct NullSpace {
    pub weights: Vec<f64>,
    pub factors: Vec<Vec<f64>>,
    pub stats: SolveStats,
}

struct SliceResult {
    c: Vec<f64>,
    fallback: bool,
    polynomial: bool,
}

fn solve_slice(
    sampler: &dyn Sampler,
    x: &mut [f64],
    l: usize,
    lambda: &[f64],
    mu: &[f64],
    method: NullMethod,
) -> Result<SliceResult> {
    let mut sample_at = |p: f64| {
        x[l] = p;
        sampler.sample(x)
    };
    let w = lambda.iter().map(|&p| sample_at(p)).collect::<Result<Vec<f64>>>()?;
    let v = mu.iter().map(|&p| sample_at(p)).collect::<Result<Vec<f64>>>()?;
    if lambda.len() == 1 {
        return Ok(SliceResult { c: vec![1.0], fallback: false, polynomial: false });
    }
    let scale = w.iter().chain(&v).fold(0.0f64, |m, y| m.max(y.abs()));
    if scale == 0.0 {
        let frozen = x.iter().enumerate().filter(|&(i, _)| i != l).map(|(_, &y)| y).collect();
        return Err(Error::DegenerateSlice(Point(frozen)));
    }
    let loewner = build_loewner_1d(lambda, mu, &w, &v)?;
    let m = loewner.entries();
    let gap = mu
        .iter()
        .flat_map(|a| lambda.iter().map(move |b| (a - b).abs()))
        .fold(f64::INFINITY, f64::min);
    let big = m.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    if big * gap <= 64.0 * f64::EPSILON * scale {
        // constant slice: every weight vector annihilates the matrix
        let mut c = polynomial_weights(lambda);
        normalize_null(&mut c);
        return Ok(SliceResult { c, fallback: false, polynomial: true });
    }
    let sol = null_vector(m, method)?;
    Ok(SliceResult { c: sol.vector, fallback: sol.fallback, polynomial: false })
}

/// ω-D barycentric weights from univariate Loewner null vectors.
///
/// Only `q_l×k_l` matrices are ever formed; the ω-D Loewner matrix is not.
pub fn recursive_nullspace(
    sampler: &dyn Sampler,
    lambda: &[Vec<f64>],
    mu: &[Vec<f64>],
    method: NullMethod,
    exec: Execution,
) -> Result<NullSpace> {
    let omega = lambda.len();
    if omega == 0 || omega != sampler.omega() {
        return Err(Error::InvalidInput(format!(
            "{omega} support sets for a {}-variable source",
            sampler.omega()
        )));
    }
    crate::tensor::check_disjoint(lambda, mu)?;
    let k: Vec<usize> = lambda.iter().map(Vec::len).collect();
    let mut stats = SolveStats::default();
    let mut factors = Vec::with_capacity(omega);
    for l in 0..omega {
        let prefix_shape = &k[..l];
        let prefixes: usize = prefix_shape.iter().product();
        let slices = par::try_map_range(exec, prefixes, |p| {
            let mut idx = vec![0; l];
            unflatten(prefix_shape, p, &mut idx);
            let mut x: Vec<f64> = lambda.iter().map(|s| s[s.len() - 1]).collect();
            for (j, &i) in idx.iter().enumerate() {
                x[j] = lambda[j][i];
            }
            solve_slice(sampler, &mut x, l, &lambda[l], &mu[l], method)
        })?;
        let (kl, ql) = (k[l] as u128, mu[l].len() as u128);
        stats.solves += prefixes as u64;
        stats.flops += prefixes as u128 * if ql > kl { ql * kl * kl } else { kl * kl * kl };
        stats.max_entries = stats.max_entries.max(k[l] * mu[l].len());
        let mut fl = Vec::with_capacity(prefixes * k[l]);
        for s in slices {
            stats.fallbacks += s.fallback as u64;
            stats.polynomial_slices += s.polynomial as u64;
            fl.extend(s.c);
        }
        factors.push(fl);
    }
    let weights = compose_factors(&k, &factors);
    Ok(NullSpace { weights, factors, stats })
}

/// Options of a direct fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Normalized singular value threshold for order detection; 0 turns detection off.
    pub tol_ord: f64,
    pub null_method: NullMethod,
    /// Relative pruning threshold for weights; negative keeps every weight.
    pub tol_k: f64,
    /// Cap on every `k_l`.
    pub max_k: usize,
    /// Explicit `k_l`, skipping order detection. Required when `tol_ord` is 0.
    pub orders: Option<Vec<usize>>,
    pub support: SupportRule,
    /// Order detection takes the largest order seen over this many 1-D slices.
    pub order_slices: usize,
    /// Seed for the extra detection slices.
    pub seed: u64,
    /// Recursion order of the variables; identity when absent.
    pub permutation: Option<Vec<usize>>,
    pub exec: Execution,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tol_ord: 1e-6,
            null_method: NullMethod::Svd,
            tol_k: -1.0,
            max_k: usize::MAX,
            orders: None,
            support: SupportRule::Spread,
            order_slices: 1,
            seed: 0,
            permutation: None,
            exec: Execution::Parallel,
        }
    }
}

impl FitConfig {
    pub fn validate(&self, omega: usize) -> Result<()> {
        let t = self.tol_ord;
        if !(t == 0.0 || (t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidInput(format!("tol_ord must be 0 or in (0, 1], got {t}")));
        }
        if t == 0.0 && self.orders.is_none() {
            return Err(Error::InvalidInput("tol_ord = 0 needs explicit orders".into()));
        }
        if self.max_k == 0 {
            return Err(Error::InvalidInput("max_k must be at least 1".into()));
        }
        if self.order_slices == 0 {
            return Err(Error::InvalidInput("order_slices must be at least 1".into()));
        }
        if !self.tol_k.is_finite() {
            return Err(Error::InvalidInput("tol_k must be finite".into()));
        }
        if let Some(k) = &self.orders {
            if k.len() != omega || k.contains(&0) {
                return Err(Error::InvalidInput(format!(
                    "need {omega} positive orders, got {k:?}"
                )));
            }
        }
        if let Some(p) = &self.permutation {
            let mut seen = vec![false; omega];
            if p.len() != omega || p.iter().any(|&i| i >= omega || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::InvalidInput(format!("{p:?} is not a permutation of 0..{omega}")));
            }
        }
        Ok(())
    }
}

/// Result of [`fit_direct`].
#[derive(Debug, Clone)]
pub struct DirectFit {
    pub model: BarycentricModel,
    /// Cost accounting for the support sizes in recursion order.
    pub report: ComplexityReport,
    /// Detected orders `d_l` (absent when orders were given explicitly).
    pub detected: Option<Vec<usize>>,
    pub stats: SolveStats,
}

/// Order `d_l` of every variable from 1-D slices through the grid.
pub fn detect_orders(
    sampler: &dyn Sampler,
    axes: &[GridAxis],
    tol_ord: f64,
    slices: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<usize>> {
    let omega = axes.len();
    // slice 0 freezes everything at the first column-pool point; the rest are random nodes
    let mut rng = SplitMix64::new(seed);
    let anchors: Vec<Vec<usize>> = (0..slices)
        .map(|s| {
            axes.iter()
                .map(|a| if s == 0 { 1 } else { (rng.next_u64() % a.len() as u64) as usize })
                .collect()
        })
        .collect();
    par::try_map_range(exec, omega, |l| {
        let mut best = 0;
        for anchor in &anchors {
            let mut x: Vec<f64> = axes.iter().zip(anchor).map(|(a, &i)| a.points()[i]).collect();
            let pts = axes[l].points();
            let samples = pts
                .iter()
                .map(|&p| {
                    x[l] = p;
                    sampler.sample(&x)
                })
                .collect::<Result<Vec<f64>>>()?;
            best = best.max(estimate_order(&samples, pts, tol_ord)?);
        }
        Ok(best)
    })
}

/// Sampler seen through a variable permutation: coordinate `i` is variable `perm[i]`.
struct Permuted<'a> {
    inner: &'a dyn Sampler,
    perm: &'a [usize],
}

impl Sampler for Permuted<'_> {
    fn omega(&self) -> usize {
        self.inner.omega()
    }

    fn sample(&self, y: &[f64]) -> Result<f64> {
        let mut x = vec![0.0; y.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        self.inner.sample(&x)
    }
}

/// Reorder a tensor stored in permuted variable order back to natural order.
fn unpermute(data: &[f64], k: &[usize], perm: &[usize]) -> Vec<f64> {
    let kp: Vec<usize> = perm.iter().map(|&p| k[p]).collect();
    let mut idx = vec![0; k.len()];
    let mut idx_p = vec![0; k.len()];
    let mut out = Vec::with_capacity(data.len());
    for _ in 0..data.len() {
        for (i, &p) in perm.iter().enumerate() {
            idx_p[i] = idx[p];
        }
        out.push(data[flat_index(&kp, &idx_p)]);
        next_index(k, &mut idx);
    }
    out
}

/// Direct fit of a barycentric model to `sampler` on the grid spanned by `axes`.
pub fn fit_direct(sampler: &dyn Sampler, axes: &[GridAxis], config: &FitConfig) -> Result<DirectFit> {
    let omega = axes.len();
    if omega == 0 || omega != sampler.omega() {
        return Err(Error::InvalidInput(format!(
            "{omega} axes for a {}-variable source",
            sampler.omega()
        )));
    }
    if let Some(a) = axes.iter().find(|a| a.len() < 2) {
        return Err(Error::InvalidAxis(format!("{}: need at least 2 points", a.name())));
    }
    config.validate(omega)?;

    let (k, detected) = match &config.orders {
        Some(k) => (k.clone(), None),
        None => {
            let d = detect_orders(sampler, axes, config.tol_ord, config.order_slices, config.seed, config.exec)?;
            let k = d
                .iter()
                .zip(axes)
                .map(|(&d, a)| (d + 1).min(config.max_k).min(a.column_capacity()))
                .collect();
            (k, Some(d))
        }
    };
    let k: Vec<usize> = k.iter().map(|&x| x.min(config.max_k)).collect();

    let identity: Vec<usize> = (0..omega).collect();
    let perm = config.permutation.as_deref().unwrap_or(&identity);
    let mut lambda = Vec::with_capacity(omega);
    let mut mu = Vec::with_capacity(omega);
    for &p in perm {
        let (l, m) = split_support_with(&axes[p], k[p], k[p], &config.support)?;
        lambda.push(l);
        mu.push(m);
    }
    let view = Permuted { inner: sampler, perm };
    let ns = recursive_nullspace(&view, &lambda, &mu, config.null_method, config.exec)?;
    let values = gather_tensor(&view, &lambda)?;
    let kp: Vec<usize> = lambda.iter().map(Vec::len).collect();
    let report = ComplexityReport::new(&kp)?;

    let weights = prune_weights(&ns.weights, config.tol_k);
    if weights.iter().all(|&c| c == 0.0) {
        return Err(Error::OverPrunedModel(config.tol_k));
    }
    let pruned = weights != ns.weights;
    let is_identity = perm == identity.as_slice();
    let model = if is_identity {
        let factors = if pruned { None } else { Some(ns.factors) };
        BarycentricModel::new(lambda, weights, values, factors)?
    } else {
        let mut nat_lambda = vec![Vec::new(); omega];
        for (i, &p) in perm.iter().enumerate() {
            nat_lambda[p] = lambda[i].clone();
        }
        BarycentricModel::new(
            nat_lambda,
            unpermute(&weights, &k, perm),
            unpermute(&values, &k, perm),
            None,
        )?
    };
    Ok(DirectFit { model, report, detected, stats: ns.stats })
}
