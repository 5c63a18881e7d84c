//! Discretization axes, dense grid tensors and support-point partitions.
//!
//! Flat storage follows one ordering everywhere in the crate: the multi-index
//! `(j_1, …, j_ω)` maps to `((j_1·N_2 + j_2)·N_3 + …)·N_ω + j_ω`, i.e. the
//! last variable runs fastest.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Point, Result};
use crate::par::{self, Execution};

/// A multivariate real function `H(x_1, …, x_ω)`.
pub type Function = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    name: String,
    lower: f64,
    upper: f64,
    points: Vec<f64>,
}

impl GridAxis {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64, points: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidAxis(format!("{name}: non-finite bounds")));
        }
        if lower >= upper {
            return Err(Error::InvalidAxis(format!("{name}: lower bound {lower} >= upper bound {upper}")));
        }
        if points.is_empty() {
            return Err(Error::InvalidAxis(format!("{name}: no points")));
        }
        if points.iter().any(|p| !p.is_finite() || *p < lower || *p > upper) {
            return Err(Error::InvalidAxis(format!("{name}: point outside [{lower}, {upper}]")));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAxis(format!("{name}: points not strictly increasing")));
        }
        Ok(GridAxis { name, lower, upper, points })
    }

    /// Axis whose bounds are its first and last points.
    pub fn from_points(name: impl Into<String>, points: Vec<f64>) -> Result<Self> {
        let lower = points.first().copied().unwrap_or(f64::NAN);
        let upper = points.last().copied().unwrap_or(f64::NAN);
        Self::new(name, lower, upper, points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of `x` among the axis points (exact match).
    pub fn position(&self, x: f64) -> Option<usize> {
        self.points.binary_search_by(|p| p.total_cmp(&x)).ok()
    }

    /// Number of column points available under the alternating split.
    pub fn column_capacity(&self) -> usize {
        self.points.len() / 2
    }
}

/// `n` equispaced points from `lower` to `upper` inclusive.
pub fn linspace_axis(name: &str, lower: f64, upper: f64, n: usize) -> Result<GridAxis> {
    if !lower.is_finite() || !upper.is_finite() {
        return Err(Error::InvalidAxis(format!("{name}: non-finite bounds")));
    }
    if n < 2 {
        return Err(Error::InvalidAxis(format!("{name}: need at least 2 points, got {n}")));
    }
    let step = (upper - lower) / (n - 1) as f64;
    let mut points: Vec<f64> = (0..n).map(|i| lower + i as f64 * step).collect();
    points[n - 1] = upper;
    GridAxis::new(name, lower, upper, points)
}

/// Row-major strides of a shape (last index fastest).
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for l in (0..shape.len().saturating_sub(1)).rev() {
        s[l] = s[l + 1] * shape[l + 1];
    }
    s
}

pub fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&j, &n)| acc * n + j)
}

pub fn unflatten(shape: &[usize], mut flat: usize, idx: &mut [usize]) {
    for l in (0..shape.len()).rev() {
        idx[l] = flat % shape[l];
        flat /= shape[l];
    }
}

/// Advance a multi-index in flat order. Returns false after the last index.
pub fn next_index(shape: &[usize], idx: &mut [usize]) -> bool {
    for l in (0..shape.len()).rev() {
        idx[l] += 1;
        if idx[l] < shape[l] {
            return true;
        }
        idx[l] = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTensor {
    axes: Vec<GridAxis>,
    values: Vec<f64>,
}

impl GridTensor {
    pub fn new(axes: Vec<GridAxis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("tensor needs at least one axis".into()));
        }
        let expected: usize = axes.iter().map(GridAxis::len).product();
        if values.len() != expected {
            return Err(Error::InvalidInput(format!(
                "tensor has {} values but its axes span {expected} nodes",
                values.len()
            )));
        }
        Ok(GridTensor { axes, values })
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn omega(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(GridAxis::len).collect()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[flat_index(&self.shape(), idx)]
    }

    /// Coordinates of the node with flat index `flat`.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        unflatten(&shape, flat, &mut idx);
        idx.iter().zip(&self.axes).map(|(&j, a)| a.points[j]).collect()
    }

    /// Value at the grid node with coordinates `x`.
    pub fn lookup(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.axes.len() {
            return Err(Error::Lookup(Point(x.to_vec())));
        }
        let mut flat = 0;
        for (a, &xi) in self.axes.iter().zip(x) {
            let j = a.position(xi).ok_or_else(|| Error::Lookup(Point(x.to_vec())))?;
            flat = flat * a.len() + j;
        }
        Ok(self.values[flat])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TensorFile = serde_json::from_str(text)?;
        let axes = file
            .axes
            .into_iter()
            .map(|a| GridAxis::from_points(a.name, a.points))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes, file.values)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TensorFile {
            axes: self
                .axes
                .iter()
                .map(|a| AxisFile { name: a.name.clone(), points: a.points.clone() })
                .collect(),
            values: self.values.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }
}

#[derive(Serialize, Deserialize)]
struct AxisFile {
    name: String,
    points: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TensorFile {
    axes: Vec<AxisFile>,
    values: Vec<f64>,
}

/// Evaluate `f` on every node of the Cartesian grid spanned by `axes`.
pub fn sample_grid(f: &Function, axes: &[GridAxis], exec: Execution) -> Result<GridTensor> {
    let shape: Vec<usize> = axes.iter().map(GridAxis::len).collect();
    let total: usize = shape.iter().product();
    let last = *shape.last().unwrap_or(&1);
    // one task per fibre along the last variable
    let fibres = par::try_map_range(exec, total / last.max(1), |row| {
        let mut idx = vec![0; shape.len()];
        unflatten(&shape, row * last, &mut idx);
        let mut x: Vec<f64> = idx.iter().zip(axes).map(|(&j, a)| a.points[j]).collect();
        let mut out = Vec::with_capacity(last);
        for j in 0..last {
            x[shape.len() - 1] = axes[shape.len() - 1].points[j];
            let y = f(&x);
            if !y.is_finite() {
                return Err(Error::Sampling(Point(x)));
            }
            out.push(y);
        }
        Ok(out)
    })?;
    GridTensor::new(axes.to_vec(), fibres.concat())
}

/// Source of function values at points of the grid: a tensor or a direct oracle.
pub trait Sampler: Sync {
    fn omega(&self) -> usize;
    fn sample(&self, x: &[f64]) -> Result<f64>;
}

impl Sampler for GridTensor {
    fn omega(&self) -> usize {
        self.axes.len()
    }

    fn sample(&self, x: &[f64]) -> Result<f64> {
        self.lookup(x)
    }
}

/// Direct evaluation of a function; rejects non-finite outputs.
pub struct FnSampler<'a> {
    f: &'a (dyn Fn(&[f64]) -> f64 + Send + Sync + 'a),
    omega: usize,
}

impl<'a> FnSampler<'a> {
    pub fn new(f: &'a (dyn Fn(&[f64]) -> f64 + Send + Sync + 'a), omega: usize) -> Self {
        FnSampler { f, omega }
    }
}

impl Sampler for FnSampler<'_> {
    fn omega(&self) -> usize {
        self.omega
    }

    fn sample(&self, x: &[f64]) -> Result<f64> {
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Sampling(Point(x.to_vec())))
        }
    }
}

/// How column/row points are drawn from the alternating pools.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SupportRule {
    /// `m` pool entries at indices `⌊i·(n−1)/(m−1)⌋`: evenly spread, both pool ends included.
    #[default]
    Spread,
    /// The first `m−1` pool entries followed by the pool's last entry.
    FirstAndLast,
}

impl SupportRule {
    fn pick(&self, pool: &[f64], m: usize) -> Vec<f64> {
        let n = pool.len();
        if m == 1 {
            return vec![pool[n - 1]];
        }
        match self {
            SupportRule::Spread => (0..m).map(|i| pool[i * (n - 1) / (m - 1)]).collect(),
            SupportRule::FirstAndLast => {
                let mut out = pool[..m - 1].to_vec();
                out.push(pool[n - 1]);
                out
            }
        }
    }
}

/// Split an axis into `k` column points and `q` row points.
///
/// Odd-index grid points form the column pool and even-index points the row
/// pool, so the two sets are disjoint by construction.
pub fn split_support(axis: &GridAxis, k: usize, q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    split_support_with(axis, k, q, &SupportRule::default())
}

pub fn split_support_with(
    axis: &GridAxis,
    k: usize,
    q: usize,
    rule: &SupportRule,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 || q == 0 {
        return Err(Error::Partition(format!("{}: k and q must be positive", axis.name)));
    }
    let cols: Vec<f64> = axis.points.iter().skip(1).step_by(2).copied().collect();
    let rows: Vec<f64> = axis.points.iter().step_by(2).copied().collect();
    if k > cols.len() || q > rows.len() {
        return Err(Error::Partition(format!(
            "{}: requested k={k}, q={q} but pools hold {} columns and {} rows",
            axis.name,
            cols.len(),
            rows.len()
        )));
    }
    Ok((rule.pick(&cols, k), rule.pick(&rows, q)))
}

/// Row points for given column points: `q` spread picks among the axis points
/// not used as columns.
pub fn complement_rows(axis: &GridAxis, lambda: &[f64], q: usize) -> Result<Vec<f64>> {
    let free: Vec<f64> = axis.points.iter().copied().filter(|p| !lambda.contains(p)).collect();
    if q == 0 || q > free.len() {
        return Err(Error::Partition(format!(
            "{}: {q} row points requested, {} free",
            axis.name,
            free.len()
        )));
    }
    Ok(SupportRule::Spread.pick(&free, q))
}

/// Column and row support points with the sampled values on their combinations.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPartition {
    pub lambda: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
    /// Values on λ-combinations, shape `k_1×…×k_ω`.
    pub w: Vec<f64>,
    /// Values on μ-combinations, shape `q_1×…×q_ω`.
    pub v: Vec<f64>,
}

impl SupportPartition {
    pub fn k(&self) -> Vec<usize> {
        self.lambda.iter().map(Vec::len).collect()
    }

    pub fn q(&self) -> Vec<usize> {
        self.mu.iter().map(Vec::len).collect()
    }
}

/// Check that every λ_l and μ_l are non-empty and pairwise disjoint.
pub fn check_disjoint(lambda: &[Vec<f64>], mu: &[Vec<f64>]) -> Result<()> {
    if lambda.len() != mu.len() {
        return Err(Error::InvalidInput("λ and μ cover different numbers of variables".into()));
    }
    for (l, (lam, m)) in lambda.iter().zip(mu).enumerate() {
        if lam.is_empty() || m.is_empty() {
            return Err(Error::DegenerateSupport(format!("variable {}: empty support set", l + 1)));
        }
        if let Some(p) = lam.iter().find(|p| m.contains(p)) {
            return Err(Error::DegenerateSupport(format!(
                "variable {}: {p} is both a column and a row point",
                l + 1
            )));
        }
    }
    Ok(())
}

/// Values of `sampler` on every combination of the given per-variable points.
pub fn gather_tensor(sampler: &dyn Sampler, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let shape: Vec<usize> = points.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    let mut idx = vec![0; shape.len()];
    let mut x: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        for (l, &j) in idx.iter().enumerate() {
            x[l] = points[l][j];
        }
        out.push(sampler.sample(&x)?);
        next_index(&shape, &mut idx);
    }
    Ok(out)
}

/// Sample `w` on λ-combinations and `v` on μ-combinations.
pub fn gather_values(
    sampler: &dyn Sampler,
    lambda: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
) -> Result<SupportPartition> {
    if lambda.len() != sampler.omega() {
        return Err(Error::InvalidInput(format!(
            "{} support sets for a {}-variable source",
            lambda.len(),
            sampler.omega()
        )));
    }
    check_disjoint(&lambda, &mu)?;
    let w = gather_tensor(sampler, &lambda)?;
    let v = gather_tensor(sampler, &mu)?;
    Ok(SupportPartition { lambda, mu, w, v })
}
