//! Evaluation of barycentric models and their monomial and KST-style forms,
//! plus a layered network description of numerator or denominator.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::direct::BarycentricModel;
use crate::error::{Error, Point, Result};

/// Anything that can be evaluated pointwise.
pub trait Surrogate: Sync {
    fn omega(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<f64>;
}

fn check_point(omega: usize, x: &[f64]) -> Result<()> {
    if x.len() != omega {
        return Err(Error::InvalidInput(format!("{omega}-variable model evaluated at {} coordinates", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite evaluation point {}", Point(x.to_vec()))));
    }
    Ok(())
}

/// Index of the support point `x` coincides with, relative tolerance 1e-14.
fn hit(lambda: &[f64], x: f64) -> Option<usize> {
    lambda.iter().position(|&l| (x - l).abs() <= 1e-14 * x.abs().max(l.abs()))
}

/// Cauchy vector `1/(x − λ_j)`, or the indicator of the coinciding point.
fn basis(lambda: &[f64], x: f64) -> (Vec<f64>, Option<usize>) {
    match hit(lambda, x) {
        Some(j) => {
            let mut e = vec![0.0; lambda.len()];
            e[j] = 1.0;
            (e, Some(j))
        }
        None => (lambda.iter().map(|&l| 1.0 / (x - l)).collect(), None),
    }
}

/// Contract a tensor of shape `k` with one vector per mode, last mode first.
fn contract(data: &[f64], k: &[usize], vecs: &[Vec<f64>]) -> f64 {
    let mut cur = data.to_vec();
    for l in (0..k.len()).rev() {
        let b = &vecs[l];
        cur = cur.chunks_exact(k[l]).map(|f| f.iter().zip(b).map(|(a, b)| a * b).sum()).collect();
    }
    cur[0]
}

fn ratio(num: f64, den: f64, x: &[f64]) -> Result<f64> {
    if den == 0.0 || !den.is_finite() || !num.is_finite() {
        return Err(Error::PoleEncountered(Point(x.to_vec())));
    }
    Ok(num / den)
}

/// Barycentric evaluation `Σ c·w·Π 1/(x_l−λ_l) / Σ c·Π 1/(x_l−λ_l)`.
///
/// Coordinates that coincide with a support point restrict both sums to that
/// point, which is the limit of the quotient.
pub fn eval_barycentric(m: &BarycentricModel, x: &[f64]) -> Result<f64> {
    check_point(m.omega(), x)?;
    let k = m.k();
    let mut vecs = Vec::with_capacity(k.len());
    let mut hits = Vec::with_capacity(k.len());
    for (lam, &xl) in m.lambda().iter().zip(x) {
        let (b, h) = basis(lam, xl);
        vecs.push(b);
        hits.push(h);
    }
    if hits.iter().all(Option::is_some) {
        let idx: Vec<usize> = hits.iter().map(|h| h.unwrap()).collect();
        return Ok(m.values()[crate::tensor::flat_index(&k, &idx)]);
    }
    let cw: Vec<f64> = m.weights().iter().zip(m.values()).map(|(c, w)| c * w).collect();
    ratio(contract(&cw, &k, &vecs), contract(m.weights(), &k, &vecs), x)
}

impl Surrogate for BarycentricModel {
    fn omega(&self) -> usize {
        BarycentricModel::omega(self)
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        eval_barycentric(self, x)
    }
}

/// Lagrange-to-monomial change of basis on `lambda`.
///
/// Column `j` holds the coefficients of `Π_{i≠j}(x − λ_i)`, highest degree in
/// row 0 and the constant term in the last row.
pub fn vandermonde_matrix(lambda: &[f64]) -> Result<DMatrix<f64>> {
    let k = lambda.len();
    if k == 0 {
        return Err(Error::InvalidInput("no support points".into()));
    }
    for (i, a) in lambda.iter().enumerate() {
        if lambda[..i].contains(a) {
            return Err(Error::DegenerateSupport(format!("repeated support point {a}")));
        }
    }
    let mut v = DMatrix::zeros(k, k);
    for j in 0..k {
        // coefficients highest first, built by multiplying in one root at a time
        let mut p = vec![1.0];
        for (i, &li) in lambda.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut q = vec![0.0; p.len() + 1];
            for (d, &a) in p.iter().enumerate() {
                q[d] += a;
                q[d + 1] -= a * li;
            }
            p = q;
        }
        for (r, a) in p.into_iter().enumerate() {
            v[(r, j)] = a;
        }
    }
    Ok(v)
}

/// Apply `mat` along mode `l` of a tensor of shape `k`.
fn mode_product(data: &[f64], k: &[usize], l: usize, mat: &DMatrix<f64>) -> Vec<f64> {
    let n = k[l];
    let inner: usize = k[l + 1..].iter().product();
    let outer: usize = k[..l].iter().product();
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for r in 0..n {
                let mut s = 0.0;
                for c in 0..n {
                    s += mat[(r, c)] * data[base + c * inner];
                }
                out[base + r * inner] = s;
            }
        }
    }
    out
}

/// Numerator and denominator as coefficient tensors in the monomial basis.
///
/// Along every variable the index runs from the highest power down to the
/// constant: entry `j_l` multiplies `x_l^(k_l−1−j_l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialModel {
    num: Vec<f64>,
    den: Vec<f64>,
    shape: Vec<usize>,
}

impl MonomialModel {
    pub fn new(shape: Vec<usize>, num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        let total: usize = shape.iter().product();
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::InvalidInput("monomial shape needs positive extents".into()));
        }
        if num.len() != total || den.len() != total {
            return Err(Error::InvalidInput(format!(
                "shape holds {total} coefficients, got {} and {}",
                num.len(),
                den.len()
            )));
        }
        if den.iter().all(|&d| d == 0.0) {
            return Err(Error::InvalidInput("denominator is identically zero".into()));
        }
        Ok(MonomialModel { num, den, shape })
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: MonomialModel = serde_json::from_str(text)?;
        Self::new(m.shape, m.num, m.den)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Numerator `V⊗(c⊙w)` and denominator `V⊗c`, applied one mode at a time and
/// scaled so the largest denominator coefficient is +1.
pub fn to_monomial(m: &BarycentricModel) -> Result<MonomialModel> {
    let k = m.k();
    let mut num: Vec<f64> = m.weights().iter().zip(m.values()).map(|(c, w)| c * w).collect();
    let mut den = m.weights().to_vec();
    for (l, lam) in m.lambda().iter().enumerate() {
        let v = vandermonde_matrix(lam)?;
        num = mode_product(&num, &k, l, &v);
        den = mode_product(&den, &k, l, &v);
    }
    let lead = den.iter().fold(0.0f64, |a, &d| if d.abs() > a.abs() { d } else { a });
    if lead == 0.0 {
        return Err(Error::InvalidInput("denominator vanished in the monomial basis".into()));
    }
    num.iter_mut().for_each(|a| *a /= lead);
    den.iter_mut().for_each(|a| *a /= lead);
    MonomialModel::new(k, num, den)
}

/// Nested Horner evaluation, last variable innermost.
fn horner(data: &[f64], k: &[usize], x: &[f64]) -> f64 {
    let mut cur = data.to_vec();
    for l in (0..k.len()).rev() {
        cur = cur.chunks_exact(k[l]).map(|f| f.iter().fold(0.0, |acc, &a| acc * x[l] + a)).collect();
    }
    cur[0]
}

pub fn eval_monomial(m: &MonomialModel, x: &[f64]) -> Result<f64> {
    check_point(m.shape.len(), x)?;
    ratio(horner(&m.num, &m.shape, x), horner(&m.den, &m.shape, x), x)
}

impl Surrogate for MonomialModel {
    fn omega(&self) -> usize {
        self.shape.len()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        eval_monomial(self, x)
    }
}

/// Per-variable weight vectors whose elementwise product is the barycentric
/// weight vector, each paired with its Lagrange poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KstModel {
    lambda: Vec<Vec<f64>>,
    bary: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl KstModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn lambda(&self) -> &[Vec<f64>] {
        &self.lambda
    }

    /// `bary[l]`, length `K`, constant over blocks of trailing indices.
    pub fn bary(&self) -> &[Vec<f64>] {
        &self.bary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> Vec<usize> {
        self.lambda.iter().map(Vec::len).collect()
    }
}

/// Expand each variable's factor over the trailing indices.
pub fn to_kst(m: &BarycentricModel) -> Result<KstModel> {
    let factors = m.factors().ok_or(Error::FactorsUnavailable)?;
    let k = m.k();
    let total: usize = k.iter().product();
    let bary = (0..k.len())
        .map(|l| {
            let trailing: usize = k[l + 1..].iter().product();
            (0..total).map(|j| factors[l][j / trailing]).collect()
        })
        .collect();
    Ok(KstModel { lambda: m.lambda().to_vec(), bary, values: m.values().to_vec() })
}

/// `Σ w⊙Φ_1⊙…⊙Φ_ω / Σ Φ_1⊙…⊙Φ_ω` with `Φ_l = bary_l ⊙ 1/(x_l − λ_l)`.
pub fn eval_kst(m: &KstModel, x: &[f64]) -> Result<f64> {
    check_point(m.lambda.len(), x)?;
    let k = m.k();
    let mut vecs = Vec::with_capacity(k.len());
    let mut hits = Vec::with_capacity(k.len());
    for (lam, &xl) in m.lambda.iter().zip(x) {
        let (b, h) = basis(lam, xl);
        vecs.push(b);
        hits.push(h);
    }
    if hits.iter().all(Option::is_some) {
        let idx: Vec<usize> = hits.iter().map(|h| h.unwrap()).collect();
        return Ok(m.values[crate::tensor::flat_index(&k, &idx)]);
    }
    let mut idx = vec![0; k.len()];
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..m.values.len() {
        let mut phi = 1.0;
        for l in 0..k.len() {
            phi *= m.bary[l][j] * vecs[l][idx[l]];
        }
        num += m.values[j] * phi;
        den += phi;
        crate::tensor::next_index(&k, &mut idx);
    }
    ratio(num, den, x)
}

impl Surrogate for KstModel {
    fn omega(&self) -> usize {
        self.lambda.len()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        eval_kst(self, x)
    }
}

/// Which half of the rational function a network graph computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphPart {
    Numerator,
    Denominator,
}

/// Graphviz text and node counts per layer: inputs, basis, products, sum.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    pub dot: String,
    pub counts: [usize; 4],
}

/// Layered DAG: inputs, one `1/(x_l − λ)` node per support point, one product
/// node per support combination, and a weighted sum.
pub fn emit_network_graph(m: &BarycentricModel, part: GraphPart) -> NetworkGraph {
    let k = m.k();
    let name = match part {
        GraphPart::Numerator => "numerator",
        GraphPart::Denominator => "denominator",
    };
    let mut s = String::new();
    let _ = writeln!(s, "digraph {name} {{");
    let _ = writeln!(s, "  rankdir=LR;");
    for l in 0..k.len() {
        let _ = writeln!(s, "  x{} [label=\"x{}\", shape=circle];", l + 1, l + 1);
    }
    for (l, lam) in m.lambda().iter().enumerate() {
        for (j, p) in lam.iter().enumerate() {
            let _ = writeln!(s, "  b{}_{} [label=\"1/(x{} - {p})\", shape=box];", l + 1, j + 1, l + 1);
            let _ = writeln!(s, "  x{} -> b{}_{};", l + 1, l + 1, j + 1);
        }
    }
    let _ = writeln!(s, "  sum [label=\"sum\", shape=doublecircle];");
    let mut idx = vec![0; k.len()];
    for (j, (&c, &w)) in m.weights().iter().zip(m.values()).enumerate() {
        let _ = writeln!(s, "  p{} [label=\"prod\", shape=circle];", j + 1);
        for (l, &i) in idx.iter().enumerate() {
            let _ = writeln!(s, "  b{}_{} -> p{};", l + 1, i + 1, j + 1);
        }
        let weight = match part {
            GraphPart::Numerator => c * w,
            GraphPart::Denominator => c,
        };
        let _ = writeln!(s, "  p{} -> sum [label=\"{weight}\"];", j + 1);
        crate::tensor::next_index(&k, &mut idx);
    }
    s.push_str("}\n");
    NetworkGraph { dot: s, counts: [k.len(), k.iter().sum(), m.weights().len(), 1] }
}
