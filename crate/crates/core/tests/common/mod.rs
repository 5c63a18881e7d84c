//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;

use mloewner::rng::SplitMix64;
use mloewner::tensor::{next_index, unflatten};

/// Dense ω-variable Loewner matrix: rows over every μ combination, columns
/// over every λ combination, entry `(f(x_row) − f(x_col)) / Π_l (row_l − col_l)`.
pub fn full_loewner(f: &dyn Fn(&[f64]) -> f64, lambda: &[Vec<f64>], mu: &[Vec<f64>]) -> DMatrix<f64> {
    let kl: Vec<usize> = lambda.iter().map(Vec::len).collect();
    let km: Vec<usize> = mu.iter().map(Vec::len).collect();
    let (nk, nq) = (kl.iter().product::<usize>(), km.iter().product::<usize>());
    let omega = lambda.len();
    let mut out = DMatrix::zeros(nq, nk);
    let (mut ji, mut ii) = (vec![0; omega], vec![0; omega]);
    for i in 0..nq {
        unflatten(&km, i, &mut ii);
        let xm: Vec<f64> = (0..omega).map(|l| mu[l][ii[l]]).collect();
        for j in 0..nk {
            unflatten(&kl, j, &mut ji);
            let xl: Vec<f64> = (0..omega).map(|l| lambda[l][ji[l]]).collect();
            let den: f64 = (0..omega).map(|l| xm[l] - xl[l]).product();
            out[(i, j)] = (f(&xm) - f(&xl)) / den;
        }
    }
    out
}

/// Right singular vector of the smallest singular value.
pub fn svd_null_vector(m: DMatrix<f64>) -> Vec<f64> {
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let imin = (0..svd.singular_values.len())
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap();
    vt.row(imin).iter().copied().collect()
}

pub fn cos_angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).abs()
}

/// Polynomial with coefficient tensor `coef` of shape `shape`; entry index
/// `(d_1..d_ω)` multiplies `Π x_l^d_l`.
pub fn poly(shape: &[usize], coef: &[f64], x: &[f64]) -> f64 {
    let mut idx = vec![0; x.len()];
    let mut s = 0.0;
    for c in coef {
        let mono: f64 = idx.iter().zip(x).map(|(&d, &xi)| xi.powi(d as i32)).product();
        s += c * mono;
        next_index(shape, &mut idx);
    }
    s
}

/// Random rational of degree at most `k_l − 1` in each variable, with a
/// denominator bounded away from zero on `[−1, 1]^ω`.
pub struct RandomRational {
    pub shape: Vec<usize>,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RandomRational {
    pub fn new(rng: &mut SplitMix64, k: &[usize]) -> Self {
        let total: usize = k.iter().product();
        let num = (0..total).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut den: Vec<f64> = (0..total).map(|_| rng.uniform(-1.0, 1.0) / total as f64).collect();
        den[0] = 3.0;
        RandomRational { shape: k.to_vec(), num, den }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        poly(&self.shape, &self.num, x) / poly(&self.shape, &self.den, x)
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
