//! One-dimensional Loewner matrices, null vectors and order detection.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Point, Result};

/// Divided-difference matrix `(v_i − w_j)/(μ_i − λ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerMatrix {
    rows: Vec<f64>,
    cols: Vec<f64>,
    entries: DMatrix<f64>,
}

impl LoewnerMatrix {
    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn cols(&self) -> &[f64] {
        &self.cols
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<f64> {
        self.entries
    }
}

/// How a right null vector is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullMethod {
    /// Last right singular vector.
    Svd,
    /// Last column of the orthogonal factor of a column-pivoted QR of the transpose.
    Qr,
    /// Least-squares solve of the first `K−1` columns against the last one.
    Solve,
}

impl NullMethod {
    pub const ALL: [NullMethod; 3] = [NullMethod::Svd, NullMethod::Qr, NullMethod::Solve];

    /// Numeric code 1/2/3 used in published parameter tables.
    pub fn code(self) -> u8 {
        match self {
            NullMethod::Svd => 1,
            NullMethod::Qr => 2,
            NullMethod::Solve => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NullMethod::Svd => "svd",
            NullMethod::Qr => "qr",
            NullMethod::Solve => "solve",
        }
    }
}

impl fmt::Display for NullMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NullMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svd" | "1" => Ok(NullMethod::Svd),
            "qr" | "2" => Ok(NullMethod::Qr),
            "solve" | "3" => Ok(NullMethod::Solve),
            other => Err(Error::InvalidInput(format!("unknown null method '{other}'"))),
        }
    }
}

pub fn build_loewner_1d(lambda: &[f64], mu: &[f64], w: &[f64], v: &[f64]) -> Result<LoewnerMatrix> {
    if lambda.len() != w.len() || mu.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "{} column points with {} values, {} row points with {} values",
            lambda.len(),
            w.len(),
            mu.len(),
            v.len()
        )));
    }
    let mut entries = DMatrix::zeros(mu.len(), lambda.len());
    for (i, (&m, &vi)) in mu.iter().zip(v).enumerate() {
        for (j, (&l, &wj)) in lambda.iter().zip(w).enumerate() {
            let den = m - l;
            if den == 0.0 {
                return Err(Error::DegenerateSupport(format!("point {m} is both a row and a column point")));
            }
            entries[(i, j)] = (vi - wj) / den;
        }
    }
    if entries.iter().any(|e| !e.is_finite()) {
        return Err(Error::Sampling(Point(lambda.iter().chain(mu).copied().collect())));
    }
    Ok(LoewnerMatrix { rows: mu.to_vec(), cols: lambda.to_vec(), entries })
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `σ_i/σ_1` in descending order; all zeros for the zero matrix.
pub fn normalized_singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let s = sorted_singular_values(m);
    let top = s[0];
    if top == 0.0 {
        return Ok(vec![0.0; s.len()]);
    }
    Ok(s.iter().map(|x| x / top).collect())
}

/// Order of a univariate section from the rank of its square Loewner matrix.
///
/// `samples[i]` is the function at `points[i]`. The odd-index points are the
/// columns and the even-index points the rows, truncated to a square
/// `⌊N/2⌋×⌊N/2⌋` matrix. Returns the number of normalized singular values at or
/// above `tol_ord`; `tol_ord = 0` disables detection and returns `⌊N/2⌋ − 1`.
pub fn estimate_order(samples: &[f64], points: &[f64], tol_ord: f64) -> Result<usize> {
    if samples.len() != points.len() || points.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "order detection needs ≥ 2 points with matching samples (got {} and {})",
            points.len(),
            samples.len()
        )));
    }
    if !(tol_ord == 0.0 || (tol_ord > 0.0 && tol_ord <= 1.0)) {
        return Err(Error::InvalidInput(format!("tol_ord must be 0 or in (0, 1], got {tol_ord}")));
    }
    if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
        return Err(Error::Sampling(Point(vec![points[i]])));
    }
    let m = points.len() / 2;
    if tol_ord == 0.0 {
        return Ok(m - 1);
    }
    let pick = |start: usize| -> (Vec<f64>, Vec<f64>) {
        (0..m).map(|i| (points[start + 2 * i], samples[start + 2 * i])).unzip()
    };
    let (lambda, w) = pick(1);
    let (mu, v) = pick(0);
    let l = build_loewner_1d(&lambda, &mu, &w, &v)?;
    let nsv = normalized_singular_values(l.entries())?;
    Ok(nsv.iter().filter(|&&s| s > 0.0 && s >= tol_ord).count())
}

/// A null vector together with the method that actually produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSolution {
    pub vector: Vec<f64>,
    pub method: NullMethod,
    /// The requested method could not be applied and SVD was used instead.
    pub fallback: bool,
}

/// Pad with zero rows so the matrix has at least as many rows as columns.
fn pad_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r >= c {
        return m.clone();
    }
    let mut out = DMatrix::zeros(c, c);
    out.view_mut((0, 0), (r, c)).copy_from(m);
    out
}

fn svd_null(m: &DMatrix<f64>) -> Vec<f64> {
    let a = pad_rows(m);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let s = &svd.singular_values;
    let mut best = 0;
    for i in 1..s.len() {
        if s[i] <= s[best] {
            best = i;
        }
    }
    vt.row(best).iter().copied().collect()
}

fn qr_null(m: &DMatrix<f64>) -> Vec<f64> {
    let at = pad_rows(m).transpose();
    let q = at.col_piv_qr().q();
    q.column(q.ncols() - 1).iter().copied().collect()
}

/// `None` when the leading block is numerically rank deficient.
fn solve_null(m: &DMatrix<f64>) -> Option<Vec<f64>> {
    let n = m.ncols();
    let lead = m.columns(0, n - 1).into_owned();
    let rhs = -m.column(n - 1).into_owned();
    let rows = lead.nrows();
    let svd = lead.svd(true, true);
    let s = &svd.singular_values;
    let smax = s.iter().fold(0.0f64, |a, &b| a.max(b));
    let smin = s.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let floor = smax * (m.nrows().max(n) as f64) * f64::EPSILON;
    if rows < n - 1 || smax == 0.0 || smin <= floor {
        return None;
    }
    let y = svd.solve(&rhs, floor).ok()?;
    let mut c: Vec<f64> = y.iter().copied().collect();
    c.push(1.0);
    Some(c)
}

/// Scale so the last entry is 1, or to unit 2-norm with the first nonzero entry
/// positive when the last entry is (numerically) zero.
pub fn normalize_null(c: &mut [f64]) {
    let big = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if big == 0.0 {
        return;
    }
    let tiny = 1e-13 * big;
    let last = c[c.len() - 1];
    if last.abs() > tiny {
        c.iter_mut().for_each(|x| *x /= last);
        return;
    }
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = c.iter().find(|x| x.abs() > tiny).map_or(1.0, |x| x.signum());
    c.iter_mut().for_each(|x| *x *= sign / norm);
}

/// Right null vector of `m`, normalized by [`normalize_null`].
pub fn null_vector(m: &DMatrix<f64>, method: NullMethod) -> Result<NullSolution> {
    let k = m.ncols();
    if k == 0 {
        return Err(Error::InvalidInput("null vector of a matrix without columns".into()));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if k == 1 || m.nrows() == 0 {
        let mut v = vec![0.0; k];
        v[k - 1] = 1.0;
        return Ok(NullSolution { vector: v, method, fallback: false });
    }
    let (mut vector, used, fallback) = match method {
        NullMethod::Svd => (svd_null(m), NullMethod::Svd, false),
        NullMethod::Qr => (qr_null(m), NullMethod::Qr, false),
        NullMethod::Solve => match solve_null(m) {
            Some(c) => (c, NullMethod::Solve, false),
            None => (svd_null(m), NullMethod::Svd, true),
        },
    };
    normalize_null(&mut vector);
    Ok(NullSolution { vector, method: used, fallback })
}

/// Zero out entries below `tol_k` times the largest magnitude; `tol_k < 0` keeps everything.
pub fn prune_weights(c: &[f64], tol_k: f64) -> Vec<f64> {
    if tol_k < 0.0 {
        return c.to_vec();
    }
    let big = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    c.iter().map(|&x| if x.abs() < tol_k * big { 0.0 } else { x }).collect()
}

/// Barycentric weights of polynomial interpolation on `lambda`, `1/Π_{i≠j}(λ_j − λ_i)`.
pub fn polynomial_weights(lambda: &[f64]) -> Vec<f64> {
    lambda
        .iter()
        .enumerate()
        .map(|(j, &lj)| {
            1.0 / lambda
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &li)| lj - li)
                .product::<f64>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn random_matrix(rng: &mut SplitMix64, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.uniform(-1.0, 1.0))
    }

    fn cos_angle(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        (dot / (na * nb)).abs()
    }

    #[test]
    fn loewner_small_cases() {
        let l = build_loewner_1d(&[0.0], &[1.0], &[0.0], &[1.0]).unwrap();
        assert_eq!(l.entries()[(0, 0)], 1.0);
        let l = build_loewner_1d(&[0.0], &[1.0], &[5.0], &[5.0]).unwrap();
        assert_eq!(l.entries()[(0, 0)], 0.0);
        // f = x², λ = [−1, 1], μ = [0, 2]: entries reduce to μ_i + λ_j
        let l = build_loewner_1d(&[-1.0, 1.0], &[0.0, 2.0], &[1.0, 1.0], &[0.0, 4.0]).unwrap();
        assert_eq!(l.entries(), &DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, 3.0]));
    }

    #[test]
    fn loewner_rejects_shared_point() {
        let e = build_loewner_1d(&[0.0, 1.0], &[1.0], &[0.0, 1.0], &[1.0]).unwrap_err();
        assert!(matches!(e, Error::DegenerateSupport(_)));
    }

    #[test]
    fn nsv_simple() {
        assert_eq!(normalized_singular_values(&DMatrix::identity(2, 2)).unwrap(), vec![1.0, 1.0]);
        let ones = DMatrix::from_element(2, 2, 1.0);
        let s = normalized_singular_values(&ones).unwrap();
        assert_abs_diff_eq!(s[0], 1.0);
        assert!(s[1] < 1e-15);
        assert_eq!(normalized_singular_values(&DMatrix::zeros(3, 2)).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn nsv_matches_gram_eigenvalues() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 4, 4);
            let gram = m.transpose() * &m;
            let mut ev: Vec<f64> =
                SymmetricEigen::new(gram).eigenvalues.iter().map(|e| e.max(0.0).sqrt()).collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            let oracle: Vec<f64> = ev.iter().map(|e| e / ev[0]).collect();
            let s = normalized_singular_values(&m).unwrap();
            assert_abs_diff_eq!(s.as_slice(), oracle.as_slice(), epsilon = 1e-10);
        }
    }

    #[test]
    fn nsv_scale_invariant() {
        let mut rng = SplitMix64::new(5);
        let m = random_matrix(&mut rng, 5, 3);
        let base = normalized_singular_values(&m).unwrap();
        for alpha in [-3.0, 1e-6, 1e6] {
            let s = normalized_singular_values(&(&m * alpha)).unwrap();
            assert_abs_diff_eq!(s.as_slice(), base.as_slice(), epsilon = 1e-12);
        }
    }

    #[test]
    fn order_of_worked_example() {
        let axis: Vec<f64> = (0..10).map(|i| -1.0 + 2.0 * i as f64 / 9.0).collect();
        let h = |x1: f64, x2: f64| x1 * x2.powi(3) + 2.0 * x1 * x2 - 1.0;
        let frozen = axis[1];
        let along1: Vec<f64> = axis.iter().map(|&x| h(x, frozen)).collect();
        let along2: Vec<f64> = axis.iter().map(|&x| h(frozen, x)).collect();
        assert_eq!(estimate_order(&along1, &axis, 1e-6).unwrap(), 1);
        assert_eq!(estimate_order(&along2, &axis, 1e-6).unwrap(), 3);
        let lin: Vec<f64> = axis.iter().map(|x| 3.0 * x - 2.0).collect();
        assert_eq!(estimate_order(&lin, &axis, 1e-6).unwrap(), 1);
        let sq: Vec<f64> = axis.iter().map(|x| x * x).collect();
        assert_eq!(estimate_order(&sq, &axis, 1e-8).unwrap(), 2);
        let c = vec![4.0; 10];
        assert_eq!(estimate_order(&c, &axis, 1e-8).unwrap(), 0);
        assert_eq!(estimate_order(&sq, &axis, 0.0).unwrap(), 4);
    }

    #[test]
    fn order_rejects_bad_input() {
        let axis = [0.0, 0.5, 1.0];
        assert!(matches!(estimate_order(&[0.0, f64::NAN, 1.0], &axis, 1e-3), Err(Error::Sampling(_))));
        assert!(estimate_order(&[0.0, 0.1, 1.0], &axis, 2.0).is_err());
        assert!(estimate_order(&[0.0], &[0.0], 0.5).is_err());
    }

    #[test]
    fn explicit_kernel() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        for method in NullMethod::ALL {
            let c = null_vector(&m, method).unwrap();
            assert_abs_diff_eq!(c.vector.as_slice(), [0.0, 1.0].as_slice(), epsilon = 1e-15);
        }
    }

    #[test]
    fn full_2d_loewner_of_worked_example() {
        // 2-D Loewner matrix assembled entrywise from w, v and product denominators
        let l1 = [-7.0 / 9.0, 1.0];
        let l2 = [-7.0 / 9.0, -1.0 / 3.0, 1.0 / 9.0, 1.0];
        let m1 = [-1.0, 7.0 / 9.0];
        let m2 = [-1.0, -5.0 / 9.0, -1.0 / 9.0, 7.0 / 9.0];
        let h = |x1: f64, x2: f64| x1 * x2.powi(3) + 2.0 * x1 * x2 - 1.0;
        let mut l = DMatrix::zeros(8, 8);
        for (i1, &a) in m1.iter().enumerate() {
            for (i2, &b) in m2.iter().enumerate() {
                for (j1, &c) in l1.iter().enumerate() {
                    for (j2, &d) in l2.iter().enumerate() {
                        l[(i1 * 4 + i2, j1 * 4 + j2)] = (h(a, b) - h(c, d)) / ((a - c) * (b - d));
                    }
                }
            }
        }
        let expected = [3.0, -8.0, 6.0, -1.0, -3.0, 8.0, -6.0, 1.0];
        for method in NullMethod::ALL {
            let c = null_vector(&l, method).unwrap();
            assert!(cos_angle(&c.vector, &expected) > 1.0 - 1e-10, "{method}");
            assert_abs_diff_eq!(c.vector.as_slice(), expected.as_slice(), epsilon = 1e-8);
        }
    }

    #[test]
    fn planted_kernel_all_methods() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 5, 6);
            let k: Vec<f64> = (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let kv = nalgebra::DVector::from_vec(k.clone());
            let p = DMatrix::identity(6, 6) - &kv * kv.transpose() / kv.norm_squared();
            let m = a * p;
            for method in NullMethod::ALL {
                let c = null_vector(&m, method).unwrap();
                assert!(cos_angle(&c.vector, &k) > 1.0 - 1e-10, "{method}");
                let cv = nalgebra::DVector::from_vec(c.vector.clone());
                let bound = f64::EPSILON * 1e3 * m.norm() * cv.norm();
                assert!((&m * &cv).norm() <= bound, "{method}");
            }
        }
    }

    #[test]
    fn solve_falls_back_on_singular_block() {
        // first two columns identical: leading block is singular
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let c = null_vector(&m, NullMethod::Solve).unwrap();
        assert!(c.fallback);
        assert_eq!(c.method, NullMethod::Svd);
        let cv = nalgebra::DVector::from_vec(c.vector);
        assert!((&m * cv).norm() < 1e-14);
    }

    #[test]
    fn row_scaling_keeps_direction() {
        let mut rng = SplitMix64::new(77);
        let a = random_matrix(&mut rng, 4, 5);
        let base = null_vector(&a, NullMethod::Svd).unwrap().vector;
        let mut scaled = a.clone();
        for (i, s) in [1e-3, 7.0, 0.5, 1e4].iter().enumerate() {
            scaled.row_mut(i).scale_mut(*s);
        }
        for method in NullMethod::ALL {
            let c = null_vector(&scaled, method).unwrap().vector;
            assert!(cos_angle(&c, &base) > 1.0 - 1e-10, "{method}");
        }
    }

    #[test]
    fn prune_examples() {
        assert_eq!(prune_weights(&[1.0, 1e-16], 1e-14), vec![1.0, 0.0]);
        let c = [0.3, -2.0, 1e-20];
        assert_eq!(prune_weights(&c, -1.0), c.to_vec());
        let c = [3.0, -8.0, 6.0, -1.0];
        assert_eq!(prune_weights(&c, 1e-2), c.to_vec());
    }

    #[test]
    fn normalization_sign_when_last_is_zero() {
        let mut c = vec![-3.0, 4.0, 0.0];
        normalize_null(&mut c);
        assert_abs_diff_eq!(c.as_slice(), [0.6, -0.8, 0.0].as_slice(), epsilon = 1e-15);
    }

    #[test]
    fn method_names_round_trip() {
        for m in NullMethod::ALL {
            assert_eq!(m.name().parse::<NullMethod>().unwrap(), m);
            assert_eq!(m.code().to_string().parse::<NullMethod>().unwrap(), m);
        }
        assert!("lu".parse::<NullMethod>().is_err());
    }
}
