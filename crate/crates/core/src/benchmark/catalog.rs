//! The fifty test functions with their bounds and grid sizes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tensor::{linspace_axis, Function, GridAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Klass {
    Polynomial,
    Rational,
    Irrational,
}

impl Klass {
    pub fn name(self) -> &'static str {
        match self {
            Klass::Polynomial => "polynomial",
            Klass::Rational => "rational",
            Klass::Irrational => "irrational",
        }
    }
}

impl fmt::Display for Klass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Klass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polynomial" => Ok(Klass::Polynomial),
            "rational" => Ok(Klass::Rational),
            "irrational" => Ok(Klass::Irrational),
            _ => Err(Error::InvalidInput(format!("unknown function class '{s}'"))),
        }
    }
}

#[derive(Clone)]
pub struct BenchmarkCase {
    pub id: usize,
    /// Formula as plain text.
    pub label: &'static str,
    pub omega: usize,
    pub bounds: Vec<(f64, f64)>,
    pub grid: Vec<usize>,
    pub klass: Klass,
    formula: Option<Arc<Function>>,
}

impl fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("id", &self.id)
            .field("label", &self.label)
            .field("omega", &self.omega)
            .field("bounds", &self.bounds)
            .field("grid", &self.grid)
            .field("klass", &self.klass)
            .field("available", &self.available())
            .finish()
    }
}

impl BenchmarkCase {
    pub fn available(&self) -> bool {
        self.formula.is_some()
    }

    pub fn formula(&self) -> Result<&Function> {
        self.formula.as_deref().ok_or(Error::CaseUnavailable(self.id))
    }

    /// Plug in a formula, e.g. for a case whose expression is not shipped.
    pub fn with_formula(mut self, f: Arc<Function>) -> Self {
        self.formula = Some(f);
        self
    }

    /// Equispaced axes on the case bounds with the published grid sizes.
    pub fn axes(&self) -> Result<Vec<GridAxis>> {
        self.axes_with(&self.grid)
    }

    /// Equispaced axes with other grid sizes.
    pub fn axes_with(&self, grid: &[usize]) -> Result<Vec<GridAxis>> {
        if grid.len() != self.omega {
            return Err(Error::InvalidInput(format!(
                "case #{} has {} variables, got {} grid sizes",
                self.id,
                self.omega,
                grid.len()
            )));
        }
        self.bounds
            .iter()
            .zip(grid)
            .enumerate()
            .map(|(l, (&(lo, hi), &n))| linspace_axis(&format!("x{}", l + 1), lo, hi, n))
            .collect()
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

fn sq(x: f64) -> f64 {
    x * x
}

type Raw = fn(&[f64]) -> f64;

fn entry(id: usize, label: &'static str, klass: Klass, bounds: Vec<(f64, f64)>, n: usize, f: Option<Raw>) -> BenchmarkCase {
    let omega = bounds.len();
    BenchmarkCase {
        id,
        label,
        omega,
        grid: vec![n; omega],
        bounds,
        klass,
        formula: f.map(|f| Arc::new(f) as Arc<Function>),
    }
}

fn cube(lo: f64, hi: f64, omega: usize) -> Vec<(f64, f64)> {
    vec![(lo, hi); omega]
}

/// All fifty cases, indexed by `id − 1`.
pub fn catalog() -> Vec<BenchmarkCase> {
    use Klass::*;
    let u = |o| cube(-1.0, 1.0, o);
    vec![
        entry(1, "relu(x1) + x2/100", Irrational, vec![(-1.0, 1.0), (-1.0, -1e-10)], 40,
            Some(|x| relu(x[0]) + x[1] / 100.0)),
        entry(2, "exp(sin(x1) + x2^2)", Irrational, u(2), 40, Some(|x| (x[0].sin() + sq(x[1])).exp())),
        entry(3, "x1*x2", Polynomial, u(2), 40, Some(|x| x[0] * x[1])),
        entry(4, "(1/3)*sum sin(pi*xi/2)^2", Irrational, u(3), 40,
            Some(|x| x.iter().map(|&v| sq((PI * v / 2.0).sin())).sum::<f64>() / 3.0)),
        entry(5, "exp((sin(pi*(x1^2+x2^2)) + sin(pi*(x3^2+x4^2)))/2)", Irrational, u(4), 40,
            Some(|x| (0.5 * ((PI * (sq(x[0]) + sq(x[1]))).sin() + (PI * (sq(x[2]) + sq(x[3]))).sin())).exp())),
        entry(6, "exp(x1*x2)/((x1^2-1.44)*(x2^2-1.44))", Irrational, u(2), 40,
            Some(|x| (x[0] * x[1]).exp() / ((sq(x[0]) - 1.44) * (sq(x[1]) - 1.44)))),
        entry(7, "log(2.25-x1^2-x2^2)", Irrational, u(2), 40, Some(|x| (2.25 - sq(x[0]) - sq(x[1])).ln())),
        entry(8, "tanh(4*(x1-x2))", Irrational, u(2), 74, Some(|x| (4.0 * (x[0] - x[1])).tanh())),
        entry(9, "exp(-(x1^2+x2^2)/1000)", Irrational, u(2), 40, Some(|x| (-(sq(x[0]) + sq(x[1])) / 1000.0).exp())),
        entry(10, "|x1-x2|^3", Irrational, u(2), 82, Some(|x| (x[0] - x[1]).abs().powi(3))),
        entry(11, "(x1+x2^3)/(x1*x2^2+2)", Rational, cube(1e-10, 1.0, 2), 40,
            Some(|x| (x[0] + x[1].powi(3)) / (x[0] * sq(x[1]) + 2.0))),
        entry(12, "(x1^2+x2^2+x1-x2-1)/((x1-1.1)*(x2-1.1))", Rational, u(2), 40,
            Some(|x| (sq(x[0]) + sq(x[1]) + x[0] - x[1] - 1.0) / ((x[0] - 1.1) * (x[1] - 1.1)))),
        entry(13, "(x1^4+x2^4+x1^2*x2^2+x1*x2)/((x1-1.1)*(x2-1.1))", Rational, u(2), 40,
            Some(|x| (x[0].powi(4) + x[1].powi(4) + sq(x[0] * x[1]) + x[0] * x[1]) / ((x[0] - 1.1) * (x[1] - 1.1)))),
        entry(14, "(x1^2+x2^2+x1-x2+1)/((x3-1.5)*(x4-1.5))", Rational, u(4), 20,
            Some(|x| (sq(x[0]) + sq(x[1]) + x[0] - x[1] + 1.0) / ((x[2] - 1.5) * (x[3] - 1.5)))),
        entry(15, "(x1^2+x2^2+x1-x2-1)/(x1^3+x2^3+4)", Rational, u(2), 40,
            Some(|x| (sq(x[0]) + sq(x[1]) + x[0] - x[1] - 1.0) / (x[0].powi(3) + x[1].powi(3) + 4.0))),
        entry(16, "(x1^3+x2^3)/(x1^2+x2^2+3)", Rational, u(2), 40,
            Some(|x| (x[0].powi(3) + x[1].powi(3)) / (sq(x[0]) + sq(x[1]) + 3.0))),
        entry(17, "(x1^4+x2^4+x1^2*x2^2+x1*x2)/(x1^2*x2^2-2*x1^2-2*x2^2+4)", Rational, u(2), 40,
            Some(|x| {
                (x[0].powi(4) + x[1].powi(4) + sq(x[0] * x[1]) + x[0] * x[1])
                    / (sq(x[0] * x[1]) - 2.0 * sq(x[0]) - 2.0 * sq(x[1]) + 4.0)
            })),
        entry(18, "(x1^3+x2^3)/(x1^2*x2^2-2*x1^2-2*x2^2+4)", Rational, u(2), 40,
            Some(|x| (x[0].powi(3) + x[1].powi(3)) / (sq(x[0] * x[1]) - 2.0 * sq(x[0]) - 2.0 * sq(x[1]) + 4.0))),
        entry(19, "(x1^4+x2^4+x1^2*x2^2+x1*x2)/(x1^3+x2^3+4)", Rational, u(2), 40,
            Some(|x| (x[0].powi(4) + x[1].powi(4) + sq(x[0] * x[1]) + x[0] * x[1]) / (x[0].powi(3) + x[1].powi(3) + 4.0))),
        entry(20, "Breit-Wigner function", Irrational, vec![(80.0, 100.0), (5.0, 10.0), (90.0, 93.0)], 40, None),
        entry(21, "sum atan(xi)/(x1^2*x2^2-x1^2-x2^2+1)", Irrational, cube(-0.95, 0.95, 4), 20,
            Some(|x| x.iter().map(|v| v.atan()).sum::<f64>() / (sq(x[0] * x[1]) - sq(x[0]) - sq(x[1]) + 1.0))),
        entry(22, "exp(x1*x2*x3*x4)/(x1^2+x2^2-x3*x4+3)", Irrational, u(4), 20,
            Some(|x| (x[0] * x[1] * x[2] * x[3]).exp() / (sq(x[0]) + sq(x[1]) - x[2] * x[3] + 3.0))),
        entry(23, "10*prod sinc(xi)", Irrational, cube(1e-6, 4.0 * PI, 4), 22,
            Some(|x| 10.0 * x.iter().map(|&v| sinc(v)).product::<f64>())),
        entry(24, "10*sinc(x1)*sinc(x2)", Irrational, cube(1e-6, 4.0 * PI, 2), 42,
            Some(|x| 10.0 * sinc(x[0]) * sinc(x[1]))),
        entry(25, "x1^2+x2^2+x1*x2-x2+1", Polynomial, u(2), 40,
            Some(|x| sq(x[0]) + sq(x[1]) + x[0] * x[1] - x[1] + 1.0)),
        entry(26, "(x1+x2+x3)/(6+cos(x1)+cos(x2)+cos(x3))", Irrational, cube(-10.0, 10.0, 3), 60,
            Some(|x| x.iter().sum::<f64>() / (6.0 + x.iter().map(|v| v.cos()).sum::<f64>()))),
        entry(27, "(x1+...+x5)/(10+cos(x1)+...+cos(x5))", Irrational, cube(-4.0, 4.0, 5), 26,
            Some(|x| x.iter().sum::<f64>() / (10.0 + x.iter().map(|v| v.cos()).sum::<f64>()))),
        entry(28, "(x1/(x1+1))^4*(1+exp(-x2^2))*(1+x2*cos(x2)*exp(-x1*x2/(x1+1)))", Irrational,
            cube(1e-10, 10.0, 2), 62,
            Some(|x| {
                (x[0] / (x[0] + 1.0)).powi(4)
                    * (1.0 + (-sq(x[1])).exp())
                    * (1.0 + x[1] * x[1].cos() * (-x[0] * x[1] / (x[0] + 1.0)).exp())
            })),
        entry(29, "min(10|x1|,1)*sign(x1) + x1*x2^3/10", Irrational, u(2), 40,
            Some(|x| {
                let s = if x[0] > 0.0 { 1.0 } else if x[0] < 0.0 { -1.0 } else { 0.0 };
                (10.0 * x[0].abs()).min(1.0) * s + x[0] * x[1].powi(3) / 10.0
            })),
        entry(30, "Borehole function", Irrational,
            vec![(0.05, 0.15), (100.0, 50000.0), (63070.0, 115600.0), (990.0, 1110.0),
                 (63.1, 116.0), (700.0, 820.0), (1120.0, 1680.0), (9855.0, 12045.0)], 8, None),
        entry(31, "x1^2*x2^3*x3*x4 - x5^2 + x6", Polynomial, cube(-2.0, 2.0, 6), 16,
            Some(|x| sq(x[0]) * x[1].powi(3) * x[2] * x[3] - sq(x[4]) + x[5])),
        entry(32, "atan(x1) + x2^3", Irrational, cube(-2.0, 2.0, 2), 40, Some(|x| x[0].atan() + x[1].powi(3))),
        entry(33, "(x1+x2)/(cos(x1)^2+cos(x2)+3)", Irrational, cube(-10.0, 10.0, 2), 60,
            Some(|x| (x[0] + x[1]) / (sq(x[0].cos()) + x[1].cos() + 3.0))),
        entry(34, "Riemann zeta function (real part)", Irrational, vec![(0.45, 0.55), (1.0, 50.0)], 400, None),
        entry(35, "Riemann zeta function (imaginary part)", Irrational, vec![(0.45, 0.55), (1.0, 50.0)], 400, None),
        entry(36, "x2/(3+x2*x1/3-x3^2)", Rational, cube(0.1, 1.0, 3), 20,
            Some(|x| x[1] / (3.0 + x[1] * x[0] / 3.0 - sq(x[2])))),
        entry(37, "x1*x4^3 + sin(2*x2)*x3", Irrational, cube(1e-3, 1.0, 4), 20,
            Some(|x| x[0] * x[3].powi(3) + (2.0 * x[1]).sin() * x[2])),
        entry(38, "(x1^9*x2^7+x1^3+5*x3^2)/(5*x1^4+4*x1^2+x3*x2^3+1)", Rational, cube(-1.1, 1.1, 3), 60,
            Some(|x| {
                (x[0].powi(9) * x[1].powi(7) + x[0].powi(3) + 5.0 * sq(x[2]))
                    / (5.0 * x[0].powi(4) + 4.0 * sq(x[0]) + x[2] * x[1].powi(3) + 1.0)
            })),
        entry(39, "(x3+x1^4)/(x1^3+x2^2+1)", Rational, cube(0.1, 10.0, 3), 40,
            Some(|x| (x[2] + x[0].powi(4)) / (x[0].powi(3) + sq(x[1]) + 1.0))),
        entry(40, "x3*x1/(x1^2+x2+x3^2+1) + x4^3", Rational, cube(1.0, 4.0, 4), 40,
            Some(|x| x[2] * x[0] / (sq(x[0]) + x[1] + sq(x[2]) + 1.0) + x[3].powi(3))),
        entry(41, "(x5^3*x3*x1+x3^2)/(x1^3+x2*x3+x4)", Rational, cube(0.1, 1.0, 5), 10,
            Some(|x| (x[4].powi(3) * x[2] * x[0] + sq(x[2])) / (x[0].powi(3) + x[1] * x[2] + x[3]))),
        entry(42, "(x1+x3-sqrt(2)*x6^2)/(x1^4+x2*x3+x4^3+x5^2+x6)", Rational, cube(0.1, 1.0, 6), 10,
            Some(|x| {
                (x[0] + x[2] - std::f64::consts::SQRT_2 * sq(x[5]))
                    / (x[0].powi(4) + x[1] * x[2] + x[3].powi(3) + sq(x[4]) + x[5])
            })),
        entry(43, "(x3*x2^3+1)/(x1^4+x2^2*x3+x4^2+x5+x6^3+x7)", Rational, cube(1.0, 10.0, 7), 10,
            Some(|x| {
                (x[2] * x[1].powi(3) + 1.0)
                    / (x[0].powi(4) + sq(x[1]) * x[2] + sq(x[3]) + x[4] + x[5].powi(3) + x[6])
            })),
        entry(44, "1/(x1^4+x2^2*x3+x4^2+x5+x6+x7+x8)", Rational, cube(0.1, 20.0, 8), 10,
            Some(|x| 1.0 / (x[0].powi(4) + sq(x[1]) * x[2] + sq(x[3]) + x[4] + x[5] + x[6] + x[7]))),
        entry(45, "1/(x1^2+x2^2*x3+x4^2+x5+x6+x7+x8+x9)", Rational, cube(1.0, 5.0, 9), 6,
            Some(|x| 1.0 / (sq(x[0]) + sq(x[1]) * x[2] + sq(x[3]) + x[4..].iter().sum::<f64>()))),
        entry(46, "1/(x1+x1^2*x2*x3+x4+x5+x6+x7*x8+x9^2+x10)", Rational, cube(1.0, 5.0, 10), 6,
            Some(|x| {
                1.0 / (x[0] + sq(x[0]) * x[1] * x[2] + x[3] + x[4] + x[5] + x[6] * x[7] + sq(x[8]) + x[9])
            })),
        entry(47, "(1+2x1)(-2+x2)(-x3)(3+x4)(2-3x5) + (-1+x1)(2x2)(1+3x3)(-x4)(1-x5)", Polynomial,
            cube(-2.0, 2.0, 5), 12,
            Some(|x| {
                (1.0 + 2.0 * x[0]) * (-2.0 + x[1]) * (-x[2]) * (3.0 + x[3]) * (2.0 - 3.0 * x[4])
                    + (-1.0 + x[0]) * (2.0 * x[1]) * (1.0 + 3.0 * x[2]) * (-x[3]) * (1.0 - x[4])
            })),
        entry(48, "x1*x2+x1*x3+x2*x3", Polynomial, cube(-0.5, 1.0, 3), 12,
            Some(|x| x[0] * x[1] + x[0] * x[2] + x[1] * x[2])),
        entry(49, "Hankel function H0 (real part)", Irrational, vec![(1.0, 10.0), (0.1, 1.0)], 80, None),
        entry(50, "Hankel function H0 (imaginary part)", Irrational, vec![(1.0, 10.0), (0.1, 1.0)], 80, None),
    ]
}

/// One case by id (1–50).
pub fn case(id: usize) -> Result<BenchmarkCase> {
    if !(1..=50).contains(&id) {
        return Err(Error::InvalidInput(format!("no benchmark case #{id} (ids run from 1 to 50)")));
    }
    Ok(catalog().swap_remove(id - 1))
}
