//! Closed-form flop and storage accounting: recursive 1-D null-space solves
//! against one dense solve of the full ω-D Loewner matrix (square, `q_l = k_l`).

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn check(k: &[usize]) -> Result<()> {
    if k.is_empty() {
        return Err(Error::InvalidInput("empty order vector".into()));
    }
    if k.contains(&0) {
        return Err(Error::InvalidInput("every k_l must be at least 1".into()));
    }
    Ok(())
}

/// `Σ_l k_l³ · Π_{j<l} k_j`: one `k_l×k_l` solve per combination of the preceding variables.
pub fn flops_recursive(k: &[usize]) -> Result<BigUint> {
    check(k)?;
    let mut total = BigUint::zero();
    let mut prefix = BigUint::one();
    for &kl in k {
        let kl = BigUint::from(kl);
        total += &prefix * kl.pow(3);
        prefix *= kl;
    }
    Ok(total)
}

/// `N³` with `N = Π k_l`.
pub fn flops_full(k: &[usize]) -> Result<BigUint> {
    check(k)?;
    Ok(k.iter().map(|&x| BigUint::from(x)).product::<BigUint>().pow(3))
}

/// Worst case with `n` variables of equal size `k`: `k³(kⁿ − 1)/(k − 1)`.
/// The geometric form is singular at `k = 1`, where the sum is simply `n`.
pub fn worst_case_flops(k: usize, n: usize) -> Result<BigUint> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("k and n must be positive".into()));
    }
    if k == 1 {
        return Ok(BigUint::from(n));
    }
    let kb = BigUint::from(k);
    Ok(kb.pow(3) * (kb.pow(n as u32) - 1u32) / (k - 1))
}

/// Largest matrix held by each approach, in entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Storage {
    pub entries_recursive: BigUint,
    pub entries_full: BigUint,
}

/// Bytes per entry of a complex double.
pub const COMPLEX_BYTES: u32 = 16;
/// Bytes per entry of a real double.
pub const REAL_BYTES: u32 = 8;

impl Storage {
    pub fn bytes_recursive(&self, per_entry: u32) -> BigUint {
        &self.entries_recursive * per_entry
    }

    pub fn bytes_full(&self, per_entry: u32) -> BigUint {
        &self.entries_full * per_entry
    }
}

pub fn max_storage(k: &[usize]) -> Result<Storage> {
    check(k)?;
    let kmax = BigUint::from(*k.iter().max().unwrap());
    let n: BigUint = k.iter().map(|&x| BigUint::from(x)).product();
    Ok(Storage { entries_recursive: kmax.pow(2), entries_full: n.pow(2) })
}

pub fn kib(bytes: &BigUint) -> f64 {
    bytes.to_f64().unwrap_or(f64::INFINITY) / 1024.0
}

pub fn gib(bytes: &BigUint) -> f64 {
    bytes.to_f64().unwrap_or(f64::INFINITY) / (1u64 << 30) as f64
}

/// Recursive vs full cost for one order vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub k: Vec<usize>,
    pub flops_recursive: BigUint,
    pub flops_full: BigUint,
    pub storage: Storage,
}

impl ComplexityReport {
    pub fn new(k: &[usize]) -> Result<Self> {
        Ok(ComplexityReport {
            k: k.to_vec(),
            flops_recursive: flops_recursive(k)?,
            flops_full: flops_full(k)?,
            storage: max_storage(k)?,
        })
    }

    /// Tensor size `N = Π k_l`.
    pub fn n(&self) -> BigUint {
        self.k.iter().map(|&x| BigUint::from(x)).product()
    }
}

fn human_bytes(bytes: &BigUint) -> String {
    let b = bytes.to_f64().unwrap_or(f64::INFINITY);
    if b < 1024.0 {
        format!("{b} B")
    } else if b < (1u64 << 20) as f64 {
        format!("{:.2} KB", b / 1024.0)
    } else if b < (1u64 << 30) as f64 {
        format!("{:.2} MB", b / (1u64 << 20) as f64)
    } else {
        format!("{:.2} GB", b / (1u64 << 30) as f64)
    }
}

impl fmt::Display for ComplexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k: Vec<String> = self.k.iter().map(usize::to_string).collect();
        writeln!(f, "k = [{}], N = {}", k.join(","), self.n())?;
        writeln!(f, "{:<12}{:>28}{:>28}", "", "recursive", "full")?;
        writeln!(f, "{:<12}{:>28}{:>28}", "flop", self.flops_recursive, self.flops_full)?;
        writeln!(
            f,
            "{:<12}{:>28}{:>28}",
            "entries", self.storage.entries_recursive, self.storage.entries_full
        )?;
        writeln!(
            f,
            "{:<12}{:>28}{:>28}",
            "bytes@16",
            human_bytes(&self.storage.bytes_recursive(COMPLEX_BYTES)),
            human_bytes(&self.storage.bytes_full(COMPLEX_BYTES))
        )?;
        write!(
            f,
            "{:<12}{:>28}{:>28}",
            "bytes@8",
            human_bytes(&self.storage.bytes_recursive(REAL_BYTES)),
            human_bytes(&self.storage.bytes_full(REAL_BYTES))
        )
    }
}

/// One row of the worst-case curve: `ω` variables of equal size `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseRow {
    pub omega: usize,
    pub k: usize,
    pub n: BigUint,
    pub flops_recursive: BigUint,
    pub flops_full: BigUint,
    /// `log(flop)/log(N)`, the effective power of `N`.
    pub exponent: f64,
}

fn ln_big(x: &BigUint) -> f64 {
    // bits beyond f64 range are dropped and added back as a power of two
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn worst_case_curve(k: usize, max_omega: usize) -> Result<Vec<WorstCaseRow>> {
    if k < 2 {
        return Err(Error::InvalidInput("worst-case curve needs k ≥ 2".into()));
    }
    (1..=max_omega)
        .map(|omega| {
            let n = BigUint::from(k).pow(omega as u32);
            let fr = worst_case_flops(k, omega)?;
            let exponent = ln_big(&fr) / ln_big(&n);
            Ok(WorstCaseRow { omega, k, flops_full: n.pow(3), n, flops_recursive: fr, exponent })
        })
        .collect()
}
