//! SplitMix64, the draw stream used for RMSE evaluation.
//!
//! The generator is fully defined by three published constants, so the same
//! seed produces the same test points in any language.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lower: f64, upper: f64) -> f64 {
        lower + (upper - lower) * self.next_f64()
    }
}

/// Per-case seed: `seed XOR case_id·0x9E3779B97F4A7C15`.
pub fn case_seed(seed: u64, case_id: usize) -> u64 {
    seed ^ (case_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
