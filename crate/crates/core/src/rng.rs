//! SplitMix64, the portable generator behind every sampled event log.
//!
//! State update and output mix, so traces can be reproduced in any language:
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15            (wrapping)
//! z      = state
//! z      = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (wrapping)
//! z      = (z ^ (z >> 27)) * 0x94D049BB133111EB  (wrapping)
//! output = z ^ (z >> 31)
//! ```
//!
//! Uniforms on the open interval (0, 1) are `((output >> 11) + 0.5) / 2^53`.

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

    /// Uniform draw from the open unit interval.
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.open01() * n as f64) as usize).min(n.saturating_sub(1))
    }

    /// Poisson draw by CDF inversion; large means are split into chunks of
    /// at most 256 so the `exp(-mean)` start never underflows.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 || !mean.is_finite() {
            return 0;
        }
        let chunks = (mean / 256.0).ceil().max(1.0) as u64;
        let per = mean / chunks as f64;
        (0..chunks).map(|_| self.poisson_small(per)).sum()
    }

    fn poisson_small(&mut self, mean: f64) -> u64 {
        let u = self.open01();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf && k < 100_000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                break;
            }
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_outputs() {
        // Published SplitMix64 outputs for seed 1234567.
        let mut g = SplitMix64::new(1234567);
        let got: Vec<u64> = (0..3).map(|_| g.next_u64()).collect();
        assert_eq!(
            got,
            vec![6457827717110365317, 3203168211198807973, 9817491932198370423]
        );
    }

    #[test]
    fn open_interval() {
        let mut g = SplitMix64::new(0);
        for _ in 0..10_000 {
            let u = g.open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn poisson_mean() {
        let mut g = SplitMix64::new(9);
        let n = 20_000;
        let total: u64 = (0..n).map(|_| g.poisson(3.5)).sum();
        let mean = total as f64 / n as f64;
        assert!((mean - 3.5).abs() < 4.0 * (3.5f64 / n as f64).sqrt());
    }
}
