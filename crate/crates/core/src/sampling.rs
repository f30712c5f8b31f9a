//! Seedable randomness: geometric epoch lengths, uniform minibatches and a
//! Monte-Carlo check of the geometrization identity.
//!
//! All draws come from ChaCha8 keyed by a 64-bit seed, so equal seeds give
//! identical sequences on every platform. Parallel runs use distinct ChaCha
//! stream ids under the same key instead of ad-hoc seed arithmetic.

use std::collections::HashSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, 0)
    }

    /// Independent stream `run_id` under `seed`.
    pub fn derive(seed: u64, run_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run_id);
        Self { seed, stream: run_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`: 53 random bits, centred.
    pub fn uniform_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

/// Parameter of `Geom(γ)`, `P(N = k) = (1 − γ)γ^k` for `k ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricParam(f64);

impl GeometricParam {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid("gamma", format!("must lie in [0, 1), got {gamma}")));
        }
        Ok(Self(gamma))
    }

    /// `γ = m / (m + b)`, the parameter with mean `m / b`.
    pub fn with_mean_ratio(m: f64, b: f64) -> Result<Self> {
        if !(m >= 0.0 && b > 0.0) {
            return Err(Error::invalid("gamma", format!("need m >= 0 and b > 0, got m = {m}, b = {b}")));
        }
        Self::new(m / (m + b))
    }

    pub fn gamma(&self) -> f64 {
        self.0
    }

    /// `E N = γ / (1 − γ)`.
    pub fn mean(&self) -> f64 {
        self.0 / (1.0 - self.0)
    }
}

/// Inverse-CDF draw `⌊ln U / ln γ⌋` with `U` uniform on `(0, 1)`.
pub fn sample_geometric(param: GeometricParam, rng: &mut RngStream) -> u64 {
    let gamma = param.gamma();
    if gamma == 0.0 {
        return 0;
    }
    let u = rng.uniform_open01();
    // Saturating cast; callers impose their own cap.
    (u.ln() / gamma.ln()).floor() as u64
}

/// `size` distinct indices drawn uniformly from `0..n`.
///
/// Uses a partial Fisher–Yates shuffle when `size/n > 0.1` and Floyd's
/// algorithm otherwise; both are exactly uniform over subsets.
pub fn sample_subset(n: usize, size: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if size == 0 || size > n {
        return Err(Error::InvalidSubsetSize { size, n });
    }
    if size == n {
        return Ok((0..n).collect());
    }
    if size as f64 > 0.1 * n as f64 {
        let mut pool: Vec<usize> = (0..n).collect();
        for k in 0..size {
            let j = k + rng.below(n - k);
            pool.swap(k, j);
        }
        pool.truncate(size);
        Ok(pool)
    } else {
        let mut chosen = Vec::with_capacity(size);
        let mut seen = HashSet::with_capacity(size);
        for j in n - size..n {
            let t = rng.below(j + 1);
            let pick = if seen.contains(&t) { j } else { t };
            seen.insert(pick);
            chosen.push(pick);
        }
        Ok(chosen)
    }
}

/// `size` i.i.d. uniform indices from `0..n` (repeats allowed).
pub fn sample_with_replacement(n: usize, size: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if size == 0 || n == 0 {
        return Err(Error::InvalidSubsetSize { size, n });
    }
    Ok((0..size).map(|_| rng.below(n)).collect())
}

/// How inner-loop minibatches are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinibatchMode {
    #[default]
    WithoutReplacement,
    WithReplacement,
}

impl MinibatchMode {
    pub fn sample(self, n: usize, size: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
        match self {
            MinibatchMode::WithoutReplacement => sample_subset(n, size, rng),
            MinibatchMode::WithReplacement => sample_with_replacement(n, size, rng),
        }
    }
}

/// Monte-Carlo estimate of both sides of
/// `E(D_N − D_{N+1}) = (1/γ − 1)(D_0 − E D_N)` for `N ~ Geom(γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrizationEstimate {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs|`
    pub gap: f64,
    /// Standard error of the per-draw difference whose mean is `lhs − rhs`.
    pub std_error: f64,
}

/// Estimates both sides of the geometrization identity for the sequence
/// `d(k)`. At `γ = 0` the right side is taken in its limit `D_0 − D_1`.
pub fn geometrization_identity<F>(d: F, gamma: f64, num_samples: usize, rng: &mut RngStream) -> Result<GeometrizationEstimate>
where
    F: Fn(u64) -> f64,
{
    let param = GeometricParam::new(gamma)?;
    if num_samples < 2 {
        return Err(Error::invalid("num_samples", "need at least two draws"));
    }
    let d0 = d(0);
    let factor = if gamma > 0.0 { 1.0 / gamma - 1.0 } else { 0.0 };
    let (mut sum_step, mut sum_dn) = (0.0, 0.0);
    let (mut mean_z, mut m2_z) = (0.0, 0.0);
    for t in 0..num_samples {
        let k = sample_geometric(param, rng);
        let (dn, dn1) = (d(k), d(k + 1));
        sum_step += dn - dn1;
        sum_dn += dn;
        let z = if gamma > 0.0 {
            (dn - dn1) - factor * (d0 - dn)
        } else {
            (dn - dn1) - (d0 - d(1))
        };
        // Welford
        let delta = z - mean_z;
        mean_z += delta / (t + 1) as f64;
        m2_z += delta * (z - mean_z);
    }
    let count = num_samples as f64;
    let lhs = sum_step / count;
    let rhs = if gamma > 0.0 {
        factor * (d0 - sum_dn / count)
    } else {
        d0 - d(1)
    };
    let std_error = (m2_z / (count - 1.0)).sqrt() / count.sqrt();
    Ok(GeometrizationEstimate {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        std_error,
    })
}

/// The gap `|Ê(D_N − D_{N+1}) − (1/γ − 1)(D_0 − Ê D_N)|`.
pub fn geometrization_identity_gap<F>(d: F, gamma: f64, num_samples: usize, rng: &mut RngStream) -> Result<f64>
where
    F: Fn(u64) -> f64,
{
    Ok(geometrization_identity(d, gamma, num_samples, rng)?.gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_zero_always_zero() {
        let mut rng = RngStream::new(1);
        let p = GeometricParam::new(0.0).unwrap();
        assert!((0..1000).all(|_| sample_geometric(p, &mut rng) == 0));
    }

    #[test]
    fn gamma_out_of_range() {
        assert!(GeometricParam::new(1.0).is_err());
        assert!(GeometricParam::new(-0.1).is_err());
        assert!(GeometricParam::new(f64::NAN).is_err());
    }

    #[test]
    fn subset_errors_and_full_set() {
        let mut rng = RngStream::new(3);
        assert!(sample_subset(5, 0, &mut rng).is_err());
        assert!(sample_subset(5, 6, &mut rng).is_err());
        assert_eq!(sample_subset(5, 5, &mut rng).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn subsets_are_distinct_and_in_range() {
        let mut rng = RngStream::new(11);
        for (n, size) in [(1000, 3), (1000, 500), (10, 9), (7, 1)] {
            for _ in 0..50 {
                let mut s = sample_subset(n, size, &mut rng).unwrap();
                assert_eq!(s.len(), size);
                s.sort_unstable();
                s.dedup();
                assert_eq!(s.len(), size);
                assert!(s.iter().all(|&i| i < n));
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, id| {
            let mut r = RngStream::derive(seed, id);
            (0..8).map(|_| r.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42, 0), draw(42, 0));
        assert_ne!(draw(42, 0), draw(42, 1));
        assert_ne!(draw(42, 0), draw(43, 0));
    }

    #[test]
    fn identity_is_exact_for_constant_sequences() {
        let mut rng = RngStream::new(5);
        for gamma in [0.0, 0.3, 0.9] {
            let est = geometrization_identity(|_| 2.5, gamma, 1000, &mut rng).unwrap();
            assert_eq!(est.gap, 0.0);
        }
    }
}
