//! Deterministic random numbers.
//!
//! The generator is xoshiro256** (Blackman and Vigna) with its 256-bit state
//! filled from the 64-bit seed by SplitMix64:
//!
//! ```text
//! splitmix64:  s += 0x9E3779B97F4A7C15
//!              z = (s ^ (s >> 30)) * 0xBF58476D1CE4E5B9
//!              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!              return z ^ (z >> 31)
//! xoshiro256**: result = rotl(s1 * 5, 7) * 9
//!              t = s1 << 17
//!              s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
//!              s2 ^= t;  s3 = rotl(s3, 45)
//! ```
//!
//! Uniform reals use the top 53 bits, so streams are identical on every
//! platform. Samplers:
//!
//! | distribution | method |
//! |---|---|
//! | Uniform(lo, hi) | `lo + (hi − lo)·u` |
//! | Normal(μ, σ) | Box-Muller, cosine branch only (two uniforms per draw) |
//! | Exponential(scale β) | inverse CDF `−β·ln(1 − u)` |
//! | Laplace(μ, b) | inverse CDF `μ − b·sgn(v)·ln(1 − 2|v|)`, `v = u − ½`, `u ∈ (0,1)` |
//! | Poisson(λ) | Knuth's product of uniforms |
//! | Binomial(n, p) | sum of `n` Bernoulli draws `u < p` |

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Prng {
    seed: u64,
    s: [u64; 4],
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { seed, s }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`. `n` must be nonzero.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_f64();
        mean + std * (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    }

    pub fn exponential(&mut self, scale: f64) -> f64 {
        -scale * (1.0 - self.next_f64()).ln()
    }

    pub fn laplace(&mut self, loc: f64, scale: f64) -> f64 {
        let v = self.next_open01() - 0.5;
        loc - scale * v.signum() * (1.0 - 2.0 * v.abs()).ln()
    }

    pub fn poisson(&mut self, lambda: f64) -> u64 {
        let limit = (-lambda).exp();
        let mut k = 0;
        let mut p = self.next_f64();
        while p > limit {
            k += 1;
            p *= self.next_f64();
        }
        k
    }

    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        (0..n).filter(|_| self.next_f64() < p).count() as u64
    }

    /// Draws `count` values from `dist`.
    pub fn sample(&mut self, dist: &DistSpec, count: usize) -> Result<Vec<f64>> {
        dist.validate()?;
        let out = (0..count)
            .map(|_| match *dist {
                DistSpec::Uniform { lo, hi } => self.uniform(lo, hi),
                DistSpec::Normal { mean, std } => self.normal(mean, std),
                DistSpec::Exponential { scale } => self.exponential(scale),
                DistSpec::Laplace { loc, scale } => self.laplace(loc, scale),
                DistSpec::Poisson { lambda } => self.poisson(lambda) as f64,
                DistSpec::Binomial { n, p } => self.binomial(n, p) as f64,
            })
            .collect();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistSpec {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Normal {
        mean: f64,
        std: f64,
    },
    /// Parameterized by scale (the mean), not rate.
    Exponential {
        scale: f64,
    },
    Laplace {
        loc: f64,
        scale: f64,
    },
    Poisson {
        lambda: f64,
    },
    Binomial {
        n: u64,
        p: f64,
    },
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistSpec::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
            DistSpec::Normal { mean, std } => mean.is_finite() && std.is_finite() && std > 0.0,
            DistSpec::Exponential { scale } => scale.is_finite() && scale > 0.0,
            DistSpec::Laplace { loc, scale } => loc.is_finite() && scale.is_finite() && scale > 0.0,
            // e^-λ must stay representable for the product-of-uniforms method
            DistSpec::Poisson { lambda } => lambda > 0.0 && lambda <= 500.0,
            DistSpec::Binomial { p, .. } => (0.0..=1.0).contains(&p),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistSpec::Normal { mean, .. } => mean,
            DistSpec::Exponential { scale } => scale,
            DistSpec::Laplace { loc, .. } => loc,
            DistSpec::Poisson { lambda } => lambda,
            DistSpec::Binomial { n, p } => n as f64 * p,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DistSpec::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            DistSpec::Normal { std, .. } => std * std,
            DistSpec::Exponential { scale } => scale * scale,
            DistSpec::Laplace { scale, .. } => 2.0 * scale * scale,
            DistSpec::Poisson { lambda } => lambda,
            DistSpec::Binomial { n, p } => n as f64 * p * (1.0 - p),
        }
    }
}
