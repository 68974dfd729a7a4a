//! Zipf weight profiles, entropy bounds and query sampling.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::rng::{seeded, Stream};
use crate::tree::NodeId;
use crate::Result;

/// Zipf exponent used when none is given.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Tolerance on the sum of a profile's probabilities.
pub const PROFILE_TOLERANCE: f64 = 1e-12;

/// Search probability of every key, indexed by key rank.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    probs: Vec<f64>,
    seed: u64,
    alpha: f64,
}

impl WeightProfile {
    /// Zipf weights with popularity ranks scattered over keys by a seeded
    /// uniform permutation.
    ///
    /// Popularity rank `r` (1-based) gets relative weight `r^-alpha`.
    pub fn zipf(n: usize, alpha: f64, seed: u64) -> Result<Self> {
        let mut by_rank = zipf_by_rank(n, alpha)?;
        by_rank.shuffle(&mut seeded(seed, Stream::Permutation));
        Ok(WeightProfile {
            probs: by_rank,
            seed,
            alpha,
        })
    }

    /// Zipf weights with key `k` holding popularity rank `k + 1`.
    pub fn zipf_ranked(n: usize, alpha: f64) -> Result<Self> {
        Ok(WeightProfile {
            probs: zipf_by_rank(n, alpha)?,
            seed: 0,
            alpha,
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("profile needs at least one key"));
        }
        let p = 1.0 / n as f64;
        Ok(WeightProfile {
            probs: alloc::vec![p; n],
            seed: 0,
            alpha: 0.0,
        })
    }

    /// Normalizes arbitrary positive weights into a profile.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("profile needs at least one key"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and positive"));
        }
        Ok(WeightProfile {
            probs: normalized(weights.to_vec()),
            seed: 0,
            alpha: f64::NAN,
        })
    }

    /// Accepts probabilities as given, provided they already sum to 1.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("profile needs at least one key"));
        }
        if probs.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidArgument("probabilities must be finite and positive"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("probabilities must sum to 1"));
        }
        Ok(WeightProfile {
            probs,
            seed: 0,
            alpha: f64::NAN,
        })
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    #[inline]
    pub fn prob(&self, key: NodeId) -> f64 {
        self.probs[key.index()]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// NaN for profiles not generated from a Zipf law.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

fn zipf_by_rank(n: usize, alpha: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("profile needs at least one key"));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidArgument("zipf exponent must be positive"));
    }
    if n > NodeId::MAX_NODES {
        return Err(Error::TooLarge {
            n,
            cap: NodeId::MAX_NODES,
        });
    }
    let weights = (1..=n)
        .map(|r| if alpha == 1.0 { 1.0 / r as f64 } else { libm::pow(r as f64, -alpha) })
        .collect();
    Ok(normalized(weights))
}

fn normalized(mut weights: Vec<f64>) -> Vec<f64> {
    // Smallest terms first keeps the sum accurate for heavy-tailed weights.
    let total: f64 = weights.iter().rev().sum();
    for w in &mut weights {
        *w /= total;
    }
    weights
}

/// Shannon entropy in bits.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * libm::log2(p))
        .sum::<f64>()
}

/// Bounds on the cost of both the weight-balanced and the optimal tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehlhornBounds {
    pub lower: f64,
    pub upper: f64,
}

impl MehlhornBounds {
    pub fn contains(&self, cost: f64) -> bool {
        self.lower <= cost && cost <= self.upper
    }
}

/// Entropy above which the sharper lower bound applies.
const SHARP_LOWER_FROM: f64 = 14.5;

/// Cost bounds from entropy `h` (bits).
///
/// Lower: `h / log2(3)`, or `h + h log2 h - (h + 1) log2(h + 1)` when
/// `h >= 14.5` and that is larger. Upper: `2 + h / (1 - log2(sqrt(5) - 1))`.
pub fn mehlhorn_bounds(h: f64) -> Result<MehlhornBounds> {
    if !h.is_finite() || h < 0.0 {
        return Err(Error::InvalidArgument("entropy must be finite and non-negative"));
    }
    let mut lower = h / libm::log2(3.0);
    if h >= SHARP_LOWER_FROM {
        let sharp = h + h * libm::log2(h) - (h + 1.0) * libm::log2(h + 1.0);
        lower = lower.max(sharp);
    }
    let upper = 2.0 + h / (1.0 - libm::log2(libm::sqrt(5.0) - 1.0));
    Ok(MehlhornBounds { lower, upper })
}

/// Draws keys with probability given by a profile, by inverse CDF.
#[derive(Debug, Clone)]
pub struct QuerySampler {
    cumulative: Vec<f64>,
    rng: ChaCha8Rng,
}

impl QuerySampler {
    pub fn new(profile: &WeightProfile, seed: u64) -> Self {
        let mut acc = 0.0;
        let cumulative = profile
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        QuerySampler {
            cumulative,
            rng: seeded(seed, Stream::Queries),
        }
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn sample(&mut self) -> NodeId {
        let total = *self.cumulative.last().expect("profile is non-empty");
        let u = self.rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        NodeId::new(k.min(self.cumulative.len() - 1))
    }
}

impl Iterator for QuerySampler {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        Some(self.sample())
    }
}
