//! Seeded Monte-Carlo permutation machinery shared by the randomization tests.
//!
//! Every permutation draws from its own ChaCha8 stream: the generator is
//! seeded with the user seed and the stream number is the permutation index.
//! Results therefore do not depend on how the permutations are scheduled
//! across threads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Direction of the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alternative {
    #[default]
    Greater,
    Less,
    TwoSided,
}

impl Alternative {
    pub fn as_str(self) -> &'static str {
        match self {
            Alternative::Greater => "greater",
            Alternative::Less => "less",
            Alternative::TwoSided => "two-sided",
        }
    }
}

impl std::str::FromStr for Alternative {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
            other => Err(format!("unknown alternative `{other}`")),
        }
    }
}

/// Mean, standard deviation (n − 1 divisor), minimum and maximum of the
/// permuted statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl NullSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        NullSummary {
            mean,
            sd: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Generator for permutation `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniformly random permutation of `0..n` drawn from its own substream.
pub fn permutation(n: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(seed, index));
    order
}

/// Evaluate `stat` on `n_perm` random permutations of `0..n`, in parallel.
/// The output is ordered by permutation index.
pub fn null_distribution<F>(n: usize, n_perm: usize, seed: u64, stat: F) -> Vec<f64>
where
    F: Fn(&[usize]) -> f64 + Sync,
{
    (0..n_perm as u64)
        .into_par_iter()
        .map(|k| stat(&permutation(n, seed, k)))
        .collect()
}

/// `(m + 1) / (n_perm + 1)` where `m` counts permuted values at least as
/// extreme as the observed one. Two-sided extremeness is measured as the
/// distance to the null mean.
pub fn p_value(observed: f64, null: &[f64], alternative: Alternative) -> f64 {
    let eps = 1e-10 * observed.abs().max(1.0);
    let count = match alternative {
        Alternative::Greater => null.iter().filter(|&&s| s >= observed - eps).count(),
        Alternative::Less => null.iter().filter(|&&s| s <= observed + eps).count(),
        Alternative::TwoSided => {
            let center = null.iter().sum::<f64>() / null.len() as f64;
            let dev = (observed - center).abs();
            null.iter()
                .filter(|&&s| (s - center).abs() >= dev - eps)
                .count()
        }
    };
    (count + 1) as f64 / (null.len() + 1) as f64
}
