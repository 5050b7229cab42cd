use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LottoError, Result};
use crate::single_field::{BlueStrategy, Component, MixedAllocation};

/// Plays per RNG stream. Fixed so the estimate does not depend on the thread count.
pub const BATCH_SIZE: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub num_plays: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(num_plays: u64, seed: u64) -> Result<Self> {
        if num_plays == 0 {
            return Err(LottoError::InvalidParameter {
                name: "num_plays",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(Self { num_plays, seed })
    }

    /// Three standard deviations of a win frequency in the worst case `p = 1/2`.
    pub fn three_sigma(&self) -> f64 {
        3.0 * (0.25 / self.num_plays as f64).sqrt()
    }
}

/// Draws one allocation: a component by weight, then a point from it.
pub fn sample_allocation<R: Rng + ?Sized>(alloc: &MixedAllocation, rng: &mut R) -> f64 {
    let comps = alloc.components();
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = comps[comps.len() - 1].1;
    for &(w, c) in comps {
        acc += w;
        if r < acc {
            chosen = c;
            break;
        }
    }
    match chosen {
        Component::Atom { point } => point,
        Component::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
    }
}

/// Plays one round and reports whether Blue wins.
fn play<R: Rng + ?Sized>(blue: &BlueStrategy, red: &MixedAllocation, u: f64, rng: &mut R) -> bool {
    let revealed = rng.random::<f64>() < u;
    let x = sample_allocation(red, rng);
    if revealed {
        rng.random::<f64>() < blue.call.eval(x)
    } else {
        sample_allocation(&blue.fallback, rng) >= x
    }
}

/// Number of Blue wins over `cfg.num_plays` independent rounds.
///
/// Rounds are split into batches of [`BATCH_SIZE`]; batch `i` uses ChaCha8
/// stream `i` seeded from `cfg.seed`, so the count is reproducible for any
/// rayon pool size.
pub fn monte_carlo_wins(blue: &BlueStrategy, red: &MixedAllocation, u: f64, cfg: &SimConfig) -> u64 {
    let batches = cfg.num_plays.div_ceil(BATCH_SIZE);
    (0..batches)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            let plays = BATCH_SIZE.min(cfg.num_plays - i * BATCH_SIZE);
            (0..plays).filter(|_| play(blue, red, u, &mut rng)).count() as u64
        })
        .sum()
}

/// Empirical win frequency of Blue.
pub fn monte_carlo_value(blue: &BlueStrategy, red: &MixedAllocation, u: f64, cfg: &SimConfig) -> f64 {
    monte_carlo_wins(blue, red, u, cfg) as f64 / cfg.num_plays as f64
}
