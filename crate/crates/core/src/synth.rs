//! Seeded uniform-random draw histories.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ingest::{DrawHistory, DrawRecord, GameKind, GameSpec};

/// Name of the generator recorded in output metadata.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

/// `draws` independent uniform draws: uniform M-subsets of 1..=K for set
/// draws, independent uniform digits for digit games.
pub fn synth_history(spec: &GameSpec, draws: usize, seed: u64) -> Result<DrawHistory> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..draws)
        .map(|draw_index| {
            let numbers = match spec.kind {
                GameKind::SetDraw => {
                    let mut picked: Vec<u32> = sample(&mut rng, spec.pool, spec.picks)
                        .into_iter()
                        .map(|j| j as u32 + 1)
                        .collect();
                    picked.sort_unstable();
                    picked
                }
                GameKind::PositionalDigits => {
                    (0..spec.picks).map(|_| rng.gen_range(0..10)).collect()
                }
            };
            DrawRecord {
                draw_index,
                date: None,
                numbers,
            }
        })
        .collect();
    DrawHistory::new(spec.clone(), records)
}
