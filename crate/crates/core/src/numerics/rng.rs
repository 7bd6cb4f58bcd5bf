use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A seeded, replayable random stream.
///
/// Identical `(seed, stream_id)` pairs produce byte-identical sequences;
/// distinct stream ids give statistically independent streams off the same
/// seed. Every agent, the parameter initializer, and the minibatch shuffler
/// each own exactly one stream, which is what makes whole training runs
/// reproducible and resumable.
///
/// Backed by ChaCha8, a counter-based generator: the exact position in the
/// stream is a single word offset, so checkpoints can capture and restore it.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw from `[lo, hi)`. A degenerate interval (`lo == hi`)
    /// returns `lo`; the underlying draw is still consumed so replay stays
    /// aligned with the non-degenerate case.
    pub fn sample_uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(Error::Contract(format!(
                "sample_uniform: lo {lo} > hi {hi}"
            )));
        }
        let u: f64 = self.rng.random();
        Ok(lo + u * (hi - lo))
    }

    /// Draw from `N(mean, std^2)`.
    pub fn sample_gaussian(&mut self, mean: f64, std: f64) -> Result<f64> {
        if !(std > 0.0) {
            return Err(Error::Contract(format!(
                "sample_gaussian: std {std} must be positive"
            )));
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        Ok(mean + std * z)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// Serialized form: the defining pair plus the exact word position, split
/// into two u64 halves so every serializer handles it.
#[derive(Serialize, Deserialize)]
struct RngStreamState {
    seed: u64,
    stream_id: u64,
    word_pos_hi: u64,
    word_pos_lo: u64,
}

impl Serialize for RngStream {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pos = self.rng.get_word_pos();
        RngStreamState {
            seed: self.seed,
            stream_id: self.stream_id,
            word_pos_hi: (pos >> 64) as u64,
            word_pos_lo: pos as u64,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RngStream {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let state = RngStreamState::deserialize(deserializer)?;
        let mut stream = RngStream::new(state.seed, state.stream_id);
        let pos = ((state.word_pos_hi as u128) << 64) | state.word_pos_lo as u128;
        stream.rng.set_word_pos(pos);
        Ok(stream)
    }
}
