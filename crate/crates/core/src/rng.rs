//! Counter-based random streams.
//!
//! Each replication owns two independent uniform streams, one driving the
//! latent transitions and one driving the responses. A stream is a ChaCha8
//! keystream keyed by `(base seed, replication index)` and selected by a
//! stream id, so draw `t` of a given replication is a pure function of
//! `(seed, replication, stream, t)` and can be recomputed in isolation.

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one replication of a Monte Carlo experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReplicationSeed {
    pub base: u64,
    pub replication: u64,
}

impl ReplicationSeed {
    pub fn new(base: u64, replication: u64) -> Self {
        Self { base, replication }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.base.to_le_bytes());
        key[8..16].copy_from_slice(&self.replication.to_le_bytes());
        key[16..24].copy_from_slice(b"chgaccel");
        key
    }
}

/// Which of the two per-replication streams to draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamId {
    /// `U_t`: latent transitions (and `U_0` for the initial state).
    Latent = 0,
    /// `V_t`: responses.
    Response = 1,
}

/// Each uniform consumes one 64-bit output, i.e. two 32-bit ChaCha words.
const WORDS_PER_DRAW: u128 = 2;

/// A sequential reader over one counter-based stream of uniforms on (0, 1).
#[derive(Clone, Debug)]
pub struct CounterStream {
    rng: ChaCha8Rng,
}

impl CounterStream {
    pub fn new(seed: ReplicationSeed, stream: StreamId) -> Self {
        let mut rng = ChaCha8Rng::from_seed(seed.key());
        rng.set_stream(stream as u64);
        Self { rng }
    }

    /// Next uniform on the open interval (0, 1).
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    /// Index of the next draw.
    pub fn position(&self) -> u64 {
        (self.rng.get_word_pos() / WORDS_PER_DRAW) as u64
    }

    /// The `index`-th draw of a stream, computed without touching any other
    /// state.
    pub fn uniform_at(seed: ReplicationSeed, stream: StreamId, index: u64) -> f64 {
        let mut s = Self::new(seed, stream);
        s.rng.set_word_pos(index as u128 * WORDS_PER_DRAW);
        s.next_uniform()
    }
}
