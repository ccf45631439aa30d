//! Counter-based random streams.
//!
//! A [`RandomStream`] is an immutable `(seed, id)` descriptor. Each id selects
//! an independent ChaCha8 stream under the same key, so a simulation that gives
//! every trial its own id produces the same draws no matter how trials are
//! scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::special::normal_quantile;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, id: u64) -> Self {
        Self { seed, id }
    }

    /// A fresh cursor positioned at the start of this stream.
    pub fn cursor(&self) -> StreamCursor {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.id);
        StreamCursor { rng }
    }
}

/// Caller-held position within a [`RandomStream`].
#[derive(Debug, Clone)]
pub struct StreamCursor {
    rng: ChaCha8Rng,
}

impl StreamCursor {
    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform on the open interval (0, 1).
    pub fn open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    /// Standard normal by inversion; exactly one underlying draw per variate.
    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.open_uniform())
    }

    /// Uniform integer in `0..n` (n ≥ 1), by 128-bit multiply-shift.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

/// The first `n` uniforms of `stream`.
pub fn stream_uniform(stream: RandomStream, n: usize) -> Vec<f64> {
    let mut c = stream.cursor();
    (0..n).map(|_| c.uniform()).collect()
}
