//! Seeded, purpose-tagged random streams.
//!
//! A run owns one master seed. Every consumer of randomness gets its own
//! stream derived from that seed by a fixed splitting rule:
//!
//! * the master seed is expanded into a ChaCha8 key with `seed_from_u64`;
//! * the stream's purpose selects the ChaCha stream id (see
//!   [`Purpose::stream_id`]).
//!
//! Streams with different purposes therefore never share keystream, and
//! changing how many minibatch draws a run makes cannot shift the directions
//! it samples. ChaCha8 output is specified bit for bit, so a given
//! `(seed, purpose)` produces the same draws on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    DirectionSampling,
    MinibatchSampling,
    OutputSelection,
    DataGeneration,
}

impl Purpose {
    pub const ALL: [Purpose; 4] =
        [Purpose::DirectionSampling, Purpose::MinibatchSampling, Purpose::OutputSelection, Purpose::DataGeneration];

    /// ChaCha stream id used for this purpose.
    pub fn stream_id(self) -> u64 {
        match self {
            Purpose::DirectionSampling => 1,
            Purpose::MinibatchSampling => 2,
            Purpose::OutputSelection => 3,
            Purpose::DataGeneration => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    purpose: Purpose,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(purpose.stream_id());
        RngStream { seed, purpose, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    /// Draws a seed for a child stream with the same purpose.
    pub fn child(&mut self) -> RngStream {
        let seed = self.inner.next_u64();
        RngStream::new(seed, self.purpose)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
