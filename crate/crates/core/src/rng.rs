//! Seeded random streams.
//!
//! Every random quantity is drawn from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`, with one independent stream per purpose selected through
//! `set_stream`. Normal variates use the ziggurat sampler of `rand_distr::StandardNormal`,
//! exponential variates `rand_distr::Exp1`, and uniform variates the standard 53-bit
//! `[0, 1)` conversion. These choices are fixed so that recorded traces stay reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a random stream derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Problem data and known solutions.
    Problem = 0,
    /// Initial dual points.
    Init = 1,
    /// Index sampling inside the solver.
    Sampling = 2,
    /// Sample points of the diagnostic estimators.
    Diagnostics = 3,
}

pub fn stream(seed: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}
