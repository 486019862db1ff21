//! Recovery of sparse measures by approximate subgradient descent on the
//! energy distance.
//!
//! * [`measures`]: uniform measures on the line and W∞ transport.
//! * [`energy`]: the energy distance, its subgradient and particle descent.
//! * [`fourier`]: Fourier moments and the truncated sign series.
//! * [`superres`]: recovery of spikes on `[0, π]` from finitely many moments.
//! * [`highdim`]: coordinate-wise recovery and gluing in `d` dimensions.
//! * [`neural`]: a two-dimensional zero-one network whose loss is an energy distance.

pub mod energy;
pub mod error;
pub mod measures;

pub use error::{RecoveryError, Result};
pub mod fourier;
pub mod highdim;
pub mod neural;
pub mod superres;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout: ChaCha with 8 rounds, seeded from a `u64`.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
