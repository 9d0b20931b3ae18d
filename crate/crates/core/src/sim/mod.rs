//! Discrete-event simulation of swap-asap repeater chains.
//!
//! Every elementary link is generated by repeated heralded attempts; a
//! repeater swaps as soon as it holds a qubit on each side; qubits stored at
//! repeaters depolarize with the memory coherence time and are discarded
//! after the local cut-off. End nodes measure their qubits immediately, so
//! only repeater qubits decohere. One end-to-end pair is in flight at a time:
//! once both end nodes have heard every swap outcome the pair is delivered,
//! every slot is reset and generation restarts.

mod dump;
mod engine;
mod physics;

use thiserror::Error;

use crate::fibergrid::ChainConfiguration;
use crate::hardware::{HardwareError, HardwareParams};
use crate::scalar::{lit, to_f64, Scalar};

pub use dump::{format_records, parse_records, write_records, DumpError};
pub use engine::{run_chain, run_chain_bounded, run_chain_with_stats, SimOutcome, SimStats};
pub use physics::{attempt_duration, decohere_werner, link_success_prob, swap_werner};

/// Speed of light in fiber, km/s.
pub const LIGHT_SPEED_KM_S: f64 = 200_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("elementary link {link} has zero success probability")]
    ZeroSuccessProbability { link: usize },
    #[error("cut-off time must be positive, got {0}")]
    InvalidCutoff(f64),
    #[error("number of pairs must be at least 1")]
    NoPairs,
    #[error("light speed must be positive, got {0}")]
    InvalidLightSpeed(f64),
    #[error(transparent)]
    Hardware(#[from] HardwareError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Everything needed for one reproducible chain simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub config: ChainConfiguration<T>,
    pub params: HardwareParams<T>,
    /// Local cut-off in seconds; `T::infinity()` disables it.
    pub cutoff_time: T,
    pub num_pairs: usize,
    pub rng_seed: u64,
    /// Signal speed in fiber, km/s.
    pub light_speed: T,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(config: ChainConfiguration<T>, params: HardwareParams<T>, num_pairs: usize, rng_seed: u64) -> Self {
        Self {
            config,
            params,
            cutoff_time: T::infinity(),
            num_pairs,
            rng_seed,
            light_speed: lit(LIGHT_SPEED_KM_S),
        }
    }

    pub fn with_cutoff(mut self, cutoff_time: T) -> Self {
        self.cutoff_time = cutoff_time;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.cutoff_time > T::zero()) {
            return Err(SimError::InvalidCutoff(to_f64(self.cutoff_time)));
        }
        if self.num_pairs == 0 {
            return Err(SimError::NoPairs);
        }
        if !(self.light_speed > T::zero()) {
            return Err(SimError::InvalidLightSpeed(to_f64(self.light_speed)));
        }
        for (link, l) in self.config.links().iter().enumerate() {
            if !(link_success_prob(l.length_km, l.attenuation_db, &self.params) > T::zero()) {
                return Err(SimError::ZeroSuccessProbability { link });
            }
        }
        Ok(())
    }
}

/// One delivered end-to-end pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRecord<T> {
    pub werner: T,
    /// When both end nodes know the pair exists, seconds since start.
    pub delivery_time: T,
    /// Time since the previous delivery (or since start).
    pub generation_duration: T,
}

/// Independent seed number `stream` derived from `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    use rand::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.next_u64()
}
