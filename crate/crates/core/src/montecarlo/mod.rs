//! Direct simulation of the discrete-atom readout.
//!
//! Each trial draws a Poisson atom number, one Maxwell–Boltzmann velocity per
//! atom and a photon count, and forms `S = a·χ̄_I − ln(ξ/N̄_ph)`. Trials use
//! independent ChaCha8 streams keyed by `(seed, domain)` and selected by the
//! trial index, so results do not depend on how trials are scheduled.

mod estimate;
mod sampling;
mod validate;

pub use estimate::{
    covariance, estimate_variance, estimate_variance_with, sample_stats, CiMethod, SampleStats, VarianceEstimate,
};
pub use sampling::{
    run_trials, sample_atom_number, sample_chi_bar, sample_photon_count, simulate_signal, AtomicEnsemble,
    PhotonReference, PhotonSource, SignalSample, TrialConfig,
};
pub use validate::{fit_slope, validate_scaling, ScalingPointReport, ScalingReport, ScalingValidation};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-trial random streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    /// `domain` separates independent experiments sharing a seed (for
    /// example the points of a validation grid).
    pub fn new(seed: u64, domain: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        key[16..24].copy_from_slice(b"agn-mc-1");
        Self { key }
    }

    pub fn trial(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }
}
