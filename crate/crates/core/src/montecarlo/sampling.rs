use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StreamFactory;
use crate::ensemble::{velocity_distribution, AlphaEvaluator, GasParams, ResponseModel};
use crate::noise::{PhotonSampler, PhotonStatistics};
use crate::spectroscopy::FourLevelParams;
use crate::{Error, Result};

/// Consecutive zero draws tolerated before a trial gives up.
pub const RESAMPLE_CAP: usize = 1000;

/// Which mean the photon count is drawn around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonReference {
    /// Counts fluctuate around the incident mean `N̄_ph` and the signal is
    /// `a·χ̄_I − ln(ξ/N̄_ph)`.
    #[default]
    Incident,
    /// Counts fluctuate around the transmitted mean `N̄_ph·e^(−a·χ̄_I)` and the
    /// signal is `ln(N̄_ph/ξ)`. Exploratory only.
    Transmitted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub n_at_mean: f64,
    pub n_ph_mean: f64,
    pub stats: PhotonStatistics,
    pub mode: ResponseModel,
    pub reference: PhotonReference,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::invalid("trials", "need at least 2 trials"));
        }
        if !(self.n_at_mean > 0.0 && self.n_at_mean.is_finite()) {
            return Err(Error::invalid("n_at_mean", "must be finite and > 0"));
        }
        if !(self.n_ph_mean > 0.0 && self.n_ph_mean.is_finite()) {
            return Err(Error::invalid("n_ph_mean", "must be finite and > 0"));
        }
        self.stats.validate()
    }

    /// The linearized photon term is only trusted for `N̄_ph ≥ 1e3`.
    pub fn check_linearized(&self) -> Result<()> {
        if self.n_ph_mean < 1e3 {
            return Err(Error::invalid(
                "n_ph_mean",
                format!("linearized comparison needs N_ph >= 1e3, got {}", self.n_ph_mean),
            ));
        }
        Ok(())
    }
}

/// Samples the single-atom polarizability over thermal velocities.
#[derive(Debug, Clone, Copy)]
pub struct AtomicEnsemble {
    eval: AlphaEvaluator,
    sigma_v: f64,
    chi_scale: f64,
}

impl AtomicEnsemble {
    pub fn new(params: &FourLevelParams, gas: &GasParams, mode: ResponseModel) -> Result<Self> {
        gas.validate()?;
        Ok(Self {
            eval: AlphaEvaluator::new(params, mode)?,
            sigma_v: velocity_distribution(gas).sigma_v,
            chi_scale: gas.susceptibility_scale(),
        })
    }

    /// Every atom at rest: the susceptibility no longer fluctuates.
    pub fn frozen(mut self) -> Self {
        self.sigma_v = 0.0;
        self
    }

    pub fn sigma_v(&self) -> f64 {
        self.sigma_v
    }

    pub fn susceptibility_scale(&self) -> f64 {
        self.chi_scale
    }
}

/// Poisson draw of the number of atoms in the probe volume.
pub fn sample_atom_number<R: Rng + ?Sized>(rng: &mut R, n_at_mean: f64) -> Result<u64> {
    let d = Poisson::new(n_at_mean).map_err(|e| Error::invalid("n_at_mean", e.to_string()))?;
    Ok(d.sample(rng) as u64)
}

/// Sample-mean susceptibility `(n/ε₀)·(1/N)·Σα(v_i)` for `n_atoms` atoms.
pub fn sample_chi_bar<R: Rng + ?Sized>(rng: &mut R, n_atoms: u64, ensemble: &AtomicEnsemble) -> Result<Complex64> {
    if n_atoms == 0 {
        return Err(Error::EmptyVolume);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..n_atoms {
        let z: f64 = rng.sample(StandardNormal);
        sum += ensemble.eval.alpha(ensemble.sigma_v * z)?.to_complex();
    }
    Ok(sum * (ensemble.chi_scale / n_atoms as f64))
}

#[derive(Debug, Clone, Copy)]
enum PhotonDraw {
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    NegativeBinomial(Gamma<f64>),
    Deterministic(u64),
}

/// A photon-count distribution realizing a target mean and Mandel `Q`.
///
/// Sub-Poissonian light is a binomial with `p = −Q` and `round(N̄/p)` trials,
/// so the achieved mean differs from the target by rounding; both are kept.
#[derive(Debug, Clone, Copy)]
pub struct PhotonSource {
    draw: PhotonDraw,
    pub target_mean: f64,
    pub achieved_mean: f64,
    pub achieved_q: f64,
}

impl PhotonSource {
    pub fn new(n_ph_mean: f64, stats: PhotonStatistics) -> Result<Self> {
        stats.validate()?;
        if !(n_ph_mean > 0.0 && n_ph_mean.is_finite()) {
            return Err(Error::invalid(
                "n_ph_mean",
                format!("must be finite and > 0, got {n_ph_mean}"),
            ));
        }
        let q = stats.mandel_q;
        let bad = |e: &dyn std::fmt::Display| Error::invalid("n_ph_mean", e.to_string());
        let (draw, mean, achieved_q) = match stats.sampler() {
            PhotonSampler::Poisson => (
                PhotonDraw::Poisson(Poisson::new(n_ph_mean).map_err(|e| bad(&e))?),
                n_ph_mean,
                0.0,
            ),
            PhotonSampler::Deterministic => {
                let n = n_ph_mean.round().max(1.0);
                (PhotonDraw::Deterministic(n as u64), n, -1.0)
            }
            PhotonSampler::Binomial => {
                let p = -q;
                let trials = (n_ph_mean / p).round().max(1.0);
                let d = Binomial::new(trials as u64, p).map_err(|e| bad(&e))?;
                (PhotonDraw::Binomial(d), trials * p, q)
            }
            PhotonSampler::NegativeBinomial => {
                // Gamma–Poisson mixture with shape r = N̄/Q and scale Q.
                let shape = n_ph_mean / q;
                let d = Gamma::new(shape, q).map_err(|e| bad(&e))?;
                (PhotonDraw::NegativeBinomial(d), n_ph_mean, q)
            }
        };
        Ok(Self {
            draw,
            target_mean: n_ph_mean,
            achieved_mean: mean,
            achieved_q,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.draw {
            PhotonDraw::Poisson(d) => d.sample(rng) as u64,
            PhotonDraw::Binomial(d) => d.sample(rng),
            PhotonDraw::Deterministic(n) => *n,
            PhotonDraw::NegativeBinomial(g) => {
                let lambda = g.sample(rng);
                if lambda > 0.0 {
                    Poisson::new(lambda).map(|d| d.sample(rng) as u64).unwrap_or(0)
                } else {
                    0
                }
            }
        }
    }
}

/// One photon count with `Var(ξ) = N̄(1+Q)`.
pub fn sample_photon_count<R: Rng + ?Sized>(rng: &mut R, n_ph_mean: f64, stats: PhotonStatistics) -> Result<u64> {
    Ok(PhotonSource::new(n_ph_mean, stats)?.sample(rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSample {
    /// The extracted optical depth.
    pub s: f64,
    /// `a·χ̄_I`.
    pub atomic_term: f64,
    /// `ln(ξ/⟨ξ⟩)`, entering the signal with a minus sign.
    pub photon_term: f64,
    pub atoms: u64,
    pub photons: u64,
    pub atom_resamples: u32,
    pub photon_resamples: u32,
}

/// One trial of the optical-depth readout. Zero-atom and zero-photon draws
/// are redrawn and counted; more than [`RESAMPLE_CAP`] zero photon counts
/// in a row is an error.
pub fn simulate_signal<R: Rng + ?Sized>(
    rng: &mut R,
    config: &TrialConfig,
    ensemble: &AtomicEnsemble,
    photons: &PhotonSource,
    a: f64,
) -> Result<SignalSample> {
    let mut atom_resamples = 0u32;
    let atoms = loop {
        let n = sample_atom_number(rng, config.n_at_mean)?;
        if n > 0 {
            break n;
        }
        atom_resamples += 1;
        if atom_resamples as usize > RESAMPLE_CAP {
            return Err(Error::EmptyVolume);
        }
    };
    let chi = sample_chi_bar(rng, atoms, ensemble)?;
    let atomic_term = a * chi.im;

    let transmitted;
    let (source, reference_mean) = match config.reference {
        PhotonReference::Incident => (photons, photons.target_mean),
        PhotonReference::Transmitted => {
            let mean = photons.target_mean * (-atomic_term).exp();
            transmitted = PhotonSource::new(mean, config.stats)?;
            (&transmitted, mean)
        }
    };
    let mut photon_resamples = 0u32;
    let xi = loop {
        let xi = source.sample(rng);
        if xi > 0 {
            break xi;
        }
        photon_resamples += 1;
        if photon_resamples as usize >= RESAMPLE_CAP {
            return Err(Error::ResampleCap(RESAMPLE_CAP));
        }
    };
    let photon_term = (xi as f64 / reference_mean).ln();
    let s = match config.reference {
        PhotonReference::Incident => atomic_term - photon_term,
        PhotonReference::Transmitted => -(xi as f64 / photons.target_mean).ln(),
    };
    Ok(SignalSample {
        s,
        atomic_term,
        photon_term,
        atoms,
        photons: xi,
        atom_resamples,
        photon_resamples,
    })
}

/// Runs `config.trials` independent trials in parallel. Trial `i` always
/// uses stream `i` of `StreamFactory::new(config.seed, domain)`, and the
/// output is in trial order.
pub fn run_trials(config: &TrialConfig, ensemble: &AtomicEnsemble, a: f64, domain: u64) -> Result<Vec<SignalSample>> {
    config.validate()?;
    let photons = PhotonSource::new(config.n_ph_mean, config.stats)?;
    let factory = StreamFactory::new(config.seed, domain);
    let samples = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| simulate_signal(&mut factory.trial(i), config, ensemble, &photons, a))
        .collect::<Result<Vec<_>>>()?;
    let atom_resamples: u64 = samples.iter().map(|s| s.atom_resamples as u64).sum();
    let photon_resamples: u64 = samples.iter().map(|s| s.photon_resamples as u64).sum();
    if atom_resamples > 0 {
        log::warn!(
            "{atom_resamples} empty-volume draws redrawn (N_at mean {:e} is outside N_at >> 1)",
            config.n_at_mean
        );
    }
    if photon_resamples > 0 {
        log::warn!(
            "{photon_resamples} zero-photon draws redrawn (N_ph mean {:e})",
            config.n_ph_mean
        );
    }
    Ok(samples)
}

/// Draws reused by the tests below.
#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    StreamFactory::new(seed, 99).trial(0)
}
