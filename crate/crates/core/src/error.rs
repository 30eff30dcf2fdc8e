use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular polarizability denominator (all decay rates and detunings vanish)")]
    SingularDenominator,

    #[error("Liouvillian is singular or ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("probe Rabi frequency is zero; use the weak-probe polarizability instead")]
    ZeroProbeRabi,

    #[error("quadrature did not converge after {evaluations} evaluations (last {last:?}, previous {previous:?})")]
    NonConvergence {
        evaluations: usize,
        last: [f64; 4],
        previous: [f64; 4],
    },

    #[error("root is not bracketed: f({lo:e}) = {f_lo:e}, f({hi:e}) = {f_hi:e}")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("signal slope {slope:e} is below the numerical noise floor {noise:e}; operating point unusable for slope detection")]
    FlatSlope { slope: f64, noise: f64 },

    #[error("Mandel parameter Q = {0} is below the physical bound -1")]
    MandelDomain(f64),

    #[error("empty probe volume: no atoms to average")]
    EmptyVolume,

    #[error("photon count was zero {0} times in a row; operating point too dim")]
    ResampleCap(usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("every grid point failed to evaluate")]
    AllPointsFailed,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
