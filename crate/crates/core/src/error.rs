use thiserror::Error;

use crate::linalg::LinalgError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("degenerate spectrum: minimal gap {gap:e} is below {threshold:e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },
    #[error("cannot pair right eigenvalue {index} with a unique left eigenvalue")]
    PairingAmbiguous { index: usize },
    #[error("eigenvalue assignment between samples {from} and {to} has a near tie")]
    TrackingAmbiguous { from: usize, to: usize },
    #[error("eigenvalue labels do not close over the loop")]
    NonCyclicLabels,
    #[error("left and right eigenvectors of mode {index} are nearly orthogonal")]
    SelfOrthogonal { index: usize },
    #[error("imaginary part {imag:e} of the real geometric phase of mode {mode} exceeds {tol:e}")]
    RealnessViolation { mode: usize, imag: f64, tol: f64 },
    #[error("{steps} integrator steps requested, at least {min} required")]
    StepCountTooSmall { steps: usize, min: usize },
    #[error("state norm {norm:e} at t = {time} exceeds the stability bound")]
    UnstableEvolution { time: f64, norm: f64 },
    #[error("overlap matrix of the off-mode right vectors is singular at t = {time}")]
    OverlapSingular { time: f64 },
    #[error(
        "resonance: I - M is singular (sigma_min {sigma_min:e}) and the drive has no periodic \
         response (residual {residual:e}); the W(T) = 1 case has no periodic solution"
    )]
    Resonance { sigma_min: f64, residual: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("mode {mode} out of range for dimension {dim}")]
    InvalidMode { mode: usize, dim: usize },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("at sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_sample(index: usize) -> impl FnOnce(Error) -> Error {
        move |e| Error::AtSample {
            index,
            source: Box::new(e),
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Strips `AtSample` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtSample { source, .. } => source.root(),
            e => e,
        }
    }
}
