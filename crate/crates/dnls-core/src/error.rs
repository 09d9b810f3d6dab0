use alloc::string::String;

/// Failure modes of the scattering pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid contour: {0}")]
    Contour(String),
    #[error("trace data missing for arc {0}")]
    MissingTrace(usize),
    #[error("invalid potential: {0}")]
    Potential(String),
    #[error("Volterra march failed, achieved residual {0:e}")]
    Volterra(f64),
    #[error("spectral singularity proximity: |a| = {0:e}")]
    SpectralSingularity(f64),
    #[error("winding number not integral ({0})")]
    Winding(f64),
    #[error("no admissible cutoff on the grid; truncation domain too small")]
    NoCutoff,
    #[error("cutoff data not zero-free (winding {0})")]
    CutoffZeros(i64),
    #[error("regularizer Hermite system singular")]
    Hermite,
    #[error("near-singular RHP: sigma_min = {0:e}")]
    NearSingular(f64),
    #[error("evaluation point too close to the contour")]
    TooClose,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("left/right reconstructions disagree by {0:e} on the overlap")]
    Overlap(f64),
    #[error("Richardson extrapolation unstable")]
    Extrapolation,
}

pub type Result<T> = core::result::Result<T, Error>;
