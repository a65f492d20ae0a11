use thiserror::Error;

/// Errors shared across the quantization pipeline.
#[derive(Error, Debug)]
pub enum SdqError {
    #[error("point {point:?} lies outside the chart base box")]
    DomainError { point: Vec<f64> },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("algebra elements belong to different groupoid models")]
    ModelMismatch,

    #[error("algebra elements live at different hbar fibers ({0} vs {1})")]
    HbarMismatch(f64, f64),

    #[error("exponential image left the model neighbourhood: {0}")]
    OutOfNeighbourhood(String),

    #[error("band limit R = {r} too close to grid half-width L = {l}; aliasing")]
    Aliasing { r: f64, l: f64 },

    #[error("support containment violated: {0}")]
    SupportEscape(String),

    #[error("cutoff kappa engages for this element (hbar * support = {reach} > r_inner = {r_inner}); closed-form path requires kappa == 1 on the support")]
    KappaEngaged { reach: f64, r_inner: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_estimate}, residual {residual})")]
    PowerIterationNoConvergence {
        iterations: usize,
        last_estimate: f64,
        residual: f64,
    },

    #[error("non-finite value produced in {0}")]
    NonFinite(String),

    #[error("Richardson extrapolation diverged; raw sequence {0:?}")]
    ExtrapolationDiverged(Vec<f64>),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SdqError>;
