use thiserror::Error;

/// Errors raised by the spectral toolkit and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-real spectrum (Hermitian defect {defect:.3e})")]
    NonRealSpectrum { defect: f64 },
    #[error("non-finite field samples")]
    NonFinite,
    #[error("invalid exponent: {0}")]
    InvalidExponent(f64),
    #[error("nonzero mean source (zero mode {0:.3e})")]
    NonzeroMeanSource(f64),
    #[error("empty band: {0}")]
    EmptyBand(String),
    #[error("scale out of band (m = {0})")]
    ScaleOutOfBand(i32),
    #[error("insufficient resolution: only {bands} dyadic band(s) resolved, need at least 3")]
    InsufficientResolution { bands: i32 },
    #[error("dyadic index {j} outside resolved range [{lo}, {hi}]")]
    BlockOutOfRange { j: i32, lo: i32, hi: i32 },
    #[error("band too wide: spectrum exceeds the alias-free band")]
    BandTooWide,
    #[error("aliasing risk: spectrum exceeds the dealiased band")]
    AliasingRisk,
    #[error("horizon uncovered: requested T = {requested}, series ends at {available}")]
    HorizonUncovered { requested: f64, available: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("divergent integrand: {0}")]
    DivergentIntegrand(String),
    #[error("quadrature did not converge (estimated error {0:.3e})")]
    QuadratureFailed(f64),
    #[error("negative time t = {0}")]
    NegativeTime(f64),
    #[error("cannot fit log: {0}")]
    CannotFitLog(String),
    #[error("nonzero mean inputs")]
    NonzeroMeanInputs,
    #[error("net charge: mean(v - w) = {0:.3e}")]
    NetCharge(f64),
    #[error("blow-up or instability at t = {time}")]
    Instability { time: f64 },
    #[error("CFL violated: dt = {dt} exceeds stability bound {bound}")]
    CflViolated { dt: f64, bound: f64 },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("observer failed at t = {time}: {message}")]
    ObserverFailed { time: f64, message: String },
    #[error("missing indices: {0}")]
    MissingIndices(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
