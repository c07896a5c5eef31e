use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("particle count must be at least 1, got {0}")]
    NonPositiveN(i64),
    #[error("particle count {n} is below the minimum {min} for this quantity")]
    NTooSmall { n: usize, min: usize },
    #[error("particle count {n} exceeds the density-matrix cap of {cap}")]
    NTooLarge { n: usize, cap: usize },
    #[error("parameter `{0}` is not finite")]
    NonFiniteParameter(&'static str),
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("|kappa| must not exceed 1, got {0}")]
    InvalidKappa(f64),
    #[error(
        "volterra step {step} violates the stability guard (step * sqrt(f(0)) = {guard} >= 0.1)"
    )]
    StepTooLarge { step: f64, guard: f64 },
    #[error("memory kernel evaluation failed at u = {u}: {reason}")]
    KernelEvaluation { u: f64, reason: String },
    #[error("decoherence function has no zeros outside the strong-coupling regime")]
    NotOscillatory,
    #[error("denominator is negative ({0}); closed form is outside its domain")]
    NegativeDenominator(f64),
    #[error("<J^2> - N/2 = {0} is not positive")]
    DegenerateDenominator(f64),
    #[error("trace drifted by {0:e} during generator integration")]
    StepInstability(f64),
    #[error("tabulated kappa: {0}")]
    InvalidTable(String),
    #[error("time {t} lies outside the tabulated range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
