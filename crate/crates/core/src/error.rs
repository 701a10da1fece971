use thiserror::Error;

/// Every failure the pipeline can report. Stage errors carry enough context to
/// reproduce the offending evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("root not bracketed on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e} ({what})")]
    NotBracketed {
        a: f64,
        b: f64,
        fa: f64,
        fb: f64,
        what: &'static str,
    },

    #[error("root finder exhausted its iteration budget ({what})")]
    RootBudget { what: &'static str },

    #[error("pressure law condition violated at rho = {rho}: {which}")]
    Condition { rho: f64, which: String },

    #[error("equation of state out of range at rho = {rho}: {which}")]
    EosRange { rho: f64, which: String },

    #[error("Bernoulli closure infeasible at rho = {rho} (gamma = {gamma})")]
    Bernoulli { rho: f64, gamma: f64 },

    #[error("no sonic point on the density interval [{lo}, {hi}]")]
    NoSonicPoint { lo: f64, hi: f64 },

    #[error("t = {t} outside the table range [0, {t_max}]")]
    TableRange { t: f64, t_max: f64 },

    #[error("boundary hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("corner data inconsistent: {0}")]
    Corner(String),

    #[error("solver domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iters} iterations (last ratios {ratios:?})")]
    NoConvergence { iters: usize, ratios: Vec<f64> },

    #[error("positivity guard failed: {0}")]
    Positivity(String),

    #[error("inverse map: {0}")]
    Inverse(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("verification: {0}")]
    Verify(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
