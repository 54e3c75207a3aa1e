use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// The CLI maps these onto exit codes, see [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} = {value} exceeds the available range (limit {limit})")]
    Range { what: &'static str, value: f64, limit: f64 },

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("requested accuracy {requested:e} unattainable, best estimate {achieved:e}")]
    Accuracy { requested: f64, achieved: f64 },

    #[error("|zeta(s)| = {modulus:e} is too close to zero for a reliable quotient")]
    NearZero { modulus: f64 },

    #[error("resonator coefficient r(p) = {rp} >= 1, the product diverges")]
    Divergence { rp: f64 },

    #[error("step {step:e} does not resolve oscillation (need <= {required:e})")]
    Resolution { step: f64, required: f64 },

    #[error("main term X^(1-sigma)/(1-sigma) is singular at sigma = 1")]
    SingularMainTerm,

    #[error("no feasible kappa: constraint ({constraint}) is binding")]
    Infeasible { constraint: &'static str },

    #[error("sampler accepted no proposals in {proposals} steps")]
    SamplerStall { proposals: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Range { .. } | Error::SingularMainTerm => 2,
            Error::Infeasible { .. } => 4,
            _ => 3,
        }
    }
}
