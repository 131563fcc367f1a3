use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Why an asymmetric equilibrium does not exist at a parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyViolation {
    /// `1 + u² − v² ≤ 0`: the field is too weak for any off-plane state.
    NoDeficit { d_squared: f64 },
    /// `|p_φ| ≥ p_max(u, v, M)`: the state has merged into the symmetric family.
    MomentumTooLarge { p_phi: f64, p_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("asymmetric family absent: {0:?}")]
    OutOfFamily(FamilyViolation),

    #[error("method {method} not applicable: {reason}")]
    MethodMismatch { method: &'static str, reason: String },

    #[error("series argument {arg} outside validated domain (bound {bound}); use bisection")]
    SeriesDomain { arg: f64, bound: f64 },

    #[error("series diverging at term {term} (ratio {ratio})")]
    Divergence { term: usize, ratio: f64 },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("cannot quantize {0}: no harmonic minimum")]
    Unstable(String),

    #[error("potential is singular at r = 0")]
    Singular,

    #[error("index error: {0}")]
    Index(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
