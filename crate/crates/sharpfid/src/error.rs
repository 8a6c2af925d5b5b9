use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// Variants split into two families: bad inputs ([`Error::Invalid`]) and
/// numerical failures (everything else). [`Error::is_numerical`] tells them
/// apart, which is what the command-line front end maps onto exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("evidence is zero under both hypotheses; the post-data probability is undefined")]
    IndeterminateEvidence,

    #[error("component supports overlap on a set of positive measure")]
    SupportOverlap,

    #[error("zero mass: {0}")]
    ZeroMass(String),

    #[error("truncation region has negligible probability ({mass:e})")]
    ZeroRegionMass { mass: f64 },

    #[error("quadrature failed to converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    NonConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("no continuity root for tau in [0, {tau_max:e}]: G(0) = {g_zero:e}, G(tau_max) = {g_max:e}")]
    NoRoot {
        g_zero: f64,
        g_max: f64,
        tau_max: f64,
    },

    #[error("bracket does not straddle a root: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    BadBracket { f_lo: f64, f_hi: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("sigma slice [{lo}, {hi}) holds {count} chain points, need at least {required}")]
    InsufficientSlicePopulation {
        lo: f64,
        hi: f64,
        count: usize,
        required: usize,
    },

    #[error("chains are identical; the potential scale reduction is meaningless")]
    DegenerateChains,

    #[error("smoothing constant must be resolved before weights can be applied")]
    UnresolvedTau,
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Invalid { .. } | Error::EmptySample | Error::DegenerateChains
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("{p} is not in [0, 1]")))
    }
}

pub(crate) fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("{v} is not a positive finite number")))
    }
}

pub(crate) fn check_finite(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("{v} is not finite")))
    }
}
