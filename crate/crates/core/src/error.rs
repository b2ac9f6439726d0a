use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("argument {value} outside [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },
    #[error("rejection sampler stuck after {0} consecutive rejections")]
    SamplerStuck(u64),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("conditioning failed: {0}")]
    Conditioning(String),
    #[error("non-finite value at site {site} (t = {t})")]
    BlowUp { site: usize, t: f64 },
    #[error("gradient blow-up at t = {t} (max gradient {gradient:.3e})")]
    PdeBlowUp { t: f64, gradient: f64 },
    #[error("stale hydrodynamic profile: state at t = {state}, profile at t = {profile}")]
    Staleness { state: f64, profile: f64 },
    #[error("need at least {need} replicas, got {got}")]
    InsufficientReplicas { got: usize, need: usize },
    #[error("unsupported Hermite polynomial order {0}")]
    UnsupportedHermite(u32),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("right-hand side not orthogonal to constants: {0}")]
    Compatibility(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Name of the subsystem an error originates from, used for provenance in reports.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Quadrature(_) | Error::Range { .. } | Error::InvalidPotential(_) => "potential_thermo",
            Error::InvalidParams(_) => "potential_thermo",
            Error::SamplerStuck(_) | Error::Resolution(_) | Error::Conditioning(_) => "gibbs_sampling",
            Error::BlowUp { .. } => "chain_dynamics",
            Error::PdeBlowUp { .. } => "psystem_solver",
            Error::Staleness { .. } | Error::InsufficientReplicas { .. } => "fluctuation_analysis",
            Error::UnsupportedHermite(_) | Error::Precondition(_) | Error::Compatibility(_) => "stat_verify",
            Error::Io(_) => "io",
        }
    }
}
