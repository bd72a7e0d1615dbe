use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Guidance velocity requested where the density has underflowed.
    #[error("node error: density {density:e} below floor at t = {t}")]
    Node { density: f64, t: f64 },

    #[error("unsupported wave variant: {0}")]
    UnsupportedVariant(String),

    #[error("resource error: {0}")]
    Resource(String),

    #[error("empty image: no coincidences accepted after {attempts} attempts")]
    EmptyImage { attempts: u64 },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short variant name, used on stderr by the CLI and by the C status codes.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Node { .. } => "NodeError",
            Error::UnsupportedVariant(_) => "UnsupportedVariant",
            Error::Resource(_) => "ResourceError",
            Error::EmptyImage { .. } => "EmptyImage",
            Error::Resolution(_) => "ResolutionError",
            Error::Numeric(_) => "NumericError",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }

    /// Process exit code: 2 config, 3 numeric, 4 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Resource(_) | Error::Io(_) => 4,
            _ => 3,
        }
    }
}
