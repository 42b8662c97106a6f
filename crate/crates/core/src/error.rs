use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("root refinement did not converge: {0}")]
    RootConvergence(String),

    #[error("element is not a unit (field norm {norm})")]
    NotAUnit { norm: f64 },

    #[error("resource cap exceeded: {what} needs {needed} cells, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unbounded region: {0}")]
    Unbounded(String),

    #[error("elements are not coprime: {0}")]
    NotCoprime(String),

    #[error("numerically singular matrix: {0}")]
    Singular(String),

    #[error("verification mismatch: {0}")]
    Mismatch(String),

    #[error("preset error: {0}")]
    Preset(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::ResourceCap { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
