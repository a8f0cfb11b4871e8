use thiserror::Error;

/// Errors reported by set construction, arithmetic, and the verification drivers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("set must be nonempty")]
    EmptySet,
    #[error("duplicate element {0}")]
    DuplicateElement(i64),
    #[error("value outside the supported 64-bit range")]
    Overflow,
    #[error("set diameter {diameter} exceeds the dense-representation limit {limit}")]
    DiameterTooLarge { diameter: u64, limit: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("affine span is the proper subgroup generated by {generator}, not the full group")]
    NotFullGroup { generator: u32 },
    #[error("lift hypothesis failed: {0}")]
    LiftHypothesis(String),
    #[error("desk-scale guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("FALSIFICATION: {0}")]
    Falsified(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
