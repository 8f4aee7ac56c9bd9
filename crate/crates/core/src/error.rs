use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Point shapes, space kinds or map kinds do not fit together.
    #[error("structural error: {0}")]
    Structural(String),
    /// A numeric argument lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),
    /// The space, schedule or context lacks a required capability.
    #[error("unsupported capability: {0}")]
    Unsupported(String),
    /// Exact integer arithmetic exceeded the representable range.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    /// A modulus was asked for an argument outside its explicit table.
    #[error("modulus `{label}` is not tabulated at {arg}")]
    Untabulated { label: String, arg: u128 },
    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    /// Errors that mean "the value is beyond what can be represented",
    /// which the verification harness reports as skipped rather than failed.
    pub fn is_beyond_budget(&self) -> bool {
        matches!(self, Error::Overflow(_) | Error::Untabulated { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! structural {
    ($($arg:tt)*) => { $crate::error::Error::Structural(alloc::format!($($arg)*)) };
}
pub(crate) use domain;
pub(crate) use structural;
