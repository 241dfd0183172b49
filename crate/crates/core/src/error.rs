//! Error codes shared by every module.

use std::fmt;

use serde::Serialize;

/// Machine-readable failure category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    NotGraded,
    NotMonotone,
    BadHasse,
    SpadeViolation,
    NoInteriorU,
    BoxTooLarge,
    DimCapExceeded,
    Singular,
    NotSquare,
    AxiomFail,
    EquationFail,
    DualFail,
    ValuationFail,
    RankFail,
    GenerationGap,
    OrdFail,
    UnimodularityFail,
    PatternFail,
    Unsupported,
    Inconclusive,
    BadInput,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("code serializes");
        f.write_str(s.as_str().unwrap_or("UNKNOWN"))
    }
}

#[derive(Debug, Clone, thiserror::Error, Serialize)]
#[error("{code}: {message}")]
pub struct Error {
    pub code: Code,
    pub message: String,
}

impl Error {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Error { code, message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! bail {
    ($code:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::new($crate::error::Code::$code, format!($($arg)*)))
    };
}
pub(crate) use bail;
