use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("direction index {index} out of range for a codebook with {len} directions")]
    DirectionOutOfRange { index: usize, len: usize },

    #[error("duplicate SCell id {0} in report list")]
    DuplicateScellId(u32),

    #[error("report table for SCell {scell_id} has {found} rows, expected {expected}")]
    RowCountMismatch {
        scell_id: u32,
        expected: usize,
        found: usize,
    },

    #[error("no SCell detected the UE in any direction")]
    NoCellAvailable,

    #[error("outage link has no finite pathloss")]
    OutageLink,

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
