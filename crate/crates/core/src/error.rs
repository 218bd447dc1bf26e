use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("resource limit: {needed} states requested, budget is {budget}")]
    Resource { needed: u128, budget: u128 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("normalization failed: {0}")]
    Normalization(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
