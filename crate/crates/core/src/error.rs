use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside the domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("maximizer is not unique: candidates at {candidates:?}")]
    NonUniqueMaximizer { candidates: Vec<f64> },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
