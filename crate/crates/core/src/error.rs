use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cluster cap infeasible: {k} clusters of at most {max_size} cannot hold {n} users")]
    InfeasibleCap { n: usize, k: usize, max_size: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("search space too large: {0}")]
    Size(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("drop with seed {seed:#018x} failed: {source}")]
    Drop {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by the user's configuration rather than by the run itself.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
