use thiserror::Error;

/// Errors produced by the engines, the analysis layer and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a map or operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid model configuration (e.g. an odd bath size).
    #[error("configuration error: {0}")]
    Configuration(String),

    /// A problem in a configuration document, with its 1-based line when known.
    #[error("{}", fmt_config(*.line, .message))]
    Config { line: Option<usize>, message: String },

    /// A numerical failure: non-convergence or a violated state invariant.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_config(line: Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config error (line {l}): {message}"),
        None => format!("config error: {message}"),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: msg.into(),
        }
    }

    /// Process exit status for this error: 1 for configuration problems, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Configuration(_) | Error::Domain(_) => 1,
            Error::Numerical(_) | Error::Io { .. } => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
