use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] jsloss::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0} claim(s) out of tolerance")]
    Tolerance(usize),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 1 for failed checks and runs, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        use jsloss::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::InvalidLossSpec(_)
                | E::InvalidConfig(_)
                | E::InvalidNoiseRate { .. }
                | E::InvalidNoiseSpec(_)
                | E::InvalidDataset(_)
                | E::InvalidModel(_)
                | E::TruncatedFile { .. }
                | E::InvalidLabel { .. },
            ) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
