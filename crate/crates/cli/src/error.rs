use std::fmt;

/// An error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_PRECONDITION: u8 = 2;
pub const EXIT_EIGENSOLVER: u8 = 3;

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        CliError { code: EXIT_PRECONDITION, message: message.into() }
    }

    /// Prefixes the message with what was being done.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<varred::Error> for CliError {
    fn from(e: varred::Error) -> Self {
        use varred::Error as E;
        let code = match &e {
            E::Parse { .. } | E::InvalidWord { .. } | E::Io { .. } | E::Json(_) => EXIT_INPUT,
            E::QubitMismatch { .. }
            | E::InvalidCover(_)
            | E::InvalidDistribution(_)
            | E::Precondition(_)
            | E::Numerical(_) => EXIT_PRECONDITION,
            E::NotConverged { .. } => EXIT_EIGENSOLVER,
        };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub trait Context<T> {
    fn context(self, what: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<CliError>> Context<T> for Result<T, E> {
    fn context(self, what: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| e.into().context(what))
    }
}
