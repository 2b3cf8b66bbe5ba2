use std::fmt;

/// An error tagged with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    error: anyhow::Error,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_LEARNER: u8 = 4;

impl CliError {
    pub fn config(msg: impl fmt::Display) -> Self {
        CliError { code: EXIT_CONFIG, error: anyhow::anyhow!("{msg}") }
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        CliError { code: EXIT_DATA, error: anyhow::anyhow!("{msg}") }
    }

    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        CliError { code: self.code, error: self.error.context(msg) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<confrule::Error> for CliError {
    fn from(e: confrule::Error) -> Self {
        use confrule::Error as E;
        let code = match e {
            E::InvalidConfig(_) | E::InvalidSpec(_) => EXIT_CONFIG,
            E::NoRuleFound { .. } => EXIT_LEARNER,
            _ => EXIT_DATA,
        };
        CliError { code, error: e.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: EXIT_DATA, error: e.into() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError { code: EXIT_DATA, error: e.into() }
    }
}
