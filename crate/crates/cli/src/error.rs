use std::fmt;
use std::path::{Path, PathBuf};

use quadprop_core::Error as CoreError;

/// Everything that can stop a run, grouped by exit status.
#[derive(Debug)]
pub enum CliError {
    Config {
        file: Option<PathBuf>,
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },
    Numeric(String),
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            file: None,
            line: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn at_line(file: &Path, line: usize, message: impl Into<String>) -> Self {
        CliError::Config {
            file: Some(file.to_path_buf()),
            line: Some(line),
            column: None,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON object for the diagnostic stream.
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::Map::new();
        obj.insert("error".into(), self.kind().into());
        obj.insert("code".into(), self.exit_code().into());
        match self {
            CliError::Config {
                file,
                line,
                column,
                message,
            } => {
                if let Some(f) = file {
                    obj.insert("file".into(), f.display().to_string().into());
                }
                if let Some(l) = line {
                    obj.insert("line".into(), (*l).into());
                }
                if let Some(c) = column {
                    obj.insert("column".into(), (*c).into());
                }
                obj.insert("message".into(), message.clone().into());
            }
            CliError::Numeric(message) => {
                obj.insert("message".into(), message.clone().into());
            }
            CliError::Io { path, message } => {
                obj.insert("path".into(), path.display().to_string().into());
                obj.insert("message".into(), message.clone().into());
            }
        }
        serde_json::Value::Object(obj).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_line())
    }
}

impl std::error::Error for CliError {}

/// Parameter-level failures are configuration problems; everything the
/// integrator or quadrature raises is numeric.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::FamilyMismatch { .. }
            | CoreError::WidthMismatch { .. }
            | CoreError::EmptyRange(_)
            | CoreError::GridStart(_) => CliError::config(e.to_string()),
            CoreError::Eval(_)
            | CoreError::Ode(_)
            | CoreError::OutOfSpan { .. }
            | CoreError::Caustic { .. }
            | CoreError::Quadrature { .. } => CliError::Numeric(e.to_string()),
        }
    }
}
