use std::fmt;
use std::path::PathBuf;

use relax_core::RelaxError;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum CliError {
    Core(RelaxError),
    /// Unreadable input file.
    Read { path: PathBuf, source: std::io::Error },
    /// Failure writing the artifact.
    Write(std::io::Error),
    /// Inconsistent flags.
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Read { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            CliError::Write(e) => write!(f, "cannot write output: {e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<RelaxError> for CliError {
    fn from(e: RelaxError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 for output I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Write(_) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                RelaxError::Dimension(_) => "dimension",
                RelaxError::InvalidState(_) => "invalid_state",
                RelaxError::InvalidModel { .. } => "invalid_model",
                RelaxError::NotRelaxing { .. } => "not_relaxing",
                RelaxError::Domain(_) => "domain",
                RelaxError::SingularTarget { .. } => "singular_target",
                RelaxError::NotStabilizable { .. } => "not_stabilizable",
                RelaxError::DegenerateSpectrum { .. } => "degenerate_spectrum",
                RelaxError::NoStroboscopicFixedPoint { .. } => "no_stroboscopic_fixed_point",
                RelaxError::Json(_) => "parse",
            },
            CliError::Read { .. } => "io",
            CliError::Write(_) => "io",
            CliError::Usage(_) => "usage",
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Core(RelaxError::InvalidModel { field, .. }) => {
                v["field"] = json!(field);
            }
            CliError::Core(RelaxError::NotRelaxing {
                condition_number,
                spectral_abscissa,
                spectrum,
            }) => {
                v["condition_number"] = json!(condition_number);
                v["spectral_abscissa"] = json!(spectral_abscissa);
                v["spectrum"] = json!(spectrum.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
            }
            CliError::Core(RelaxError::NotStabilizable { residual }) => v["residual"] = json!(residual),
            CliError::Core(RelaxError::DegenerateSpectrum { gap }) => v["gap"] = json!(gap),
            CliError::Core(RelaxError::NoStroboscopicFixedPoint { condition_number }) => {
                v["condition_number"] = json!(condition_number)
            }
            CliError::Read { path, .. } => v["path"] = json!(path.display().to_string()),
            _ => {}
        }
        v
    }
}
