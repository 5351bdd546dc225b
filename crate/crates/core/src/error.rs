use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = RelaxError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RelaxError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid model at `{field}`: {reason}")]
    InvalidModel { field: String, reason: String },

    /// `A + B` is singular to working precision; carries its spectrum for diagnosis.
    #[error("generator is not relaxing (condition number {condition_number:.3e}, spectral abscissa {spectral_abscissa:.3e})")]
    NotRelaxing {
        condition_number: f64,
        spectral_abscissa: f64,
        spectrum: Vec<Complex64>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("target has z = {z:.3e}; the closed-form controller is singular there")]
    SingularTarget { z: f64 },

    #[error("target is not stabilizable (residual {residual:.3e})")]
    NotStabilizable { residual: f64 },

    #[error("fixed-point spectrum is degenerate (minimum eigenvalue gap {gap:.3e})")]
    DegenerateSpectrum { gap: f64 },

    #[error("pulse-train period map has no unique fixed point (condition number {condition_number:.3e})")]
    NoStroboscopicFixedPoint { condition_number: f64 },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl RelaxError {
    pub(crate) fn model(field: impl Into<String>, reason: impl Into<String>) -> Self {
        RelaxError::InvalidModel {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            RelaxError::NotRelaxing { .. }
                | RelaxError::SingularTarget { .. }
                | RelaxError::NotStabilizable { .. }
                | RelaxError::DegenerateSpectrum { .. }
                | RelaxError::NoStroboscopicFixedPoint { .. }
        )
    }
}
