use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the range the model is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point is at or behind the camera plane (depth {depth})")]
    BehindCamera { depth: f64 },

    #[error("degenerate annotation: {0}")]
    DegenerateAnnotation(String),

    #[error("inconsistent annotation: {0}")]
    InconsistentAnnotation(String),

    #[error("insufficient annotation: {0}")]
    InsufficientAnnotation(String),

    /// Shadow-inferred altitude fell outside (0°, 90°).
    #[error("sun not visible: inferred altitude {altitude_deg:.6}° is outside (0, 90)")]
    SunBelowHorizon { altitude_deg: f64 },

    #[error("sun altitude {altitude_deg:.6}° casts no shadow")]
    NoShadow { altitude_deg: f64 },

    #[error("validation impossible: neither shadow altitude nor azimuth is available")]
    ValidationImpossible,

    #[error("invalid claimed context: {0}")]
    Context(String),

    #[error("scene infeasible: {0}")]
    SceneInfeasible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::BehindCamera { .. } => "behind_camera",
            Error::DegenerateAnnotation(_) => "degenerate_annotation",
            Error::InconsistentAnnotation(_) => "inconsistent_annotation",
            Error::InsufficientAnnotation(_) => "insufficient_annotation",
            Error::SunBelowHorizon { .. } => "sun_below_horizon",
            Error::NoShadow { .. } => "no_shadow",
            Error::ValidationImpossible => "validation_impossible",
            Error::Context(_) => "context",
            Error::SceneInfeasible(_) => "scene_infeasible",
            Error::Parse(_) => "parse",
        }
    }
}
