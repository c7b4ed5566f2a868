use thiserror::Error;

use crate::busemann::VolumeProfile;
use crate::dynamics::Family;

/// Errors raised by the geometric and numerical routines of this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("points are not collinear (residual {residual:e})")]
    NonCollinear { residual: f64 },

    #[error("cross-ratio is infinite: an endpoint coincides with an inner point")]
    CoincidentEndpoints,

    #[error("points coincide")]
    CoincidentPoints,

    #[error("lines coincide")]
    CoincidentLines,

    #[error("conic does not have signature (2,1)")]
    DegenerateConic,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("point is not in the interior of the domain")]
    NotInterior,

    #[error("affine chart does not contain the closure of the domain")]
    InvalidChart,

    #[error("region reaches the boundary, where the density is not integrable")]
    NonIntegrable,

    #[error("no convergence: {reason}")]
    NonConvergent {
        reason: String,
        profile: Option<Box<VolumeProfile>>,
    },

    #[error("ideal triangle is degenerate")]
    DegenerateTriangle,

    #[error("a pic needs exactly one vertex on the boundary, found {0}")]
    BadPic(usize),

    #[error("transform preserves no properly convex open set")]
    NotConvexCompatible,

    #[error("operation does not apply to the {0:?} family")]
    WrongFamily(Family),

    #[error("transform does not preserve the domain")]
    DomainNotPreserved,

    #[error("no real logarithm for this transform and exponent")]
    NoRealLogarithm,

    #[error("cone is not proper")]
    NotProper,

    #[error("vector is not on the level set phi = 1 (phi = {phi})")]
    NotOnSigma { phi: f64 },

    #[error("transform fixes the base point")]
    FixedBasePoint,

    #[error("element {index} stabilizes the base point")]
    StabilizedBasePoint { index: usize },
}

impl Error {
    pub(crate) fn non_convergent(reason: impl Into<String>) -> Self {
        Error::NonConvergent {
            reason: reason.into(),
            profile: None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
