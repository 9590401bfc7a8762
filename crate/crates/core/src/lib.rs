//! Photo time/location forensics from cast shadows.
//!
//! A vertical object and its shadow, annotated in a single image, give the
//! sun's altitude and azimuth. The claimed timestamp and location give them
//! again through an ephemeris. Large disagreement flags the claim as false.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod casefile;
pub mod cli;
pub mod ephemeris;
pub mod error;
pub mod harness;
pub mod shadow;
pub mod synth;
pub mod validate;

pub use camera::{CameraIntrinsics, CameraPose, PixelPoint, ProjectionMatrix, WorldPoint};
pub use ephemeris::{sun_position_from_context, ClaimedContext};
pub use error::{Error, Result};
pub use shadow::{
    infer_altitude, infer_azimuth, infer_sun_position, ShadowAnnotation, ShadowEstimate,
    SunPosition,
};
pub use validate::{validate, Rule, Thresholds, Verdict};
