//! Sun position from one vertical object and its shadow.
//!
//! Three annotated pixels drive everything: the shadow tip `X1`, the object's
//! ground footprint `X2` and (optionally) the object's top `X3`. The tip and
//! footprint are back-projected onto the ground plane; the top is recovered
//! on the vertical line above the footprint. Altitude is the angle at the tip
//! between the ground vector `X1→X2` and the vector `X1→X3`; azimuth is the
//! compass bearing of `X1→X2`.

use serde::{Deserialize, Serialize};

use crate::camera::{
    check_pitch, normalize_degrees, CameraIntrinsics, CameraPose, PixelPoint, WorldPoint,
};
use crate::error::{Error, Result};

/// Relative size (in units of focal length) below which a denominator is zero.
const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SunPosition {
    /// Clockwise from north, `[0, 360)`.
    pub azimuth_deg: f64,
    /// Above the horizon, `(-90, 90]`.
    pub altitude_deg: f64,
}

impl SunPosition {
    pub fn new(azimuth_deg: f64, altitude_deg: f64) -> Self {
        Self {
            azimuth_deg: normalize_degrees(azimuth_deg),
            altitude_deg,
        }
    }
}

/// Shadow-inferred sun position. Either angle may be missing when the
/// annotation or camera metadata cannot support it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShadowEstimate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub azimuth_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub altitude_deg: Option<f64>,
}

impl From<SunPosition> for ShadowEstimate {
    fn from(sun: SunPosition) -> Self {
        Self {
            azimuth_deg: Some(sun.azimuth_deg),
            altitude_deg: Some(sun.altitude_deg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowAnnotation {
    pub shadow_tip: PixelPoint,
    pub object_base: PixelPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_top: Option<PixelPoint>,
}

impl ShadowAnnotation {
    pub fn new(
        shadow_tip: PixelPoint,
        object_base: PixelPoint,
        object_top: Option<PixelPoint>,
    ) -> Result<Self> {
        let ann = Self {
            shadow_tip,
            object_base,
            object_top,
        };
        ann.check()?;
        Ok(ann)
    }

    pub fn check(&self) -> Result<()> {
        let finite = |p: &PixelPoint| p.x.is_finite() && p.y.is_finite();
        if !finite(&self.shadow_tip)
            || !finite(&self.object_base)
            || !self.object_top.as_ref().is_none_or(finite)
        {
            return Err(Error::DegenerateAnnotation(
                "annotation coordinates must be finite".into(),
            ));
        }
        if self.shadow_tip == self.object_base {
            return Err(Error::DegenerateAnnotation(
                "shadow tip coincides with object base".into(),
            ));
        }
        if self.object_top == Some(self.object_base) {
            return Err(Error::DegenerateAnnotation(
                "object top coincides with object base".into(),
            ));
        }
        Ok(())
    }
}

fn is_degenerate(denominator: f64, focal_px: f64) -> bool {
    !(denominator.abs() >= DEGENERACY_TOLERANCE * focal_px)
}

/// `y' + f tanθ`, which vanishes on the horizon line and is negative for
/// pixels below it.
fn ground_denominator(y: f64, focal_px: f64, tan_pitch: f64, what: &str) -> Result<f64> {
    let d = y + focal_px * tan_pitch;
    if is_degenerate(d, focal_px) {
        return Err(Error::DegenerateAnnotation(format!(
            "{what} lies on the horizon line"
        )));
    }
    if d > 0.0 {
        return Err(Error::InconsistentAnnotation(format!(
            "{what} lies above the horizon and cannot be on the ground"
        )));
    }
    Ok(d)
}

/// Back-projects a pixel onto the ground plane `Y = -height`.
pub fn recover_ground_point(
    pt: PixelPoint,
    intr: &CameraIntrinsics,
    pitch_deg: f64,
    height: f64,
) -> Result<WorldPoint> {
    check_pitch(pitch_deg)?;
    if !(height.is_finite() && height > 0.0) {
        return Err(Error::Domain(format!(
            "camera height must be positive, got {height}"
        )));
    }
    let f = intr.focal_px();
    let (x, y) = intr.centered(pt);
    let theta = pitch_deg.to_radians();
    let (tan_t, cos_t) = (theta.tan(), theta.cos());

    let d = y + f * tan_t;
    if is_degenerate(d, f) {
        return Err(Error::DegenerateAnnotation(
            "pixel lies on the horizon line".into(),
        ));
    }
    let world = WorldPoint::new(
        height * -x / (cos_t * d),
        -height,
        height * (y * tan_t - f) / d,
    );
    if d > 0.0 || !(world.z > 0.0) {
        return Err(Error::InconsistentAnnotation(format!(
            "recovered ground point lies behind the camera (Z = {})",
            world.z
        )));
    }
    Ok(world)
}

/// Recovers the top of a vertical object standing on `base_world`.
pub fn recover_top_point(
    top: PixelPoint,
    base_world: WorldPoint,
    intr: &CameraIntrinsics,
    pitch_deg: f64,
) -> Result<WorldPoint> {
    check_pitch(pitch_deg)?;
    let f = intr.focal_px();
    let (_, y3) = intr.centered(top);
    let (sin_t, cos_t) = pitch_deg.to_radians().sin_cos();
    let den = f * cos_t - y3 * sin_t;
    if is_degenerate(den, f) {
        return Err(Error::DegenerateAnnotation(
            "object top projects parallel to the image plane".into(),
        ));
    }
    let y = base_world.z * (f * sin_t + y3 * cos_t) / den;
    Ok(WorldPoint::new(base_world.x, y, base_world.z))
}

/// Shadow-inferred altitude in degrees. Needs the pitch but not the yaw, and
/// does not depend on the camera height.
pub fn infer_altitude(
    ann: &ShadowAnnotation,
    intr: &CameraIntrinsics,
    pitch_deg: f64,
) -> Result<f64> {
    ann.check()?;
    check_pitch(pitch_deg)?;
    let top = ann
        .object_top
        .ok_or_else(|| Error::InsufficientAnnotation("altitude needs the object top".into()))?;
    let f = intr.focal_px();
    let (x1, y1) = intr.centered(ann.shadow_tip);
    let (x2, y2) = intr.centered(ann.object_base);
    let (_, y3) = intr.centered(top);
    let theta = pitch_deg.to_radians();
    let (sin_t, cos_t) = theta.sin_cos();
    let tan_t = theta.tan();

    let d1 = ground_denominator(y1, f, tan_t, "shadow tip")?;
    let d2 = ground_denominator(y2, f, tan_t, "object base")?;
    let top_den = f * cos_t - y3 * sin_t;
    if is_degenerate(top_den, f) {
        return Err(Error::DegenerateAnnotation(
            "object top projects parallel to the image plane".into(),
        ));
    }

    // Squared horizontal length of X1→X2 is m_a / m_b and squared height
    // of X3 above the ground is m_c / m_d (both in units of camera height).
    let lateral = f * (x1 - x2) * sin_t + (x1 * y2 - x2 * y1) * cos_t;
    let m_a = lateral.powi(2) + (f * (y2 - y1)).powi(2);
    let m_b = cos_t.powi(4) * (d1 * d2).powi(2);
    let m_c = (f * (y2 - y3)).powi(2);
    let m_d = ((f * sin_t + y2 * cos_t) * top_den).powi(2);

    if m_a == 0.0 && m_d == 0.0 {
        return Err(Error::DegenerateAnnotation(
            "shadow and object both collapse to a point".into(),
        ));
    }
    // arccos √(m_a m_d / (m_a m_d + m_b m_c)), written as an arctangent so
    // that altitudes near 0° and 90° keep full precision.
    let altitude_deg = (m_b * m_c).sqrt().atan2((m_a * m_d).sqrt()).to_degrees();
    if !(altitude_deg > 0.0 && altitude_deg < 90.0) {
        return Err(Error::SunBelowHorizon { altitude_deg });
    }
    Ok(altitude_deg)
}

/// Shadow-inferred azimuth, clockwise from north.
pub fn infer_azimuth(
    ann: &ShadowAnnotation,
    intr: &CameraIntrinsics,
    pose: &CameraPose,
) -> Result<f64> {
    ann.check()?;
    let f = intr.focal_px();
    let (x1, y1) = intr.centered(ann.shadow_tip);
    let (x2, y2) = intr.centered(ann.object_base);
    let theta = pose.pitch_deg().to_radians();
    let (sin_t, cos_t) = theta.sin_cos();
    let tan_t = theta.tan();

    // Both denominators are negative here, so X1→X2 is a positive multiple
    // of (lateral, 0, depth) and the signed angle needs no branch.
    ground_denominator(y1, f, tan_t, "shadow tip")?;
    ground_denominator(y2, f, tan_t, "object base")?;
    let depth = f * (y2 - y1);
    let lateral = f * (x1 - x2) * sin_t + (x1 * y2 - x2 * y1) * cos_t;
    if depth == 0.0 && lateral == 0.0 {
        return Err(Error::DegenerateAnnotation(
            "shadow has zero length on the ground".into(),
        ));
    }
    let clockwise_deg = lateral.atan2(depth).to_degrees();
    Ok(normalize_degrees(pose.yaw_deg() + clockwise_deg))
}

/// Azimuth always; altitude only when the object top is annotated.
pub fn infer_sun_position(
    ann: &ShadowAnnotation,
    intr: &CameraIntrinsics,
    pose: &CameraPose,
) -> Result<ShadowEstimate> {
    let azimuth_deg = infer_azimuth(ann, intr, pose)?;
    let altitude_deg = match ann.object_top {
        Some(_) => Some(infer_altitude(ann, intr, pose.pitch_deg())?),
        None => None,
    };
    Ok(ShadowEstimate {
        azimuth_deg: Some(azimuth_deg),
        altitude_deg,
    })
}
