//! Pinhole camera with zero skew, square pixels and zero roll.
//!
//! The world frame is centred on the camera: `X` to the right, `Y` vertical
//! (up) and `Z` along the level image direction. The ground plane sits at
//! `Y = -height`. The camera is pitched about `X` by `pitch_deg`.
//!
//! Public pixel coordinates are the usual top-left / y-down image frame. The
//! projection matrix itself works in a y-up frame, so [`ProjectionMatrix::project`]
//! flips the vertical axis around the principal point on the way out.

use nalgebra::{Matrix3, Matrix3x4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open interval of accepted camera pitch, in degrees.
pub const PITCH_LIMIT_DEG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_homogeneous(self) -> Vector4<f64> {
        Vector4::new(self.x, self.y, self.z, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    focal_px: f64,
    principal_point: (f64, f64),
    image_size: (u32, u32),
}

impl CameraIntrinsics {
    /// Intrinsics with the principal point at the image centre.
    pub fn new(focal_px: f64, width: u32, height: u32) -> Result<Self> {
        Self::with_principal_point(
            focal_px,
            width,
            height,
            (f64::from(width) / 2.0, f64::from(height) / 2.0),
        )
    }

    pub fn with_principal_point(
        focal_px: f64,
        width: u32,
        height: u32,
        principal_point: (f64, f64),
    ) -> Result<Self> {
        if !(focal_px.is_finite() && focal_px > 0.0) {
            return Err(Error::Domain(format!(
                "focal length must be positive, got {focal_px}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::Domain(format!(
                "image size must be positive, got {width}x{height}"
            )));
        }
        if !(principal_point.0.is_finite() && principal_point.1.is_finite()) {
            return Err(Error::Domain("principal point must be finite".into()));
        }
        Ok(Self {
            focal_px,
            principal_point,
            image_size: (width, height),
        })
    }

    pub fn focal_px(&self) -> f64 {
        self.focal_px
    }

    pub fn principal_point(&self) -> (f64, f64) {
        self.principal_point
    }

    pub fn image_size(&self) -> (u32, u32) {
        self.image_size
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        let (u0, v0) = self.principal_point;
        let f = self.focal_px;
        Matrix3::new(f, 0.0, u0, 0.0, f, v0, 0.0, 0.0, 1.0)
    }

    /// Offsets from the principal point with the vertical axis pointing up.
    pub fn centered(&self, pt: PixelPoint) -> (f64, f64) {
        let (u0, v0) = self.principal_point;
        (pt.x - u0, v0 - pt.y)
    }

    /// Inverse of [`CameraIntrinsics::centered`].
    pub fn uncentered(&self, x: f64, y: f64) -> PixelPoint {
        let (u0, v0) = self.principal_point;
        PixelPoint::new(x + u0, v0 - y)
    }

    pub fn contains(&self, pt: PixelPoint) -> bool {
        let (w, h) = self.image_size;
        (0.0..=f64::from(w)).contains(&pt.x) && (0.0..=f64::from(h)).contains(&pt.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pitch_deg: f64,
    yaw_deg: f64,
    height: f64,
}

impl CameraPose {
    pub fn new(pitch_deg: f64, yaw_deg: f64, height: f64) -> Result<Self> {
        check_pitch(pitch_deg)?;
        if !yaw_deg.is_finite() {
            return Err(Error::Domain(format!("yaw must be finite, got {yaw_deg}")));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::Domain(format!(
                "camera height must be positive, got {height}"
            )));
        }
        Ok(Self {
            pitch_deg,
            yaw_deg: normalize_degrees(yaw_deg),
            height,
        })
    }

    /// Level camera one unit above the ground, facing `yaw_deg`.
    pub fn level(yaw_deg: f64) -> Result<Self> {
        Self::new(0.0, yaw_deg, 1.0)
    }

    pub fn pitch_deg(&self) -> f64 {
        self.pitch_deg
    }

    pub fn yaw_deg(&self) -> f64 {
        self.yaw_deg
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}

/// Wraps an angle into `[0, 360)`.
pub fn normalize_degrees(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

pub fn check_pitch(pitch_deg: f64) -> Result<()> {
    if pitch_deg.is_finite() && pitch_deg.abs() < PITCH_LIMIT_DEG {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "pitch must lie in (-{PITCH_LIMIT_DEG}, {PITCH_LIMIT_DEG}) degrees, got {pitch_deg}"
        )))
    }
}

/// Rotation about the world `X` axis by the camera pitch.
pub fn rotation_matrix(pitch_deg: f64) -> Result<Matrix3<f64>> {
    check_pitch(pitch_deg)?;
    let (s, c) = pitch_deg.to_radians().sin_cos();
    Ok(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMatrix {
    matrix: Matrix3x4<f64>,
    principal_point: (f64, f64),
}

/// `P = K R [I | 0]`.
pub fn projection_matrix(intr: &CameraIntrinsics, pitch_deg: f64) -> Result<ProjectionMatrix> {
    let rotation = rotation_matrix(pitch_deg)?;
    let kr = intr.matrix() * rotation;
    let mut matrix = Matrix3x4::zeros();
    matrix.fixed_view_mut::<3, 3>(0, 0).copy_from(&kr);
    Ok(ProjectionMatrix {
        matrix,
        principal_point: intr.principal_point(),
    })
}

impl ProjectionMatrix {
    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.matrix
    }

    /// Projects a world point and converts the result to y-down pixels.
    pub fn project(&self, pt: WorldPoint) -> Result<PixelPoint> {
        self.project_homogeneous(&pt.to_homogeneous())
    }

    /// Projects an arbitrary homogeneous world point `[X, Y, Z, W]`.
    pub fn project_homogeneous(&self, pt: &Vector4<f64>) -> Result<PixelPoint> {
        let h = self.matrix * pt;
        // Depth sign must be judged on the dehomogenized point.
        let depth = h.z * pt.w.signum();
        if !(depth > 0.0) {
            return Err(Error::BehindCamera { depth });
        }
        let u = h.x / h.z;
        let v_up = h.y / h.z;
        let (_, v0) = self.principal_point;
        Ok(PixelPoint::new(u, 2.0 * v0 - v_up))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dataset_intrinsics() -> CameraIntrinsics {
        CameraIntrinsics::with_principal_point(3351.6, 4032, 3024, (2016.0, 1512.0)).unwrap()
    }

    #[test]
    fn zero_pitch_is_identity() {
        assert_eq!(rotation_matrix(0.0).unwrap(), Matrix3::identity());
    }

    #[test]
    fn pitch_out_of_range_rejected() {
        for bad in [45.0, -45.0, 90.0, f64::NAN] {
            assert!(matches!(rotation_matrix(bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn rotation_at_twenty_degrees() {
        let r = rotation_matrix(20.0).unwrap();
        let (s, c) = (20f64.to_radians().sin(), 20f64.to_radians().cos());
        let expected = Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c);
        assert_abs_diff_eq!(r, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(r.transpose() * r, Matrix3::identity(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_pitch_projection_closed_form() {
        let intr = dataset_intrinsics();
        let p = projection_matrix(&intr, 0.0).unwrap();
        let expected = Matrix3x4::new(
            3351.6, 0.0, 2016.0, 0.0, //
            0.0, 3351.6, 1512.0, 0.0, //
            0.0, 0.0, 1.0, 0.0,
        );
        assert_eq!(*p.matrix(), expected);
    }

    #[test]
    fn projection_matches_expanded_form() {
        let intr = dataset_intrinsics();
        let (f, u0, v0) = (3351.6, 2016.0, 1512.0);
        let (s, c) = 10f64.to_radians().sin_cos();
        let expected = Matrix3x4::new(
            f,
            u0 * s,
            u0 * c,
            0.0,
            0.0,
            f * c + v0 * s,
            v0 * c - f * s,
            0.0,
            0.0,
            s,
            c,
            0.0,
        );
        let p = projection_matrix(&intr, 10.0).unwrap();
        assert_abs_diff_eq!(*p.matrix(), expected, epsilon = 1e-9);
    }

    #[test]
    fn bottom_row_is_pitch_only() {
        let intr = dataset_intrinsics();
        for pitch in [-40.0, -12.5, 0.0, 7.0, 33.0] {
            let p = projection_matrix(&intr, pitch).unwrap();
            let (s, c) = f64::to_radians(pitch).sin_cos();
            assert_abs_diff_eq!(p.matrix()[(2, 0)], 0.0);
            assert_abs_diff_eq!(p.matrix()[(2, 1)], s, epsilon = 1e-15);
            assert_abs_diff_eq!(p.matrix()[(2, 2)], c, epsilon = 1e-15);
            assert_abs_diff_eq!(p.matrix()[(2, 3)], 0.0);
        }
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let intr = dataset_intrinsics();
        let p = projection_matrix(&intr, 0.0).unwrap();
        for z in [0.1, 5.0, 1e4] {
            let px = p.project(WorldPoint::new(0.0, 0.0, z)).unwrap();
            assert_abs_diff_eq!(px.x, 2016.0, epsilon = 1e-9);
            assert_abs_diff_eq!(px.y, 1512.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ground_point_lands_below_centre() {
        let intr = CameraIntrinsics::new(1000.0, 640, 480).unwrap();
        let p = projection_matrix(&intr, 0.0).unwrap();
        let px = p.project(WorldPoint::new(0.0, -1.0, 5.0)).unwrap();
        assert_abs_diff_eq!(px.x, 320.0, epsilon = 1e-12);
        assert_abs_diff_eq!(px.y, 240.0 + 200.0, epsilon = 1e-12);
    }

    #[test]
    fn behind_camera_rejected() {
        let intr = dataset_intrinsics();
        let p = projection_matrix(&intr, 0.0).unwrap();
        assert!(matches!(
            p.project(WorldPoint::new(0.0, -1.0, 0.0)),
            Err(Error::BehindCamera { .. })
        ));
        assert!(p.project(WorldPoint::new(0.0, -1.0, -3.0)).is_err());
    }

    #[test]
    fn pose_normalizes_yaw() {
        let pose = CameraPose::new(0.0, -30.0, 1.6).unwrap();
        assert_abs_diff_eq!(pose.yaw_deg(), 330.0);
        assert_eq!(normalize_degrees(720.0), 0.0);
        assert_eq!(normalize_degrees(-1e-18), 0.0);
        assert!(CameraPose::new(0.0, 0.0, 0.0).is_err());
        assert!(CameraPose::new(50.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn small_pitch_converges_to_level_form() {
        let intr = dataset_intrinsics();
        let level = projection_matrix(&intr, 0.0).unwrap();
        let tiny = projection_matrix(&intr, 1e-9).unwrap();
        assert_abs_diff_eq!(*tiny.matrix(), *level.matrix(), epsilon = 1e-6);
    }

    proptest! {
        #[test]
        fn rotation_is_orthonormal(pitch in -44.99f64..44.99) {
            let r = rotation_matrix(pitch).unwrap();
            let err = (r.transpose() * r - Matrix3::identity()).abs().max();
            prop_assert!(err < 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn homogeneous_scale_is_irrelevant(
            pitch in -40.0f64..40.0,
            x in -5.0f64..5.0,
            z in 2.0f64..50.0,
            w in prop_oneof![0.01f64..100.0, -100.0f64..-0.01],
        ) {
            let intr = dataset_intrinsics();
            let p = projection_matrix(&intr, pitch).unwrap();
            let pt = WorldPoint::new(x, -1.6, z);
            let direct = p.project(pt).unwrap();
            let scaled = p.project_homogeneous(&(pt.to_homogeneous() * w)).unwrap();
            prop_assert!((direct.x - scaled.x).abs() < 1e-8);
            prop_assert!((direct.y - scaled.y).abs() < 1e-8);
        }

        #[test]
        fn level_ground_points_below_principal_point(
            x in -20.0f64..20.0,
            z in 0.1f64..1e3,
            h in 0.1f64..10.0,
        ) {
            let intr = dataset_intrinsics();
            let p = projection_matrix(&intr, 0.0).unwrap();
            let px = p.project(WorldPoint::new(x, -h, z)).unwrap();
            prop_assert!(px.y > 1512.0);
        }
    }
}
