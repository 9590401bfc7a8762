mod common;

use common::angle_diff;
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use shadowcheck::synth::{synthesize_scene, SceneSpec};
use shadowcheck::{
    infer_altitude, infer_sun_position, CameraIntrinsics, CameraPose, PixelPoint, ShadowAnnotation,
    SunPosition,
};

fn intrinsics() -> CameraIntrinsics {
    CameraIntrinsics::with_principal_point(3351.6, 4032, 3024, (2016.0, 1512.0)).unwrap()
}

/// World-frame ray through a pixel, from `R^T (x', y', f)`.
fn ray(px: PixelPoint, intr: &CameraIntrinsics, pitch_deg: f64) -> Vector3<f64> {
    let (u0, v0) = intr.principal_point();
    let cam = Vector3::new(px.x - u0, v0 - px.y, intr.focal_px());
    Rotation3::from_axis_angle(&Vector3::x_axis(), pitch_deg.to_radians()).inverse() * cam
}

/// Altitude and azimuth from explicit 3D reconstruction and a dot product.
fn oracle(ann: &ShadowAnnotation, intr: &CameraIntrinsics, pitch: f64, yaw: f64) -> (f64, f64) {
    let h_c = 1.0;
    let on_ground = |px| {
        let d = ray(px, intr, pitch);
        d * (-h_c / d.y)
    };
    let tip = on_ground(ann.shadow_tip);
    let base = on_ground(ann.object_base);
    let d = ray(ann.object_top.unwrap(), intr, pitch);
    let top_y = d.y * base.z / d.z;
    let top = Vector3::new(base.x, top_y, base.z);

    let along_shadow = base - tip;
    let to_top = top - tip;
    let cos_h = along_shadow.dot(&to_top) / (along_shadow.norm() * to_top.norm());
    let altitude = cos_h.clamp(-1.0, 1.0).acos().to_degrees();
    let azimuth = (yaw + along_shadow.x.atan2(along_shadow.z).to_degrees()).rem_euclid(360.0);
    (altitude, azimuth)
}

#[test]
fn level_camera_example() {
    let intr = CameraIntrinsics::new(1000.0, 640, 480).unwrap();
    // Base at (0, -1, 5), top at (0, 0, 5), tip one metre further away.
    let ann = ShadowAnnotation::new(
        PixelPoint::new(320.0, 240.0 + 1000.0 / 6.0),
        PixelPoint::new(320.0, 440.0),
        Some(PixelPoint::new(320.0, 240.0)),
    )
    .unwrap();
    let alt = infer_altitude(&ann, &intr, 0.0).unwrap();
    assert!((alt - 45.0).abs() < 1e-9);
    let (oracle_alt, oracle_az) = oracle(&ann, &intr, 0.0, 0.0);
    assert!((alt - oracle_alt).abs() < 1e-9);
    assert!(angle_diff(oracle_az, 180.0) < 1e-9);
}

proptest! {
    // Arbitrary (not necessarily physically consistent) annotations: the
    // closed form and the reconstruction must still agree.
    #[test]
    fn closed_form_matches_reconstruction(
        pitch in -30.0f64..30.0,
        yaw in 0.0f64..360.0,
        tip_x in 200.0f64..3800.0, tip_dy in 200.0f64..1400.0,
        base_x in 200.0f64..3800.0, base_dy in 200.0f64..1400.0,
        top_dx in -30.0f64..30.0, top_up in 50.0f64..900.0,
    ) {
        let intr = intrinsics();
        let horizon = 1512.0 + 3351.6 * pitch.to_radians().tan();
        let tip = PixelPoint::new(tip_x, horizon + tip_dy);
        let base = PixelPoint::new(base_x, horizon + base_dy);
        prop_assume!((tip.x - base.x).hypot(tip.y - base.y) > 5.0);
        let top = PixelPoint::new(base_x + top_dx, base.y - top_up);
        let ann = ShadowAnnotation::new(tip, base, Some(top)).unwrap();
        let pose = CameraPose::new(pitch, yaw, 1.0).unwrap();
        let (oracle_alt, oracle_az) = oracle(&ann, &intr, pitch, yaw);
        prop_assume!(oracle_alt > 0.5 && oracle_alt < 89.5);
        let est = infer_sun_position(&ann, &intr, &pose).unwrap();
        prop_assert!((est.altitude_deg.unwrap() - oracle_alt).abs() < 1e-7);
        prop_assert!(angle_diff(est.azimuth_deg.unwrap(), oracle_az) < 1e-7);
    }

    #[test]
    fn synthesis_round_trip(
        az in 0.0f64..360.0, alt in 5.0f64..88.0,
        pitch in -40.0f64..40.0, yaw in 0.0f64..360.0,
        distance in 3.0f64..30.0, height in 0.3f64..5.0, h_c in 0.5f64..3.0,
    ) {
        let intr = intrinsics();
        let pose = CameraPose::new(pitch, yaw, h_c).unwrap();
        let spec = SceneSpec::new(height, distance, intr, pose).unwrap();
        let sun = SunPosition::new(az, alt);
        let ann = match synthesize_scene(&spec, &sun) {
            Ok(a) => a,
            Err(_) => return Ok(()),
        };
        let est = infer_sun_position(&ann, &intr, &pose).unwrap();
        prop_assert!((est.altitude_deg.unwrap() - alt).abs() < 1e-8);
        prop_assert!(angle_diff(est.azimuth_deg.unwrap(), az) < 1e-8);
    }

    #[test]
    fn focal_scaling_invariance(
        s in 0.1f64..20.0, pitch in -30.0f64..30.0, az in 0.0f64..360.0, alt in 10.0f64..80.0,
    ) {
        let intr = intrinsics();
        let pose = CameraPose::new(pitch, 0.0, 1.6).unwrap();
        let spec = SceneSpec::new(1.0, 8.0, intr, pose).unwrap();
        let ann = match synthesize_scene(&spec, &SunPosition::new(az, alt)) {
            Ok(a) => a,
            Err(_) => return Ok(()),
        };
        let scaled = CameraIntrinsics::with_principal_point(3351.6 * s, 4032, 3024, (2016.0, 1512.0)).unwrap();
        let p = |q: PixelPoint| PixelPoint::new(2016.0 + s * (q.x - 2016.0), 1512.0 + s * (q.y - 1512.0));
        let sann = ShadowAnnotation::new(p(ann.shadow_tip), p(ann.object_base), ann.object_top.map(p)).unwrap();
        let a = infer_sun_position(&ann, &intr, &pose).unwrap();
        let b = infer_sun_position(&sann, &scaled, &pose).unwrap();
        prop_assert!((a.altitude_deg.unwrap() - b.altitude_deg.unwrap()).abs() < 1e-9);
        prop_assert!(angle_diff(a.azimuth_deg.unwrap(), b.azimuth_deg.unwrap()) < 1e-9);
    }
}
