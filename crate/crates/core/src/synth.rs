//! Synthetic object/shadow scenes with known sun positions.
//!
//! This is the forward model that the shadow solver inverts: place a vertical
//! object on the ground, cast its shadow for a given sun, project the three
//! key points through the camera, and optionally jitter them with Gaussian
//! pixel noise.

use chrono::{Duration, FixedOffset, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::camera::{projection_matrix, CameraIntrinsics, CameraPose, PixelPoint, WorldPoint};
use crate::ephemeris::{sun_position_from_context, ClaimedContext};
use crate::error::{Error, Result};
use crate::shadow::{ShadowAnnotation, SunPosition};

/// Simulated phone camera used for the desk-scale replication.
pub const DATASET1_FOCAL_PX: f64 = 3351.6;
pub const DATASET1_IMAGE_SIZE: (u32, u32) = (4032, 3024);
pub const DATASET1_PRINCIPAL_POINT: (f64, f64) = (2016.0, 1512.0);
pub const DATASET1_CAMERA_HEIGHT_M: f64 = 1.6;
pub const DATASET1_OBJECT_HEIGHT_M: f64 = 1.0;
pub const DATASET1_LATITUDE: f64 = 40.71;
pub const DATASET1_LONGITUDE: f64 = -74.0;
/// Frames per replication: 09:00 up to (not including) 16:00, every 5 minutes.
pub const DATASET1_FRAMES: usize = 84;

/// Stream-id namespace so that noise, scene sampling and attacks never share
/// a ChaCha stream under the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Noise = 1,
    Scene = 2,
    Attack = 3,
}

/// Seedable, portable generator for one `(purpose, index)` stream.
pub fn stream_rng(seed: u64, purpose: StreamPurpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | (index & ((1 << 56) - 1)));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub object_height: f64,
    pub base_position: WorldPoint,
    pub intrinsics: CameraIntrinsics,
    pub pose: CameraPose,
    /// Reject scenes whose points fall outside the image rectangle.
    #[serde(default)]
    pub require_in_frame: bool,
}

impl SceneSpec {
    /// Object of `object_height` standing `distance` straight ahead of the camera.
    pub fn new(
        object_height: f64,
        distance: f64,
        intrinsics: CameraIntrinsics,
        pose: CameraPose,
    ) -> Result<Self> {
        let spec = Self {
            object_height,
            base_position: WorldPoint::new(0.0, -pose.height(), distance),
            intrinsics,
            pose,
            require_in_frame: false,
        };
        spec.check()?;
        Ok(spec)
    }

    /// 1 m object at `distance` metres in front of the simulated phone camera,
    /// held 1.6 m high, facing north.
    pub fn dataset1(distance: f64, pitch_deg: f64) -> Result<Self> {
        let (w, h) = DATASET1_IMAGE_SIZE;
        let intr = CameraIntrinsics::with_principal_point(
            DATASET1_FOCAL_PX,
            w,
            h,
            DATASET1_PRINCIPAL_POINT,
        )?;
        let pose = CameraPose::new(pitch_deg, 0.0, DATASET1_CAMERA_HEIGHT_M)?;
        Self::new(DATASET1_OBJECT_HEIGHT_M, distance, intr, pose)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.object_height.is_finite() && self.object_height > 0.0) {
            return Err(Error::Domain(format!(
                "object height must be positive, got {}",
                self.object_height
            )));
        }
        if self.base_position.y != -self.pose.height() {
            return Err(Error::Domain(
                "object base must lie on the ground plane".into(),
            ));
        }
        if !(self.base_position.z > 0.0) {
            return Err(Error::Domain(
                "object base must be in front of the camera".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_px: f64,
    pub seed: u64,
    pub trials: u32,
}

impl NoiseSpec {
    pub fn new(sigma_px: f64, seed: u64, trials: u32) -> Result<Self> {
        if !(sigma_px.is_finite() && sigma_px >= 0.0) {
            return Err(Error::Domain(format!(
                "noise level must be >= 0, got {sigma_px}"
            )));
        }
        if trials == 0 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        Ok(Self {
            sigma_px,
            seed,
            trials,
        })
    }
}

/// Shadow tip on the ground plane. The tip→base bearing equals the sun azimuth.
pub fn shadow_tip_world(spec: &SceneSpec, sun: &SunPosition) -> Result<WorldPoint> {
    if !(sun.altitude_deg > 0.0 && sun.altitude_deg <= 90.0) {
        return Err(Error::NoShadow {
            altitude_deg: sun.altitude_deg,
        });
    }
    let length = spec.object_height / sun.altitude_deg.to_radians().tan();
    let (sin_rel, cos_rel) = (sun.azimuth_deg - spec.pose.yaw_deg())
        .to_radians()
        .sin_cos();
    let base = spec.base_position;
    Ok(WorldPoint::new(
        base.x - length * sin_rel,
        base.y,
        base.z - length * cos_rel,
    ))
}

/// Pixel annotation of the object and its shadow for a known sun.
pub fn synthesize_scene(spec: &SceneSpec, sun: &SunPosition) -> Result<ShadowAnnotation> {
    spec.check()?;
    let tip = shadow_tip_world(spec, sun)?;
    let base = spec.base_position;
    let top = WorldPoint::new(base.x, base.y + spec.object_height, base.z);
    let p = projection_matrix(&spec.intrinsics, spec.pose.pitch_deg())?;

    let project = |name: &str, pt: WorldPoint| -> Result<PixelPoint> {
        let px = p
            .project(pt)
            .map_err(|e| Error::SceneInfeasible(format!("{name}: {e}")))?;
        if spec.require_in_frame && !spec.intrinsics.contains(px) {
            return Err(Error::SceneInfeasible(format!(
                "{name} projects outside the image at ({:.1}, {:.1})",
                px.x, px.y
            )));
        }
        Ok(px)
    };
    // Zero-length ground vectors cannot be annotated.
    if tip.z <= 0.0 {
        return Err(Error::SceneInfeasible(format!(
            "shadow tip lies behind the camera (Z = {:.3})",
            tip.z
        )));
    }
    let ann = ShadowAnnotation {
        shadow_tip: project("shadow tip", tip)?,
        object_base: project("object base", base)?,
        object_top: Some(project("object top", top)?),
    };
    ann.check()
        .map_err(|e| Error::SceneInfeasible(e.to_string()))?;
    Ok(ann)
}

/// Adds i.i.d. Gaussian noise to every coordinate of every annotated point.
/// The output depends only on `(noise.seed, trial_index)`.
pub fn add_noise(ann: &ShadowAnnotation, noise: &NoiseSpec, trial_index: u64) -> ShadowAnnotation {
    if noise.sigma_px == 0.0 {
        return *ann;
    }
    let normal = Normal::new(0.0, noise.sigma_px).expect("sigma is finite and non-negative");
    let mut rng = stream_rng(noise.seed, StreamPurpose::Noise, trial_index);
    let mut jitter = |p: PixelPoint| {
        PixelPoint::new(p.x + normal.sample(&mut rng), p.y + normal.sample(&mut rng))
    };
    let shadow_tip = jitter(ann.shadow_tip);
    let object_base = jitter(ann.object_base);
    let object_top = ann.object_top.map(&mut jitter);
    ShadowAnnotation {
        shadow_tip,
        object_base,
        object_top,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFrame {
    pub id: String,
    pub context: ClaimedContext,
    pub sun: SunPosition,
    pub annotation: ShadowAnnotation,
}

/// Claimed contexts of the replication day: New York, 21 March 2017 (EDT),
/// 09:00 to 15:55 local time in 5-minute steps.
pub fn dataset1_contexts() -> Vec<ClaimedContext> {
    let offset = FixedOffset::west_opt(4 * 3600).expect("valid offset");
    let start = NaiveDate::from_ymd_opt(2017, 3, 21)
        .and_then(|d| d.and_hms_opt(9, 0, 0))
        .expect("valid date")
        .and_local_timezone(offset)
        .single()
        .expect("fixed offsets are unambiguous");
    (0..DATASET1_FRAMES as i64)
        .map(|i| {
            ClaimedContext::new(
                start + Duration::minutes(5 * i),
                DATASET1_LATITUDE,
                DATASET1_LONGITUDE,
            )
            .expect("preset coordinates are valid")
        })
        .collect()
}

/// Noise-free replication frames for `spec`.
pub fn dataset1_frames(spec: &SceneSpec) -> Result<Vec<SyntheticFrame>> {
    let mut frames = Vec::with_capacity(DATASET1_FRAMES);
    let mut failures = Vec::new();
    for ctx in dataset1_contexts() {
        let sun = sun_position_from_context(&ctx);
        let id = format!("dataset1-{}", ctx.timestamp().format("%H%M"));
        match synthesize_scene(spec, &sun) {
            Ok(annotation) => frames.push(SyntheticFrame {
                id,
                context: ctx,
                sun,
                annotation,
            }),
            Err(e) => failures.push(format!("{id}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok(frames)
    } else {
        Err(Error::SceneInfeasible(failures.join("; ")))
    }
}
