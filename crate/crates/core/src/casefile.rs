//! JSON sidecar files: per-photo case records in, verdict reports out.
//!
//! Angles are degrees and pixels are top-left / y-down everywhere in these
//! files. Timestamps are RFC 3339 with a mandatory numeric UTC offset.

use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, CameraPose, PixelPoint};
use crate::ephemeris::{sun_position_from_context, ClaimedContext};
use crate::error::{Error, Result};
use crate::shadow::{
    infer_altitude, infer_sun_position, ShadowAnnotation, ShadowEstimate, SunPosition,
};
use crate::validate::{validate, Rule, Thresholds, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

/// Annotated points may stray this many image sizes from the origin.
const ANNOTATION_BOUNDS_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub schema_version: u32,
    pub records: Vec<CaseRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRecord {
    pub image_id: String,
    pub image_size: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_px: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal_point: Option<[f64; 2]>,
    pub pitch_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera_height: Option<f64>,
    pub annotation: AnnotationRecord,
    pub claimed: ClaimRecord,
    /// Ground-truth sun position, present in synthesized files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<SunPosition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationRecord {
    pub shadow_tip: [f64; 2],
    pub object_base: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_top: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimRecord {
    pub timestamp: String,
    pub latitude: f64,
    pub longitude: f64,
}

fn px([x, y]: [f64; 2]) -> PixelPoint {
    PixelPoint::new(x, y)
}

impl AnnotationRecord {
    pub fn from_annotation(ann: &ShadowAnnotation) -> Self {
        let pair = |p: PixelPoint| [p.x, p.y];
        Self {
            shadow_tip: pair(ann.shadow_tip),
            object_base: pair(ann.object_base),
            object_top: ann.object_top.map(pair),
        }
    }

    pub fn to_annotation(&self) -> Result<ShadowAnnotation> {
        ShadowAnnotation::new(
            px(self.shadow_tip),
            px(self.object_base),
            self.object_top.map(px),
        )
    }
}

impl ClaimRecord {
    pub fn from_context(ctx: &ClaimedContext) -> Self {
        Self {
            timestamp: ctx.timestamp().to_rfc3339(),
            latitude: ctx.latitude_deg(),
            longitude: ctx.longitude_deg(),
        }
    }

    pub fn to_context(&self) -> Result<ClaimedContext> {
        ClaimedContext::parse(&self.timestamp, self.latitude, self.longitude)
    }
}

impl CaseRecord {
    /// Checks the record's own invariants (not whether the geometry solves).
    pub fn check(&self) -> Result<()> {
        let [w, h] = self.image_size;
        if w == 0 || h == 0 {
            return Err(Error::Parse("image_size must be positive".into()));
        }
        let mut numbers = vec![
            self.pitch_deg,
            self.claimed.latitude,
            self.claimed.longitude,
        ];
        numbers.extend(self.focal_px);
        numbers.extend(self.yaw_deg);
        numbers.extend(self.camera_height);
        numbers.extend(self.principal_point.iter().flatten());
        if numbers.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("numeric fields must be finite".into()));
        }
        let (bw, bh) = (
            ANNOTATION_BOUNDS_FACTOR * f64::from(w),
            ANNOTATION_BOUNDS_FACTOR * f64::from(h),
        );
        let points = [
            Some(self.annotation.shadow_tip),
            Some(self.annotation.object_base),
            self.annotation.object_top,
        ];
        for [x, y] in points.into_iter().flatten() {
            if !(x.is_finite() && y.is_finite() && x.abs() <= bw && y.abs() <= bh) {
                return Err(Error::Parse(format!(
                    "annotation point ({x}, {y}) is outside {ANNOTATION_BOUNDS_FACTOR}x the image bounds"
                )));
            }
        }
        crate::ephemeris::parse_timestamp(&self.claimed.timestamp)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        let focal = self.focal_px.ok_or_else(|| {
            Error::InsufficientAnnotation("focal_px is required but missing".into())
        })?;
        let [w, h] = self.image_size;
        match self.principal_point {
            Some([u0, v0]) => CameraIntrinsics::with_principal_point(focal, w, h, (u0, v0)),
            None => CameraIntrinsics::new(focal, w, h),
        }
    }

    /// Shadow-inferred sun position. Without a yaw only the altitude is
    /// available; without an object top only the azimuth.
    pub fn shadow_estimate(&self) -> Result<ShadowEstimate> {
        let intr = self.intrinsics()?;
        let ann = self.annotation.to_annotation()?;
        match self.yaw_deg {
            Some(yaw) => {
                let pose = CameraPose::new(self.pitch_deg, yaw, self.camera_height.unwrap_or(1.0))?;
                infer_sun_position(&ann, &intr, &pose)
            }
            None if ann.object_top.is_some() => Ok(ShadowEstimate {
                azimuth_deg: None,
                altitude_deg: Some(infer_altitude(&ann, &intr, self.pitch_deg)?),
            }),
            None => Err(Error::ValidationImpossible),
        }
    }
}

impl CaseFile {
    pub fn new(records: Vec<CaseRecord>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            records,
        }
    }

    /// Parses and checks every record. Errors name the line/column or the
    /// offending record.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CaseFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        for (i, rec) in file.records.iter().enumerate() {
            rec.check()
                .map_err(|e| Error::Parse(format!("record {i} ({}): {e}", rec.image_id)))?;
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("case files serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub image_id: String,
    pub input: CaseRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shadow: Option<ShadowEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claimed_sun: Option<SunPosition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Rule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub consistent: usize,
    pub inconsistent: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub thresholds: Thresholds,
    pub summary: Summary,
    pub cases: Vec<CaseReport>,
}

pub fn verify_record(rec: &CaseRecord, th: &Thresholds) -> CaseReport {
    let mut report = CaseReport {
        image_id: rec.image_id.clone(),
        input: rec.clone(),
        shadow: None,
        claimed_sun: None,
        verdict: None,
        mode: None,
        error: None,
    };
    let claimed_sun = rec
        .claimed
        .to_context()
        .map(|ctx| sun_position_from_context(&ctx));
    report.claimed_sun = claimed_sun.as_ref().ok().copied();
    let outcome = rec.shadow_estimate().and_then(|shadow| {
        report.shadow = Some(shadow);
        validate(&shadow, &claimed_sun?, th)
    });
    match outcome {
        Ok(verdict) => {
            report.mode = Some(verdict.rule_applied);
            report.verdict = Some(verdict);
        }
        Err(e) => report.error = Some((&e).into()),
    }
    report
}

/// Runs the full pipeline on every record, preserving input order.
pub fn verify(file: &CaseFile, th: &Thresholds) -> Report {
    let cases: Vec<CaseReport> = file.records.iter().map(|r| verify_record(r, th)).collect();
    let mut summary = Summary {
        total: cases.len(),
        ..Summary::default()
    };
    for c in &cases {
        match (&c.verdict, &c.error) {
            (Some(v), _) if v.consistent => summary.consistent += 1,
            (Some(_), _) => summary.inconsistent += 1,
            _ => summary.errors += 1,
        }
    }
    Report {
        schema_version: SCHEMA_VERSION,
        thresholds: *th,
        summary,
        cases,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceRecord {
    pub image_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shadow: Option<ShadowEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

pub fn infer(file: &CaseFile) -> Vec<InferenceRecord> {
    file.records
        .iter()
        .map(|rec| match rec.shadow_estimate() {
            Ok(shadow) => InferenceRecord {
                image_id: rec.image_id.clone(),
                shadow: Some(shadow),
                error: None,
            },
            Err(e) => InferenceRecord {
                image_id: rec.image_id.clone(),
                shadow: None,
                error: Some((&e).into()),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> CaseRecord {
        CaseRecord {
            image_id: "a".into(),
            image_size: [640, 480],
            focal_px: Some(1000.0),
            principal_point: None,
            pitch_deg: 0.0,
            yaw_deg: Some(0.0),
            camera_height: None,
            annotation: AnnotationRecord {
                shadow_tip: [320.0, 240.0 + 1000.0 / 7.0],
                object_base: [320.0, 440.0],
                object_top: Some([320.0, 40.0]),
            },
            claimed: ClaimRecord {
                timestamp: "2017-03-21T12:00:00-04:00".into(),
                latitude: 40.71,
                longitude: -74.0,
            },
            truth: None,
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let err =
            CaseFile::from_json("{\n  \"schema_version\": 1,\n  \"records\": [ }").unwrap_err();
        let Error::Parse(msg) = err else {
            panic!("expected parse error")
        };
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn record_errors_name_the_record() {
        let mut rec = record();
        rec.claimed.timestamp = "2017-03-21 12:00".into();
        let text = CaseFile::new(vec![record(), rec]).to_json();
        let Error::Parse(msg) = CaseFile::from_json(&text).unwrap_err() else {
            panic!()
        };
        assert!(msg.starts_with("record 1 (a)"), "{msg}");
    }

    #[test]
    fn out_of_bounds_annotation_rejected() {
        let mut rec = record();
        rec.annotation.shadow_tip = [640.0 * 5.0, 10.0];
        assert!(rec.check().is_err());
    }

    #[test]
    fn schema_version_checked() {
        let mut file = CaseFile::new(vec![record()]);
        file.schema_version = 7;
        assert!(CaseFile::from_json(&file.to_json()).is_err());
    }

    #[test]
    fn missing_focal_is_a_record_error() {
        let mut rec = record();
        rec.focal_px = None;
        let report = verify_record(&rec, &Thresholds::default());
        assert_eq!(report.error.unwrap().kind, "insufficient_annotation");
    }

    #[test]
    fn missing_yaw_and_top_is_validation_impossible() {
        let mut rec = record();
        rec.yaw_deg = None;
        rec.annotation.object_top = None;
        let report = verify(&CaseFile::new(vec![rec, record()]), &Thresholds::default());
        assert_eq!(
            report.cases[0].error.as_ref().unwrap().kind,
            "validation_impossible"
        );
        assert!(report.cases[1].verdict.is_some());
        assert_eq!(report.summary.errors, 1);
    }

    #[test]
    fn altitude_only_without_yaw() {
        let mut rec = record();
        rec.yaw_deg = None;
        let inferred = infer(&CaseFile::new(vec![rec]));
        let shadow = inferred[0].shadow.unwrap();
        assert!(shadow.azimuth_deg.is_none());
        assert!(shadow.altitude_deg.is_some());
    }

    #[test]
    fn round_trips_through_json() {
        let file = CaseFile::new(vec![record()]);
        assert_eq!(CaseFile::from_json(&file.to_json()).unwrap(), file);
    }
}
