//! Genuine/falsified verdict from the two sun position estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shadow::{ShadowEstimate, SunPosition};

pub const DEFAULT_ALTITUDE_THRESHOLD_DEG: f64 = 5.0;
pub const DEFAULT_POSITION_THRESHOLD_DEG: f64 = 9.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub altitude_threshold_deg: f64,
    pub position_threshold_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth_threshold_deg: Option<f64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            altitude_threshold_deg: DEFAULT_ALTITUDE_THRESHOLD_DEG,
            position_threshold_deg: DEFAULT_POSITION_THRESHOLD_DEG,
            azimuth_threshold_deg: None,
        }
    }
}

impl Thresholds {
    pub fn new(altitude_threshold_deg: f64, position_threshold_deg: f64) -> Result<Self> {
        let th = Self {
            altitude_threshold_deg,
            position_threshold_deg,
            azimuth_threshold_deg: None,
        };
        th.check()?;
        Ok(th)
    }

    pub fn with_azimuth_threshold(mut self, azimuth_threshold_deg: f64) -> Result<Self> {
        self.azimuth_threshold_deg = Some(azimuth_threshold_deg);
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && !v.is_nan();
        if positive(self.altitude_threshold_deg)
            && positive(self.position_threshold_deg)
            && self.azimuth_threshold_deg.is_none_or(positive)
        {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "thresholds must be positive: {self:?}"
            )))
        }
    }
}

/// Which checks produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `d_h` and `d_p` (plus `d_A` when an azimuth threshold is set).
    AltitudeAndPosition,
    /// No shadow azimuth: `d_h` only.
    AltitudeOnly,
    /// No shadow altitude: `d_A` against the position threshold, since
    /// `d_p >= d_A` whatever the altitude turns out to be.
    AzimuthOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_p: Option<f64>,
    pub consistent: bool,
    pub rule_applied: Rule,
}

pub fn altitude_distance(h_s: f64, h_m: f64) -> f64 {
    (h_s - h_m).abs()
}

/// Circular distance between two compass bearings, in `[0, 180]`.
pub fn azimuth_distance(a_s: f64, a_m: f64) -> f64 {
    let d = (a_s - a_m).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

pub fn position_distance(d_a: f64, d_h: f64) -> f64 {
    d_a.hypot(d_h)
}

/// Compares a shadow-inferred estimate against the TL-inferred position.
pub fn validate(
    shadow: &ShadowEstimate,
    context: &SunPosition,
    th: &Thresholds,
) -> Result<Verdict> {
    th.check()?;
    if let Some(h) = shadow.altitude_deg {
        if !(h > 0.0 && h < 90.0) {
            return Err(Error::SunBelowHorizon { altitude_deg: h });
        }
    }
    let d_h = shadow
        .altitude_deg
        .map(|h| altitude_distance(h, context.altitude_deg));
    let d_a = shadow
        .azimuth_deg
        .map(|a| azimuth_distance(a, context.azimuth_deg));
    let azimuth_ok = |d_a: f64| th.azimuth_threshold_deg.is_none_or(|t| d_a <= t);

    let verdict = match (d_h, d_a) {
        (Some(d_h), Some(d_a)) => {
            let d_p = position_distance(d_a, d_h);
            Verdict {
                d_h: Some(d_h),
                d_a: Some(d_a),
                d_p: Some(d_p),
                consistent: d_h <= th.altitude_threshold_deg
                    && d_p <= th.position_threshold_deg
                    && azimuth_ok(d_a),
                rule_applied: Rule::AltitudeAndPosition,
            }
        }
        (Some(d_h), None) => Verdict {
            d_h: Some(d_h),
            d_a: None,
            d_p: None,
            consistent: d_h <= th.altitude_threshold_deg,
            rule_applied: Rule::AltitudeOnly,
        },
        (None, Some(d_a)) => Verdict {
            d_h: None,
            d_a: Some(d_a),
            d_p: None,
            consistent: d_a <= th.position_threshold_deg && azimuth_ok(d_a),
            rule_applied: Rule::AzimuthOnly,
        },
        (None, None) => return Err(Error::ValidationImpossible),
    };
    Ok(verdict)
}
