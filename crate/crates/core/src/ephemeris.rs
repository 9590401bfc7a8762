//! Sun position from a claimed capture time and location.
//!
//! Low-precision almanac formulas: a three-harmonic equation of time, a
//! cosine declination model and the spherical horizon transform. Accuracy
//! is a fraction of a degree, well inside the validation thresholds.

use chrono::{DateTime, Datelike, FixedOffset, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shadow::SunPosition;

pub const MAX_DECLINATION_DEG: f64 = 23.44;
/// Minutes of solar time per degree of longitude.
pub const MINUTES_PER_DEGREE: f64 = 4.0;

const MIN_OFFSET_SECONDS: i32 = -12 * 3600;
const MAX_OFFSET_SECONDS: i32 = 14 * 3600;

/// Claimed capture time and location. Longitudes are east-positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimedContext {
    timestamp: DateTime<FixedOffset>,
    latitude_deg: f64,
    longitude_deg: f64,
}

impl ClaimedContext {
    pub fn new(
        timestamp: DateTime<FixedOffset>,
        latitude_deg: f64,
        longitude_deg: f64,
    ) -> Result<Self> {
        if !(latitude_deg.is_finite() && (-90.0..=90.0).contains(&latitude_deg)) {
            return Err(Error::Context(format!(
                "latitude must lie in [-90, 90], got {latitude_deg}"
            )));
        }
        if !(longitude_deg.is_finite() && longitude_deg > -180.0 && longitude_deg <= 180.0) {
            return Err(Error::Context(format!(
                "longitude must lie in (-180, 180], got {longitude_deg}"
            )));
        }
        let offset = timestamp.offset().local_minus_utc();
        if !(MIN_OFFSET_SECONDS..=MAX_OFFSET_SECONDS).contains(&offset) {
            return Err(Error::Context(format!(
                "UTC offset {offset} s is outside [-12 h, +14 h]"
            )));
        }
        Ok(Self {
            timestamp,
            latitude_deg,
            longitude_deg,
        })
    }

    /// Parses an RFC 3339 timestamp; the numeric UTC offset is mandatory.
    pub fn parse(timestamp: &str, latitude_deg: f64, longitude_deg: f64) -> Result<Self> {
        Self::new(parse_timestamp(timestamp)?, latitude_deg, longitude_deg)
    }

    pub fn timestamp(&self) -> DateTime<FixedOffset> {
        self.timestamp
    }

    pub fn latitude_deg(&self) -> f64 {
        self.latitude_deg
    }

    pub fn longitude_deg(&self) -> f64 {
        self.longitude_deg
    }

    pub fn with_timestamp(&self, timestamp: DateTime<FixedOffset>) -> Result<Self> {
        Self::new(timestamp, self.latitude_deg, self.longitude_deg)
    }

    pub fn with_latitude(&self, latitude_deg: f64) -> Result<Self> {
        Self::new(self.timestamp, latitude_deg, self.longitude_deg)
    }

    /// Days since January 1st of the local calendar year (Jan 1 → 0).
    pub fn day_of_year(&self) -> u32 {
        self.timestamp.ordinal0()
    }

    pub fn utc_offset_hours(&self) -> f64 {
        f64::from(self.timestamp.offset().local_minus_utc()) / 3600.0
    }

    /// Longitude of the standard-time meridian implied by the UTC offset.
    pub fn standard_meridian_deg(&self) -> f64 {
        15.0 * self.utc_offset_hours()
    }

    /// Local clock time in hours.
    pub fn local_time_h(&self) -> f64 {
        let t = self.timestamp.time();
        f64::from(t.num_seconds_from_midnight()) / 3600.0 + f64::from(t.nanosecond()) / 3.6e12
    }
}

pub fn parse_timestamp(s: &str) -> Result<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(s.trim()).map_err(|e| {
        Error::Context(format!(
            "timestamp {s:?} is not RFC 3339 with a UTC offset: {e}"
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarAngles {
    pub solar_time_h: f64,
    pub hour_angle_deg: f64,
    pub declination_deg: f64,
    pub equation_of_time_min: f64,
}

fn check_day(day_of_year: u32) -> Result<()> {
    if day_of_year > 365 {
        return Err(Error::Domain(format!(
            "day of year must lie in [0, 365], got {day_of_year}"
        )));
    }
    Ok(())
}

/// Equation of time in minutes.
pub fn equation_of_time(day_of_year: u32) -> Result<f64> {
    check_day(day_of_year)?;
    let b = (360.0 * (f64::from(day_of_year) - 81.0) / 364.0).to_radians();
    Ok(9.87 * (2.0 * b).sin() - 7.53 * b.cos() - 1.5 * b.sin())
}

/// Solar declination in degrees.
pub fn declination(day_of_year: u32) -> Result<f64> {
    check_day(day_of_year)?;
    Ok(-MAX_DECLINATION_DEG
        * (360.0 * (f64::from(day_of_year) + 10.0) / 365.0)
            .to_radians()
            .cos())
}

/// Local clock time corrected to apparent solar time, in hours.
pub fn solar_time(ctx: &ClaimedContext) -> f64 {
    let et =
        equation_of_time(ctx.day_of_year()).expect("day of year from a calendar date is in range");
    solar_time_with(ctx, et)
}

fn solar_time_with(ctx: &ClaimedContext, equation_of_time_min: f64) -> f64 {
    let longitude_correction_min =
        MINUTES_PER_DEGREE * (ctx.longitude_deg() - ctx.standard_meridian_deg());
    ctx.local_time_h() + (equation_of_time_min + longitude_correction_min) / 60.0
}

/// Hour angle: 15° per hour from solar noon, positive westward.
pub fn hour_angle(solar_time_h: f64) -> f64 {
    15.0 * (solar_time_h - 12.0)
}

pub fn solar_angles(ctx: &ClaimedContext) -> SolarAngles {
    let n = ctx.day_of_year();
    let equation_of_time_min = equation_of_time(n).expect("calendar day in range");
    let solar_time_h = solar_time_with(ctx, equation_of_time_min);
    SolarAngles {
        solar_time_h,
        hour_angle_deg: hour_angle(solar_time_h),
        declination_deg: declination(n).expect("calendar day in range"),
        equation_of_time_min,
    }
}

/// Horizontal sun coordinates for an hour angle, declination and latitude.
pub fn horizontal_position(
    hour_angle_deg: f64,
    declination_deg: f64,
    latitude_deg: f64,
) -> SunPosition {
    let h = hour_angle_deg.to_radians();
    let d = declination_deg.to_radians();
    let phi = latitude_deg.to_radians();

    let sin_alt = d.sin() * phi.sin() + phi.cos() * d.cos() * h.cos();
    let altitude_deg = sin_alt.clamp(-1.0, 1.0).asin().to_degrees();
    // Measured from south, positive toward west.
    let from_south = h.sin().atan2(phi.sin() * h.cos() - phi.cos() * d.tan());
    SunPosition::new(180.0 + from_south.to_degrees(), altitude_deg)
}

/// TL-inferred sun position. Negative altitudes (sun below the horizon) are
/// returned as-is.
pub fn sun_position_from_context(ctx: &ClaimedContext) -> SunPosition {
    let angles = solar_angles(ctx);
    horizontal_position(
        angles.hour_angle_deg,
        angles.declination_deg,
        ctx.latitude_deg(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equation_of_time_reference_days() {
        assert_abs_diff_eq!(equation_of_time(81).unwrap(), -7.53, epsilon = 1e-12);
        assert_abs_diff_eq!(equation_of_time(172).unwrap(), -1.5, epsilon = 1e-12);
        assert!(equation_of_time(366).is_err());
    }

    #[test]
    fn equation_of_time_bounded() {
        for n in 0..=365 {
            assert!(equation_of_time(n).unwrap().abs() <= 17.0);
        }
    }

    #[test]
    fn declination_solstice_and_equinox() {
        assert_abs_diff_eq!(declination(171).unwrap(), 23.43, epsilon = 0.01);
        assert_abs_diff_eq!(declination(79).unwrap(), -0.9, epsilon = 0.1);
        for n in 0..=365 {
            assert!(declination(n).unwrap().abs() <= MAX_DECLINATION_DEG);
        }
        assert!(declination(400).is_err());
    }

    #[test]
    fn day_of_year_counts_from_zero() {
        let ctx = ClaimedContext::parse("2017-06-21T12:00:00-04:00", 40.71, -74.0).unwrap();
        assert_eq!(ctx.day_of_year(), 171);
        let ctx = ClaimedContext::parse("2017-01-01T00:30:00+09:00", 35.0, 139.0).unwrap();
        assert_eq!(ctx.day_of_year(), 0);
    }

    #[test]
    fn solar_time_at_standard_meridian_without_correction() {
        let ctx = ClaimedContext::parse("2017-03-21T12:00:00-05:00", 40.71, -75.0).unwrap();
        assert_abs_diff_eq!(solar_time_with(&ctx, 0.0), 12.0, epsilon = 1e-12);
    }

    #[test]
    fn new_york_longitude_correction() {
        let ctx = ClaimedContext::parse("2017-03-21T12:00:00-05:00", 40.71, -74.0).unwrap();
        assert_abs_diff_eq!(
            solar_time_with(&ctx, 0.0),
            12.0 + 4.0 / 60.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn one_degree_west_equals_four_minutes_earlier() {
        let a = ClaimedContext::parse("2017-05-02T10:00:00+08:00", 31.2, 121.0).unwrap();
        let b = ClaimedContext::parse("2017-05-02T10:04:00+08:00", 31.2, 120.0).unwrap();
        assert_abs_diff_eq!(solar_time(&a), solar_time(&b), epsilon = 1e-12);
    }

    #[test]
    fn hour_angle_examples() {
        assert_eq!(hour_angle(12.0), 0.0);
        assert_eq!(hour_angle(15.0), 45.0);
        assert_eq!(hour_angle(9.0), -45.0);
    }

    #[test]
    fn meridian_transit() {
        let sun = horizontal_position(0.0, -0.9, 40.71);
        assert_abs_diff_eq!(
            sun.altitude_deg,
            90.0 - (40.71f64 + 0.9).abs(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(sun.azimuth_deg, 180.0, epsilon = 1e-9);
    }

    #[test]
    fn xuzhou_claim() {
        let ctx = ClaimedContext::parse("2017-06-15T16:50:00+08:00", 34.26, 117.19).unwrap();
        let sun = sun_position_from_context(&ctx);
        assert_abs_diff_eq!(sun.altitude_deg, 29.1, epsilon = 0.5);
        assert!(sun.azimuth_deg > 180.0, "afternoon sun is west of south");
    }

    #[test]
    fn polar_night_is_negative_not_an_error() {
        let ctx = ClaimedContext::parse("2017-12-21T12:00:00+01:00", 78.2, 15.6).unwrap();
        assert!(sun_position_from_context(&ctx).altitude_deg < 0.0);
    }

    #[test]
    fn context_bounds() {
        assert!(ClaimedContext::parse("2017-06-15T16:50:00+08:00", 91.0, 0.0).is_err());
        assert!(ClaimedContext::parse("2017-06-15T16:50:00+08:00", 0.0, -180.0).is_err());
        assert!(ClaimedContext::parse("2017-06-15T16:50:00+08:00", 0.0, 180.0).is_ok());
        assert!(ClaimedContext::parse("2017-06-15T16:50:00-13:00", 0.0, 0.0).is_err());
        assert!(matches!(
            ClaimedContext::parse("2017-06-15T16:50:00", 0.0, 0.0),
            Err(Error::Context(_))
        ));
    }
}
