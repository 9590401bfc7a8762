#![allow(dead_code)]

use chrono::Duration;
use nalgebra::{Rotation3, Vector3};
use shadowcheck::ephemeris::{solar_time, ClaimedContext};
use shadowcheck::SunPosition;

/// Sun position by rotating the hour-angle frame into the local horizon
/// frame. Shares no code with the library's spherical-trig formulas.
///
/// Frames are right-handed (south, west, up) for the horizon and
/// (meridian-equator, west, pole) for the hour-angle system; they differ by a
/// rotation of `latitude - 90°` about the common west axis.
pub fn oracle_sun_position(
    hour_angle_deg: f64,
    declination_deg: f64,
    latitude_deg: f64,
) -> SunPosition {
    let (h, d) = (hour_angle_deg.to_radians(), declination_deg.to_radians());
    let equatorial = Vector3::new(d.cos() * h.cos(), d.cos() * h.sin(), d.sin());
    let rot = Rotation3::from_axis_angle(&Vector3::y_axis(), (latitude_deg - 90.0).to_radians());
    let v = rot * equatorial;
    let (south, west, up) = (v.x, v.y, v.z);
    let altitude = up.clamp(-1.0, 1.0).asin().to_degrees();
    let azimuth = (-west).atan2(-south).to_degrees().rem_euclid(360.0);
    SunPosition {
        azimuth_deg: azimuth,
        altitude_deg: altitude,
    }
}

/// Shifts `ctx` so its apparent solar time is 12:00.
pub fn at_solar_noon(ctx: &ClaimedContext) -> ClaimedContext {
    let mut ctx = *ctx;
    for _ in 0..3 {
        let err_h = 12.0 - solar_time(&ctx);
        let shift = Duration::milliseconds((err_h * 3_600_000.0).round() as i64);
        ctx = ctx.with_timestamp(ctx.timestamp() + shift).unwrap();
    }
    ctx
}

pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}
