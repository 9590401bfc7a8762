//! Evaluation: falsified-metadata generators, ROC analysis, detectability
//! tables and the noise-resilience study.

use chrono::{Datelike, Duration, FixedOffset, NaiveDate, NaiveTime, TimeZone, Timelike};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, CameraPose};
use crate::ephemeris::{sun_position_from_context, ClaimedContext};
use crate::error::{Error, Result};
use crate::shadow::{infer_sun_position, ShadowEstimate, SunPosition};
use crate::synth::{
    add_noise, dataset1_frames, stream_rng, synthesize_scene, NoiseSpec, SceneSpec, StreamPurpose,
    DATASET1_CAMERA_HEIGHT_M, DATASET1_FOCAL_PX, DATASET1_IMAGE_SIZE, DATASET1_LATITUDE,
    DATASET1_LONGITUDE, DATASET1_OBJECT_HEIGHT_M, DATASET1_PRINCIPAL_POINT,
};
use crate::validate::{
    altitude_distance, azimuth_distance, position_distance, validate, Thresholds,
};

/// Fake times of day are drawn from this local-time window (seconds).
pub const ATTACK_TIME_WINDOW_S: (u32, u32) = (8 * 3600, 17 * 3600);
/// Fake latitudes are drawn from this northern band (degrees).
pub const ATTACK_LATITUDE_BAND: (f64, f64) = (25.0, 50.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    TimeOfDay,
    Date,
    Latitude,
}

impl AttackKind {
    pub const ALL: [AttackKind; 3] = [
        AttackKind::TimeOfDay,
        AttackKind::Date,
        AttackKind::Latitude,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::TimeOfDay => "time-of-day",
            AttackKind::Date => "date",
            AttackKind::Latitude => "latitude",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub rng_seed: u64,
    pub count: u32,
    pub repetitions: u32,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, rng_seed: u64, count: u32, repetitions: u32) -> Result<Self> {
        if count == 0 || repetitions == 0 {
            return Err(Error::Domain(
                "attack count and repetitions must be >= 1".into(),
            ));
        }
        Ok(Self {
            kind,
            rng_seed,
            count,
            repetitions,
        })
    }
}

fn local_datetime(
    date: NaiveDate,
    seconds: u32,
    offset: FixedOffset,
) -> Result<chrono::DateTime<FixedOffset>> {
    let time = NaiveTime::from_num_seconds_from_midnight_opt(seconds, 0)
        .ok_or_else(|| Error::Domain(format!("{seconds} s is not a time of day")))?;
    offset
        .from_local_datetime(&date.and_time(time))
        .single()
        .ok_or_else(|| Error::Domain("ambiguous local time".into()))
}

fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

/// Falsifies exactly one field of `truth`. Deterministic per
/// `(spec.rng_seed, spec.kind, index)`.
pub fn generate_attack(
    truth: &ClaimedContext,
    spec: &AttackSpec,
    index: u64,
) -> Result<ClaimedContext> {
    let stream = ((spec.kind as u64) << 48) | index;
    let mut rng = stream_rng(spec.rng_seed, StreamPurpose::Attack, stream);
    let ts = truth.timestamp();
    let offset = *ts.offset();
    match spec.kind {
        AttackKind::TimeOfDay => {
            let (lo, hi) = ATTACK_TIME_WINDOW_S;
            let seconds = rng.random_range(lo..=hi);
            truth.with_timestamp(local_datetime(ts.date_naive(), seconds, offset)?)
        }
        AttackKind::Date => {
            let year = ts.year();
            let day = rng.random_range(0..days_in_year(year));
            let date = NaiveDate::from_yo_opt(year, day + 1).expect("day within year");
            let seconds = ts.time().num_seconds_from_midnight();
            truth.with_timestamp(local_datetime(date, seconds, offset)?)
        }
        AttackKind::Latitude => {
            let (lo, hi) = ATTACK_LATITUDE_BAND;
            truth.with_latitude(rng.random_range(lo..=hi))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Distances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_p: Option<f64>,
}

impl Distances {
    pub fn between(shadow: &ShadowEstimate, context: &SunPosition) -> Result<Self> {
        let d_h = shadow
            .altitude_deg
            .map(|h| altitude_distance(h, context.altitude_deg));
        let d_a = shadow
            .azimuth_deg
            .map(|a| azimuth_distance(a, context.azimuth_deg));
        if d_h.is_none() && d_a.is_none() {
            return Err(Error::ValidationImpossible);
        }
        let d_p = d_h.zip(d_a).map(|(h, a)| position_distance(a, h));
        Ok(Self { d_h, d_a, d_p })
    }

    pub fn get(&self, variable: DistanceVariable) -> Option<f64> {
        match variable {
            DistanceVariable::Altitude => self.d_h,
            DistanceVariable::Azimuth => self.d_a,
            DistanceVariable::Position => self.d_p,
        }
    }
}

/// TL-inferred sun position for `context`, then all distances to `shadow`.
pub fn score(shadow: &ShadowEstimate, context: &ClaimedContext) -> Result<Distances> {
    Distances::between(shadow, &sun_position_from_context(context))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceVariable {
    #[serde(rename = "d_h")]
    Altitude,
    #[serde(rename = "d_A")]
    Azimuth,
    #[serde(rename = "d_p")]
    Position,
}

impl DistanceVariable {
    pub const ALL: [DistanceVariable; 3] = [
        DistanceVariable::Altitude,
        DistanceVariable::Azimuth,
        DistanceVariable::Position,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceVariable::Altitude => "d_h",
            DistanceVariable::Azimuth => "d_A",
            DistanceVariable::Position => "d_p",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Accept when distance <= threshold. `None` encodes +∞ in JSON.
    #[serde(with = "infinite_as_null")]
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
    pub fpr_by_repetition: Vec<f64>,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub variable: String,
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub optimal: RocPoint,
}

impl RocCurve {
    fn from_points(variable: String, points: Vec<RocPoint>) -> Self {
        // Distances are non-negative, so a negative threshold would accept nothing.
        let mut auc = 0.0;
        let (mut prev_fpr, mut prev_tpr) = (0.0, 0.0);
        for p in &points {
            auc += (p.fpr - prev_fpr) * (p.tpr + prev_tpr) / 2.0;
            (prev_fpr, prev_tpr) = (p.fpr, p.tpr);
        }
        let optimal = optimal_point(&points).clone();
        Self {
            variable,
            points,
            auc,
            optimal,
        }
    }

    /// Rows `variable,threshold,TPR,FPR` with six decimals.
    pub fn to_csv_rows(&self) -> Vec<String> {
        self.points
            .iter()
            .map(|p| {
                let threshold = if p.threshold.is_finite() {
                    format!("{:.6}", p.threshold)
                } else {
                    "inf".to_string()
                };
                format!("{},{},{:.6},{:.6}", self.variable, threshold, p.tpr, p.fpr)
            })
            .collect()
    }
}

pub const ROC_CSV_HEADER: &str = "variable,threshold,TPR,FPR";

/// Point closest to the ideal corner `(FPR, TPR) = (0, 1)`; ties go to the
/// lowest threshold.
pub fn optimal_point(points: &[RocPoint]) -> &RocPoint {
    let dist = |p: &RocPoint| p.fpr.hypot(1.0 - p.tpr);
    points
        .iter()
        .fold(None::<&RocPoint>, |best, p| match best {
            Some(b) if dist(b) <= dist(p) => Some(b),
            _ => Some(p),
        })
        .expect("a curve has at least the two sentinel points")
}

/// Sentinels at 0 and +∞ plus every midpoint between consecutive distinct
/// observed values.
fn sweep_thresholds(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut thresholds = Vec::with_capacity(sorted.len() + 2);
    thresholds.push(0.0);
    thresholds.extend(
        sorted
            .windows(2)
            .map(|w| w[0] + (w[1] - w[0]) / 2.0)
            .filter(|&t| t > 0.0),
    );
    thresholds.push(f64::INFINITY);
    thresholds
}

fn sweep<S>(
    positives: &[S],
    negative_reps: &[Vec<S>],
    thresholds: &[f64],
    accepts: impl Fn(&S, f64) -> bool,
) -> Vec<RocPoint> {
    let rate = |samples: &[S], t: f64| {
        samples.iter().filter(|s| accepts(s, t)).count() as f64 / samples.len() as f64
    };
    thresholds
        .iter()
        .map(|&t| {
            let fpr_by_repetition: Vec<f64> = negative_reps.iter().map(|n| rate(n, t)).collect();
            // Fixed left-to-right order keeps the mean bit-stable.
            let fpr = fpr_by_repetition.iter().sum::<f64>() / fpr_by_repetition.len() as f64;
            RocPoint {
                threshold: t,
                fpr,
                tpr: rate(positives, t),
                fpr_by_repetition,
            }
        })
        .collect()
}

fn check_sets<S>(positives: &[S], negative_reps: &[Vec<S>]) -> Result<()> {
    if positives.is_empty() || negative_reps.is_empty() || negative_reps.iter().any(Vec::is_empty) {
        return Err(Error::Domain(
            "ROC analysis needs non-empty positive and negative sets".into(),
        ));
    }
    Ok(())
}

pub fn roc_curve(
    positives: &[f64],
    negatives: &[f64],
    variable: DistanceVariable,
) -> Result<RocCurve> {
    roc_curve_repeated(positives, &[negatives.to_vec()], variable.name())
}

/// ROC over repeated negative draws; FPR at each threshold is the mean over
/// repetitions.
pub fn roc_curve_repeated(
    positives: &[f64],
    negative_reps: &[Vec<f64>],
    variable: &str,
) -> Result<RocCurve> {
    check_sets(positives, negative_reps)?;
    let thresholds = sweep_thresholds(
        positives
            .iter()
            .chain(negative_reps.iter().flatten())
            .copied(),
    );
    let points = sweep(positives, negative_reps, &thresholds, |&v, t| v <= t);
    Ok(RocCurve::from_points(variable.to_string(), points))
}

/// Combined acceptance `d_p <= gate && d_h <= t`, swept over `t`. Samples
/// without an azimuth are gated on `d_h` alone.
pub fn combined_rule_sweep(
    positives: &[Distances],
    negative_reps: &[Vec<Distances>],
    dp_gate: f64,
) -> Result<RocCurve> {
    check_sets(positives, negative_reps)?;
    let thresholds = sweep_thresholds(
        positives
            .iter()
            .chain(negative_reps.iter().flatten())
            .filter_map(|d| d.d_h),
    );
    let points = sweep(positives, negative_reps, &thresholds, |d, t| {
        d.d_h.is_some_and(|h| h <= t) && d.d_p.is_none_or(|p| p <= dp_gate)
    });
    let label = if dp_gate.is_finite() {
        format!("d_p<={dp_gate}&d_h")
    } else {
        "d_h".to_string()
    };
    Ok(RocCurve::from_points(label, points))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub tpr: f64,
    pub fpr: f64,
    pub fpr_by_repetition: Vec<f64>,
}

/// TPR/FPR of the validator's acceptance rule at fixed thresholds.
pub fn operating_point(
    positives: &[Distances],
    negative_reps: &[Vec<Distances>],
    th: &Thresholds,
) -> Result<OperatingPoint> {
    check_sets(positives, negative_reps)?;
    th.check()?;
    let accepts = |d: &Distances| {
        let h_ok = d.d_h.is_none_or(|h| h <= th.altitude_threshold_deg);
        let p_ok = match (d.d_p, d.d_a) {
            (Some(p), _) => p <= th.position_threshold_deg,
            (None, Some(a)) => a <= th.position_threshold_deg,
            (None, None) => false,
        };
        let a_ok = match (th.azimuth_threshold_deg, d.d_a) {
            (Some(t), Some(a)) => a <= t,
            _ => true,
        };
        h_ok && p_ok && a_ok
    };
    let point = sweep(positives, negative_reps, &[0.0], |d, _| accepts(d)).remove(0);
    Ok(OperatingPoint {
        tpr: point.tpr,
        fpr: point.fpr,
        fpr_by_repetition: point.fpr_by_repetition,
    })
}

/// Longest time shift scanned, in minutes.
pub const MAX_TIME_SHIFT_MIN: u32 = 12 * 60;
/// Longest date shift scanned, in days.
pub const MAX_DATE_SHIFT_DAYS: u32 = 366;

fn detectability_baseline(base: &ClaimedContext, th: &Thresholds) -> Result<ShadowEstimate> {
    th.check()?;
    let sun = sun_position_from_context(base);
    if !(sun.altitude_deg > 0.0) {
        return Err(Error::Domain(format!(
            "sun is below the horizon at the base time (altitude {:.2}°)",
            sun.altitude_deg
        )));
    }
    Ok(sun.into())
}

fn min_detectable_shift(
    base: &ClaimedContext,
    th: &Thresholds,
    max_steps: u32,
    step: impl Fn(i64) -> Duration,
) -> Result<u32> {
    let genuine = detectability_baseline(base, th)?;
    for k in 1..=max_steps {
        for sign in [1i64, -1] {
            let shifted = base.with_timestamp(base.timestamp() + step(sign * i64::from(k)))?;
            let verdict = validate(&genuine, &sun_position_from_context(&shifted), th)?;
            if !verdict.consistent {
                return Ok(k);
            }
        }
    }
    Err(Error::Domain(format!(
        "no detectable shift within {max_steps} steps"
    )))
}

/// Smallest clock shift (whole minutes, either direction) that the validator
/// flags when the photo's true sun is the one at `base`.
pub fn min_detectable_time_shift(base: &ClaimedContext, th: &Thresholds) -> Result<u32> {
    min_detectable_shift(base, th, MAX_TIME_SHIFT_MIN, Duration::minutes)
}

/// Smallest date shift (whole days, either direction, same local clock time).
pub fn min_detectable_date_shift(base: &ClaimedContext, th: &Thresholds) -> Result<u32> {
    min_detectable_shift(base, th, MAX_DATE_SHIFT_DAYS, Duration::days)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    TimeMinutes,
    DateDays,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectabilityEntry {
    pub kind: ShiftKind,
    pub base: String,
    pub min_shift: u32,
}

/// Baselines of the detectability tables: 21 Dec, 21 Mar and 21 Jun 2017 at
/// 09:00 and 12:00 New York civil time (EST in December, EDT otherwise).
pub fn detectability_baselines(
    latitude_deg: f64,
    longitude_deg: f64,
) -> Result<Vec<ClaimedContext>> {
    let mut out = Vec::new();
    for (month, utc_offset_h) in [(12, -5), (3, -4), (6, -4)] {
        let offset = FixedOffset::east_opt(utc_offset_h * 3600).expect("valid offset");
        let date = NaiveDate::from_ymd_opt(2017, month, 21).expect("valid date");
        for hour in [9, 12] {
            out.push(ClaimedContext::new(
                local_datetime(date, hour * 3600, offset)?,
                latitude_deg,
                longitude_deg,
            )?);
        }
    }
    Ok(out)
}

pub fn detectability_tables(
    latitude_deg: f64,
    longitude_deg: f64,
    th: &Thresholds,
) -> Result<Vec<DetectabilityEntry>> {
    let bases = detectability_baselines(latitude_deg, longitude_deg)?;
    let mut entries = Vec::with_capacity(bases.len() * 2);
    for (kind, f) in [
        (
            ShiftKind::TimeMinutes,
            min_detectable_time_shift as fn(&ClaimedContext, &Thresholds) -> Result<u32>,
        ),
        (ShiftKind::DateDays, min_detectable_date_shift),
    ] {
        for base in &bases {
            entries.push(DetectabilityEntry {
                kind,
                base: base.timestamp().to_rfc3339(),
                min_shift: f(base, th)?,
            });
        }
    }
    Ok(entries)
}

pub const DETECTABILITY_CSV_HEADER: &str = "kind,base,min_shift";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStudyConfig {
    pub distance_m: f64,
    pub pitch_deg: f64,
    pub sigmas_px: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
}

impl NoiseStudyConfig {
    pub fn dataset1(distance_m: f64, pitch_deg: f64, seed: u64) -> Self {
        Self {
            distance_m,
            pitch_deg,
            sigmas_px: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            trials: 200,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevelResult {
    pub sigma_px: f64,
    pub mean_abs_altitude_error_deg: f64,
    pub mean_abs_azimuth_error_deg: f64,
    /// Trials where noise produced an annotation the solver rejected.
    pub failed_trials: u32,
}

/// Mean absolute angular error over all replication frames and trials, per
/// noise level. Trial `t` of frame `i` draws from stream `i * trials + t`, so
/// every level perturbs the same directions scaled by its sigma.
pub fn noise_study(config: &NoiseStudyConfig) -> Result<Vec<NoiseLevelResult>> {
    let spec = SceneSpec::dataset1(config.distance_m, config.pitch_deg)?;
    let frames = dataset1_frames(&spec)?;
    config
        .sigmas_px
        .iter()
        .map(|&sigma| {
            let noise = NoiseSpec::new(sigma, config.seed, config.trials)?;
            let (mut alt_sum, mut az_sum, mut n, mut failed) = (0.0, 0.0, 0u64, 0u32);
            for (i, frame) in frames.iter().enumerate() {
                for t in 0..config.trials {
                    let trial = i as u64 * u64::from(config.trials) + u64::from(t);
                    let noisy = add_noise(&frame.annotation, &noise, trial);
                    match infer_sun_position(&noisy, &spec.intrinsics, &spec.pose) {
                        Ok(est) => {
                            alt_sum += altitude_distance(
                                est.altitude_deg.expect("top annotated"),
                                frame.sun.altitude_deg,
                            );
                            az_sum += azimuth_distance(
                                est.azimuth_deg.expect("pose known"),
                                frame.sun.azimuth_deg,
                            );
                            n += 1;
                        }
                        Err(_) => failed += 1,
                    }
                }
            }
            if n == 0 {
                return Err(Error::Domain(format!(
                    "every trial failed at sigma {sigma}"
                )));
            }
            Ok(NoiseLevelResult {
                sigma_px: sigma,
                mean_abs_altitude_error_deg: alt_sum / n as f64,
                mean_abs_azimuth_error_deg: az_sum / n as f64,
                failed_trials: failed,
            })
        })
        .collect()
}

/// Synthetic genuine/attack corpus.
///
/// Genuine photos are drawn uniformly over 2017, local time 08:00-17:00,
/// latitude 25-50°N and longitude 125°W-140°E (UTC offset = nearest 15°
/// meridian), with a 1 m object 5 or 10 m ahead of the simulated phone
/// camera at random pitch (±20°) and yaw. Draws whose sun is below
/// `min_sun_altitude_deg` or whose scene leaves the frame are redrawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub seed: u64,
    pub genuine: u32,
    pub sigma_px: f64,
    pub attacks_per_kind: u32,
    pub repetitions: u32,
    pub min_sun_altitude_deg: f64,
    pub thresholds: Thresholds,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            seed: 2017,
            genuine: 200,
            sigma_px: 2.0,
            attacks_per_kind: 200,
            repetitions: 5,
            min_sun_altitude_deg: 10.0,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenuineSample {
    pub context: ClaimedContext,
    pub truth: SunPosition,
    pub scene: SceneSpec,
    pub shadow: ShadowEstimate,
}

const MAX_DRAWS_PER_SAMPLE: u32 = 10_000;

fn draw_genuine(config: &CorpusConfig, index: u64) -> Result<GenuineSample> {
    let mut rng = stream_rng(config.seed, StreamPurpose::Scene, index);
    let (w, h) = DATASET1_IMAGE_SIZE;
    let intr =
        CameraIntrinsics::with_principal_point(DATASET1_FOCAL_PX, w, h, DATASET1_PRINCIPAL_POINT)?;
    let noise = NoiseSpec::new(config.sigma_px, config.seed, 1)?;
    for _ in 0..MAX_DRAWS_PER_SAMPLE {
        let day = rng.random_range(0..365u32);
        let (lo, hi) = ATTACK_TIME_WINDOW_S;
        let seconds = rng.random_range(lo..=hi);
        let latitude = rng.random_range(ATTACK_LATITUDE_BAND.0..=ATTACK_LATITUDE_BAND.1);
        let longitude: f64 = rng.random_range(-125.0..=140.0);
        let pitch = rng.random_range(-20.0..=20.0);
        let yaw = rng.random_range(0.0..360.0);
        let distance = if rng.random_bool(0.5) { 5.0 } else { 10.0 };
        // Drawn unconditionally so that every draw consumes the same amount of the stream.
        let noise_stream = rng.next_u64();

        let offset = FixedOffset::east_opt((longitude / 15.0).round() as i32 * 3600)
            .expect("offset within range");
        let date = NaiveDate::from_yo_opt(2017, day + 1).expect("2017 has 365 days");
        let context =
            ClaimedContext::new(local_datetime(date, seconds, offset)?, latitude, longitude)?;
        let truth = sun_position_from_context(&context);
        if truth.altitude_deg < config.min_sun_altitude_deg {
            continue;
        }
        let pose = CameraPose::new(pitch, yaw, DATASET1_CAMERA_HEIGHT_M)?;
        let mut scene = SceneSpec::new(DATASET1_OBJECT_HEIGHT_M, distance, intr, pose)?;
        scene.require_in_frame = true;
        let Ok(clean) = synthesize_scene(&scene, &truth) else {
            continue;
        };
        let noisy = add_noise(&clean, &noise, noise_stream);
        let Ok(shadow) = infer_sun_position(&noisy, &intr, &pose) else {
            continue;
        };
        return Ok(GenuineSample {
            context,
            truth,
            scene,
            shadow,
        });
    }
    Err(Error::SceneInfeasible(format!(
        "genuine sample {index}: no feasible scene in {MAX_DRAWS_PER_SAMPLE} draws"
    )))
}

pub fn genuine_corpus(config: &CorpusConfig) -> Result<Vec<GenuineSample>> {
    if config.genuine == 0 {
        return Err(Error::Domain("corpus has no genuine samples".into()));
    }
    (0..u64::from(config.genuine))
        .map(|i| draw_genuine(config, i))
        .collect()
}

/// Seed for one `(kind, repetition)` regeneration of the attack metadata.
fn attack_seed(top_seed: u64, kind: AttackKind, repetition: u32) -> u64 {
    stream_rng(
        top_seed,
        StreamPurpose::Attack,
        (1 << 40) | ((kind as u64) << 32) | u64::from(repetition),
    )
    .next_u64()
}

/// Negative distances for one attack kind: one vector per repetition.
pub fn attack_distances(
    genuine: &[GenuineSample],
    kind: AttackKind,
    config: &CorpusConfig,
) -> Result<Vec<Vec<Distances>>> {
    if genuine.is_empty() {
        return Err(Error::Domain("no genuine samples to falsify".into()));
    }
    (0..config.repetitions)
        .map(|rep| {
            let spec = AttackSpec::new(
                kind,
                attack_seed(config.seed, kind, rep),
                config.attacks_per_kind,
                config.repetitions,
            )?;
            (0..u64::from(spec.count))
                .map(|j| {
                    let sample = &genuine[j as usize % genuine.len()];
                    let fake = generate_attack(&sample.context, &spec, j)?;
                    score(&sample.shadow, &fake)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    /// Attack kind, or `"all"` for the pooled negatives.
    pub attack: String,
    pub curves: Vec<RocCurve>,
    pub combined: RocCurve,
    pub operating_point: OperatingPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: CorpusConfig,
    pub genuine_samples: usize,
    pub attacks: Vec<AttackReport>,
}

fn attack_report(
    label: &str,
    positives: &[Distances],
    negatives: &[Vec<Distances>],
    th: &Thresholds,
) -> Result<AttackReport> {
    let curves = DistanceVariable::ALL
        .iter()
        .map(|&var| {
            let pos: Vec<f64> = positives.iter().filter_map(|d| d.get(var)).collect();
            let neg: Vec<Vec<f64>> = negatives
                .iter()
                .map(|rep| rep.iter().filter_map(|d| d.get(var)).collect())
                .collect();
            roc_curve_repeated(&pos, &neg, var.name())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AttackReport {
        attack: label.to_string(),
        curves,
        combined: combined_rule_sweep(positives, negatives, th.position_threshold_deg)?,
        operating_point: operating_point(positives, negatives, th)?,
    })
}

/// Full ROC evaluation from one top-level seed.
pub fn evaluate_corpus(config: &CorpusConfig) -> Result<EvaluationReport> {
    config.thresholds.check()?;
    if config.attacks_per_kind == 0 || config.repetitions == 0 {
        return Err(Error::Domain(
            "attack count and repetitions must be >= 1".into(),
        ));
    }
    let genuine = genuine_corpus(config)?;
    let positives = genuine
        .iter()
        .map(|g| score(&g.shadow, &g.context))
        .collect::<Result<Vec<_>>>()?;

    let mut pooled: Vec<Vec<Distances>> = vec![Vec::new(); config.repetitions as usize];
    let mut attacks = Vec::with_capacity(AttackKind::ALL.len() + 1);
    for kind in AttackKind::ALL {
        let negatives = attack_distances(&genuine, kind, config)?;
        for (all, rep) in pooled.iter_mut().zip(&negatives) {
            all.extend_from_slice(rep);
        }
        attacks.push(attack_report(
            kind.name(),
            &positives,
            &negatives,
            &config.thresholds,
        )?);
    }
    attacks.push(attack_report(
        "all",
        &positives,
        &pooled,
        &config.thresholds,
    )?);
    Ok(EvaluationReport {
        config: config.clone(),
        genuine_samples: genuine.len(),
        attacks,
    })
}

/// New York coordinates used by the detectability tables.
pub fn new_york() -> (f64, f64) {
    (DATASET1_LATITUDE, DATASET1_LONGITUDE)
}
