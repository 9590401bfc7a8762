//! Command-line front end.
//!
//! Exit codes: 0 success (every verified case consistent), 2 at least one
//! case inconsistent, 64 usage error, 65 malformed input or per-record
//! errors, 66 input file unreadable, 74 output could not be written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::casefile::{self, AnnotationRecord, CaseFile, CaseRecord, ClaimRecord, Report};
use crate::ephemeris::{solar_angles, sun_position_from_context, ClaimedContext, SolarAngles};
use crate::error::Error;
use crate::harness::{
    detectability_tables, evaluate_corpus, new_york, noise_study, CorpusConfig, NoiseStudyConfig,
    DETECTABILITY_CSV_HEADER, ROC_CSV_HEADER,
};
use crate::shadow::SunPosition;
use crate::synth::{add_noise, dataset1_frames, NoiseSpec, SceneSpec, DATASET1_FOCAL_PX};
use crate::validate::Thresholds;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "shadowcheck",
    version,
    about = "Check a photo's claimed time and place against its shadows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate every record of a case file against its claimed context.
    Verify {
        case_file: PathBuf,
        #[command(flatten)]
        thresholds: ThresholdArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Shadow-inferred sun position for every record of a case file.
    Infer { case_file: PathBuf },
    /// Sun position for a claimed timestamp and location.
    Ephemeris {
        /// RFC 3339 timestamp with UTC offset, e.g. 2017-06-15T16:50:00+08:00
        #[arg(long)]
        timestamp: String,
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
    },
    /// Emit the synthetic replication day as a case file.
    Synth {
        #[arg(long, default_value_t = 10.0)]
        distance: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        pitch: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the evaluation (noise study, detectability tables, ROC corpus).
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = crate::validate::DEFAULT_ALTITUDE_THRESHOLD_DEG)]
    altitude_threshold: f64,
    #[arg(long, default_value_t = crate::validate::DEFAULT_POSITION_THRESHOLD_DEG)]
    position_threshold: f64,
    #[arg(long)]
    azimuth_threshold: Option<f64>,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Result<Thresholds, Error> {
        let th = Thresholds::new(self.altitude_threshold, self.position_threshold)?;
        match self.azimuth_threshold {
            Some(t) => th.with_azimuth_threshold(t),
            None => Ok(th),
        }
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// JSON corpus configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    genuine: Option<u32>,
    #[arg(long)]
    attacks: Option<u32>,
    #[arg(long)]
    repetitions: Option<u32>,
    #[arg(long, default_value_t = 200)]
    noise_trials: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(EXIT_DATA, e.to_string())
    }
}

type CliResult = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Verify {
            case_file,
            thresholds,
            format,
            output,
        } => verify(&case_file, &thresholds, format, output.as_deref(), out, err),
        Command::Infer { case_file } => {
            let file = load_case_file(&case_file)?;
            let records = casefile::infer(&file);
            emit(out, &to_json(&records))?;
            Ok(if records.iter().any(|r| r.error.is_some()) {
                EXIT_DATA
            } else {
                EXIT_OK
            })
        }
        Command::Ephemeris {
            timestamp,
            lat,
            lon,
        } => {
            let ctx = ClaimedContext::parse(&timestamp, lat, lon)?;
            #[derive(Serialize)]
            struct EphemerisOut {
                sun: SunPosition,
                angles: SolarAngles,
            }
            let body = EphemerisOut {
                sun: sun_position_from_context(&ctx),
                angles: solar_angles(&ctx),
            };
            emit(out, &to_json(&body))?;
            Ok(EXIT_OK)
        }
        Command::Synth {
            distance,
            pitch,
            sigma,
            seed,
            output,
        } => {
            let file = synth_case_file(distance, pitch, sigma, seed)?;
            write_or_print(output.as_deref(), &file.to_json(), out)?;
            Ok(EXIT_OK)
        }
        Command::Eval(args) => eval(&args, out),
    }
}

fn load_case_file(path: &Path) -> Result<CaseFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        Failure::new(
            EXIT_NO_INPUT,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    CaseFile::from_json(&text)
        .map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write output: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text),
        None => emit(out, text),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const VERIFY_CSV_HEADER: &str =
    "image_id,shadow_azimuth,shadow_altitude,claimed_azimuth,claimed_altitude,d_h,d_A,d_p,consistent,rule,error";

fn report_csv(report: &Report) -> String {
    let mut s = String::from(VERIFY_CSV_HEADER);
    s.push('\n');
    for c in &report.cases {
        let v = c.verdict.as_ref();
        let fields = [
            csv_field(&c.image_id),
            opt(c.shadow.and_then(|e| e.azimuth_deg)),
            opt(c.shadow.and_then(|e| e.altitude_deg)),
            opt(c.claimed_sun.map(|p| p.azimuth_deg)),
            opt(c.claimed_sun.map(|p| p.altitude_deg)),
            opt(v.and_then(|v| v.d_h)),
            opt(v.and_then(|v| v.d_a)),
            opt(v.and_then(|v| v.d_p)),
            v.map(|v| v.consistent.to_string()).unwrap_or_default(),
            c.mode
                .map(|m| {
                    serde_json::to_value(m)
                        .expect("serializes")
                        .as_str()
                        .unwrap_or_default()
                        .to_string()
                })
                .unwrap_or_default(),
            c.error.as_ref().map(|e| e.kind.clone()).unwrap_or_default(),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

fn verify(
    path: &Path,
    thresholds: &ThresholdArgs,
    format: Format,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let th = thresholds
        .thresholds()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let file = load_case_file(path)?;
    let report = casefile::verify(&file, &th);
    let text = match format {
        Format::Json => to_json(&report),
        Format::Csv => report_csv(&report),
    };
    write_or_print(output, &text, out)?;
    for c in &report.cases {
        if let Some(e) = &c.error {
            let _ = writeln!(err, "warning: {}: {}", c.image_id, e.message);
        }
    }
    let s = report.summary;
    Ok(if s.inconsistent > 0 {
        EXIT_INCONSISTENT
    } else if s.errors > 0 {
        EXIT_DATA
    } else {
        EXIT_OK
    })
}

/// Replication-day case file; noise trial index is the frame index.
pub fn synth_case_file(
    distance: f64,
    pitch: f64,
    sigma: f64,
    seed: u64,
) -> Result<CaseFile, Error> {
    let spec = SceneSpec::dataset1(distance, pitch)?;
    let noise = NoiseSpec::new(sigma, seed, 1)?;
    let (u0, v0) = spec.intrinsics.principal_point();
    let (w, h) = spec.intrinsics.image_size();
    let records = dataset1_frames(&spec)?
        .into_iter()
        .enumerate()
        .map(|(i, frame)| CaseRecord {
            image_id: frame.id,
            image_size: [w, h],
            focal_px: Some(DATASET1_FOCAL_PX),
            principal_point: Some([u0, v0]),
            pitch_deg: spec.pose.pitch_deg(),
            yaw_deg: Some(spec.pose.yaw_deg()),
            camera_height: Some(spec.pose.height()),
            annotation: AnnotationRecord::from_annotation(&add_noise(
                &frame.annotation,
                &noise,
                i as u64,
            )),
            claimed: ClaimRecord::from_context(&frame.context),
            truth: Some(frame.sun),
        })
        .collect();
    Ok(CaseFile::new(records))
}

fn eval(args: &EvalArgs, out: &mut dyn Write) -> CliResult {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::new(
                    EXIT_NO_INPUT,
                    format!("cannot read {}: {e}", path.display()),
                )
            })?;
            serde_json::from_str::<CorpusConfig>(&text)
                .map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))?
        }
        None => CorpusConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.genuine {
        config.genuine = n;
    }
    if let Some(n) = args.attacks {
        config.attacks_per_kind = n;
    }
    if let Some(n) = args.repetitions {
        config.repetitions = n;
    }
    fs::create_dir_all(&args.out_dir).map_err(|e| {
        Failure::new(
            EXIT_IO,
            format!("cannot create {}: {e}", args.out_dir.display()),
        )
    })?;
    let dir = args.out_dir.as_path();

    let report = evaluate_corpus(&config)?;
    write_file(&dir.join("report.json"), &to_json(&report))?;
    for attack in &report.attacks {
        let mut csv = String::from(ROC_CSV_HEADER);
        csv.push('\n');
        for curve in attack.curves.iter().chain([&attack.combined]) {
            for row in curve.to_csv_rows() {
                csv.push_str(&row);
                csv.push('\n');
            }
        }
        write_file(&dir.join(format!("roc-{}.csv", attack.attack)), &csv)?;
    }

    let (lat, lon) = new_york();
    let table = detectability_tables(lat, lon, &config.thresholds)?;
    let mut csv = String::from(DETECTABILITY_CSV_HEADER);
    csv.push('\n');
    for e in &table {
        let kind = serde_json::to_value(e.kind).expect("serializes");
        csv.push_str(&format!(
            "{},{},{}\n",
            kind.as_str().unwrap_or_default(),
            e.base,
            e.min_shift
        ));
    }
    write_file(&dir.join("detectability.csv"), &csv)?;
    write_file(&dir.join("detectability.json"), &to_json(&table))?;

    let mut noise = Vec::new();
    for (distance, pitch) in [(10.0, 0.0), (5.0, 0.0), (5.0, 10.0), (5.0, 20.0)] {
        let mut cfg = NoiseStudyConfig::dataset1(distance, pitch, config.seed);
        cfg.trials = args.noise_trials;
        for r in noise_study(&cfg)? {
            noise.push(format!(
                "{distance},{pitch},{},{:.6},{:.6},{}",
                r.sigma_px,
                r.mean_abs_altitude_error_deg,
                r.mean_abs_azimuth_error_deg,
                r.failed_trials
            ));
        }
    }
    let csv = format!(
        "distance_m,pitch_deg,sigma_px,altitude_error_deg,azimuth_error_deg,failed_trials\n{}\n",
        noise.join("\n")
    );
    write_file(&dir.join("noise.csv"), &csv)?;

    for a in &report.attacks {
        let op = &a.operating_point;
        let auc: Vec<String> = a
            .curves
            .iter()
            .map(|c| format!("{} {:.3}", c.variable, c.auc))
            .collect();
        emit(
            out,
            &format!(
                "{:<12} AUC[{}]  TPR {:.3}  FPR {:.3}\n",
                a.attack,
                auc.join(", "),
                op.tpr,
                op.fpr
            ),
        )?;
    }
    emit(out, &format!("wrote results to {}\n", dir.display()))?;
    Ok(EXIT_OK)
}
