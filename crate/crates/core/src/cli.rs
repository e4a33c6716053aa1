//! Command-line front end.
//!
//! Exit codes: 0 on success (including recordings with failed channels),
//! 1 for bad input or flags, 2 for internal numerical failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, ArgAction, Args, Parser, Subcommand};

use crate::detect::{analyze, DetectError, DetectorConfig};
use crate::export::{
    correlation_map_csv, mains_levels_csv, psd_csv, psd_file_name, MainsLevelRow,
};
use crate::numfmt::to_json_sig17;
use crate::pca::{correlation_map, loading_plane_vectors, svd_decompose, PcaError};
use crate::preprocess::build_feature_matrix;
use crate::recording::load_bundle;
use crate::spectral::welch_psd;
use crate::synth::{generate, Activity, FailureMode, SynthConfig};

pub const MAINS_ENV: &str = "EEG_SENTINEL_MAINS_HZ";

#[derive(Debug, Parser)]
#[command(name = "eeg-sentinel", version, about = "Detect failed EEG channels from PCA loading planes and mains interference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a recording bundle and print the channel-quality report.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic recording bundle.
    Synth(SynthArgs),
    /// Welch spectrum of one EEG channel as `freq_hz,power` CSV.
    Spectrum(SpectrumArgs),
    /// Loading-plane correlation map of all channels as CSV.
    PcaMap(PcaMapArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub bundle: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Also write correlation_map.csv, mains_levels.csv and psd_<channel>.csv.
    #[arg(long, value_name = "DIR")]
    pub emit_matrices: Option<PathBuf>,
    #[arg(long, value_name = "HZ", env = MAINS_ENV, default_value = "50", value_parser = parse_mains)]
    pub mains_freq: f64,
    #[arg(long, value_name = "FLOAT", default_value_t = 0.25)]
    pub flag_fraction: f64,
    #[arg(long, value_name = "FLOAT", default_value_t = -0.3, allow_negative_numbers = true)]
    pub pca_threshold: f64,
    #[arg(long, value_name = "I,J", default_value = "0,1", value_parser = parse_components)]
    pub components: (usize, usize),
    /// Detector config JSON; explicit flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// When false, the report records the analysis time.
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synth config JSON; explicit flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_activity)]
    pub activity: Option<Activity>,
    /// Inject a failure, e.g. `T8:high-mains` or `O1:open-contact:0.1`.
    #[arg(long = "fail", value_name = "NAME:MODE", value_parser = parse_fail)]
    pub fail: Vec<(String, FailureMode)>,
    #[arg(long, value_name = "SECONDS")]
    pub duration: Option<f64>,
    #[arg(long, value_name = "HZ", env = MAINS_ENV, value_parser = parse_mains)]
    pub mains_freq: Option<f64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    pub bundle: PathBuf,
    #[arg(long, value_name = "NAME")]
    pub channel: String,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "HZ", default_value_t = 1.0)]
    pub resolution: f64,
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct PcaMapArgs {
    pub bundle: PathBuf,
    #[arg(long, value_name = "I,J", default_value = "0,1", value_parser = parse_components)]
    pub components: (usize, usize),
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    pub deterministic: bool,
}

fn parse_mains(s: &str) -> Result<f64, String> {
    match s.trim() {
        "50" => Ok(50.0),
        "60" => Ok(60.0),
        other => Err(format!("mains frequency must be 50 or 60, got {other:?}")),
    }
}

fn parse_components(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected I,J, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad component index {t:?}"))
    };
    let (i, j) = (parse(a)?, parse(b)?);
    if i == j {
        return Err("component indices must differ".into());
    }
    Ok((i, j))
}

fn parse_activity(s: &str) -> Result<Activity, String> {
    s.parse().map_err(|e: crate::synth::SynthError| e.to_string())
}

fn parse_fail(s: &str) -> Result<(String, FailureMode), String> {
    let (name, mode) = s
        .split_once(':')
        .ok_or_else(|| format!("expected NAME:MODE, got {s:?}"))?;
    let mode = mode.parse().map_err(|e: crate::synth::SynthError| e.to_string())?;
    Ok((name.trim().to_owned(), mode))
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<DetectError> for Failure {
    fn from(e: DetectError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<PcaError> for Failure {
    fn from(e: PcaError) -> Self {
        DetectError::from(e).into()
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn unix_time() -> String {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default()
}

fn run_analyze(args: &AnalyzeArgs, matches: &clap::ArgMatches, stdout: &mut dyn Write) -> Result<(), Failure> {
    let recording = load_bundle(&args.bundle).map_err(input)?;
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => DetectorConfig::default(),
    };
    // flags given on the command line (or the mains env var) beat the file
    let explicit = |id: &str| {
        matches.value_source(id).is_some_and(|s| s != clap::parser::ValueSource::DefaultValue)
    };
    if args.config.is_none() || explicit("mains_freq") {
        config.mains_hz = args.mains_freq;
    }
    if args.config.is_none() || explicit("flag_fraction") {
        config.flag_fraction = args.flag_fraction;
    }
    if args.config.is_none() || explicit("pca_threshold") {
        config.pca_anticorr_threshold = args.pca_threshold;
    }
    if args.config.is_none() || explicit("components") {
        config.components = args.components;
    }

    let analysis = analyze(&recording, &config)?;
    let mut report = analysis.report.clone();
    if !args.deterministic {
        report
            .recording_metadata
            .insert("analyzed_at_unix_s".into(), unix_time());
    }

    if let Some(dir) = &args.emit_matrices {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
        write_file(&dir.join("correlation_map.csv"), &correlation_map_csv(&analysis.correlation))?;
        let rows: Vec<MainsLevelRow> = report
            .channels
            .iter()
            .zip(&analysis.mains_levels)
            .map(|(c, level)| MainsLevelRow {
                channel: c.name.clone(),
                level: *level,
                level_normalized: c.mains_level_normalized,
            })
            .collect();
        write_file(&dir.join("mains_levels.csv"), &mains_levels_csv(&rows))?;
        for psd in &analysis.psds {
            write_file(&dir.join(psd_file_name(&psd.channel_name)), &psd_csv(psd))?;
        }
    }
    emit(args.json.as_deref(), &report.to_json(), stdout)
}

fn run_synth(args: &SynthArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<SynthConfig>(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(activity) = args.activity {
        config.activity = activity;
    }
    if let Some(duration) = args.duration {
        config.duration_s = duration;
    }
    if let Some(mains) = args.mains_freq {
        config.mains_hz = mains;
    }
    for (name, mode) in &args.fail {
        config.failures.insert(name.clone(), *mode);
    }
    let mut recording = generate(&config).map_err(input)?;
    if !args.deterministic {
        recording.metadata.insert("generated_at_unix_s".into(), unix_time());
    }
    crate::recording::write_bundle(&recording, &args.out).map_err(input)?;
    let mut text = to_json_sig17(&config.failures).map_err(input)?;
    text.push('\n');
    emit(None, &text, stdout)
}

fn run_spectrum(args: &SpectrumArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let recording = load_bundle(&args.bundle).map_err(input)?;
    let series = recording
        .eeg_channel(&args.channel)
        .ok_or_else(|| Failure::Input(format!("unknown EEG channel {:?}", args.channel)))?;
    let psd = welch_psd(series, args.resolution, DetectorConfig::default().welch_overlap).map_err(input)?;
    emit(args.out.as_deref(), &psd_csv(&psd), stdout)
}

fn run_pca_map(args: &PcaMapArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let recording = load_bundle(&args.bundle).map_err(input)?;
    let features = build_feature_matrix(&recording).map_err(input)?;
    let pca = svd_decompose(&features)?;
    let plane = loading_plane_vectors(&pca, args.components)?;
    emit(args.out.as_deref(), &correlation_map_csv(&correlation_map(&plane)), stdout)
}

/// Parses `args` (program name first) and runs the subcommand, returning the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let command = <Cli as clap::CommandFactory>::command();
    let matches = match command.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let cli = match <Cli as clap::FromArgMatches>::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return 1;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => {
            let sub = matches.subcommand_matches("analyze").expect("analyze matched");
            run_analyze(a, sub, stdout)
        }
        Command::Synth(a) => run_synth(a, stdout),
        Command::Spectrum(a) => run_spectrum(a, stdout),
        Command::PcaMap(a) => run_pca_map(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("eeg-sentinel").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_components("2,0"), Ok((2, 0)));
        assert!(parse_components("1,1").is_err());
        assert!(parse_components("1").is_err());
        assert_eq!(parse_mains("60"), Ok(60.0));
        assert!(parse_mains("55").is_err());
        let (name, mode) = parse_fail("O1:open-contact:0.1").unwrap();
        assert_eq!(name, "O1");
        assert_eq!(mode.to_string(), "open-contact:0.1:0.1");
        assert!(parse_fail("O1").is_err());
        assert!(parse_fail("O1:melted").is_err());
    }

    #[test]
    fn flag_errors_exit_one() {
        assert_eq!(run_args(&[]).0, 1);
        assert_eq!(run_args(&["analyze", "x", "--bogus"]).0, 1);
        assert_eq!(run_args(&["analyze", "x", "--mains-freq", "55"]).0, 1);
        assert_eq!(run_args(&["frobnicate"]).0, 1);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("pca-map"));
    }

    #[test]
    fn missing_bundle_exits_one() {
        let (code, _, err) = run_args(&["analyze", "/nonexistent/bundle"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn negative_threshold_parses() {
        let cli = Cli::try_parse_from(["eeg-sentinel", "analyze", "b", "--pca-threshold", "-0.5"]).unwrap();
        match cli.command {
            Command::Analyze(a) => assert_eq!(a.pca_threshold, -0.5),
            _ => unreachable!(),
        }
    }
}
