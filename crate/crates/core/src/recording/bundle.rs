//! On-disk recording bundle: a directory holding `manifest.json`,
//! `eeg.csv`, `motion.csv` and optionally `quality.csv` and
//! `ground_truth.json`.
//!
//! CSV files carry one column per channel and one row per sample, with no
//! timestamp column. Reals are written with 17 significant digits so that a
//! write/load cycle is bit-exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    Axis, ChannelGroup, ChannelMeta, ChannelSeries, ContactQualitySeries, Recording,
    RecordingError,
};
use crate::numfmt::sig17;
use crate::synth::FailureMode;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.json";
const EEG_CSV: &str = "eeg.csv";
const MOTION_CSV: &str = "motion.csv";
const QUALITY_CSV: &str = "quality.csv";
const GROUND_TRUTH: &str = "ground_truth.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    eeg_rate_hz: f64,
    motion_rate_hz: f64,
    eeg_channels: Vec<String>,
    motion_channels: Vec<MotionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quality_rate_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MotionEntry {
    name: String,
    axis: Axis,
    /// Optional on read; inferred from an `A.`/`M.` name prefix when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<ChannelGroup>,
}

impl MotionEntry {
    fn group(&self) -> Result<ChannelGroup, RecordingError> {
        if let Some(g) = self.group {
            return Ok(g);
        }
        if self.name.starts_with("A.") {
            Ok(ChannelGroup::Accelerometer)
        } else if self.name.starts_with("M.") {
            Ok(ChannelGroup::Magnetometer)
        } else {
            Err(RecordingError::MalformedJson {
                file: MANIFEST.into(),
                reason: format!("cannot infer sensor group of motion channel {}", self.name),
            })
        }
    }
}

/// Reads a recording bundle from `path`, validating every recording invariant.
pub fn load_bundle(path: impl AsRef<Path>) -> Result<Recording, RecordingError> {
    let dir = path.as_ref();
    let manifest_path = require(dir, MANIFEST)?;
    let eeg_path = require(dir, EEG_CSV)?;
    let motion_path = require(dir, MOTION_CSV)?;

    let manifest: Manifest = read_json(&manifest_path, MANIFEST)?;
    if manifest.format_version != BUNDLE_FORMAT_VERSION {
        return Err(RecordingError::MalformedJson {
            file: MANIFEST.into(),
            reason: format!("unsupported format_version {}", manifest.format_version),
        });
    }
    super::rate_ratio(manifest.eeg_rate_hz, manifest.motion_rate_hz)?;

    let eeg_names: Vec<&str> = manifest.eeg_channels.iter().map(String::as_str).collect();
    let eeg_columns = read_real_csv(&eeg_path, EEG_CSV, &eeg_names)?;
    let eeg = manifest
        .eeg_channels
        .iter()
        .zip(eeg_columns)
        .map(|(name, samples)| ChannelSeries {
            meta: ChannelMeta::eeg(name.clone()),
            sample_rate_hz: manifest.eeg_rate_hz,
            samples,
        })
        .collect();

    let motion_names: Vec<&str> = manifest
        .motion_channels
        .iter()
        .map(|m| m.name.as_str())
        .collect();
    let motion_columns = read_real_csv(&motion_path, MOTION_CSV, &motion_names)?;
    let motion = manifest
        .motion_channels
        .iter()
        .zip(motion_columns)
        .map(|(entry, samples)| {
            Ok(ChannelSeries {
                meta: ChannelMeta::motion(entry.name.clone(), entry.group()?, entry.axis),
                sample_rate_hz: manifest.motion_rate_hz,
                samples,
            })
        })
        .collect::<Result<Vec<_>, RecordingError>>()?;

    let quality_path = dir.join(QUALITY_CSV);
    let quality = match (quality_path.is_file(), manifest.quality_rate_hz) {
        (true, Some(rate)) => Some(read_quality_csv(&quality_path, rate)?),
        (true, None) => {
            return Err(RecordingError::MalformedJson {
                file: MANIFEST.into(),
                reason: "quality.csv present but quality_rate_hz missing".into(),
            })
        }
        (false, Some(_)) => return Err(RecordingError::MissingFile(quality_path)),
        (false, None) => None,
    };

    let truth_path = dir.join(GROUND_TRUTH);
    let ground_truth = if truth_path.is_file() {
        let raw: BTreeMap<String, String> = read_json(&truth_path, GROUND_TRUTH)?;
        let parsed = raw
            .into_iter()
            .map(|(name, mode)| {
                mode.parse::<FailureMode>()
                    .map(|m| (name, m))
                    .map_err(|e| RecordingError::MalformedJson {
                        file: GROUND_TRUTH.into(),
                        reason: e.to_string(),
                    })
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?;
        Some(parsed)
    } else {
        None
    };

    let recording = Recording {
        eeg,
        motion,
        quality,
        ground_truth,
        metadata: manifest.metadata,
    };
    recording.validate()?;
    Ok(recording)
}

/// Writes `recording` as a bundle into `path`, creating the directory if needed.
pub fn write_bundle(recording: &Recording, path: impl AsRef<Path>) -> Result<(), RecordingError> {
    recording.validate()?;
    let dir = path.as_ref();
    fs::create_dir_all(dir).map_err(|source| io_failure(dir, source))?;

    let manifest = Manifest {
        format_version: BUNDLE_FORMAT_VERSION,
        eeg_rate_hz: recording.eeg_rate_hz(),
        motion_rate_hz: recording.motion_rate_hz(),
        eeg_channels: recording.eeg.iter().map(|s| s.name().to_owned()).collect(),
        motion_channels: recording
            .motion
            .iter()
            .map(|s| MotionEntry {
                name: s.name().to_owned(),
                axis: s.meta.axis.expect("validated motion channel has an axis"),
                group: Some(s.meta.group),
            })
            .collect(),
        quality_rate_hz: recording
            .quality
            .as_ref()
            .and_then(|q| q.first())
            .map(|q| q.sample_rate_hz),
        metadata: recording.metadata.clone(),
    };
    write_json(&dir.join(MANIFEST), &manifest)?;

    write_real_csv(&dir.join(EEG_CSV), &recording.eeg)?;
    write_real_csv(&dir.join(MOTION_CSV), &recording.motion)?;

    let quality_path = dir.join(QUALITY_CSV);
    match recording.quality.as_deref() {
        Some(quality) if !quality.is_empty() => write_quality_csv(&quality_path, quality)?,
        _ => remove_stale(&quality_path)?,
    }

    let truth_path = dir.join(GROUND_TRUTH);
    match &recording.ground_truth {
        Some(truth) => {
            let as_text: BTreeMap<&str, String> = truth
                .iter()
                .map(|(name, mode)| (name.as_str(), mode.to_string()))
                .collect();
            write_json(&truth_path, &as_text)?;
        }
        None => remove_stale(&truth_path)?,
    }
    Ok(())
}

fn require(dir: &Path, file: &str) -> Result<PathBuf, RecordingError> {
    let path = dir.join(file);
    if path.is_file() {
        Ok(path)
    } else {
        Err(RecordingError::MissingFile(path))
    }
}

fn io_failure(path: &Path, source: std::io::Error) -> RecordingError {
    RecordingError::IoFailure {
        path: path.to_owned(),
        source,
    }
}

fn remove_stale(path: &Path) -> Result<(), RecordingError> {
    if path.exists() {
        fs::remove_file(path).map_err(|source| io_failure(path, source))?;
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, file: &str) -> Result<T, RecordingError> {
    let text = fs::read_to_string(path).map_err(|source| io_failure(path, source))?;
    serde_json::from_str(&text).map_err(|e| RecordingError::MalformedJson {
        file: file.into(),
        reason: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RecordingError> {
    let mut text = serde_json::to_string_pretty(value).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| io_failure(path, source))
}

fn csv_error(file: &str, err: csv::Error) -> RecordingError {
    let row = err
        .position()
        .map_or(0, |p| (p.line() as usize).saturating_sub(1));
    RecordingError::MalformedCsv {
        file: file.into(),
        row,
        column: String::new(),
        reason: err.to_string(),
    }
}

/// Reads a headered CSV whose header must equal `expected` in order.
fn read_columns<T>(
    path: &Path,
    file: &str,
    expected: Option<&[&str]>,
    mut parse: impl FnMut(&str, usize, &str) -> Result<T, RecordingError>,
) -> Result<(Vec<String>, Vec<Vec<T>>), RecordingError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(file, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(file, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if let Some(expected) = expected {
        if header.len() != expected.len() || header.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(RecordingError::MalformedCsv {
                file: file.into(),
                row: 0,
                column: header.join(","),
                reason: format!("header does not match manifest channels {expected:?}"),
            });
        }
    }
    let mut columns: Vec<Vec<T>> = header.iter().map(|_| Vec::new()).collect();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(file, e))?;
        let row = i + 1;
        for ((cell, column), name) in record.iter().zip(columns.iter_mut()).zip(&header) {
            column.push(parse(cell, row, name)?);
        }
    }
    Ok((header, columns))
}

fn read_real_csv(path: &Path, file: &str, names: &[&str]) -> Result<Vec<Vec<f64>>, RecordingError> {
    let (_, columns) = read_columns(path, file, Some(names), |cell, row, column| {
        let value: f64 = cell.trim().parse().map_err(|_| RecordingError::MalformedCsv {
            file: file.into(),
            row,
            column: column.into(),
            reason: format!("not a number: {cell:?}"),
        })?;
        if !value.is_finite() {
            return Err(RecordingError::NonFiniteSample {
                file: file.into(),
                row,
                column: column.into(),
            });
        }
        Ok(value)
    })?;
    Ok(columns)
}

fn read_quality_csv(path: &Path, rate: f64) -> Result<Vec<ContactQualitySeries>, RecordingError> {
    let (header, columns) = read_columns(path, QUALITY_CSV, None, |cell, row, column| {
        let value: i64 = cell.trim().parse().map_err(|_| RecordingError::MalformedCsv {
            file: QUALITY_CSV.into(),
            row,
            column: column.into(),
            reason: format!("not an integer: {cell:?}"),
        })?;
        u8::try_from(value)
            .ok()
            .filter(|v| *v <= super::MAX_CONTACT_QUALITY)
            .ok_or(RecordingError::QualityOutOfRange {
                channel: column.into(),
                index: row - 1,
                value,
            })
    })?;
    Ok(header
        .into_iter()
        .zip(columns)
        .map(|(channel_name, values)| ContactQualitySeries {
            channel_name,
            sample_rate_hz: rate,
            values,
        })
        .collect())
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: usize,
    mut cell: impl FnMut(usize, usize) -> String,
) -> Result<(), RecordingError> {
    let wrap = |e: csv::Error| io_failure(path, std::io::Error::other(e));
    let mut writer = csv::Writer::from_path(path).map_err(wrap)?;
    writer.write_record(header).map_err(wrap)?;
    let mut record = Vec::with_capacity(header.len());
    for row in 0..rows {
        record.clear();
        record.extend((0..header.len()).map(|col| cell(row, col)));
        writer.write_record(&record).map_err(wrap)?;
    }
    writer.flush().map_err(|source| io_failure(path, source))
}

fn write_real_csv(path: &Path, series: &[ChannelSeries]) -> Result<(), RecordingError> {
    let header: Vec<&str> = series.iter().map(|s| s.name()).collect();
    write_rows(path, &header, series[0].len(), |row, col| {
        sig17(series[col].samples[row])
    })
}

fn write_quality_csv(path: &Path, quality: &[ContactQualitySeries]) -> Result<(), RecordingError> {
    let header: Vec<&str> = quality.iter().map(|q| q.channel_name.as_str()).collect();
    write_rows(path, &header, quality[0].values.len(), |row, col| {
        quality[col].values[row].to_string()
    })
}
