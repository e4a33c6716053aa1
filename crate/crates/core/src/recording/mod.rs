//! Recording data model: multi-rate channel groups, optional device
//! contact-quality traces and (for synthetic data) the injected ground truth.

mod bundle;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::synth::FailureMode;

pub use bundle::{load_bundle, write_bundle, BUNDLE_FORMAT_VERSION};

/// Highest value of the device contact-quality scale (0 = no contact).
pub const MAX_CONTACT_QUALITY: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum RecordingError {
    #[error("missing bundle file {0}")]
    MissingFile(PathBuf),
    #[error("malformed CSV {file}: row {row}, column {column}: {reason}")]
    MalformedCsv {
        file: String,
        /// 1-based data row; 0 refers to the header.
        row: usize,
        column: String,
        reason: String,
    },
    #[error("malformed {file}: {reason}")]
    MalformedJson { file: String, reason: String },
    #[error("non-finite sample in {file}: row {row}, column {column}")]
    NonFiniteSample {
        file: String,
        row: usize,
        column: String,
    },
    #[error("EEG rate {eeg_rate_hz} Hz is not an integer multiple of motion rate {motion_rate_hz} Hz")]
    RateMismatch {
        eeg_rate_hz: f64,
        motion_rate_hz: f64,
    },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("duplicate channel name {0:?}")]
    DuplicateChannel(String),
    #[error("contact quality {value} out of range 0..=4 for {channel} at sample {index}")]
    QualityOutOfRange {
        channel: String,
        index: usize,
        value: i64,
    },
    #[error("I/O failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelGroup {
    Eeg,
    Accelerometer,
    Magnetometer,
}

impl ChannelGroup {
    pub fn is_motion(self) -> bool {
        !matches!(self, ChannelGroup::Eeg)
    }
}

impl fmt::Display for ChannelGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelGroup::Eeg => "eeg",
            ChannelGroup::Accelerometer => "accelerometer",
            ChannelGroup::Magnetometer => "magnetometer",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMeta {
    pub name: String,
    pub group: ChannelGroup,
    /// Present for motion channels only.
    pub axis: Option<Axis>,
}

impl ChannelMeta {
    pub fn eeg(name: impl Into<String>) -> Self {
        ChannelMeta {
            name: name.into(),
            group: ChannelGroup::Eeg,
            axis: None,
        }
    }

    pub fn motion(name: impl Into<String>, group: ChannelGroup, axis: Axis) -> Self {
        ChannelMeta {
            name: name.into(),
            group,
            axis: Some(axis),
        }
    }

    fn validate(&self) -> Result<(), RecordingError> {
        if self.name.is_empty() {
            return Err(RecordingError::InvalidChannel("empty channel name".into()));
        }
        match (self.group, self.axis) {
            (ChannelGroup::Eeg, None) => Ok(()),
            (ChannelGroup::Eeg, Some(_)) => Err(RecordingError::InvalidChannel(format!(
                "EEG channel {} must not carry an axis",
                self.name
            ))),
            (_, Some(_)) => Ok(()),
            (_, None) => Err(RecordingError::InvalidChannel(format!(
                "motion channel {} needs an axis",
                self.name
            ))),
        }
    }
}

/// One channel sampled at a uniform rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries {
    pub meta: ChannelMeta,
    pub sample_rate_hz: f64,
    /// Microvolts for EEG, dimensionless device units for motion sensors.
    pub samples: Vec<f64>,
}

impl ChannelSeries {
    pub fn new(
        meta: ChannelMeta,
        sample_rate_hz: f64,
        samples: Vec<f64>,
    ) -> Result<Self, RecordingError> {
        let series = ChannelSeries {
            meta,
            sample_rate_hz,
            samples,
        };
        series.validate()?;
        Ok(series)
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    fn validate(&self) -> Result<(), RecordingError> {
        self.meta.validate()?;
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(RecordingError::InvalidChannel(format!(
                "{}: sample rate must be positive, got {}",
                self.meta.name, self.sample_rate_hz
            )));
        }
        if self.samples.is_empty() {
            return Err(RecordingError::LengthMismatch(format!(
                "{} has no samples",
                self.meta.name
            )));
        }
        if let Some(row) = self.samples.iter().position(|v| !v.is_finite()) {
            return Err(RecordingError::NonFiniteSample {
                file: "<memory>".into(),
                row: row + 1,
                column: self.meta.name.clone(),
            });
        }
        Ok(())
    }
}

/// Device-reported contact quality, 0 (no contact) to 4 (good contact).
#[derive(Debug, Clone, PartialEq)]
pub struct ContactQualitySeries {
    pub channel_name: String,
    pub sample_rate_hz: f64,
    pub values: Vec<u8>,
}

impl ContactQualitySeries {
    /// Median over time; even lengths average the two middle values.
    pub fn median(&self) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        let mut sorted = self.values.clone();
        sorted.sort_unstable();
        let mid = sorted.len() / 2;
        Some(if sorted.len() % 2 == 1 {
            f64::from(sorted[mid])
        } else {
            (f64::from(sorted[mid - 1]) + f64::from(sorted[mid])) / 2.0
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub eeg: Vec<ChannelSeries>,
    pub motion: Vec<ChannelSeries>,
    pub quality: Option<Vec<ContactQualitySeries>>,
    /// Injected failures; present only for synthetic recordings.
    pub ground_truth: Option<BTreeMap<String, FailureMode>>,
    pub metadata: BTreeMap<String, String>,
}

impl Recording {
    pub fn eeg_rate_hz(&self) -> f64 {
        self.eeg.first().map_or(0.0, |s| s.sample_rate_hz)
    }

    pub fn motion_rate_hz(&self) -> f64 {
        self.motion.first().map_or(0.0, |s| s.sample_rate_hz)
    }

    /// Integer ratio between the EEG and motion sample rates.
    pub fn rate_ratio(&self) -> Result<usize, RecordingError> {
        rate_ratio(self.eeg_rate_hz(), self.motion_rate_hz())
    }

    pub fn eeg_names(&self) -> Vec<&str> {
        self.eeg.iter().map(|s| s.name()).collect()
    }

    pub fn motion_names(&self) -> Vec<&str> {
        self.motion.iter().map(|s| s.name()).collect()
    }

    pub fn eeg_channel(&self, name: &str) -> Option<&ChannelSeries> {
        self.eeg.iter().find(|s| s.name() == name)
    }

    pub fn channel(&self, name: &str) -> Option<&ChannelSeries> {
        self.eeg
            .iter()
            .chain(self.motion.iter())
            .find(|s| s.name() == name)
    }

    /// Checks every structural invariant of a recording.
    pub fn validate(&self) -> Result<(), RecordingError> {
        if self.eeg.is_empty() {
            return Err(RecordingError::InvalidChannel(
                "recording has no EEG channels".into(),
            ));
        }
        if self.motion.is_empty() {
            return Err(RecordingError::InvalidChannel(
                "recording has no motion channels".into(),
            ));
        }

        let mut seen = HashSet::new();
        for series in self.eeg.iter().chain(self.motion.iter()) {
            series.validate()?;
            if !seen.insert(series.name()) {
                return Err(RecordingError::DuplicateChannel(series.name().to_owned()));
            }
        }
        if let Some(s) = self.eeg.iter().find(|s| s.meta.group != ChannelGroup::Eeg) {
            return Err(RecordingError::InvalidChannel(format!(
                "{} listed as EEG but has group {}",
                s.name(),
                s.meta.group
            )));
        }
        if let Some(s) = self.motion.iter().find(|s| !s.meta.group.is_motion()) {
            return Err(RecordingError::InvalidChannel(format!(
                "{} listed as motion but has group eeg",
                s.name()
            )));
        }

        let eeg_rate = self.eeg_rate_hz();
        let motion_rate = self.motion_rate_hz();
        for (group, list, rate) in [("EEG", &self.eeg, eeg_rate), ("motion", &self.motion, motion_rate)] {
            if let Some(s) = list.iter().find(|s| s.sample_rate_hz != rate) {
                return Err(RecordingError::RateMismatch {
                    eeg_rate_hz: if group == "EEG" { s.sample_rate_hz } else { eeg_rate },
                    motion_rate_hz: if group == "EEG" { motion_rate } else { s.sample_rate_hz },
                });
            }
            let len = list[0].len();
            if let Some(s) = list.iter().find(|s| s.len() != len) {
                return Err(RecordingError::LengthMismatch(format!(
                    "{group} channel {} has {} samples, expected {len}",
                    s.name(),
                    s.len()
                )));
            }
        }
        rate_ratio(eeg_rate, motion_rate)?;

        let eeg_duration = self.eeg[0].duration_s();
        let motion_duration = self.motion[0].duration_s();
        if (eeg_duration - motion_duration).abs() > 1.0 / motion_rate + 1e-9 {
            return Err(RecordingError::LengthMismatch(format!(
                "EEG lasts {eeg_duration} s but motion lasts {motion_duration} s"
            )));
        }

        if let Some(quality) = &self.quality {
            let rate = quality.first().map(|q| q.sample_rate_hz);
            for q in quality {
                if self.eeg_channel(&q.channel_name).is_none() {
                    return Err(RecordingError::InvalidChannel(format!(
                        "quality trace for unknown EEG channel {}",
                        q.channel_name
                    )));
                }
                if !(q.sample_rate_hz.is_finite() && q.sample_rate_hz > 0.0)
                    || Some(q.sample_rate_hz) != rate
                {
                    return Err(RecordingError::InvalidChannel(format!(
                        "quality trace {} has invalid rate {}",
                        q.channel_name, q.sample_rate_hz
                    )));
                }
                if let Some((index, &value)) = q
                    .values
                    .iter()
                    .enumerate()
                    .find(|(_, &v)| v > MAX_CONTACT_QUALITY)
                {
                    return Err(RecordingError::QualityOutOfRange {
                        channel: q.channel_name.clone(),
                        index,
                        value: i64::from(value),
                    });
                }
            }
            if let Some(q) = quality.iter().find(|q| q.values.len() != quality[0].values.len()) {
                return Err(RecordingError::LengthMismatch(format!(
                    "quality trace {} length differs",
                    q.channel_name
                )));
            }
        }

        if let Some(truth) = &self.ground_truth {
            if let Some(name) = truth.keys().find(|n| self.eeg_channel(n).is_none()) {
                return Err(RecordingError::InvalidChannel(format!(
                    "ground truth names unknown EEG channel {name}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn rate_ratio(eeg_rate_hz: f64, motion_rate_hz: f64) -> Result<usize, RecordingError> {
    let mismatch = RecordingError::RateMismatch {
        eeg_rate_hz,
        motion_rate_hz,
    };
    if !(eeg_rate_hz > 0.0 && motion_rate_hz > 0.0) {
        return Err(mismatch);
    }
    let ratio = eeg_rate_hz / motion_rate_hz;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio {
        return Err(mismatch);
    }
    Ok(rounded as usize)
}
