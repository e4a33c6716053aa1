//! Per-channel verdicts from two independent evidence families: the
//! loading-plane correlation structure of the PCA, and the level of the mains
//! interference bin relative to the other EEG channels.
//!
//! A mains flag alone only makes a channel `Suspect`, since the fixed quota
//! flags channels even on clean data. `Failed` needs PCA evidence as well.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numfmt::to_json_sig17;
use crate::pca::{
    correlation_map, loading_plane_vectors, svd_decompose, CorrelationMap, PcaError, PcaResult,
};
use crate::preprocess::{build_feature_matrix, mean_and_std, FeatureMatrix, PreprocessError};
use crate::recording::{ContactQualitySeries, Recording, RecordingError};
use crate::spectral::{mains_level, normalize_levels, welch_psd, PsdEstimate, SpectralError};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Device contact quality at or below this median marks a failed channel.
pub const DEVICE_FAILED_CUTOFF: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum DetectError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} EEG channels for the flag quota, got {got}")]
    TooFewChannels { needed: usize, got: usize },
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error("no motion channels to couple against")]
    NoMotionChannels,
    #[error(transparent)]
    Recording(#[from] RecordingError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Pca(#[from] PcaError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl DetectError {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, DetectError::Pca(PcaError::ConvergenceFailure(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// Share of EEG channels the mains rule flags, `ceil(fraction · N)`.
    pub flag_fraction: f64,
    pub mains_hz: f64,
    /// Mean loading-plane correlation below this flags a channel.
    pub pca_anticorr_threshold: f64,
    /// Coupling at or above this lists a channel as motion-coupled.
    pub motion_coupling_threshold: f64,
    /// Motion analysis runs only if some raw motion channel's std exceeds
    /// this (device units).
    pub motion_activity_min_std: f64,
    pub components: (usize, usize),
    pub psd_resolution_hz: f64,
    pub welch_overlap: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            flag_fraction: 0.25,
            mains_hz: 50.0,
            pca_anticorr_threshold: -0.3,
            motion_coupling_threshold: 0.7,
            motion_activity_min_std: 0.05,
            components: (0, 1),
            psd_resolution_hz: 1.0,
            welch_overlap: 0.5,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DetectError> {
        let invalid = |msg: String| Err(DetectError::InvalidConfig(msg));
        if !(self.flag_fraction > 0.0 && self.flag_fraction < 1.0) {
            return invalid(format!("flag_fraction {} outside (0, 1)", self.flag_fraction));
        }
        if self.mains_hz != 50.0 && self.mains_hz != 60.0 {
            return invalid(format!("mains_hz must be 50 or 60, got {}", self.mains_hz));
        }
        if !self.pca_anticorr_threshold.is_finite() {
            return invalid("pca_anticorr_threshold must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.motion_coupling_threshold) {
            return invalid(format!(
                "motion_coupling_threshold {} outside [0, 1]",
                self.motion_coupling_threshold
            ));
        }
        if !(self.motion_activity_min_std.is_finite() && self.motion_activity_min_std >= 0.0) {
            return invalid("motion_activity_min_std must be nonnegative".into());
        }
        if !(self.psd_resolution_hz.is_finite() && self.psd_resolution_hz > 0.0) {
            return invalid("psd_resolution_hz must be positive".into());
        }
        if !(0.0..1.0).contains(&self.welch_overlap) {
            return invalid(format!("welch_overlap {} outside [0, 1)", self.welch_overlap));
        }
        Ok(())
    }

    /// `ceil(flag_fraction · n)`, guarded against binary rounding of the product.
    pub fn flag_count(&self, n: usize) -> usize {
        ((self.flag_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFlag {
    MainsHigh,
    MainsLow,
    PcaAnticorrelated,
    Degenerate,
}

impl ChannelFlag {
    pub fn is_mains(self) -> bool {
        matches!(self, ChannelFlag::MainsHigh | ChannelFlag::MainsLow)
    }

    pub fn is_pca(self) -> bool {
        !self.is_mains()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Good,
    Suspect,
    Failed,
}

impl Verdict {
    /// Failed needs both evidence families, Suspect exactly one.
    pub fn from_flags(flags: &[ChannelFlag]) -> Verdict {
        let mains = flags.iter().any(|f| f.is_mains());
        let pca = flags.iter().any(|f| f.is_pca());
        match (mains, pca) {
            (true, true) => Verdict::Failed,
            (false, false) => Verdict::Good,
            _ => Verdict::Suspect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelVerdict {
    pub name: String,
    pub mains_level_normalized: f64,
    pub pca_mean_corr: Option<f64>,
    pub motion_coupling: Option<f64>,
    pub flags: Vec<ChannelFlag>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionNullSummary {
    pub mean_abs_coupling: f64,
    pub max_abs_coupling: f64,
    /// EEG channels at or above the configured coupling threshold.
    pub coupled_channels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelQualityReport {
    pub format_version: u32,
    pub config: DetectorConfig,
    pub motion_analysis_performed: bool,
    pub motion_null_summary: Option<MotionNullSummary>,
    /// EEG channels in recording order.
    pub channels: Vec<ChannelVerdict>,
    pub recording_metadata: BTreeMap<String, String>,
}

impl ChannelQualityReport {
    pub fn to_json(&self) -> String {
        let mut text = to_json_sig17(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn channel(&self, name: &str) -> Option<&ChannelVerdict> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.channels.iter().filter(|c| c.verdict == verdict).count()
    }
}

/// The fixed-quota mains rule: the single highest level is `MainsHigh`, the
/// `quota − 1` lowest of the rest are `MainsLow`. Ties go to the lower index.
pub fn mains_flag_channels(
    levels_normalized: &[f64],
    config: &DetectorConfig,
) -> Result<Vec<Option<ChannelFlag>>, DetectError> {
    let n = levels_normalized.len();
    let quota = config.flag_count(n);
    if n == 0 || n < quota {
        return Err(DetectError::TooFewChannels { needed: quota, got: n });
    }
    let mut flags = vec![None; n];
    let mut high = 0;
    for (i, v) in levels_normalized.iter().enumerate() {
        if *v > levels_normalized[high] {
            high = i;
        }
    }
    flags[high] = Some(ChannelFlag::MainsHigh);

    let mut rest: Vec<usize> = (0..n).filter(|&i| i != high).collect();
    rest.sort_by(|&a, &b| {
        levels_normalized[a]
            .total_cmp(&levels_normalized[b])
            .then(a.cmp(&b))
    });
    for &i in rest.iter().take(quota - 1) {
        flags[i] = Some(ChannelFlag::MainsLow);
    }
    Ok(flags)
}

/// PCA evidence for one EEG channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaEvidence {
    /// Mean off-diagonal correlation with the other EEG channels.
    pub mean_corr: Option<f64>,
    pub flag: Option<ChannelFlag>,
}

/// Flags channels whose mean correlation with the other EEG channels falls
/// strictly below the threshold; zero-length loading vectors are flagged
/// `Degenerate` instead.
pub fn pca_flag_channels(map: &CorrelationMap, config: &DetectorConfig) -> Vec<PcaEvidence> {
    let n = map.channel_names.len();
    (0..n)
        .map(|i| {
            if map.is_degenerate(&map.channel_names[i]) {
                return PcaEvidence {
                    mean_corr: None,
                    flag: Some(ChannelFlag::Degenerate),
                };
            }
            if n < 2 {
                return PcaEvidence {
                    mean_corr: None,
                    flag: None,
                };
            }
            let sum: f64 = (0..n).filter(|&j| j != i).map(|j| map.values[[i, j]]).sum();
            let mean = sum / (n - 1) as f64;
            PcaEvidence {
                mean_corr: Some(mean),
                flag: (mean < config.pca_anticorr_threshold).then_some(ChannelFlag::PcaAnticorrelated),
            }
        })
        .collect()
}

/// Mean absolute loading-plane correlation of each EEG channel with the
/// motion channels.
pub fn motion_coupling<S: AsRef<str>, T: AsRef<str>>(
    map: &CorrelationMap,
    eeg_names: &[S],
    motion_names: &[T],
) -> Result<Vec<f64>, DetectError> {
    if motion_names.is_empty() {
        return Err(DetectError::NoMotionChannels);
    }
    let index = |name: &str| {
        map.index_of(name)
            .ok_or_else(|| DetectError::UnknownChannel(name.to_owned()))
    };
    let motion: Vec<usize> = motion_names
        .iter()
        .map(|m| index(m.as_ref()))
        .collect::<Result<_, _>>()?;
    eeg_names
        .iter()
        .map(|e| {
            let i = index(e.as_ref())?;
            let total: f64 = motion.iter().map(|&j| map.values[[i, j]].abs()).sum();
            Ok(total / motion.len() as f64)
        })
        .collect()
}

/// Intermediate products of [`analyze`], kept for export and inspection.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: ChannelQualityReport,
    pub features: FeatureMatrix,
    pub pca: PcaResult,
    pub correlation: CorrelationMap,
    pub psds: Vec<PsdEstimate>,
    pub mains_levels: Vec<f64>,
}

/// Whether any raw motion channel moves enough to be worth correlating.
pub fn motion_is_active(recording: &Recording, min_std: f64) -> bool {
    recording
        .motion
        .iter()
        .any(|s| s.len() >= 2 && mean_and_std(&s.samples).1 > min_std)
}

/// Runs both evidence branches and combines them into a report.
pub fn analyze(recording: &Recording, config: &DetectorConfig) -> Result<Analysis, DetectError> {
    config.validate()?;
    recording.validate()?;
    let eeg_names: Vec<String> = recording.eeg.iter().map(|s| s.name().to_owned()).collect();
    let motion_names: Vec<String> = recording.motion.iter().map(|s| s.name().to_owned()).collect();

    // PCA branch, on the common-rate matrix
    let features = build_feature_matrix(recording)?;
    let pca = svd_decompose(&features)?;
    let plane = loading_plane_vectors(&pca, config.components)?;
    let correlation = correlation_map(&plane);
    let eeg_map = correlation.submap(&eeg_names)?;
    let evidence = pca_flag_channels(&eeg_map, config);

    let motion_analysis_performed = motion_is_active(recording, config.motion_activity_min_std);
    let coupling = if motion_analysis_performed {
        Some(motion_coupling(&correlation, &eeg_names, &motion_names)?)
    } else {
        None
    };

    // mains branch, on full-rate raw EEG
    let psds = recording
        .eeg
        .iter()
        .map(|s| welch_psd(s, config.psd_resolution_hz, config.welch_overlap))
        .collect::<Result<Vec<_>, _>>()?;
    let mains_levels = psds
        .iter()
        .map(|p| mains_level(p, config.mains_hz))
        .collect::<Result<Vec<_>, _>>()?;
    let normalized = normalize_levels(&mains_levels)?;
    let mains_flags = mains_flag_channels(&normalized, config)?;

    let channels = eeg_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let mut flags: Vec<ChannelFlag> =
                mains_flags[i].into_iter().chain(evidence[i].flag).collect();
            flags.sort();
            ChannelVerdict {
                name: name.clone(),
                mains_level_normalized: normalized[i],
                pca_mean_corr: evidence[i].mean_corr,
                motion_coupling: coupling.as_ref().map(|c| c[i]),
                verdict: Verdict::from_flags(&flags),
                flags,
            }
        })
        .collect();

    let motion_null_summary = coupling.map(|c| MotionNullSummary {
        mean_abs_coupling: c.iter().sum::<f64>() / c.len() as f64,
        max_abs_coupling: c.iter().copied().fold(0.0, f64::max),
        coupled_channels: eeg_names
            .iter()
            .zip(&c)
            .filter(|(_, v)| **v >= config.motion_coupling_threshold)
            .map(|(n, _)| n.clone())
            .collect(),
    });

    Ok(Analysis {
        report: ChannelQualityReport {
            format_version: REPORT_FORMAT_VERSION,
            config: config.clone(),
            motion_analysis_performed,
            motion_null_summary,
            channels,
            recording_metadata: recording.metadata.clone(),
        },
        features,
        pca,
        correlation,
        psds,
        mains_levels,
    })
}

pub fn assess(recording: &Recording, config: &DetectorConfig) -> Result<ChannelQualityReport, DetectError> {
    analyze(recording, config).map(|a| a.report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelComparison {
    pub name: String,
    pub median_quality: f64,
    pub device_failed: bool,
    pub artifact_failed: bool,
}

/// Confusion counts of artifact verdicts against device contact quality,
/// taking the device as reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceComparison {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub true_negative: usize,
    pub channels: Vec<ChannelComparison>,
}

/// A channel counts as device-failed when its median quality is at or below
/// `cutoff`, and as artifact-failed when its verdict is not `Good`.
pub fn compare_with_device_quality(
    report: &ChannelQualityReport,
    quality: &[ContactQualitySeries],
    cutoff: f64,
) -> Result<DeviceComparison, DetectError> {
    let mut out = DeviceComparison {
        true_positive: 0,
        false_positive: 0,
        false_negative: 0,
        true_negative: 0,
        channels: Vec::with_capacity(report.channels.len()),
    };
    for channel in &report.channels {
        let median = quality
            .iter()
            .find(|q| q.channel_name == channel.name)
            .and_then(ContactQualitySeries::median)
            .ok_or_else(|| DetectError::UnknownChannel(channel.name.clone()))?;
        let device_failed = median <= cutoff;
        let artifact_failed = channel.verdict != Verdict::Good;
        match (artifact_failed, device_failed) {
            (true, true) => out.true_positive += 1,
            (true, false) => out.false_positive += 1,
            (false, true) => out.false_negative += 1,
            (false, false) => out.true_negative += 1,
        }
        out.channels.push(ChannelComparison {
            name: channel.name.clone(),
            median_quality: median,
            device_failed,
            artifact_failed,
        });
    }
    Ok(out)
}
