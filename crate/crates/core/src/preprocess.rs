//! Brings every channel to the motion-sensor rate and a common scale, and
//! stacks the result into the time × channel feature matrix fed to PCA.

use ndarray::Array2;

use crate::recording::{ChannelGroup, ChannelSeries, Recording, RecordingError};

/// Sample standard deviations below this are treated as a constant channel.
pub const DEGENERATE_STD: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error("decimation factor {factor} invalid for a series of {len} samples")]
    FactorTooLarge { factor: usize, len: usize },
    #[error("z-score needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error(transparent)]
    Recording(#[from] RecordingError),
}

/// Time × channel matrix of z-scored, common-rate channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub channel_names: Vec<String>,
    pub groups: Vec<ChannelGroup>,
    pub sample_rate_hz: f64,
    /// Channels whose source was constant; their columns are all zero.
    pub degenerate: Vec<String>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|n| n == name)
    }
}

/// Block-mean decimation; a trailing partial block is dropped.
pub fn decimate(series: &ChannelSeries, factor: usize) -> Result<ChannelSeries, PreprocessError> {
    let samples = decimate_samples(&series.samples, factor)?;
    Ok(ChannelSeries {
        meta: series.meta.clone(),
        sample_rate_hz: series.sample_rate_hz / factor as f64,
        samples,
    })
}

pub fn decimate_samples(samples: &[f64], factor: usize) -> Result<Vec<f64>, PreprocessError> {
    if factor == 0 || samples.len() < factor {
        return Err(PreprocessError::FactorTooLarge {
            factor,
            len: samples.len(),
        });
    }
    if factor == 1 {
        return Ok(samples.to_vec());
    }
    Ok(samples
        .chunks_exact(factor)
        .map(|block| block.iter().sum::<f64>() / factor as f64)
        .collect())
}

/// Sample mean and standard deviation (divisor N − 1), two-pass.
pub fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Standardizes to zero mean and unit sample standard deviation.
///
/// Constant input (std below [`DEGENERATE_STD`]) yields all zeros and
/// `is_degenerate = true` instead of an error.
pub fn zscore(samples: &[f64]) -> Result<(Vec<f64>, bool), PreprocessError> {
    if samples.len() < 2 {
        return Err(PreprocessError::TooShort(samples.len()));
    }
    let (mean, std) = mean_and_std(samples);
    if !(std >= DEGENERATE_STD) {
        return Ok((vec![0.0; samples.len()], true));
    }
    let mut out: Vec<f64> = samples.iter().map(|v| (v - mean) / std).collect();
    // second pass removes the rounding residue of the first
    let (m2, s2) = mean_and_std(&out);
    if s2 > 0.0 {
        out.iter_mut().for_each(|v| *v = (*v - m2) / s2);
    }
    Ok((out, false))
}

fn motion_order(series: &ChannelSeries) -> (u8, u8) {
    let group = match series.meta.group {
        ChannelGroup::Accelerometer => 0,
        ChannelGroup::Magnetometer => 1,
        ChannelGroup::Eeg => 2,
    };
    (group, series.meta.axis.map_or(3, |a| a as u8))
}

/// Builds the feature matrix: EEG decimated to the motion rate, every
/// column z-scored. Columns are EEG in recording order, then accelerometer
/// X, Y, Z, then magnetometer X, Y, Z.
pub fn build_feature_matrix(recording: &Recording) -> Result<FeatureMatrix, PreprocessError> {
    recording.validate()?;
    let factor = recording.rate_ratio()?;

    let mut motion: Vec<&ChannelSeries> = recording.motion.iter().collect();
    motion.sort_by_key(|s| motion_order(s));

    let mut columns: Vec<(&ChannelSeries, Vec<f64>)> = Vec::new();
    for series in &recording.eeg {
        columns.push((series, decimate_samples(&series.samples, factor)?));
    }
    for series in motion {
        columns.push((series, series.samples.clone()));
    }

    let rows = columns.iter().map(|(_, c)| c.len()).min().unwrap_or(0);
    let mut values = Array2::zeros((rows, columns.len()));
    let mut degenerate = Vec::new();
    for (j, (series, column)) in columns.iter().enumerate() {
        let (z, is_degenerate) = zscore(&column[..rows])?;
        if is_degenerate {
            degenerate.push(series.name().to_owned());
        }
        values.column_mut(j).iter_mut().zip(z).for_each(|(dst, v)| *dst = v);
    }

    Ok(FeatureMatrix {
        values,
        channel_names: columns.iter().map(|(s, _)| s.name().to_owned()).collect(),
        groups: columns.iter().map(|(s, _)| s.meta.group).collect(),
        sample_rate_hz: recording.motion_rate_hz(),
        degenerate,
    })
}
