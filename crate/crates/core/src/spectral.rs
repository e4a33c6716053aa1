//! Welch power spectrum with a periodic Hann window and mains-bin lookup.
//!
//! Each segment has its mean removed, is tapered, transformed, and scaled by
//! `1 / (L · Σw²)` (unnormalized DFT of length `L`), so that the one-sided
//! bins sum to the signal variance. Powers are per bin, which at 1 Hz
//! resolution coincides with per-Hz density.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::recording::ChannelSeries;

/// Smallest accepted Welch segment.
pub const MIN_SEGMENT: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("window length {0} too short (need ≥ 2)")]
    TooShort(usize),
    #[error("series of {len} samples shorter than one segment of {segment}")]
    SeriesTooShort { len: usize, segment: usize },
    #[error("resolution {resolution_hz} Hz at {sample_rate_hz} Hz gives an unusable segment length")]
    BadResolution { resolution_hz: f64, sample_rate_hz: f64 },
    #[error("overlap fraction {0} outside [0, 1)")]
    BadOverlap(f64),
    #[error("{mains_hz} Hz is not on the {bin_hz} Hz bin grid below Nyquist")]
    BinNotRepresentable { mains_hz: f64, bin_hz: f64 },
    #[error("all levels are zero")]
    AllZero,
    #[error("level {value} at index {index} is negative or non-finite")]
    InvalidLevel { index: usize, value: f64 },
}

/// One-sided per-bin power spectrum of a single channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub channel_name: String,
    pub bin_hz: f64,
    /// Bin `k` is centred on `k · bin_hz`, up to Nyquist.
    pub power: Vec<f64>,
    pub segment_count: usize,
}

impl PsdEstimate {
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.power.len()).map(|k| k as f64 * self.bin_hz)
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn peak_bin(&self) -> usize {
        let mut best = 0;
        for (k, p) in self.power.iter().enumerate() {
            if *p > self.power[best] {
                best = k;
            }
        }
        best
    }
}

/// Periodic Hann window, `w[k] = ½(1 − cos(2πk/n))`.
pub fn hann_window(n: usize) -> Result<Vec<f64>, SpectralError> {
    if n < 2 {
        return Err(SpectralError::TooShort(n));
    }
    Ok((0..n)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / n as f64).cos()))
        .collect())
}

pub fn welch_psd(
    series: &ChannelSeries,
    resolution_hz: f64,
    overlap_fraction: f64,
) -> Result<PsdEstimate, SpectralError> {
    welch_samples(
        series.name(),
        &series.samples,
        series.sample_rate_hz,
        resolution_hz,
        overlap_fraction,
    )
}

/// Welch estimate on a raw sample slice.
pub fn welch_samples(
    channel_name: &str,
    samples: &[f64],
    sample_rate_hz: f64,
    resolution_hz: f64,
    overlap_fraction: f64,
) -> Result<PsdEstimate, SpectralError> {
    let bad_resolution = SpectralError::BadResolution {
        resolution_hz,
        sample_rate_hz,
    };
    if !(resolution_hz.is_finite() && resolution_hz > 0.0 && sample_rate_hz > 0.0) {
        return Err(bad_resolution);
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(SpectralError::BadOverlap(overlap_fraction));
    }
    let segment = (sample_rate_hz / resolution_hz).round();
    if !(segment >= MIN_SEGMENT as f64) || segment > usize::MAX as f64 {
        return Err(bad_resolution);
    }
    let segment = segment as usize;
    if samples.len() < segment {
        return Err(SpectralError::SeriesTooShort {
            len: samples.len(),
            segment,
        });
    }
    let hop = ((segment as f64 * (1.0 - overlap_fraction)).round() as usize).max(1);

    let window = hann_window(segment)?;
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let scale = 1.0 / (segment as f64 * window_energy);
    let bins = segment / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment);

    let mut power = vec![0.0; bins];
    let mut buffer = vec![Complex::new(0.0, 0.0); segment];
    let mut segment_count = 0;
    let mut start = 0;
    while start + segment <= samples.len() {
        let chunk = &samples[start..start + segment];
        let mean = chunk.iter().sum::<f64>() / segment as f64;
        for ((slot, x), w) in buffer.iter_mut().zip(chunk).zip(&window) {
            *slot = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buffer);
        for (k, p) in power.iter_mut().enumerate() {
            let mut v = buffer[k].norm_sqr() * scale;
            let is_nyquist = segment % 2 == 0 && k == segment / 2;
            if k != 0 && !is_nyquist {
                v *= 2.0;
            }
            *p += v;
        }
        segment_count += 1;
        start += hop;
    }
    power.iter_mut().for_each(|p| *p /= segment_count as f64);

    Ok(PsdEstimate {
        channel_name: channel_name.to_owned(),
        bin_hz: sample_rate_hz / segment as f64,
        power,
        segment_count,
    })
}

/// Power in the bin centred on `mains_hz`.
pub fn mains_level(psd: &PsdEstimate, mains_hz: f64) -> Result<f64, SpectralError> {
    let unrepresentable = SpectralError::BinNotRepresentable {
        mains_hz,
        bin_hz: psd.bin_hz,
    };
    if !(mains_hz.is_finite() && mains_hz > 0.0) {
        return Err(unrepresentable);
    }
    let index = mains_hz / psd.bin_hz;
    let rounded = index.round();
    if (index - rounded).abs() > 1e-9 * index.max(1.0) || rounded as usize >= psd.power.len() {
        return Err(unrepresentable);
    }
    Ok(psd.power[rounded as usize])
}

/// Divides every level by the largest, so the maximum becomes exactly 1.
pub fn normalize_levels(levels: &[f64]) -> Result<Vec<f64>, SpectralError> {
    if let Some((index, &value)) = levels
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(SpectralError::InvalidLevel { index, value });
    }
    let max = levels.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(SpectralError::AllZero);
    }
    Ok(levels.iter().map(|v| v / max).collect())
}
