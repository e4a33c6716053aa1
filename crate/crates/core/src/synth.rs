//! Seeded synthetic recordings with injectable channel failures.
//!
//! Every random quantity is drawn from a ChaCha20 stream seeded with the
//! config seed; the stream number is the FNV-1a-64 hash of a label such as
//! `eeg:P7` or `motion:A.X`. Each channel therefore has its own substream
//! and the output does not depend on generation order.
//!
//! EEG channel recipe (µV):
//!
//! ```text
//! background = std · ( √0.8 · ( √c · shared + √(1−c) · private ) + √0.2 · white )
//! channel    = background + rhythm · sin(2π·rhythm_hz·t + φᵢ) + mainsᵢ · sin(2π·mains_hz·t + φ)
//! ```
//!
//! `shared` and `private` are unit-variance banks of 8 sinusoids in each of
//! the octaves 2–4, 4–8, 8–16 and 16–32 Hz (log-uniform frequencies, uniform
//! phases, equal power per octave), `white` is unit Gaussian noise, `φ` is a
//! mains phase common to all channels and `mainsᵢ` is the base mains
//! amplitude times a per-channel factor drawn from U(0.8, 1.2).

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::recording::{
    Axis, ChannelGroup, ChannelMeta, ChannelSeries, ContactQualitySeries, Recording,
    RecordingError,
};

/// Electrode labels of a 14-channel consumer headset, left to right.
pub const DEFAULT_EEG_CHANNELS: [&str; 14] = [
    "AF3", "F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8", "AF4",
];

const OCTAVES: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
const TONES_PER_OCTAVE: usize = 8;
const WHITE_FRACTION: f64 = 0.2;
const MOTION_NOISE_STD: f64 = 0.002;
const SPIKE_WIDTH_S: f64 = 0.01;
const QUALITY_JITTER_PROBABILITY: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("unknown EEG channel {0:?}")]
    UnknownChannel(String),
    #[error("invalid failure mode {0:?}")]
    InvalidFailureMode(String),
    #[error(transparent)]
    Recording(#[from] RecordingError),
}

/// How a channel is broken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureMode {
    /// The electrode picks up mains interference `multiplier` times stronger.
    HighMains { multiplier: f64 },
    /// Lost contact: brain signal and mains pickup both attenuated.
    OpenContact { attenuation: f64, mains_attenuation: f64 },
    /// Poisson-timed Gaussian spikes.
    SpikeArtefact { rate_hz: f64, amplitude_uv: f64 },
}

impl FailureMode {
    pub const HIGH_MAINS: FailureMode = FailureMode::HighMains { multiplier: 20.0 };
    pub const OPEN_CONTACT: FailureMode = FailureMode::OpenContact {
        attenuation: 0.05,
        mains_attenuation: 0.05,
    };
    pub const SPIKE_ARTEFACT: FailureMode = FailureMode::SpikeArtefact {
        rate_hz: 1.0,
        amplitude_uv: 200.0,
    };

    pub fn kind(&self) -> &'static str {
        match self {
            FailureMode::HighMains { .. } => "high-mains",
            FailureMode::OpenContact { .. } => "open-contact",
            FailureMode::SpikeArtefact { .. } => "spike-artefact",
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            FailureMode::HighMains { multiplier } => vec![multiplier],
            FailureMode::OpenContact {
                attenuation,
                mains_attenuation,
            } => vec![attenuation, mains_attenuation],
            FailureMode::SpikeArtefact {
                rate_hz,
                amplitude_uv,
            } => vec![rate_hz, amplitude_uv],
        }
    }

    fn default_of(kind: &str) -> Option<FailureMode> {
        match kind {
            "high-mains" => Some(Self::HIGH_MAINS),
            "open-contact" => Some(Self::OPEN_CONTACT),
            "spike-artefact" | "spike" => Some(Self::SPIKE_ARTEFACT),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.params().iter().all(|p| p.is_finite() && *p > 0.0) {
            Ok(())
        } else {
            Err(SynthError::InvalidFailureMode(self.to_string()))
        }
    }
}

/// `kind` alone for default parameters, otherwise `kind:p1[:p2]`.
impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind())?;
        if Self::default_of(self.kind()) != Some(*self) {
            for p in self.params() {
                write!(f, ":{p}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for FailureMode {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || SynthError::InvalidFailureMode(s.to_owned());
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut mode = Self::default_of(&kind).ok_or_else(invalid)?;
        let params = parts
            .map(|p| p.trim().parse::<f64>().map_err(|_| invalid()))
            .collect::<Result<Vec<_>, _>>()?;
        if !params.is_empty() {
            mode = match (mode, params.as_slice()) {
                (FailureMode::HighMains { .. }, [m]) => FailureMode::HighMains { multiplier: *m },
                (FailureMode::OpenContact { .. }, [a]) => FailureMode::OpenContact {
                    attenuation: *a,
                    mains_attenuation: *a,
                },
                (FailureMode::OpenContact { .. }, [a, b]) => FailureMode::OpenContact {
                    attenuation: *a,
                    mains_attenuation: *b,
                },
                (FailureMode::SpikeArtefact { .. }, [r, a]) => FailureMode::SpikeArtefact {
                    rate_hz: *r,
                    amplitude_uv: *a,
                },
                _ => return Err(invalid()),
            };
        }
        mode.validate()?;
        Ok(mode)
    }
}

impl Serialize for FailureMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FailureMode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// What the wearer is doing; sets the motion-sensor energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activity {
    /// Moderate accelerometer, strong magnetometer signals.
    #[default]
    Walking,
    /// Strong accelerometer, moderate magnetometer signals.
    HeadShaking,
    /// Sensor noise only.
    Blinking,
}

impl Activity {
    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Walking => "walking",
            Activity::HeadShaking => "head-shaking",
            Activity::Blinking => "blinking",
        }
    }

    /// (driver frequency range Hz, accelerometer level, magnetometer level)
    fn motion_profile(self) -> Option<((f64, f64), f64, f64)> {
        match self {
            Activity::Walking => Some(((1.6, 2.0), 0.3, 1.0)),
            Activity::HeadShaking => Some(((2.5, 3.5), 1.0, 0.3)),
            Activity::Blinking => None,
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Activity {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "walking" => Ok(Activity::Walking),
            "head-shaking" | "headshaking" => Ok(Activity::HeadShaking),
            "blinking" => Ok(Activity::Blinking),
            _ => Err(SynthError::InvalidConfig(format!("unknown activity {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub eeg_channel_names: Vec<String>,
    pub duration_s: f64,
    pub eeg_rate_hz: f64,
    pub motion_rate_hz: f64,
    pub mains_hz: f64,
    pub base_mains_amp_uv: f64,
    /// Standard deviation of the broadband background.
    pub background_std_uv: f64,
    /// Share of the sinusoid-bank variance common to all electrodes.
    pub common_fraction: f64,
    pub rhythm_amp_uv: f64,
    pub rhythm_hz: f64,
    pub activity: Activity,
    pub failures: BTreeMap<String, FailureMode>,
    /// Rate of emitted contact-quality traces; `None` emits none.
    pub quality_rate_hz: Option<f64>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            eeg_channel_names: DEFAULT_EEG_CHANNELS.iter().map(|s| s.to_string()).collect(),
            duration_s: 60.0,
            eeg_rate_hz: 256.0,
            motion_rate_hz: 64.0,
            mains_hz: 50.0,
            base_mains_amp_uv: 2.0,
            background_std_uv: 10.0,
            common_fraction: 0.6,
            rhythm_amp_uv: 5.0,
            rhythm_hz: 10.0,
            activity: Activity::Walking,
            failures: BTreeMap::new(),
            quality_rate_hz: Some(8.0),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_activity(mut self, activity: Activity) -> Self {
        self.activity = activity;
        self
    }

    pub fn with_failure(mut self, channel: &str, mode: FailureMode) -> Self {
        self.failures.insert(channel.to_owned(), mode);
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.eeg_channel_names.is_empty() {
            return invalid("no EEG channels".into());
        }
        let mut names: Vec<&String> = self.eeg_channel_names.iter().collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) || names.iter().any(|n| n.is_empty()) {
            return invalid("EEG channel names must be unique and non-empty".into());
        }
        for (label, value) in [
            ("duration_s", self.duration_s),
            ("eeg_rate_hz", self.eeg_rate_hz),
            ("motion_rate_hz", self.motion_rate_hz),
            ("mains_hz", self.mains_hz),
            ("rhythm_hz", self.rhythm_hz),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return invalid(format!("{label} must be positive, got {value}"));
            }
        }
        for (label, value) in [
            ("base_mains_amp_uv", self.base_mains_amp_uv),
            ("background_std_uv", self.background_std_uv),
            ("rhythm_amp_uv", self.rhythm_amp_uv),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return invalid(format!("{label} must be nonnegative, got {value}"));
            }
        }
        if !(0.0..=1.0).contains(&self.common_fraction) {
            return invalid(format!("common_fraction {} outside [0, 1]", self.common_fraction));
        }
        crate::recording::rate_ratio(self.eeg_rate_hz, self.motion_rate_hz)
            .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        // three half-overlapping 1 Hz Welch segments need two seconds
        if self.eeg_samples() < 2 * self.eeg_rate_hz.round() as usize {
            return invalid(format!("duration {} s too short (need ≥ 2 s)", self.duration_s));
        }
        if self.mains_hz >= self.eeg_rate_hz / 2.0 || self.rhythm_hz >= self.eeg_rate_hz / 2.0 {
            return invalid("mains and rhythm frequencies must lie below EEG Nyquist".into());
        }
        if let Some(rate) = self.quality_rate_hz {
            if !(rate.is_finite() && rate > 0.0) || (self.duration_s * rate).round() < 1.0 {
                return invalid(format!("quality_rate_hz {rate} invalid"));
            }
        }
        for (name, mode) in &self.failures {
            if !self.eeg_channel_names.contains(name) {
                return Err(SynthError::UnknownChannel(name.clone()));
            }
            mode.validate()?;
        }
        Ok(())
    }

    fn ratio(&self) -> usize {
        (self.eeg_rate_hz / self.motion_rate_hz).round() as usize
    }

    /// EEG sample count, rounded down to whole motion samples.
    pub fn eeg_samples(&self) -> usize {
        let ratio = self.ratio().max(1);
        let raw = (self.duration_s * self.eeg_rate_hz).round() as usize;
        raw / ratio * ratio
    }

    pub fn motion_samples(&self) -> usize {
        self.eeg_samples() / self.ratio().max(1)
    }
}

/// FNV-1a 64-bit hash, used to key random substreams by label.
fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn stream(seed: u64, label: &str) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(label));
    rng
}

/// Unit-variance sum of sinusoids, equal power per octave.
fn sinusoid_bank(rng: &mut ChaCha20Rng, samples: usize, rate: f64) -> Vec<f64> {
    let tones: Vec<(f64, f64)> = OCTAVES
        .iter()
        .flat_map(|&lo| (0..TONES_PER_OCTAVE).map(move |_| lo))
        .map(|lo| {
            let freq = lo * 2f64.powf(rng.random::<f64>());
            (freq, TAU * rng.random::<f64>())
        })
        .collect();
    let amp = (2.0 / tones.len() as f64).sqrt();
    (0..samples)
        .map(|k| {
            let t = k as f64 / rate;
            tones.iter().map(|(f, ph)| (TAU * f * t + ph).sin()).sum::<f64>() * amp
        })
        .collect()
}

fn sine(amp: f64, freq: f64, phase: f64, samples: usize, rate: f64) -> Vec<f64> {
    (0..samples)
        .map(|k| amp * (TAU * freq * k as f64 / rate + phase).sin())
        .collect()
}

/// Modifies the mains-free part and the mains part of a channel in place.
fn apply_failure(
    signal: &mut [f64],
    mains: &mut [f64],
    mode: FailureMode,
    rng: &mut ChaCha20Rng,
    rate: f64,
) {
    match mode {
        FailureMode::HighMains { multiplier } => mains.iter_mut().for_each(|m| *m *= multiplier),
        FailureMode::OpenContact {
            attenuation,
            mains_attenuation,
        } => {
            signal.iter_mut().for_each(|s| *s *= attenuation);
            mains.iter_mut().for_each(|m| *m *= mains_attenuation);
        }
        FailureMode::SpikeArtefact {
            rate_hz,
            amplitude_uv,
        } => {
            let gaps = Exp::new(rate_hz).expect("validated spike rate");
            let duration = signal.len() as f64 / rate;
            let width = SPIKE_WIDTH_S * rate;
            let reach = (5.0 * width).ceil() as isize;
            let mut t = gaps.sample(rng);
            while t < duration {
                let centre = (t * rate).round() as isize;
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                for d in -reach..=reach {
                    let k = centre + d;
                    if (0..signal.len() as isize).contains(&k) {
                        let x = d as f64 / width;
                        signal[k as usize] += sign * amplitude_uv * (-0.5 * x * x).exp();
                    }
                }
                t += gaps.sample(rng);
            }
        }
    }
}

fn eeg_channel(
    config: &SynthConfig,
    name: &str,
    shared: &[f64],
    mains_phase: f64,
) -> (Vec<f64>, Vec<f64>, ChaCha20Rng) {
    let n = shared.len();
    let rate = config.eeg_rate_hz;
    let mut rng = stream(config.seed, &format!("eeg:{name}"));
    let private = sinusoid_bank(&mut rng, n, rate);
    let rhythm_phase = TAU * rng.random::<f64>();
    let mains_factor = rng.random_range(0.8..1.2);

    let c = config.common_fraction;
    let (ws, wp) = ((1.0 - WHITE_FRACTION).sqrt() * c.sqrt(), (1.0 - WHITE_FRACTION).sqrt() * (1.0 - c).sqrt());
    let ww = WHITE_FRACTION.sqrt();
    let rhythm = sine(config.rhythm_amp_uv, config.rhythm_hz, rhythm_phase, n, rate);
    let signal: Vec<f64> = (0..n)
        .map(|k| {
            let white: f64 = rng.sample(StandardNormal);
            config.background_std_uv * (ws * shared[k] + wp * private[k] + ww * white) + rhythm[k]
        })
        .collect();
    let mains = sine(
        config.base_mains_amp_uv * mains_factor,
        config.mains_hz,
        mains_phase,
        n,
        rate,
    );
    (signal, mains, stream(config.seed, &format!("failure:{name}")))
}

fn motion_channels(config: &SynthConfig) -> Vec<ChannelSeries> {
    let n = config.motion_samples();
    let rate = config.motion_rate_hz;
    let mut driver_rng = stream(config.seed, "motion:driver");
    let profile = config.activity.motion_profile();
    let (freq, phase, harmonic_phase, mag_lag) = (
        profile.map_or(0.0, |((lo, hi), _, _)| driver_rng.random_range(lo..hi)),
        TAU * driver_rng.random::<f64>(),
        TAU * driver_rng.random::<f64>(),
        driver_rng.random_range(0.0..0.3),
    );

    let mut out = Vec::with_capacity(6);
    for (group, prefix) in [
        (ChannelGroup::Accelerometer, "A"),
        (ChannelGroup::Magnetometer, "M"),
    ] {
        for axis in Axis::ALL {
            let name = format!("{prefix}.{axis}");
            let mut rng = stream(config.seed, &format!("motion:{name}"));
            let offset = if group == ChannelGroup::Accelerometer && axis == Axis::Z {
                1.0
            } else {
                rng.random_range(-0.5..0.5)
            };
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let gain_scale = rng.random_range(0.6..1.0);
            let (level, lag) = match (profile, group) {
                (Some((_, acc, _)), ChannelGroup::Accelerometer) => (acc, 0.0),
                (Some((_, _, mag)), _) => (mag, mag_lag),
                (None, _) => (0.0, 0.0),
            };
            let gain = sign * gain_scale * level;
            let samples = (0..n)
                .map(|k| {
                    let t = k as f64 / rate;
                    let drive = (TAU * freq * t + phase + lag).sin()
                        + 0.3 * (2.0 * TAU * freq * t + harmonic_phase + lag).sin();
                    let noise: f64 = rng.sample(StandardNormal);
                    offset + gain * drive + MOTION_NOISE_STD * noise
                })
                .collect();
            out.push(ChannelSeries {
                meta: ChannelMeta::motion(name, group, axis),
                sample_rate_hz: rate,
                samples,
            });
        }
    }
    out
}

fn quality_trace(config: &SynthConfig, name: &str, rate: f64) -> ContactQualitySeries {
    let n = ((config.duration_s * rate).round() as usize).max(1);
    let base: i64 = match config.failures.get(name) {
        None => 4,
        Some(FailureMode::HighMains { .. }) => 2,
        Some(FailureMode::SpikeArtefact { .. }) => 3,
        Some(FailureMode::OpenContact { .. }) => 0,
    };
    let mut rng = stream(config.seed, &format!("quality:{name}"));
    let values = (0..n)
        .map(|_| {
            let mut v = base;
            if rng.random::<f64>() < QUALITY_JITTER_PROBABILITY {
                v += if rng.random::<bool>() { 1 } else { -1 };
            }
            v.clamp(0, 4) as u8
        })
        .collect();
    ContactQualitySeries {
        channel_name: name.to_owned(),
        sample_rate_hz: rate,
        values,
    }
}

/// Generates a recording; identical configs give bit-identical output.
pub fn generate(config: &SynthConfig) -> Result<Recording, SynthError> {
    config.validate()?;
    let n = config.eeg_samples();
    let rate = config.eeg_rate_hz;
    let shared = sinusoid_bank(&mut stream(config.seed, "eeg:shared"), n, rate);
    let mains_phase = TAU * stream(config.seed, "mains").random::<f64>();

    let eeg = config
        .eeg_channel_names
        .iter()
        .map(|name| {
            let (mut signal, mut mains, mut rng) = eeg_channel(config, name, &shared, mains_phase);
            if let Some(mode) = config.failures.get(name) {
                apply_failure(&mut signal, &mut mains, *mode, &mut rng, rate);
            }
            let samples = signal.iter().zip(&mains).map(|(s, m)| s + m).collect();
            ChannelSeries {
                meta: ChannelMeta::eeg(name.clone()),
                sample_rate_hz: rate,
                samples,
            }
        })
        .collect();

    let quality = config.quality_rate_hz.map(|q| {
        config
            .eeg_channel_names
            .iter()
            .map(|name| quality_trace(config, name, q))
            .collect()
    });

    let metadata = BTreeMap::from([
        ("generator".to_owned(), "eeg-sentinel synth v1".to_owned()),
        ("seed".to_owned(), config.seed.to_string()),
        ("activity".to_owned(), config.activity.to_string()),
        ("mains_hz".to_owned(), config.mains_hz.to_string()),
        (
            "background_recipe".to_owned(),
            format!(
                "std {} uV; 0.8 of variance from 4 octave banks (2-32 Hz, 8 tones each, common fraction {}), 0.2 white; rhythm {} uV at {} Hz; mains {} uV x U(0.8,1.2) at {} Hz, common phase",
                config.background_std_uv,
                config.common_fraction,
                config.rhythm_amp_uv,
                config.rhythm_hz,
                config.base_mains_amp_uv,
                config.mains_hz
            ),
        ),
        (
            "rng".to_owned(),
            "ChaCha20 seeded from seed, stream = FNV-1a-64(label)".to_owned(),
        ),
    ]);

    let recording = Recording {
        eeg,
        motion: motion_channels(config),
        quality,
        ground_truth: Some(config.failures.clone()),
        metadata,
    };
    recording.validate()?;
    Ok(recording)
}

/// Least-squares fit of a `freq` Hz sinusoid to the mean-removed samples.
fn fit_sinusoid(samples: &[f64], freq: f64, rate: f64) -> Vec<f64> {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut ss, mut cc, mut sc, mut xs, mut xc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (k, x) in samples.iter().enumerate() {
        let (s, c) = (TAU * freq * k as f64 / rate).sin_cos();
        let x = x - mean;
        ss += s * s;
        cc += c * c;
        sc += s * c;
        xs += x * s;
        xc += x * c;
    }
    let det = ss * cc - sc * sc;
    if det.abs() < 1e-12 * (ss * cc).max(1e-300) {
        return vec![0.0; samples.len()];
    }
    let a = (xs * cc - xc * sc) / det;
    let b = (xc * ss - xs * sc) / det;
    (0..samples.len())
        .map(|k| {
            let (s, c) = (TAU * freq * k as f64 / rate).sin_cos();
            a * s + b * c
        })
        .collect()
}

/// Injects `mode` into one EEG channel of an existing recording.
///
/// The mains component is estimated by a least-squares sinusoid fit at the
/// recording's `mains_hz` metadata value (50 Hz when absent). Only the named
/// channel's samples change; the ground-truth map records the injection.
pub fn inject_failure(
    recording: &Recording,
    channel: &str,
    mode: FailureMode,
    seed: u64,
) -> Result<Recording, SynthError> {
    mode.validate()?;
    let index = recording
        .eeg
        .iter()
        .position(|s| s.name() == channel)
        .ok_or_else(|| SynthError::UnknownChannel(channel.to_owned()))?;
    let mains_hz = recording
        .metadata
        .get("mains_hz")
        .and_then(|v| v.parse::<f64>().ok())
        .unwrap_or(50.0);

    let mut out = recording.clone();
    let series = &mut out.eeg[index];
    let rate = series.sample_rate_hz;
    let mut mains = if mains_hz < rate / 2.0 {
        fit_sinusoid(&series.samples, mains_hz, rate)
    } else {
        vec![0.0; series.len()]
    };
    let mut signal: Vec<f64> = series.samples.iter().zip(&mains).map(|(x, m)| x - m).collect();
    let mut rng = stream(seed, &format!("inject:{channel}"));
    apply_failure(&mut signal, &mut mains, mode, &mut rng, rate);
    series.samples = signal.iter().zip(&mains).map(|(s, m)| s + m).collect();

    out.ground_truth
        .get_or_insert_with(BTreeMap::new)
        .insert(channel.to_owned(), mode);
    Ok(out)
}

/// Mean of the sample standard deviations of the motion channels.
pub fn mean_motion_std(recording: &Recording) -> f64 {
    let stds: Vec<f64> = recording
        .motion
        .iter()
        .map(|s| crate::preprocess::mean_and_std(&s.samples).1)
        .collect();
    stds.iter().sum::<f64>() / stds.len() as f64
}
