//! Failed-channel detection for multi-rate wireless EEG recordings.
//!
//! Two independent kinds of evidence are combined per EEG channel:
//!
//! * the correlation structure of channel loadings in a two-component PCA
//!   plane, computed on the EEG and motion channels together at the motion
//!   rate ([`pca`]);
//! * the level of the 50/60 Hz mains-interference bin of a Welch spectrum,
//!   normalised across channels and ranked with a fixed quota ([`spectral`],
//!   [`detect`]).
//!
//! [`synth`] generates seeded recordings with injectable failures, which is
//! how the detector is tested.
//!
//! ```
//! use eeg_sentinel::detect::{assess, DetectorConfig, Verdict};
//! use eeg_sentinel::synth::{generate, FailureMode, SynthConfig};
//!
//! let config = SynthConfig { duration_s: 20.0, ..SynthConfig::default() }
//!     .with_seed(3)
//!     .with_failure("T8", FailureMode::HIGH_MAINS);
//! let recording = generate(&config).unwrap();
//! let report = assess(&recording, &DetectorConfig::default()).unwrap();
//! assert!(report.channel("T8").unwrap().verdict != Verdict::Good);
//! ```

pub mod cli;
pub mod detect;
pub mod export;
pub mod numfmt;
pub mod pca;
pub mod preprocess;
pub mod recording;
pub mod spectral;
pub mod synth;

pub use detect::{assess, ChannelQualityReport, DetectorConfig, Verdict};
pub use recording::{load_bundle, write_bundle, Recording};
