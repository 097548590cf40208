//! Short-time coherence and sensitivity analysis of repeated room impulse
//! responses.
//!
//! Two recordings of the same source-receiver setup differ by noise and by
//! whatever changed in the room between them. [`coherence`] measures the
//! short-time coherence of a pair, predicts the part of its loss explained by
//! noise alone and separates out the environmental part. [`sensitivity`]
//! condenses a coherence curve into a single energy-weighted rating per band
//! or frequency bin. [`synth`] generates pairs with known ground truth and
//! [`ingest`] reads WAV files and session manifests.
//!
//! Everything is generic over the scalar type (`f32` or `f64`). The aliases
//! below fix it to `f64`; the `*32` variants use `f32`.
//!
//! ```
//! use rircoh::sensitivity::analyze_band;
//! use rircoh::synth::{gen_mixing_pair, SynthConfig};
//! use rircoh::{AnalysisConfig, Band, SyntheticPair};
//!
//! let cfg = SynthConfig::default().with_sample_rate(16000).with_seed(3);
//! let pair: SyntheticPair = gen_mixing_pair(0.7, 0.4, &cfg).unwrap();
//! let result = analyze_band(pair.x(), pair.y(), Band::Broadband, &AnalysisConfig::default()).unwrap();
//! let rating = result.rating.unwrap().gamma_rating();
//! assert!(rating > 0.2 && rating < 0.8);
//! ```

pub mod coherence;
pub mod dsp;
pub mod error;
pub mod ingest;
pub mod scalar;
pub mod sensitivity;
pub mod stats;
pub mod synth;
pub mod types;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use types::{AnalysisConfig, AnalysisConfigBuilder, Band, BandSpec, NoiseRegion, PairId, RirMeta};

pub type Rir = types::Rir<f64>;
pub type CoherenceCurve = types::CoherenceCurve<f64>;
pub type EnergyEnvelope = types::EnergyEnvelope<f64>;
pub type SensitivityRating = types::SensitivityRating<f64>;
pub type TfCoherenceMap = types::TfCoherenceMap<f64>;
pub type BandSignal = dsp::BandSignal<f64>;
pub type StftGrid = dsp::StftGrid<f64>;
pub type SyntheticPair = synth::SyntheticPair<f64>;

pub type Rir32 = types::Rir<f32>;
pub type CoherenceCurve32 = types::CoherenceCurve<f32>;
pub type EnergyEnvelope32 = types::EnergyEnvelope<f32>;
pub type SensitivityRating32 = types::SensitivityRating<f32>;
pub type TfCoherenceMap32 = types::TfCoherenceMap<f32>;
pub type BandSignal32 = dsp::BandSignal<f32>;
pub type StftGrid32 = dsp::StftGrid<f32>;
pub type SyntheticPair32 = synth::SyntheticPair<f32>;
