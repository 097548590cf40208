//! Signal-processing primitives: demodulation, STFT, averaging, envelopes,
//! onset detection and reverberation time.

pub mod average;
pub mod demod;
pub mod filter;
pub mod noise;
pub mod onset;
pub mod rt;
pub mod stft;

pub use average::{moving_average, short_time_average};
pub use demod::{analytic_signal, band_demodulate, demodulate, BandSignal};
pub use noise::{energy_envelope, estimate_noise_floor};
pub use onset::detect_onset;
pub use rt::estimate_rt;
pub use stft::{stft, StftGrid, WindowKind};
