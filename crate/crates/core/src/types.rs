//! Immutable domain types shared by every analysis stage.
//!
//! Every constructor validates its invariants and fails with
//! [`Error::Validation`]; once built, values never change. Time axes are in
//! seconds from the first sample of the recording.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Where the noise floor of a recording may be estimated from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NoiseRegion {
    /// Final 5% of the recording; the recording must be at least one second long.
    #[default]
    Tail,
    /// Final 5% of a recording explicitly flagged as short.
    ShortTail,
    /// Explicit segment in seconds, `start <= t < end`.
    Segment { start: f64, end: f64 },
    /// The recording was cut before reaching its noise floor; no estimate is possible.
    Truncated,
}

/// Opaque labels attached to a recording.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RirMeta {
    /// Unique label used to build pair identifiers.
    pub label: String,
    pub channel_id: String,
    pub source_id: String,
    pub receiver_id: String,
    pub condition_id: String,
    pub noise: NoiseRegion,
}

impl RirMeta {
    pub fn labeled(label: impl Into<String>) -> Self {
        RirMeta {
            label: label.into(),
            ..Default::default()
        }
    }

    pub fn with_noise(mut self, noise: NoiseRegion) -> Self {
        self.noise = noise;
        self
    }
}

/// A single-channel room impulse response.
#[derive(Debug, Clone, PartialEq)]
pub struct Rir<T> {
    sample_rate: u32,
    samples: Vec<T>,
    meta: RirMeta,
}

impl<T: Scalar> Rir<T> {
    pub fn new(sample_rate: u32, samples: Vec<T>, meta: RirMeta) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::validation("Rir", "sample rate must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::validation("Rir", "no samples"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::validation(
                "Rir",
                format!("sample {i} of '{}' is not finite", meta.label),
            ));
        }
        if samples.iter().all(|s| s.is_zero()) {
            return Err(Error::validation(
                "Rir",
                format!("'{}' is all zeros", meta.label),
            ));
        }
        Ok(Rir {
            sample_rate,
            samples,
            meta,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn meta(&self) -> &RirMeta {
        &self.meta
    }

    pub fn label(&self) -> &str {
        &self.meta.label
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Same recording multiplied by a constant.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Rir::new(
            self.sample_rate,
            self.samples.iter().map(|&s| s * factor).collect(),
            self.meta.clone(),
        )
    }

    pub fn with_meta(mut self, meta: RirMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn energy(&self) -> T {
        self.samples.iter().map(|&s| s * s).sum()
    }
}

/// A constant-bandwidth analysis band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    center: f64,
    bandwidth: f64,
}

impl BandSpec {
    pub fn new(center: f64, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::validation("BandSpec", "bandwidth must be positive"));
        }
        if !(center.is_finite() && center - bandwidth / 2.0 > 0.0) {
            return Err(Error::validation(
                "BandSpec",
                format!("band {center} Hz +/- {} Hz reaches below 0 Hz", bandwidth / 2.0),
            ));
        }
        Ok(BandSpec { center, bandwidth })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn low(&self) -> f64 {
        self.center - self.bandwidth / 2.0
    }

    pub fn high(&self) -> f64 {
        self.center + self.bandwidth / 2.0
    }

    /// Checks the band against the Nyquist limit of `sample_rate`.
    pub fn check_rate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if self.high() >= nyquist {
            return Err(Error::validation(
                "BandSpec",
                format!(
                    "band upper edge {} Hz is not below Nyquist {} Hz",
                    self.high(),
                    nyquist
                ),
            ));
        }
        Ok(())
    }

    /// Nineteen 1 kHz wide bands centered at 1, 2, ..., 19 kHz.
    pub fn standard_sweep() -> Vec<BandSpec> {
        (1..=19)
            .map(|k| BandSpec {
                center: 1000.0 * k as f64,
                bandwidth: 1000.0,
            })
            .collect()
    }
}

/// Either a narrow band or the full-band analytic signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Band {
    Broadband,
    Narrow(BandSpec),
    /// A single STFT bin, by its center frequency in Hz.
    Bin(f64),
}

impl Band {
    pub fn center_label(&self) -> String {
        match self {
            Band::Broadband => "broadband".to_string(),
            Band::Narrow(b) => format!("{}", b.center()),
            Band::Bin(f) => format!("{f}"),
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::Broadband => write!(f, "broadband"),
            Band::Narrow(b) => write!(f, "{} Hz (bw {} Hz)", b.center(), b.bandwidth()),
            Band::Bin(freq) => write!(f, "bin {freq} Hz"),
        }
    }
}

impl From<BandSpec> for Band {
    fn from(b: BandSpec) -> Self {
        Band::Narrow(b)
    }
}

/// Parameters of the analysis chain.
///
/// Defaults: 10 ms short-time average, 30 dB SNR threshold, 512-sample Hann
/// STFT with a 128-sample hop, guard of `1e-12` relative to peak energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    avg_window: f64,
    snr_threshold_db: f64,
    stft_window_len: usize,
    stft_hop: usize,
    guard_epsilon: f64,
    tf_half_span: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            avg_window: 0.010,
            snr_threshold_db: 30.0,
            stft_window_len: 512,
            stft_hop: 128,
            guard_epsilon: 1e-12,
            tf_half_span: None,
        }
    }
}

impl AnalysisConfig {
    pub fn builder() -> AnalysisConfigBuilder {
        AnalysisConfigBuilder {
            config: AnalysisConfig::default(),
        }
    }

    /// Short-time expectation window in seconds.
    pub fn avg_window(&self) -> f64 {
        self.avg_window
    }

    pub fn snr_threshold_db(&self) -> f64 {
        self.snr_threshold_db
    }

    pub fn stft_window_len(&self) -> usize {
        self.stft_window_len
    }

    pub fn stft_hop(&self) -> usize {
        self.stft_hop
    }

    pub fn guard_epsilon(&self) -> f64 {
        self.guard_epsilon
    }

    /// Half-width `L` of the frame average used by time-frequency coherence
    /// (`2L + 1` frames).
    ///
    /// When unset, `L` is chosen so that the effective duration of the average,
    /// `18 N / 35 + 2 L hop` samples (the first term is the energy-equivalent
    /// length of one Hann frame of `N` samples), is closest to the averaging
    /// window; at least 1. The defaults give `L = 1`.
    pub fn tf_half_span(&self, sample_rate: u32) -> usize {
        self.tf_half_span.unwrap_or_else(|| {
            let frame = 18.0 * self.stft_window_len as f64 / 35.0;
            let span = self.avg_window * sample_rate as f64;
            (((span - frame) / (2.0 * self.stft_hop as f64)).round().max(0.0) as usize).max(1)
        })
    }

    pub fn to_builder(self) -> AnalysisConfigBuilder {
        AnalysisConfigBuilder { config: self }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::Config(reason));
        if !(self.avg_window.is_finite() && self.avg_window > 0.0) {
            return bad(format!("averaging window {} s must be positive", self.avg_window));
        }
        if !(self.snr_threshold_db.is_finite() && self.snr_threshold_db > 0.0) {
            return bad(format!(
                "SNR threshold {} dB must be positive",
                self.snr_threshold_db
            ));
        }
        if self.stft_hop == 0 || self.stft_hop > self.stft_window_len {
            return bad(format!(
                "STFT hop {} must lie in 1..={}",
                self.stft_hop, self.stft_window_len
            ));
        }
        if !(self.guard_epsilon.is_finite() && self.guard_epsilon > 0.0) {
            return bad(format!("guard epsilon {} must be positive", self.guard_epsilon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisConfigBuilder {
    config: AnalysisConfig,
}

impl AnalysisConfigBuilder {
    pub fn avg_window(mut self, seconds: f64) -> Self {
        self.config.avg_window = seconds;
        self
    }

    pub fn snr_threshold_db(mut self, db: f64) -> Self {
        self.config.snr_threshold_db = db;
        self
    }

    pub fn stft_window_len(mut self, len: usize) -> Self {
        self.config.stft_window_len = len;
        self
    }

    pub fn stft_hop(mut self, hop: usize) -> Self {
        self.config.stft_hop = hop;
        self
    }

    pub fn guard_epsilon(mut self, eps: f64) -> Self {
        self.config.guard_epsilon = eps;
        self
    }

    pub fn tf_half_span(mut self, frames: usize) -> Self {
        self.config.tf_half_span = Some(frames);
        self
    }

    pub fn build(self) -> Result<AnalysisConfig> {
        self.config.validate()?;
        Ok(self.config)
    }
}

/// Identifies the two recordings of an analysis pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairId {
    pub reference: String,
    pub comparison: String,
}

impl PairId {
    pub fn new(reference: impl Into<String>, comparison: impl Into<String>) -> Self {
        PairId {
            reference: reference.into(),
            comparison: comparison.into(),
        }
    }

    pub fn swapped(&self) -> Self {
        PairId::new(self.comparison.clone(), self.reference.clone())
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}~{}", self.reference, self.comparison)
    }
}

fn check_time_axis<T: Scalar>(what: &'static str, times: &[T]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::validation(what, "time axis contains non-finite values"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation(what, "time axis is not strictly increasing"));
    }
    Ok(())
}

/// Squared short-time coherence over time for one pair and one band.
///
/// `None` marks an undefined point (no energy in the averaging window).
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCurve<T> {
    times: Vec<T>,
    gamma: Vec<Option<T>>,
    band: Band,
    pair_id: PairId,
}

impl<T: Scalar> CoherenceCurve<T> {
    pub fn new(times: Vec<T>, gamma: Vec<Option<T>>, band: Band, pair_id: PairId) -> Result<Self> {
        if times.len() != gamma.len() {
            return Err(Error::validation(
                "CoherenceCurve",
                format!("{} times but {} values", times.len(), gamma.len()),
            ));
        }
        check_time_axis("CoherenceCurve", &times)?;
        if let Some((i, g)) = gamma
            .iter()
            .enumerate()
            .find_map(|(i, g)| g.filter(|g| !(*g >= T::zero() && *g <= T::one())).map(|g| (i, g)))
        {
            return Err(Error::validation(
                "CoherenceCurve",
                format!("value {g} at index {i} outside [0, 1]"),
            ));
        }
        Ok(CoherenceCurve {
            times,
            gamma,
            band,
            pair_id,
        })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn gamma(&self) -> &[Option<T>] {
        &self.gamma
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn pair_id(&self) -> &PairId {
        &self.pair_id
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Defined values with their indices.
    pub fn defined(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.gamma
            .iter()
            .enumerate()
            .filter_map(|(i, g)| g.map(|g| (i, g)))
    }

    pub fn with_pair_id(mut self, pair_id: PairId) -> Self {
        self.pair_id = pair_id;
        self
    }
}

/// Short-time signal and noise energies of one band signal.
///
/// `total_power` is the short-time average of `|x|^2` (signal plus noise);
/// `signal_energy` is that power with the noise energy removed and floored at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyEnvelope<T> {
    times: Vec<T>,
    total_power: Vec<T>,
    signal_energy: Vec<T>,
    noise_energy: T,
    band: Band,
    source: String,
}

impl<T: Scalar> EnergyEnvelope<T> {
    pub fn new(
        times: Vec<T>,
        total_power: Vec<T>,
        signal_energy: Vec<T>,
        noise_energy: T,
        band: Band,
        source: impl Into<String>,
    ) -> Result<Self> {
        if times.len() != total_power.len() || times.len() != signal_energy.len() {
            return Err(Error::validation(
                "EnergyEnvelope",
                "times, total power and signal energy lengths differ",
            ));
        }
        check_time_axis("EnergyEnvelope", &times)?;
        if !(noise_energy.is_finite() && noise_energy >= T::zero()) {
            return Err(Error::validation(
                "EnergyEnvelope",
                format!("noise energy {noise_energy} must be finite and >= 0"),
            ));
        }
        let nonneg = |v: &[T]| v.iter().all(|e| e.is_finite() && *e >= T::zero());
        if !nonneg(&signal_energy) || !nonneg(&total_power) {
            return Err(Error::validation(
                "EnergyEnvelope",
                "energies must be finite and >= 0",
            ));
        }
        Ok(EnergyEnvelope {
            times,
            total_power,
            signal_energy,
            noise_energy,
            band,
            source: source.into(),
        })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn total_power(&self) -> &[T] {
        &self.total_power
    }

    pub fn signal_energy(&self) -> &[T] {
        &self.signal_energy
    }

    pub fn noise_energy(&self) -> T {
        self.noise_energy
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Sensitivity rating of one pair in one band.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRating<T> {
    band: Band,
    gamma_rating: T,
    onset_index: usize,
    truncation_index: usize,
    truncation_time: T,
    pair_id: PairId,
}

impl<T: Scalar> SensitivityRating<T> {
    pub fn new(
        band: Band,
        gamma_rating: T,
        onset_index: usize,
        truncation_index: usize,
        truncation_time: T,
        pair_id: PairId,
    ) -> Result<Self> {
        if !(gamma_rating >= T::zero() && gamma_rating <= T::one()) {
            return Err(Error::validation(
                "SensitivityRating",
                format!("rating {gamma_rating} outside [0, 1]"),
            ));
        }
        if onset_index > truncation_index {
            return Err(Error::validation(
                "SensitivityRating",
                format!("onset {onset_index} after truncation {truncation_index}"),
            ));
        }
        Ok(SensitivityRating {
            band,
            gamma_rating,
            onset_index,
            truncation_index,
            truncation_time,
            pair_id,
        })
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn gamma_rating(&self) -> T {
        self.gamma_rating
    }

    pub fn onset_index(&self) -> usize {
        self.onset_index
    }

    /// Last index included in the rating sums.
    pub fn truncation_index(&self) -> usize {
        self.truncation_index
    }

    pub fn truncation_time(&self) -> T {
        self.truncation_time
    }

    pub fn pair_id(&self) -> &PairId {
        &self.pair_id
    }
}

/// Squared short-time coherence on a time-frequency grid, `gamma[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TfCoherenceMap<T> {
    times: Vec<T>,
    freqs: Vec<T>,
    gamma: Vec<Vec<Option<T>>>,
    pair_id: PairId,
}

impl<T: Scalar> TfCoherenceMap<T> {
    pub fn new(
        times: Vec<T>,
        freqs: Vec<T>,
        gamma: Vec<Vec<Option<T>>>,
        pair_id: PairId,
    ) -> Result<Self> {
        if gamma.len() != times.len() || gamma.iter().any(|row| row.len() != freqs.len()) {
            return Err(Error::validation(
                "TfCoherenceMap",
                "grid dimensions do not match the axes",
            ));
        }
        check_time_axis("TfCoherenceMap", &times)?;
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "TfCoherenceMap",
                "frequency axis is not strictly increasing",
            ));
        }
        let out_of_range = gamma
            .iter()
            .flatten()
            .flatten()
            .any(|g| !(*g >= T::zero() && *g <= T::one()));
        if out_of_range {
            return Err(Error::validation("TfCoherenceMap", "value outside [0, 1]"));
        }
        Ok(TfCoherenceMap {
            times,
            freqs,
            gamma,
            pair_id,
        })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    /// Rows are frames, columns are frequency bins.
    pub fn gamma(&self) -> &[Vec<Option<T>>] {
        &self.gamma
    }

    pub fn get(&self, frame: usize, bin: usize) -> Option<T> {
        self.gamma[frame][bin]
    }

    pub fn pair_id(&self) -> &PairId {
        &self.pair_id
    }

    /// Coherence of one frequency bin over time.
    pub fn bin_series(&self, bin: usize) -> Vec<Option<T>> {
        self.gamma.iter().map(|row| row[bin]).collect()
    }
}
