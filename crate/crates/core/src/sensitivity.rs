//! Sensitivity rating: the energy-weighted mean coherence loss over the
//! region where both recordings stay above the SNR threshold.

use rayon::prelude::*;

use crate::coherence::{
    align_pair, environment_coherence, expected_coherence, short_time_coherence, tf_coherence,
};
use crate::dsp::average::moving_average;
use crate::dsp::demod::demodulate;
use crate::dsp::noise::{energy_envelope, estimate_noise_floor, noise_floor_of};
use crate::dsp::onset::detect_onset;
use crate::dsp::stft::{stft, StftGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::median;
use crate::types::{
    AnalysisConfig, Band, CoherenceCurve, EnergyEnvelope, Rir, SensitivityRating,
    TfCoherenceMap,
};

fn check_axes<T: Scalar>(a: &EnergyEnvelope<T>, b: &EnergyEnvelope<T>) -> Result<()> {
    if a.times() != b.times() {
        return Err(Error::Pairing(format!(
            "envelopes of '{}' and '{}' are on different time axes",
            a.source(),
            b.source()
        )));
    }
    Ok(())
}

fn snr_ok<T: Scalar>(env: &EnergyEnvelope<T>, i: usize, ratio: T) -> bool {
    let n = env.noise_energy();
    n == T::zero() || env.signal_energy()[i] >= ratio * n
}

/// Last index of the first contiguous run, starting at `onset`, where both
/// envelopes have `E_s / E_n >= 10^(threshold_db / 10)`.
///
/// A zero noise energy counts as infinite SNR.
pub fn snr_truncation_index<T: Scalar>(
    env_x: &EnergyEnvelope<T>,
    env_y: &EnergyEnvelope<T>,
    threshold_db: f64,
    onset: usize,
) -> Result<usize> {
    check_axes(env_x, env_y)?;
    if !(threshold_db > 0.0) {
        return Err(Error::Config(format!("SNR threshold {threshold_db} dB must be > 0")));
    }
    if onset >= env_x.len() {
        return Err(Error::NoUsableRegion(format!(
            "onset index {onset} is past the end of the envelope ({} points)",
            env_x.len()
        )));
    }
    let ratio = T::of(10f64.powf(threshold_db / 10.0));
    let ok = |i: usize| snr_ok(env_x, i, ratio) && snr_ok(env_y, i, ratio);
    if !ok(onset) {
        return Err(Error::NoUsableRegion(format!(
            "SNR of '{}' / '{}' is below {threshold_db} dB at the onset ({})",
            env_x.source(),
            env_y.source(),
            env_x.band()
        )));
    }
    let run = (onset..env_x.len()).take_while(|&i| ok(i)).count();
    Ok(onset + run - 1)
}

/// Weighted mean of `1 - gamma` over `[onset, t_max]`, weights `sqrt(Px Py)`.
fn weighted_loss<T: Scalar>(
    gamma: &[Option<T>],
    px: &[T],
    py: &[T],
    onset: usize,
    t_max: usize,
) -> Result<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for i in onset..=t_max {
        if let Some(g) = gamma[i] {
            let w = (px[i] * py[i]).sqrt();
            num += (T::one() - g) * w;
            den += w;
        }
    }
    if !(den > T::zero()) {
        return Err(Error::AllUndefined);
    }
    Ok((num / den).min(T::one()).max(T::zero()))
}

fn check_range(len: usize, onset: usize, t_max: usize) -> Result<()> {
    if onset > t_max || t_max >= len {
        return Err(Error::validation(
            "rating range",
            format!("[{onset}, {t_max}] is not inside 0..{len}"),
        ));
    }
    Ok(())
}

/// Sensitivity rating of one pair in one band over `[onset, t_max]`.
///
/// Weights are the total smoothed powers (signal plus noise); undefined
/// coherence points are left out of both sums.
pub fn sensitivity_rating<T: Scalar>(
    curve: &CoherenceCurve<T>,
    env_x: &EnergyEnvelope<T>,
    env_y: &EnergyEnvelope<T>,
    onset: usize,
    t_max: usize,
) -> Result<SensitivityRating<T>> {
    check_axes(env_x, env_y)?;
    if curve.times() != env_x.times() {
        return Err(Error::Pairing("coherence curve and envelopes are on different time axes".into()));
    }
    check_range(curve.len(), onset, t_max)?;
    let rating = weighted_loss(curve.gamma(), env_x.total_power(), env_y.total_power(), onset, t_max)?;
    SensitivityRating::new(
        curve.band(),
        rating,
        onset,
        t_max,
        curve.times()[t_max],
        curve.pair_id().clone(),
    )
}

/// Every intermediate result of one pair in one band.
#[derive(Debug)]
pub struct PairAnalysis<T> {
    pub band: Band,
    pub measured: CoherenceCurve<T>,
    pub expected: CoherenceCurve<T>,
    pub environment: CoherenceCurve<T>,
    pub env_x: EnergyEnvelope<T>,
    pub env_y: EnergyEnvelope<T>,
    /// Onset index on the band signal's time axis.
    pub onset: usize,
    /// The rating, or why it could not be formed (for example no usable region).
    pub rating: Result<SensitivityRating<T>>,
}

/// Common onset of a pair in source samples: the earlier of the two onsets.
pub fn pair_onset<T: Scalar>(x: &Rir<T>, y: &Rir<T>) -> usize {
    detect_onset(x).min(detect_onset(y))
}

/// Runs the full chain for one band: demodulation, noise floors, envelopes,
/// measured/expected/environment coherence, truncation and rating.
///
/// Errors that prevent the curves from being formed are returned directly;
/// a failure of the rating alone is stored in [`PairAnalysis::rating`].
pub fn analyze_band<T: Scalar>(
    x: &Rir<T>,
    y: &Rir<T>,
    band: Band,
    config: &AnalysisConfig,
) -> Result<PairAnalysis<T>> {
    let (x, y) = align_pair(x, y)?;
    let bx = demodulate(&x, band)?;
    let by = demodulate(&y, band)?;
    let env_x = energy_envelope(&bx, estimate_noise_floor(&bx)?, config)?;
    let env_y = energy_envelope(&by, estimate_noise_floor(&by)?, config)?;
    let measured = short_time_coherence(&bx, &by, config)?;
    let expected = expected_coherence(&env_x, &env_y)?;
    let environment = environment_coherence(&measured, &expected, config)?;
    let onset = (pair_onset(&x, &y) / bx.decimation()).min(bx.len() - 1);
    let rating = snr_truncation_index(&env_x, &env_y, config.snr_threshold_db(), onset)
        .and_then(|t_max| sensitivity_rating(&measured, &env_x, &env_y, onset, t_max));
    Ok(PairAnalysis {
        band,
        measured,
        expected,
        environment,
        env_x,
        env_y,
        onset,
        rating,
    })
}

/// Rating of one band in a sweep, or the reason it failed.
#[derive(Debug)]
pub struct BandOutcome<T> {
    pub band: Band,
    pub rating: Result<SensitivityRating<T>>,
}

/// Rates `x` against `y` in every band, in input order.
///
/// Bands run concurrently. A band that fails (too short, no usable region,
/// ...) yields a failed entry; only an incompatible pair aborts the sweep.
pub fn band_sweep<T: Scalar>(
    x: &Rir<T>,
    y: &Rir<T>,
    bands: &[Band],
    config: &AnalysisConfig,
) -> Result<Vec<BandOutcome<T>>> {
    let (x, y) = align_pair(x, y)?;
    Ok(bands
        .par_iter()
        .map(|&band| BandOutcome {
            band,
            rating: analyze_band(&x, &y, band, config).and_then(|a| a.rating),
        })
        .collect())
}

/// Per-bin energy envelopes of an STFT grid.
///
/// Power is averaged over the same `2L + 1` frames as [`tf_coherence`]; the
/// noise energy of each bin comes from the recording's noise region.
pub fn bin_envelopes<T: Scalar>(grid: &StftGrid<T>, config: &AnalysisConfig) -> Result<Vec<EnergyEnvelope<T>>> {
    let width = 2 * config.tf_half_span(grid.sample_rate()) + 1;
    (0..grid.n_bins())
        .map(|k| {
            let power: Vec<T> = grid.frames().iter().map(|f| f[k].norm_sqr()).collect();
            let noise = noise_floor_of(&power, grid.times(), grid.duration(), grid.noise_region(), grid.source())?;
            let total = moving_average::<T, T>(&power, width);
            let signal = total.iter().map(|&p| (p - noise).max(T::zero())).collect();
            EnergyEnvelope::new(
                grid.times().to_vec(),
                total,
                signal,
                noise,
                Band::Bin(grid.freqs()[k].to_f64_lossy()),
                grid.source(),
            )
        })
        .collect()
}

/// Sensitivity of one STFT bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSensitivity<T> {
    pub gamma_rating: T,
    pub onset_index: usize,
    pub truncation_index: usize,
    pub truncation_time: T,
}

/// Rating of one frequency bin, or why it failed.
#[derive(Debug)]
pub struct BinOutcome<T> {
    pub freq: T,
    pub rating: Result<BinSensitivity<T>>,
}

/// Last frame whose center is at or before `onset_sample` (frame 0 if none).
pub fn onset_frame(onset_sample: usize, window_len: usize, hop: usize, n_frames: usize) -> usize {
    (onset_sample.saturating_sub(window_len / 2) / hop).min(n_frames.saturating_sub(1))
}

/// Applies the rating along time independently in every frequency bin, each
/// with its own SNR truncation.
pub fn tf_sensitivity<T: Scalar>(
    map: &TfCoherenceMap<T>,
    env_x: &[EnergyEnvelope<T>],
    env_y: &[EnergyEnvelope<T>],
    onset_frame: usize,
    config: &AnalysisConfig,
) -> Result<Vec<BinOutcome<T>>> {
    let nb = map.freqs().len();
    if env_x.len() != nb || env_y.len() != nb {
        return Err(Error::Pairing(format!(
            "{nb} map bins but {} and {} envelopes",
            env_x.len(),
            env_y.len()
        )));
    }
    if env_x.iter().chain(env_y).any(|e| e.times() != map.times()) {
        return Err(Error::Pairing("bin envelopes and map are on different time axes".into()));
    }
    Ok((0..nb)
        .map(|k| {
            let series = map.bin_series(k);
            let rating = snr_truncation_index(&env_x[k], &env_y[k], config.snr_threshold_db(), onset_frame)
                .and_then(|t_max| {
                    let g = weighted_loss(&series, env_x[k].total_power(), env_y[k].total_power(), onset_frame, t_max)?;
                    Ok(BinSensitivity {
                        gamma_rating: g,
                        onset_index: onset_frame,
                        truncation_index: t_max,
                        truncation_time: map.times()[t_max],
                    })
                });
            BinOutcome {
                freq: map.freqs()[k],
                rating,
            }
        })
        .collect())
}

/// Map, per-bin envelopes and per-bin ratings of one pair.
#[derive(Debug)]
pub struct TfAnalysis<T> {
    pub map: TfCoherenceMap<T>,
    pub env_x: Vec<EnergyEnvelope<T>>,
    pub env_y: Vec<EnergyEnvelope<T>>,
    pub onset_frame: usize,
    pub bins: Vec<BinOutcome<T>>,
}

/// STFT both recordings, form the coherence map and rate every bin.
pub fn analyze_tf<T: Scalar>(x: &Rir<T>, y: &Rir<T>, config: &AnalysisConfig) -> Result<TfAnalysis<T>> {
    let (x, y) = align_pair(x, y)?;
    let gx = stft(&x, config)?;
    let gy = stft(&y, config)?;
    let map = tf_coherence(&gx, &gy, config)?;
    let env_x = bin_envelopes(&gx, config)?;
    let env_y = bin_envelopes(&gy, config)?;
    let onset = onset_frame(pair_onset(&x, &y), gx.window_len(), gx.hop(), gx.n_frames());
    let bins = tf_sensitivity(&map, &env_x, &env_y, onset, config)?;
    Ok(TfAnalysis {
        map,
        env_x,
        env_y,
        onset_frame: onset,
        bins,
    })
}

/// Median rating of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMedian<T> {
    pub band: Band,
    pub median: T,
    pub count: usize,
}

/// Median rating per band, bands in order of first appearance.
pub fn median_sensitivity<T: Scalar>(ratings: &[SensitivityRating<T>]) -> Result<Vec<BandMedian<T>>> {
    if ratings.is_empty() {
        return Err(Error::Empty("median of zero sensitivity ratings"));
    }
    let mut groups: Vec<(Band, Vec<T>)> = Vec::new();
    for r in ratings {
        match groups.iter_mut().find(|(b, _)| *b == r.band()) {
            Some((_, v)) => v.push(r.gamma_rating()),
            None => groups.push((r.band(), vec![r.gamma_rating()])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(band, v)| BandMedian {
            band,
            median: median(&v).expect("groups are never empty"),
            count: v.len(),
        })
        .collect())
}
