//! Noise-floor and energy-envelope estimation for band signals.

use crate::dsp::average::short_time_average;
use crate::dsp::demod::BandSignal;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::median;
use crate::types::{AnalysisConfig, EnergyEnvelope, NoiseRegion};

/// Fraction of the recording, taken from its end, used for the noise floor.
pub const TAIL_FRACTION: f64 = 0.05;
/// Minimum duration for an unflagged tail estimate.
pub const MIN_TAIL_DURATION: f64 = 1.0;

/// Median of `|z|^2` for circular complex Gaussian noise is `ln 2` times its mean.
fn median_to_mean<T: Scalar>() -> T {
    T::one() / T::LN_2()
}

/// Indices of the noise-only region among samples taken at `times`.
///
/// `duration` is the length of the underlying recording in seconds; an
/// unflagged tail estimate needs at least [`MIN_TAIL_DURATION`].
pub fn noise_region_indices<T: Scalar>(
    times: &[T],
    duration: f64,
    region: &NoiseRegion,
    source: &str,
) -> Result<std::ops::Range<usize>> {
    let n = times.len();
    if n == 0 {
        return Err(Error::Empty("noise region"));
    }
    let tail = || {
        let count = ((n as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, n);
        n - count..n
    };
    match *region {
        NoiseRegion::Tail => {
            if duration < MIN_TAIL_DURATION {
                return Err(Error::InputTooShort(format!(
                    "'{source}' lasts {duration:.3} s; tail noise estimation needs {MIN_TAIL_DURATION} s unless the recording is flagged short"
                )));
            }
            Ok(tail())
        }
        NoiseRegion::ShortTail => Ok(tail()),
        NoiseRegion::Segment { start, end } => {
            let a = times.partition_point(|t| t.to_f64_lossy() < start);
            let b = times.partition_point(|t| t.to_f64_lossy() < end);
            if a >= b {
                return Err(Error::validation(
                    "noise segment",
                    format!("[{start}, {end}) s holds no samples of '{source}'"),
                ));
            }
            Ok(a..b)
        }
        NoiseRegion::Truncated => Err(Error::NoiseFloorUnavailable(source.to_string())),
    }
}

/// Mean noise power of a power sequence `powers` sampled at `times`.
///
/// The median over the noise region rescaled by `1 / ln 2`, which estimates
/// the mean power of circular complex Gaussian noise while resisting leftover
/// decay in the region.
pub fn noise_floor_of<T: Scalar>(
    powers: &[T],
    times: &[T],
    duration: f64,
    region: &NoiseRegion,
    source: &str,
) -> Result<T> {
    let range = noise_region_indices(times, duration, region, source)?;
    let m = median(&powers[range]).ok_or(Error::Empty("noise region"))?;
    Ok(m * median_to_mean::<T>())
}

/// Stationary noise energy `E_n` of a band signal.
pub fn estimate_noise_floor<T: Scalar>(band: &BandSignal<T>) -> Result<T> {
    let powers: Vec<T> = band.samples().iter().map(|z| z.norm_sqr()).collect();
    noise_floor_of(&powers, &band.times(), band.duration(), band.noise_region(), band.source())
}

/// Short-time total power and noise-subtracted signal energy of `band`.
pub fn energy_envelope<T: Scalar>(
    band: &BandSignal<T>,
    noise: T,
    config: &AnalysisConfig,
) -> Result<EnergyEnvelope<T>> {
    if !(noise.is_finite() && noise >= T::zero()) {
        return Err(Error::validation("noise energy", format!("{noise} must be >= 0")));
    }
    let power: Vec<T> = band.samples().iter().map(|z| z.norm_sqr()).collect();
    let total = short_time_average::<T, T>(&power, config.avg_window(), band.sample_rate())?;
    let signal = total.iter().map(|&p| (p - noise).max(T::zero())).collect();
    EnergyEnvelope::new(band.times(), total, signal, noise, band.band(), band.source())
}
