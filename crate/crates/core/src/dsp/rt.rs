//! Reverberation time from Schroeder backward integration.

use crate::dsp::average::{moving_average, window_samples};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{NoiseRegion, Rir};

/// Upper end of the fitted decay range, dB below the integrated total.
pub const FIT_START_DB: f64 = -5.0;
/// Lower end of the fitted decay range.
pub const FIT_END_DB: f64 = -25.0;
/// Smoothing used to locate where the decay meets the noise floor.
const ENVELOPE_WINDOW: f64 = 0.010;

fn db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// Mean noise power of a broadband recording, honoring its noise region.
fn broadband_noise(x2: &[f64], rir_meta: &NoiseRegion, rate: f64) -> f64 {
    let n = x2.len();
    let range = match *rir_meta {
        NoiseRegion::Truncated => return 0.0,
        NoiseRegion::Segment { start, end } => {
            let a = ((start * rate).floor().max(0.0) as usize).min(n);
            let b = ((end * rate).ceil() as usize).min(n);
            a..b
        }
        NoiseRegion::Tail | NoiseRegion::ShortTail => n - ((n as f64 * 0.05).ceil() as usize).clamp(1, n)..n,
    };
    if range.is_empty() {
        return 0.0;
    }
    x2[range.clone()].iter().sum::<f64>() / range.len() as f64
}

/// Reverberation time (seconds for a 60 dB energy decay).
///
/// Noise power from the recording's noise region is subtracted and the
/// integration stops where the 10 ms envelope falls to twice that power.
/// The Schroeder curve between -5 and -25 dB is fitted by least squares and
/// extrapolated to -60 dB.
pub fn estimate_rt<T: Scalar>(rir: &Rir<T>) -> Result<f64> {
    let rate = rir.sample_rate() as f64;
    let x2: Vec<f64> = rir.samples().iter().map(|v| v.to_f64_lossy().powi(2)).collect();
    let noise = broadband_noise(&x2, &rir.meta().noise, rate);

    let env = moving_average::<f64, f64>(&x2, window_samples(ENVELOPE_WINDOW, rate).max(1));
    let (peak_idx, peak) = env
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let range_db = if noise > 0.0 { db(peak / noise) } else { f64::INFINITY };
    if range_db < -FIT_END_DB {
        return Err(Error::InsufficientDecay(format!(
            "'{}' decays {range_db:.1} dB above its noise floor, need {}",
            rir.label(),
            -FIT_END_DB
        )));
    }
    let end = env[peak_idx..]
        .iter()
        .position(|&e| e <= 2.0 * noise)
        .map_or(x2.len(), |p| peak_idx + p);

    let start = crate::dsp::onset::detect_onset(rir).min(peak_idx);
    let mut schroeder = vec![0.0; end - start];
    let mut acc = 0.0;
    for i in (start..end).rev() {
        acc += x2[i] - noise;
        schroeder[i - start] = acc;
    }
    let total = schroeder.first().copied().unwrap_or(0.0);
    if total <= 0.0 {
        return Err(Error::InsufficientDecay(format!("'{}' has no energy above noise", rir.label())));
    }

    let (mut n, mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut reached = false;
    for (k, &s) in schroeder.iter().enumerate() {
        if s <= 0.0 {
            break;
        }
        let level = db(s / total);
        if level < FIT_END_DB {
            reached = true;
            break;
        }
        if level <= FIT_START_DB {
            let t = k as f64 / rate;
            n += 1.0;
            st += t;
            sy += level;
            stt += t * t;
            sty += t * level;
        }
    }
    if !reached || n < 2.0 {
        return Err(Error::InsufficientDecay(format!(
            "'{}' never decays {} dB before meeting the noise floor",
            rir.label(),
            -FIT_END_DB
        )));
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    if !(slope < 0.0) {
        return Err(Error::InsufficientDecay(format!("'{}' shows no decay", rir.label())));
    }
    Ok(-60.0 / slope)
}
