//! Onset detection: the first sample above a fraction of the peak.

use crate::scalar::Scalar;
use crate::types::Rir;

/// Onset threshold relative to the peak magnitude (-40 dB).
pub const ONSET_FRACTION: f64 = 0.01;

/// First index where `|x|` exceeds 1% of the peak magnitude.
pub fn detect_onset<T: Scalar>(rir: &Rir<T>) -> usize {
    let peak = rir
        .samples()
        .iter()
        .fold(T::zero(), |m, &v| m.max(v.abs()));
    let threshold = peak * T::of(ONSET_FRACTION);
    rir.samples()
        .iter()
        .position(|v| v.abs() > threshold)
        .expect("a valid Rir has a nonzero sample")
}
