//! Centered moving averages with shrinking edge windows.

use std::ops::{Add, Div};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest window, in samples, accepted by [`short_time_average`].
pub const MIN_WINDOW_SAMPLES: usize = 8;

/// Converts a window duration to a sample count at `rate`.
pub fn window_samples(window: f64, rate: f64) -> usize {
    (window * rate).round().max(0.0) as usize
}

/// Centered moving average of `values` over a window of `window` seconds.
///
/// The output has the input's length. Near the edges the window shrinks to
/// the available samples and the average is taken over those only.
pub fn short_time_average<T, V>(values: &[V], window: f64, rate: f64) -> Result<Vec<V>>
where
    T: Scalar,
    V: Copy + Zero + Add<Output = V> + Div<T, Output = V>,
{
    let w = window_samples(window, rate);
    if w < MIN_WINDOW_SAMPLES {
        return Err(Error::Config(format!(
            "averaging window of {window} s is {w} samples at {rate} Hz, need at least {MIN_WINDOW_SAMPLES}"
        )));
    }
    Ok(moving_average(values, w))
}

/// Centered moving average over `width` samples.
///
/// Sample `n` averages `[n - width/2, n + (width - 1)/2]`, clipped to the
/// sequence. Interior sums use block prefix/suffix sums so each output is a
/// sum of at most `width` nearby terms, with no running subtraction.
pub fn moving_average<T, V>(values: &[V], width: usize) -> Vec<V>
where
    T: Scalar,
    V: Copy + Zero + Add<Output = V> + Div<T, Output = V>,
{
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let width = width.max(1);
    let lo = width / 2;
    let hi = width - 1 - lo;

    let mut out = vec![V::zero(); n];
    let direct = |i: usize| {
        let a = i.saturating_sub(lo);
        let b = (i + hi).min(n - 1);
        let sum = values[a..=b].iter().fold(V::zero(), |acc, &v| acc + v);
        sum / T::of_usize(b - a + 1)
    };

    if n < width {
        for (i, o) in out.iter_mut().enumerate() {
            *o = direct(i);
        }
        return out;
    }

    // prefix[i]: sum from the start of i's block to i; suffix[i]: from i to the block end.
    let mut prefix = vec![V::zero(); n];
    let mut suffix = vec![V::zero(); n];
    for start in (0..n).step_by(width) {
        let end = (start + width).min(n);
        let mut acc = V::zero();
        for i in start..end {
            acc = acc + values[i];
            prefix[i] = acc;
        }
        let mut acc = V::zero();
        for i in (start..end).rev() {
            acc = acc + values[i];
            suffix[i] = acc;
        }
    }

    let inv = T::of_usize(width);
    for (i, o) in out.iter_mut().enumerate() {
        if i < lo || i + hi >= n {
            *o = direct(i);
            continue;
        }
        let a = i - lo;
        let b = i + hi;
        let sum = if a % width == 0 {
            prefix[b]
        } else {
            suffix[a] + prefix[b]
        };
        *o = sum / inv;
    }
    out
}
