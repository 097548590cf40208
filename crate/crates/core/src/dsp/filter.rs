//! Kaiser-windowed FIR lowpass design and zero-phase application.

use num_complex::Complex;

use crate::scalar::Scalar;

/// Taps of the band-limiting lowpass.
pub const BAND_FILTER_TAPS: usize = 255;
/// Kaiser shape parameter of the band-limiting lowpass (about 80 dB stopband).
pub const KAISER_BETA: f64 = 8.0;

/// Zeroth-order modified Bessel function of the first kind (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

pub fn kaiser_window(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let m = (len - 1) as f64;
    (0..len)
        .map(|n| {
            let r = 2.0 * n as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Number of taps (odd) a Kaiser design needs for a transition of
/// `transition` cycles/sample at the attenuation implied by `beta`.
pub fn kaiser_taps(transition: f64, beta: f64) -> usize {
    // Inverse of the Kaiser beta formula for A > 50 dB.
    let atten = beta / 0.1102 + 8.7;
    let n = ((atten - 7.95) / (14.36 * transition)).ceil() as usize + 1;
    n | 1
}

/// Windowed-sinc lowpass with cutoff `cutoff` in cycles/sample, unit DC gain.
pub fn lowpass(taps: usize, cutoff: f64, beta: f64) -> Vec<f64> {
    let window = kaiser_window(taps, beta);
    let mid = (taps - 1) as f64 / 2.0;
    let mut h: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let t = n as f64 - mid;
            let ideal = if t == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * std::f64::consts::PI * cutoff * t).sin() / (std::f64::consts::PI * t)
            };
            ideal * w
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|c| *c /= dc);
    h
}

/// Full convolution of two kernels.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Forward-backward equivalent kernel: `h` convolved with its time reverse.
///
/// Filtering with `h`, reversing, filtering again and reversing back equals a
/// centered convolution with this kernel when the signal is zero-extended.
pub fn forward_backward_kernel(h: &[f64]) -> Vec<f64> {
    let rev: Vec<f64> = h.iter().rev().copied().collect();
    convolve(h, &rev)
}

/// Centered convolution with an odd-length symmetric kernel, evaluated at
/// every `step`-th input sample. Outside the signal the input is zero.
pub fn centered_filter_decimate<T: Scalar>(
    input: &[Complex<T>],
    kernel: &[f64],
    step: usize,
) -> Vec<Complex<T>> {
    let half = kernel.len() / 2;
    let n = input.len() as isize;
    let k: Vec<T> = kernel.iter().map(|&c| T::of(c)).collect();
    (0..input.len())
        .step_by(step)
        .map(|center| {
            let c = center as isize;
            let first = (c - half as isize).max(0);
            let last = (c + half as isize).min(n - 1);
            let mut acc = Complex::new(T::zero(), T::zero());
            for idx in first..=last {
                let tap = k[(idx - c + half as isize) as usize];
                acc = acc + input[idx as usize] * tap;
            }
            acc
        })
        .collect()
}

/// Magnitude response of a real FIR at `freq` cycles/sample, by direct DTFT.
pub fn magnitude_response(h: &[f64], freq: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &c) in h.iter().enumerate() {
        let ph = -2.0 * std::f64::consts::PI * freq * n as f64;
        re += c * ph.cos();
        im += c * ph.sin();
    }
    (re * re + im * im).sqrt()
}
