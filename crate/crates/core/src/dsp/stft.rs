//! Short-time Fourier transform with a periodic Hann taper.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{AnalysisConfig, NoiseRegion, Rir};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// `0.5 - 0.5 cos(2 pi n / N)`; overlap-adds to a constant at hops of N/2, N/3, N/4, ...
    PeriodicHann,
}

/// One-sided STFT of a real recording, `frames[frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftGrid<T> {
    frames: Vec<Vec<Complex<T>>>,
    times: Vec<T>,
    freqs: Vec<T>,
    window_len: usize,
    hop: usize,
    window_kind: WindowKind,
    sample_rate: u32,
    duration: f64,
    source: String,
    noise: NoiseRegion,
}

impl<T: Scalar> StftGrid<T> {
    pub fn frames(&self) -> &[Vec<Complex<T>>] {
        &self.frames
    }

    /// Frame centers in seconds.
    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn freqs(&self) -> &[T] {
        &self.freqs
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Duration of the analysed recording in seconds.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn noise_region(&self) -> &NoiseRegion {
        &self.noise
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn n_bins(&self) -> usize {
        self.freqs.len()
    }

    /// True when both grids were produced with the same parameters and shape.
    pub fn same_layout(&self, other: &StftGrid<T>) -> bool {
        self.window_len == other.window_len
            && self.hop == other.hop
            && self.window_kind == other.window_kind
            && self.sample_rate == other.sample_rate
            && self.frames.len() == other.frames.len()
            && self.freqs.len() == other.freqs.len()
    }
}

pub fn hann_periodic(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
        .collect()
}

/// Frame count for `n` samples: `floor((n - window) / hop) + 1`.
pub fn frame_count(n: usize, window_len: usize, hop: usize) -> usize {
    if n < window_len {
        0
    } else {
        (n - window_len) / hop + 1
    }
}

pub fn stft<T: Scalar>(rir: &Rir<T>, config: &AnalysisConfig) -> Result<StftGrid<T>> {
    let win = config.stft_window_len();
    let hop = config.stft_hop();
    let n = rir.len();
    if n < win {
        return Err(Error::InputTooShort(format!(
            "'{}' has {n} samples, STFT window is {win}",
            rir.label()
        )));
    }
    let fs = rir.sample_rate() as f64;
    let window: Vec<T> = hann_periodic(win).into_iter().map(T::of).collect();
    let fft = FftPlanner::<T>::new().plan_fft_forward(win);
    let n_bins = win / 2 + 1;
    let count = frame_count(n, win, hop);

    let mut frames = Vec::with_capacity(count);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); win];
    for f in 0..count {
        let start = f * hop;
        for ((b, &x), &w) in buf.iter_mut().zip(&rir.samples()[start..start + win]).zip(&window) {
            *b = Complex::new(x * w, T::zero());
        }
        fft.process(&mut buf);
        frames.push(buf[..n_bins].to_vec());
    }

    let times = (0..count)
        .map(|f| T::of((f * hop) as f64 / fs + win as f64 / (2.0 * fs)))
        .collect();
    let freqs = (0..n_bins).map(|k| T::of(k as f64 * fs / win as f64)).collect();
    Ok(StftGrid {
        frames,
        times,
        freqs,
        window_len: win,
        hop,
        window_kind: WindowKind::PeriodicHann,
        sample_rate: rir.sample_rate(),
        duration: rir.duration(),
        source: rir.label().to_string(),
        noise: rir.meta().noise.clone(),
    })
}
