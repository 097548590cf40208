//! Narrowband complex demodulation and the broadband analytic signal.
//!
//! A band is realized as: heterodyne by `-center`, a zero-phase anti-alias
//! stage with decimation to about four times the bandwidth, then a zero-phase
//! (forward-backward) 255-tap Kaiser lowpass at half the bandwidth at the
//! decimated rate. Both stages are symmetric FIRs applied centered, so
//! arrival times are preserved. The output is scaled by 2 so that a unit
//! cosine at the band center demodulates to a unit-magnitude phasor.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::filter::{
    centered_filter_decimate, forward_backward_kernel, kaiser_taps, lowpass, BAND_FILTER_TAPS,
    KAISER_BETA,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{Band, BandSpec, NoiseRegion, Rir};

/// Complex baseband representation of one recording in one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSignal<T> {
    samples: Vec<Complex<T>>,
    sample_rate: f64,
    decimation: usize,
    band: Band,
    source: String,
    noise: NoiseRegion,
}

impl<T: Scalar> BandSignal<T> {
    pub fn new(
        samples: Vec<Complex<T>>,
        sample_rate: f64,
        decimation: usize,
        band: Band,
        source: impl Into<String>,
        noise: NoiseRegion,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::validation("BandSignal", "no samples"));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) || decimation == 0 {
            return Err(Error::validation("BandSignal", "rate and decimation must be positive"));
        }
        if let Band::Narrow(b) = band {
            if sample_rate < b.bandwidth() {
                return Err(Error::validation(
                    "BandSignal",
                    format!(
                        "rate {sample_rate} Hz aliases a {} Hz wide band",
                        b.bandwidth()
                    ),
                ));
            }
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::validation("BandSignal", "non-finite sample"));
        }
        Ok(BandSignal {
            samples,
            sample_rate,
            decimation,
            band,
            source: source.into(),
            noise,
        })
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Ratio of the source rate to this signal's rate.
    pub fn decimation(&self) -> usize {
        self.decimation
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn noise_region(&self) -> &NoiseRegion {
        &self.noise
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.samples.len())
            .map(|i| T::of(i as f64 / self.sample_rate))
            .collect()
    }

    /// Energy of the real band-pass signal this phasor sequence represents,
    /// in the units of [`Rir::energy`].
    pub fn energy(&self) -> T {
        let sum: T = self.samples.iter().map(|s| s.norm_sqr()).sum();
        sum * T::of(self.decimation as f64 / 2.0)
    }

    /// Same signal multiplied by a complex constant.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        BandSignal {
            samples: self.samples.iter().map(|&s| s * factor).collect(),
            ..self.clone()
        }
    }
}

/// Decimation factor used for a band at `sample_rate`.
pub fn decimation_for(band: &BandSpec, sample_rate: u32) -> usize {
    ((sample_rate as f64 / (4.0 * band.bandwidth())).floor() as usize).max(1)
}

/// Shortest recording, in source samples, accepted for `band`.
pub fn min_length_for(band: &BandSpec, sample_rate: u32) -> usize {
    4 * BAND_FILTER_TAPS * decimation_for(band, sample_rate)
}

/// Demodulates `rir` into the complex baseband of `band`.
pub fn band_demodulate<T: Scalar>(rir: &Rir<T>, band: &BandSpec) -> Result<BandSignal<T>> {
    let fs = rir.sample_rate() as f64;
    band.check_rate(rir.sample_rate())?;
    let needed = min_length_for(band, rir.sample_rate());
    if rir.len() < needed {
        return Err(Error::InputTooShort(format!(
            "'{}' has {} samples, band {} needs at least {needed} (4 filter lengths)",
            rir.label(),
            rir.len(),
            Band::Narrow(*band)
        )));
    }
    let decim = decimation_for(band, rir.sample_rate());
    let out_rate = fs / decim as f64;

    let shift = band.center() / fs;
    let two = T::of(2.0);
    let mixed: Vec<Complex<T>> = rir
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let phase = -2.0 * std::f64::consts::PI * (shift * n as f64).fract();
            Complex::new(T::of(phase.cos()), T::of(phase.sin())) * (x * two)
        })
        .collect();

    let decimated = if decim > 1 {
        let pass_edge = band.bandwidth() / 2.0;
        let stop_edge = out_rate - pass_edge;
        let transition = (stop_edge - pass_edge) / fs;
        let taps = kaiser_taps(transition, KAISER_BETA);
        let anti_alias = lowpass(taps, 0.5 / decim as f64, KAISER_BETA);
        centered_filter_decimate(&mixed, &anti_alias, decim)
    } else {
        mixed
    };

    let h = lowpass(BAND_FILTER_TAPS, band.bandwidth() / 2.0 / out_rate, KAISER_BETA);
    let kernel = forward_backward_kernel(&h);
    let samples = centered_filter_decimate(&decimated, &kernel, 1);

    BandSignal::new(
        samples,
        out_rate,
        decim,
        Band::Narrow(*band),
        rir.label(),
        rir.meta().noise.clone(),
    )
}

/// Full-rate analytic signal `x + j H{x}` of `rir`, labeled broadband.
///
/// The transform is zero-padded to at least twice the length so the slowly
/// decaying Hilbert response of a loud onset does not wrap around into the
/// tail, where it would inflate the noise floor.
pub fn analytic_signal<T: Scalar>(rir: &Rir<T>) -> Result<BandSignal<T>> {
    let n = rir.len();
    let m = (2 * n).next_power_of_two();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
    for (b, &x) in buf.iter_mut().zip(rir.samples()) {
        *b = Complex::new(x, T::zero());
    }
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let two = T::of(2.0);
    for (k, c) in buf.iter_mut().enumerate().skip(1) {
        if k < m / 2 {
            *c = *c * two;
        } else if k > m / 2 {
            *c = Complex::new(T::zero(), T::zero());
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf.truncate(n);
    let scale = T::one() / T::of_usize(m);
    buf.iter_mut().for_each(|c| *c = *c * scale);
    BandSignal::new(
        buf,
        rir.sample_rate() as f64,
        1,
        Band::Broadband,
        rir.label(),
        rir.meta().noise.clone(),
    )
}

/// Demodulates into `band`, or forms the analytic signal for broadband.
pub fn demodulate<T: Scalar>(rir: &Rir<T>, band: Band) -> Result<BandSignal<T>> {
    match band {
        Band::Broadband => analytic_signal(rir),
        Band::Narrow(b) => band_demodulate(rir, &b),
        Band::Bin(f) => Err(Error::validation(
            "band",
            format!("STFT bin {f} Hz cannot be demodulated; use a band or broadband"),
        )),
    }
}
