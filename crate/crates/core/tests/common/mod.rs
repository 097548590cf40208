#![allow(dead_code)]

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rircoh::dsp::BandSignal;
use rircoh::types::{Band, EnergyEnvelope, NoiseRegion};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Circular complex Gaussian samples with unit mean power.
pub fn complex_noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let s = 0.5f64.sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

pub fn band_signal(samples: Vec<Complex64>, rate: f64, label: &str) -> BandSignal<f64> {
    BandSignal::new(samples, rate, 1, Band::Broadband, label, NoiseRegion::ShortTail).unwrap()
}

/// Envelope on a 10 ms grid with the given signal energies and constant noise.
pub fn envelope(signal: Vec<f64>, noise: f64, source: &str) -> EnergyEnvelope<f64> {
    let times = (0..signal.len()).map(|i| i as f64 * 0.01).collect();
    let total = signal.iter().map(|s| s + noise).collect();
    EnergyEnvelope::new(times, total, signal, noise, Band::Broadband, source).unwrap()
}

/// Squared coherence of `w` independent complex Gaussian pairs, computed
/// directly from the definition.
pub fn direct_coherence(rng: &mut ChaCha8Rng, w: usize) -> f64 {
    let x = complex_noise(rng, w);
    let y = complex_noise(rng, w);
    let cross: Complex64 = x.iter().zip(&y).map(|(a, b)| a * b.conj()).sum();
    let px: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    let py: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    cross.norm_sqr() / (px * py)
}

pub fn median(v: &[f64]) -> f64 {
    rircoh::stats::median(v).expect("non-empty")
}
