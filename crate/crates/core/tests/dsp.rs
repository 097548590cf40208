mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rircoh::dsp::*;
use rircoh::sensitivity::analyze_band;
use rircoh::synth::{gen_decaying_rir, gen_mixing_pair, SynthConfig, SyntheticPair};
use rircoh::types::*;

fn rir(samples: Vec<f64>, rate: u32) -> Rir<f64> {
    Rir::new(rate, samples, RirMeta::labeled("r")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn band_energy_never_exceeds_source_energy(seed in any::<u64>(), center_k in 1usize..20) {
        let mut r = rng(seed);
        let x = rir(gaussian(&mut r, 24000), 48000);
        let band = BandSpec::new(center_k as f64 * 1000.0, 1000.0).unwrap();
        let b = band_demodulate(&x, &band).unwrap();
        prop_assert!(b.energy() <= x.energy() * 1.01);
        prop_assert!(b.sample_rate() >= band.bandwidth());
    }

    #[test]
    fn demodulation_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, c in -3.0f64..3.0) {
        let mut r = rng(seed);
        let x = gaussian(&mut r, 16000);
        let y = gaussian(&mut r, 16000);
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + c * q).collect();
        let band = BandSpec::new(5000.0, 1000.0).unwrap();
        let dx = band_demodulate(&rir(x, 48000), &band).unwrap();
        let dy = band_demodulate(&rir(y, 48000), &band).unwrap();
        let dm = band_demodulate(&rir(mix, 48000), &band).unwrap();
        let scale = dm.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for ((m, p), q) in dm.samples().iter().zip(dx.samples()).zip(dy.samples()) {
            prop_assert!((m - (p * a + q * c)).norm() <= 1e-9 * scale);
        }
    }

    #[test]
    fn moving_average_preserves_the_sum(values in prop::collection::vec(-10.0f64..10.0, 1..300), width in 1usize..40) {
        // Zero padding wider than the window keeps every contribution inside
        // full-width windows.
        let mut padded = vec![0.0; width];
        padded.extend(&values);
        padded.extend(vec![0.0; width]);
        let avg = moving_average::<f64, f64>(&padded, width);
        let total: f64 = values.iter().sum();
        let scale: f64 = values.iter().map(|v| v.abs()).sum::<f64>().max(1e-300);
        prop_assert!((avg.iter().sum::<f64>() - total).abs() <= 1e-12 * scale);
    }

    #[test]
    fn envelope_is_nonnegative(seed in any::<u64>(), noise in 0.0f64..4.0) {
        let mut r = rng(seed);
        let b = band_signal(complex_noise(&mut r, 2000), 4000.0, "b");
        let env = energy_envelope(&b, noise, &AnalysisConfig::default()).unwrap();
        prop_assert!(env.signal_energy().iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn stft_axes_and_frame_count(n in 512usize..6000, hop_div in 1usize..5) {
        let cfg = AnalysisConfig::builder().stft_hop(512 / hop_div).build().unwrap();
        let mut r = rng(n as u64);
        let g = stft(&rir(gaussian(&mut r, n), 48000), &cfg).unwrap();
        prop_assert_eq!(g.n_frames(), (n - 512) / (512 / hop_div) + 1);
        prop_assert_eq!(g.freqs()[0], 0.0);
        prop_assert_eq!(*g.freqs().last().unwrap(), 24000.0);
    }
}

#[test]
fn white_noise_band_energy_matches_parseval_oracle() {
    // Oracle: fraction of the input's FFT energy that falls inside the band.
    use rustfft::FftPlanner;
    let mut r = rng(31);
    let n = 96000;
    let x = gaussian(&mut r, n);
    let mut spec: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut spec);
    let df = 48000.0 / n as f64;
    let (lo, hi) = (9500.0, 10500.0);
    let in_band: f64 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = *k as f64 * df;
            let f = if f > 24000.0 { 48000.0 - f } else { f };
            f >= lo && f < hi
        })
        .map(|(_, c)| c.norm_sqr())
        .sum();
    let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
    let oracle = in_band / total;
    assert!((oracle / (1000.0 / 24000.0) - 1.0).abs() < 0.05);

    let b = band_demodulate(&rir(x.clone(), 48000), &BandSpec::new(10000.0, 1000.0).unwrap()).unwrap();
    let fraction = b.energy() / rir(x, 48000).energy();
    assert!((fraction / oracle - 1.0).abs() < 0.1, "fraction {fraction}, oracle {oracle}");
}

#[test]
fn noiseless_decay_has_negligible_floor() {
    let r: Rir<f64> = gen_decaying_rir(0.3, 16000, 1.0, 2).unwrap();
    let b = analytic_signal(&r).unwrap();
    let e_n = estimate_noise_floor(&b).unwrap();
    let peak = b.samples().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    assert!(e_n < 1e-9 * peak, "floor {e_n}, peak {peak}");
    let env = energy_envelope(&b, 0.0, &AnalysisConfig::default()).unwrap();
    let power: Vec<f64> = b.samples().iter().map(|z| z.norm_sqr()).collect();
    let smoothed = short_time_average::<f64, f64>(&power, 0.01, 16000.0).unwrap();
    assert_eq!(env.signal_energy(), &smoothed[..]);
}

#[test]
fn onset_behind_quiet_leading_noise() {
    let mut r = rng(4);
    let mut x: Vec<f64> = gaussian(&mut r, 2000).into_iter().map(|v| v.clamp(-3.0, 3.0) * 1e-3 / 3.0).collect();
    x[500] = 1.0;
    assert_eq!(detect_onset(&rir(x, 48000)), 500);
}

#[test]
fn rt_of_the_low_and_high_ends() {
    for (rt, seed) in [(0.38, 1), (0.8, 2), (1.2, 3)] {
        let r: Rir<f64> = gen_decaying_rir(rt, 48000, 1.5 * rt.max(1.0), seed).unwrap();
        let est = estimate_rt(&r).unwrap();
        assert!((est / rt - 1.0).abs() < 0.1, "rt {rt}: {est}");
    }
}

#[test]
fn single_precision_pipeline_tracks_double() {
    let cfg = AnalysisConfig::default();
    let sc = SynthConfig::default().with_sample_rate(16000).with_seed(5);
    let p64: SyntheticPair<f64> = gen_mixing_pair(0.6, 0.4, &sc).unwrap();
    let p32: SyntheticPair<f32> = gen_mixing_pair(0.6, 0.4, &sc).unwrap();
    let g64 = analyze_band(p64.x(), p64.y(), Band::Broadband, &cfg).unwrap().rating.unwrap().gamma_rating();
    let g32 = analyze_band(p32.x(), p32.y(), Band::Broadband, &cfg).unwrap().rating.unwrap().gamma_rating();
    assert!((g64 - g32 as f64).abs() < 1e-3, "{g64} vs {g32}");
}
