mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rircoh::coherence::*;
use rircoh::dsp::{demodulate, energy_envelope, estimate_noise_floor, stft};
use rircoh::sensitivity::{analyze_band, analyze_tf};
use rircoh::synth::{gen_mixing_pair, gen_occluded_pair, Occlusion, SynthConfig, SyntheticPair};
use rircoh::types::*;

fn random_pair(seed: u64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut r = rng(seed);
    let x = complex_noise(&mut r, n);
    let mix = complex_noise(&mut r, n);
    let y = x.iter().zip(&mix).map(|(a, b)| a * 0.6 + b * 0.8).collect();
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherence_is_symmetric_exactly(seed in any::<u64>(), n in 200usize..800) {
        let (x, y) = random_pair(seed, n);
        let cfg = AnalysisConfig::default();
        let (bx, by) = (band_signal(x, 4000.0, "x"), band_signal(y, 4000.0, "y"));
        let a = short_time_coherence(&bx, &by, &cfg).unwrap();
        let b = short_time_coherence(&by, &bx, &cfg).unwrap();
        prop_assert_eq!(a.gamma(), b.gamma());
    }

    #[test]
    fn coherence_is_scale_invariant(seed in any::<u64>(), mag in -3.0f64..3.0, phase in 0.0f64..6.28) {
        let (x, y) = random_pair(seed, 400);
        let cfg = AnalysisConfig::default();
        let c = Complex64::from_polar(10f64.powf(mag), phase);
        let bx = band_signal(x, 4000.0, "x");
        let by = band_signal(y, 4000.0, "y");
        let a = short_time_coherence(&bx, &by, &cfg).unwrap();
        let b = short_time_coherence(&bx.scaled(c), &by, &cfg).unwrap();
        for (p, q) in a.gamma().iter().zip(b.gamma()) {
            prop_assert!((p.unwrap() - q.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn coherence_is_bounded(seed in any::<u64>(), gap in 0usize..300) {
        // A silent stretch exercises the guard next to tiny energies.
        let (mut x, y) = random_pair(seed, 800);
        for z in &mut x[200..200 + gap] {
            *z *= 1e-9;
        }
        let cfg = AnalysisConfig::default();
        let c = short_time_coherence(&band_signal(x, 4000.0, "x"), &band_signal(y, 4000.0, "y"), &cfg).unwrap();
        for g in c.gamma().iter().flatten() {
            prop_assert!((0.0..=1.0).contains(g));
        }
    }

    #[test]
    fn expected_coherence_nonincreasing_in_noise(
        signal in prop::collection::vec(0.0f64..10.0, 1..50),
        n1 in 0.0f64..5.0,
        dn in 0.0f64..5.0,
    ) {
        let sx = envelope(signal.clone(), 0.3, "x");
        let lo = expected_coherence(&sx, &envelope(signal.clone(), n1, "y")).unwrap();
        let hi = expected_coherence(&sx, &envelope(signal, n1 + dn, "y")).unwrap();
        for (a, b) in lo.gamma().iter().zip(hi.gamma()) {
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert!(b <= a);
            }
        }
    }

    #[test]
    fn median_stays_in_envelope_of_remaining_curves(
        base in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 30), 3..7),
        outlier in prop::collection::vec(0.0f64..1.0, 30),
        which in 0usize..7,
    ) {
        let times: Vec<f64> = (0..30).map(|i| i as f64 * 0.01).collect();
        let curve = |v: &Vec<f64>| {
            CoherenceCurve::new(times.clone(), v.iter().copied().map(Some).collect(), Band::Broadband, PairId::new("r", "c")).unwrap()
        };
        let which = which % base.len();
        let mut curves: Vec<_> = base.iter().map(curve).collect();
        curves[which] = curve(&outlier);
        let m = median_coherence(&curves).unwrap();
        for t in 0..30 {
            let rest: Vec<f64> = base.iter().enumerate().filter(|(i, _)| *i != which).map(|(_, v)| v[t]).collect();
            let lo = rest.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let g = m.gamma()[t].unwrap();
            prop_assert!(g >= lo - 1e-15 && g <= hi + 1e-15);
        }
    }
}

#[test]
fn independent_noise_coherence_matches_monte_carlo() {
    let cfg = AnalysisConfig::default();
    let rate = 4000.0;
    let w = (cfg.avg_window() * rate).round() as usize;

    let mut oracle_rng = rng(1000);
    let draws: Vec<f64> = (0..1000).map(|_| direct_coherence(&mut oracle_rng, w)).collect();
    let oracle = median(&draws);

    let mut medians = Vec::new();
    for seed in 0..20 {
        let mut r = rng(seed);
        let x = band_signal(complex_noise(&mut r, 4000), rate, "x");
        let y = band_signal(complex_noise(&mut r, 4000), rate, "y");
        let c = short_time_coherence(&x, &y, &cfg).unwrap();
        let v: Vec<f64> = c.gamma().iter().flatten().copied().collect();
        medians.push(median(&v));
    }
    let measured = median(&medians);
    assert!((measured / oracle - 1.0).abs() < 0.15, "measured {measured}, oracle {oracle}");
    let nominal = 1.0 / w as f64;
    assert!((measured / nominal - 1.0).abs() < 0.5, "measured {measured}, 1/W {nominal}");
}

#[test]
fn expected_coherence_of_exponential_decay() {
    let tau = 0.3;
    let e_n = 1e-3;
    let signal: Vec<f64> = (0..200).map(|i| (-2.0 * i as f64 * 0.01 / tau).exp()).collect();
    let env = envelope(signal, e_n, "x");
    let c = expected_coherence(&env, &env).unwrap();
    for (i, g) in c.gamma().iter().enumerate() {
        let t = i as f64 * 0.01;
        let closed = (1.0 / (1.0 + e_n * (2.0 * t / tau).exp())).powi(2);
        assert!((g.unwrap() - closed).abs() < 1e-12);
    }
}

/// `(|sum h_x h_y| / sum h_x^2)^2` on the stored components.
fn component_coherence(pair: &SyntheticPair<f64>) -> f64 {
    let cross: f64 = pair.h_x().iter().zip(pair.h_y()).map(|(a, b)| a * b).sum();
    let ex: f64 = pair.h_x().iter().map(|a| a * a).sum();
    (cross.abs() / ex).powi(2)
}

#[test]
fn noiseless_mixing_pair_recovers_a_squared() {
    let cfg = AnalysisConfig::default();
    for a in [0.5, 0.7, 0.9] {
        let mut measured = Vec::new();
        let mut oracle = Vec::new();
        for seed in 0..10 {
            let sc = SynthConfig::default().with_sample_rate(16000).with_snr(f64::INFINITY).with_seed(seed);
            let p: SyntheticPair<f64> = gen_mixing_pair(a, 0.5, &sc).unwrap();
            oracle.push(component_coherence(&p));
            let an = analyze_band(p.x(), p.y(), Band::Broadband, &cfg).unwrap();
            let end = an.rating.as_ref().unwrap().truncation_index();
            let v: Vec<f64> = an.environment.gamma()[an.onset..=end].iter().flatten().copied().collect();
            measured.push(median(&v));
        }
        let (m, o) = (median(&measured), median(&oracle));
        assert!((o - a * a).abs() < 0.05, "a={a}: component oracle {o}");
        assert!((m - o).abs() < 0.05, "a={a}: measured {m}, oracle {o}");
    }
}

#[test]
fn environment_times_expected_reconstructs_measured() {
    let cfg = AnalysisConfig::default();
    let sc = SynthConfig::default().with_sample_rate(16000).with_snr(40.0).with_seed(3);
    let p: SyntheticPair<f64> = gen_mixing_pair(0.8, 0.5, &sc).unwrap();
    let an = analyze_band(p.x(), p.y(), Band::Broadband, &cfg).unwrap();
    let mut checked = 0;
    for ((m, e), g) in an.measured.gamma().iter().zip(an.expected.gamma()).zip(an.environment.gamma()) {
        if let (Some(m), Some(e), Some(g)) = (m, e, g) {
            if *g < 1.0 && *g > 0.0 {
                assert!((g * e - m).abs() < 1e-12);
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn band_pairing_errors() {
    let r = Rir::new(48000, (0..48000).map(|i| ((i % 97) as f64 - 48.0) / 48.0).collect(), RirMeta::labeled("x")).unwrap();
    let a = demodulate(&r, Band::Narrow(BandSpec::new(2000.0, 1000.0).unwrap())).unwrap();
    let b = demodulate(&r, Band::Narrow(BandSpec::new(3000.0, 1000.0).unwrap())).unwrap();
    let err = short_time_coherence(&a, &b, &AnalysisConfig::default()).unwrap_err();
    assert!(matches!(err, rircoh::error::Error::Pairing(_)));
}

#[test]
fn identical_grids_give_all_ones() {
    let cfg = AnalysisConfig::default();
    let p: SyntheticPair<f64> = gen_mixing_pair(1.0, 0.3, &SynthConfig::default().with_seed(4)).unwrap();
    let g = stft(p.x(), &cfg).unwrap();
    let m = tf_coherence(&g, &g, &cfg).unwrap();
    let mut defined = 0;
    for row in m.gamma() {
        for v in row.iter().flatten() {
            assert_eq!(*v, 1.0);
            defined += 1;
        }
    }
    assert!(defined > 0);
}

#[test]
fn independent_grids_give_one_over_span() {
    // Frames do not overlap, so neighbouring frames are independent.
    let cfg = AnalysisConfig::builder().stft_hop(512).build().unwrap();
    let half = cfg.tf_half_span(48000);
    let k = 2 * half + 1;
    let mut oracle_rng = rng(77);
    let draws: Vec<f64> = (0..1000).map(|_| direct_coherence(&mut oracle_rng, k)).collect();
    let oracle = median(&draws);

    let mut values = Vec::new();
    for seed in 0..3 {
        let mut r = rng(seed);
        let x = Rir::new(48000, gaussian(&mut r, 48000), RirMeta::labeled("x")).unwrap();
        let y = Rir::new(48000, gaussian(&mut r, 48000), RirMeta::labeled("y")).unwrap();
        let m = tf_coherence(&stft(&x, &cfg).unwrap(), &stft(&y, &cfg).unwrap(), &cfg).unwrap();
        // Interior frames and bins away from DC and Nyquist.
        for row in &m.gamma()[half..m.times().len() - half] {
            values.extend(row[1..256].iter().flatten());
        }
    }
    let measured = median(&values);
    assert!((measured / oracle - 1.0).abs() < 0.1, "measured {measured}, oracle {oracle}");
    let nominal = 1.0 / k as f64;
    assert!((measured / nominal - 1.0).abs() < 0.5, "measured {measured}, 1/(2L+1) {nominal}");
}

#[test]
fn occlusion_drop_widens_with_frequency() {
    let cfg = AnalysisConfig::default();
    let occ = Occlusion { start: 0.038, length: 0.002, ..Occlusion::default() };
    let groups = 6;
    let mut area = vec![0.0; groups];
    for seed in 0..3 {
        let p: SyntheticPair<f64> = gen_occluded_pair(1.0, occ, &SynthConfig::default().with_seed(seed)).unwrap();
        let tf = analyze_tf(p.x(), p.y(), &cfg).unwrap();
        // First 120 frames (about 0.33 s) after the onset.
        let rows = &tf.map.gamma()[tf.onset_frame..tf.onset_frame + 120];
        for (g, slot) in area.iter_mut().enumerate() {
            let bins = 1 + g * 40..1 + (g + 1) * 40;
            for row in rows {
                let v: Vec<f64> = row[bins.clone()].iter().flatten().copied().collect();
                *slot += 1.0 - median(&v);
            }
        }
    }
    for w in area.windows(2) {
        assert!(w[1] > w[0], "drop area per band group {area:?}");
    }
}

#[test]
fn median_resists_an_occluded_outlier() {
    let times: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
    let mut r = rng(8);
    let mut curves: Vec<CoherenceCurve<f64>> = (0..5)
        .map(|_| {
            let g = gaussian(&mut r, 100).into_iter().map(|v| Some(0.8 + 0.01 * v.clamp(-3.0, 3.0))).collect();
            CoherenceCurve::new(times.clone(), g, Band::Broadband, PairId::new("r", "c")).unwrap()
        })
        .collect();
    curves.push(CoherenceCurve::new(times.clone(), vec![Some(0.05); 100], Band::Broadband, PairId::new("r", "o")).unwrap());
    let m = median_coherence(&curves).unwrap();
    assert!(m.gamma().iter().all(|g| (0.75..=0.85).contains(&g.unwrap())));
    assert_eq!(m.pair_id().comparison, "median-of-6");
}

#[test]
fn envelope_noise_feeds_expected_coherence() {
    // A band signal whose noise equals its signal energy gives 1/4.
    let z = vec![Complex64::new(1.0, 0.0); 400];
    let b = band_signal(z, 4000.0, "x");
    let env = energy_envelope(&b, 0.5, &AnalysisConfig::default()).unwrap();
    let c = expected_coherence(&env, &env).unwrap();
    assert!(c.gamma().iter().all(|g| (g.unwrap() - 0.25).abs() < 1e-15));
    assert!(estimate_noise_floor(&b).unwrap() > 0.0);
}
