mod common;

use common::*;
use rircoh::dsp::{demodulate, estimate_noise_floor, estimate_rt};
use rircoh::sensitivity::{analyze_band, analyze_tf};
use rircoh::synth::*;
use rircoh::types::*;

fn broadband_rating(p: &SyntheticPair<f64>) -> f64 {
    analyze_band(p.x(), p.y(), Band::Broadband, &AnalysisConfig::default())
        .unwrap()
        .rating
        .unwrap()
        .gamma_rating()
}

#[test]
fn decaying_rir_has_the_requested_rt() {
    for seed in 0..3 {
        let r: Rir<f64> = gen_decaying_rir(1.2, 48000, 1.8, seed).unwrap();
        let rt = estimate_rt(&r).unwrap();
        assert!((rt / 1.2 - 1.0).abs() < 0.1, "seed {seed}: {rt}");
    }
    let a: Rir<f64> = gen_decaying_rir(1.2, 16000, 1.2, 4).unwrap();
    let b: Rir<f64> = gen_decaying_rir(1.2, 16000, 1.2, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn decile_energy_ratio_is_fixed_when_duration_equals_rt() {
    // Energy falls 60 dB per rt, so the first and last deciles of a response
    // lasting exactly rt are 0.9 * 60 = 54 dB apart whatever rt is.
    let decile_ratio_db = |r: &Rir<f64>| {
        let n = r.len() / 10;
        let first: f64 = r.samples()[..n].iter().map(|v| v * v).sum();
        let last: f64 = r.samples()[r.len() - n..].iter().map(|v| v * v).sum();
        10.0 * (first / last).log10()
    };
    for (rt, rate) in [(1.2, 16000), (30.0, 1000), (1000.0, 100)] {
        let r: Rir<f64> = gen_decaying_rir(rt, rate, rt, 1).unwrap();
        let db = decile_ratio_db(&r);
        assert!((db - 54.0).abs() < 1.5, "rt {rt}: {db} dB");
    }
    assert!(gen_decaying_rir::<f64>(2.0, 16000, 1.0, 1).is_err());
}

#[test]
fn mixing_truth_follows_coefficient() {
    let sc = SynthConfig::default().with_sample_rate(16000);
    let one: SyntheticPair<f64> = gen_mixing_pair(1.0, 0.3, &sc).unwrap();
    assert_eq!(one.h_x(), one.h_y());
    assert_eq!(one.truth().gamma_ir_target, Some(1.0));
    let zero: SyntheticPair<f64> = gen_mixing_pair(0.0, 0.3, &sc).unwrap();
    assert_eq!(zero.truth().gamma_ir_target, Some(0.0));
    let cross: f64 = zero.h_x().iter().zip(zero.h_y()).map(|(a, b)| a * b).sum();
    let ex: f64 = zero.h_x().iter().map(|a| a * a).sum();
    assert!((cross / ex).abs() < 0.1);
    assert!(gen_mixing_pair::<f64>(1.5, 0.3, &sc).is_err());
}

#[test]
fn mixing_environment_coherence_median_over_seeds() {
    let cfg = AnalysisConfig::default();
    let medians: Vec<f64> = (0..100)
        .map(|seed| {
            let sc = SynthConfig::default().with_sample_rate(16000).with_seed(seed);
            let p: SyntheticPair<f64> = gen_mixing_pair(0.7, 0.5, &sc).unwrap();
            let an = analyze_band(p.x(), p.y(), Band::Broadband, &cfg).unwrap();
            let end = an.rating.as_ref().unwrap().truncation_index();
            let v: Vec<f64> = an.environment.gamma()[an.onset..=end].iter().flatten().copied().collect();
            median(&v)
        })
        .collect();
    let m = median(&medians);
    assert!((0.44..=0.54).contains(&m), "median {m}");
}

#[test]
fn measured_snr_matches_request() {
    let rate = 16000.0;
    let rt = 0.4;
    for snr in [30.0, 45.0, 60.0] {
        for seed in 0..3 {
            let sc = SynthConfig::default().with_sample_rate(16000).with_duration(2.0).with_snr(snr).with_seed(seed);
            let p: SyntheticPair<f64> = gen_mixing_pair(0.5, rt, &sc).unwrap();
            for rir in [p.x(), p.y()] {
                let b = demodulate(rir, Band::Broadband).unwrap();
                let e_n = estimate_noise_floor(&b).unwrap();
                // Diffuse power at t = 0: the first 50 ms with the decay undone.
                let n = (0.05 * rate) as usize;
                let s0 = b.samples()[..n]
                    .iter()
                    .enumerate()
                    .map(|(i, z)| (z.norm_sqr() - e_n) / decay_envelope(rt, i as f64 / rate).powi(2))
                    .sum::<f64>()
                    / n as f64;
                let measured = 10.0 * (s0 / e_n).log10();
                assert!((measured - snr).abs() < 1.0, "snr {snr}, seed {seed}: {measured}");
            }
        }
    }
}

#[test]
fn component_coherence_mean_square_error_halves_with_duration() {
    // A near-flat envelope makes the number of effective samples proportional
    // to the duration.
    let a: f64 = 0.6;
    let mse = |duration: f64| {
        let errs: Vec<f64> = (0..300)
            .map(|seed| {
                let sc = SynthConfig::default()
                    .with_sample_rate(8000)
                    .with_duration(duration)
                    .with_snr(f64::INFINITY)
                    .with_seed(seed);
                let p: SyntheticPair<f64> = gen_mixing_pair(a, 1000.0, &sc).unwrap();
                let cross: f64 = p.h_x().iter().zip(p.h_y()).map(|(x, y)| x * y).sum();
                let ex: f64 = p.h_x().iter().map(|x| x * x).sum();
                ((cross / ex).powi(2) - a * a).powi(2)
            })
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    };
    let durations = [0.05, 0.1, 0.2, 0.4];
    let errors: Vec<f64> = durations.iter().map(|&d| mse(d)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..=2.7).contains(&ratio), "mse {errors:?}");
    }
}

#[test]
fn zero_attenuation_occlusion_differs_only_by_noise() {
    let occ = Occlusion { attenuation_db: 0.0, ..Occlusion::default() };
    let p: SyntheticPair<f64> = gen_occluded_pair(0.5, occ, &SynthConfig::default().with_seed(3)).unwrap();
    for (a, b) in p.h_x().iter().zip(p.h_y()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn default_occlusion_decorrelates_the_early_part() {
    let cfg = AnalysisConfig::default();
    let occ = Occlusion::default();
    for seed in 0..3 {
        let p: SyntheticPair<f64> = gen_occluded_pair(1.0, occ, &SynthConfig::default().with_seed(seed)).unwrap();
        let an = analyze_band(p.x(), p.y(), Band::Broadband, &cfg).unwrap();
        let t_max = an.rating.as_ref().unwrap().truncation_time();
        let (t, g) = (an.measured.times(), an.measured.gamma());
        let pick = |lo: f64, hi: f64| -> Vec<f64> {
            (0..t.len()).filter(|&i| t[i] >= lo && t[i] < hi).filter_map(|i| g[i]).collect()
        };
        let early = median(&pick(0.0, occ.length));
        let late = median(&pick(occ.length, t_max));
        assert!(early < 0.2 && late > 0.6, "seed {seed}: early {early}, late {late}");
    }
}

#[test]
fn occlusion_at_38_ms_is_localized() {
    let cfg = AnalysisConfig::default();
    let occ = Occlusion { start: 0.038, length: 0.002, ..Occlusion::default() };
    for seed in 0..5 {
        let p: SyntheticPair<f64> = gen_occluded_pair(2.0, occ, &SynthConfig::default().with_seed(seed)).unwrap();
        let tf = analyze_tf(p.x(), p.y(), &cfg).unwrap();
        let (mut best, mut at) = (f64::INFINITY, 0.0);
        for (f, row) in tf.map.gamma().iter().enumerate().skip(tf.onset_frame).take(200) {
            let v: Vec<f64> = row.iter().flatten().copied().collect();
            let m = median(&v);
            if m < best {
                best = m;
                at = tf.map.times()[f];
            }
        }
        let hop = cfg.stft_hop() as f64 / 48000.0;
        assert!((at - 0.038).abs() <= hop + 1e-12, "seed {seed}: minimum at {at}");
    }
}

#[test]
fn absorption_change_at_the_end_leaves_the_pair_unchanged() {
    let sc = SynthConfig::default().with_sample_rate(16000).with_seed(2);
    let p: SyntheticPair<f64> = gen_absorption_change_pair(0.4, 0.4, 1.0, 1.0, &sc).unwrap();
    assert_eq!(p.h_x(), p.h_y());
    assert!(broadband_rating(&p) < 0.01);
}

#[test]
fn absorption_change_outrates_jitter_tenfold() {
    let (mut absorption, mut jitter) = (Vec::new(), Vec::new());
    for seed in 0..5 {
        let sc = SynthConfig::default().with_seed(seed);
        absorption.push(broadband_rating(&gen_absorption_change_pair(0.4, 0.4, 0.02, 1.0, &sc).unwrap()));
        jitter.push(broadband_rating(&gen_jitter_pair(0.4, 1e-4, &sc).unwrap()));
    }
    let (a, j) = (median(&absorption), median(&jitter));
    assert!(a >= 10.0 * j, "absorption {a}, jitter {j}");
}

#[test]
fn absorption_plateau_after_change() {
    let cfg = AnalysisConfig::default();
    let sc = SynthConfig::default().with_seed(9);
    let p: SyntheticPair<f64> = gen_absorption_change_pair(0.4, 0.4, 0.02, 1.0, &sc).unwrap();
    let an = analyze_band(p.x(), p.y(), Band::Broadband, &cfg).unwrap();
    let t_max = an.rating.as_ref().unwrap().truncation_time();
    let (t, g) = (an.measured.times(), an.measured.gamma());
    let late: Vec<f64> = (0..t.len()).filter(|&i| t[i] > 0.04 && t[i] < t_max).filter_map(|i| g[i]).collect();
    let early: Vec<f64> = (0..t.len()).filter(|&i| t[i] < 0.01).filter_map(|i| g[i]).collect();
    assert!(median(&early) > 0.9);
    assert!(median(&late) < 0.1);
}

#[test]
fn rating_rises_with_changed_fraction() {
    // Emulates changing few versus many panels.
    let fractions = [0.1, 0.3, 0.6, 1.0];
    let medians: Vec<f64> = fractions
        .iter()
        .map(|&c| {
            let v: Vec<f64> = (0..5)
                .map(|seed| {
                    let sc = SynthConfig::default().with_sample_rate(16000).with_seed(seed);
                    broadband_rating(&gen_absorption_change_pair(0.4, 0.4, 0.02, c, &sc).unwrap())
                })
                .collect();
            median(&v)
        })
        .collect();
    for w in medians.windows(2) {
        assert!(w[1] > w[0], "{medians:?}");
    }
}

#[test]
fn jitter_without_drift_is_limited_by_noise() {
    for seed in 0..3 {
        let p: SyntheticPair<f64> = gen_jitter_pair(0.4, 0.0, &SynthConfig::default().with_seed(seed)).unwrap();
        assert!(broadband_rating(&p) < 0.01);
    }
    assert!(gen_jitter_pair::<f64>(0.4, 2e-3, &SynthConfig::default()).is_err());
}

#[test]
fn generators_are_deterministic_and_consistent() {
    let params = GeneratorParams::default();
    let sc = SynthConfig::default().with_sample_rate(16000).with_seed(11);
    for name in GENERATORS {
        let a: SyntheticPair<f64> = generate(name, &params, &sc).unwrap();
        let b: SyntheticPair<f64> = generate(name, &params, &sc).unwrap();
        assert_eq!(a, b, "{name}");
        assert_eq!(a.truth().generator, name);
        assert_eq!(a.truth().seed, 11);
        for i in 0..a.x().len() {
            assert_eq!(a.x().samples()[i], a.h_x()[i] + a.n_x()[i]);
            assert_eq!(a.y().samples()[i], a.h_y()[i] + a.n_y()[i]);
        }
    }
    assert!(generate::<f64>("sweep", &params, &sc).is_err());
}

#[test]
fn single_precision_pairs_round_the_double_components() {
    let sc = SynthConfig::default().with_sample_rate(16000).with_seed(1);
    let p: SyntheticPair<f32> = gen_mixing_pair(0.5, 0.3, &sc).unwrap();
    let q: SyntheticPair<f64> = gen_mixing_pair(0.5, 0.3, &sc).unwrap();
    for (a, b) in p.h_x().iter().zip(q.h_x()) {
        assert_eq!(*a, *b as f32);
    }
}
