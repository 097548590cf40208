//! Synthetic impulse-response pairs with known ground truth.
//!
//! Every generator draws a diffuse field (white Gaussian noise under an
//! exponential envelope whose energy decays 60 dB in `rt` seconds), applies a
//! controlled change to form the second response, and adds independent white
//! measurement noise. The diffuse variance at `t = 0` is 1 and the SNR is
//! quoted against it. Each random component uses its own ChaCha8 stream, so a
//! seed reproduces the pair bit for bit.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::filter::{bessel_i0, KAISER_BETA};
use crate::dsp::noise::MIN_TAIL_DURATION;
use crate::dsp::stft::hann_periodic;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{NoiseRegion, Rir, RirMeta};

/// Largest time stretch accepted by [`gen_jitter_pair`].
pub const MAX_DRIFT: f64 = 1e-3;
/// Default phase-noise variance at Nyquist for occlusion pairs.
pub const DEFAULT_KAPPA: f64 = 1.5;
/// Default specular energy of occlusion pairs, relative to 10 ms of diffuse energy.
pub const DEFAULT_SPECULAR_GAIN: f64 = 0.0;
const PERTURB_WINDOW: usize = 512;
const PERTURB_HOP: usize = 128;
const PERTURB_RAMP: f64 = 0.020;
const RESAMPLE_HALF_WIDTH: usize = 48;

#[derive(Clone, Copy)]
#[repr(u64)]
enum Stream {
    Diffuse = 0,
    Independent = 1,
    NoiseX = 2,
    NoiseY = 3,
    Phase = 4,
    Replacement = 5,
}

fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Amplitude envelope whose energy falls 60 dB in `rt` seconds.
pub fn decay_envelope(rt: f64, t: f64) -> f64 {
    (-t * 1e3f64.ln() / rt).exp()
}

/// Settings shared by the pair generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub sample_rate: u32,
    /// Recording length in seconds; defaults to `max(1, 1.5 rt)`.
    pub duration: Option<f64>,
    /// SNR against the diffuse variance at `t = 0`; infinity means noiseless.
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sample_rate: 48000,
            duration: None,
            snr_db: 60.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_snr(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = Some(duration);
        self
    }

    pub fn with_sample_rate(mut self, rate: u32) -> Self {
        self.sample_rate = rate;
        self
    }

    fn samples_for(&self, rt: f64) -> Result<usize> {
        if self.sample_rate == 0 {
            return Err(Error::validation("synth", "sample rate must be positive"));
        }
        if !(self.snr_db > 0.0) {
            return Err(Error::validation("synth", format!("SNR {} dB must be > 0", self.snr_db)));
        }
        let duration = self.duration.unwrap_or((1.5 * rt).max(1.0));
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::validation("synth", format!("duration {duration} s must be positive")));
        }
        Ok((duration * self.sample_rate as f64).round() as usize)
    }

    fn noise_std(&self) -> f64 {
        if self.snr_db.is_infinite() {
            0.0
        } else {
            10f64.powf(-self.snr_db / 20.0)
        }
    }
}

fn check_rt(rt: f64, what: &str) -> Result<()> {
    if !(rt.is_finite() && rt > 0.0) {
        return Err(Error::validation("synth", format!("{what} {rt} s must be positive")));
    }
    Ok(())
}

/// The change applied to the second response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Change {
    Decay,
    Mixing { a: f64 },
    Occlusion { start: f64, length: f64, attenuation_db: f64, kappa: f64, specular_gain: f64 },
    Absorption { change_time: f64, rt_y: f64, changed_fraction: f64 },
    Jitter { drift: f64 },
}

/// Declared ground truth of a synthetic pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub generator: String,
    pub seed: u64,
    pub sample_rate: u32,
    pub duration: f64,
    /// Decay of the reference response.
    pub rt: f64,
    pub snr_db: f64,
    /// Measurement-noise variance added to each response.
    pub noise_variance: f64,
    /// Environment coherence the construction targets, in every band.
    pub gamma_ir_target: Option<f64>,
    pub change: Change,
}

/// A pair `x = h_x + n_x`, `y = h_y + n_y` with its components and truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair<T> {
    x: Rir<T>,
    y: Rir<T>,
    h_x: Vec<T>,
    h_y: Vec<T>,
    n_x: Vec<T>,
    n_y: Vec<T>,
    truth: Truth,
}

impl<T: Scalar> SyntheticPair<T> {
    fn assemble(h_x: Vec<f64>, h_y: Vec<f64>, n_x: Vec<f64>, n_y: Vec<f64>, truth: Truth) -> Result<Self> {
        let conv = |v: Vec<f64>| v.into_iter().map(T::of).collect::<Vec<T>>();
        let (h_x, h_y, n_x, n_y) = (conv(h_x), conv(h_y), conv(n_x), conv(n_y));
        let sum = |h: &[T], n: &[T]| h.iter().zip(n).map(|(&a, &b)| a + b).collect::<Vec<T>>();
        let noise = if truth.duration >= MIN_TAIL_DURATION {
            NoiseRegion::Tail
        } else {
            NoiseRegion::ShortTail
        };
        let meta = |label: &str| RirMeta {
            label: label.to_string(),
            condition_id: truth.generator.clone(),
            noise: noise.clone(),
            ..Default::default()
        };
        let x = Rir::new(truth.sample_rate, sum(&h_x, &n_x), meta("x"))?;
        let y = Rir::new(truth.sample_rate, sum(&h_y, &n_y), meta("y"))?;
        Ok(SyntheticPair { x, y, h_x, h_y, n_x, n_y, truth })
    }

    pub fn x(&self) -> &Rir<T> {
        &self.x
    }

    pub fn y(&self) -> &Rir<T> {
        &self.y
    }

    pub fn h_x(&self) -> &[T] {
        &self.h_x
    }

    pub fn h_y(&self) -> &[T] {
        &self.h_y
    }

    pub fn n_x(&self) -> &[T] {
        &self.n_x
    }

    pub fn n_y(&self) -> &[T] {
        &self.n_y
    }

    pub fn truth(&self) -> &Truth {
        &self.truth
    }

    /// Relabels both responses, e.g. before writing them to disk.
    pub fn relabeled(mut self, x: &str, y: &str, condition: &str) -> Self {
        let relabel = |r: Rir<T>, label: &str| {
            let mut meta = r.meta().clone();
            meta.label = label.to_string();
            meta.condition_id = condition.to_string();
            r.with_meta(meta)
        };
        self.x = relabel(self.x, x);
        self.y = relabel(self.y, y);
        self
    }
}

fn diffuse(n: usize, rate: f64, rt: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    gaussian(rng, n)
        .into_iter()
        .enumerate()
        .map(|(i, g)| g * decay_envelope(rt, i as f64 / rate))
        .collect()
}

fn measurement_noise(n: usize, cfg: &SynthConfig, stream: Stream) -> Vec<f64> {
    let std = cfg.noise_std();
    if std == 0.0 {
        return vec![0.0; n];
    }
    gaussian(&mut rng(cfg.seed, stream), n).into_iter().map(|g| g * std).collect()
}

fn truth(generator: &str, cfg: &SynthConfig, n: usize, rt: f64, target: Option<f64>, change: Change) -> Truth {
    let std = cfg.noise_std();
    Truth {
        generator: generator.to_string(),
        seed: cfg.seed,
        sample_rate: cfg.sample_rate,
        duration: n as f64 / cfg.sample_rate as f64,
        rt,
        snr_db: cfg.snr_db,
        noise_variance: std * std,
        gamma_ir_target: target,
        change,
    }
}

/// Noise-free exponentially decaying Gaussian response.
pub fn gen_decaying_rir<T: Scalar>(rt: f64, sample_rate: u32, duration: f64, seed: u64) -> Result<Rir<T>> {
    check_rt(rt, "rt")?;
    if !(duration >= rt) {
        return Err(Error::validation("synth", format!("duration {duration} s is shorter than rt {rt} s")));
    }
    if sample_rate == 0 {
        return Err(Error::validation("synth", "sample rate must be positive"));
    }
    let n = (duration * sample_rate as f64).round() as usize;
    let h = diffuse(n, sample_rate as f64, rt, &mut rng(seed, Stream::Diffuse));
    let noise = if duration >= MIN_TAIL_DURATION {
        NoiseRegion::Tail
    } else {
        NoiseRegion::ShortTail
    };
    Rir::new(
        sample_rate,
        h.into_iter().map(T::of).collect(),
        RirMeta::labeled(format!("decay-{seed}")).with_noise(noise),
    )
}

/// `h_y = a h_x + sqrt(1 - a^2) h'` with `h'` an independent diffuse field
/// under the same envelope; the target environment coherence is `a^2`.
pub fn gen_mixing_pair<T: Scalar>(a: f64, rt: f64, cfg: &SynthConfig) -> Result<SyntheticPair<T>> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::validation("synth", format!("mixing coefficient {a} outside [0, 1]")));
    }
    check_rt(rt, "rt")?;
    let n = cfg.samples_for(rt)?;
    let rate = cfg.sample_rate as f64;
    let h_x = diffuse(n, rate, rt, &mut rng(cfg.seed, Stream::Diffuse));
    let h_ind = diffuse(n, rate, rt, &mut rng(cfg.seed, Stream::Independent));
    let b = (1.0 - a * a).sqrt();
    let h_y = h_x.iter().zip(&h_ind).map(|(p, q)| a * p + b * q).collect();
    let t = truth("mixing", cfg, n, rt, Some(a * a), Change::Mixing { a });
    SyntheticPair::assemble(
        h_x,
        h_y,
        measurement_noise(n, cfg, Stream::NoiseX),
        measurement_noise(n, cfg, Stream::NoiseY),
        t,
    )
}

/// Occlusion of a propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occlusion {
    /// Arrival time of the occluded path, seconds.
    pub start: f64,
    /// Length of the occluded window, seconds.
    pub length: f64,
    pub attenuation_db: f64,
    /// Phase-noise variance at Nyquist applied after the window.
    pub kappa: f64,
    /// Energy of the specular arrival relative to the diffuse energy of the
    /// following 10 ms.
    pub specular_gain: f64,
}

impl Default for Occlusion {
    fn default() -> Self {
        Occlusion {
            start: 0.0,
            length: 0.010,
            attenuation_db: 30.0,
            kappa: DEFAULT_KAPPA,
            specular_gain: DEFAULT_SPECULAR_GAIN,
        }
    }
}

/// Pair where a specular path arriving at `occlusion.start` is blocked in `y`.
///
/// `x` is a diffuse field plus an optional specular arrival carrying
/// `specular_gain` times the diffuse energy of the following 10 ms. In `y` the occlusion window is
/// `g x + sqrt(1 - g^2) x'` (`g` the attenuation as an amplitude gain, `x'` an
/// independent diffuse field), and everything after it receives STFT phase
/// noise of variance `kappa (1 - g^2) f / f_nyquist`, ramped in over 20 ms.
pub fn gen_occluded_pair<T: Scalar>(rt: f64, occlusion: Occlusion, cfg: &SynthConfig) -> Result<SyntheticPair<T>> {
    check_rt(rt, "rt")?;
    let n = cfg.samples_for(rt)?;
    let rate = cfg.sample_rate as f64;
    let duration = n as f64 / rate;
    let Occlusion { start, length, attenuation_db, kappa, specular_gain } = occlusion;
    if !(start >= 0.0 && length > 0.0 && start + length <= duration) {
        return Err(Error::validation(
            "occlusion",
            format!("window [{start}, {}) s is not inside the {duration} s response", start + length),
        ));
    }
    if !(attenuation_db >= 0.0 && kappa >= 0.0 && specular_gain >= 0.0) {
        return Err(Error::validation("occlusion", "attenuation, kappa and specular gain must be >= 0"));
    }
    let n_start = (start * rate).round() as usize;
    let n_end = (((start + length) * rate).round() as usize).clamp(n_start + 1, n);

    let mut h_x = diffuse(n, rate, rt, &mut rng(cfg.seed, Stream::Diffuse));
    let span = (0.010 * rate).round() as usize;
    let diffuse_energy: f64 = (n_start..(n_start + span).min(n))
        .map(|i| decay_envelope(rt, i as f64 / rate).powi(2))
        .sum();
    h_x[n_start] += (specular_gain * diffuse_energy).sqrt();

    let g = 10f64.powf(-attenuation_db / 20.0);
    let replacement = diffuse(n, rate, rt, &mut rng(cfg.seed, Stream::Replacement));
    let mut h_y = h_x.clone();
    let c = (1.0 - g * g).sqrt();
    for i in n_start..n_end {
        h_y[i] = g * h_x[i] + c * replacement[i];
    }

    let late: Vec<f64> = (0..n).map(|i| if i >= n_end { h_x[i] } else { 0.0 }).collect();
    let perturbed = perturb_phase(
        &late,
        kappa * (1.0 - g * g),
        n_end,
        (PERTURB_RAMP * rate).round() as usize,
        &mut rng(cfg.seed, Stream::Phase),
    );
    for i in n_end..n {
        h_y[i] = perturbed[i];
    }

    let t = truth(
        "occlusion",
        cfg,
        n,
        rt,
        None,
        Change::Occlusion { start, length, attenuation_db, kappa, specular_gain },
    );
    SyntheticPair::assemble(
        h_x,
        h_y,
        measurement_noise(n, cfg, Stream::NoiseX),
        measurement_noise(n, cfg, Stream::NoiseY),
        t,
    )
}

/// Multiplies every STFT coefficient by `exp(j phi)`, `phi ~ N(0, s^2)` with
/// `s^2 = kappa f / f_nyquist` scaled by a linear ramp from `ramp_start` over
/// `ramp_len` samples, and resynthesizes by weighted overlap-add.
fn perturb_phase(signal: &[f64], kappa: f64, ramp_start: usize, ramp_len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (win, hop) = (PERTURB_WINDOW, PERTURB_HOP);
    let half = win / 2;
    let w = hann_periodic(win);
    let pad = win;
    let total = signal.len() + 2 * pad;
    let mut padded = vec![0.0; total];
    padded[pad..pad + signal.len()].copy_from_slice(signal);

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(win);
    let inv = planner.plan_fft_inverse(win);
    let mut out = vec![0.0; total];
    let mut norm = vec![0.0; total];
    let mut buf = vec![Complex64::new(0.0, 0.0); win];
    let mut frame_start = 0;
    while frame_start + win <= total {
        let center = (frame_start + half) as f64 - pad as f64;
        let ramp = if ramp_len == 0 {
            if center >= ramp_start as f64 { 1.0 } else { 0.0 }
        } else {
            ((center - ramp_start as f64) / ramp_len as f64).clamp(0.0, 1.0)
        };
        let phases: Vec<f64> = (1..half)
            .map(|k| {
                let g: f64 = StandardNormal.sample(rng);
                g * (kappa * ramp * k as f64 / half as f64).sqrt()
            })
            .collect();
        let seg = &padded[frame_start..frame_start + win];
        if seg.iter().any(|&v| v != 0.0) {
            for (b, (&s, &wv)) in buf.iter_mut().zip(seg.iter().zip(&w)) {
                *b = Complex64::new(s * wv, 0.0);
            }
            fwd.process(&mut buf);
            for k in 1..half {
                let rot = Complex64::from_polar(1.0, phases[k - 1]);
                buf[k] *= rot;
                buf[win - k] = buf[k].conj();
            }
            inv.process(&mut buf);
            for i in 0..win {
                out[frame_start + i] += buf[i].re / win as f64 * w[i];
            }
        }
        for i in 0..win {
            norm[frame_start + i] += w[i] * w[i];
        }
        frame_start += hop;
    }
    out[pad..pad + signal.len()]
        .iter()
        .zip(&norm[pad..pad + signal.len()])
        .map(|(&o, &z)| if z > 0.0 { o / z } else { 0.0 })
        .collect()
}

/// Pair sharing its early part up to `change_time`; afterwards the late
/// fields are `sqrt(1 - c)` shared plus `sqrt(c)` independent (`c` the changed
/// fraction) and decay with `rt_x` and `rt_y`, continuous at `change_time`.
pub fn gen_absorption_change_pair<T: Scalar>(
    rt_x: f64,
    rt_y: f64,
    change_time: f64,
    changed_fraction: f64,
    cfg: &SynthConfig,
) -> Result<SyntheticPair<T>> {
    check_rt(rt_x, "rt_x")?;
    check_rt(rt_y, "rt_y")?;
    if !(0.0..=1.0).contains(&changed_fraction) {
        return Err(Error::validation("synth", format!("changed fraction {changed_fraction} outside [0, 1]")));
    }
    let n = cfg.samples_for(rt_x.max(rt_y))?;
    let rate = cfg.sample_rate as f64;
    let duration = n as f64 / rate;
    if !(change_time >= 0.0 && change_time <= duration) {
        return Err(Error::validation("synth", format!("change time {change_time} s outside the response")));
    }
    let n_change = ((change_time * rate).round() as usize).min(n);
    let shared = gaussian(&mut rng(cfg.seed, Stream::Diffuse), n);
    let gx = gaussian(&mut rng(cfg.seed, Stream::Independent), n);
    let gy = gaussian(&mut rng(cfg.seed, Stream::Replacement), n);
    let (keep, swap) = ((1.0 - changed_fraction).sqrt(), changed_fraction.sqrt());
    let at_change = decay_envelope(rt_x, change_time);

    let mut h_x = vec![0.0; n];
    let mut h_y = vec![0.0; n];
    for i in 0..n {
        let t = i as f64 / rate;
        if i < n_change {
            let v = shared[i] * decay_envelope(rt_x, t);
            h_x[i] = v;
            h_y[i] = v;
        } else {
            let dt = t - change_time;
            h_x[i] = (keep * shared[i] + swap * gx[i]) * at_change * decay_envelope(rt_x, dt);
            h_y[i] = (keep * shared[i] + swap * gy[i]) * at_change * decay_envelope(rt_y, dt);
        }
    }
    let t = truth(
        "absorption",
        cfg,
        n,
        rt_x,
        None,
        Change::Absorption { change_time, rt_y, changed_fraction },
    );
    SyntheticPair::assemble(
        h_x,
        h_y,
        measurement_noise(n, cfg, Stream::NoiseX),
        measurement_noise(n, cfg, Stream::NoiseY),
        t,
    )
}

/// Pair where `h_y` is `h_x` read at `n (1 + drift)`: a progressive time
/// stretch whose phase error grows with time and frequency.
pub fn gen_jitter_pair<T: Scalar>(rt: f64, drift: f64, cfg: &SynthConfig) -> Result<SyntheticPair<T>> {
    check_rt(rt, "rt")?;
    if !(drift.abs() <= MAX_DRIFT) {
        return Err(Error::validation("synth", format!("drift {drift} exceeds {MAX_DRIFT}")));
    }
    let n = cfg.samples_for(rt)?;
    let rate = cfg.sample_rate as f64;
    let h_x = diffuse(n, rate, rt, &mut rng(cfg.seed, Stream::Diffuse));
    let h_y = if drift == 0.0 {
        h_x.clone()
    } else {
        resample(&h_x, 1.0 + drift)
    };
    let t = truth("jitter", cfg, n, rt, None, Change::Jitter { drift });
    SyntheticPair::assemble(
        h_x,
        h_y,
        measurement_noise(n, cfg, Stream::NoiseX),
        measurement_noise(n, cfg, Stream::NoiseY),
        t,
    )
}

/// Band-limited interpolation of `x` at positions `n * factor`
/// (Kaiser-windowed sinc, 48 samples each side).
pub fn resample(x: &[f64], factor: f64) -> Vec<f64> {
    const TABLE: usize = 8192;
    let h = RESAMPLE_HALF_WIDTH as f64;
    let i0b = bessel_i0(KAISER_BETA);
    let table: Vec<f64> = (0..=TABLE)
        .map(|k| {
            let u = k as f64 / TABLE as f64;
            bessel_i0(KAISER_BETA * (1.0 - u * u).max(0.0).sqrt()) / i0b
        })
        .collect();
    let window = |d: f64| {
        let u = d.abs() / h * TABLE as f64;
        let k = u.floor() as usize;
        if k >= TABLE {
            return 0.0;
        }
        let frac = u - k as f64;
        table[k] * (1.0 - frac) + table[k + 1] * frac
    };
    let n = x.len() as isize;
    (0..x.len())
        .map(|i| {
            let p = i as f64 * factor;
            let base = p.floor() as isize;
            let mut acc = 0.0;
            for k in base - RESAMPLE_HALF_WIDTH as isize + 1..=base + RESAMPLE_HALF_WIDTH as isize {
                if k < 0 || k >= n {
                    continue;
                }
                let d = p - k as f64;
                let sinc = if d == 0.0 {
                    1.0
                } else {
                    (std::f64::consts::PI * d).sin() / (std::f64::consts::PI * d)
                };
                acc += x[k as usize] * sinc * window(d);
            }
            acc
        })
        .collect()
}

/// Names accepted by [`generate`].
pub const GENERATORS: [&str; 5] = ["decay", "mixing", "occlusion", "absorption", "jitter"];

/// Parameters of a named generator, for the command line and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub rt: f64,
    pub rt_y: Option<f64>,
    pub a: f64,
    pub change_time: f64,
    pub changed_fraction: f64,
    pub drift: f64,
    pub occlusion: Occlusion,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            rt: 1.0,
            rt_y: None,
            a: 0.7,
            change_time: 0.020,
            changed_fraction: 1.0,
            drift: 1e-4,
            occlusion: Occlusion::default(),
        }
    }
}

/// Runs the generator called `name`. `decay` yields two independent draws of
/// the same decay with measurement noise.
pub fn generate<T: Scalar>(name: &str, params: &GeneratorParams, cfg: &SynthConfig) -> Result<SyntheticPair<T>> {
    match name {
        "decay" => gen_mixing_pair(0.0, params.rt, cfg).map(|p| {
            let mut t = p.truth.clone();
            t.generator = "decay".into();
            t.change = Change::Decay;
            SyntheticPair { truth: t, ..p }
        }),
        "mixing" => gen_mixing_pair(params.a, params.rt, cfg),
        "occlusion" => gen_occluded_pair(params.rt, params.occlusion, cfg),
        "absorption" => gen_absorption_change_pair(
            params.rt,
            params.rt_y.unwrap_or(params.rt),
            params.change_time,
            params.changed_fraction,
            cfg,
        ),
        "jitter" => gen_jitter_pair(params.rt, params.drift, cfg),
        other => Err(Error::Config(format!(
            "unknown generator '{other}'; available: {}",
            GENERATORS.join(", ")
        ))),
    }
}
