//! Short-time coherence, its noise-expected part and the environment residual.
//!
//! All coherence values are squared magnitudes in `[0, 1]`. The environment
//! coherence is the symmetric ratio `measured / expected`; its theoretical
//! counterpart normalizes by the reference energy alone and is therefore not
//! symmetric, so the two agree only when both recordings carry equal energy.

use num_complex::Complex;

use crate::dsp::average::{moving_average, short_time_average};
use crate::dsp::demod::BandSignal;
use crate::dsp::stft::StftGrid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::median;
use crate::types::{AnalysisConfig, CoherenceCurve, EnergyEnvelope, PairId, Rir, TfCoherenceMap};

/// Largest relative length difference tolerated between pair members.
pub const LENGTH_TOLERANCE: f64 = 0.01;

/// Common length of two sequences, or a pairing error when they differ by 1% or more.
pub fn paired_length(a: usize, b: usize, what: &str) -> Result<usize> {
    let (lo, hi) = (a.min(b), a.max(b));
    if hi == 0 {
        return Err(Error::Empty("pair"));
    }
    if (hi - lo) as f64 / hi as f64 >= LENGTH_TOLERANCE {
        return Err(Error::Pairing(format!(
            "{what}: lengths {a} and {b} differ by 1% or more"
        )));
    }
    Ok(lo)
}

/// Checks that two recordings can be analysed together and truncates both
/// to the shorter length.
pub fn align_pair<T: Scalar>(x: &Rir<T>, y: &Rir<T>) -> Result<(Rir<T>, Rir<T>)> {
    if x.sample_rate() != y.sample_rate() {
        return Err(Error::Pairing(format!(
            "'{}' is sampled at {} Hz, '{}' at {} Hz",
            x.label(),
            x.sample_rate(),
            y.label(),
            y.sample_rate()
        )));
    }
    let n = paired_length(x.len(), y.len(), &format!("'{}' and '{}'", x.label(), y.label()))?;
    let cut = |r: &Rir<T>| {
        if r.len() == n {
            Ok(r.clone())
        } else {
            Rir::new(r.sample_rate(), r.samples()[..n].to_vec(), r.meta().clone())
        }
    };
    Ok((cut(x)?, cut(y)?))
}

/// Undefined-point test shared by every estimator: the window energy product
/// is below `eps^2` times the product of the peak window energies.
fn guard<T: Scalar>(px: T, py: T, floor: T) -> bool {
    px * py < floor || px * py <= T::zero()
}

fn gamma_from<T: Scalar>(cross: Complex<T>, px: T, py: T) -> T {
    (cross.norm_sqr() / (px * py)).min(T::one()).max(T::zero())
}

/// Squared short-time coherence of two band signals.
///
/// `gamma = |<x y*>|^2 / (<|x|^2> <|y|^2>)` with one shared centered window of
/// `config.avg_window()`. Signals whose lengths differ by less than 1% are
/// truncated to the shorter one.
pub fn short_time_coherence<T: Scalar>(
    x: &BandSignal<T>,
    y: &BandSignal<T>,
    config: &AnalysisConfig,
) -> Result<CoherenceCurve<T>> {
    if x.band() != y.band() {
        return Err(Error::Pairing(format!(
            "band {} cannot be paired with band {}",
            x.band(),
            y.band()
        )));
    }
    if x.sample_rate() != y.sample_rate() {
        return Err(Error::Pairing(format!(
            "band signal rates {} Hz and {} Hz differ",
            x.sample_rate(),
            y.sample_rate()
        )));
    }
    let n = paired_length(x.len(), y.len(), &format!("'{}' and '{}'", x.source(), y.source()))?;
    let (xs, ys) = (&x.samples()[..n], &y.samples()[..n]);
    let rate = x.sample_rate();
    let window = config.avg_window();

    let cross: Vec<Complex<T>> = xs.iter().zip(ys).map(|(a, b)| a * b.conj()).collect();
    let px: Vec<T> = xs.iter().map(|z| z.norm_sqr()).collect();
    let py: Vec<T> = ys.iter().map(|z| z.norm_sqr()).collect();
    let a = short_time_average::<T, Complex<T>>(&cross, window, rate)?;
    let px = short_time_average::<T, T>(&px, window, rate)?;
    let py = short_time_average::<T, T>(&py, window, rate)?;

    let gamma = coherence_points(&a, &px, &py, T::of(config.guard_epsilon()));
    let mut times = x.times();
    times.truncate(n);
    CoherenceCurve::new(times, gamma, x.band(), PairId::new(x.source(), y.source()))
}

fn peak<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &p| m.max(p))
}

fn coherence_points<T: Scalar>(a: &[Complex<T>], px: &[T], py: &[T], eps: T) -> Vec<Option<T>> {
    let floor = eps * eps * peak(px) * peak(py);
    a.iter()
        .zip(px.iter().zip(py))
        .map(|(&c, (&p, &q))| (!guard(p, q, floor)).then(|| gamma_from(c, p, q)))
        .collect()
}

fn check_same_axis<T: Scalar>(a: &[T], b: &[T], what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Pairing(format!("{what}: time axes differ")));
    }
    Ok(())
}

/// Coherence expected from noise alone,
/// `E_sx E_sy / ((E_sx + E_nx)(E_sy + E_ny))`.
///
/// With equal envelopes this is `(E_s / (E_s + E_n))^2`. Points where a
/// denominator vanishes are undefined.
pub fn expected_coherence<T: Scalar>(
    env_x: &EnergyEnvelope<T>,
    env_y: &EnergyEnvelope<T>,
) -> Result<CoherenceCurve<T>> {
    check_same_axis(env_x.times(), env_y.times(), "expected coherence")?;
    if env_x.band() != env_y.band() {
        return Err(Error::Pairing("expected coherence: envelopes belong to different bands".into()));
    }
    let (nx, ny) = (env_x.noise_energy(), env_y.noise_energy());
    let gamma = env_x
        .signal_energy()
        .iter()
        .zip(env_y.signal_energy())
        .map(|(&sx, &sy)| {
            let den = (sx + nx) * (sy + ny);
            (den > T::zero()).then(|| ((sx * sy) / den).min(T::one()))
        })
        .collect();
    CoherenceCurve::new(
        env_x.times().to_vec(),
        gamma,
        env_x.band(),
        PairId::new(env_x.source(), env_y.source()),
    )
}

/// Environment coherence `measured / expected`, clamped to `[0, 1]`.
///
/// Undefined where either input is undefined or `expected < guard_epsilon`.
/// The result lumps together every change in the room (absorption,
/// scattering, occlusion); no attempt is made to separate them.
pub fn environment_coherence<T: Scalar>(
    measured: &CoherenceCurve<T>,
    expected: &CoherenceCurve<T>,
    config: &AnalysisConfig,
) -> Result<CoherenceCurve<T>> {
    check_same_axis(measured.times(), expected.times(), "environment coherence")?;
    if measured.band() != expected.band() {
        return Err(Error::Pairing("environment coherence: curves belong to different bands".into()));
    }
    let eps = T::of(config.guard_epsilon());
    let gamma = measured
        .gamma()
        .iter()
        .zip(expected.gamma())
        .map(|(m, e)| match (m, e) {
            (Some(m), Some(e)) if *e >= eps => Some((*m / *e).min(T::one()).max(T::zero())),
            _ => None,
        })
        .collect();
    CoherenceCurve::new(
        measured.times().to_vec(),
        gamma,
        measured.band(),
        measured.pair_id().clone(),
    )
}

/// Short-time coherence on an STFT grid.
///
/// For every bin the expectation is a centered average over `2L + 1` frames,
/// `L = config.tf_half_span(rate)`, shrinking at the edges. The guard is
/// relative to the peak averaged energies over the whole map.
pub fn tf_coherence<T: Scalar>(
    x: &StftGrid<T>,
    y: &StftGrid<T>,
    config: &AnalysisConfig,
) -> Result<TfCoherenceMap<T>> {
    if !x.same_layout(y) {
        return Err(Error::Pairing(format!(
            "STFT grids of '{}' and '{}' differ in parameters or shape",
            x.source(),
            y.source()
        )));
    }
    let width = 2 * config.tf_half_span(x.sample_rate()) + 1;
    let (nf, nb) = (x.n_frames(), x.n_bins());
    let mut cross = vec![Vec::new(); nb];
    let mut px = vec![Vec::new(); nb];
    let mut py = vec![Vec::new(); nb];
    for k in 0..nb {
        let c: Vec<Complex<T>> = (0..nf).map(|f| x.frames()[f][k] * y.frames()[f][k].conj()).collect();
        let p: Vec<T> = (0..nf).map(|f| x.frames()[f][k].norm_sqr()).collect();
        let q: Vec<T> = (0..nf).map(|f| y.frames()[f][k].norm_sqr()).collect();
        cross[k] = moving_average::<T, Complex<T>>(&c, width);
        px[k] = moving_average::<T, T>(&p, width);
        py[k] = moving_average::<T, T>(&q, width);
    }
    let peak_x = px.iter().map(|v| peak(v)).fold(T::zero(), T::max);
    let peak_y = py.iter().map(|v| peak(v)).fold(T::zero(), T::max);
    let eps = T::of(config.guard_epsilon());
    let floor = eps * eps * peak_x * peak_y;

    let gamma = (0..nf)
        .map(|f| {
            (0..nb)
                .map(|k| {
                    let (p, q) = (px[k][f], py[k][f]);
                    (!guard(p, q, floor)).then(|| gamma_from(cross[k][f], p, q))
                })
                .collect()
        })
        .collect();
    TfCoherenceMap::new(
        x.times().to_vec(),
        x.freqs().to_vec(),
        gamma,
        PairId::new(x.source(), y.source()),
    )
}

/// Pointwise median of several curves on a common axis.
///
/// Undefined points are ignored; a point is undefined only when more than
/// half of the inputs are undefined there. Even counts average the two
/// middle values.
pub fn median_coherence<T: Scalar>(curves: &[CoherenceCurve<T>]) -> Result<CoherenceCurve<T>> {
    let first = curves.first().ok_or(Error::Empty("median of zero coherence curves"))?;
    for c in &curves[1..] {
        check_same_axis(first.times(), c.times(), "median coherence")?;
        if c.band() != first.band() {
            return Err(Error::Pairing("median coherence: curves belong to different bands".into()));
        }
    }
    let n = curves.len();
    let mut values = Vec::with_capacity(n);
    let gamma = (0..first.len())
        .map(|i| {
            values.clear();
            values.extend(curves.iter().filter_map(|c| c.gamma()[i]));
            if 2 * (n - values.len()) > n {
                None
            } else {
                median(&values)
            }
        })
        .collect();
    let pair_id = if n == 1 {
        first.pair_id().clone()
    } else {
        PairId::new(first.pair_id().reference.clone(), format!("median-of-{n}"))
    };
    CoherenceCurve::new(first.times().to_vec(), gamma, first.band(), pair_id)
}
