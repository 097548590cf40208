//! Loading recordings and session manifests, and forming analysis pairs.
//!
//! Amplitude normalization is never applied: coherence and the sensitivity
//! rating are invariant to per-recording gain.

pub mod manifest;
pub mod pairs;
pub mod wav;

pub use manifest::{parse_bands, AbsorptionEntry, AnalysisOverrides, Entry, PairingMode, SessionManifest};
pub use pairs::{build_pairs, load_entry, load_plan, PairPlan, PlannedPair};
pub use wav::{load_wav, read_wav, write_wav, SampleFormat, WavData};

/// Equivalent absorption area `A = sum(alpha_i * S_i)` in square metres.
pub fn equivalent_absorption_area(entries: &[AbsorptionEntry]) -> f64 {
    entries.iter().map(|e| e.alpha * e.area).sum()
}
