pub mod coherence;
pub mod report;
pub mod sensitivity;
pub mod synth;
pub mod tfmap;
