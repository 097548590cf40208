use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rircoh", version, about = "Short-time coherence and sensitivity of repeated room impulse responses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags shared by every subcommand. Analysis flags override the manifest's
/// `[analysis]` table, which overrides the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Session manifest (TOML)
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Directory for CSV, WAV and report outputs
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Short-time averaging window in milliseconds
    #[arg(long, global = true)]
    pub window_ms: Option<f64>,
    /// SNR threshold of the rating truncation, dB
    #[arg(long, global = true)]
    pub snr_threshold_db: Option<f64>,
    /// Bands: comma-separated `standard`, `broadband`, `CENTER` or `CENTER:WIDTH` (Hz)
    #[arg(long, global = true)]
    pub bands: Option<String>,
    /// STFT window length in samples
    #[arg(long, global = true)]
    pub stft_window: Option<usize>,
    /// STFT hop in samples
    #[arg(long, global = true)]
    pub stft_hop: Option<usize>,
    /// Seed of the synthetic generators
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measured, expected and environment coherence curves per pair
    Coherence,
    /// Sensitivity rating per pair and band, plus per-condition medians
    Sensitivity,
    /// Time-frequency coherence map and per-bin rating of one pair
    Tfmap(TfmapArgs),
    /// Write a synthetic pair (WAV + manifest + truth record)
    Synth(SynthArgs),
    /// Per-pair ratings as a single JSON report
    Report,
}

#[derive(Debug, Args)]
pub struct TfmapArgs {
    /// Entry id of the reference recording
    #[arg(long, requires = "comparison")]
    pub reference: Option<String>,
    /// Entry id of the comparison recording
    #[arg(long, requires = "reference")]
    pub comparison: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WavFormat {
    F64,
    F32,
    Pcm16,
    Pcm24,
    Pcm32,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator: decay, mixing, occlusion, absorption or jitter
    pub generator: String,
    /// Reverberation time of the reference response, s
    #[arg(long, default_value_t = 1.0)]
    pub rt: f64,
    /// Reverberation time after the change (absorption)
    #[arg(long)]
    pub rt_y: Option<f64>,
    /// Mixing coefficient (mixing)
    #[arg(long, default_value_t = 0.7)]
    pub a: f64,
    /// Time the late field changes, s (absorption)
    #[arg(long, default_value_t = 0.020)]
    pub change_time: f64,
    /// Fraction of the late field that changes (absorption)
    #[arg(long, default_value_t = 1.0)]
    pub changed_fraction: f64,
    /// Fractional time stretch (jitter)
    #[arg(long, default_value_t = 1e-4)]
    pub drift: f64,
    /// Start of the occluded window, s (occlusion)
    #[arg(long)]
    pub occlusion_start: Option<f64>,
    /// Length of the occluded window, s (occlusion)
    #[arg(long)]
    pub occlusion_length: Option<f64>,
    /// Attenuation of the occluded window, dB (occlusion)
    #[arg(long)]
    pub attenuation_db: Option<f64>,
    /// Phase-noise variance at Nyquist after the window (occlusion)
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Relative energy of a specular arrival at the window start (occlusion)
    #[arg(long)]
    pub specular_gain: Option<f64>,
    /// Measurement SNR, dB
    #[arg(long, default_value_t = 60.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 48000)]
    pub sample_rate: u32,
    /// Recording length, s (default max(1, 1.5 rt))
    #[arg(long)]
    pub duration: Option<f64>,
    /// Number of pairs, with consecutive seeds
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Condition id written to the manifest (default: the generator name)
    #[arg(long)]
    pub condition: Option<String>,
    #[arg(long, value_enum, default_value_t = WavFormat::F64)]
    pub format: WavFormat,
}
