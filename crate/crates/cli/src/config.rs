//! Effective configuration: flags over manifest over defaults.

use rircoh::ingest::{parse_bands, AnalysisOverrides};
use rircoh::{AnalysisConfig, Band};
use serde::Serialize;

use crate::args::CommonArgs;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct Setting<T> {
    pub value: T,
    /// `flag`, `manifest` or `default`.
    pub source: &'static str,
}

/// Every analysis setting with where its value came from.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub window_ms: Setting<f64>,
    pub snr_threshold_db: Setting<f64>,
    pub stft_window: Setting<usize>,
    pub stft_hop: Setting<usize>,
    pub guard_epsilon: Setting<f64>,
    pub tf_half_span: Setting<Option<usize>>,
    pub bands: Setting<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

pub struct Effective {
    pub analysis: AnalysisConfig,
    pub bands: Vec<Band>,
    pub echo: ConfigEcho,
}

fn source<T>(flag: &Option<T>, manifest: &Option<T>) -> &'static str {
    if flag.is_some() {
        "flag"
    } else if manifest.is_some() {
        "manifest"
    } else {
        "default"
    }
}

pub fn resolve(common: &CommonArgs, manifest: Option<&AnalysisOverrides>, default_bands: &str) -> CliResult<Effective> {
    let flags = AnalysisOverrides {
        window_ms: common.window_ms,
        snr_threshold_db: common.snr_threshold_db,
        stft_window: common.stft_window,
        stft_hop: common.stft_hop,
        guard_epsilon: None,
        tf_half_span: None,
        bands: common.bands.clone(),
    };
    let from_manifest = manifest.cloned().unwrap_or_default();
    let merged = from_manifest.merged(&flags);
    let analysis = merged
        .config()
        .map_err(|e| CliError::Usage(format!("invalid analysis settings: {e}")))?;
    let band_spec = merged.bands.clone().unwrap_or_else(|| default_bands.to_string());
    let bands = parse_bands(&band_spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let m = &from_manifest;
    let echo = ConfigEcho {
        window_ms: Setting {
            value: analysis.avg_window() * 1000.0,
            source: source(&flags.window_ms, &m.window_ms),
        },
        snr_threshold_db: Setting {
            value: analysis.snr_threshold_db(),
            source: source(&flags.snr_threshold_db, &m.snr_threshold_db),
        },
        stft_window: Setting {
            value: analysis.stft_window_len(),
            source: source(&flags.stft_window, &m.stft_window),
        },
        stft_hop: Setting {
            value: analysis.stft_hop(),
            source: source(&flags.stft_hop, &m.stft_hop),
        },
        guard_epsilon: Setting {
            value: analysis.guard_epsilon(),
            source: source(&flags.guard_epsilon, &m.guard_epsilon),
        },
        tf_half_span: Setting {
            value: m.tf_half_span,
            source: source(&flags.tf_half_span, &m.tf_half_span),
        },
        bands: Setting {
            value: band_spec,
            source: source(&flags.bands, &m.bands),
        },
        seed: common.seed,
        jobs: common.jobs,
    };
    Ok(Effective { analysis, bands, echo })
}
