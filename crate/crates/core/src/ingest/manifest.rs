//! Session manifests: which files make up a measurement session and how they
//! are paired.
//!
//! A manifest is a TOML file:
//!
//! ```toml
//! schema_version = 1
//! pairing = "reference-vs-rest"   # or "consecutive", "explicit"
//! base_dir = "audio"              # optional, relative to the manifest
//!
//! [analysis]                      # optional overrides of the defaults
//! window_ms = 10.0
//! snr_threshold_db = 30.0
//! stft_window = 512
//! stft_hop = 128
//! guard_epsilon = 1e-6
//! bands = "standard"              # see `parse_bands`
//!
//! [[entries]]
//! file = "room-a/001.wav"
//! channel = 0                     # default 0
//! condition_id = "a"
//! receiver_id = "mic1"            # default ""
//! source_id = "spk1"              # default ""
//! index = 1
//! id = "a-001"                    # default "<condition>[-<receiver>]-<index>"
//! noise_segment = { start = 2.7, end = 3.0 }
//! # or: noise = "tail" | "short-tail" | "truncated"
//!
//! [[pairs]]                       # explicit pairing only
//! reference = "a-001"
//! comparison = "a-002"
//!
//! [[absorption]]
//! condition_id = "a"
//! surface = "curtain"
//! alpha = 0.55
//! area = 12.0
//! ```
//!
//! Unknown keys are ignored and reported as warnings.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::{Spanned, Table, Value};

use crate::error::{Error, Result};
use crate::types::{AnalysisConfig, AnalysisConfigBuilder, Band, BandSpec, NoiseRegion, RirMeta};

pub const SCHEMA_VERSION: i64 = 1;

/// How measurements of one (condition, receiver) group are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingMode {
    /// The lowest-index measurement against every other one.
    ReferenceVsRest,
    /// Measurement `k` against `k + 1`.
    Consecutive,
    /// Pairs listed in the manifest.
    Explicit,
}

/// One recording channel of the session.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub id: String,
    /// Resolved against the manifest directory and `base_dir`.
    pub file: PathBuf,
    pub channel: usize,
    pub source_id: String,
    pub receiver_id: String,
    pub condition_id: String,
    pub index: u64,
    pub noise: NoiseRegion,
    /// 1-based line of the entry in the manifest.
    pub line: usize,
}

impl Entry {
    pub fn meta(&self) -> RirMeta {
        RirMeta {
            label: self.id.clone(),
            channel_id: self.channel.to_string(),
            source_id: self.source_id.clone(),
            receiver_id: self.receiver_id.clone(),
            condition_id: self.condition_id.clone(),
            noise: self.noise.clone(),
        }
    }
}

/// A listed pair, by entry id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitPair {
    pub reference: String,
    pub comparison: String,
    pub line: usize,
}

/// One absorbing surface of a condition.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionEntry {
    pub condition_id: String,
    pub surface: String,
    pub alpha: f64,
    pub area: f64,
}

impl AbsorptionEntry {
    pub fn new(condition_id: &str, surface: &str, alpha: f64, area: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::validation("absorption", format!("alpha {alpha} outside [0, 1]")));
        }
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::validation("absorption", format!("area {area} must be positive")));
        }
        Ok(AbsorptionEntry {
            condition_id: condition_id.to_string(),
            surface: surface.to_string(),
            alpha,
            area,
        })
    }
}

/// Analysis settings a manifest may override; unset fields fall through.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
pub struct AnalysisOverrides {
    pub window_ms: Option<f64>,
    pub snr_threshold_db: Option<f64>,
    pub stft_window: Option<usize>,
    pub stft_hop: Option<usize>,
    pub guard_epsilon: Option<f64>,
    pub tf_half_span: Option<usize>,
    pub bands: Option<String>,
}

impl AnalysisOverrides {
    /// Applies the set fields on top of `builder`.
    pub fn apply(&self, mut builder: AnalysisConfigBuilder) -> AnalysisConfigBuilder {
        if let Some(v) = self.window_ms {
            builder = builder.avg_window(v / 1000.0);
        }
        if let Some(v) = self.snr_threshold_db {
            builder = builder.snr_threshold_db(v);
        }
        if let Some(v) = self.stft_window {
            builder = builder.stft_window_len(v);
        }
        if let Some(v) = self.stft_hop {
            builder = builder.stft_hop(v);
        }
        if let Some(v) = self.guard_epsilon {
            builder = builder.guard_epsilon(v);
        }
        if let Some(v) = self.tf_half_span {
            builder = builder.tf_half_span(v);
        }
        builder
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(&self, over: &AnalysisOverrides) -> AnalysisOverrides {
        AnalysisOverrides {
            window_ms: over.window_ms.or(self.window_ms),
            snr_threshold_db: over.snr_threshold_db.or(self.snr_threshold_db),
            stft_window: over.stft_window.or(self.stft_window),
            stft_hop: over.stft_hop.or(self.stft_hop),
            guard_epsilon: over.guard_epsilon.or(self.guard_epsilon),
            tf_half_span: over.tf_half_span.or(self.tf_half_span),
            bands: over.bands.clone().or_else(|| self.bands.clone()),
        }
    }

    pub fn config(&self) -> Result<AnalysisConfig> {
        self.apply(AnalysisConfig::builder()).build()
    }
}

/// Parses a band list: comma-separated `standard` (the 19 bands from 1 to
/// 19 kHz), `broadband`, `CENTER` (1 kHz wide) or `CENTER:BANDWIDTH`, in Hz.
pub fn parse_bands(spec: &str) -> Result<Vec<Band>> {
    let mut bands = Vec::new();
    for token in spec.split(',').map(str::trim) {
        match token {
            "" => {}
            "standard" => bands.extend(BandSpec::standard_sweep().into_iter().map(Band::Narrow)),
            "broadband" => bands.push(Band::Broadband),
            _ => {
                let (center, width) = token.split_once(':').unwrap_or((token, "1000"));
                let num = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad band '{token}'")))
                };
                bands.push(Band::Narrow(BandSpec::new(num(center)?, num(width)?)?));
            }
        }
    }
    if bands.is_empty() {
        return Err(Error::Config(format!("no bands in '{spec}'")));
    }
    Ok(bands)
}

#[derive(Deserialize)]
struct RawManifest {
    schema_version: Option<i64>,
    pairing: Option<PairingMode>,
    base_dir: Option<PathBuf>,
    #[serde(default)]
    analysis: AnalysisOverrides,
    #[serde(default)]
    entries: Vec<Spanned<RawEntry>>,
    #[serde(default)]
    pairs: Vec<Spanned<RawPair>>,
    #[serde(default)]
    absorption: Vec<Spanned<RawAbsorption>>,
}

#[derive(Deserialize)]
struct RawEntry {
    file: PathBuf,
    #[serde(default)]
    channel: usize,
    #[serde(default)]
    source_id: String,
    #[serde(default)]
    receiver_id: String,
    condition_id: String,
    index: u64,
    id: Option<String>,
    noise_segment: Option<RawSegment>,
    noise: Option<String>,
}

#[derive(Deserialize)]
struct RawSegment {
    start: f64,
    end: f64,
}

#[derive(Deserialize)]
struct RawPair {
    reference: String,
    comparison: String,
}

#[derive(Deserialize)]
struct RawAbsorption {
    condition_id: String,
    #[serde(default)]
    surface: String,
    alpha: f64,
    area: f64,
}

const TOP_KEYS: &[&str] = &["schema_version", "pairing", "base_dir", "analysis", "entries", "pairs", "absorption"];
const ENTRY_KEYS: &[&str] = &[
    "file",
    "channel",
    "source_id",
    "receiver_id",
    "condition_id",
    "index",
    "id",
    "noise_segment",
    "noise",
];
const PAIR_KEYS: &[&str] = &["reference", "comparison"];
const ABSORPTION_KEYS: &[&str] = &["condition_id", "surface", "alpha", "area"];
const ANALYSIS_KEYS: &[&str] = &[
    "window_ms",
    "snr_threshold_db",
    "stft_window",
    "stft_hop",
    "guard_epsilon",
    "tf_half_span",
    "bands",
];

/// A validated session manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionManifest {
    pub path: PathBuf,
    pub pairing: PairingMode,
    pub analysis: AnalysisOverrides,
    pub entries: Vec<Entry>,
    pub pairs: Vec<ExplicitPair>,
    pub absorption: Vec<AbsorptionEntry>,
    /// Ignored keys and other non-fatal findings.
    pub warnings: Vec<String>,
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

fn unknown_keys(table: &Table, known: &[&str], context: &str, warnings: &mut Vec<String>) {
    for key in table.keys() {
        if !known.contains(&key.as_str()) {
            warnings.push(format!("{context}: unknown field '{key}' ignored"));
        }
    }
}

fn unknown_in_array(root: &Table, name: &str, known: &[&str], warnings: &mut Vec<String>) {
    if let Some(Value::Array(items)) = root.get(name) {
        for (i, item) in items.iter().enumerate() {
            if let Value::Table(t) = item {
                unknown_keys(t, known, &format!("{name}[{i}]"), warnings);
            }
        }
    }
}

impl SessionManifest {
    /// Reads a manifest and checks that every referenced file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let manifest = Self::parse(&text, path)?;
        for e in &manifest.entries {
            if !e.file.is_file() {
                return Err(manifest.error(
                    e.line,
                    format!("entry '{}': file not found: {}", e.id, e.file.display()),
                ));
            }
        }
        Ok(manifest)
    }

    /// Parses manifest text; relative file paths resolve against the
    /// directory of `path`. Files are not touched.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: Option<usize>, reason: String| Error::Manifest {
            path: path.to_path_buf(),
            reason: match line {
                Some(l) => format!("line {l}: {reason}"),
                None => reason,
            },
        };
        let root: Table = toml::from_str(text).map_err(|e| err(None, e.to_string()))?;
        let mut warnings = Vec::new();
        unknown_keys(&root, TOP_KEYS, "manifest", &mut warnings);
        unknown_in_array(&root, "entries", ENTRY_KEYS, &mut warnings);
        unknown_in_array(&root, "pairs", PAIR_KEYS, &mut warnings);
        unknown_in_array(&root, "absorption", ABSORPTION_KEYS, &mut warnings);
        if let Some(Value::Table(t)) = root.get("analysis") {
            unknown_keys(t, ANALYSIS_KEYS, "analysis", &mut warnings);
        }
        let raw: RawManifest = toml::from_str(text).map_err(|e| err(None, e.to_string()))?;

        match raw.schema_version {
            Some(SCHEMA_VERSION) => {}
            Some(v) => return Err(err(None, format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"))),
            None => return Err(err(None, "missing schema_version".into())),
        }
        let pairing = raw.pairing.ok_or_else(|| err(None, "missing pairing".into()))?;
        raw.analysis.config().map_err(|e| err(None, format!("[analysis]: {e}")))?;
        if let Some(b) = &raw.analysis.bands {
            parse_bands(b).map_err(|e| err(None, format!("[analysis]: {e}")))?;
        }

        let dir = path.parent().unwrap_or(Path::new(""));
        let base = match &raw.base_dir {
            Some(b) => dir.join(b),
            None => dir.to_path_buf(),
        };
        if raw.entries.is_empty() {
            return Err(err(None, "no entries".into()));
        }
        let mut entries = Vec::with_capacity(raw.entries.len());
        let mut ids = HashSet::new();
        let mut slots = HashSet::new();
        for spanned in raw.entries {
            let line = line_of(text, spanned.span());
            let e = spanned.into_inner();
            let at = |reason: String| err(Some(line), reason);
            if e.condition_id.is_empty() {
                return Err(at("empty condition_id".into()));
            }
            let noise = match (e.noise_segment, e.noise.as_deref()) {
                (Some(_), Some(_)) => return Err(at("both noise and noise_segment given".into())),
                (Some(s), None) => {
                    if !(s.start.is_finite() && s.end.is_finite() && s.start >= 0.0 && s.start < s.end) {
                        return Err(at(format!("bad noise_segment [{}, {})", s.start, s.end)));
                    }
                    NoiseRegion::Segment {
                        start: s.start,
                        end: s.end,
                    }
                }
                (None, None | Some("tail")) => NoiseRegion::Tail,
                (None, Some("short-tail")) => NoiseRegion::ShortTail,
                (None, Some("truncated")) => NoiseRegion::Truncated,
                (None, Some(other)) => {
                    return Err(at(format!(
                        "unknown noise '{other}', expected tail, short-tail or truncated"
                    )))
                }
            };
            let id = e.id.unwrap_or_else(|| {
                if e.receiver_id.is_empty() {
                    format!("{}-{}", e.condition_id, e.index)
                } else {
                    format!("{}-{}-{}", e.condition_id, e.receiver_id, e.index)
                }
            });
            if !ids.insert(id.clone()) {
                return Err(at(format!("duplicate entry id '{id}'")));
            }
            if !slots.insert((e.condition_id.clone(), e.receiver_id.clone(), e.index)) {
                return Err(at(format!(
                    "measurement index {} repeated for condition '{}', receiver '{}'",
                    e.index, e.condition_id, e.receiver_id
                )));
            }
            entries.push(Entry {
                id,
                file: base.join(&e.file),
                channel: e.channel,
                source_id: e.source_id,
                receiver_id: e.receiver_id,
                condition_id: e.condition_id,
                index: e.index,
                noise,
                line,
            });
        }

        let mut pairs = Vec::with_capacity(raw.pairs.len());
        for spanned in raw.pairs {
            let line = line_of(text, spanned.span());
            let p = spanned.into_inner();
            for id in [&p.reference, &p.comparison] {
                if !ids.contains(id) {
                    return Err(err(Some(line), format!("pair names unknown entry '{id}'")));
                }
            }
            pairs.push(ExplicitPair {
                reference: p.reference,
                comparison: p.comparison,
                line,
            });
        }
        match pairing {
            PairingMode::Explicit if pairs.is_empty() => {
                return Err(err(None, "explicit pairing requires [[pairs]]".into()));
            }
            PairingMode::ReferenceVsRest | PairingMode::Consecutive if !pairs.is_empty() => {
                warnings.push("[[pairs]] ignored: pairing is not explicit".into());
            }
            _ => {}
        }

        let mut absorption = Vec::with_capacity(raw.absorption.len());
        for spanned in raw.absorption {
            let line = line_of(text, spanned.span());
            let a = spanned.into_inner();
            absorption.push(
                AbsorptionEntry::new(&a.condition_id, &a.surface, a.alpha, a.area)
                    .map_err(|e| err(Some(line), e.to_string()))?,
            );
        }

        Ok(SessionManifest {
            path: path.to_path_buf(),
            pairing,
            analysis: raw.analysis,
            entries,
            pairs,
            absorption,
            warnings,
        })
    }

    /// Manifest error attributed to a line.
    pub fn error(&self, line: usize, reason: impl Into<String>) -> Error {
        Error::Manifest {
            path: self.path.clone(),
            reason: format!("line {line}: {}", reason.into()),
        }
    }

    pub fn entry(&self, id: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Condition ids in sorted order.
    pub fn conditions(&self) -> Vec<&str> {
        let set: BTreeSet<&str> = self.entries.iter().map(|e| e.condition_id.as_str()).collect();
        set.into_iter().collect()
    }

    /// Equivalent absorption area of every condition with absorption entries.
    pub fn absorption_areas(&self) -> BTreeMap<String, f64> {
        let mut by_condition: BTreeMap<String, Vec<AbsorptionEntry>> = BTreeMap::new();
        for a in &self.absorption {
            by_condition.entry(a.condition_id.clone()).or_default().push(a.clone());
        }
        by_condition
            .into_iter()
            .map(|(c, list)| (c, super::equivalent_absorption_area(&list)))
            .collect()
    }
}
