//! Minimal RIFF/WAVE reader and writer.
//!
//! Reads PCM 16/24/32-bit integer and IEEE 32/64-bit float data, plain or
//! `WAVE_FORMAT_EXTENSIBLE`, with any channel count. Integer samples are
//! divided by `2^(bits-1)`, so full-scale negative maps to exactly `-1`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{Rir, RirMeta};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Sample encoding of a WAV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Int16,
    Int24,
    Int32,
    Float32,
    Float64,
}

impl SampleFormat {
    pub fn bits(self) -> u16 {
        match self {
            SampleFormat::Int16 => 16,
            SampleFormat::Int24 => 24,
            SampleFormat::Int32 | SampleFormat::Float32 => 32,
            SampleFormat::Float64 => 64,
        }
    }

    fn bytes(self) -> usize {
        self.bits() as usize / 8
    }

    fn is_float(self) -> bool {
        matches!(self, SampleFormat::Float32 | SampleFormat::Float64)
    }

    fn from_header(tag: u16, bits: u16) -> Option<Self> {
        match (tag, bits) {
            (FORMAT_PCM, 16) => Some(SampleFormat::Int16),
            (FORMAT_PCM, 24) => Some(SampleFormat::Int24),
            (FORMAT_PCM, 32) => Some(SampleFormat::Int32),
            (FORMAT_FLOAT, 32) => Some(SampleFormat::Float32),
            (FORMAT_FLOAT, 64) => Some(SampleFormat::Float64),
            _ => None,
        }
    }
}

/// Decoded contents of a WAV file, one vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WavData {
    pub sample_rate: u32,
    pub format: SampleFormat,
    pub channels: Vec<Vec<f64>>,
}

impl WavData {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_frames(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }
}

fn wav_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Wav {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

/// Reads every channel of a WAV file.
pub fn read_wav(path: &Path) -> Result<WavData> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|reason| wav_err(path, reason))
}

/// Decodes an in-memory WAV file.
pub fn decode(bytes: &[u8]) -> std::result::Result<WavData, String> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err("not a RIFF/WAVE file".into());
    }
    let mut fmt: Option<(SampleFormat, u16, u32)> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).ok_or("chunk size overflow")?;
        if body_end > bytes.len() {
            return Err(format!(
                "truncated file: chunk '{}' declares {size} bytes, {} available",
                String::from_utf8_lossy(id),
                bytes.len() - body_start
            ));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        pos = body_end + (size & 1);
    }
    let (format, n_channels, sample_rate) = fmt.ok_or("missing 'fmt ' chunk")?;
    let data = data.ok_or("missing 'data' chunk")?;
    let frame_bytes = format.bytes() * n_channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(format!(
            "truncated file: data chunk of {} bytes is not a whole number of {frame_bytes}-byte frames",
            data.len()
        ));
    }
    let n_frames = data.len() / frame_bytes;
    let mut channels = vec![Vec::with_capacity(n_frames); n_channels as usize];
    for frame in data.chunks_exact(frame_bytes) {
        for (c, raw) in frame.chunks_exact(format.bytes()).enumerate() {
            channels[c].push(decode_sample(format, raw));
        }
    }
    Ok(WavData {
        sample_rate,
        format,
        channels,
    })
}

fn parse_fmt(body: &[u8]) -> std::result::Result<(SampleFormat, u16, u32), String> {
    if body.len() < 16 {
        return Err("'fmt ' chunk too short".into());
    }
    let mut tag = u16_at(body, 0);
    let n_channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        if body.len() < 40 {
            return Err("extensible 'fmt ' chunk too short".into());
        }
        let valid_bits = u16_at(body, 18);
        if valid_bits != 0 && valid_bits != bits {
            return Err(format!("unsupported codec: {valid_bits} valid bits in {bits}-bit containers"));
        }
        tag = u16_at(body, 24);
    }
    let format = SampleFormat::from_header(tag, bits)
        .ok_or_else(|| format!("unsupported codec: format tag {tag:#06x} with {bits} bits per sample"))?;
    if n_channels == 0 {
        return Err("zero channels".into());
    }
    if sample_rate == 0 {
        return Err("zero sample rate".into());
    }
    if block_align as usize != format.bytes() * n_channels as usize {
        return Err(format!("inconsistent block alignment {block_align}"));
    }
    Ok((format, n_channels, sample_rate))
}

fn decode_sample(format: SampleFormat, b: &[u8]) -> f64 {
    match format {
        SampleFormat::Int16 => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        SampleFormat::Int24 => {
            let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
            v as f64 / 8_388_608.0
        }
        SampleFormat::Int32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0,
        SampleFormat::Float32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        SampleFormat::Float64 => f64::from_le_bytes(b.try_into().expect("8-byte sample")),
    }
}

/// Loads one channel of a WAV file as a [`Rir`], labeled with the file stem.
pub fn load_wav<T: Scalar>(path: &Path, channel: usize) -> Result<Rir<T>> {
    let data = read_wav(path)?;
    if channel >= data.n_channels() {
        return Err(wav_err(
            path,
            format!("bad channel {channel}: file has {} channel(s)", data.n_channels()),
        ));
    }
    let samples = data.channels.into_iter().nth(channel).expect("checked channel");
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let meta = RirMeta {
        channel_id: channel.to_string(),
        ..RirMeta::labeled(stem)
    };
    Rir::new(data.sample_rate, samples.into_iter().map(T::of).collect(), meta)
        .map_err(|e| wav_err(path, e.to_string()))
}

/// Encodes channels of equal length as a WAV file.
///
/// Integer formats round and saturate to the representable range; float
/// formats store the values as given (`Float32` rounds to single precision).
pub fn encode<T: Scalar>(sample_rate: u32, format: SampleFormat, channels: &[&[T]]) -> Result<Vec<u8>> {
    let n_channels = channels.len();
    if n_channels == 0 || n_channels > u16::MAX as usize {
        return Err(Error::validation("wav channels", format!("{n_channels} channels")));
    }
    let n_frames = channels[0].len();
    if channels.iter().any(|c| c.len() != n_frames) {
        return Err(Error::validation("wav channels", "channels differ in length"));
    }
    if sample_rate == 0 {
        return Err(Error::validation("wav sample rate", "must be positive"));
    }
    let block_align = format.bytes() * n_channels;
    let data_len = block_align * n_frames;
    if data_len + 36 > u32::MAX as usize {
        return Err(Error::validation("wav size", "exceeds the 4 GiB RIFF limit"));
    }
    let tag = if format.is_float() { FORMAT_FLOAT } else { FORMAT_PCM };
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&(n_channels as u16).to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&((sample_rate as usize * block_align) as u32).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&format.bits().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for i in 0..n_frames {
        for c in channels {
            encode_sample(format, c[i].to_f64_lossy(), &mut out);
        }
    }
    Ok(out)
}

fn quantize(v: f64, bits: u32) -> i64 {
    let full = (1i64 << (bits - 1)) as f64;
    (v * full).round().clamp(-full, full - 1.0) as i64
}

fn encode_sample(format: SampleFormat, v: f64, out: &mut Vec<u8>) {
    match format {
        SampleFormat::Int16 => out.extend_from_slice(&(quantize(v, 16) as i16).to_le_bytes()),
        SampleFormat::Int24 => out.extend_from_slice(&(quantize(v, 24) as i32).to_le_bytes()[..3]),
        SampleFormat::Int32 => out.extend_from_slice(&(quantize(v, 32) as i32).to_le_bytes()),
        SampleFormat::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
        SampleFormat::Float64 => out.extend_from_slice(&v.to_le_bytes()),
    }
}

/// Writes channels of equal length to a WAV file.
pub fn write_wav<T: Scalar>(path: &Path, sample_rate: u32, format: SampleFormat, channels: &[&[T]]) -> Result<()> {
    let bytes = encode(sample_rate, format, channels)?;
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
