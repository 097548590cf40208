use std::fmt::Write as _;
use std::fs;

use rircoh::ingest::{write_wav, SampleFormat};
use rircoh::synth::{generate, GeneratorParams, Occlusion, SynthConfig, Truth, GENERATORS};
use rircoh::{NoiseRegion, SyntheticPair};
use serde::Serialize;

use crate::args::{CommonArgs, SynthArgs, WavFormat};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, RunReport};

#[derive(Serialize)]
struct TruthRecord<'a> {
    pair_id: String,
    reference_file: String,
    comparison_file: String,
    #[serde(flatten)]
    truth: &'a Truth,
}

fn sample_format(f: WavFormat) -> SampleFormat {
    match f {
        WavFormat::F64 => SampleFormat::Float64,
        WavFormat::F32 => SampleFormat::Float32,
        WavFormat::Pcm16 => SampleFormat::Int16,
        WavFormat::Pcm24 => SampleFormat::Int24,
        WavFormat::Pcm32 => SampleFormat::Int32,
    }
}

fn params(args: &SynthArgs) -> GeneratorParams {
    let d = Occlusion::default();
    GeneratorParams {
        rt: args.rt,
        rt_y: args.rt_y,
        a: args.a,
        change_time: args.change_time,
        changed_fraction: args.changed_fraction,
        drift: args.drift,
        occlusion: Occlusion {
            start: args.occlusion_start.unwrap_or(d.start),
            length: args.occlusion_length.unwrap_or(d.length),
            attenuation_db: args.attenuation_db.unwrap_or(d.attenuation_db),
            kappa: args.kappa.unwrap_or(d.kappa),
            specular_gain: args.specular_gain.unwrap_or(d.specular_gain),
        },
    }
}

/// TOML basic string with quotes and backslashes escaped.
fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn run(common: &CommonArgs, args: &SynthArgs) -> CliResult<()> {
    if !GENERATORS.contains(&args.generator.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown generator '{}'; available generators: {}",
            args.generator,
            GENERATORS.join(", ")
        )));
    }
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let mut report = RunReport::new("synth", None);
    let params = params(args);
    let condition = args.condition.clone().unwrap_or_else(|| args.generator.clone());
    let first_seed = common.seed.unwrap_or(0);
    let base = SynthConfig {
        sample_rate: args.sample_rate,
        duration: args.duration,
        snr_db: args.snr,
        seed: first_seed,
    };
    ensure_dir(&common.out_dir)?;

    let mut manifest = String::from("schema_version = 1\npairing = \"reference-vs-rest\"\n");
    let mut pairs: Vec<(String, String, String, SyntheticPair)> = Vec::new();
    for seed in first_seed..first_seed + args.count {
        let pair: SyntheticPair = generate(&args.generator, &params, &base.with_seed(seed))
            .map_err(|e| CliError::Usage(format!("invalid generator parameters: {e}")))?;
        let stem = format!("{}-{seed}", crate::output::file_safe(&condition));
        let mut ids = Vec::new();
        for (k, (role, rir)) in [("x", pair.x()), ("y", pair.y())].into_iter().enumerate() {
            let id = format!("{stem}-{role}");
            let file = format!("{id}.wav");
            let path = common.out_dir.join(&file);
            write_wav(&path, rir.sample_rate(), sample_format(args.format), &[rir.samples()])?;
            report.output(&path);
            let _ = write!(
                manifest,
                "\n[[entries]]\nid = {}\nfile = {}\ncondition_id = {}\nreceiver_id = {}\nindex = {}\n",
                quoted(&id),
                quoted(&file),
                quoted(&condition),
                quoted(&format!("seed{seed}")),
                k + 1
            );
            if rir.meta().noise == NoiseRegion::ShortTail {
                manifest.push_str("noise = \"short-tail\"\n");
            }
            ids.push((id, file));
        }
        let (y, x) = (ids.pop().expect("two ids"), ids.pop().expect("two ids"));
        pairs.push((format!("{}~{}", x.0, y.0), x.1, y.1, pair));
    }

    let manifest_path = common.out_dir.join("manifest.toml");
    fs::write(&manifest_path, manifest).map_err(|e| CliError::Input(format!("{}: {e}", manifest_path.display())))?;
    report.output(&manifest_path);

    let records: Vec<TruthRecord> = pairs
        .iter()
        .map(|(pair_id, x, y, p)| TruthRecord {
            pair_id: pair_id.clone(),
            reference_file: x.clone(),
            comparison_file: y.clone(),
            truth: p.truth(),
        })
        .collect();
    let truth_path = common.out_dir.join("truth.json");
    let text = serde_json::to_string_pretty(&records).expect("truth serializes") + "\n";
    fs::write(&truth_path, text).map_err(|e| CliError::Input(format!("{}: {e}", truth_path.display())))?;
    report.output(&truth_path);
    report.write(&common.out_dir)
}
