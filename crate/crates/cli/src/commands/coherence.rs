use std::collections::BTreeMap;

use rayon::prelude::*;
use rircoh::coherence::median_coherence;
use rircoh::sensitivity::{analyze_band, PairAnalysis};
use rircoh::{Band, CoherenceCurve};

use crate::args::CommonArgs;
use crate::config::resolve;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, file_safe, opt, CsvOut, RunReport};
use crate::session::Session;

const HEADER: [&str; 5] = ["time_s", "gamma", "gamma_expected", "gamma_ir", "defined_flag"];

fn write_curves(
    path: std::path::PathBuf,
    measured: &CoherenceCurve,
    expected: &CoherenceCurve,
    environment: &CoherenceCurve,
) -> CliResult<std::path::PathBuf> {
    let mut csv = CsvOut::create(path, &HEADER)?;
    for (k, &t) in measured.times().iter().enumerate() {
        let (g, e, i) = (measured.gamma()[k], expected.gamma()[k], environment.gamma()[k]);
        let defined = g.is_some() && e.is_some() && i.is_some();
        csv.row([opt(Some(t)), opt(g), opt(e), opt(i), (defined as u8).to_string()])?;
    }
    csv.finish()
}

fn suffix(band: &Band) -> String {
    match band {
        Band::Broadband => String::new(),
        b => format!("_{}Hz", b.center_label()),
    }
}

pub fn run(common: &CommonArgs) -> CliResult<()> {
    let mut report = RunReport::new("coherence", common.manifest.as_deref());
    let session = Session::open(common.manifest.as_deref(), &mut report)?;
    let eff = resolve(common, Some(&session.manifest.analysis), "broadband")?;
    report.config = Some(eff.echo.clone());
    ensure_dir(&common.out_dir)?;

    let order = session.ordered();
    let results: Vec<Vec<rircoh::Result<PairAnalysis<f64>>>> = order
        .par_iter()
        .map(|&i| {
            let p = session.pair(i);
            eff.bands.iter().map(|&b| analyze_band(p.x, p.y, b, &eff.analysis)).collect()
        })
        .collect();

    let mut failures = 0;
    let mut by_condition: BTreeMap<(String, String), Vec<&PairAnalysis<f64>>> = BTreeMap::new();
    for (&i, per_band) in order.iter().zip(&results) {
        let p = session.pair(i);
        for (band, outcome) in eff.bands.iter().zip(per_band) {
            match outcome {
                Ok(a) => {
                    let name = format!("coherence_{}{}.csv", file_safe(&p.id.to_string()), suffix(band));
                    let path = write_curves(common.out_dir.join(name), &a.measured, &a.expected, &a.environment)?;
                    report.output(&path);
                    by_condition
                        .entry((p.condition.to_string(), suffix(band)))
                        .or_default()
                        .push(a);
                }
                Err(e) => {
                    failures += 1;
                    report.warn(format!("pair {} band {band}: {e}", p.id));
                }
            }
        }
    }

    for ((condition, suffix), analyses) in &by_condition {
        if analyses.len() < 2 {
            continue;
        }
        let median = |pick: fn(&PairAnalysis<f64>) -> &CoherenceCurve| {
            let curves: Vec<CoherenceCurve> = analyses.iter().map(|a| pick(a).clone()).collect();
            median_coherence(&curves)
        };
        match (
            median(|a| &a.measured),
            median(|a| &a.expected),
            median(|a| &a.environment),
        ) {
            (Ok(m), Ok(e), Ok(i)) => {
                let name = format!("coherence_median_{}{suffix}.csv", file_safe(condition));
                let path = write_curves(common.out_dir.join(name), &m, &e, &i)?;
                report.output(&path);
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                report.warn(format!("condition {condition}: no median curve: {e}"));
            }
        }
    }

    let total = results.iter().map(Vec::len).sum::<usize>();
    report.write(&common.out_dir)?;
    if total == 0 {
        return Err(CliError::Input("the manifest yields no pairs".into()));
    }
    if failures > 0 {
        return Err(CliError::Analysis(format!("{failures} of {total} pair analyses failed")));
    }
    Ok(())
}
