use rircoh::sensitivity::analyze_tf;

use crate::args::{CommonArgs, TfmapArgs};
use crate::config::resolve;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, num, opt, status_of, CsvOut, RunReport};
use crate::session::Session;

pub fn run(common: &CommonArgs, args: &TfmapArgs) -> CliResult<()> {
    let mut report = RunReport::new("tfmap", common.manifest.as_deref());
    let session = Session::open(common.manifest.as_deref(), &mut report)?;
    let eff = resolve(common, Some(&session.manifest.analysis), "broadband")?;
    report.config = Some(eff.echo.clone());

    let index = match (&args.reference, &args.comparison) {
        (Some(r), Some(c)) => (0..session.len())
            .find(|&i| {
                let id = session.pair(i).id;
                &id.reference == r && &id.comparison == c
            })
            .ok_or_else(|| CliError::Input(format!("the manifest has no pair {r}~{c}")))?,
        _ if session.len() == 1 => 0,
        _ => {
            return Err(CliError::Usage(format!(
                "the manifest yields {} pairs; choose one with --reference and --comparison",
                session.len()
            )))
        }
    };
    let pair = session.pair(index);
    let tf = analyze_tf(pair.x, pair.y, &eff.analysis)?;
    ensure_dir(&common.out_dir)?;

    let mut grid = CsvOut::create(common.out_dir.join("tfmap.csv"), &["time_s", "freq_hz", "gamma"])?;
    for (frame, &t) in tf.map.times().iter().enumerate() {
        let t = num(t);
        for (bin, &f) in tf.map.freqs().iter().enumerate() {
            grid.row([t.as_str(), &num(f), &opt(tf.map.get(frame, bin))])?;
        }
    }
    let path = grid.finish()?;
    report.output(&path);

    let mut bins = CsvOut::create(
        common.out_dir.join("tf_sensitivity.csv"),
        &["freq_hz", "gamma_rating", "truncation_s", "status"],
    )?;
    let mut ok = 0;
    for b in &tf.bins {
        match &b.rating {
            Ok(r) => {
                ok += 1;
                bins.row([num(b.freq), num(r.gamma_rating), num(r.truncation_time), "ok".into()])?;
            }
            Err(e) => bins.row([num(b.freq), String::new(), String::new(), status_of(e).into()])?,
        }
    }
    let path = bins.finish()?;
    report.output(&path);
    report.pairs.push(crate::output::PairResult {
        pair_id: pair.id.to_string(),
        condition_id: pair.condition.to_string(),
        results: Vec::new(),
    });
    report.write(&common.out_dir)?;
    if ok == 0 {
        return Err(CliError::Analysis("no frequency bin could be rated".into()));
    }
    Ok(())
}
