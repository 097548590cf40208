use crate::args::CommonArgs;
use crate::commands::sensitivity::sweep;
use crate::config::resolve;
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, RunReport};
use crate::session::Session;

/// Rates every pair in the broadband and the configured bands and writes only
/// `report.json`; prints one summary line per pair.
pub fn run(common: &CommonArgs) -> CliResult<()> {
    let mut report = RunReport::new("report", common.manifest.as_deref());
    let session = Session::open(common.manifest.as_deref(), &mut report)?;
    let eff = resolve(common, Some(&session.manifest.analysis), "broadband,standard")?;
    report.config = Some(eff.echo.clone());
    ensure_dir(&common.out_dir)?;
    let pairs = sweep(&session, &eff.bands, &eff.analysis);
    let mut ok = 0;
    for p in &pairs {
        let rated: Vec<String> = p
            .results
            .iter()
            .map(|r| match r.gamma_rating {
                Some(g) => {
                    ok += 1;
                    format!("{}={g:.4}", r.band)
                }
                None => format!("{}={}", r.band, r.status),
            })
            .collect();
        println!("{}\t{}\t{}", p.condition_id, p.pair_id, rated.join(" "));
    }
    report.pairs = pairs;
    report.write(&common.out_dir)?;
    if ok == 0 {
        return Err(CliError::Analysis("no band of any pair could be rated".into()));
    }
    Ok(())
}
