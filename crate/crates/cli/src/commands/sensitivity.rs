use rayon::prelude::*;
use rircoh::sensitivity::{band_sweep, BandOutcome};
use rircoh::stats::median;
use rircoh::{AnalysisConfig, Band, SensitivityRating};

use crate::args::CommonArgs;
use crate::config::resolve;
use crate::error::{CliError, CliResult};
use crate::output::{band_label, ensure_dir, num, opt, status_of, BandResult, CsvOut, PairResult, RunReport};
use crate::session::Session;

/// Ratings of every pair in every band, in (condition, pair, band) order.
pub fn sweep(session: &Session, bands: &[Band], config: &AnalysisConfig) -> Vec<PairResult> {
    let order = session.ordered();
    let outcomes: Vec<rircoh::Result<Vec<BandOutcome<f64>>>> = order
        .par_iter()
        .map(|&i| {
            let p = session.pair(i);
            band_sweep(p.x, p.y, bands, config)
        })
        .collect();
    order
        .iter()
        .zip(outcomes)
        .map(|(&i, outcome)| {
            let p = session.pair(i);
            let results = match outcome {
                Ok(list) => list.into_iter().map(|o| band_result(o.band, o.rating)).collect(),
                Err(e) => bands
                    .iter()
                    .map(|&b| band_result(b, Err(rircoh::Error::Pairing(e.to_string()))))
                    .collect(),
            };
            PairResult {
                pair_id: p.id.to_string(),
                condition_id: p.condition.to_string(),
                results,
            }
        })
        .collect()
}

fn band_result(band: Band, rating: rircoh::Result<SensitivityRating>) -> BandResult {
    match rating {
        Ok(r) => BandResult {
            band: band_label(&band),
            gamma_rating: Some(r.gamma_rating()),
            truncation_s: Some(r.truncation_time()),
            status: "ok".into(),
            message: None,
        },
        Err(e) => BandResult {
            band: band_label(&band),
            gamma_rating: None,
            truncation_s: None,
            status: status_of(&e).into(),
            message: Some(e.to_string()),
        },
    }
}

pub fn run(common: &CommonArgs) -> CliResult<()> {
    let mut report = RunReport::new("sensitivity", common.manifest.as_deref());
    let session = Session::open(common.manifest.as_deref(), &mut report)?;
    let eff = resolve(common, Some(&session.manifest.analysis), "standard")?;
    report.config = Some(eff.echo.clone());
    ensure_dir(&common.out_dir)?;

    let pairs = sweep(&session, &eff.bands, &eff.analysis);
    let mut csv = CsvOut::create(
        common.out_dir.join("sensitivity.csv"),
        &["condition_id", "pair_id", "band_center_hz", "gamma_rating", "truncation_s", "status"],
    )?;
    let mut ok = 0;
    for p in &pairs {
        for r in &p.results {
            csv.row([
                p.condition_id.as_str(),
                p.pair_id.as_str(),
                r.band.as_str(),
                &opt(r.gamma_rating),
                &opt(r.truncation_s),
                r.status.as_str(),
            ])?;
            if r.gamma_rating.is_some() {
                ok += 1;
            } else {
                report.warn(format!(
                    "pair {} band {}: {}",
                    p.pair_id,
                    r.band,
                    r.message.as_deref().unwrap_or("")
                ));
            }
        }
    }
    let path = csv.finish()?;
    report.output(&path);

    let areas = session.manifest.absorption_areas();
    let mut medians = CsvOut::create(
        common.out_dir.join("sensitivity_medians.csv"),
        &["condition_id", "band_center_hz", "median_gamma_rating", "n_pairs", "absorption_area_m2"],
    )?;
    let mut conditions: Vec<&str> = pairs.iter().map(|p| p.condition_id.as_str()).collect();
    conditions.dedup();
    for condition in conditions {
        let area = areas.get(condition).map(|&a| num(a)).unwrap_or_default();
        let group: Vec<&PairResult> = pairs.iter().filter(|p| p.condition_id == condition).collect();
        let mut any = false;
        for (j, band) in eff.bands.iter().enumerate() {
            let values: Vec<f64> = group.iter().filter_map(|p| p.results[j].gamma_rating).collect();
            if let Some(m) = median(&values) {
                any = true;
                medians.row([condition, &band_label(band), &num(m), &values.len().to_string(), &area])?;
            }
        }
        if !any {
            report.warn(format!("condition {condition}: no successful ratings"));
        }
    }
    let path = medians.finish()?;
    report.output(&path);
    report.pairs = pairs;
    report.write(&common.out_dir)?;
    if ok == 0 {
        return Err(CliError::Analysis("no band of any pair could be rated".into()));
    }
    Ok(())
}
