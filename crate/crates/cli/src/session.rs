use std::path::Path;

use rircoh::ingest::{build_pairs, load_plan, PairPlan, SessionManifest};
use rircoh::{PairId, Rir};

use crate::error::{CliError, CliResult};
use crate::output::RunReport;

/// A manifest with its pairs and the recordings they use.
pub struct Session {
    pub manifest: SessionManifest,
    pub plan: PairPlan,
    rirs: Vec<Option<Rir>>,
}

pub struct Pair<'s> {
    pub id: PairId,
    pub condition: &'s str,
    pub x: &'s Rir,
    pub y: &'s Rir,
}

impl Session {
    pub fn open(path: Option<&Path>, report: &mut RunReport) -> CliResult<Self> {
        let path = path.ok_or_else(|| CliError::Usage("--manifest is required".into()))?;
        let manifest = SessionManifest::load(path)?;
        let plan = build_pairs(&manifest);
        for w in manifest.warnings.iter().chain(&plan.warnings) {
            report.warn(format!("{}: {w}", path.display()));
        }
        let rirs = load_plan::<f64>(&manifest, &plan)?;
        Ok(Session { manifest, plan, rirs })
    }

    pub fn len(&self) -> usize {
        self.plan.pairs.len()
    }

    /// Pair indices ordered by condition, plan order within a condition.
    pub fn ordered(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| self.plan.condition(&self.manifest, i));
        order
    }

    pub fn pair(&self, i: usize) -> Pair<'_> {
        let p = self.plan.pairs[i];
        Pair {
            id: self.plan.pair_id(&self.manifest, i),
            condition: self.plan.condition(&self.manifest, i),
            x: self.rirs[p.reference].as_ref().expect("planned entries are loaded"),
            y: self.rirs[p.comparison].as_ref().expect("planned entries are loaded"),
        }
    }
}
