//! Pair formation and loading.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::manifest::{Entry, PairingMode, SessionManifest};
use super::wav::load_wav;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::types::{PairId, Rir};

/// A pair to analyze, as indices into the manifest's entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedPair {
    pub reference: usize,
    pub comparison: usize,
}

/// Pairs of a manifest plus anything worth telling the user.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairPlan {
    pub pairs: Vec<PlannedPair>,
    pub warnings: Vec<String>,
}

impl PairPlan {
    pub fn pair_id(&self, manifest: &SessionManifest, i: usize) -> PairId {
        let p = self.pairs[i];
        PairId::new(&manifest.entries[p.reference].id, &manifest.entries[p.comparison].id)
    }

    /// Condition a pair belongs to: that of its comparison recording.
    pub fn condition<'m>(&self, manifest: &'m SessionManifest, i: usize) -> &'m str {
        &manifest.entries[self.pairs[i].comparison].condition_id
    }
}

/// Entry indices grouped by (condition, receiver), each group sorted by
/// measurement index.
fn groups(entries: &[Entry]) -> BTreeMap<(&str, &str), Vec<usize>> {
    let mut groups: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        groups
            .entry((e.condition_id.as_str(), e.receiver_id.as_str()))
            .or_default()
            .push(i);
    }
    for members in groups.values_mut() {
        members.sort_by_key(|&i| entries[i].index);
    }
    groups
}

/// Forms the analysis pairs of a manifest without touching any file.
///
/// Groups are visited in (condition, receiver) order and members in
/// measurement-index order, so the plan depends only on the manifest
/// content. Explicit pairs keep their listed order.
pub fn build_pairs(manifest: &SessionManifest) -> PairPlan {
    let mut plan = PairPlan::default();
    let entries = &manifest.entries;
    if manifest.pairing == PairingMode::Explicit {
        for p in &manifest.pairs {
            let find = |id: &str| entries.iter().position(|e| e.id == id).expect("validated id");
            plan.pairs.push(PlannedPair {
                reference: find(&p.reference),
                comparison: find(&p.comparison),
            });
        }
        return plan;
    }
    for ((condition, receiver), members) in groups(entries) {
        if members.len() < 2 {
            plan.warnings.push(format!(
                "condition '{condition}', receiver '{receiver}': single measurement, no pairs formed"
            ));
            continue;
        }
        let new_pairs: Vec<PlannedPair> = match manifest.pairing {
            PairingMode::ReferenceVsRest => members[1..]
                .iter()
                .map(|&c| PlannedPair {
                    reference: members[0],
                    comparison: c,
                })
                .collect(),
            PairingMode::Consecutive => members
                .windows(2)
                .map(|w| PlannedPair {
                    reference: w[0],
                    comparison: w[1],
                })
                .collect(),
            PairingMode::Explicit => unreachable!(),
        };
        plan.pairs.extend(new_pairs);
    }
    plan
}

/// Loads one entry, labeled and with its noise region from the manifest.
pub fn load_entry<T: Scalar>(entry: &Entry) -> Result<Rir<T>> {
    Ok(load_wav::<T>(&entry.file, entry.channel)?.with_meta(entry.meta()))
}

/// Loads every entry that takes part in a pair, concurrently.
///
/// The result is indexed like `manifest.entries`; entries outside the plan
/// are `None`. Pairs whose members differ in sample rate are rejected.
pub fn load_plan<T: Scalar>(manifest: &SessionManifest, plan: &PairPlan) -> Result<Vec<Option<Rir<T>>>> {
    let mut needed = vec![false; manifest.entries.len()];
    for p in &plan.pairs {
        needed[p.reference] = true;
        needed[p.comparison] = true;
    }
    let loaded: Vec<Option<Rir<T>>> = manifest
        .entries
        .par_iter()
        .zip(needed)
        .map(|(e, need)| need.then(|| load_entry(e)).transpose())
        .collect::<Result<_>>()?;
    for (i, p) in plan.pairs.iter().enumerate() {
        let r = loaded[p.reference].as_ref().expect("loaded");
        let c = loaded[p.comparison].as_ref().expect("loaded");
        if r.sample_rate() != c.sample_rate() {
            let e = &manifest.entries[p.comparison];
            return Err(Error::Pairing(format!(
                "{}: line {}: pair {} mixes sample rates {} and {} Hz",
                manifest.path.display(),
                e.line,
                plan.pair_id(manifest, i),
                r.sample_rate(),
                c.sample_rate()
            )));
        }
    }
    Ok(loaded)
}
