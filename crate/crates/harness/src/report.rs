//! JSON rendering of a single run.

use std::collections::BTreeMap;

use mpclab_core::protocols::{CommSummary, PartyOutcome};
use mpclab_core::RunReport;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct CommJson {
    pub total_bits: u64,
    pub max_locality: usize,
    pub rounds: u32,
}

impl From<CommSummary> for CommJson {
    fn from(c: CommSummary) -> Self {
        Self {
            total_bits: c.total_bits,
            max_locality: c.max_locality,
            rounds: c.rounds,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackJson {
    pub tampered: u64,
    pub injected: u64,
    pub forged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReportJson {
    pub protocol: String,
    pub n: usize,
    pub h: usize,
    pub seed: u64,
    pub consistency_ok: bool,
    pub matches_evaluator: bool,
    pub honest_outputs: usize,
    pub aborted_honest_count: usize,
    pub abort_reasons: BTreeMap<String, usize>,
    pub corrupted: Vec<u32>,
    /// Honest, all-honest-execution communication.
    pub metrics: Option<CommJson>,
    pub observed: CommJson,
    pub adversary_bits: u64,
    pub committee_size: Option<usize>,
    pub degree: Option<usize>,
    pub honest_connected: Option<bool>,
    pub honest_cover: Option<bool>,
    /// Distinct values non-aborted honest parties hold, per output slot.
    pub outputs: BTreeMap<u32, Vec<String>>,
    pub expected: BTreeMap<u32, String>,
    pub attack: Option<AttackJson>,
    pub notes: Vec<String>,
}

impl From<&RunReport> for RunReportJson {
    fn from(r: &RunReport) -> Self {
        let mut outputs: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for o in &r.outcomes {
            if let PartyOutcome::Output(map) = o {
                for (slot, v) in map {
                    let held = outputs.entry(*slot).or_default();
                    let v = v.to_string();
                    if !held.contains(&v) {
                        held.push(v);
                    }
                }
            }
        }
        Self {
            protocol: r.protocol.to_string(),
            n: r.n,
            h: r.h,
            seed: r.seed,
            consistency_ok: r.consistency_ok,
            matches_evaluator: r.matches_evaluator,
            honest_outputs: r.outcomes.iter().filter(|o| o.output().is_some()).count(),
            aborted_honest_count: r.honest_aborts(),
            abort_reasons: r.abort_reasons().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            corrupted: r.corrupted.iter().map(|p| p.0).collect(),
            metrics: r.metrics.map(Into::into),
            observed: r.observed.into(),
            adversary_bits: r.adversary_bits,
            committee_size: r.committee_size(),
            degree: r.degree,
            honest_connected: r.honest_connected,
            honest_cover: r.honest_cover,
            outputs,
            expected: r.expected.iter().map(|(k, v)| (*k, v.to_string())).collect(),
            attack: r.attack.as_ref().map(|a| AttackJson {
                tampered: a.tampered,
                injected: a.injected,
                forged: a.forged,
            }),
            notes: r.notes.clone(),
        }
    }
}
