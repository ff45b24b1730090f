//! Attack campaigns: one strategy, many seeds, success rates with Wilson
//! score intervals.
//!
//! A run counts as a successful attack when two non-aborted honest parties
//! disagree on a slot or one of them holds a value other than the expected
//! one. Aborts are the protocol doing its job and count separately.

use mpclab_core::adversary::{AdversarySpec, Strategy};
use mpclab_core::primitives::Estimate;
use mpclab_core::protocols::{random_inputs, RunConfig, RunReport};
use mpclab_core::{run_protocol, ProtocolId};
use rayon::prelude::*;
use serde::Serialize;

use crate::HarnessError;

#[derive(Clone, Debug)]
pub struct AttackSpec {
    pub protocol: ProtocolId,
    pub strategy: Strategy,
    pub n: usize,
    pub h: usize,
    pub alpha: f64,
    pub lambda: u32,
    pub depth: u32,
    pub seeds: u64,
    pub root_seed: u64,
    pub function: String,
    pub width: usize,
}

impl AttackSpec {
    pub fn new(protocol: ProtocolId, strategy: Strategy, n: usize, h: usize) -> Self {
        Self {
            protocol,
            strategy,
            n,
            h,
            alpha: 2.0,
            lambda: 8,
            depth: 8,
            seeds: 100,
            root_seed: 0,
            function: "xor".into(),
            width: 1,
        }
    }

    pub fn config(&self, seed: u64) -> Result<RunConfig, HarnessError> {
        let mut cfg = RunConfig::new(self.n, self.h, seed);
        cfg.alpha = self.alpha;
        cfg.lambda = self.lambda;
        cfg.depth = self.depth;
        cfg.function = self.function.clone();
        cfg.width = self.width;
        cfg.measure_honest_twin = false;
        if let Strategy::IsolationAttacker { sender, .. } = self.strategy {
            cfg.sender = Some(sender);
        }
        let adv = AdversarySpec::random(self.n, self.h, self.strategy.clone(), seed)
            .map_err(|e| HarnessError::config(e.to_string()))?;
        cfg.adversary = Some(adv);
        Ok(cfg)
    }

    /// Runs seed `root_seed + i` and returns the full report.
    pub fn run_seed(&self, i: u64) -> Result<RunReport, HarnessError> {
        let seed = self.root_seed.wrapping_add(i);
        let cfg = self.config(seed)?;
        let inputs = random_inputs(self.n, self.width, seed);
        Ok(run_protocol(&cfg, self.protocol, &inputs)?)
    }
}

/// Whether the adversary broke consistency or correctness in this run.
pub fn attack_succeeded(r: &RunReport) -> bool {
    !r.consistency_ok || !r.matches_evaluator
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct RateJson {
    pub count: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl From<Estimate> for RateJson {
    fn from(e: Estimate) -> Self {
        Self {
            count: e.successes,
            trials: e.trials,
            rate: e.p_hat,
            wilson_low: e.lower,
            wilson_high: e.upper,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackReport {
    pub protocol: String,
    pub strategy: String,
    pub n: usize,
    pub h: usize,
    pub alpha: f64,
    pub lambda: u32,
    pub seeds: u64,
    pub root_seed: u64,
    /// Inconsistent or incorrect honest outputs.
    pub success: RateJson,
    pub inconsistent: RateJson,
    pub wrong_output: RateJson,
    /// Runs where at least one honest party aborted.
    pub any_abort: RateJson,
    /// Runs where every honest party aborted.
    pub all_abort: RateJson,
    /// Runs where the strategy changed at least one message.
    pub tampered: RateJson,
    pub successful_seeds: Vec<u64>,
}

pub fn run_attack(spec: &AttackSpec) -> Result<AttackReport, HarnessError> {
    let reports: Vec<RunReport> = (0..spec.seeds)
        .into_par_iter()
        .map(|i| spec.run_seed(i))
        .collect::<Result<_, _>>()?;
    let trials = reports.len() as u64;
    let rate = |f: &dyn Fn(&RunReport) -> bool| -> RateJson {
        Estimate::from_counts(reports.iter().filter(|r| f(r)).count() as u64, trials).into()
    };
    let honest = |r: &RunReport| r.n - r.corrupted.len();
    Ok(AttackReport {
        protocol: spec.protocol.to_string(),
        strategy: spec.strategy.to_string(),
        n: spec.n,
        h: spec.h,
        alpha: spec.alpha,
        lambda: spec.lambda,
        seeds: spec.seeds,
        root_seed: spec.root_seed,
        success: rate(&attack_succeeded),
        inconsistent: rate(&|r| !r.consistency_ok),
        wrong_output: rate(&|r| !r.matches_evaluator),
        any_abort: rate(&|r| r.honest_aborts() > 0),
        all_abort: rate(&|r| r.honest_aborts() == honest(r)),
        tampered: rate(&|r| r.attack.as_ref().is_some_and(|a| a.tampered + a.injected > 0 || a.forged)),
        successful_seeds: reports.iter().filter(|r| attack_succeeded(r)).map(|r| r.seed).collect(),
    })
}
