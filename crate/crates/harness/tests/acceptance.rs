//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p mpclab --test acceptance`, optionally followed by
//! `-- 2 7` to select criteria. The process fails when a criterion fails,
//! except for the ones listed in `KNOWN_UNATTAINABLE`, whose FAIL line is
//! still printed.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mpclab::attack::{attack_succeeded, AttackSpec};
use mpclab::HarnessError;
use mpclab::fit::{fit_rows, FitOptions, FitResult};
use mpclab::sweep::{run_sweep, HonestSpec, SweepRow, SweepSpec};
use mpclab_core::adversary::{AdversarySpec, Strategy, STRATEGY_NAMES};
use mpclab_core::primitives::detection_probability;
use mpclab_core::protocols::{random_inputs, PartyOutcome, RunConfig, RunReport};
use mpclab_core::{run_protocol, BitString, PartyId, ProtocolId, RunError};
use rayon::prelude::*;

/// Criteria whose thresholds cannot hold as stated; see `criterion_1`.
const KNOWN_UNATTAINABLE: [u32; 1] = [1];

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn verdict(id: u32, budget_secs: u64, start: Instant, pass: bool, detail: String) -> Verdict {
    Verdict {
        id,
        pass,
        detail,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_secs),
    }
}

fn run(cfg: &RunConfig, protocol: ProtocolId) -> RunReport {
    let inputs = random_inputs(cfg.n, cfg.width, cfg.seed);
    run_protocol(cfg, protocol, &inputs).expect("valid configuration")
}

/// At least one honest party finished without aborting.
fn not_aborted(r: &RunReport) -> bool {
    r.outcomes.iter().any(|o| o.output().is_some())
}

/// Exhaustive detection probability of the fingerprint test for every pair
/// of distinct 8-bit strings at n = 8, λ = 2. Two strings whose difference
/// is divisible by 2 are missed by the prime 2, one of only 18 primes up to
/// 64, so detection is at most 17/18 < 63/64 for those pairs.
fn criterion_1() -> Verdict {
    let start = Instant::now();
    let (n, lambda) = (8u64, 2u32);
    let threshold = 1.0 - 1.0 / (n as f64).powi(lambda as i32);
    let strings: Vec<BitString> = (0..256u64).map(|v| BitString::from_uint(v, 8)).collect();
    let mut worst = 1.0f64;
    let mut below = 0u64;
    let mut pairs = 0u64;
    for a in 0..256 {
        for b in a + 1..256 {
            let p = detection_probability(&strings[a], &strings[b], n, lambda);
            pairs += 1;
            worst = worst.min(p);
            if p < threshold {
                below += 1;
            }
        }
    }
    verdict(
        1,
        60,
        start,
        below == 0,
        format!("{pairs} pairs, min detection {worst:.4}, {below} pairs below {threshold:.4}"),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let (n, h, seeds) = (256, 64, 500u64);
    let protocol = ProtocolId::CommitteeElect;
    let config = |seed: u64| {
        let mut cfg = RunConfig::new(n, h, seed);
        cfg.alpha = 4.0;
        cfg.lambda = 4;
        cfg
    };
    let attacked: Vec<(bool, bool)> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let mut cfg = config(seed);
            cfg.measure_honest_twin = false;
            cfg.adversary = Some(AdversarySpec::random(n, h, Strategy::CommitteeStuffer, seed).unwrap());
            let r = run(&cfg, protocol);
            let hit = r
                .committee
                .as_ref()
                .is_some_and(|c| c.iter().any(|p| !r.corrupted.contains(p)));
            (not_aborted(&r), hit)
        })
        .collect();
    let live = attacked.iter().filter(|(live, _)| *live).count();
    let hits = attacked.iter().filter(|(live, hit)| *live && *hit).count();
    let honest_aborts = (0..seeds)
        .into_par_iter()
        .filter(|&seed| run(&config(seed), protocol).honest_aborts() > 0)
        .count();
    let hit_rate = hits as f64 / live.max(1) as f64;
    let abort_rate = honest_aborts as f64 / seeds as f64;
    verdict(
        2,
        60,
        start,
        live > 0 && hit_rate >= 0.99 && abort_rate <= 0.01,
        format!(
            "committee_stuffer: honest member in {hits}/{live} non-aborted runs ({hit_rate:.3}); \
             all-honest abort rate {abort_rate:.3}"
        ),
    )
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let (n, h, seeds) = (512, 128, 200u64);
    let results: Vec<(bool, bool)> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let mut cfg = RunConfig::new(n, h, seed);
            cfg.alpha = 4.0;
            cfg.measure_honest_twin = false;
            cfg.adversary = Some(AdversarySpec::random(n, h, Strategy::HonestButSilent, seed).unwrap());
            let r = run(&cfg, ProtocolId::SparseNetwork);
            (not_aborted(&r), r.honest_connected == Some(true))
        })
        .collect();
    let live = results.iter().filter(|(l, _)| *l).count();
    let connected = results.iter().filter(|(l, c)| *l && *c).count();
    let rate = connected as f64 / live.max(1) as f64;
    verdict(
        3,
        120,
        start,
        live > 0 && rate >= 0.99,
        format!("honest subgraph connected in {connected}/{live} non-aborted runs ({rate:.3})"),
    )
}

struct ScalingRun {
    protocol: ProtocolId,
    ns: Vec<usize>,
    range: (f64, f64),
    rows: Vec<SweepRow>,
    fit: FitResult,
}

fn scaling_sweeps() -> (Vec<ScalingRun>, Duration) {
    let start = Instant::now();
    let plans = [
        (ProtocolId::MpcCommittee, vec![128, 256, 512, 1024], (0.8, 1.4)),
        (ProtocolId::MpcGossip, vec![128, 256, 512], (1.7, 2.3)),
        (ProtocolId::MpcLocalTradeoff, vec![256, 512, 1024], (1.2, 1.8)),
    ];
    let runs = plans
        .into_iter()
        .map(|(protocol, ns, range)| {
            let mut spec = SweepSpec::new(protocol, ns.clone(), HonestSpec::Ratio(0.5));
            spec.alphas = vec![1.0];
            spec.lambdas = vec![4];
            spec.depths = vec![8];
            spec.seeds = 10;
            let summary = run_sweep(&spec);
            assert!(summary.skipped.is_empty(), "{:?}", summary.skipped);
            let fit = fit_rows(&summary.rows, &FitOptions::default()).expect("three or more points");
            ScalingRun {
                protocol,
                ns,
                range,
                rows: summary.rows,
                fit,
            }
        })
        .collect();
    (runs, start.elapsed())
}

fn criterion_4(runs: &[ScalingRun], elapsed: Duration) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let ok = r.fit.slope >= r.range.0 && r.fit.slope <= r.range.1;
        pass &= ok;
        parts.push(format!(
            "{} n={:?} slope {:.3} [ci {:.3}, {:.3}] want [{}, {}]",
            r.protocol, r.ns, r.fit.slope, r.fit.ci_low, r.fit.ci_high, r.range.0, r.range.1
        ));
    }
    Verdict {
        id: 4,
        pass,
        detail: parts.join("; "),
        elapsed,
        budget: Duration::from_secs(30 * 60),
    }
}

fn criterion_5(runs: &[ScalingRun]) -> Verdict {
    let start = Instant::now();
    let alpha = 1.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let bound = |row: &SweepRow| {
            let (n, h) = (row.n as f64, row.h as f64);
            match r.protocol {
                ProtocolId::MpcGossip => Some(8.0 * alpha * n * n.log2() / h),
                ProtocolId::MpcLocalTradeoff => Some(8.0 * alpha * n * n.log2() / h.sqrt()),
                _ => None,
            }
        };
        let mut worst: Option<(f64, usize)> = None;
        for row in &r.rows {
            let Some(b) = bound(row) else { continue };
            pass &= row.max_locality as f64 <= b;
            let ratio = row.max_locality as f64 / b;
            if worst.is_none_or(|(w, _)| ratio > w) {
                worst = Some((ratio, row.n));
            }
        }
        if let Some((ratio, n)) = worst {
            parts.push(format!("{} worst locality/bound {ratio:.3} at n={n}", r.protocol));
        }
    }
    verdict(5, 60, start, pass && parts.len() == 2, parts.join("; "))
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let protocols = [
        (ProtocolId::MpcCommittee, "xor"),
        (ProtocolId::MpcMultiOutput, "rotate"),
        (ProtocolId::MpcGossip, "xor"),
        (ProtocolId::MpcLocalTradeoff, "xor"),
    ];
    let (n, h, seeds) = (128, 32, 200u64);
    let mut combos = 0;
    let mut skipped = Vec::new();
    let mut runs = 0u64;
    let mut inconsistent = 0u64;
    let mut wrong = 0u64;
    let mut aborted_runs = 0u64;
    let mut failures = Vec::new();
    for (protocol, function) in protocols {
        for name in STRATEGY_NAMES {
            let strategy: Strategy = name.parse().unwrap();
            let mut spec = AttackSpec::new(protocol, strategy, n, h);
            spec.lambda = 8;
            spec.seeds = seeds;
            spec.function = function.into();
            let reports: Vec<Result<RunReport, HarnessError>> = (0..seeds).into_par_iter().map(|i| spec.run_seed(i)).collect();
            if let Some(Err(e)) = reports.first() {
                assert!(
                    matches!(e, HarnessError::Run(RunError::StrategyProtocolMismatch { .. })),
                    "{protocol} x {name}: {e}"
                );
                skipped.push(format!("{protocol}x{name}"));
                continue;
            }
            combos += 1;
            for r in reports {
                let r = r.expect("configuration accepted for seed 0 is accepted for all");
                runs += 1;
                inconsistent += !r.consistency_ok as u64;
                wrong += !r.matches_evaluator as u64;
                aborted_runs += (r.honest_aborts() > 0) as u64;
                if attack_succeeded(&r) && failures.len() < 5 {
                    failures.push(format!("{protocol}/{name}/seed {}", r.seed));
                }
            }
        }
    }
    verdict(
        6,
        20 * 60,
        start,
        inconsistent == 0 && wrong == 0,
        format!(
            "{combos} protocol x strategy pairs, {runs} runs: {inconsistent} inconsistent, {wrong} wrong outputs, \
             {aborted_runs} with honest aborts; {} pairs not applicable{}",
            skipped.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; first failures {failures:?}")
            }
        ),
    )
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let (n, h, seeds) = (256, 9, 500u64);
    let attack = |protocol: ProtocolId, alpha: f64, strategy: Strategy| {
        let mut spec = AttackSpec::new(protocol, strategy, n, h);
        spec.alpha = alpha;
        spec.seeds = seeds;
        (0..seeds)
            .into_par_iter()
            .filter(|&i| attack_succeeded(&spec.run_seed(i).unwrap()))
            .count()
    };
    let isolation = Strategy::IsolationAttacker {
        sender: 0,
        target: None,
        always_forge: false,
    };
    let strawman = attack(ProtocolId::StrawmanBroadcast { d_target: 3 }, 2.0, isolation.clone());
    let gossip = attack(ProtocolId::GossipBroadcast, 4.0, isolation);
    let forced = attack(
        ProtocolId::GossipBroadcast,
        4.0,
        Strategy::IsolationAttacker {
            sender: 0,
            target: None,
            always_forge: true,
        },
    );
    let rate = strawman as f64 / seeds as f64;
    verdict(
        7,
        5 * 60,
        start,
        rate >= 0.10 && gossip == 0,
        format!(
            "strawman d=3 fooled the target in {strawman}/{seeds} ({rate:.3}); responsible gossip alpha=4 in \
             {gossip}/{seeds} (forging regardless of neighborhood: {forced}/{seeds})"
        ),
    )
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let (n, h, seeds) = (16, 4, 100u64);
    let target = PartyId(3);
    let results: Vec<(bool, bool, bool)> = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let mut cfg = RunConfig::new(n, h, seed);
            cfg.alpha = 1.0;
            cfg.width = 8;
            cfg.function = "rotate".into();
            cfg.measure_honest_twin = false;
            // Sweep the flipped position across the forwarded ciphertext and signature.
            let bit = (seed as usize * 97) % 4096;
            let strategy = Strategy::OutputForker {
                target: Some(target.0),
                bit: Some(bit),
            };
            cfg.adversary = Some(AdversarySpec::with_corrupted([PartyId(0)], strategy));
            let r = run(&cfg, ProtocolId::MpcMultiOutput);
            let tampered = r.attack.as_ref().is_some_and(|a| a.tampered > 0);
            let target_aborted = r.outcomes[target.index()].is_abort();
            let others_ok = r.outcomes.iter().enumerate().all(|(i, o)| match o {
                PartyOutcome::Corrupted => true,
                _ if i == target.index() => true,
                PartyOutcome::Output(map) => map.get(&(i as u32)).is_some_and(|v| r.expected.get(&(i as u32)) == Some(v)),
                PartyOutcome::Abort { .. } => false,
            });
            (tampered, target_aborted, others_ok)
        })
        .collect();
    let tampered = results.iter().filter(|r| r.0).count();
    let caught = results.iter().filter(|r| r.0 && r.1).count();
    let clean = results.iter().filter(|r| r.2).count();
    verdict(
        8,
        120,
        start,
        tampered == seeds as usize && caught == tampered && clean == seeds as usize,
        format!(
            "{tampered}/{seeds} runs tampered, target aborted in {caught}/{tampered}; \
             untampered parties matched the evaluator in {clean}/{seeds}"
        ),
    )
}

fn main() -> ExitCode {
    let selected: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |id: u32| selected.is_empty() || selected.contains(&id);

    let mut unexpected = 0;
    let mut report = |v: Verdict| {
        let in_time = v.elapsed <= v.budget;
        let ok = v.pass && in_time;
        println!(
            "{} criterion {}: {} [{:.1}s of {}s budget{}]",
            if ok { "PASS" } else { "FAIL" },
            v.id,
            v.detail,
            v.elapsed.as_secs_f64(),
            v.budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
        if !ok && !KNOWN_UNATTAINABLE.contains(&v.id) {
            unexpected += 1;
        }
    };
    if wanted(1) {
        report(criterion_1());
    }
    if wanted(2) {
        report(criterion_2());
    }
    if wanted(3) {
        report(criterion_3());
    }
    if wanted(4) || wanted(5) {
        let (runs, elapsed) = scaling_sweeps();
        if wanted(4) {
            report(criterion_4(&runs, elapsed));
        }
        if wanted(5) {
            report(criterion_5(&runs));
        }
    }
    if wanted(6) {
        report(criterion_6());
    }
    if wanted(7) {
        report(criterion_7());
    }
    if wanted(8) {
        report(criterion_8());
    }

    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
