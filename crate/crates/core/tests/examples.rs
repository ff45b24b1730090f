//! Worked examples for each protocol, run end to end through `run_protocol`.

use mpclab_core::adversary::{AdversarySpec, Strategy};
use mpclab_core::committee::{abort_threshold, election_probability, local_election_probability};
use mpclab_core::protocols::{random_inputs, subset_size, PartyOutcome, RunConfig, RunReport};
use mpclab_core::routing::degree;
use mpclab_core::{run_protocol, AbortReason, BitString, PartyId, ProtocolId};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

fn run(cfg: &RunConfig, protocol: ProtocolId) -> RunReport {
    let inputs = random_inputs(cfg.n, cfg.width, cfg.seed);
    run_protocol(cfg, protocol, &inputs).unwrap()
}

fn attacked(n: usize, h: usize, seed: u64, strategy: Strategy) -> RunConfig {
    let mut cfg = RunConfig::new(n, h, seed);
    cfg.measure_honest_twin = false;
    cfg.adversary = Some(AdversarySpec::random(n, h, strategy, seed).unwrap());
    cfg
}

fn safe(r: &RunReport) -> bool {
    r.consistency_ok && r.matches_evaluator
}

#[test]
fn all_to_all_outputs_the_input_vector() {
    let mut cfg = RunConfig::new(4, 4, 3);
    cfg.width = 2;
    let inputs: Vec<BitString> = ["00", "01", "10", "11"].iter().map(|s| bits(s)).collect();
    let r = run_protocol(&cfg, ProtocolId::AllToAllBroadcast, &inputs).unwrap();
    assert_eq!(r.honest_aborts(), 0);
    for o in &r.outcomes {
        let out = o.output().expect("no aborts");
        let vector: Vec<&BitString> = out.values().collect();
        assert_eq!(vector, inputs.iter().collect::<Vec<_>>());
    }
}

#[test]
fn same_seed_same_metrics() {
    for protocol in [ProtocolId::AllToAllBroadcast, ProtocolId::MpcGossip, ProtocolId::MpcLocalTradeoff] {
        let cfg = RunConfig::new(32, 16, 7);
        let a = run(&cfg, protocol);
        let b = run(&cfg, protocol);
        assert_eq!(a.metrics, b.metrics, "{protocol}");
        assert_eq!(a.outcomes, b.outcomes, "{protocol}");
    }
}

#[test]
fn equivocation_on_broadcast_is_caught() {
    let mut caught = 0;
    for seed in 0..200 {
        let r = run(&attacked(8, 4, seed, Strategy::Equivocator { target: None }), ProtocolId::AllToAllBroadcast);
        assert!(safe(&r), "seed {seed}");
        caught += (r.honest_aborts() > 0) as u32;
    }
    assert!(caught >= 198, "{caught}/200");
}

#[test]
fn equivocating_sender_makes_everyone_abort() {
    let mut cfg = RunConfig::new(8, 4, 1);
    cfg.measure_honest_twin = false;
    cfg.adversary = Some(AdversarySpec::with_corrupted([PartyId(0)], Strategy::Equivocator { target: None }));
    let r = run(&cfg, ProtocolId::SingleSourceBroadcast);
    assert_eq!(r.honest_aborts(), 7);
}

#[test]
fn silent_sender_makes_receivers_abort() {
    let mut cfg = RunConfig::new(6, 3, 2);
    cfg.adversary = Some(AdversarySpec::with_corrupted([PartyId(0)], Strategy::HonestButSilent));
    let r = run(&cfg, ProtocolId::SingleSourceBroadcast);
    assert_eq!(r.honest_aborts(), 5);
    assert!(r.abort_reasons().contains_key(AbortReason::Missing.label()));
}

#[test]
fn flooding_receivers_abort() {
    for seed in 0..20 {
        let r = run(&attacked(16, 8, seed, Strategy::Flooder { factor: 10 }), ProtocolId::AllToAllBroadcast);
        assert!(safe(&r));
        assert!(r.abort_reasons().contains_key(AbortReason::Flood.label()), "seed {seed}");
    }
}

#[test]
fn everyone_elected_when_p_is_one() {
    let mut cfg = RunConfig::new(4, 2, 0);
    cfg.alpha = 1.0;
    assert_eq!(election_probability(4, 2, 1.0), 1.0);
    let r = run(&cfg, ProtocolId::CommitteeElect);
    assert_eq!(r.honest_aborts(), 0);
    assert_eq!(r.committee_size(), Some(4));
}

#[test]
fn committee_size_concentrates() {
    // p = 4 * 9 / 128 = 0.28125, so E|C| = 144 at n = 512.
    let (n, h, alpha, seeds) = (512, 128, 4.0, 200);
    let p = election_probability(n, h, alpha);
    assert_eq!(p, 0.28125);
    let mut total = 0;
    for seed in 0..seeds {
        let mut cfg = RunConfig::new(n, h, seed);
        cfg.alpha = alpha;
        cfg.lambda = 4;
        let r = run(&cfg, ProtocolId::CommitteeElect);
        assert_eq!(r.honest_aborts(), 0, "seed {seed}");
        total += r.committee_size().unwrap();
    }
    let mean = total as f64 / seeds as f64;
    let expected = p * n as f64;
    assert!((mean - expected).abs() <= 0.05 * expected, "mean {mean} vs {expected}");
}

#[test]
fn stuffed_committee_trips_the_threshold() {
    // p = 0.25 at alpha = 2: 192 corrupted announcements reach 2pn = 128.
    let (n, h) = (256, 64);
    assert_eq!(abort_threshold(n, election_probability(n, h, 2.0)), 128.0);
    for seed in 0..10 {
        let mut cfg = attacked(n, h, seed, Strategy::CommitteeStuffer);
        cfg.alpha = 2.0;
        cfg.lambda = 4;
        let r = run(&cfg, ProtocolId::CommitteeElect);
        assert_eq!(r.honest_aborts(), h, "seed {seed}");
        assert_eq!(r.abort_reasons().get(AbortReason::Threshold.label()), Some(&h));
    }
}

#[test]
fn sparse_graph_rarely_aborts_when_all_honest() {
    let d = degree(256, 64, 2.0);
    assert_eq!(d, 64);
    let mut aborted = 0;
    for seed in 0..200 {
        let mut cfg = RunConfig::new(256, 64, seed);
        cfg.alpha = 2.0;
        let r = run(&cfg, ProtocolId::SparseNetwork);
        aborted += (r.honest_aborts() > 0) as u32;
    }
    assert!(aborted <= 2, "{aborted}/200");
}

#[test]
fn gossip_from_one_origin_reaches_all() {
    let mut cfg = RunConfig::new(64, 32, 5);
    cfg.sender = Some(0);
    cfg.width = 4;
    let r = run(&cfg, ProtocolId::GossipBroadcast);
    let x0 = random_inputs(64, 4, 5)[0].clone();
    for o in &r.outcomes {
        let out = o.output().unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out.get(&0), Some(&x0));
    }
}

#[test]
fn conflicting_rumors_never_split_honest_parties() {
    for seed in 0..100 {
        let mut cfg = RunConfig::new(64, 32, seed);
        cfg.measure_honest_twin = false;
        let mut corrupt: Vec<PartyId> = (32..64).map(PartyId).collect();
        corrupt[0] = PartyId(5);
        cfg.adversary = Some(AdversarySpec::with_corrupted(corrupt, Strategy::Equivocator { target: None }));
        let r = run(&cfg, ProtocolId::GossipBroadcast);
        assert!(r.consistency_ok, "seed {seed}");
    }
}

#[test]
fn strawman_without_edges_leaves_receivers_on_the_default() {
    for seed in 0..20 {
        let mut cfg = RunConfig::new(32, 32, seed);
        cfg.sender = Some(0);
        cfg.width = 8;
        let r = run(&cfg, ProtocolId::StrawmanBroadcast { d_target: 0 });
        let x0 = random_inputs(32, 8, seed)[0].clone();
        for (i, o) in r.outcomes.iter().enumerate().skip(1) {
            assert_eq!(o.output().unwrap().get(&0), Some(&BitString::zeros(8)), "seed {seed} party {i}");
        }
        assert_eq!(r.matches_evaluator, x0 == BitString::zeros(8), "seed {seed}");
    }
}

#[test]
fn mpc_committee_rejects_forked_keys() {
    for seed in 0..200 {
        let r = run(&attacked(32, 16, seed, Strategy::PkForker), ProtocolId::MpcCommittee);
        assert!(safe(&r), "seed {seed}");
    }
}

#[test]
fn substituted_inputs_stay_consistent() {
    for seed in 0..50 {
        let mut cfg = attacked(32, 16, seed, Strategy::InputSubstituter);
        cfg.width = 4;
        let r = run(&cfg, ProtocolId::MpcCommittee);
        assert!(safe(&r), "seed {seed}");
        if r.outcomes.iter().any(|o| o.output().is_some()) {
            let boundary = r.boundary_inputs.as_ref().expect("oracle ran");
            let honest_inputs = random_inputs(32, 4, seed);
            for (i, x) in boundary.iter().enumerate() {
                if !r.corrupted.contains(&PartyId(i as u32)) {
                    assert_eq!(x, &honest_inputs[i], "honest input {i} reached the oracle unchanged");
                }
            }
        }
    }
}

#[test]
fn multi_output_identity_and_rotate() {
    for function in ["identity", "rotate"] {
        let mut cfg = RunConfig::new(16, 8, 11);
        cfg.function = function.into();
        cfg.width = 8;
        let inputs = random_inputs(16, 8, 11);
        let r = run_protocol(&cfg, ProtocolId::MpcMultiOutput, &inputs).unwrap();
        for (i, o) in r.outcomes.iter().enumerate() {
            let y = o.output().unwrap().get(&(i as u32)).unwrap();
            let want = if function == "identity" { &inputs[i] } else { &inputs[(i + 1) % 16] };
            assert_eq!(y, want, "{function} party {i}");
        }
    }
}

#[test]
fn tampered_forward_only_hurts_its_target() {
    for seed in 0..30 {
        let mut cfg = RunConfig::new(16, 4, seed);
        cfg.alpha = 1.0;
        cfg.function = "identity".into();
        cfg.adversary = Some(AdversarySpec::with_corrupted(
            [PartyId(0)],
            Strategy::OutputForker {
                target: Some(3),
                bit: Some(seed as usize),
            },
        ));
        let r = run(&cfg, ProtocolId::MpcMultiOutput);
        assert!(r.outcomes[3].is_abort(), "seed {seed}");
        for (i, o) in r.outcomes.iter().enumerate().filter(|&(i, _)| i != 0 && i != 3) {
            assert!(matches!(o, PartyOutcome::Output(_)), "seed {seed} party {i}");
        }
        assert!(r.matches_evaluator);
    }
}

#[test]
fn mpc_gossip_locality_within_three_degrees() {
    let mut cfg = RunConfig::new(256, 64, 3);
    cfg.lambda = 4;
    let r = run(&cfg, ProtocolId::MpcGossip);
    let d = r.degree.unwrap();
    assert_eq!(d, 64);
    assert!(r.metrics.unwrap().max_locality <= 3 * d);
}

#[test]
fn mpc_gossip_all_honest_does_not_abort() {
    let mut aborted = 0;
    for seed in 0..200 {
        let mut cfg = RunConfig::new(32, 16, seed);
        cfg.alpha = 4.0;
        let r = run(&cfg, ProtocolId::MpcGossip);
        assert!(safe(&r));
        aborted += (r.honest_aborts() > 0) as u32;
    }
    assert!(aborted <= 2, "{aborted}/200");
}

#[test]
fn tradeoff_subsets_cover_everyone() {
    // p clips to 1 here, so all 128 honest parties serve 23 others each.
    assert_eq!(subset_size(4096, 1024), 128);
    assert_eq!(subset_size(256, 128), 23);
    let mut covered = 0;
    let seeds = 200;
    for seed in 0..seeds {
        let mut cfg = attacked(256, 128, seed, Strategy::HonestButSilent);
        cfg.alpha = 4.0;
        cfg.lambda = 4;
        let r = run(&cfg, ProtocolId::MpcLocalTradeoff);
        assert!(safe(&r));
        covered += (r.honest_cover == Some(true)) as u32;
    }
    assert!(covered as f64 >= 0.99 * seeds as f64, "{covered}/{seeds}");
}

/// The covering argument alone at n = 1024, h = 256, alpha = 4: every
/// honest party is a member and samples 64 of the other 1023.
#[test]
fn honest_subsets_cover_a_large_network() {
    let (n, h, alpha) = (1024, 256, 4.0);
    assert_eq!(local_election_probability(n, h, alpha), 1.0);
    let s = subset_size(n, h);
    assert_eq!(s, 64);
    let mut covered_runs = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let honest = index::sample(&mut rng, n, h).into_vec();
        let mut covered = vec![false; n];
        for &c in &honest {
            covered[c] = true;
            for x in index::sample(&mut rng, n - 1, s) {
                covered[if x < c { x } else { x + 1 }] = true;
            }
        }
        covered_runs += covered.iter().all(|&c| c) as u32;
    }
    assert!(covered_runs >= 198, "{covered_runs}/200");
}
