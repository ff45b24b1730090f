//! Registered protocols and the single entry point that runs them.
//!
//! The four MPC-with-abort protocols share one skeleton: agree on who
//! computes, give them a key, get everyone's encrypted input to them, make
//! sure the holders saw the same ciphertexts, call the oracle, and spread the
//! result with a consistency check at every receiver. They differ in who
//! talks to whom.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample;

use crate::adversary::{Adversary, AdversarySpec, AttackLog, Features, StrategyContext};
use crate::bits::{index_width, BitString};
use crate::broadcast::{all_to_all, all_to_all_echo, serialize_vector, single_source, AbortMode};
use crate::committee::{
    committee_elect, election_probability, local_committee_elect, local_election_probability, CommitteeView,
};
use crate::crypto::{expand, CostModel, CryptoBackend, KeyKind, KeyMaterial, MockBackend};
use crate::idealfunc::{
    apply_charge, f_comp, f_comp_sign, f_gen, output_charge, selective_abort, FunctionSpec, KeyDelivery, Spread,
};
use crate::netsim::{self, AbortReason, Allowance, CommMetrics, Inbox, Network, PartyId, PartyStatus, Payload, Tag};
use crate::primitives::pairwise_equality;
use crate::routing::{degree, gossip, sparse_network, GossipOptions, RoutingGraph};

pub const TAG_FGEN: &str = "fgen";
pub const TAG_FGEN_SIG: &str = "fgen.sig";
pub const TAG_FCOMP: &str = "fcomp";
pub const TAG_PK: &str = "pk";
pub const TAG_CT: &str = "ct";
pub const TAG_CTLIST: &str = "ctlist";
pub const TAG_CT_PROBE: &str = "ct.probe";
pub const TAG_CT_REPLY: &str = "ct.reply";
pub const TAG_OUT: &str = "out";
pub const TAG_FWD: &str = "fwd";
pub const TAG_OBJ: &str = "obj";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    SingleSourceBroadcast,
    AllToAllBroadcast,
    AllToAllEcho,
    CommitteeElect,
    LocalCommitteeElect,
    SparseNetwork,
    GossipBroadcast,
    /// Flooding over a sparse graph of out-degree `d_target` with no
    /// conflict checks and no degree guard.
    StrawmanBroadcast { d_target: usize },
    MpcCommittee,
    MpcMultiOutput,
    MpcGossip,
    MpcLocalTradeoff,
}

/// Every protocol name with a one-line description.
pub const PROTOCOLS: [(&str, &str); 12] = [
    ("single_source_broadcast", "send and echo broadcast of one party's input"),
    ("all_to_all_broadcast", "everyone broadcasts, views compared by fingerprint"),
    ("all_to_all_echo", "everyone broadcasts, views compared by full echo (cubic baseline)"),
    ("committee_elect", "self-election of a committee over the clique"),
    ("local_committee_elect", "self-election with announcements gossiped over a sparse graph"),
    ("sparse_network", "random sparse routing graph with a degree guard"),
    ("gossip_broadcast", "responsible gossip of every input, or of the sender's"),
    ("strawman_broadcast:<d>", "first-heard-wins flooding over out-degree d, no checks"),
    ("mpc_committee", "single-output MPC through an elected committee"),
    ("mpc_multi_output", "per-party outputs, sealed and signed, forwarded by one member"),
    ("mpc_gossip", "MPC with broadcast objects gossiped over a sparse graph"),
    ("mpc_local_tradeoff", "committee of size ~n/sqrt(h), each member serving a random subset"),
];

impl ProtocolId {
    pub fn features(self) -> Features {
        use ProtocolId::*;
        Features {
            election: matches!(
                self,
                CommitteeElect | LocalCommitteeElect | MpcCommittee | MpcMultiOutput | MpcLocalTradeoff
            ),
            oracle: self.is_mpc(),
            rumors: matches!(self, GossipBroadcast | StrawmanBroadcast { .. } | MpcGossip),
        }
    }

    pub fn is_mpc(self) -> bool {
        matches!(
            self,
            ProtocolId::MpcCommittee | ProtocolId::MpcMultiOutput | ProtocolId::MpcGossip | ProtocolId::MpcLocalTradeoff
        )
    }

    /// Protocols that build the sparse routing graph need `h > log2 n`.
    pub fn needs_sparse_honesty(self) -> bool {
        use ProtocolId::*;
        matches!(
            self,
            LocalCommitteeElect | SparseNetwork | GossipBroadcast | MpcGossip | MpcLocalTradeoff
        )
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ProtocolId::*;
        let name = match self {
            SingleSourceBroadcast => "single_source_broadcast",
            AllToAllBroadcast => "all_to_all_broadcast",
            AllToAllEcho => "all_to_all_echo",
            CommitteeElect => "committee_elect",
            LocalCommitteeElect => "local_committee_elect",
            SparseNetwork => "sparse_network",
            GossipBroadcast => "gossip_broadcast",
            StrawmanBroadcast { d_target } => return write!(f, "strawman_broadcast:{d_target}"),
            MpcCommittee => "mpc_committee",
            MpcMultiOutput => "mpc_multi_output",
            MpcGossip => "mpc_gossip",
            MpcLocalTradeoff => "mpc_local_tradeoff",
        };
        f.write_str(name)
    }
}

impl FromStr for ProtocolId {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use ProtocolId::*;
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("strawman_broadcast") {
            let d = rest
                .strip_prefix(':')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| RunError::UnknownProtocol(format!("{s} (expected strawman_broadcast:<d_target>)")))?;
            return Ok(StrawmanBroadcast { d_target: d });
        }
        Ok(match s {
            "single_source_broadcast" => SingleSourceBroadcast,
            "all_to_all_broadcast" => AllToAllBroadcast,
            "all_to_all_echo" => AllToAllEcho,
            "committee_elect" => CommitteeElect,
            "local_committee_elect" => LocalCommitteeElect,
            "sparse_network" => SparseNetwork,
            "gossip_broadcast" => GossipBroadcast,
            "mpc_committee" => MpcCommittee,
            "mpc_multi_output" => MpcMultiOutput,
            "mpc_gossip" => MpcGossip,
            "mpc_local_tradeoff" => MpcLocalTradeoff,
            other => return Err(RunError::UnknownProtocol(other.to_string())),
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RunError {
    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("strategy `{strategy}` does not apply to `{protocol}`")]
    StrategyProtocolMismatch { strategy: String, protocol: String },
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub n: usize,
    pub h: usize,
    pub alpha: f64,
    pub lambda: u32,
    pub depth: u32,
    pub seed: u64,
    /// Overrides `CostModel::new(lambda, depth)`.
    pub cost: Option<CostModel>,
    pub adversary: Option<AdversarySpec>,
    pub abort_mode: AbortMode,
    /// Warn neighbors before aborting in responsible gossip.
    pub warn: bool,
    /// Measure communication on an all-honest rerun with the same seed.
    pub measure_honest_twin: bool,
    pub function: String,
    /// Input width in bits.
    pub width: usize,
    /// Broadcast source; `None` means party 0, or everyone for gossip.
    pub sender: Option<u32>,
}

impl RunConfig {
    pub fn new(n: usize, h: usize, seed: u64) -> Self {
        Self {
            n,
            h,
            alpha: 2.0,
            lambda: 8,
            depth: 8,
            seed,
            cost: None,
            adversary: None,
            abort_mode: AbortMode::Flag,
            warn: true,
            measure_honest_twin: true,
            function: "xor".into(),
            width: 1,
            sender: None,
        }
    }

    pub fn cost_model(&self) -> CostModel {
        self.cost.unwrap_or_else(|| CostModel::new(self.lambda, self.depth))
    }
}

/// `n` uniform inputs of `width` bits drawn from the input stream of `seed`.
pub fn random_inputs(n: usize, width: usize, seed: u64) -> Vec<BitString> {
    let mut rng = netsim::stream(seed, netsim::INPUT_STREAM);
    (0..n).map(|_| BitString::random(&mut rng, width)).collect()
}

/// Layout of a gossiped first-round object: public key, ciphertext padded to
/// `B_ct` bits per input bit, and a well-formedness proof over both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjectLayout {
    pub pk_bits: usize,
    pub ct_bits: usize,
    pub ct_slot: usize,
    pub proof_bits: usize,
}

pub fn object_layout(cost: &CostModel, ell: usize) -> ObjectLayout {
    let ct_bits = cost.ct_bits(ell);
    ObjectLayout {
        pk_bits: cost.b_pk as usize,
        ct_bits,
        ct_slot: ct_bits.max(cost.b_ct as usize * ell),
        proof_bits: cost.b_proof as usize,
    }
}

impl ObjectLayout {
    pub fn total(&self) -> usize {
        self.pk_bits + self.ct_slot + self.proof_bits
    }

    fn proof(&self, body: &BitString) -> BitString {
        expand("nizk", body, self.proof_bits)
    }

    pub fn build(&self, pk: &BitString, ct: &BitString) -> BitString {
        let mut body = pk.clone();
        body.extend(ct);
        body.extend(&BitString::zeros(self.ct_slot - ct.len()));
        let proof = self.proof(&body);
        body.extend(&proof);
        body
    }

    /// Recomputes the proof for a modified object.
    pub fn reseal(&self, object: &BitString) -> BitString {
        let body = object.slice(0, self.pk_bits + self.ct_slot);
        let proof = self.proof(&body);
        BitString::concat([&body, &proof])
    }

    /// Public key and ciphertext of a well-formed object.
    pub fn open(&self, object: &BitString) -> Option<(BitString, BitString)> {
        if object.len() != self.total() {
            return None;
        }
        let body = object.slice(0, self.pk_bits + self.ct_slot);
        if object.slice(body.len(), self.proof_bits) != self.proof(&body) {
            return None;
        }
        Some((object.slice(0, self.pk_bits), object.slice(self.pk_bits, self.ct_bits)))
    }
}

/// A party's terminal state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartyOutcome {
    /// Output slots: slot `0` for single-output protocols, one per origin
    /// for broadcasts, the party's own index for multi-output.
    Output(BTreeMap<u32, BitString>),
    Abort { round: u32, reason: AbortReason },
    Corrupted,
}

impl PartyOutcome {
    pub fn output(&self) -> Option<&BTreeMap<u32, BitString>> {
        match self {
            PartyOutcome::Output(o) => Some(o),
            _ => None,
        }
    }

    pub fn is_abort(&self) -> bool {
        matches!(self, PartyOutcome::Abort { .. })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CommSummary {
    pub total_bits: u64,
    pub max_locality: usize,
    pub rounds: u32,
}

impl CommSummary {
    fn of(metrics: &CommMetrics, rounds: u32) -> Self {
        Self {
            total_bits: metrics.total_bits(),
            max_locality: metrics.max_locality(),
            rounds,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub protocol: ProtocolId,
    pub n: usize,
    pub h: usize,
    pub seed: u64,
    pub outcomes: Vec<PartyOutcome>,
    /// Communication of the all-honest execution; `None` when an adversarial
    /// run skipped the twin.
    pub metrics: Option<CommSummary>,
    /// Bits honest parties sent in this run.
    pub observed: CommSummary,
    /// Bits corrupted parties sent in this run.
    pub adversary_bits: u64,
    pub corrupted: BTreeSet<PartyId>,
    /// What the adversary did, when there was one.
    pub attack: Option<AttackLog>,
    /// Parties that elected themselves, when the protocol elects.
    pub committee: Option<Vec<PartyId>>,
    pub degree: Option<usize>,
    /// Whether the honest parties induce a connected routing graph.
    pub honest_connected: Option<bool>,
    /// Whether every party was served by at least one honest committee
    /// member, for the local tradeoff protocol.
    pub honest_cover: Option<bool>,
    /// Inputs the oracle computed on, after decryption.
    pub boundary_inputs: Option<Vec<BitString>>,
    /// What each slot should hold.
    pub expected: BTreeMap<u32, BitString>,
    /// Non-aborted honest parties agree on every slot.
    pub consistency_ok: bool,
    /// Non-aborted honest parties hold the expected value in every slot
    /// they output.
    pub matches_evaluator: bool,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn committee_size(&self) -> Option<usize> {
        self.committee.as_ref().map(Vec::len)
    }

    pub fn honest(&self, p: PartyId) -> bool {
        !self.corrupted.contains(&p)
    }

    pub fn honest_aborts(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_abort()).count()
    }

    pub fn abort_reasons(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for o in &self.outcomes {
            if let PartyOutcome::Abort { reason, .. } = o {
                *out.entry(reason.label()).or_default() += 1;
            }
        }
        out
    }

    /// Whether any honest party output a value the protocol should not have.
    pub fn wrong_output(&self) -> bool {
        !self.matches_evaluator
    }
}

/// Protocol-level result before the report is assembled.
#[derive(Default)]
struct Exec {
    outputs: Vec<Option<BTreeMap<u32, BitString>>>,
    expected: BTreeMap<u32, BitString>,
    boundary: Option<Vec<BitString>>,
    committee: Option<Vec<PartyId>>,
    degree: Option<usize>,
    honest_connected: Option<bool>,
    honest_cover: Option<bool>,
    notes: Vec<String>,
}

struct Ctx<'c> {
    cfg: &'c RunConfig,
    protocol: ProtocolId,
    cost: CostModel,
    f: Option<FunctionSpec>,
    inputs: &'c [BitString],
}

fn validate(cfg: &RunConfig, protocol: ProtocolId, inputs: &[BitString]) -> Result<Option<FunctionSpec>, RunError> {
    let bad = |m: String| Err(RunError::ConfigInvalid(m));
    let n = cfg.n;
    if n < 2 {
        return bad(format!("n = {n}, need at least 2 parties"));
    }
    if cfg.h == 0 || cfg.h > n {
        return bad(format!("h = {} outside [1, n = {n}]", cfg.h));
    }
    if !(cfg.alpha >= 1.0) || !cfg.alpha.is_finite() {
        return bad(format!("alpha = {} must be at least 1", cfg.alpha));
    }
    if cfg.lambda == 0 || cfg.depth == 0 {
        return bad("lambda and depth must be positive".into());
    }
    if cfg.width == 0 || cfg.width > crate::crypto::PLAINTEXT_CAP {
        return bad(format!("input width {} outside [1, {}]", cfg.width, crate::crypto::PLAINTEXT_CAP));
    }
    if inputs.len() != n {
        return bad(format!("{} inputs for {n} parties", inputs.len()));
    }
    if let Some((i, x)) = inputs.iter().enumerate().find(|(_, x)| x.len() != cfg.width) {
        return bad(format!("input {i} has {} bits, expected {}", x.len(), cfg.width));
    }
    if let Some(s) = cfg.sender {
        if s as usize >= n {
            return bad(format!("sender {s} out of range"));
        }
    }
    if protocol.needs_sparse_honesty() && cfg.h as f64 <= (n as f64).log2() {
        return bad(format!("{protocol} needs h > log2 n, got h = {} at n = {n}", cfg.h));
    }
    cfg.cost_model()
        .validate()
        .map_err(|e| RunError::ConfigInvalid(e.to_string()))?;
    if let Some(adv) = &cfg.adversary {
        if adv.corrupted.len() > n - cfg.h {
            return bad(format!("{} corruptions exceed n - h = {}", adv.corrupted.len(), n - cfg.h));
        }
        if adv.corrupted.iter().any(|p| p.index() >= n) {
            return bad("corrupted party out of range".into());
        }
        if !adv.strategy.supports(protocol.features()) {
            return Err(RunError::StrategyProtocolMismatch {
                strategy: adv.strategy.to_string(),
                protocol: protocol.to_string(),
            });
        }
    }
    if !protocol.is_mpc() {
        return Ok(None);
    }
    let f = FunctionSpec::by_name(&cfg.function, n, cfg.width)
        .map_err(|e| RunError::ConfigInvalid(e.to_string()))?
        .with_depth(cfg.depth);
    let wants_multi = protocol == ProtocolId::MpcMultiOutput;
    if f.multi_output != wants_multi {
        return bad(format!(
            "{protocol} needs a {} function, `{}` is not",
            if wants_multi { "multi-output" } else { "single-output" },
            f.name
        ));
    }
    Ok(Some(f))
}

/// Runs `protocol` on `inputs`. Aborts are outcomes, not errors.
pub fn run_protocol(cfg: &RunConfig, protocol: ProtocolId, inputs: &[BitString]) -> Result<RunReport, RunError> {
    let f = validate(cfg, protocol, inputs)?;
    let cx = Ctx {
        cfg,
        protocol,
        cost: cfg.cost_model(),
        f,
        inputs,
    };

    let ((exec, statuses, metrics, adv_metrics, rounds), attack) = match &cfg.adversary {
        None => (simulate(&cx, None), None),
        Some(spec) => {
            let mut adv = spec.build(StrategyContext {
                n: cfg.n,
                cost: cx.cost,
                in_width: cfg.width,
                degree: strategy_degree(&cx),
            });
            let sim = simulate(&cx, Some((&spec.corrupted, &mut adv)));
            (sim, Some(adv.log().clone()))
        }
    };
    let observed = CommSummary::of(&metrics, rounds);
    let honest_metrics = match (&cfg.adversary, cfg.measure_honest_twin) {
        (None, _) => Some(observed),
        (Some(_), true) => {
            let (_, _, m, _, r) = simulate(&cx, None);
            Some(CommSummary::of(&m, r))
        }
        (Some(_), false) => None,
    };

    let corrupted: BTreeSet<PartyId> = cfg.adversary.as_ref().map(|a| a.corrupted.clone()).unwrap_or_default();
    let outcomes: Vec<PartyOutcome> = statuses
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let p = PartyId::from(i);
            if corrupted.contains(&p) {
                return PartyOutcome::Corrupted;
            }
            match st {
                PartyStatus::Aborted { round, reason } => PartyOutcome::Abort {
                    round: *round,
                    reason: *reason,
                },
                PartyStatus::Active => PartyOutcome::Output(exec.outputs[i].clone().unwrap_or_default()),
            }
        })
        .collect();

    let mut slots: BTreeMap<u32, BTreeSet<&BitString>> = BTreeMap::new();
    let mut matches = true;
    for o in &outcomes {
        if let PartyOutcome::Output(map) = o {
            for (slot, v) in map {
                slots.entry(*slot).or_default().insert(v);
                if exec.expected.get(slot).is_some_and(|e| e != v) {
                    matches = false;
                }
            }
        }
    }
    let consistency_ok = slots.values().all(|vs| vs.len() <= 1);

    Ok(RunReport {
        protocol,
        n: cfg.n,
        h: cfg.h,
        seed: cfg.seed,
        outcomes,
        metrics: honest_metrics,
        observed,
        adversary_bits: adv_metrics.total_bits(),
        corrupted,
        attack,
        committee: exec.committee,
        degree: exec.degree,
        honest_connected: exec.honest_connected,
        honest_cover: exec.honest_cover,
        boundary_inputs: exec.boundary,
        expected: exec.expected,
        consistency_ok,
        matches_evaluator: matches,
        notes: exec.notes,
    })
}

fn strategy_degree(cx: &Ctx<'_>) -> Option<usize> {
    let (n, h, a) = (cx.cfg.n, cx.cfg.h, cx.cfg.alpha);
    match cx.protocol {
        ProtocolId::StrawmanBroadcast { d_target } => Some(d_target.min(n - 1)),
        p if p.needs_sparse_honesty() => Some(degree(n, h, a)),
        _ => None,
    }
}

type Simulation = (Exec, Vec<PartyStatus>, CommMetrics, CommMetrics, u32);

fn simulate(cx: &Ctx<'_>, adversary: Option<(&BTreeSet<PartyId>, &mut dyn Adversary)>) -> Simulation {
    let n = cx.cfg.n;
    let mut net = Network::new(n, cx.cfg.seed);
    if let Some((corrupt, adv)) = adversary {
        net = net.with_adversary(corrupt, adv);
    }
    net.set_round_limit(2 * n as u32 + 64);
    let mut exec = match cx.protocol {
        ProtocolId::SingleSourceBroadcast => run_single_source(&mut net, cx),
        ProtocolId::AllToAllBroadcast => run_all_to_all(&mut net, cx, false),
        ProtocolId::AllToAllEcho => run_all_to_all(&mut net, cx, true),
        ProtocolId::CommitteeElect => run_election(&mut net, cx, false),
        ProtocolId::LocalCommitteeElect => run_election(&mut net, cx, true),
        ProtocolId::SparseNetwork => run_sparse(&mut net, cx),
        ProtocolId::GossipBroadcast => run_gossip_broadcast(&mut net, cx),
        ProtocolId::StrawmanBroadcast { d_target } => run_strawman(&mut net, cx, d_target),
        ProtocolId::MpcCommittee => mpc_committee(&mut net, cx),
        ProtocolId::MpcMultiOutput => mpc_multi_output(&mut net, cx),
        ProtocolId::MpcGossip => mpc_gossip(&mut net, cx),
        ProtocolId::MpcLocalTradeoff => mpc_local_tradeoff(&mut net, cx),
    };
    exec.outputs.resize(n, None);
    let (statuses, metrics, adv_metrics, rounds) = net.into_parts();
    (exec, statuses, metrics, adv_metrics, rounds)
}

fn parties(net: &Network<'_>) -> Vec<PartyId> {
    net.parties().collect()
}

fn honest_expected(net: &Network<'_>, inputs: &[BitString], slots: impl Iterator<Item = PartyId>) -> BTreeMap<u32, BitString> {
    slots
        .filter(|&p| net.is_honest(p))
        .map(|p| (p.0, inputs[p.index()].clone()))
        .collect()
}

fn run_single_source(net: &mut Network<'_>, cx: &Ctx<'_>) -> Exec {
    let sender = PartyId(cx.cfg.sender.unwrap_or(0));
    let m = &cx.inputs[sender.index()];
    let outs = single_source(net, sender, cx.cfg.width, m);
    Exec {
        outputs: outs
            .into_iter()
            .map(|o| o.map(|v| BTreeMap::from([(sender.0, v)])))
            .collect(),
        expected: honest_expected(net, cx.inputs, std::iter::once(sender)),
        ..Exec::default()
    }
}

fn run_all_to_all(net: &mut Network<'_>, cx: &Ctx<'_>, echo: bool) -> Exec {
    let views = if echo {
        all_to_all_echo(net, cx.inputs, cx.cfg.width)
    } else {
        all_to_all(net, cx.inputs, cx.cfg.width, cx.cfg.lambda, cx.cfg.abort_mode)
    };
    Exec {
        outputs: views
            .into_iter()
            .map(|v| v.map(|v| v.into_iter().enumerate().map(|(j, x)| (j as u32, x)).collect()))
            .collect(),
        expected: honest_expected(net, cx.inputs, parties(net).into_iter()),
        ..Exec::default()
    }
}

/// Electees that are still running, in index order.
fn electees(net: &Network<'_>, views: &[Option<CommitteeView>]) -> Vec<PartyId> {
    views
        .iter()
        .flatten()
        .filter(|v| v.elected && net.is_active(v.owner))
        .map(|v| v.owner)
        .collect()
}

fn honest_connected(net: &Network<'_>, graph: &RoutingGraph) -> bool {
    let keep: Vec<bool> = parties(net).into_iter().map(|p| net.is_honest(p)).collect();
    graph.induced_connected(&keep)
}

fn build_graph(net: &mut Network<'_>, cx: &Ctx<'_>, exec: &mut Exec) -> RoutingGraph {
    let d = degree(cx.cfg.n, cx.cfg.h, cx.cfg.alpha);
    let graph = sparse_network(net, d, true);
    exec.degree = Some(d);
    exec.honest_connected = Some(honest_connected(net, &graph));
    graph
}

fn gossip_opts(cx: &Ctx<'_>, max_value_bits: usize) -> GossipOptions {
    GossipOptions {
        warn: cx.cfg.warn,
        ..GossipOptions::responsible(max_value_bits)
    }
}

fn run_election(net: &mut Network<'_>, cx: &Ctx<'_>, local: bool) -> Exec {
    let (n, h, a) = (cx.cfg.n, cx.cfg.h, cx.cfg.alpha);
    let mut exec = Exec::default();
    let views = if local {
        let graph = build_graph(net, cx, &mut exec);
        local_committee_elect(net, &graph, local_election_probability(n, h, a), cx.cfg.lambda, gossip_opts(cx, 1))
    } else {
        committee_elect(net, election_probability(n, h, a), cx.cfg.lambda)
    };
    exec.committee = Some(electees(net, &views));
    // Only electees' views are checked against each other.
    exec.outputs = views
        .iter()
        .map(|v| {
            v.as_ref().map(|v| {
                if v.elected {
                    BTreeMap::from([(0, v.serialize(n))])
                } else {
                    BTreeMap::new()
                }
            })
        })
        .collect();
    exec
}

fn run_sparse(net: &mut Network<'_>, cx: &Ctx<'_>) -> Exec {
    let mut exec = Exec::default();
    let graph = build_graph(net, cx, &mut exec);
    exec.outputs = graph.neighbors.iter().map(|ns| ns.as_ref().map(|_| BTreeMap::new())).collect();
    exec
}

fn run_gossip_broadcast(net: &mut Network<'_>, cx: &Ctx<'_>) -> Exec {
    let mut exec = Exec::default();
    let graph = build_graph(net, cx, &mut exec);
    let origins: Vec<PartyId> = match cx.cfg.sender {
        Some(s) => vec![PartyId(s)],
        None => parties(net),
    };
    let mut inputs: Vec<Option<BitString>> = vec![None; cx.cfg.n];
    for &o in &origins {
        inputs[o.index()] = Some(cx.inputs[o.index()].clone());
    }
    let result = gossip(net, &graph, &inputs, gossip_opts(cx, cx.cfg.width));
    exec.outputs = result
        .views
        .into_iter()
        .map(|v| {
            v.map(|v| {
                v.into_iter()
                    .enumerate()
                    .filter_map(|(j, x)| x.map(|x| (j as u32, (*x).clone())))
                    .collect()
            })
        })
        .collect();
    exec.expected = honest_expected(net, cx.inputs, origins.into_iter());
    exec
}

fn run_strawman(net: &mut Network<'_>, cx: &Ctx<'_>, d_target: usize) -> Exec {
    let sender = PartyId(cx.cfg.sender.unwrap_or(0));
    let graph = sparse_network(net, d_target, false);
    let mut inputs: Vec<Option<BitString>> = vec![None; cx.cfg.n];
    inputs[sender.index()] = Some(cx.inputs[sender.index()].clone());
    let result = gossip(net, &graph, &inputs, GossipOptions::naive(cx.cfg.width));
    let default = BitString::zeros(cx.cfg.width);
    Exec {
        outputs: result
            .views
            .into_iter()
            .map(|v| {
                v.map(|v| {
                    let x = v[sender.index()].as_deref().cloned().unwrap_or_else(|| default.clone());
                    BTreeMap::from([(sender.0, x)])
                })
            })
            .collect(),
        expected: honest_expected(net, cx.inputs, std::iter::once(sender)),
        degree: Some(graph.d),
        honest_connected: Some(honest_connected(net, &graph)),
        ..Exec::default()
    }
}

/// One round of forwarding a value that every receiver must get identical
/// copies of. `sends` lists each sender's payload and recipients; a
/// receiver accepts copies from senders `accept(receiver, sender)` allows,
/// adds its own copy if it has one, and aborts with `Missing` on no copy or
/// `mismatch` on two different ones. Returns the agreed value and who sent
/// it, for every party in `needed` that survives.
#[allow(clippy::too_many_arguments)]
fn forward_checked(
    net: &mut Network<'_>,
    tag: Tag,
    cap: u64,
    sends: Vec<(PartyId, BitString, Vec<PartyId>)>,
    accept: impl Fn(PartyId, PartyId) -> bool,
    own: impl Fn(PartyId) -> Option<BitString>,
    needed: impl Fn(PartyId) -> bool,
    mismatch: AbortReason,
) -> Vec<Option<(BitString, Vec<PartyId>)>> {
    for (from, value, to) in sends {
        let payload = Payload::bits(value);
        for j in to.into_iter().filter(|&j| j != from) {
            net.send(from, j, tag, payload.clone());
        }
    }
    let inbox = net.exchange(|m| {
        if m.tag == tag && accept(m.to, m.from) {
            Allowance::Upto(cap)
        } else {
            Allowance::Ignore
        }
    });
    let mut out = vec![None; net.n()];
    for p in parties(net) {
        if !net.is_active(p) || !needed(p) {
            continue;
        }
        let mut copies: Vec<(PartyId, &BitString)> = inbox
            .of(p)
            .iter()
            .filter(|m| m.tag == tag)
            .filter_map(|m| m.payload.as_bits().map(|b| (m.from, b)))
            .collect();
        let mine = own(p);
        if let Some(v) = &mine {
            copies.push((p, v));
        }
        match copies.first() {
            None => net.abort(p, AbortReason::Missing),
            Some((_, first)) if copies.iter().any(|(_, c)| c != first) => net.abort(p, mismatch),
            Some((_, first)) => {
                let value = (*first).clone();
                let from = copies.iter().map(|(s, _)| *s).filter(|&s| s != p).collect();
                out[p.index()] = Some((value, from));
            }
        }
    }
    out
}

/// Every party in `targets[i]` gets party `i`'s ciphertext.
fn send_ciphertexts(
    net: &mut Network<'_>,
    cts: &[Option<BitString>],
    targets: &[Vec<PartyId>],
    cap: u64,
    accept: impl Fn(PartyId, PartyId) -> bool,
) -> Inbox {
    for p in parties(net) {
        if let Some(ct) = &cts[p.index()] {
            let payload = Payload::bits(ct.clone());
            for &c in targets[p.index()].iter().filter(|&&c| c != p) {
                net.send(p, c, TAG_CT, payload.clone());
            }
        }
    }
    net.exchange(|m| {
        if m.tag == TAG_CT && accept(m.to, m.from) {
            Allowance::Upto(cap)
        } else {
            Allowance::Ignore
        }
    })
}

/// Ciphertext vector committee member `c` holds: its own plus what arrived.
fn ciphertext_vector(inbox: &Inbox, c: PartyId, own: &Option<BitString>, n: usize) -> Vec<Option<BitString>> {
    let mut w: Vec<Option<BitString>> = vec![None; n];
    for m in inbox.of(c).iter().filter(|m| m.tag == TAG_CT) {
        if let Some(b) = m.payload.as_bits() {
            w[m.from.index()].get_or_insert_with(|| b.clone());
        }
    }
    w[c.index()] = own.clone();
    w
}

/// Pairwise fingerprint tests over the members' ciphertext vectors.
fn compare_vectors(net: &mut Network<'_>, lambda: u32, views: &[Option<CommitteeView>], w: &[Option<Vec<Option<BitString>>>]) {
    let partners: Vec<Vec<PartyId>> = views
        .iter()
        .zip(w)
        .map(|(v, w)| match (v, w) {
            (Some(v), Some(_)) if v.elected => v.others().collect(),
            _ => Vec::new(),
        })
        .collect();
    let strings: Vec<Option<Arc<BitString>>> = w.iter().map(|w| w.as_ref().map(|w| Arc::new(serialize_vector(w)))).collect();
    pairwise_equality(net, (TAG_CT_PROBE, TAG_CT_REPLY), lambda, &partners, &strings, false, true);
}

/// The ciphertext vector submitted to the oracle: the lowest running honest
/// member's, which every running honest member shares once the tests pass.
fn submitted(net: &Network<'_>, members: &[PartyId], w: &[Option<Vec<Option<BitString>>>]) -> Option<Vec<Option<BitString>>> {
    let running = |p: &&PartyId| net.is_active(**p) && w[p.index()].is_some();
    let pick = members
        .iter()
        .filter(running)
        .find(|p| net.is_honest(**p))
        .or_else(|| members.iter().find(running))?;
    w[pick.index()].clone()
}

fn in_view(views: &[Option<CommitteeView>]) -> impl Fn(PartyId, PartyId) -> bool + '_ {
    move |receiver, sender| views[receiver.index()].as_ref().is_some_and(|v| v.contains(sender))
}

fn abort_all_waiting(net: &mut Network<'_>) {
    for p in parties(net) {
        net.abort(p, AbortReason::Missing);
    }
}

fn elect_clique(net: &mut Network<'_>, cx: &Ctx<'_>, exec: &mut Exec) -> (Vec<Option<CommitteeView>>, Vec<PartyId>) {
    let p = election_probability(cx.cfg.n, cx.cfg.h, cx.cfg.alpha);
    if p >= 1.0 {
        exec.notes.push("election probability clipped to 1: committee is every party".into());
    }
    let views = committee_elect(net, p, cx.cfg.lambda);
    let members = electees(net, &views);
    exec.committee = Some(members.clone());
    (views, members)
}

fn encrypt_inputs(net: &mut Network<'_>, backend: &mut MockBackend, cx: &Ctx<'_>, pk: &[Option<KeyMaterial>]) -> Vec<Option<BitString>> {
    parties(net)
        .into_iter()
        .map(|p| {
            let pk = pk[p.index()].as_ref()?;
            net.is_active(p).then(|| {
                backend
                    .pke_enc(pk, &cx.inputs[p.index()])
                    .expect("input width within the plaintext cap")
            })
        })
        .collect()
}

fn mpc_committee(net: &mut Network<'_>, cx: &Ctx<'_>) -> Exec {
    let n = cx.cfg.n;
    let f = cx.f.as_ref().expect("validated");
    let mut exec = Exec::default();
    let mut backend = MockBackend::new(cx.cost);
    let (views, members) = elect_clique(net, cx, &mut exec);
    if members.is_empty() {
        abort_all_waiting(net);
        return exec;
    }
    let key = f_gen(net, &mut backend, &members, KeyKind::EncPublic, TAG_FGEN);

    let everyone = parties(net);
    let sends = members
        .iter()
        .filter(|&&c| net.is_active(c))
        .map(|&c| (c, key.public.bits.clone(), everyone.clone()))
        .collect();
    let is_member = |p: PartyId| members.binary_search(&p).is_ok();
    let pks = forward_checked(
        net,
        TAG_PK,
        cx.cost.b_pk,
        sends,
        in_view(&views),
        |p| is_member(p).then(|| key.public.bits.clone()),
        |_| true,
        AbortReason::PkMismatch,
    );
    let pk: Vec<Option<KeyMaterial>> = pks
        .into_iter()
        .map(|x| {
            x.map(|(bits, _)| KeyMaterial {
                kind: KeyKind::EncPublic,
                bits,
            })
        })
        .collect();

    let cts = encrypt_inputs(net, &mut backend, cx, &pk);
    let targets: Vec<Vec<PartyId>> = views
        .iter()
        .map(|v| v.as_ref().map(|v| v.others().collect()).unwrap_or_default())
        .collect();
    let inbox = send_ciphertexts(net, &cts, &targets, cx.cost.ct_bits(cx.cfg.width) as u64, |to, _| is_member(to));
    let mut w: Vec<Option<Vec<Option<BitString>>>> = vec![None; n];
    for &c in &members {
        if net.is_active(c) {
            w[c.index()] = Some(ciphertext_vector(&inbox, c, &cts[c.index()], n));
        }
    }
    compare_vectors(net, cx.cfg.lambda, &views, &w);

    finish_single_output(net, &mut backend, &key, &views, &members, &w, f, &mut exec, None);
    exec
}

/// Oracle call and output forwarding shared by the two single-output
/// committee protocols. With `recipients`, member `c` forwards only to
/// `recipients[c]`; otherwise to everyone.
#[allow(clippy::too_many_arguments)]
fn finish_single_output(
    net: &mut Network<'_>,
    backend: &mut MockBackend,
    key: &KeyDelivery,
    views: &[Option<CommitteeView>],
    members: &[PartyId],
    w: &[Option<Vec<Option<BitString>>>],
    f: &FunctionSpec,
    exec: &mut Exec,
    recipients: Option<&[Vec<PartyId>]>,
) {
    let Some(vector) = submitted(net, members, w) else {
        abort_all_waiting(net);
        return;
    };
    let participants: Vec<PartyId> = members.iter().copied().filter(|&c| net.is_active(c)).collect();
    let delivery = f_comp(net, backend, key, &participants, &vector, f, Spread::Pairs, TAG_FCOMP);
    let y = delivery.evaluation.outputs[0].clone();
    exec.expected = BTreeMap::from([(0, y.clone())]);
    exec.boundary = Some(delivery.evaluation.effective_inputs);

    let everyone = parties(net);
    let sends = participants
        .iter()
        .filter(|&&c| net.is_active(c))
        .map(|&c| {
            let to = match recipients {
                Some(r) => r[c.index()].clone(),
                None => everyone.clone(),
            };
            (c, y.clone(), to)
        })
        .collect();
    let holds = |p: PartyId| participants.binary_search(&p).is_ok();
    let outs = forward_checked(
        net,
        TAG_OUT,
        f.out_width as u64,
        sends,
        in_view(views),
        |p| holds(p).then(|| y.clone()),
        |_| true,
        AbortReason::OutputMismatch,
    );
    exec.outputs = outs
        .into_iter()
        .map(|o| o.map(|(v, _)| BTreeMap::from([(0, v)])))
        .collect();
}

fn mpc_multi_output(net: &mut Network<'_>, cx: &Ctx<'_>) -> Exec {
    let n = cx.cfg.n;
    let f = cx.f.as_ref().expect("validated");
    let cost = cx.cost;
    let mut exec = Exec::default();
    let mut backend = MockBackend::new(cost);
    let (views, members) = elect_clique(net, cx, &mut exec);
    if members.is_empty() {
        abort_all_waiting(net);
        return exec;
    }
    let enc = f_gen(net, &mut backend, &members, KeyKind::EncPublic, TAG_FGEN);
    let sig = f_gen(net, &mut backend, &members, KeyKind::SigPublic, TAG_FGEN_SIG);
    let both = BitString::concat([&enc.public.bits, &sig.public.bits]);
    let pk_len = enc.public.bits.len();

    let everyone = parties(net);
    let sends = members
        .iter()
        .filter(|&&c| net.is_active(c))
        .map(|&c| (c, both.clone(), everyone.clone()))
        .collect();
    let is_member = |p: PartyId| members.binary_search(&p).is_ok();
    let keys = forward_checked(
        net,
        TAG_PK,
        both.len() as u64,
        sends,
        in_view(&views),
        |p| is_member(p).then(|| both.clone()),
        |_| true,
        AbortReason::PkMismatch,
    );
    let split = |b: &BitString| {
        (b.len() == 2 * pk_len).then(|| {
            (
                KeyMaterial {
                    kind: KeyKind::EncPublic,
                    bits: b.slice(0, pk_len),
                },
                KeyMaterial {
                    kind: KeyKind::SigPublic,
                    bits: b.slice(pk_len, pk_len),
                },
            )
        })
    };
    let keys: Vec<Option<(KeyMaterial, KeyMaterial)>> = keys
        .into_iter()
        .map(|k| k.and_then(|(b, _)| split(&b)))
        .collect();

    // Each party seals its input and a fresh symmetric key under the joint key.
    let mut sym: Vec<Option<KeyMaterial>> = vec![None; n];
    let mut cts: Vec<Option<BitString>> = vec![None; n];
    for p in parties(net) {
        let Some((pk, _)) = &keys[p.index()] else { continue };
        if !net.is_active(p) {
            continue;
        }
        let k = backend.ske_gen(net.party_rng(p));
        let ct_x = backend.pke_enc(pk, &cx.inputs[p.index()]).expect("width within cap");
        let ct_k = backend.pke_enc(pk, &k.bits).expect("key within cap");
        cts[p.index()] = Some(BitString::concat([&ct_x, &ct_k]));
        sym[p.index()] = Some(k);
    }
    let ct_x_bits = cost.ct_bits(cx.cfg.width);
    let cap = (ct_x_bits + cost.ct_bits(cost.b_skey as usize)) as u64;
    let targets: Vec<Vec<PartyId>> = views
        .iter()
        .map(|v| v.as_ref().map(|v| v.others().collect()).unwrap_or_default())
        .collect();
    let inbox = send_ciphertexts(net, &cts, &targets, cap, |to, _| is_member(to));
    let mut w: Vec<Option<Vec<Option<BitString>>>> = vec![None; n];
    for &c in &members {
        if net.is_active(c) {
            w[c.index()] = Some(ciphertext_vector(&inbox, c, &cts[c.index()], n));
        }
    }
    compare_vectors(net, cx.cfg.lambda, &views, &w);

    let Some(vector) = submitted(net, &members, &w) else {
        abort_all_waiting(net);
        return exec;
    };
    let halves = |slot: &Option<BitString>, first: bool| {
        slot.as_ref().filter(|b| b.len() > ct_x_bits).map(|b| {
            if first {
                b.slice(0, ct_x_bits)
            } else {
                b.slice(ct_x_bits, b.len() - ct_x_bits)
            }
        })
    };
    let w_x: Vec<Option<BitString>> = vector.iter().map(|s| halves(s, true)).collect();
    let w_k: Vec<Option<BitString>> = vector.iter().map(|s| halves(s, false)).collect();
    let participants: Vec<PartyId> = members.iter().copied().filter(|&c| net.is_active(c)).collect();
    if participants.is_empty() {
        abort_all_waiting(net);
        return exec;
    }
    let delivery = f_comp_sign(net, &mut backend, &enc, &sig, &participants, &w_x, &w_k, f, TAG_FCOMP);
    exec.expected = delivery
        .evaluation
        .outputs
        .iter()
        .enumerate()
        .map(|(i, y)| (i as u32, y.clone()))
        .collect();
    exec.boundary = Some(delivery.evaluation.effective_inputs.clone());

    // The designated member hands each party its sealed, signed output.
    let designated = delivery.designated;
    let own_pair = |p: PartyId| {
        delivery
            .outputs
            .as_ref()
            .map(|outs| BitString::concat([&outs[p.index()].ct, &outs[p.index()].sigma]))
    };
    if net.is_active(designated) {
        if let Some(outs) = &delivery.outputs {
            for p in parties(net).into_iter().filter(|&p| p != designated) {
                let pair = BitString::concat([&outs[p.index()].ct, &outs[p.index()].sigma]);
                net.send(designated, p, TAG_FWD, Payload::bits(pair));
            }
        }
    }
    let fwd_cap = (cost.ct_bits(f.out_width) + cost.b_sig as usize) as u64;
    let first_member = |p: PartyId| views[p.index()].as_ref().and_then(|v| v.members.first().copied());
    let inbox = net.exchange(|m| {
        if m.tag == TAG_FWD && first_member(m.to) == Some(m.from) {
            Allowance::Upto(fwd_cap)
        } else {
            Allowance::Ignore
        }
    });
    let ct_out_bits = cost.ct_bits(f.out_width);
    exec.outputs = vec![None; n];
    for p in parties(net) {
        if !net.is_active(p) {
            continue;
        }
        let pair = if p == designated {
            own_pair(p)
        } else {
            inbox
                .of(p)
                .iter()
                .find(|m| m.tag == TAG_FWD)
                .and_then(|m| m.payload.as_bits().cloned())
        };
        let (Some(pair), Some((_, vk)), Some(k)) = (pair, &keys[p.index()], &sym[p.index()]) else {
            net.abort(p, AbortReason::Missing);
            continue;
        };
        if pair.len() != fwd_cap as usize {
            net.abort(p, AbortReason::SignatureReject);
            continue;
        }
        let ct = pair.slice(0, ct_out_bits);
        let sigma = pair.slice(ct_out_bits, pair.len() - ct_out_bits);
        if !backend.sig_verify(vk, &ct, &sigma) {
            net.abort(p, AbortReason::SignatureReject);
            continue;
        }
        match backend.ske_dec(k, &ct) {
            Ok(y) => exec.outputs[p.index()] = Some(BTreeMap::from([(p.0, y)])),
            Err(_) => net.abort(p, AbortReason::DecryptFailure),
        }
    }
    exec
}

fn mpc_gossip(net: &mut Network<'_>, cx: &Ctx<'_>) -> Exec {
    let n = cx.cfg.n;
    let f = cx.f.as_ref().expect("validated");
    let mut exec = Exec::default();
    let mut backend = MockBackend::new(cx.cost);
    let graph = build_graph(net, cx, &mut exec);
    let layout = object_layout(&cx.cost, cx.cfg.width);

    // Each party's first-round object: its own key and encrypted input.
    let mut secret: Vec<KeyMaterial> = Vec::with_capacity(n);
    let mut objects: Vec<Option<BitString>> = vec![None; n];
    for p in parties(net) {
        let r = BitString::random(net.party_rng(p), cx.cost.lambda as usize);
        let (pk, sk) = backend.pke_gen(&r);
        if net.is_active(p) {
            let ct = backend.pke_enc(&pk, &cx.inputs[p.index()]).expect("width within cap");
            objects[p.index()] = Some(layout.build(&pk.bits, &ct));
        }
        secret.push(sk);
    }
    let result = gossip(
        net,
        &graph,
        &objects,
        GossipOptions {
            tag: TAG_OBJ,
            ..gossip_opts(cx, layout.total())
        },
    );

    // The oracle decrypts each participant's view with the origins' keys.
    let participants: Vec<PartyId> = parties(net)
        .into_iter()
        .filter(|&p| net.is_active(p) && result.views[p.index()].is_some())
        .collect();
    let zero = BitString::zeros(cx.cfg.width);
    let mut per_party: BTreeMap<PartyId, (Vec<BitString>, BitString)> = BTreeMap::new();
    let mut cache: BTreeMap<Vec<Option<Arc<BitString>>>, (Vec<BitString>, BitString)> = BTreeMap::new();
    for &p in &participants {
        let view = result.views[p.index()].clone().expect("filtered");
        let entry = cache
            .entry(view.clone())
            .or_insert_with(|| {
                let xs: Vec<BitString> = view
                    .iter()
                    .enumerate()
                    .map(|(j, obj)| {
                        obj.as_deref()
                            .and_then(|o| layout.open(o))
                            .and_then(|(_, ct)| backend.pke_dec(&secret[j], &ct).ok())
                            .filter(|x| x.len() == cx.cfg.width)
                            .unwrap_or_else(|| zero.clone())
                    })
                    .collect();
                let y = f.evaluate(&xs).expect("normalized")[0].clone();
                (xs, y)
            })
            .clone();
        per_party.insert(p, entry);
    }
    let edges: Vec<(PartyId, PartyId)> = graph
        .directed_edges()
        .into_iter()
        .filter(|&(a, b)| net.is_active(a) && net.is_active(b))
        .collect();
    let total = output_charge(&cx.cost, participants.len(), f.total_output_bits() as u64);
    apply_charge(net, &participants, &Spread::Edges(&edges), total, TAG_FCOMP);
    selective_abort(net, TAG_FCOMP, &participants);
    net.idle_round();

    let reference = participants
        .iter()
        .find(|&&p| net.is_honest(p))
        .or(participants.first())
        .and_then(|p| per_party.get(p));
    if let Some((xs, y)) = reference {
        exec.boundary = Some(xs.clone());
        exec.expected = BTreeMap::from([(0, y.clone())]);
    }
    exec.outputs = vec![None; n];
    for (p, (_, y)) in per_party {
        if net.is_active(p) {
            exec.outputs[p.index()] = Some(BTreeMap::from([(0, y)]));
        }
    }
    exec
}

/// Size of each member's served subset: `ceil(n / sqrt(h))`, at most `n - 1`.
pub fn subset_size(n: usize, h: usize) -> usize {
    ((n as f64 / (h as f64).sqrt()).ceil() as usize).min(n - 1)
}

fn serialize_ct_list(list: &[(PartyId, BitString)], n: usize) -> BitString {
    let w = index_width(n);
    let mut out = BitString::new();
    for (i, ct) in list {
        out.push_uint(i.0 as u64, w);
        out.extend(ct);
    }
    out
}

fn parse_ct_list(bits: &BitString, n: usize, ct_bits: usize) -> Option<Vec<(PartyId, BitString)>> {
    let w = index_width(n);
    let step = w + ct_bits;
    if !bits.len().is_multiple_of(step) {
        return None;
    }
    (0..bits.len() / step)
        .map(|k| {
            let i = bits.read_uint(k * step, w) as usize;
            (i < n).then(|| (PartyId::from(i), bits.slice(k * step + w, ct_bits)))
        })
        .collect()
}

fn mpc_local_tradeoff(net: &mut Network<'_>, cx: &Ctx<'_>) -> Exec {
    let (n, h, alpha) = (cx.cfg.n, cx.cfg.h, cx.cfg.alpha);
    let f = cx.f.as_ref().expect("validated");
    let cost = cx.cost;
    let mut exec = Exec::default();
    let mut backend = MockBackend::new(cost);
    let graph = build_graph(net, cx, &mut exec);
    let p = local_election_probability(n, h, alpha);
    if p >= 1.0 {
        exec.notes.push("election probability clipped to 1: committee is every party".into());
    }
    let views = local_committee_elect(net, &graph, p, cx.cfg.lambda, gossip_opts(cx, 1));
    let members = electees(net, &views);
    exec.committee = Some(members.clone());
    if members.is_empty() {
        abort_all_waiting(net);
        return exec;
    }
    let key = f_gen(net, &mut backend, &members, KeyKind::EncPublic, TAG_FGEN);

    // Each member serves a random subset S_c.
    let s = subset_size(n, h);
    let mut serves: Vec<Vec<PartyId>> = vec![Vec::new(); n];
    for &c in &members {
        let mut picks: Vec<PartyId> = sample(net.party_rng(c), n - 1, s)
            .into_iter()
            .map(|x| PartyId::from(if x < c.index() { x } else { x + 1 }))
            .collect();
        picks.sort_unstable();
        serves[c.index()] = picks;
    }
    let mut covered = vec![false; n];
    for &c in members.iter().filter(|&&c| net.is_honest(c)) {
        covered[c.index()] = true;
        for &j in &serves[c.index()] {
            covered[j.index()] = true;
        }
    }
    exec.honest_cover = Some(covered.iter().all(|&x| x));

    let is_member = |p: PartyId| members.binary_search(&p).is_ok();
    let sends = members
        .iter()
        .filter(|&&c| net.is_active(c))
        .map(|&c| (c, key.public.bits.clone(), serves[c.index()].clone()))
        .collect();
    // A party no member serves hears no key and aborts at the deadline.
    let pks = forward_checked(
        net,
        TAG_PK,
        cost.b_pk,
        sends,
        in_view(&views),
        |p| is_member(p).then(|| key.public.bits.clone()),
        |_| true,
        AbortReason::PkMismatch,
    );
    let mut pk: Vec<Option<KeyMaterial>> = vec![None; n];
    let mut served_by: Vec<Vec<PartyId>> = vec![Vec::new(); n];
    for (i, x) in pks.into_iter().enumerate() {
        if let Some((bits, from)) = x {
            pk[i] = Some(KeyMaterial {
                kind: KeyKind::EncPublic,
                bits,
            });
            served_by[i] = from;
        }
    }

    let ct_bits = cost.ct_bits(cx.cfg.width);
    let cts = encrypt_inputs(net, &mut backend, cx, &pk);
    let inbox = send_ciphertexts(net, &cts, &served_by, ct_bits as u64, |to, from| {
        serves[to.index()].binary_search(&from).is_ok()
    });

    // Members pool their (i, ct_i) pairs and abort on any conflict.
    let mut lists: Vec<Option<Vec<(PartyId, BitString)>>> = vec![None; n];
    let running: Vec<PartyId> = members.iter().copied().filter(|&c| net.is_active(c)).collect();
    for &c in &running {
        let mut list: Vec<(PartyId, BitString)> = inbox
            .of(c)
            .iter()
            .filter(|m| m.tag == TAG_CT && serves[c.index()].binary_search(&m.from).is_ok())
            .filter_map(|m| m.payload.as_bits().filter(|b| b.len() == ct_bits).map(|b| (m.from, b.clone())))
            .collect();
        if let Some(own) = &cts[c.index()] {
            list.push((c, own.clone()));
        }
        list.sort_by_key(|(i, _)| *i);
        list.dedup_by_key(|(i, _)| *i);
        let payload = Payload::bits(serialize_ct_list(&list, n));
        if let Some(v) = &views[c.index()] {
            for o in v.others() {
                net.send(c, o, TAG_CTLIST, payload.clone());
            }
        }
        lists[c.index()] = Some(list);
    }
    let list_cap = (n * (index_width(n) + ct_bits)) as u64;
    let accept = in_view(&views);
    let inbox = net.exchange(|m| {
        if m.tag == TAG_CTLIST && is_member(m.to) && accept(m.to, m.from) {
            Allowance::Upto(list_cap)
        } else {
            Allowance::Ignore
        }
    });
    let mut w: Vec<Option<Vec<Option<BitString>>>> = vec![None; n];
    for &c in &running {
        if !net.is_active(c) {
            continue;
        }
        let Some(own) = &lists[c.index()] else { continue };
        let mut vector: Vec<Option<BitString>> = vec![None; n];
        let mut conflict = false;
        let received = inbox
            .of(c)
            .iter()
            .filter(|m| m.tag == TAG_CTLIST)
            .filter_map(|m| m.payload.as_bits().and_then(|b| parse_ct_list(b, n, ct_bits)));
        for (i, ct) in own.iter().cloned().chain(received.flatten()) {
            match &vector[i.index()] {
                Some(have) if *have != ct => conflict = true,
                Some(_) => {}
                None => vector[i.index()] = Some(ct),
            }
        }
        if conflict {
            net.abort(c, AbortReason::Equivocation);
        } else {
            w[c.index()] = Some(vector);
        }
    }
    compare_vectors(net, cx.cfg.lambda, &views, &w);

    finish_single_output(net, &mut backend, &key, &views, &members, &w, f, &mut exec, Some(&serves));
    exec
}
