//! Synchronous lockstep point-to-point network.
//!
//! Protocol code queues messages with [`Network::send`] and ends the round with
//! [`Network::exchange`], which lets the adversary act (rushing), enforces each
//! receiver's bit budget, charges metrics, and hands back the inboxes. Messages
//! queued in round `r` are visible only after the exchange that closes `r`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::adversary::Adversary;
use crate::bits::{index_width, BitString};

pub type Tag = &'static str;

/// Bits of the length prefix in front of every rumor value.
pub const RUMOR_LEN_BITS: usize = 16;

const ADVERSARY_STREAM: u64 = 1 << 62;
const ENVIRONMENT_STREAM: u64 = (1 << 62) + 1;
/// Stream the harness draws party inputs from.
pub const INPUT_STREAM: u64 = (1 << 62) + 2;
/// Stream used to pick corruption sets.
pub const CORRUPTION_STREAM: u64 = (1 << 62) + 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyId(pub u32);

impl PartyId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for PartyId {
    fn from(i: usize) -> Self {
        PartyId(u32::try_from(i).expect("party index fits in u32"))
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// One `(origin, value)` rumor or a WARN for that origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub origin: PartyId,
    pub body: EntryBody,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryBody {
    Value(Arc<BitString>),
    Warn,
}

/// A batch of indexed entries sent as one message.
///
/// Wire size per entry: the origin index, a one-bit value/WARN marker and, for
/// values, a 16-bit length followed by the value itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryBundle {
    id_bits: usize,
    entries: Vec<Entry>,
    bits: u64,
}

impl EntryBundle {
    pub fn new(n: usize) -> Self {
        Self {
            id_bits: index_width(n),
            entries: Vec::new(),
            bits: 0,
        }
    }

    pub fn entry_bits(n: usize, value_bits: Option<usize>) -> u64 {
        let base = index_width(n) as u64 + 1;
        match value_bits {
            Some(v) => base + RUMOR_LEN_BITS as u64 + v as u64,
            None => base,
        }
    }

    pub fn push(&mut self, entry: Entry) {
        self.bits += match &entry.body {
            EntryBody::Value(v) => {
                assert!(v.len() < 1 << RUMOR_LEN_BITS, "rumor value too long");
                (self.id_bits + 1 + RUMOR_LEN_BITS + v.len()) as u64
            }
            EntryBody::Warn => (self.id_bits + 1) as u64,
        };
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Vec<Entry> {
        &mut self.entries
    }

    /// Recomputes the cached size after direct edits through `entries_mut`.
    pub fn recount(&mut self) {
        let entries = std::mem::take(&mut self.entries);
        self.bits = 0;
        for e in entries {
            self.push(e);
        }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Bits(Arc<BitString>),
    Entries(Arc<EntryBundle>),
}

impl Payload {
    pub fn bits(b: BitString) -> Self {
        Payload::Bits(Arc::new(b))
    }

    pub fn len_bits(&self) -> u64 {
        match self {
            Payload::Bits(b) => b.len() as u64,
            Payload::Entries(e) => e.bits(),
        }
    }

    pub fn as_bits(&self) -> Option<&BitString> {
        match self {
            Payload::Bits(b) => Some(b),
            Payload::Entries(_) => None,
        }
    }

    pub fn as_entries(&self) -> Option<&EntryBundle> {
        match self {
            Payload::Entries(e) => Some(e),
            Payload::Bits(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub from: PartyId,
    pub to: PartyId,
    pub round: u32,
    pub tag: Tag,
    pub payload: Payload,
}

impl Message {
    pub fn bits(&self) -> u64 {
        self.payload.len_bits()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AbortReason {
    /// A fingerprint comparison with a peer failed.
    EqualityFail,
    /// Received public-key copies disagree.
    PkMismatch,
    /// Received output copies disagree.
    OutputMismatch,
    /// More bits arrived than the schedule allows.
    Flood,
    /// Conflicting values for one logical message.
    Equivocation,
    /// Too many self-declared committee members.
    Threshold,
    /// An expected message never arrived.
    Missing,
    /// A forwarded output failed signature verification.
    SignatureReject,
    /// A ciphertext did not decrypt under the party's key.
    DecryptFailure,
    /// The functionality returned the abort symbol.
    Oracle,
    /// A peer announced an abort.
    AbortFlag,
    /// A neighbor warned about a conflicting rumor.
    Warned,
    /// Too many incoming routing-graph notifications.
    DegreeExceeded,
    /// The protocol's round bound elapsed.
    RoundLimit,
}

impl AbortReason {
    pub fn label(self) -> &'static str {
        match self {
            AbortReason::EqualityFail => "equality-fail",
            AbortReason::PkMismatch => "pk-mismatch",
            AbortReason::OutputMismatch => "output-mismatch",
            AbortReason::Flood => "flood",
            AbortReason::Equivocation => "equivocation",
            AbortReason::Threshold => "threshold",
            AbortReason::Missing => "missing",
            AbortReason::SignatureReject => "signature-reject",
            AbortReason::DecryptFailure => "decrypt-failure",
            AbortReason::Oracle => "oracle",
            AbortReason::AbortFlag => "abort-flag",
            AbortReason::Warned => "warned",
            AbortReason::DegreeExceeded => "degree-exceeded",
            AbortReason::RoundLimit => "round-limit",
        }
    }
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartyStatus {
    Active,
    Aborted { round: u32, reason: AbortReason },
}

/// How many bits a receiver accepts from one `(sender, tag)` in one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Allowance {
    /// Not part of the schedule: dropped without effect.
    Ignore,
    /// Cumulative cap; exceeding it aborts the receiver.
    Upto(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Drop,
    Abort,
}

/// Size-only flood guard: `used` is the running total already received from
/// this `(sender, round, tag)` and is updated on acceptance.
pub fn enforce_budget(used: &mut u64, bits: u64, allowance: Allowance) -> Verdict {
    match allowance {
        Allowance::Ignore => Verdict::Drop,
        Allowance::Upto(cap) => {
            let total = *used + bits;
            if total > cap {
                Verdict::Abort
            } else {
                *used = total;
                Verdict::Accept
            }
        }
    }
}

/// Bit counts per `(sender, receiver, round)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommMetrics {
    n: usize,
    bits_sent: BTreeMap<(PartyId, PartyId, u32), u64>,
}

impl CommMetrics {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            bits_sent: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, from: PartyId, to: PartyId, round: u32, bits: u64) {
        if bits == 0 {
            return;
        }
        *self.bits_sent.entry((from, to, round)).or_default() += bits;
    }

    pub fn bits_sent(&self) -> &BTreeMap<(PartyId, PartyId, u32), u64> {
        &self.bits_sent
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_sent.values().sum()
    }

    pub fn sent_by(&self, p: PartyId) -> u64 {
        self.bits_sent
            .iter()
            .filter(|((f, _, _), _)| *f == p)
            .map(|(_, b)| b)
            .sum()
    }

    /// Distinct counterparties of every party, in either direction.
    pub fn localities(&self) -> Vec<usize> {
        let mut peers: Vec<BTreeSet<PartyId>> = vec![BTreeSet::new(); self.n];
        for &(from, to, _) in self.bits_sent.keys() {
            peers[from.index()].insert(to);
            peers[to.index()].insert(from);
        }
        peers.iter().map(BTreeSet::len).collect()
    }

    pub fn locality(&self, p: PartyId) -> usize {
        self.localities()[p.index()]
    }

    pub fn max_locality(&self) -> usize {
        self.localities().into_iter().max().unwrap_or(0)
    }
}

/// Everything the adversary sees and controls in one round.
pub struct RoundView<'a> {
    pub round: u32,
    pub n: usize,
    pub corrupted: &'a [bool],
    /// Honest messages addressed to corrupted parties this round.
    pub inbound: &'a [Message],
    /// Messages corrupted parties will send; starts as their default behavior.
    pub outbound: Vec<Message>,
    pub rng: &'a mut ChaCha12Rng,
}

impl RoundView<'_> {
    pub fn is_corrupted(&self, p: PartyId) -> bool {
        self.corrupted[p.index()]
    }
}

/// Per-receiver messages delivered by one exchange.
#[derive(Debug, Default)]
pub struct Inbox {
    per_party: Vec<Vec<Message>>,
    traffic: usize,
}

impl Inbox {
    pub fn of(&self, p: PartyId) -> &[Message] {
        &self.per_party[p.index()]
    }

    /// What `p` received from `sender`; inboxes are sorted by sender.
    pub fn from(&self, p: PartyId, sender: PartyId) -> &[Message] {
        let msgs = &self.per_party[p.index()];
        let lo = msgs.partition_point(|m| m.from < sender);
        let hi = lo + msgs[lo..].partition_point(|m| m.from == sender);
        &msgs[lo..hi]
    }

    /// Messages sent this round by anyone, delivered or not.
    pub fn traffic(&self) -> usize {
        self.traffic
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub from: PartyId,
    pub to: PartyId,
    pub round: u32,
    pub tag: Tag,
    pub bits: u64,
}

pub struct Network<'a> {
    n: usize,
    round: u32,
    round_limit: u32,
    corrupted: Vec<bool>,
    status: Vec<PartyStatus>,
    outbox: Vec<Message>,
    metrics: CommMetrics,
    adversary_metrics: CommMetrics,
    adversary: Option<&'a mut dyn Adversary>,
    party_rngs: Vec<ChaCha12Rng>,
    adversary_rng: ChaCha12Rng,
    env_rng: ChaCha12Rng,
    trace: Option<Vec<TraceEntry>>,
}

/// Independent ChaCha stream `id` under the root `seed`. Party `i` uses
/// stream `i`.
pub fn stream(seed: u64, id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl<'a> Network<'a> {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            round: 0,
            round_limit: u32::MAX,
            corrupted: vec![false; n],
            status: vec![PartyStatus::Active; n],
            outbox: Vec::new(),
            metrics: CommMetrics::new(n),
            adversary_metrics: CommMetrics::new(n),
            adversary: None,
            party_rngs: (0..n as u64).map(|i| stream(seed, i)).collect(),
            adversary_rng: stream(seed, ADVERSARY_STREAM),
            env_rng: stream(seed, ENVIRONMENT_STREAM),
            trace: None,
        }
    }

    pub fn with_adversary(
        mut self,
        corrupted: &BTreeSet<PartyId>,
        adversary: &'a mut dyn Adversary,
    ) -> Self {
        for p in corrupted {
            self.corrupted[p.index()] = true;
        }
        self.adversary = Some(adversary);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parties(&self) -> impl Iterator<Item = PartyId> {
        (0..self.n).map(PartyId::from)
    }

    /// Current round: messages sent now are delivered by the next exchange.
    pub fn round(&self) -> u32 {
        self.round
    }

    /// Parties still running past this round abort with `RoundLimit`.
    pub fn set_round_limit(&mut self, limit: u32) {
        self.round_limit = limit;
    }

    pub fn is_corrupted(&self, p: PartyId) -> bool {
        self.corrupted[p.index()]
    }

    pub fn corrupted(&self) -> &[bool] {
        &self.corrupted
    }

    pub fn is_honest(&self, p: PartyId) -> bool {
        !self.is_corrupted(p)
    }

    /// Corrupted parties always count as active: their default logic keeps
    /// running and the adversary decides what actually gets sent.
    pub fn is_active(&self, p: PartyId) -> bool {
        self.corrupted[p.index()] || self.status[p.index()] == PartyStatus::Active
    }

    pub fn status(&self, p: PartyId) -> PartyStatus {
        self.status[p.index()]
    }

    pub fn abort(&mut self, p: PartyId, reason: AbortReason) {
        if self.corrupted[p.index()] {
            return;
        }
        if self.status[p.index()] == PartyStatus::Active {
            self.status[p.index()] = PartyStatus::Aborted {
                round: self.round,
                reason,
            };
        }
    }

    pub fn party_rng(&mut self, p: PartyId) -> &mut ChaCha12Rng {
        &mut self.party_rngs[p.index()]
    }

    pub fn env_rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.env_rng
    }

    pub fn adversary(&mut self) -> Option<(&mut dyn Adversary, &mut ChaCha12Rng)> {
        match self.adversary.as_mut() {
            Some(a) => Some((&mut **a, &mut self.adversary_rng)),
            None => None,
        }
    }

    /// Queues a message for this round. Sends by aborted honest parties are
    /// discarded.
    pub fn send(&mut self, from: PartyId, to: PartyId, tag: Tag, payload: Payload) {
        if !self.is_active(from) {
            return;
        }
        self.push(from, to, tag, payload);
    }

    /// Like `send`, but also allowed for a party that aborted in this very
    /// round (abort flags and warnings go out together with the abort).
    pub fn send_parting(&mut self, from: PartyId, to: PartyId, tag: Tag, payload: Payload) {
        match self.status[from.index()] {
            PartyStatus::Aborted { round, .. } if round < self.round => {}
            _ => self.push(from, to, tag, payload),
        }
    }

    fn push(&mut self, from: PartyId, to: PartyId, tag: Tag, payload: Payload) {
        assert_ne!(from, to, "self-addressed message");
        self.outbox.push(Message {
            from,
            to,
            round: self.round,
            tag,
            payload,
        });
    }

    /// Records traffic that a functionality oracle spends on a pairwise channel.
    pub fn charge(&mut self, from: PartyId, to: PartyId, tag: Tag, bits: u64) {
        if bits == 0 || from == to {
            return;
        }
        self.record(from, to, tag, bits);
    }

    fn record(&mut self, from: PartyId, to: PartyId, tag: Tag, bits: u64) {
        let adversarial = self.adversary.is_some() && self.corrupted[from.index()];
        if adversarial {
            self.adversary_metrics.record(from, to, self.round, bits);
        } else {
            self.metrics.record(from, to, self.round, bits);
        }
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEntry {
                from,
                to,
                round: self.round,
                tag,
                bits,
            });
        }
    }

    /// Closes the current round and returns what each party received.
    pub fn exchange(&mut self, allow: impl Fn(&Message) -> Allowance) -> Inbox {
        let queued = std::mem::take(&mut self.outbox);
        let (mut honest, corrupt): (Vec<Message>, Vec<Message>) = queued
            .into_iter()
            .partition(|m| !self.corrupted[m.from.index()]);

        let corrupt = match self.adversary.as_mut() {
            Some(adv) => {
                let inbound: Vec<Message> = honest
                    .iter()
                    .filter(|m| self.corrupted[m.to.index()])
                    .cloned()
                    .collect();
                let mut view = RoundView {
                    round: self.round,
                    n: self.n,
                    corrupted: &self.corrupted,
                    inbound: &inbound,
                    outbound: corrupt,
                    rng: &mut self.adversary_rng,
                };
                adv.on_round(&mut view);
                let round = self.round;
                let n = self.n;
                let corrupted = &self.corrupted;
                view.outbound
                    .into_iter()
                    .filter(|m| {
                        m.from != m.to
                            && m.from.index() < n
                            && m.to.index() < n
                            && corrupted[m.from.index()]
                    })
                    .map(|mut m| {
                        m.round = round;
                        m
                    })
                    .collect()
            }
            None => corrupt,
        };
        honest.extend(corrupt);
        let all = honest;

        for m in &all {
            self.record(m.from, m.to, m.tag, m.bits());
        }

        let mut per_party: Vec<Vec<Message>> = vec![Vec::new(); self.n];
        let traffic = all.len();
        let mut flooded_parties = Vec::new();
        for m in all {
            per_party[m.to.index()].push(m);
        }
        for (r, msgs) in per_party.iter_mut().enumerate() {
            let receiver = PartyId::from(r);
            msgs.sort_by_key(|m| m.from);
            if self.corrupted[r] {
                continue;
            }
            if self.status[r] != PartyStatus::Active {
                msgs.clear();
                continue;
            }
            // Messages are sorted by sender, so per-tag budgets only need
            // to live for one sender's run.
            let mut sender = None;
            let mut used: Vec<(Tag, u64)> = Vec::new();
            let mut flooded = false;
            msgs.retain(|m| {
                if flooded {
                    return false;
                }
                if sender != Some(m.from) {
                    sender = Some(m.from);
                    used.clear();
                }
                let slot = match used.iter().position(|(t, _)| *t == m.tag) {
                    Some(k) => k,
                    None => {
                        used.push((m.tag, 0));
                        used.len() - 1
                    }
                };
                let counter = &mut used[slot].1;
                match enforce_budget(counter, m.bits(), allow(m)) {
                    Verdict::Accept => true,
                    Verdict::Drop => false,
                    Verdict::Abort => {
                        flooded = true;
                        false
                    }
                }
            });
            if flooded {
                msgs.clear();
                flooded_parties.push(receiver);
            }
        }

        self.round += 1;
        for p in flooded_parties {
            self.abort(p, AbortReason::Flood);
        }
        if self.round >= self.round_limit {
            for i in 0..self.n {
                self.abort(PartyId::from(i), AbortReason::RoundLimit);
            }
            for msgs in &mut per_party {
                msgs.clear();
            }
        }
        Inbox { per_party, traffic }
    }

    /// A round with no protocol traffic, used around oracle invocations.
    pub fn idle_round(&mut self) {
        self.exchange(|_| Allowance::Ignore);
    }

    pub fn metrics(&self) -> &CommMetrics {
        &self.metrics
    }

    pub fn adversary_metrics(&self) -> &CommMetrics {
        &self.adversary_metrics
    }

    pub fn take_trace(&mut self) -> Vec<TraceEntry> {
        self.trace.take().unwrap_or_default()
    }

    pub fn into_parts(self) -> (Vec<PartyStatus>, CommMetrics, CommMetrics, u32) {
        (
            self.status,
            self.metrics,
            self.adversary_metrics,
            self.round,
        )
    }
}
