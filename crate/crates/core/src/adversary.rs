//! Static malicious adversaries.
//!
//! Protocol code produces the honest messages of every party, corrupted ones
//! included; each round the adversary sees what honest parties sent to
//! corrupted ones and may rewrite, drop or add messages from corrupted
//! senders before delivery. Oracle calls consult the hooks with defaults.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample;
use rand_chacha::ChaCha12Rng;

use crate::bits::BitString;
use crate::crypto::{CostModel, CT_HEADER_BITS};
use crate::netsim::{self, Entry, EntryBody, EntryBundle, Message, PartyId, Payload, RoundView, Tag};
use crate::protocols::{object_layout, ObjectLayout, TAG_CT, TAG_FWD, TAG_OBJ, TAG_OUT, TAG_PK};
use crate::routing::TAG_NOTIFY;

/// Controls all corrupted parties jointly.
pub trait Adversary {
    /// Called once per round before delivery.
    fn on_round(&mut self, view: &mut RoundView<'_>);

    /// What corrupted `party` hands an oracle in place of `honest`.
    fn oracle_input(&mut self, _tag: Tag, _party: PartyId, honest: BitString, _rng: &mut ChaCha12Rng) -> BitString {
        honest
    }

    /// Honest oracle participants to deny their output.
    fn selective_abort(&mut self, _tag: Tag, _honest: &[PartyId], _rng: &mut ChaCha12Rng) -> Vec<PartyId> {
        Vec::new()
    }

    /// The coin corrupted `party` claims in a self-election.
    fn self_elect(&mut self, _tag: Tag, _party: PartyId, coin: bool) -> bool {
        coin
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("unknown strategy `{0}`")]
    Unknown(String),
    #[error("bad parameter for `{strategy}`: {detail}")]
    BadParameter { strategy: &'static str, detail: String },
    #[error("cannot corrupt {corrupt} of {n} parties with h = {h}")]
    TooManyCorruptions { corrupt: usize, n: usize, h: usize },
}

/// The named behaviors the harness can select.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Corrupted parties send nothing.
    HonestButSilent,
    /// Corrupted parties send a modified copy to odd-indexed receivers, for
    /// messages with the given tag or for every tag.
    Equivocator { target: Option<String> },
    /// Every corrupted message is repeated `factor` times.
    Flooder { factor: u32 },
    /// Every corrupted party claims to be elected.
    CommitteeStuffer,
    /// Corrupted parties forward a different public key to everyone.
    PkForker,
    /// Corrupted parties tamper with forwarded outputs, optionally only
    /// towards `target` and at a chosen bit.
    OutputForker { target: Option<u32>, bit: Option<usize> },
    /// Corrupted parties flip a bit of their own encrypted input.
    InputSubstituter,
    /// Feed `target` a forged value for `sender` through corrupted neighbors.
    IsolationAttacker { sender: u32, target: Option<u32>, always_forge: bool },
}

pub const STRATEGY_NAMES: [&str; 8] = [
    "honest_but_silent",
    "equivocator",
    "flooder",
    "committee_stuffer",
    "pk_forker",
    "output_forker",
    "input_substituter",
    "isolation_attacker",
];

/// What a protocol offers a strategy to act on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Features {
    pub election: bool,
    pub oracle: bool,
    pub rumors: bool,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::HonestButSilent => "honest_but_silent",
            Strategy::Equivocator { .. } => "equivocator",
            Strategy::Flooder { .. } => "flooder",
            Strategy::CommitteeStuffer => "committee_stuffer",
            Strategy::PkForker => "pk_forker",
            Strategy::OutputForker { .. } => "output_forker",
            Strategy::InputSubstituter => "input_substituter",
            Strategy::IsolationAttacker { .. } => "isolation_attacker",
        }
    }

    pub fn supports(&self, f: Features) -> bool {
        match self {
            Strategy::HonestButSilent | Strategy::Equivocator { .. } | Strategy::Flooder { .. } => true,
            Strategy::CommitteeStuffer => f.election,
            Strategy::PkForker | Strategy::OutputForker { .. } | Strategy::InputSubstituter => f.oracle,
            Strategy::IsolationAttacker { .. } => f.rumors,
        }
    }

    /// Parties the strategy needs to stay honest.
    fn protected(&self) -> Vec<u32> {
        match self {
            Strategy::IsolationAttacker { sender, target, .. } => std::iter::once(*sender).chain(*target).collect(),
            _ => Vec::new(),
        }
    }
}

fn parse_num<T: FromStr>(strategy: &'static str, s: &str) -> Result<T, StrategyError> {
    s.parse().map_err(|_| StrategyError::BadParameter {
        strategy,
        detail: format!("`{s}` is not a number"),
    })
}

/// `name` or `name:param[:param]`, e.g. `flooder:10`,
/// `output_forker:3:17`, `isolation_attacker:0:5:always`.
impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let params: Vec<&str> = parts.collect();
        let too_many = |strategy: &'static str, max: usize| {
            if params.len() > max {
                Err(StrategyError::BadParameter {
                    strategy,
                    detail: format!("takes at most {max} parameters"),
                })
            } else {
                Ok(())
            }
        };
        match name {
            "honest_but_silent" => too_many("honest_but_silent", 0).map(|_| Strategy::HonestButSilent),
            "equivocator" => {
                too_many("equivocator", 1)?;
                Ok(Strategy::Equivocator {
                    target: params.first().map(|t| t.to_string()),
                })
            }
            "flooder" => {
                too_many("flooder", 1)?;
                let factor = match params.first() {
                    Some(p) => parse_num("flooder", p)?,
                    None => 10,
                };
                if factor < 2 {
                    return Err(StrategyError::BadParameter {
                        strategy: "flooder",
                        detail: "factor must be at least 2".into(),
                    });
                }
                Ok(Strategy::Flooder { factor })
            }
            "committee_stuffer" => too_many("committee_stuffer", 0).map(|_| Strategy::CommitteeStuffer),
            "pk_forker" => too_many("pk_forker", 0).map(|_| Strategy::PkForker),
            "output_forker" => {
                too_many("output_forker", 2)?;
                Ok(Strategy::OutputForker {
                    target: params.first().map(|p| parse_num("output_forker", p)).transpose()?,
                    bit: params.get(1).map(|p| parse_num("output_forker", p)).transpose()?,
                })
            }
            "input_substituter" => too_many("input_substituter", 0).map(|_| Strategy::InputSubstituter),
            "isolation_attacker" => {
                too_many("isolation_attacker", 3)?;
                let sender = match params.first() {
                    Some(p) => parse_num("isolation_attacker", p)?,
                    None => 0,
                };
                let target = params.get(1).map(|p| parse_num("isolation_attacker", p)).transpose()?;
                let always_forge = match params.get(2) {
                    None => false,
                    Some(&"always") => true,
                    Some(other) => {
                        return Err(StrategyError::BadParameter {
                            strategy: "isolation_attacker",
                            detail: format!("expected `always`, got `{other}`"),
                        })
                    }
                };
                Ok(Strategy::IsolationAttacker {
                    sender,
                    target,
                    always_forge,
                })
            }
            other => Err(StrategyError::Unknown(other.to_string())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())?;
        match self {
            Strategy::Equivocator { target: Some(t) } => write!(f, ":{t}"),
            Strategy::Flooder { factor } => write!(f, ":{factor}"),
            Strategy::OutputForker { target, bit } => {
                if let Some(t) = target {
                    write!(f, ":{t}")?;
                    if let Some(b) = bit {
                        write!(f, ":{b}")?;
                    }
                }
                Ok(())
            }
            Strategy::IsolationAttacker {
                sender,
                target,
                always_forge,
            } => {
                write!(f, ":{sender}")?;
                if let Some(t) = target {
                    write!(f, ":{t}")?;
                    if *always_forge {
                        f.write_str(":always")?;
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A corruption set fixed before the run plus the behavior driving it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversarySpec {
    pub corrupted: BTreeSet<PartyId>,
    pub strategy: Strategy,
}

impl AdversarySpec {
    /// Corrupts `n - h` parties drawn from the corruption stream of `seed`,
    /// never touching the parties the strategy needs honest. An isolation
    /// attack without a target gets a random honest one.
    pub fn random(n: usize, h: usize, strategy: Strategy, seed: u64) -> Result<Self, StrategyError> {
        let mut rng = netsim::stream(seed, netsim::CORRUPTION_STREAM);
        let mut strategy = strategy;
        if let Strategy::IsolationAttacker { sender, target: None, .. } = &strategy {
            let sender = *sender as usize;
            if n < 2 || sender >= n {
                return Err(StrategyError::BadParameter {
                    strategy: "isolation_attacker",
                    detail: format!("sender {sender} out of range"),
                });
            }
            let pick = sample(&mut rng, n - 1, 1).index(0);
            let t = if pick >= sender { pick + 1 } else { pick };
            if let Strategy::IsolationAttacker { target, .. } = &mut strategy {
                *target = Some(t as u32);
            }
        }
        let protected: Vec<u32> = strategy.protected();
        let corrupt = n.saturating_sub(h);
        let free: Vec<u32> = (0..n as u32).filter(|i| !protected.contains(i)).collect();
        if h > n || corrupt > free.len() || protected.iter().any(|&p| p as usize >= n) {
            return Err(StrategyError::TooManyCorruptions { corrupt, n, h });
        }
        let corrupted = sample(&mut rng, free.len(), corrupt)
            .into_iter()
            .map(|k| PartyId(free[k]))
            .collect();
        Ok(Self { corrupted, strategy })
    }

    pub fn with_corrupted(corrupted: impl IntoIterator<Item = PartyId>, strategy: Strategy) -> Self {
        Self {
            corrupted: corrupted.into_iter().collect(),
            strategy,
        }
    }

    pub fn build(&self, ctx: StrategyContext) -> StrategyAdversary {
        StrategyAdversary::new(self.strategy.clone(), ctx)
    }
}

/// Public protocol parameters a strategy may use.
#[derive(Clone, Copy, Debug)]
pub struct StrategyContext {
    pub n: usize,
    pub cost: CostModel,
    pub in_width: usize,
    /// Out-degree of the routing graph, when the protocol builds one.
    pub degree: Option<usize>,
}

/// What a strategy did during the run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttackLog {
    pub tampered: u64,
    pub injected: u64,
    pub forged: bool,
}

/// Runs one [`Strategy`] as an [`Adversary`].
#[derive(Debug)]
pub struct StrategyAdversary {
    strategy: Strategy,
    ctx: StrategyContext,
    layout: ObjectLayout,
    log: AttackLog,
    isolation: IsolationState,
}

#[derive(Debug, Default)]
struct IsolationState {
    /// Corrupted parties the target sampled as out-neighbors.
    chosen_by_target: BTreeSet<PartyId>,
    /// Corrupted parties that chose the target.
    chose_target: BTreeSet<PartyId>,
    sender_value: Option<Arc<BitString>>,
    rumor_tag: Option<Tag>,
}

fn flip(b: &BitString, at: usize) -> BitString {
    let mut out = b.clone();
    if !out.is_empty() {
        out.flip(at % out.len());
    }
    out
}

fn map_values(bundle: &EntryBundle, mut f: impl FnMut(&Entry) -> Option<BitString>) -> (EntryBundle, u64) {
    let mut out = bundle.clone();
    let mut changed = 0;
    for e in out.entries_mut() {
        if let Some(new) = f(e) {
            e.body = EntryBody::Value(Arc::new(new));
            changed += 1;
        }
    }
    out.recount();
    (out, changed)
}

impl StrategyAdversary {
    pub fn new(strategy: Strategy, ctx: StrategyContext) -> Self {
        Self {
            layout: object_layout(&ctx.cost, ctx.in_width),
            strategy,
            ctx,
            log: AttackLog::default(),
            isolation: IsolationState::default(),
        }
    }

    pub fn log(&self) -> &AttackLog {
        &self.log
    }

    fn rewrite(&mut self, m: &mut Message, f: impl FnOnce(&Payload) -> Option<Payload>) {
        if let Some(p) = f(&m.payload) {
            m.payload = p;
            self.log.tampered += 1;
        }
    }

    fn equivocate(&mut self, view: &mut RoundView<'_>, target: Option<&str>) {
        let mut outbound = std::mem::take(&mut view.outbound);
        for m in &mut outbound {
            if target.is_some_and(|t| t != m.tag) || m.to.0 % 2 == 0 {
                continue;
            }
            let from = m.from;
            self.rewrite(m, |p| match p {
                Payload::Bits(b) if !b.is_empty() => Some(Payload::bits(flip(b, b.len() - 1))),
                Payload::Entries(bundle) => {
                    let (out, changed) = map_values(bundle, |e| match &e.body {
                        EntryBody::Value(v) if e.origin == from => Some(flip(v, v.len().max(1) - 1)),
                        _ => None,
                    });
                    (changed > 0).then(|| Payload::Entries(Arc::new(out)))
                }
                _ => None,
            });
        }
        view.outbound = outbound;
    }

    fn flood(&mut self, view: &mut RoundView<'_>, factor: u32) {
        for m in &mut view.outbound {
            let p = match &m.payload {
                Payload::Bits(b) => {
                    let mut big = BitString::with_capacity(b.len() * factor as usize);
                    for _ in 0..factor {
                        big.extend(b);
                    }
                    Payload::bits(big)
                }
                Payload::Entries(bundle) => {
                    let mut big = (**bundle).clone();
                    let copies = bundle.entries().to_vec();
                    for _ in 1..factor {
                        big.entries_mut().extend(copies.iter().cloned());
                    }
                    big.recount();
                    Payload::Entries(Arc::new(big))
                }
            };
            m.payload = p;
            self.log.tampered += 1;
        }
    }

    fn fork_pk(&mut self, view: &mut RoundView<'_>) {
        let mut outbound = std::mem::take(&mut view.outbound);
        for m in &mut outbound {
            if m.tag == TAG_PK {
                self.rewrite(m, |p| p.as_bits().map(|b| Payload::bits(flip(b, 0))));
            } else if m.tag == TAG_OBJ {
                self.rewrite(m, |p| {
                    let bundle = p.as_entries()?;
                    let (out, changed) = map_values(bundle, |e| match &e.body {
                        EntryBody::Value(v) => Some(flip(v, 0)),
                        EntryBody::Warn => None,
                    });
                    (changed > 0).then(|| Payload::Entries(Arc::new(out)))
                });
            }
        }
        view.outbound = outbound;
    }

    fn fork_output(&mut self, view: &mut RoundView<'_>, target: Option<u32>, bit: Option<usize>) {
        let mut outbound = std::mem::take(&mut view.outbound);
        for m in &mut outbound {
            if (m.tag != TAG_OUT && m.tag != TAG_FWD) || target.is_some_and(|t| t != m.to.0) {
                continue;
            }
            let at = bit.unwrap_or(0);
            self.rewrite(m, |p| p.as_bits().map(|b| Payload::bits(flip(b, at))));
        }
        view.outbound = outbound;
    }

    fn substitute_input(&mut self, view: &mut RoundView<'_>) {
        let layout = self.layout;
        let mut outbound = std::mem::take(&mut view.outbound);
        for m in &mut outbound {
            if m.tag == TAG_CT {
                self.rewrite(m, |p| {
                    let b = p.as_bits()?;
                    (b.len() > CT_HEADER_BITS).then(|| Payload::bits(flip(b, CT_HEADER_BITS)))
                });
            } else if m.tag == TAG_OBJ {
                let from = m.from;
                self.rewrite(m, |p| {
                    let bundle = p.as_entries()?;
                    let (out, changed) = map_values(bundle, |e| match &e.body {
                        EntryBody::Value(v) if e.origin == from && v.len() == layout.total() => {
                            Some(layout.reseal(&flip(v, layout.pk_bits + CT_HEADER_BITS)))
                        }
                        _ => None,
                    });
                    (changed > 0).then(|| Payload::Entries(Arc::new(out)))
                });
            }
        }
        view.outbound = outbound;
    }

    fn isolate(&mut self, view: &mut RoundView<'_>, sender: PartyId, target: PartyId, always_forge: bool) {
        let st = &mut self.isolation;
        for m in view.inbound.iter() {
            if m.tag == TAG_NOTIFY && m.from == target {
                st.chosen_by_target.insert(m.to);
            }
        }
        for m in view.outbound.iter() {
            if m.tag == TAG_NOTIFY && m.to == target {
                st.chose_target.insert(m.from);
            }
        }
        for m in view.inbound.iter().chain(view.outbound.iter()) {
            let Some(bundle) = m.payload.as_entries() else { continue };
            for e in bundle.entries() {
                if let (true, EntryBody::Value(v)) = (e.origin == sender, &e.body) {
                    if st.sender_value.is_none() {
                        st.sender_value = Some(v.clone());
                        st.rumor_tag = Some(m.tag);
                    }
                }
            }
        }
        let d_out = self.ctx.degree.unwrap_or(0);
        let forge = always_forge || st.chosen_by_target.len() >= d_out;
        if !forge {
            return;
        }

        // Nothing about the sender reaches the target except the forgery.
        let mut outbound = std::mem::take(&mut view.outbound);
        outbound.retain_mut(|m| {
            if m.to != target {
                return true;
            }
            let Some(bundle) = m.payload.as_entries() else { return true };
            let mut kept = bundle.clone();
            kept.entries_mut().retain(|e| e.origin != sender);
            kept.recount();
            if kept.is_empty() {
                return false;
            }
            m.payload = Payload::Entries(Arc::new(kept));
            true
        });

        if let (false, Some(v), Some(tag)) = (self.log.forged, st.sender_value.clone(), st.rumor_tag) {
            let forged = Arc::new(flip(&v, 0));
            let n = view.n;
            let round = view.round;
            for &c in st.chosen_by_target.union(&st.chose_target) {
                let mut bundle = EntryBundle::new(n);
                bundle.push(Entry {
                    origin: sender,
                    body: EntryBody::Value(forged.clone()),
                });
                outbound.push(Message {
                    from: c,
                    to: target,
                    round,
                    tag,
                    payload: Payload::Entries(Arc::new(bundle)),
                });
                self.log.injected += 1;
            }
            self.log.forged = true;
        }
        view.outbound = outbound;
    }
}

impl Adversary for StrategyAdversary {
    fn on_round(&mut self, view: &mut RoundView<'_>) {
        match self.strategy.clone() {
            Strategy::HonestButSilent => view.outbound.clear(),
            Strategy::Equivocator { target } => self.equivocate(view, target.as_deref()),
            Strategy::Flooder { factor } => self.flood(view, factor),
            Strategy::CommitteeStuffer => {}
            Strategy::PkForker => self.fork_pk(view),
            Strategy::OutputForker { target, bit } => self.fork_output(view, target, bit),
            Strategy::InputSubstituter => self.substitute_input(view),
            Strategy::IsolationAttacker {
                sender,
                target,
                always_forge,
            } => {
                if let Some(t) = target {
                    self.isolate(view, PartyId(sender), PartyId(t), always_forge);
                }
            }
        }
    }

    fn selective_abort(&mut self, tag: Tag, honest: &[PartyId], _rng: &mut ChaCha12Rng) -> Vec<PartyId> {
        match self.strategy {
            Strategy::OutputForker { target: None, .. } if tag.starts_with("fcomp") => {
                honest.iter().copied().filter(|p| p.0 % 2 == 1).collect()
            }
            _ => Vec::new(),
        }
    }

    fn self_elect(&mut self, _tag: Tag, _party: PartyId, coin: bool) -> bool {
        coin || self.strategy == Strategy::CommitteeStuffer
    }
}
