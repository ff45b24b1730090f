//! Committee self-election.
//!
//! Each party joins with probability `p` and announces itself. With
//! `p = α·log2(n)/h`, a committee of expected size `α·n·log2(n)/h` contains
//! an honest member except with probability `n^-Ω(α)`. Nobody can verify an
//! announcement, so a party that hears `2pn` or more of them aborts; the
//! electees then check they all saw the same membership.

use std::sync::Arc;

use crate::bits::{index_width, BitString};
use crate::netsim::{AbortReason, Allowance, Network, PartyId, Payload};
use crate::primitives::pairwise_equality;
use crate::routing::{gossip, GossipOptions, RoutingGraph};

pub const TAG_ANNOUNCE: &str = "ce.announce";
pub const TAG_PROBE: &str = "ce.probe";
pub const TAG_REPLY: &str = "ce.reply";
pub const TAG_LOCAL_ANNOUNCE: &str = "lce.announce";
pub const TAG_LOCAL_PROBE: &str = "lce.probe";
pub const TAG_LOCAL_REPLY: &str = "lce.reply";

/// `min(1, α·log2(n)/h)`.
pub fn election_probability(n: usize, h: usize, alpha: f64) -> f64 {
    (alpha * (n as f64).log2() / h as f64).min(1.0)
}

/// `min(1, α·log2(n)/√h)`.
pub fn local_election_probability(n: usize, h: usize, alpha: f64) -> f64 {
    (alpha * (n as f64).log2() / (h as f64).sqrt()).min(1.0)
}

/// A party aborts once it hears this many announcements from others.
pub fn abort_threshold(n: usize, p: f64) -> f64 {
    2.0 * p * n as f64
}

/// One party's picture of the committee.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitteeView {
    pub owner: PartyId,
    /// Sorted; includes the owner when it elected itself.
    pub members: Vec<PartyId>,
    pub elected: bool,
}

impl CommitteeView {
    pub fn others(&self) -> impl Iterator<Item = PartyId> + '_ {
        self.members.iter().copied().filter(move |&m| m != self.owner)
    }

    pub fn contains(&self, p: PartyId) -> bool {
        self.members.binary_search(&p).is_ok()
    }

    /// Fixed-width sorted index list.
    pub fn serialize(&self, n: usize) -> BitString {
        let w = index_width(n);
        let mut out = BitString::with_capacity(w * self.members.len());
        for m in &self.members {
            out.push_uint(m.0 as u64, w);
        }
        out
    }
}

/// Everyone flips its coin; the adversary picks the corrupted parties' coins.
fn flip_coins(net: &mut Network<'_>, p: f64, tag: &'static str) -> Vec<bool> {
    let parties: Vec<PartyId> = net.parties().collect();
    parties
        .into_iter()
        .map(|i| {
            let coin = rand::Rng::random_bool(net.party_rng(i), p);
            if net.is_honest(i) {
                return coin;
            }
            match net.adversary() {
                Some((adv, _)) => adv.self_elect(tag, i, coin),
                None => coin,
            }
        })
        .collect()
}

/// Threshold check, view assembly and electee equality tests shared by both
/// variants. `heard[i]` lists the others party `i` believes elected.
fn settle(
    net: &mut Network<'_>,
    coins: &[bool],
    heard: Vec<Vec<PartyId>>,
    p: f64,
    lambda: u32,
    tags: (&'static str, &'static str),
) -> Vec<Option<CommitteeView>> {
    let n = net.n();
    let threshold = abort_threshold(n, p);
    let mut views: Vec<Option<CommitteeView>> = vec![None; n];
    for (i, others) in heard.into_iter().enumerate() {
        let owner = PartyId::from(i);
        if !net.is_active(owner) {
            continue;
        }
        if others.len() as f64 >= threshold {
            net.abort(owner, AbortReason::Threshold);
            continue;
        }
        let mut members = others;
        if coins[i] {
            members.push(owner);
        }
        members.sort_unstable();
        views[i] = Some(CommitteeView {
            owner,
            members,
            elected: coins[i],
        });
    }

    let partners: Vec<Vec<PartyId>> = views
        .iter()
        .map(|v| match v {
            Some(v) if v.elected => v.others().collect(),
            _ => Vec::new(),
        })
        .collect();
    let strings: Vec<Option<Arc<BitString>>> = views
        .iter()
        .map(|v| v.as_ref().filter(|v| v.elected).map(|v| Arc::new(v.serialize(n))))
        .collect();
    // Only mutually recognized electees test; silence from a claimed
    // electee is not evidence of anything.
    pairwise_equality(net, tags, lambda, &partners, &strings, false, false);

    views
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.filter(|_| net.is_active(PartyId::from(i))))
        .collect()
}

/// Clique variant: electees announce directly to every party.
pub fn committee_elect(net: &mut Network<'_>, p: f64, lambda: u32) -> Vec<Option<CommitteeView>> {
    let parties: Vec<PartyId> = net.parties().collect();
    let coins = flip_coins(net, p, TAG_ANNOUNCE);
    let one = Payload::bits(BitString::from_uint(1, 1));
    for &i in parties.iter().filter(|i| coins[i.index()]) {
        for &j in parties.iter().filter(|&&j| j != i) {
            net.send(i, j, TAG_ANNOUNCE, one.clone());
        }
    }
    let inbox = net.exchange(|m| {
        if m.tag == TAG_ANNOUNCE {
            Allowance::Upto(1)
        } else {
            Allowance::Ignore
        }
    });
    let heard: Vec<Vec<PartyId>> = parties
        .iter()
        .map(|&i| {
            inbox
                .of(i)
                .iter()
                .filter(|m| m.tag == TAG_ANNOUNCE && m.payload.as_bits().is_some_and(|b| b.len() == 1 && b.get(0)))
                .map(|m| m.from)
                .collect()
        })
        .collect();
    settle(net, &coins, heard, p, lambda, (TAG_PROBE, TAG_REPLY))
}

/// Sparse variant: announcements travel by gossip over `graph`, with bias
/// `α·log2(n)/√h` chosen by the caller. Equality tests still run on direct
/// channels between electees.
pub fn local_committee_elect(
    net: &mut Network<'_>,
    graph: &RoutingGraph,
    p: f64,
    lambda: u32,
    gossip_opts: GossipOptions,
) -> Vec<Option<CommitteeView>> {
    let n = net.n();
    let coins = flip_coins(net, p, TAG_LOCAL_ANNOUNCE);
    let announcement = BitString::from_uint(1, 1);
    let inputs: Vec<Option<BitString>> = coins.iter().map(|&c| c.then(|| announcement.clone())).collect();
    let result = gossip(net, graph, &inputs, GossipOptions {
            max_value_bits: 1,
            tag: TAG_LOCAL_ANNOUNCE,
            ..gossip_opts
        });
    let heard: Vec<Vec<PartyId>> = (0..n)
        .map(|i| match &result.views[i] {
            Some(view) => view
                .iter()
                .enumerate()
                .filter(|&(j, v)| j != i && v.as_deref() == Some(&announcement))
                .map(|(j, _)| PartyId::from(j))
                .collect(),
            None => Vec::new(),
        })
        .collect();
    settle(net, &coins, heard, p, lambda, (TAG_LOCAL_PROBE, TAG_LOCAL_REPLY))
}
