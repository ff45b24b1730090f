//! Sparse routing network and gossip over it.
//!
//! Every party picks `d = ceil(α·n·log2(n)/h)` random out-neighbors and tells
//! them; edges are then used in both directions. With that degree the honest
//! parties alone already form a connected graph with high probability, so
//! flooding over it reaches every honest party no matter what the corrupted
//! ones do. Responsible gossip adds the safety half: a party that sees two
//! different values for one origin warns its neighbors once and aborts.

use std::sync::Arc;

use rand::seq::index::sample;

use crate::bits::BitString;
use crate::netsim::{AbortReason, Allowance, Entry, EntryBody, EntryBundle, Network, PartyId, Payload, Tag};

pub const TAG_NOTIFY: &str = "sn.notify";
pub const TAG_GOSSIP: &str = "gossip";

/// `min(n - 1, ceil(α·n·log2(n)/h))`.
pub fn degree(n: usize, h: usize, alpha: f64) -> usize {
    let d = (alpha * n as f64 * (n as f64).log2() / h as f64).ceil() as usize;
    d.min(n.saturating_sub(1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutingGraph {
    pub d: usize,
    pub n_out: Vec<Vec<PartyId>>,
    pub n_in: Vec<Vec<PartyId>>,
    /// `N_out ∪ N_in`, sorted; `None` for parties that aborted.
    pub neighbors: Vec<Option<Vec<PartyId>>>,
}

impl RoutingGraph {
    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors_of(&self, p: PartyId) -> &[PartyId] {
        self.neighbors[p.index()].as_deref().unwrap_or(&[])
    }

    pub fn is_neighbor(&self, p: PartyId, q: PartyId) -> bool {
        self.neighbors_of(p).binary_search(&q).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().flatten().map(Vec::len).max().unwrap_or(0)
    }

    /// Every directed channel `(p, q)` with `q` a neighbor of a live `p`.
    pub fn directed_edges(&self) -> Vec<(PartyId, PartyId)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| {
                ns.iter()
                    .flatten()
                    .map(move |&q| (PartyId::from(i), q))
            })
            .collect()
    }

    /// Whether the subgraph induced by the parties flagged in `keep` is
    /// connected. Edges count if either endpoint lists the other.
    pub fn induced_connected(&self, keep: &[bool]) -> bool {
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let lists = self.n_out.iter().chain(self.n_in.iter());
        for (k, list) in lists.enumerate() {
            let a = k % n;
            if !keep[a] {
                continue;
            }
            for &b in list {
                if keep[b.index()] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b.index()));
                    parent[ra] = rb;
                }
            }
        }
        let mut roots = (0..n).filter(|&i| keep[i]).map(|i| find(&mut parent, i));
        match roots.next() {
            Some(r) => roots.all(|x| x == r),
            None => true,
        }
    }
}

/// Each party samples `d` out-neighbors and notifies them with one bit. With
/// `degree_guard`, a party notified by more than `2d` others aborts.
pub fn sparse_network(net: &mut Network<'_>, d: usize, degree_guard: bool) -> RoutingGraph {
    let n = net.n();
    let parties: Vec<PartyId> = net.parties().collect();
    let d = d.min(n.saturating_sub(1));
    let mut n_out: Vec<Vec<PartyId>> = vec![Vec::new(); n];
    for &i in &parties {
        let picks = sample(net.party_rng(i), n - 1, d);
        let mut out: Vec<PartyId> = picks
            .into_iter()
            .map(|x| PartyId::from(if x < i.index() { x } else { x + 1 }))
            .collect();
        out.sort_unstable();
        n_out[i.index()] = out;
    }
    let one = Payload::bits(BitString::from_uint(1, 1));
    for &i in &parties {
        for &j in &n_out[i.index()] {
            net.send(i, j, TAG_NOTIFY, one.clone());
        }
    }
    let inbox = net.exchange(|m| {
        if m.tag == TAG_NOTIFY {
            Allowance::Upto(1)
        } else {
            Allowance::Ignore
        }
    });

    let mut n_in: Vec<Vec<PartyId>> = vec![Vec::new(); n];
    let mut neighbors: Vec<Option<Vec<PartyId>>> = vec![None; n];
    for &i in &parties {
        if !net.is_active(i) {
            continue;
        }
        let incoming: Vec<PartyId> = inbox
            .of(i)
            .iter()
            .filter(|m| m.tag == TAG_NOTIFY)
            .map(|m| m.from)
            .collect();
        if degree_guard && incoming.len() > 2 * d {
            net.abort(i, AbortReason::DegreeExceeded);
            continue;
        }
        let mut all = n_out[i.index()].clone();
        all.extend(&incoming);
        all.sort_unstable();
        all.dedup();
        n_in[i.index()] = incoming;
        neighbors[i.index()] = Some(all);
    }
    RoutingGraph {
        d,
        n_out,
        n_in,
        neighbors,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GossipOptions {
    /// Detect conflicting values for one origin and abort on them.
    pub responsible: bool,
    /// On a conflict, warn all neighbors before aborting.
    pub warn: bool,
    /// Longest value any origin may gossip.
    pub max_value_bits: usize,
    pub tag: Tag,
}

impl GossipOptions {
    pub fn responsible(max_value_bits: usize) -> Self {
        Self {
            responsible: true,
            warn: true,
            max_value_bits,
            tag: TAG_GOSSIP,
        }
    }

    /// First-heard-wins flooding with no conflict checks.
    pub fn naive(max_value_bits: usize) -> Self {
        Self {
            responsible: false,
            warn: false,
            max_value_bits,
            tag: TAG_GOSSIP,
        }
    }
}

pub type GossipView = Vec<Option<Arc<BitString>>>;

#[derive(Clone, Debug)]
pub struct GossipResult {
    /// Per party, the value it holds for each origin; `None` if it aborted.
    pub views: Vec<Option<GossipView>>,
    /// Rumor entries each party sent, counting one per neighbor.
    pub entries_sent: Vec<u64>,
    pub rounds: u32,
    pub quiesced: bool,
}

/// Floods every non-`None` input over `graph`. Each party forwards each
/// origin's first value once to all its neighbors.
pub fn gossip(
    net: &mut Network<'_>,
    graph: &RoutingGraph,
    inputs: &[Option<BitString>],
    opts: GossipOptions,
) -> GossipResult {
    let n = net.n();
    let parties: Vec<PartyId> = net.parties().collect();
    let mut known: Vec<GossipView> = vec![vec![None; n]; n];
    let mut pending: Vec<EntryBundle> = (0..n).map(|_| EntryBundle::new(n)).collect();
    let mut entries_sent = vec![0u64; n];
    // Corrupt parties never abort in the network, so their scripted side
    // stops here after its first conflict instead of re-warning every round.
    let mut halted = vec![false; n];
    for &i in &parties {
        if let Some(x) = &inputs[i.index()] {
            let v = Arc::new(x.clone());
            known[i.index()][i.index()] = Some(v.clone());
            pending[i.index()].push(Entry {
                origin: i,
                body: EntryBody::Value(v),
            });
        }
    }
    let value_entry = EntryBundle::entry_bits(n, Some(opts.max_value_bits));
    let warn_entry = EntryBundle::entry_bits(n, None);
    let cap = n as u64 * (value_entry + warn_entry);

    let mut rounds = 0;
    let mut quiesced = false;
    while (rounds as usize) < n.max(1) {
        for &i in &parties {
            let bundle = std::mem::replace(&mut pending[i.index()], EntryBundle::new(n));
            if bundle.is_empty() || halted[i.index()] || !net.is_active(i) {
                continue;
            }
            let ns = graph.neighbors_of(i);
            entries_sent[i.index()] += (bundle.entries().len() * ns.len()) as u64;
            let payload = Payload::Entries(Arc::new(bundle));
            for &j in ns {
                net.send(i, j, opts.tag, payload.clone());
            }
        }
        let inbox = net.exchange(|m| {
            if m.tag == opts.tag && graph.is_neighbor(m.to, m.from) {
                Allowance::Upto(cap)
            } else {
                Allowance::Ignore
            }
        });
        rounds += 1;
        if inbox.traffic() == 0 {
            quiesced = true;
            break;
        }

        for &i in &parties {
            if halted[i.index()] || !net.is_active(i) {
                continue;
            }
            let mut conflict: Option<(PartyId, AbortReason)> = None;
            'messages: for m in inbox.of(i).iter().filter(|m| m.tag == opts.tag) {
                let Some(bundle) = m.payload.as_entries() else { continue };
                for e in bundle.entries() {
                    if e.origin.index() >= n {
                        continue;
                    }
                    match &e.body {
                        EntryBody::Value(v) => {
                            let slot = &mut known[i.index()][e.origin.index()];
                            match slot {
                                None => {
                                    *slot = Some(v.clone());
                                    pending[i.index()].push(e.clone());
                                }
                                Some(have) if opts.responsible && **have != **v => {
                                    conflict = Some((e.origin, AbortReason::Equivocation));
                                    break 'messages;
                                }
                                Some(_) => {}
                            }
                        }
                        EntryBody::Warn if opts.responsible => {
                            conflict = Some((e.origin, AbortReason::Warned));
                            break 'messages;
                        }
                        EntryBody::Warn => {}
                    }
                }
            }
            if let Some((origin, reason)) = conflict {
                net.abort(i, reason);
                halted[i.index()] = true;
                if opts.warn {
                    let mut warning = EntryBundle::new(n);
                    warning.push(Entry {
                        origin,
                        body: EntryBody::Warn,
                    });
                    let ns = graph.neighbors_of(i);
                    entries_sent[i.index()] += ns.len() as u64;
                    let payload = Payload::Entries(Arc::new(warning));
                    for &j in ns {
                        net.send_parting(i, j, opts.tag, payload.clone());
                    }
                }
                pending[i.index()] = EntryBundle::new(n);
            }
        }
    }
    if !quiesced {
        for &i in &parties {
            if !pending[i.index()].is_empty() {
                net.abort(i, AbortReason::RoundLimit);
            }
        }
    }

    let views = known
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = PartyId::from(i);
            (net.is_active(p) && graph.neighbors[i].is_some()).then_some(v)
        })
        .collect();
    GossipResult {
        views,
        entries_sent,
        rounds,
        quiesced,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_arithmetic() {
        assert_eq!(degree(256, 64, 2.0), 64);
        assert_eq!(degree(256, 256, 4.0), 32);
        assert_eq!(degree(16, 2, 4.0), 15);
    }

    #[test]
    fn graph_is_symmetric_and_bounded() {
        let mut net = Network::new(256, 5);
        let g = sparse_network(&mut net, degree(256, 64, 2.0), true);
        assert_eq!(g.d, 64);
        for i in 0..256 {
            let p = PartyId::from(i);
            if let Some(ns) = &g.neighbors[i] {
                assert!(ns.len() <= 3 * g.d);
                for &q in ns {
                    assert!(g.is_neighbor(q, p));
                }
            }
        }
        assert_eq!(net.metrics().total_bits(), 256 * 64);
    }

    #[test]
    fn single_origin_reaches_everyone() {
        let mut net = Network::new(64, 3);
        let g = sparse_network(&mut net, degree(64, 32, 2.0), true);
        let mut inputs = vec![None; 64];
        inputs[0] = Some("1011".parse::<BitString>().unwrap());
        let r = gossip(&mut net, &g, &inputs, GossipOptions::responsible(4));
        assert!(r.quiesced);
        for v in r.views {
            let v = v.expect("no aborts");
            assert_eq!(v[0].as_deref(), inputs[0].as_ref());
            assert!(v[1..].iter().all(Option::is_none));
        }
    }

    #[test]
    fn forwarding_budget_holds() {
        let n = 48;
        let mut net = Network::new(n, 8);
        let g = sparse_network(&mut net, degree(n, 24, 2.0), true);
        let inputs: Vec<Option<BitString>> =
            (0..n).map(|i| (i % 3 == 0).then(|| BitString::from_uint(i as u64, 8))).collect();
        let k = inputs.iter().filter(|x| x.is_some()).count() as u64;
        let r = gossip(&mut net, &g, &inputs, GossipOptions::responsible(8));
        for i in 0..n {
            let deg = g.neighbors_of(PartyId::from(i)).len() as u64;
            assert!(r.entries_sent[i] <= (k + 1) * deg);
        }
        assert!(r.views.iter().all(|v| v.as_ref().unwrap().iter().filter(|x| x.is_some()).count() as u64 == k));
    }

    #[test]
    fn connectivity_of_known_graphs() {
        let p = |i: u32| PartyId(i);
        let g = RoutingGraph {
            d: 1,
            n_out: vec![vec![p(1)], vec![], vec![p(3)], vec![]],
            n_in: vec![vec![], vec![p(0)], vec![], vec![p(2)]],
            neighbors: vec![Some(vec![p(1)]), Some(vec![p(0)]), Some(vec![p(3)]), Some(vec![p(2)])],
        };
        assert!(!g.induced_connected(&[true; 4]));
        assert!(g.induced_connected(&[true, true, false, false]));
        assert!(g.induced_connected(&[false; 4]));
    }
}
