//! Broadcast with abort over the complete graph.
//!
//! `single_source` is the two-step send/echo protocol. `all_to_all` runs `n`
//! sends in parallel and then checks agreement succinctly with pairwise
//! fingerprint tests on the concatenated views instead of echoing everything;
//! `all_to_all_echo` is the cubic-cost echo baseline.

use std::sync::Arc;

use crate::bits::BitString;
use crate::netsim::{AbortReason, Allowance, Network, PartyId, Payload};
use crate::primitives::pairwise_equality;

pub const TAG_SEND: &str = "bc.send";
pub const TAG_ECHO: &str = "bc.echo";
pub const TAG_A2A: &str = "a2a.send";
pub const TAG_A2A_ECHO: &str = "a2a.echo";
pub const TAG_PROBE: &str = "a2a.probe";
pub const TAG_REPLY: &str = "a2a.reply";
pub const TAG_FLAG: &str = "a2a.flag";

/// What happens after a failed equality test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AbortMode {
    /// Failing parties send a one-bit flag to everyone; receivers abort too.
    #[default]
    Flag,
    /// Only the failing parties abort.
    Silent,
}

/// Sender sends `m` to everyone, everyone echoes what they got to everyone
/// else, and a receiver aborts if any echo differs from its own copy or is
/// missing. Returns each party's output.
pub fn single_source(
    net: &mut Network<'_>,
    sender: PartyId,
    m_len: usize,
    m: &BitString,
) -> Vec<Option<BitString>> {
    let n = net.n();
    let parties: Vec<PartyId> = net.parties().collect();
    let payload = Payload::bits(m.clone());
    for &j in parties.iter().filter(|&&j| j != sender) {
        net.send(sender, j, TAG_SEND, payload.clone());
    }
    let inbox = net.exchange(|msg| {
        if msg.tag == TAG_SEND && msg.from == sender {
            Allowance::Upto(m_len as u64)
        } else {
            Allowance::Ignore
        }
    });

    let mut heard: Vec<Option<Arc<BitString>>> = vec![None; n];
    heard[sender.index()] = Some(Arc::new(m.clone()));
    for &j in parties.iter().filter(|&&j| j != sender) {
        if !net.is_active(j) {
            continue;
        }
        let got = inbox
            .of(j)
            .iter()
            .find(|msg| msg.tag == TAG_SEND)
            .and_then(|msg| msg.payload.as_bits())
            .filter(|v| v.len() == m_len)
            .cloned();
        match got {
            Some(v) => heard[j.index()] = Some(Arc::new(v)),
            None => net.abort(j, AbortReason::Missing),
        }
    }

    for &j in parties.iter().filter(|&&j| j != sender) {
        let Some(v) = heard[j.index()].clone() else { continue };
        for &k in parties.iter().filter(|&&k| k != sender && k != j) {
            net.send(j, k, TAG_ECHO, Payload::Bits(v.clone()));
        }
    }
    let inbox = net.exchange(|msg| {
        if msg.tag == TAG_ECHO && msg.from != sender {
            Allowance::Upto(m_len as u64)
        } else {
            Allowance::Ignore
        }
    });

    let mut out = vec![None; n];
    for &j in &parties {
        if !net.is_active(j) {
            continue;
        }
        if j == sender {
            out[j.index()] = Some(m.clone());
            continue;
        }
        let Some(own) = heard[j.index()].clone() else { continue };
        let echoes = inbox.of(j).iter().filter(|msg| msg.tag == TAG_ECHO);
        let mut count = 0;
        let mut conflict = false;
        for e in echoes {
            count += 1;
            if e.payload.as_bits() != Some(&*own) {
                conflict = true;
            }
        }
        if conflict {
            net.abort(j, AbortReason::Equivocation);
        } else if count < n.saturating_sub(2) {
            net.abort(j, AbortReason::Missing);
        } else {
            out[j.index()] = Some((*own).clone());
        }
    }
    out
}

/// Canonical serialization of a view: ascending sender index, each value
/// behind a 32-bit length.
pub fn serialize_vector(values: &[Option<BitString>]) -> BitString {
    let mut out = BitString::new();
    for v in values {
        match v {
            Some(v) => {
                out.push_uint(v.len() as u64, 32);
                out.extend(v);
            }
            None => out.push_uint(0, 32),
        }
    }
    out
}

fn collect_round(
    net: &mut Network<'_>,
    inputs: &[BitString],
    ell: usize,
    inbox: &crate::netsim::Inbox,
    p: PartyId,
) -> Vec<Option<BitString>> {
    let n = net.n();
    let mut view: Vec<Option<BitString>> = vec![None; n];
    view[p.index()] = Some(inputs[p.index()].clone());
    for msg in inbox.of(p).iter().filter(|m| m.tag == TAG_A2A) {
        if let Some(v) = msg.payload.as_bits().filter(|v| v.len() == ell) {
            view[msg.from.index()] = Some(v.clone());
        }
    }
    view
}

fn send_all(net: &mut Network<'_>, inputs: &[BitString], ell: usize) -> crate::netsim::Inbox {
    let parties: Vec<PartyId> = net.parties().collect();
    for &i in &parties {
        let payload = Payload::bits(inputs[i.index()].clone());
        for &j in parties.iter().filter(|&&j| j != i) {
            net.send(i, j, TAG_A2A, payload.clone());
        }
    }
    net.exchange(|m| {
        if m.tag == TAG_A2A {
            Allowance::Upto(ell as u64)
        } else {
            Allowance::Ignore
        }
    })
}

/// Everyone sends its `ell`-bit input to everyone, then all pairs compare
/// their concatenated views by fingerprint. Returns each party's view of all
/// `n` inputs.
pub fn all_to_all(
    net: &mut Network<'_>,
    inputs: &[BitString],
    ell: usize,
    lambda: u32,
    mode: AbortMode,
) -> Vec<Option<Vec<BitString>>> {
    let n = net.n();
    let parties: Vec<PartyId> = net.parties().collect();
    let inbox = send_all(net, inputs, ell);

    let mut doomed: Vec<(PartyId, AbortReason)> = Vec::new();
    let mut views: Vec<Option<Vec<Option<BitString>>>> = vec![None; n];
    for &p in &parties {
        if !net.is_active(p) {
            continue;
        }
        let view = collect_round(net, inputs, ell, &inbox, p);
        if view.iter().any(Option::is_none) && net.is_honest(p) {
            doomed.push((p, AbortReason::Missing));
        }
        views[p.index()] = Some(view);
    }

    let strings: Vec<Option<Arc<BitString>>> = views
        .iter()
        .map(|v| v.as_ref().map(|v| Arc::new(serialize_vector(v))))
        .collect();
    let partners: Vec<Vec<PartyId>> = parties
        .iter()
        .map(|&i| parties.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let defer = mode == AbortMode::Flag;
    for failure in pairwise_equality(net, (TAG_PROBE, TAG_REPLY), lambda, &partners, &strings, defer, true) {
        if !doomed.iter().any(|(p, _)| *p == failure.0) {
            doomed.push(failure);
        }
    }

    match mode {
        AbortMode::Silent => {
            for &(p, reason) in &doomed {
                net.abort(p, reason);
            }
        }
        AbortMode::Flag => {
            let flag = Payload::bits(BitString::from_uint(1, 1));
            for &(p, _) in &doomed {
                for &j in parties.iter().filter(|&&j| j != p) {
                    net.send(p, j, TAG_FLAG, flag.clone());
                }
            }
            for &(p, reason) in &doomed {
                net.abort(p, reason);
            }
            let inbox = net.exchange(|m| {
                if m.tag == TAG_FLAG {
                    Allowance::Upto(1)
                } else {
                    Allowance::Ignore
                }
            });
            for &p in &parties {
                if inbox.of(p).iter().any(|m| m.tag == TAG_FLAG) {
                    net.abort(p, AbortReason::AbortFlag);
                }
            }
        }
    }

    views
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = PartyId::from(i);
            if !net.is_active(p) {
                return None;
            }
            v.and_then(|v| v.into_iter().collect::<Option<Vec<_>>>())
        })
        .collect()
}

/// The cubic baseline: after the first send, every party echoes every other
/// sender's value to every third party and compares.
pub fn all_to_all_echo(net: &mut Network<'_>, inputs: &[BitString], ell: usize) -> Vec<Option<Vec<BitString>>> {
    let n = net.n();
    let parties: Vec<PartyId> = net.parties().collect();
    let inbox = send_all(net, inputs, ell);

    let mut views: Vec<Option<Vec<Option<BitString>>>> = vec![None; n];
    for &p in &parties {
        if !net.is_active(p) {
            continue;
        }
        let view = collect_round(net, inputs, ell, &inbox, p);
        if view.iter().any(Option::is_none) {
            net.abort(p, AbortReason::Missing);
            continue;
        }
        views[p.index()] = Some(view);
    }

    for &j in &parties {
        let Some(view) = &views[j.index()] else { continue };
        for &k in parties.iter().filter(|&&k| k != j) {
            let mut echo = BitString::with_capacity((n - 2) * ell);
            for s in parties.iter().filter(|&&s| s != j && s != k) {
                echo.extend(view[s.index()].as_ref().expect("complete view"));
            }
            net.send(j, k, TAG_A2A_ECHO, Payload::bits(echo));
        }
    }
    let cap = (n.saturating_sub(2) * ell) as u64;
    let inbox = net.exchange(|m| {
        if m.tag == TAG_A2A_ECHO {
            Allowance::Upto(cap)
        } else {
            Allowance::Ignore
        }
    });

    let mut out = vec![None; n];
    for &k in &parties {
        if !net.is_active(k) {
            continue;
        }
        let Some(view) = views[k.index()].take() else { continue };
        let mut count = 0;
        let mut conflict = false;
        for msg in inbox.of(k).iter().filter(|m| m.tag == TAG_A2A_ECHO) {
            count += 1;
            let j = msg.from;
            let mut expect = BitString::with_capacity(cap as usize);
            for s in parties.iter().filter(|&&s| s != j && s != k) {
                expect.extend(view[s.index()].as_ref().expect("complete view"));
            }
            if msg.payload.as_bits() != Some(&expect) {
                conflict = true;
            }
        }
        if conflict {
            net.abort(k, AbortReason::Equivocation);
        } else if count < n - 1 {
            net.abort(k, AbortReason::Missing);
        } else {
            out[k.index()] = Some(view.into_iter().map(Option::unwrap).collect());
        }
    }
    out
}
