//! Trusted-party oracles for the encrypted functionalities.
//!
//! The committee protocols delegate key generation and evaluation to these
//! oracles. Each invocation charges the bits its real-world implementation
//! would move (one simultaneous broadcast among the participants, plus the
//! decryption shares and proofs that carry the output) onto the participants'
//! pairwise channels, and lets the adversary withhold the output from any
//! honest participants it names.

use std::collections::BTreeSet;
use std::fmt;

use crate::bits::{ceil_log2, BitString};
use crate::crypto::{CryptoBackend, KeyKind, KeyMaterial};
use crate::netsim::{AbortReason, Network, PartyId, Tag};

pub type Evaluator = fn(&[BitString]) -> Vec<BitString>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunctionError {
    #[error("unknown function {0:?}")]
    Unknown(String),
    #[error("{name} expects {expected} inputs, got {got}")]
    Arity {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{name} expects {expected}-bit inputs, slot {slot} has {got}")]
    Width {
        name: &'static str,
        slot: usize,
        expected: usize,
        got: usize,
    },
}

/// A function the parties compute, with its evaluator.
#[derive(Clone)]
pub struct FunctionSpec {
    pub name: &'static str,
    pub arity: usize,
    pub in_width: usize,
    /// Width of the single output, or of each party's output when
    /// `multi_output` is set.
    pub out_width: usize,
    pub depth: u32,
    pub multi_output: bool,
    eval: Evaluator,
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("in_width", &self.in_width)
            .field("out_width", &self.out_width)
            .field("multi_output", &self.multi_output)
            .finish()
    }
}

fn fold(inputs: &[BitString], op: fn(&BitString, &BitString) -> BitString) -> Vec<BitString> {
    let mut it = inputs.iter();
    let first = it.next().cloned().unwrap_or_default();
    vec![it.fold(first, |acc, x| op(&acc, x))]
}

fn eval_xor(inputs: &[BitString]) -> Vec<BitString> {
    fold(inputs, BitString::xor)
}

/// Balanced binary tree of ANDs; same value as a left fold.
fn eval_and_tree(inputs: &[BitString]) -> Vec<BitString> {
    let mut layer: Vec<BitString> = inputs.to_vec();
    while layer.len() > 1 {
        layer = layer
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0].and(&c[1]) } else { c[0].clone() })
            .collect();
    }
    vec![layer.pop().unwrap_or_default()]
}

fn eval_constant0(inputs: &[BitString]) -> Vec<BitString> {
    vec![BitString::zeros(inputs.first().map_or(1, BitString::len))]
}

fn eval_identity(inputs: &[BitString]) -> Vec<BitString> {
    inputs.to_vec()
}

fn eval_rotate(inputs: &[BitString]) -> Vec<BitString> {
    let m = inputs.len();
    (0..m).map(|i| inputs[(i + 1) % m].clone()).collect()
}

fn eval_swap(inputs: &[BitString]) -> Vec<BitString> {
    let m = inputs.len();
    (0..m)
        .map(|i| {
            let j = i ^ 1;
            inputs[if j < m { j } else { i }].clone()
        })
        .collect()
}

pub const FUNCTION_NAMES: [&str; 6] = ["xor", "and_tree", "constant0", "identity", "rotate", "swap"];

impl FunctionSpec {
    pub fn by_name(name: &str, arity: usize, width: usize) -> Result<Self, FunctionError> {
        let (name, eval, multi): (&'static str, Evaluator, bool) = match name {
            "xor" => ("xor", eval_xor, false),
            "and_tree" | "and" => ("and_tree", eval_and_tree, false),
            "constant0" | "zero" => ("constant0", eval_constant0, false),
            "identity" => ("identity", eval_identity, true),
            "rotate" => ("rotate", eval_rotate, true),
            "swap" => ("swap", eval_swap, true),
            other => return Err(FunctionError::Unknown(other.to_string())),
        };
        Ok(Self {
            name,
            arity,
            in_width: width,
            out_width: width,
            depth: 8,
            multi_output: multi,
            eval,
        })
    }

    pub fn xor(arity: usize, width: usize) -> Self {
        Self::by_name("xor", arity, width).expect("built-in")
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.depth = depth.max(1);
        self
    }

    /// All output bits the function produces, over every recipient.
    pub fn total_output_bits(&self) -> usize {
        if self.multi_output {
            self.arity * self.out_width
        } else {
            self.out_width
        }
    }

    /// One entry for single-output functions, one per party otherwise.
    pub fn evaluate(&self, inputs: &[BitString]) -> Result<Vec<BitString>, FunctionError> {
        if inputs.len() != self.arity {
            return Err(FunctionError::Arity {
                name: self.name,
                expected: self.arity,
                got: inputs.len(),
            });
        }
        if let Some((slot, x)) = inputs.iter().enumerate().find(|(_, x)| x.len() != self.in_width) {
            return Err(FunctionError::Width {
                name: self.name,
                slot,
                expected: self.in_width,
                got: x.len(),
            });
        }
        Ok((self.eval)(inputs))
    }
}

/// Bits charged for one oracle call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct OracleCharge {
    pub broadcast_bits: u64,
    pub output_bits: u64,
}

/// Simultaneous broadcast of `poly_in(ell_in)`-bit inputs among `c`
/// participants: every ordered pair carries the input plus a
/// `λ·ceil(log2 c)`-bit verification share.
pub fn broadcast_charge(cost: &crate::crypto::CostModel, c: usize, ell_in: u64) -> u64 {
    if c < 2 {
        return 0;
    }
    let c = c as u64;
    let log_factor = ceil_log2(c).max(1) as u64;
    cost.c_sb * c * (c - 1) * (cost.poly_in(ell_in) + cost.lambda as u64 * log_factor)
}

/// One decryption share and proof per participant per output bit.
pub fn output_charge(cost: &crate::crypto::CostModel, c: usize, ell_out: u64) -> u64 {
    ell_out * c as u64 * (cost.b_share + cost.b_proof)
}

/// Where an oracle's charge lands.
pub enum Spread<'a> {
    /// Uniformly over ordered pairs of participants.
    Pairs,
    /// Uniformly over the given directed channels.
    Edges(&'a [(PartyId, PartyId)]),
    /// From every other participant to one receiver.
    To(PartyId),
}

fn spread_uniform(net: &mut Network<'_>, channels: &[(PartyId, PartyId)], total: u64, tag: Tag) {
    if channels.is_empty() || total == 0 {
        return;
    }
    let k = channels.len() as u64;
    let (base, extra) = (total / k, total % k);
    for (i, &(a, b)) in channels.iter().enumerate() {
        net.charge(a, b, tag, base + u64::from((i as u64) < extra));
    }
}

pub fn apply_charge(net: &mut Network<'_>, participants: &[PartyId], spread: &Spread<'_>, total: u64, tag: Tag) {
    match spread {
        Spread::Pairs => {
            let pairs: Vec<(PartyId, PartyId)> = participants
                .iter()
                .flat_map(|&a| participants.iter().filter(move |&&b| b != a).map(move |&b| (a, b)))
                .collect();
            spread_uniform(net, &pairs, total, tag);
        }
        Spread::Edges(edges) => spread_uniform(net, edges, total, tag),
        Spread::To(receiver) => {
            let pairs: Vec<(PartyId, PartyId)> = participants
                .iter()
                .filter(|&&a| a != *receiver)
                .map(|&a| (a, *receiver))
                .collect();
            spread_uniform(net, &pairs, total, tag);
        }
    }
}

/// Asks the adversary which honest participants lose their output, and aborts
/// them. Returns the full denied set.
pub(crate) fn selective_abort(net: &mut Network<'_>, tag: Tag, participants: &[PartyId]) -> BTreeSet<PartyId> {
    let honest: Vec<PartyId> = participants.iter().copied().filter(|&p| net.is_honest(p)).collect();
    let denied: BTreeSet<PartyId> = match net.adversary() {
        Some((adv, rng)) => adv
            .selective_abort(tag, &honest, rng)
            .into_iter()
            .filter(|p| honest.contains(p))
            .collect(),
        None => BTreeSet::new(),
    };
    for &p in &denied {
        net.abort(p, AbortReason::Oracle);
    }
    denied
}

fn contribution(net: &mut Network<'_>, tag: Tag, p: PartyId, default: BitString) -> BitString {
    if net.is_honest(p) {
        return default;
    }
    match net.adversary() {
        Some((adv, rng)) => adv.oracle_input(tag, p, default, rng),
        None => default,
    }
}

/// Output of a key-generation oracle. The secret half stays with the oracle.
#[derive(Clone, Debug)]
pub struct KeyDelivery {
    pub public: KeyMaterial,
    pub secret: KeyMaterial,
    pub participants: Vec<PartyId>,
    pub denied: BTreeSet<PartyId>,
    pub charge: OracleCharge,
}

impl KeyDelivery {
    pub fn received(&self, p: PartyId) -> bool {
        self.participants.binary_search(&p).is_ok() && !self.denied.contains(&p)
    }
}

/// Joint key generation: every participant contributes `λ` random bits and
/// the key pair is derived from their XOR. `kind` selects encryption or
/// signature keys. `participants` must be sorted.
pub fn f_gen(
    net: &mut Network<'_>,
    backend: &mut dyn CryptoBackend,
    participants: &[PartyId],
    kind: KeyKind,
    tag: Tag,
) -> KeyDelivery {
    let cost = *backend.cost();
    let lambda = cost.lambda as usize;
    let mut r = BitString::zeros(lambda);
    for &p in participants {
        let own = BitString::random(net.party_rng(p), lambda);
        let mut given = contribution(net, tag, p, own);
        if given.len() != lambda {
            given = BitString::zeros(lambda);
        }
        r = r.xor(&given);
    }
    let (public, secret) = match kind {
        KeyKind::SigPublic | KeyKind::SigSecret => backend.sig_gen(&r),
        _ => backend.pke_gen(&r),
    };
    let charge = OracleCharge {
        broadcast_bits: broadcast_charge(&cost, participants.len(), cost.lambda as u64),
        output_bits: 0,
    };
    apply_charge(net, participants, &Spread::Pairs, charge.broadcast_bits, tag);
    let denied = selective_abort(net, tag, participants);
    net.idle_round();
    KeyDelivery {
        public,
        secret,
        participants: participants.to_vec(),
        denied,
        charge,
    }
}

/// What the functionality actually computed on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// Plaintext per slot after decryption, with `0^ℓ` for unusable slots.
    pub effective_inputs: Vec<BitString>,
    /// Evaluator output: one entry, or one per party for multi-output.
    pub outputs: Vec<BitString>,
}

#[derive(Clone, Debug)]
pub struct CompDelivery {
    pub evaluation: Evaluation,
    pub denied: BTreeSet<PartyId>,
    pub charge: OracleCharge,
}

fn decrypt_slots(
    backend: &mut dyn CryptoBackend,
    sk: &KeyMaterial,
    w: &[Option<BitString>],
    width: usize,
) -> Vec<BitString> {
    w.iter()
        .map(|slot| {
            slot.as_ref()
                .and_then(|ct| backend.pke_dec(sk, ct).ok())
                .filter(|x| x.len() == width)
                .unwrap_or_else(|| BitString::zeros(width))
        })
        .collect()
}

/// Decrypts the agreed ciphertext vector `w` under the jointly generated key
/// and delivers `f(x)` to every participant. Missing or malformed slots count
/// as `0^ℓ`.
pub fn f_comp(
    net: &mut Network<'_>,
    backend: &mut dyn CryptoBackend,
    key: &KeyDelivery,
    participants: &[PartyId],
    w: &[Option<BitString>],
    f: &FunctionSpec,
    spread: Spread<'_>,
    tag: Tag,
) -> CompDelivery {
    let cost = *backend.cost();
    let effective_inputs = decrypt_slots(backend, &key.secret, w, f.in_width);
    let outputs = f.evaluate(&effective_inputs).expect("slots normalized to the function's shape");
    let charge = OracleCharge {
        broadcast_bits: 0,
        output_bits: output_charge(&cost, participants.len(), f.total_output_bits() as u64),
    };
    apply_charge(net, participants, &spread, charge.output_bits, tag);
    let denied = selective_abort(net, tag, participants);
    net.idle_round();
    CompDelivery {
        evaluation: Evaluation {
            effective_inputs,
            outputs,
        },
        denied,
        charge,
    }
}

/// One party's sealed and signed output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedOutput {
    pub ct: BitString,
    pub sigma: BitString,
}

#[derive(Clone, Debug)]
pub struct SignDelivery {
    pub evaluation: Evaluation,
    pub designated: PartyId,
    /// `None` when the designated party was denied its output.
    pub outputs: Option<Vec<SignedOutput>>,
    pub charge: OracleCharge,
}

/// Multi-output evaluation: slot `i`'s output is encrypted under the
/// symmetric key party `i` supplied (encrypted in `kprime`) and signed with
/// the jointly generated signing key. The whole list goes to the
/// lowest-indexed participant.
#[allow(clippy::too_many_arguments)]
pub fn f_comp_sign(
    net: &mut Network<'_>,
    backend: &mut dyn CryptoBackend,
    enc_key: &KeyDelivery,
    sig_key: &KeyDelivery,
    participants: &[PartyId],
    w: &[Option<BitString>],
    kprime: &[Option<BitString>],
    f: &FunctionSpec,
    tag: Tag,
) -> SignDelivery {
    let cost = *backend.cost();
    let effective_inputs = decrypt_slots(backend, &enc_key.secret, w, f.in_width);
    let sym_keys = decrypt_slots(backend, &enc_key.secret, kprime, cost.b_skey as usize);
    let outputs = f.evaluate(&effective_inputs).expect("slots normalized to the function's shape");
    let signed: Vec<SignedOutput> = outputs
        .iter()
        .zip(&sym_keys)
        .map(|(y, k)| {
            let k = KeyMaterial {
                kind: KeyKind::Sym,
                bits: k.clone(),
            };
            let ct = backend.ske_enc(&k, y).expect("outputs fit the plaintext cap");
            let sigma = backend.sig_sign(&sig_key.secret, &ct).expect("signing key kind");
            SignedOutput { ct, sigma }
        })
        .collect();
    let designated = participants[0];
    let ell_out: u64 = signed.iter().map(|s| (s.ct.len() + s.sigma.len()) as u64).sum();
    let charge = OracleCharge {
        broadcast_bits: 0,
        output_bits: output_charge(&cost, participants.len(), ell_out),
    };
    apply_charge(net, participants, &Spread::To(designated), charge.output_bits, tag);
    let denied = selective_abort(net, tag, &[designated]);
    net.idle_round();
    SignDelivery {
        evaluation: Evaluation {
            effective_inputs,
            outputs,
        },
        designated,
        outputs: if denied.is_empty() { Some(signed) } else { None },
        charge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{CostModel, MockBackend};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ids(k: usize) -> Vec<PartyId> {
        (0..k).map(PartyId::from).collect()
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Reference evaluators written independently of the ones above.
    fn plain(name: &str, xs: &[u64], width: usize) -> Vec<u64> {
        let m = xs.len();
        match name {
            "xor" => vec![xs.iter().fold(0, |a, x| a ^ x)],
            "and_tree" => vec![xs.iter().fold((1 << width) - 1, |a, x| a & x)],
            "constant0" => vec![0],
            "identity" => xs.to_vec(),
            "rotate" => (0..m).map(|i| xs[(i + 1) % m]).collect(),
            "swap" => (0..m)
                .map(|i| if i % 2 == 0 && i + 1 < m { xs[i + 1] } else if i % 2 == 1 { xs[i - 1] } else { xs[i] })
                .collect(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn evaluators_agree_with_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in FUNCTION_NAMES {
            for m in [1usize, 2, 3, 4, 7] {
                let f = FunctionSpec::by_name(name, m, 8).unwrap();
                for _ in 0..200 {
                    let xs: Vec<u64> = (0..m).map(|_| rand::Rng::random_range(&mut rng, 0..256)).collect();
                    let inputs: Vec<BitString> = xs.iter().map(|&x| BitString::from_uint(x, 8)).collect();
                    let got: Vec<u64> = f.evaluate(&inputs).unwrap().iter().map(|y| y.read_uint(0, 8)).collect();
                    assert_eq!(got, plain(name, &xs, 8), "{name} on {xs:?}");
                }
            }
        }
    }

    #[test]
    fn evaluate_checks_shape() {
        let f = FunctionSpec::xor(2, 4);
        assert!(matches!(f.evaluate(&[bs("0000")]), Err(FunctionError::Arity { .. })));
        assert!(matches!(f.evaluate(&[bs("0000"), bs("1")]), Err(FunctionError::Width { slot: 1, .. })));
        assert!(matches!(FunctionSpec::by_name("median", 2, 4), Err(FunctionError::Unknown(_))));
    }

    #[test]
    fn gen_with_zero_contributions_is_gen_of_zero() {
        struct Zeros;
        impl crate::adversary::Adversary for Zeros {
            fn on_round(&mut self, _: &mut crate::netsim::RoundView<'_>) {}
            fn oracle_input(&mut self, _: Tag, _: PartyId, d: BitString, _: &mut rand_chacha::ChaCha12Rng) -> BitString {
                BitString::zeros(d.len())
            }
        }
        let mut adv = Zeros;
        let corrupt: BTreeSet<PartyId> = ids(4).into_iter().collect();
        let mut net = Network::new(4, 3).with_adversary(&corrupt, &mut adv);
        let mut backend = MockBackend::new(CostModel::new(8, 8));
        let got = f_gen(&mut net, &mut backend, &ids(4), KeyKind::EncPublic, "gen");
        assert_eq!(got.public, backend.pke_gen(&BitString::zeros(8)).0);
    }

    #[test]
    fn one_honest_contribution_makes_key_uniform() {
        // With a single honest party and three adversarial zero contributions,
        // the derived key is pke_gen of the honest party's uniform seed. Over
        // many runs the seed's low bit is balanced.
        struct Fixed;
        impl crate::adversary::Adversary for Fixed {
            fn on_round(&mut self, _: &mut crate::netsim::RoundView<'_>) {}
            fn oracle_input(&mut self, _: Tag, _: PartyId, d: BitString, _: &mut rand_chacha::ChaCha12Rng) -> BitString {
                BitString::ones(d.len())
            }
        }
        let mut backend = MockBackend::new(CostModel::new(4, 8));
        let table: std::collections::HashMap<BitString, u64> = (0..16u64)
            .map(|r| (backend.pke_gen(&BitString::from_uint(r, 4)).0.bits, r))
            .collect();
        let mut counts = [0u32; 16];
        for seed in 0..1600 {
            let mut adv = Fixed;
            let corrupt: BTreeSet<PartyId> = [1, 2, 3].into_iter().map(PartyId).collect();
            let mut net = Network::new(4, seed).with_adversary(&corrupt, &mut adv);
            let got = f_gen(&mut net, &mut backend, &ids(4), KeyKind::EncPublic, "gen");
            counts[table[&got.public.bits] as usize] += 1;
        }
        // Chi-square, 15 degrees of freedom, 99.9th percentile 37.70.
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 100.0).powi(2) / 100.0).sum();
        assert!(chi2 < 37.70, "{counts:?}");
    }

    #[test]
    fn broadcast_charge_closed_form_at_32() {
        let cost = CostModel::new(8, 8);
        let mut backend = MockBackend::new(cost);
        let mut net = Network::new(32, 1);
        let got = f_gen(&mut net, &mut backend, &ids(32), KeyKind::EncPublic, "gen");
        // poly_in = 64 + 64*8 + 64 = 640, log factor ceil(log2 32) = 5.
        let expect = 32 * 31 * (640 + 8 * 5);
        assert_eq!(got.charge.broadcast_bits, expect);
        assert_eq!(net.metrics().total_bits(), expect);
        let per_party: Vec<u64> = ids(32).iter().map(|&p| net.metrics().sent_by(p)).collect();
        assert!(per_party.iter().max().unwrap() - per_party.iter().min().unwrap() <= 31);
    }

    #[test]
    fn comp_on_xor_of_encrypted_bits() {
        let mut backend = MockBackend::new(CostModel::new(8, 8));
        let mut net = Network::new(4, 1);
        let key = f_gen(&mut net, &mut backend, &ids(4), KeyKind::EncPublic, "gen");
        let w: Vec<Option<BitString>> = ["1", "0", "1", "1"]
            .iter()
            .map(|x| Some(backend.pke_enc(&key.public, &bs(x)).unwrap()))
            .collect();
        let f = FunctionSpec::xor(4, 1);
        let out = f_comp(&mut net, &mut backend, &key, &ids(4), &w, &f, Spread::Pairs, "comp");
        assert_eq!(out.evaluation.outputs, vec![bs("1")]);
        assert_eq!(out.charge.output_bits, 4 * (64 + 64));

        let zero = FunctionSpec::by_name("constant0", 4, 1).unwrap();
        let out = f_comp(&mut net, &mut backend, &key, &ids(4), &w, &zero, Spread::Pairs, "comp");
        assert_eq!(out.evaluation.outputs, vec![bs("0")]);
    }

    #[test]
    fn comp_matches_direct_and_tree() {
        let mut backend = MockBackend::new(CostModel::new(8, 8));
        let mut net = Network::new(4, 2);
        let key = f_gen(&mut net, &mut backend, &ids(4), KeyKind::EncPublic, "gen");
        let f = FunctionSpec::by_name("and_tree", 4, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let xs: Vec<BitString> = (0..4).map(|_| BitString::random(&mut rng, 8)).collect();
            let w: Vec<Option<BitString>> =
                xs.iter().map(|x| Some(backend.pke_enc(&key.public, x).unwrap())).collect();
            let out = f_comp(&mut net, &mut backend, &key, &ids(4), &w, &f, Spread::Pairs, "comp");
            let direct = xs.iter().skip(1).fold(xs[0].clone(), |a, x| a.and(x));
            assert_eq!(out.evaluation.outputs, vec![direct]);
        }
    }

    #[test]
    fn malformed_slots_default_to_zero() {
        let mut backend = MockBackend::new(CostModel::new(8, 8));
        let mut net = Network::new(3, 1);
        let key = f_gen(&mut net, &mut backend, &ids(3), KeyKind::EncPublic, "gen");
        let w = vec![
            Some(backend.pke_enc(&key.public, &bs("1111")).unwrap()),
            Some(BitString::zeros(64)),
            None,
        ];
        let f = FunctionSpec::by_name("identity", 3, 4).unwrap();
        let out = f_comp(&mut net, &mut backend, &key, &ids(3), &w, &f, Spread::Pairs, "comp");
        assert_eq!(out.evaluation.effective_inputs, vec![bs("1111"), bs("0000"), bs("0000")]);
    }

    #[test]
    fn signed_swap_outputs_decrypt_and_verify() {
        let mut backend = MockBackend::new(CostModel::new(8, 8));
        let mut net = Network::new(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let enc = f_gen(&mut net, &mut backend, &ids(2), KeyKind::EncPublic, "gen1");
        let sig = f_gen(&mut net, &mut backend, &ids(2), KeyKind::SigPublic, "gen2");
        let xs = [bs("0011"), bs("0101")];
        let ks: Vec<KeyMaterial> = (0..2).map(|_| backend.ske_gen(&mut rng)).collect();
        let w: Vec<Option<BitString>> = xs.iter().map(|x| backend.pke_enc(&enc.public, x).ok()).collect();
        let kp: Vec<Option<BitString>> = ks.iter().map(|k| backend.pke_enc(&enc.public, &k.bits).ok()).collect();
        let f = FunctionSpec::by_name("swap", 2, 4).unwrap();
        let out = f_comp_sign(&mut net, &mut backend, &enc, &sig, &ids(2), &w, &kp, &f, "sign");
        assert_eq!(out.designated, PartyId(0));
        let list = out.outputs.unwrap();
        for (i, s) in list.iter().enumerate() {
            assert!(backend.sig_verify(&sig.public, &s.ct, &s.sigma));
            assert_eq!(backend.ske_dec(&ks[i], &s.ct).unwrap(), xs[1 - i]);
            for b in 0..s.ct.len() {
                let mut bad = s.ct.clone();
                bad.flip(b);
                assert!(!backend.sig_verify(&sig.public, &bad, &s.sigma));
            }
        }
    }

    #[test]
    fn charges_do_not_depend_on_values() {
        let cost = CostModel::new(4, 8);
        let run = |bits: &str| {
            let mut backend = MockBackend::new(cost);
            let mut net = Network::new(5, 77);
            let key = f_gen(&mut net, &mut backend, &ids(5), KeyKind::EncPublic, "gen");
            let w: Vec<Option<BitString>> =
                (0..5).map(|_| backend.pke_enc(&key.public, &bs(bits)).ok()).collect();
            let f = FunctionSpec::xor(5, 3);
            f_comp(&mut net, &mut backend, &key, &ids(5), &w, &f, Spread::Pairs, "comp");
            net.metrics().clone()
        };
        assert_eq!(run("000"), run("101"));
    }
}
