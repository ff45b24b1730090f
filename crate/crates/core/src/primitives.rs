//! Fingerprint equality testing and the sampling utilities around it.
//!
//! Two parties holding `m1` and `m2` compare them with `O(λ log n)` bits: the
//! first samples a random prime `p <= n^λ` and sends `(p, m1 mod p)`, the
//! second replies whether `m2 mod p` matches.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::bits::{ceil_log2, BitString};
use crate::netsim::{AbortReason, Allowance, Network, PartyId, Payload, Tag};

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const TRIAL_DIVISION_LIMIT: u64 = 1 << 20;

/// Bases that make Miller-Rabin exact below 2^32 and below 2^64.
const MR_BASES_32: [u64; 3] = [2, 7, 61];
const MR_BASES_64: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

/// Exact primality for 64-bit integers: trial division below 2^20, otherwise
/// deterministic Miller-Rabin.
pub fn is_prime_u64(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    for p in SMALL_PRIMES {
        if x == p {
            return true;
        }
        if x.is_multiple_of(p) {
            return false;
        }
    }
    if x < TRIAL_DIVISION_LIMIT {
        let mut d = 41u64;
        while d * d <= x {
            if x.is_multiple_of(d) {
                return false;
            }
            d += 2;
        }
        return true;
    }
    let mut d = x - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    if x < 1 << 32 {
        miller_rabin(x, d, s, &MR_BASES_32, |a, b| a * b % x)
    } else {
        miller_rabin(x, d, s, &MR_BASES_64, |a, b| ((a as u128 * b as u128) % x as u128) as u64)
    }
}

/// `x - 1 = d * 2^s` with `d` odd; `mul` is multiplication mod `x`.
fn miller_rabin(x: u64, d: u64, s: u32, bases: &[u64], mul: impl Fn(u64, u64) -> u64) -> bool {
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for &a in bases {
        let a = a % x;
        if a == 0 {
            continue;
        }
        let mut y = pow(a, d);
        if y == 1 || y == x - 1 {
            continue;
        }
        for _ in 1..s {
            y = mul(y, y);
            if y == x - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin over 32 fixed prime bases; error below 4^-32 for any input.
pub fn is_prime_big(x: &BigUint) -> bool {
    if let Some(small) = x.to_u64() {
        return is_prime_u64(small);
    }
    if x.is_even() {
        return false;
    }
    for p in primes_up_to(1000) {
        if (x % p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let x_minus_1 = x - &one;
    let s = x_minus_1.trailing_zeros().unwrap_or(0);
    let d = &x_minus_1 >> s;
    'witness: for a in primes_up_to(131).into_iter().take(32) {
        let mut y = BigUint::from(a).modpow(&d, x);
        if y == one || y == x_minus_1 {
            continue;
        }
        for _ in 1..s {
            y = (&y * &y) % x;
            if y == x_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// `n^λ`, the upper end of the prime range.
pub fn prime_bound(n: u64, lambda: u32) -> BigUint {
    BigUint::from(n).pow(lambda)
}

/// Bits needed for any value below `n^λ`.
pub fn fingerprint_width(n: u64, lambda: u32) -> usize {
    let bound = prime_bound(n, lambda);
    (bound - 1u32).bits().max(1) as usize
}

fn uniform_below_big<R: Rng + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    let bits = bound.bits() as usize;
    loop {
        let candidate = BitString::random(rng, bits).to_biguint();
        if &candidate < bound {
            return candidate;
        }
    }
}

/// A uniformly random prime in `[2, n^λ]` by rejection sampling.
pub fn sample_prime<R: Rng + ?Sized>(n: u64, lambda: u32, rng: &mut R) -> BigUint {
    assert!(n >= 2 && lambda >= 1, "need n >= 2 and lambda >= 1");
    let bound = prime_bound(n, lambda);
    if let Some(b) = bound.to_u128().filter(|&b| b <= 1u128 << 64) {
        // Candidates are 2 and the odd numbers in [3, b], each equally likely,
        // so the accepted prime is still uniform.
        let b = b.min(u64::MAX as u128) as u64;
        let odd = (b - 1) / 2;
        loop {
            let k = rng.random_range(0..=odd);
            if k == odd {
                return BigUint::from(2u32);
            }
            let c = 3 + 2 * k;
            if is_prime_u64(c) {
                return BigUint::from(c);
            }
        }
    }
    let span = &bound - 1u32;
    loop {
        let c = uniform_below_big(rng, &span) + 2u32;
        if is_prime_big(&c) {
            return c;
        }
    }
}

/// `m mod p` for the MSB-first integer reading of `m`.
pub fn residue(m: &BitString, p: &BigUint) -> BigUint {
    match p.to_u64() {
        Some(small) => BigUint::from(m.mod_u64(small)),
        None => m.mod_big(p),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fingerprint {
    pub prime: BigUint,
    pub residue: BigUint,
}

impl Fingerprint {
    pub fn of(m: &BitString, prime: BigUint) -> Self {
        let residue = residue(m, &prime);
        Self { prime, residue }
    }

    pub fn matches(&self, m: &BitString) -> bool {
        residue(m, &self.prime) == self.residue
    }

    /// Wire form: `ceil(log2 W)` bits holding `L - 1`, then `p - 2` in `L`
    /// bits, then the residue in `W` bits, where `W` is the width of `n^λ - 1`.
    pub fn encode(&self, n: u64, lambda: u32) -> BitString {
        Codec::new(n, lambda).encode(self)
    }

    pub fn decode(bits: &BitString, n: u64, lambda: u32) -> Option<Self> {
        Codec::new(n, lambda).decode(bits)
    }
}

/// Fingerprint wire format for one `(n, λ)`, with the bound precomputed.
struct Codec {
    w: usize,
    prefix: usize,
    bound: BigUint,
}

impl Codec {
    fn new(n: u64, lambda: u32) -> Self {
        let bound = prime_bound(n, lambda);
        let w = (&bound - 1u32).bits().max(1) as usize;
        Self {
            w,
            prefix: ceil_log2(w as u64) as usize,
            bound,
        }
    }

    fn encode(&self, fp: &Fingerprint) -> BitString {
        let shifted = &fp.prime - 2u32;
        let l = shifted.bits().max(1) as usize;
        let mut out = BitString::with_capacity(self.prefix + l + self.w);
        out.push_uint((l - 1) as u64, self.prefix);
        match (shifted.to_u64(), fp.residue.to_u64()) {
            (Some(p), Some(r)) if self.w <= 64 => {
                out.push_uint(p, l);
                out.push_uint(r, self.w);
            }
            _ => {
                out.extend(&BitString::from_biguint(&shifted, l));
                out.extend(&BitString::from_biguint(&fp.residue, self.w));
            }
        }
        out
    }

    fn decode(&self, bits: &BitString) -> Option<Fingerprint> {
        let (w, prefix) = (self.w, self.prefix);
        if bits.len() < prefix {
            return None;
        }
        let l = bits.read_uint(0, prefix) as usize + 1;
        if bits.len() != prefix + l + w {
            return None;
        }
        let (prime, residue) = if w <= 64 {
            (
                BigUint::from(bits.read_uint(prefix, l)) + 2u32,
                BigUint::from(bits.read_uint(prefix + l, w)),
            )
        } else {
            (
                bits.slice(prefix, l).to_biguint() + 2u32,
                bits.slice(prefix + l, w).to_biguint(),
            )
        };
        if residue >= prime || prime > self.bound {
            return None;
        }
        Some(Fingerprint { prime, residue })
    }
}

/// Upper bound on the bits one equality test moves, reply included.
pub fn equality_bits_bound(n: u64, lambda: u32) -> u64 {
    let w = fingerprint_width(n, lambda) as u64;
    2 * w + ceil_log2(w) as u64 + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqualityOutcome {
    pub equal: bool,
    pub bits_exchanged: u64,
}

/// Both sides of one test, run locally.
pub fn equality_test<R: Rng + ?Sized>(
    m1: &BitString,
    m2: &BitString,
    n: u64,
    lambda: u32,
    rng: &mut R,
) -> EqualityOutcome {
    let fp = Fingerprint::of(m1, sample_prime(n, lambda, rng));
    let wire = fp.encode(n, lambda);
    let received = Fingerprint::decode(&wire, n, lambda).expect("codec round trip");
    EqualityOutcome {
        equal: received.matches(m2),
        bits_exchanged: wire.len() as u64 + 1,
    }
}

/// Exact probability over the prime draw that the test tells `m1` and `m2` apart.
pub fn detection_probability(m1: &BitString, m2: &BitString, n: u64, lambda: u32) -> f64 {
    let bound = prime_bound(n, lambda)
        .to_u64()
        .expect("exhaustive enumeration needs a small prime range");
    let primes = primes_up_to(bound);
    let detected = primes
        .iter()
        .filter(|&&p| m1.mod_u64(p) != m2.mod_u64(p))
        .count();
    detected as f64 / primes.len() as f64
}

/// Runs equality tests between every listed pair over the network, in two
/// rounds. `partners[i]` is party `i`'s own sorted list of test partners; the
/// lower index of each pair sends the fingerprint. Returns the honest parties
/// whose tests failed or, with `require_partner`, whose partner stayed silent.
/// Those parties abort immediately unless `defer_abort` is set, in which case
/// the caller decides.
pub fn pairwise_equality(
    net: &mut Network<'_>,
    tags: (Tag, Tag),
    lambda: u32,
    partners: &[Vec<PartyId>],
    strings: &[Option<Arc<BitString>>],
    defer_abort: bool,
    require_partner: bool,
) -> Vec<(PartyId, AbortReason)> {
    let (probe_tag, reply_tag) = tags;
    let n = net.n() as u64;
    let probe_cap = equality_bits_bound(n, lambda) - 1;
    let codec = Codec::new(n, lambda);
    // Tests between two corrupted parties cannot affect anyone honest.
    let corrupt = net.corrupted().to_vec();
    let internal = |x: PartyId, y: PartyId| corrupt[x.index()] && corrupt[y.index()];

    // What each prover actually computed, so a verifier holding the same
    // string can skip recomputing an identical residue.
    let mut sent: HashMap<(PartyId, PartyId), Fingerprint> = HashMap::new();
    for a in net.parties().collect::<Vec<_>>() {
        if !net.is_active(a) {
            continue;
        }
        let Some(m) = strings[a.index()].clone() else {
            continue;
        };
        for &b in partners[a.index()].iter().filter(|&&b| b > a && !internal(a, b)) {
            let prime = sample_prime(n, lambda, net.party_rng(a));
            let fp = Fingerprint::of(&m, prime);
            net.send(a, b, probe_tag, Payload::bits(codec.encode(&fp)));
            sent.insert((a, b), fp);
        }
    }
    let listed = |owner: PartyId, peer: PartyId| partners[owner.index()].binary_search(&peer).is_ok();
    let inbox = net.exchange(|m| {
        if m.tag == probe_tag && m.from < m.to && listed(m.to, m.from) {
            Allowance::Upto(probe_cap)
        } else {
            Allowance::Ignore
        }
    });

    let mut failed: Vec<(PartyId, AbortReason)> = Vec::new();
    for b in net.parties().collect::<Vec<_>>() {
        if !net.is_active(b) {
            continue;
        }
        let Some(mb) = strings[b.index()].clone() else {
            continue;
        };
        let mut reason = None;
        let mut replies = Vec::new();
        for &a in partners[b.index()].iter().filter(|&&a| a < b && !internal(a, b)) {
            let probe = inbox
                .from(b, a)
                .iter()
                .find(|m| m.tag == probe_tag)
                .and_then(|m| m.payload.as_bits());
            let Some(probe) = probe else {
                if require_partner {
                    reason.get_or_insert(AbortReason::Missing);
                }
                continue;
            };
            let equal = match codec.decode(probe) {
                None => false,
                Some(fp) => {
                    let shortcut = sent.get(&(a, b)).filter(|own| {
                        own.prime == fp.prime && strings[a.index()].as_deref() == Some(&*mb)
                    });
                    match shortcut {
                        Some(own) => own.residue == fp.residue,
                        None => fp.matches(&mb),
                    }
                }
            };
            if !equal {
                reason.get_or_insert(AbortReason::EqualityFail);
            }
            replies.push((a, equal));
        }
        if let Some(r) = reason {
            if !defer_abort {
                net.abort(b, r);
            }
            if net.is_honest(b) {
                failed.push((b, r));
            }
        }
        for (a, equal) in replies {
            net.send_parting(b, a, reply_tag, Payload::bits(BitString::from_uint(equal as u64, 1)));
        }
    }
    let inbox = net.exchange(|m| {
        if m.tag == reply_tag && m.from > m.to && listed(m.to, m.from) {
            Allowance::Upto(1)
        } else {
            Allowance::Ignore
        }
    });

    for a in net.parties().collect::<Vec<_>>() {
        if !net.is_active(a) || strings[a.index()].is_none() {
            continue;
        }
        let mut reason = None;
        for &b in partners[a.index()].iter().filter(|&&b| b > a && !internal(a, b)) {
            let reply = inbox
                .from(a, b)
                .iter()
                .find(|m| m.tag == reply_tag)
                .and_then(|m| m.payload.as_bits());
            match reply {
                None if require_partner => {
                    reason.get_or_insert(AbortReason::Missing);
                }
                None => {}
                Some(r) if r.len() != 1 || !r.get(0) => {
                    reason.get_or_insert(AbortReason::EqualityFail);
                }
                Some(_) => {}
            }
        }
        if let Some(r) = reason {
            if !defer_abort {
                net.abort(a, r);
            }
            if net.is_honest(a) && !failed.iter().any(|(p, _)| *p == a) {
                failed.push((a, r));
            }
        }
    }
    failed
}

/// A Monte-Carlo proportion with its 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let (lower, upper) = wilson_interval(successes, trials, 1.96);
        let p_hat = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Self {
            successes,
            trials,
            p_hat,
            lower,
            upper,
        }
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Probability that a `p`-sampled subset of `[n]` contains at least `p·|H|/2`
/// members of a fixed `H` of size `h_size`. Only membership of `H` matters,
/// so only those coins are flipped.
pub fn hitting_set_estimate<R: Rng + ?Sized>(
    n: usize,
    h_size: usize,
    p: f64,
    trials: u64,
    rng: &mut R,
) -> Estimate {
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    assert!(h_size <= n);
    let threshold = p * h_size as f64 / 2.0;
    let hits = (0..trials)
        .filter(|_| {
            let k = (0..h_size).filter(|_| rng.random_bool(p)).count();
            k as f64 >= threshold
        })
        .count();
    Estimate::from_counts(hits as u64, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn primality_matches_sieve() {
        let sieve: std::collections::HashSet<u64> = primes_up_to(100_000).into_iter().collect();
        for x in 0..100_000u64 {
            assert_eq!(is_prime_u64(x), sieve.contains(&x), "{x}");
            if x % 997 == 0 {
                assert_eq!(is_prime_big(&BigUint::from(x)), sieve.contains(&x));
            }
        }
    }

    fn trial_division(x: u64) -> bool {
        x >= 2 && (2..).take_while(|d| d * d <= x).all(|d| !x.is_multiple_of(d))
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        let windows = [(1u64 << 20) - 500, 3_215_031_000, (1 << 32) - 2_000, 1 << 32, 4_759_122_000];
        for start in windows {
            for x in start..start + 2_000 {
                assert_eq!(is_prime_u64(x), trial_division(x), "{x}");
            }
        }
        // Strong pseudoprimes to bases 2, 3, 5, 7 and to bases 2, 7, 61.
        assert!(!is_prime_u64(3_215_031_751));
        assert!(!is_prime_u64(4_759_123_141));
    }

    #[test]
    fn primality_large_known_values() {
        // 2^61 - 1 is a Mersenne prime; 2^61 + 1 is divisible by 3.
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(!is_prime_u64((1 << 61) + 1));
        // Strong pseudoprime to bases 2..=23 (product 3825123056546413051).
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_prime_big(&m127));
        assert!(!is_prime_big(&(&m127 + 2u32)));
    }

    #[test]
    fn tiny_prime_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = sample_prime(2, 2, &mut rng);
            assert!(p == BigUint::from(2u32) || p == BigUint::from(3u32));
        }
    }

    #[test]
    fn prime_distribution_up_to_64_is_uniform() {
        // Chi-square against the 18 primes below 64 (17 degrees of freedom).
        let primes = primes_up_to(64);
        assert_eq!(primes.len(), 18);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts: HashMap<u64, u64> = HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(sample_prime(4, 3, &mut rng).to_u64().unwrap()).or_default() += 1;
        }
        assert_eq!(counts.len(), 18);
        let expect = draws as f64 / 18.0;
        let chi2: f64 = primes
            .iter()
            .map(|p| (counts[p] as f64 - expect).powi(2) / expect)
            .sum();
        // 99.9th percentile of chi-square with 17 degrees of freedom.
        assert!(chi2 < 40.79, "chi2 = {chi2}");
    }

    #[test]
    fn large_samples_are_prime() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bound = prime_bound(256, 8);
        for _ in 0..1000 {
            let p = sample_prime(256, 8, &mut rng);
            assert!(p <= bound && p >= BigUint::from(2u32));
            assert!(is_prime_big(&p));
        }
        for _ in 0..50 {
            let p = sample_prime(512, 8, &mut rng);
            assert!(p.bits() <= 72 && is_prime_big(&p));
        }
    }

    #[test]
    fn six_versus_zero_detected_half_the_time() {
        // Primes up to 8 are {2, 3, 5, 7}; 6 = 0 mod 2 and mod 3 only.
        let p = detection_probability(&bs("110"), &bs("000"), 2, 3);
        assert_eq!(p, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let caught = (0..4000)
            .filter(|_| !equality_test(&bs("110"), &bs("000"), 2, 3, &mut rng).equal)
            .count();
        assert!((1800..2200).contains(&caught), "{caught}");
    }

    #[test]
    fn identical_strings_always_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for v in 0..256u64 {
            let m = BitString::from_uint(v, 8);
            assert!(equality_test(&m, &m, 8, 2, &mut rng).equal);
        }
    }

    #[test]
    fn detection_meets_prime_counting_bound() {
        // A difference d != 0 of at most 8 bits has fewer than 8 prime factors,
        // so at most omega(d) of the primes below 64 can miss it.
        let primes = primes_up_to(64).len() as f64;
        for a in 0..256u64 {
            for b in (a + 1)..256 {
                let d = b - a;
                let omega = primes_up_to(64).iter().filter(|&&p| d % p == 0).count() as f64;
                let exact =
                    detection_probability(&BitString::from_uint(a, 8), &BitString::from_uint(b, 8), 8, 2);
                assert!((exact - (1.0 - omega / primes)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn false_accept_rate_for_random_64_bit_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let trials = 100_000;
        let mut accepted = 0;
        for _ in 0..trials {
            let a = BitString::random(&mut rng, 64);
            let mut b = BitString::random(&mut rng, 64);
            if a == b {
                b.flip(0);
            }
            if equality_test(&a, &b, 64, 4, &mut rng).equal {
                accepted += 1;
            }
        }
        // A 64-bit difference has at most 15 distinct prime factors, against
        // about 1.08 * 10^6 primes below 2^24, so the count stays tiny.
        assert!(accepted <= 5, "{accepted}");
    }

    #[test]
    fn hitting_set_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(hitting_set_estimate(50, 10, 1.0, 100, &mut rng).p_hat, 1.0);
        assert_eq!(hitting_set_estimate(50, 10, 0.0, 100, &mut rng).p_hat, 1.0);
        let e = hitting_set_estimate(1000, 200, 0.1, 10_000, &mut rng);
        assert!(e.p_hat >= 0.99, "{e:?}");
    }

    #[test]
    fn wilson_interval_contains_estimate() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
    }

    proptest! {
        #[test]
        fn fingerprint_codec_round_trips(seed: u64, n in 2u64..2000, lambda in 1u32..9, m in "[01]{0,200}") {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fp = Fingerprint::of(&bs(&m), sample_prime(n, lambda, &mut rng));
            let wire = fp.encode(n, lambda);
            prop_assert!((wire.len() as u64) < equality_bits_bound(n, lambda));
            prop_assert_eq!(Fingerprint::decode(&wire, n, lambda), Some(fp));
        }

        #[test]
        fn bits_exchanged_within_bound(seed: u64, n in 2u64..5000, lambda in 1u32..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = BitString::random(&mut rng, 40);
            let out = equality_test(&a, &a, n, lambda, &mut rng);
            let w = (lambda as f64 * (n as f64).log2()).ceil() as u64;
            let spec_bound = 2 * w + (w as f64).log2().ceil() as u64 + 1;
            prop_assert!(out.bits_exchanged <= spec_bound);
            prop_assert!(out.bits_exchanged <= equality_bits_bound(n, lambda));
            prop_assert!(out.equal);
        }
    }
}
