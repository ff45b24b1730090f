//! Size-faithful mock cryptography. NOT SECURE.
//!
//! Public-key and symmetric encryption XOR the plaintext with a key-derived
//! stream behind a short key tag, and signatures are keyed tags checked through
//! a per-instance registry. Every object has exactly the bit length the
//! [`CostModel`] prescribes, which is what the protocol accounting needs. Real
//! schemes can be substituted through [`CryptoBackend`].

use std::collections::{HashMap, HashSet};

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::bits::BitString;

/// Largest plaintext any scheme accepts, in bits.
pub const PLAINTEXT_CAP: usize = 1024;
/// Bits of key tag at the front of a ciphertext.
pub const KEY_TAG_BITS: usize = 16;
/// Bits of the plaintext-length field that follows the key tag.
pub const LENGTH_BITS: usize = 11;
/// Ciphertext bits before the masked plaintext begins.
pub const CT_HEADER_BITS: usize = KEY_TAG_BITS + LENGTH_BITS;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("ciphertext does not decrypt under this key")]
    DecryptFailure,
    #[error("plaintext of {0} bits exceeds the {PLAINTEXT_CAP}-bit cap")]
    PlaintextTooLong(usize),
    #[error("expected a {expected:?} key, got {got:?}")]
    WrongKeyKind { expected: KeyKind, got: KeyKind },
    #[error("cost model entry {0} must be at least one bit")]
    ZeroSize(&'static str),
}

/// Bit sizes of modeled objects. Each defaults to `c·λ·D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostModel {
    pub lambda: u32,
    pub depth: u32,
    pub b_pk: u64,
    pub b_ct: u64,
    pub b_share: u64,
    pub b_proof: u64,
    pub b_sig: u64,
    pub b_skey: u64,
    /// Constant in front of the simultaneous-broadcast charge.
    pub c_sb: u64,
}

impl CostModel {
    pub fn new(lambda: u32, depth: u32) -> Self {
        Self::scaled(lambda, depth, 1)
    }

    pub fn scaled(lambda: u32, depth: u32, c: u64) -> Self {
        let unit = c * lambda as u64 * depth as u64;
        Self {
            lambda,
            depth,
            b_pk: unit,
            b_ct: unit,
            b_share: unit,
            b_proof: unit,
            b_sig: unit,
            b_skey: unit,
            c_sb: 1,
        }
    }

    pub fn validate(&self) -> Result<(), CryptoError> {
        let fields = [
            ("b_pk", self.b_pk),
            ("b_ct", self.b_ct),
            ("b_share", self.b_share),
            ("b_proof", self.b_proof),
            ("b_sig", self.b_sig),
            ("b_skey", self.b_skey),
        ];
        match fields.iter().find(|(_, v)| *v == 0) {
            Some((name, _)) => Err(CryptoError::ZeroSize(name)),
            None => Ok(()),
        }
    }

    /// Ciphertext size for a plaintext of `plain_bits`: whole `B_ct` blocks
    /// covering the header and the plaintext.
    pub fn ct_bits(&self, plain_bits: usize) -> usize {
        let block = self.b_ct as usize;
        block * (CT_HEADER_BITS + plain_bits).div_ceil(block)
    }

    /// Size of one party's input to the committee's simultaneous broadcast.
    pub fn poly_in(&self, ell_in: u64) -> u64 {
        self.b_pk + self.b_ct * ell_in + self.b_proof
    }

    pub fn key_bits(&self, kind: KeyKind) -> usize {
        match kind {
            KeyKind::EncPublic | KeyKind::SigPublic => self.b_pk as usize,
            KeyKind::EncSecret | KeyKind::SigSecret | KeyKind::Sym => self.b_skey as usize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyKind {
    EncPublic,
    EncSecret,
    SigPublic,
    SigSecret,
    Sym,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KeyMaterial {
    pub kind: KeyKind,
    pub bits: BitString,
}

impl KeyMaterial {
    fn expect(&self, kind: KeyKind) -> Result<(), CryptoError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(CryptoError::WrongKeyKind {
                expected: kind,
                got: self.kind,
            })
        }
    }
}

/// Deterministic expansion of `seed` into `bits` pseudorandom bits, separated
/// by `domain`. SHA-256 in counter mode.
pub fn expand(domain: &str, seed: &BitString, bits: usize) -> BitString {
    let mut out = Vec::with_capacity(bits.div_ceil(8) + 32);
    let mut counter: u32 = 0;
    while out.len() * 8 < bits {
        let mut h = Sha256::new();
        h.update(domain.as_bytes());
        h.update([0u8]);
        h.update((seed.len() as u64).to_be_bytes());
        h.update(seed.as_bytes());
        h.update(counter.to_be_bytes());
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    BitString::from_bytes(&out, bits)
}

pub trait CryptoBackend {
    fn cost(&self) -> &CostModel;
    fn pke_gen(&mut self, r: &BitString) -> (KeyMaterial, KeyMaterial);
    fn pke_enc(&mut self, pk: &KeyMaterial, x: &BitString) -> Result<BitString, CryptoError>;
    fn pke_dec(&mut self, sk: &KeyMaterial, ct: &BitString) -> Result<BitString, CryptoError>;
    fn ske_gen(&mut self, rng: &mut dyn rand::RngCore) -> KeyMaterial;
    fn ske_enc(&mut self, k: &KeyMaterial, x: &BitString) -> Result<BitString, CryptoError>;
    fn ske_dec(&mut self, k: &KeyMaterial, ct: &BitString) -> Result<BitString, CryptoError>;
    fn sig_gen(&mut self, r: &BitString) -> (KeyMaterial, KeyMaterial);
    fn sig_sign(&mut self, sk: &KeyMaterial, m: &BitString) -> Result<BitString, CryptoError>;
    /// Rejection is a `false` result, not an error.
    fn sig_verify(&self, pk: &KeyMaterial, m: &BitString, sigma: &BitString) -> bool;
}

/// Reference backend; see the module docs for why it is insecure.
///
/// Verification requires both a matching keyed tag and a registry hit, so
/// short tags cannot collide into a forgery.
#[derive(Clone, Debug)]
pub struct MockBackend {
    cost: CostModel,
    sig_keys: HashMap<BitString, BitString>,
    issued: HashSet<(BitString, BitString, BitString)>,
}

impl MockBackend {
    pub fn new(cost: CostModel) -> Self {
        Self {
            cost,
            sig_keys: HashMap::new(),
            issued: HashSet::new(),
        }
    }

    /// Every `(pk', message, signature)` produced by `sig_sign` so far.
    pub fn issued(&self) -> &HashSet<(BitString, BitString, BitString)> {
        &self.issued
    }

    pub fn pke_public_of(&self, sk: &KeyMaterial) -> KeyMaterial {
        KeyMaterial {
            kind: KeyKind::EncPublic,
            bits: expand("pke/pk", &sk.bits, self.cost.b_pk as usize),
        }
    }

    /// Reinterprets decrypted bits as a symmetric key.
    pub fn sym_key(&self, bits: BitString) -> KeyMaterial {
        KeyMaterial {
            kind: KeyKind::Sym,
            bits,
        }
    }

    fn seal(&self, domain: &str, key: &BitString, x: &BitString) -> Result<BitString, CryptoError> {
        if x.len() > PLAINTEXT_CAP {
            return Err(CryptoError::PlaintextTooLong(x.len()));
        }
        let total = self.cost.ct_bits(x.len());
        let mut ct = BitString::with_capacity(total);
        ct.extend(&self.header_tag(domain, key, x.len()));
        ct.push_uint(x.len() as u64, LENGTH_BITS);
        ct.extend(&x.xor(&expand(&format!("{domain}/stream"), key, x.len())));
        ct.extend(&BitString::zeros(total - ct.len()));
        Ok(ct)
    }

    fn open(&self, domain: &str, key: &BitString, ct: &BitString) -> Result<BitString, CryptoError> {
        if ct.len() < CT_HEADER_BITS {
            return Err(CryptoError::DecryptFailure);
        }
        let len = ct.read_uint(KEY_TAG_BITS, LENGTH_BITS) as usize;
        if ct.slice(0, KEY_TAG_BITS) != self.header_tag(domain, key, len) {
            return Err(CryptoError::DecryptFailure);
        }
        if len > PLAINTEXT_CAP || ct.len() != self.cost.ct_bits(len) {
            return Err(CryptoError::DecryptFailure);
        }
        let pad_start = CT_HEADER_BITS + len;
        if ct.slice(pad_start, ct.len() - pad_start).count_ones() != 0 {
            return Err(CryptoError::DecryptFailure);
        }
        let body = ct.slice(CT_HEADER_BITS, len);
        Ok(body.xor(&expand(&format!("{domain}/stream"), key, len)))
    }

    /// Key tag bound to the plaintext length, so the length is authenticated.
    fn header_tag(&self, domain: &str, key: &BitString, len: usize) -> BitString {
        let mut seed = key.clone();
        seed.push_uint(len as u64, LENGTH_BITS);
        expand(&format!("{domain}/tag"), &seed, KEY_TAG_BITS)
    }

    fn sig_tag(&self, sk: &BitString, m: &BitString) -> BitString {
        let mut keyed = sk.clone();
        keyed.push_uint(m.len() as u64, 32);
        keyed.extend(m);
        expand("sig/tag", &keyed, self.cost.b_sig as usize)
    }
}

impl CryptoBackend for MockBackend {
    fn cost(&self) -> &CostModel {
        &self.cost
    }

    fn pke_gen(&mut self, r: &BitString) -> (KeyMaterial, KeyMaterial) {
        let sk = KeyMaterial {
            kind: KeyKind::EncSecret,
            bits: expand("pke/sk", r, self.cost.b_skey as usize),
        };
        (self.pke_public_of(&sk), sk)
    }

    fn pke_enc(&mut self, pk: &KeyMaterial, x: &BitString) -> Result<BitString, CryptoError> {
        pk.expect(KeyKind::EncPublic)?;
        self.seal("pke", &pk.bits, x)
    }

    fn pke_dec(&mut self, sk: &KeyMaterial, ct: &BitString) -> Result<BitString, CryptoError> {
        sk.expect(KeyKind::EncSecret)?;
        let pk = self.pke_public_of(sk);
        self.open("pke", &pk.bits, ct)
    }

    fn ske_gen(&mut self, rng: &mut dyn rand::RngCore) -> KeyMaterial {
        let mut bytes = vec![0u8; (self.cost.b_skey as usize).div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        KeyMaterial {
            kind: KeyKind::Sym,
            bits: BitString::from_bytes(&bytes, self.cost.b_skey as usize),
        }
    }

    fn ske_enc(&mut self, k: &KeyMaterial, x: &BitString) -> Result<BitString, CryptoError> {
        k.expect(KeyKind::Sym)?;
        self.seal("ske", &k.bits, x)
    }

    fn ske_dec(&mut self, k: &KeyMaterial, ct: &BitString) -> Result<BitString, CryptoError> {
        k.expect(KeyKind::Sym)?;
        self.open("ske", &k.bits, ct)
    }

    fn sig_gen(&mut self, r: &BitString) -> (KeyMaterial, KeyMaterial) {
        let sk = expand("sig/sk", r, self.cost.b_skey as usize);
        let pk = expand("sig/pk", &sk, self.cost.b_pk as usize);
        self.sig_keys.insert(pk.clone(), sk.clone());
        (
            KeyMaterial {
                kind: KeyKind::SigPublic,
                bits: pk,
            },
            KeyMaterial {
                kind: KeyKind::SigSecret,
                bits: sk,
            },
        )
    }

    fn sig_sign(&mut self, sk: &KeyMaterial, m: &BitString) -> Result<BitString, CryptoError> {
        sk.expect(KeyKind::SigSecret)?;
        let sigma = self.sig_tag(&sk.bits, m);
        let pk = expand("sig/pk", &sk.bits, self.cost.b_pk as usize);
        self.issued.insert((pk, m.clone(), sigma.clone()));
        Ok(sigma)
    }

    fn sig_verify(&self, pk: &KeyMaterial, m: &BitString, sigma: &BitString) -> bool {
        if pk.kind != KeyKind::SigPublic {
            return false;
        }
        match self.sig_keys.get(&pk.bits) {
            Some(sk) => {
                &self.sig_tag(sk, m) == sigma
                    && self.issued.contains(&(pk.bits.clone(), m.clone(), sigma.clone()))
            }
            None => false,
        }
    }
}

/// Uniform `len`-bit string, for key-generation randomness.
pub fn random_seed<R: Rng + ?Sized>(rng: &mut R, len: usize) -> BitString {
    BitString::random(rng, len)
}
