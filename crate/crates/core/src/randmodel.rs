//! Keyed random streams, uniformly random characters and the i.i.d.
//! unit-circle variables `ω_p`, plus exact moment oracles for both.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{factorize, gcd, mul_mod, pow_mod, primes_up_to, smallest_prime_factors};
use crate::characters::{Character, CharacterGroup};
use crate::error::{Error, Result};

/// A deterministic random stream addressed by `(seed, path)`.
///
/// The key is a SHA-256 digest of the address; draws come from ChaCha20 in
/// counter order, so the `i`-th draw depends only on the address and `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            path: Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn child(&self, key: u64) -> Self {
        let mut path = self.path.clone();
        path.push(key);
        Self {
            seed: self.seed,
            path,
        }
    }

    /// Child keyed by a label, e.g. an experiment name.
    pub fn named(&self, label: &str) -> Self {
        let digest = Sha256::digest(label.as_bytes());
        let mut word = [0u8; 8];
        word.copy_from_slice(&digest[..8]);
        self.child(u64::from_le_bytes(word))
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(b"chaoszeta/stream/v1");
        h.update(self.seed.to_le_bytes());
        h.update((self.path.len() as u64).to_le_bytes());
        for k in &self.path {
            h.update(k.to_le_bytes());
        }
        let mut key = [0u8; 32];
        key.copy_from_slice(&h.finalize());
        ChaCha20Rng::from_seed(key)
    }
}

/// Uniform draw from the characters modulo `group.modulus()`.
pub fn sample_character(group: &Arc<CharacterGroup>, stream: &RandomStream) -> Character {
    let idx = stream.rng().random_range(0..group.order());
    group.character(idx)
}

/// A point on the unit circle stored as a 64-bit fraction of a turn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Turn(pub u64);

impl Turn {
    pub fn to_complex(self) -> Complex64 {
        let theta = self.0 as f64 * (std::f64::consts::TAU / 18_446_744_073_709_551_616.0);
        Complex64::new(theta.cos(), theta.sin())
    }

    pub fn times(self, k: u64) -> Turn {
        Turn(self.0.wrapping_mul(k))
    }

    pub fn plus(self, other: Turn) -> Turn {
        Turn(self.0.wrapping_add(other.0))
    }

    pub fn neg(self) -> Turn {
        Turn(self.0.wrapping_neg())
    }
}

/// Shared prime list for repeated sampling at one cutoff.
#[derive(Clone, Debug)]
pub struct OmegaSampler {
    cutoff: u64,
    primes: Arc<[u64]>,
}

impl OmegaSampler {
    pub fn new(cutoff: u64) -> Self {
        Self {
            cutoff,
            primes: primes_up_to(cutoff).into(),
        }
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// One uniform angle per prime; the `i`-th draw belongs to the `i`-th prime.
    pub fn sample(&self, stream: &RandomStream) -> OmegaAssignment {
        let mut rng = stream.rng();
        let turns = self.primes.iter().map(|_| Turn(rng.random())).collect();
        OmegaAssignment {
            cutoff: self.cutoff,
            primes: Arc::clone(&self.primes),
            turns,
        }
    }

    /// Every `ω_p` set to the same point; `Turn(0)` gives the deterministic Euler product.
    pub fn constant(&self, turn: Turn) -> OmegaAssignment {
        OmegaAssignment {
            cutoff: self.cutoff,
            primes: Arc::clone(&self.primes),
            turns: vec![turn; self.primes.len()],
        }
    }
}

/// Values `ω_p` for all primes `p ≤ cutoff`.
#[derive(Clone, Debug)]
pub struct OmegaAssignment {
    cutoff: u64,
    primes: Arc<[u64]>,
    turns: Vec<Turn>,
}

impl OmegaAssignment {
    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    pub fn turn_of_prime(&self, p: u64) -> Option<Turn> {
        self.primes.binary_search(&p).ok().map(|i| self.turns[i])
    }

    /// `ω_n` as a turn, extended completely multiplicatively.
    pub fn turn_of(&self, n: u64) -> Result<Turn> {
        let mut acc = Turn(0);
        for &(p, e) in factorize(n).factors() {
            let t = self.turn_of_prime(p).ok_or(Error::PrimeAboveCutoff {
                prime: p,
                cutoff: self.cutoff,
            })?;
            acc = acc.plus(t.times(e as u64));
        }
        Ok(acc)
    }

    /// `ω_n` for `n = 0..=m` (entry 0 is unused and set to 0).
    pub fn table(&self, m: u64) -> Result<Vec<Complex64>> {
        if m > self.cutoff {
            if let Some(p) = primes_up_to(m).into_iter().find(|&p| p > self.cutoff) {
                return Err(Error::PrimeAboveCutoff {
                    prime: p,
                    cutoff: self.cutoff,
                });
            }
        }
        let spf = smallest_prime_factors(m as usize);
        let mut turns = vec![Turn(0); m as usize + 1];
        for n in 2..=m as usize {
            let p = spf[n] as u64;
            let tp = self.turn_of_prime(p).expect("prime below cutoff");
            turns[n] = turns[n / p as usize].plus(tp);
        }
        let mut out: Vec<Complex64> = turns.into_iter().map(Turn::to_complex).collect();
        out[0] = Complex64::new(0.0, 0.0);
        Ok(out)
    }
}

pub fn sample_omegas(cutoff: u64, stream: &RandomStream) -> OmegaAssignment {
    assert!(cutoff >= 2, "sample_omegas: cutoff must be at least 2");
    OmegaSampler::new(cutoff).sample(stream)
}

pub fn omega_of(n: u64, assignment: &OmegaAssignment) -> Result<Complex64> {
    assignment.turn_of(n).map(Turn::to_complex)
}

/// One factor `X(n)^k · conj X(n)^m` of a mixed moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentTuple {
    pub n: u64,
    pub k: u32,
    pub m: u32,
}

impl MomentTuple {
    pub fn new(n: u64, k: u32, m: u32) -> Self {
        assert!(n >= 1);
        Self { n, k, m }
    }
}

/// `E ∏ χ(n_i)^{k_i} conj χ(n_i)^{m_i}` for a uniform character mod `q`.
///
/// Factors with `k_i = m_i = 0` are the constant 1 and do not enter the
/// coprimality test.
pub fn chi_moment_oracle(q: u64, tuples: &[MomentTuple]) -> u8 {
    let active: Vec<&MomentTuple> = tuples.iter().filter(|t| t.k + t.m > 0).collect();
    if active.iter().any(|t| gcd(t.n % q, q) != 1) {
        return 0;
    }
    let side = |pick: fn(&MomentTuple) -> u32| {
        active
            .iter()
            .fold(1 % q, |acc, t| mul_mod(acc, pow_mod(t.n, pick(t) as u64, q), q))
    };
    u8::from(side(|t| t.k) == side(|t| t.m))
}

/// `E ∏ ω_{n_i}^{k_i} conj ω_{n_i}^{m_i}` for i.i.d. uniform `ω_p`.
pub fn omega_moment_oracle(tuples: &[MomentTuple]) -> u8 {
    let mut balance: BTreeMap<u64, i64> = BTreeMap::new();
    for t in tuples {
        for &(p, e) in factorize(t.n).factors() {
            *balance.entry(p).or_default() += e as i64 * (t.k as i64 - t.m as i64);
        }
    }
    u8::from(balance.values().all(|&v| v == 0))
}

/// The same moment by averaging over every character mod `q`.
pub fn chi_moment_enumerated(group: &Arc<CharacterGroup>, tuples: &[MomentTuple]) -> Complex64 {
    let chars = group.characters();
    let total: Complex64 = chars
        .iter()
        .map(|chi| {
            tuples.iter().fold(Complex64::new(1.0, 0.0), |acc, t| {
                let z = chi.evaluate(t.n);
                acc * z.powu(t.k) * z.conj().powu(t.m)
            })
        })
        .sum();
    total / chars.len() as f64
}
