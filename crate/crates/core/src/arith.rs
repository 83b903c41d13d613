//! Exact integer arithmetic: factorization, the totient, the cyclic
//! decomposition of `(Z/qZ)*` and discrete logarithms over it.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Prime-power components up to this size get a dense discrete-log table.
const DENSE_LOG_LIMIT: u64 = 1_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut b = base % m;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Prime factorization as `(prime, exponent)` pairs in increasing prime order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.0.len()
    }

    pub fn value(&self) -> u128 {
        self.0
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    pub fn largest_prime(&self) -> Option<u64> {
        self.0.last().map(|&(p, _)| p)
    }
}

/// Trial division with a mod-30 wheel.
///
/// # Panics
/// Panics when `n == 0`.
pub fn factorize(mut n: u64) -> Factorization {
    assert!(n >= 1, "factorize: n must be positive");
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    const STEPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut d = 7u64;
    let mut i = 0;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += STEPS[i];
        i = (i + 1) % 8;
    }
    if n > 1 {
        out.push((n, 1));
    }
    Factorization(out)
}

pub fn totient(q: u64) -> u64 {
    assert!(q >= 1, "totient: q must be positive");
    factorize(q)
        .factors()
        .iter()
        .fold(q, |acc, &(p, _)| acc / p * (p - 1))
}

/// All primes `p ≤ n`, by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i.saturating_mul(i);
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest prime factor of every integer in `0..=n` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        for &p in &primes {
            let j = i * p as usize;
            if p > spf[i] || j > n {
                break;
            }
            spf[j] = p;
        }
    }
    spf
}

/// One cyclic factor of `(Z/qZ)*`.
///
/// `generator` is a residue mod `q` that is congruent to the local generator
/// modulo `prime_power` and to 1 modulo every other prime-power component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicFactor {
    pub generator: u64,
    pub order: u64,
    pub prime: u64,
    pub prime_power: u64,
}

#[derive(Clone, Debug)]
enum LogTable {
    Dense(Vec<u32>),
    BabyGiant {
        generator: u64,
        modulus: u64,
        order: u64,
        step: u64,
        baby: HashMap<u64, u64>,
    },
}

impl LogTable {
    fn build(generator: u64, order: u64, modulus: u64) -> Self {
        if modulus <= DENSE_LOG_LIMIT {
            let mut table = vec![u32::MAX; modulus as usize];
            let mut x = 1u64;
            for e in 0..order {
                table[x as usize] = e as u32;
                x = mul_mod(x, generator, modulus);
            }
            return LogTable::Dense(table);
        }
        let step = (order as f64).sqrt().ceil() as u64;
        let mut baby = HashMap::with_capacity(step as usize);
        let mut x = 1u64;
        for j in 0..step {
            baby.entry(x).or_insert(j);
            x = mul_mod(x, generator, modulus);
        }
        LogTable::BabyGiant {
            generator,
            modulus,
            order,
            step,
            baby,
        }
    }

    fn log(&self, r: u64) -> u64 {
        match self {
            LogTable::Dense(t) => {
                let e = t[r as usize];
                debug_assert_ne!(e, u32::MAX, "residue outside the generated subgroup");
                e as u64
            }
            LogTable::BabyGiant {
                generator,
                modulus,
                order,
                step,
                baby,
            } => {
                let giant = pow_mod(*generator, order - step % order, *modulus);
                let mut y = r;
                for i in 0..=*step {
                    if let Some(&j) = baby.get(&y) {
                        return (i * step + j) % order;
                    }
                    y = mul_mod(y, giant, *modulus);
                }
                unreachable!("residue outside the generated subgroup")
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Component {
    /// Modulus 2: trivial unit group.
    Two,
    /// Modulus 4: generated by -1.
    Four,
    /// Modulus 2^k, k ≥ 3: generated by -1 and 5.
    TwoPower { pk: u64, five: LogTable },
    /// Odd prime power: cyclic, generated by a primitive root.
    Odd { p: u64, pk: u64, logs: LogTable },
}

/// CRT decomposition of `(Z/qZ)*` into cyclic factors, with discrete logs.
#[derive(Clone, Debug)]
pub struct UnitGroupStructure {
    modulus: u64,
    factors: Vec<CyclicFactor>,
    components: Vec<Component>,
}

impl UnitGroupStructure {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "unit group of a zero modulus");
        let mut factors = Vec::new();
        let mut components = Vec::new();
        for &(p, k) in factorize(q).factors() {
            let pk = p.pow(k);
            let lift = |g: u64| crt_lift(g, pk, q);
            if p == 2 {
                match k {
                    1 => components.push(Component::Two),
                    2 => {
                        factors.push(CyclicFactor {
                            generator: lift(3),
                            order: 2,
                            prime: 2,
                            prime_power: 4,
                        });
                        components.push(Component::Four);
                    }
                    _ => {
                        let order5 = pk / 4;
                        factors.push(CyclicFactor {
                            generator: lift(pk - 1),
                            order: 2,
                            prime: 2,
                            prime_power: pk,
                        });
                        factors.push(CyclicFactor {
                            generator: lift(5),
                            order: order5,
                            prime: 2,
                            prime_power: pk,
                        });
                        components.push(Component::TwoPower {
                            pk,
                            five: LogTable::build(5, order5, pk),
                        });
                    }
                }
            } else {
                let order = pk / p * (p - 1);
                let g = primitive_root_prime_power(p, k);
                factors.push(CyclicFactor {
                    generator: lift(g),
                    order,
                    prime: p,
                    prime_power: pk,
                });
                components.push(Component::Odd {
                    p,
                    pk,
                    logs: LogTable::build(g, order, pk),
                });
            }
        }
        Self {
            modulus: q,
            factors,
            components,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    pub fn orders(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|f| f.order)
    }

    /// Group order, φ(q).
    pub fn order(&self) -> u64 {
        self.orders().product()
    }

    /// Group exponent: lcm of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.orders().fold(1, lcm)
    }

    /// Writes the exponent vector of `n` into `out` (length = number of factors).
    pub fn discrete_log_into(&self, n: u64, out: &mut [u64]) -> Result<()> {
        assert_eq!(out.len(), self.factors.len());
        if gcd(n % self.modulus, self.modulus) != 1 && self.modulus > 1 {
            return Err(Error::NotCoprime { n, q: self.modulus });
        }
        let mut slot = 0;
        for c in &self.components {
            match c {
                Component::Two => {}
                Component::Four => {
                    out[slot] = u64::from(n % 4 == 3);
                    slot += 1;
                }
                Component::TwoPower { pk, five } => {
                    let r = n % pk;
                    let neg = r % 4 == 3;
                    let r5 = if neg { pk - r } else { r };
                    out[slot] = u64::from(neg);
                    out[slot + 1] = five.log(r5);
                    slot += 2;
                }
                Component::Odd { p, pk, logs } => {
                    let r = n % pk;
                    debug_assert_ne!(r % p, 0);
                    out[slot] = logs.log(r);
                    slot += 1;
                }
            }
        }
        Ok(())
    }

    pub fn discrete_log(&self, n: u64) -> Result<Vec<u64>> {
        let mut out = vec![0; self.factors.len()];
        self.discrete_log_into(n, &mut out)?;
        Ok(out)
    }

    /// `∏ generator_i^{e_i} mod q`.
    pub fn exponentiate(&self, exponents: &[u64]) -> u64 {
        assert_eq!(exponents.len(), self.factors.len());
        if self.modulus == 1 {
            return 0;
        }
        self.factors
            .iter()
            .zip(exponents)
            .fold(1, |acc, (f, &e)| {
                mul_mod(acc, pow_mod(f.generator, e, self.modulus), self.modulus)
            })
    }
}

pub fn unit_group_structure(q: u64) -> UnitGroupStructure {
    UnitGroupStructure::new(q)
}

pub fn discrete_log(structure: &UnitGroupStructure, n: u64) -> Result<Vec<u64>> {
    structure.discrete_log(n)
}

/// Smallest generator of `(Z/p^k Z)*` for an odd prime `p`.
pub fn primitive_root_prime_power(p: u64, k: u32) -> u64 {
    assert!(p > 2 && k >= 1);
    let pk = p.pow(k);
    let order = pk / p * (p - 1);
    let mut cofactors: Vec<u64> = factorize(p - 1).primes().map(|r| order / r).collect();
    if k >= 2 {
        cofactors.push(order / p);
    }
    (2..pk)
        .filter(|g| g % p != 0)
        .find(|&g| cofactors.iter().all(|&c| pow_mod(g, c, pk) != 1))
        .expect("odd prime powers are cyclic")
}

/// The residue mod `q` congruent to `g` mod `pk` and to 1 mod `q / pk`.
fn crt_lift(g: u64, pk: u64, q: u64) -> u64 {
    let c = q / pk;
    if c == 1 {
        return g % q;
    }
    let inv = mod_inverse(c % pk, pk).expect("coprime CRT components");
    let t = mul_mod((g + pk - 1) % pk, inv, pk);
    ((1 + c as u128 * t as u128) % q as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_totient(q: u64) -> u64 {
        (1..=q).filter(|&k| gcd(k, q) == 1).count() as u64
    }

    fn brute_order(g: u64, m: u64) -> u64 {
        let mut x = g % m;
        let mut k = 1;
        while x != 1 {
            x = mul_mod(x, g, m);
            k += 1;
        }
        k
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).is_one());
        assert_eq!(factorize(12).factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(9973).factors(), &[(9973, 1)]);
        // brute-force primality of 9973
        assert!((2..9973u64).take_while(|d| d * d <= 9973).all(|d| 9973 % d != 0));
        assert_eq!(factorize(600_851_475_143).factors(), &[(71, 1), (839, 1), (1471, 1), (6857, 1)]);
        assert_eq!(factorize(999_999_000_001).value(), 999_999_000_001);
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(5), brute_totient(5));
        assert_eq!(totient(12), brute_totient(12));
        assert_eq!(totient(12), 4);
    }

    #[test]
    fn totient_matches_gcd_count() {
        for q in 1..=2000 {
            assert_eq!(totient(q), brute_totient(q), "q={q}");
        }
    }

    #[test]
    fn sieves_agree_with_trial_division() {
        let primes = primes_up_to(1000);
        let brute: Vec<u64> = (2..=1000).filter(|&n| factorize(n).factors() == [(n, 1)]).collect();
        assert_eq!(primes, brute);
        let spf = smallest_prime_factors(1000);
        for n in 2..=1000u64 {
            assert_eq!(spf[n as usize] as u64, factorize(n).factors()[0].0);
        }
    }

    #[test]
    fn structure_examples() {
        let s5 = unit_group_structure(5);
        assert_eq!(s5.factors().len(), 1);
        assert_eq!(s5.factors()[0].order, 4);
        assert_eq!(brute_order(s5.factors()[0].generator, 5), 4);
        assert_eq!(s5.factors()[0].generator, 2);

        let s8 = unit_group_structure(8);
        let orders: Vec<u64> = s8.orders().collect();
        assert_eq!(orders, vec![2, 2]);

        let s2 = unit_group_structure(2);
        assert!(s2.factors().is_empty());
        assert_eq!(s2.order(), 1);
    }

    #[test]
    fn discrete_log_examples() {
        let s5 = unit_group_structure(5);
        assert_eq!(s5.discrete_log(1).unwrap(), vec![0]);
        assert_eq!(s5.discrete_log(4).unwrap(), vec![2]);
        let s8 = unit_group_structure(8);
        let e = s8.discrete_log(7).unwrap();
        assert_eq!(s8.exponentiate(&e), 7);
        assert!(matches!(s5.discrete_log(10), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn generator_orders_are_exact() {
        for q in 2..=300u64 {
            let s = unit_group_structure(q);
            assert_eq!(s.order(), totient(q));
            for f in s.factors() {
                assert_eq!(brute_order(f.generator % f.prime_power, f.prime_power), f.order, "q={q}");
                assert_eq!(f.generator % (q / f.prime_power), 1 % (q / f.prime_power));
            }
        }
    }

    #[test]
    fn baby_giant_matches_dense() {
        let p = 1_000_003u64;
        let g = primitive_root_prime_power(p, 1);
        let bsgs = LogTable::build(g, p - 1, p);
        assert!(matches!(bsgs, LogTable::BabyGiant { .. }));
        for e in [0u64, 1, 2, 999, 123_456, p - 2] {
            assert_eq!(bsgs.log(pow_mod(g, e, p)), e);
        }
    }

    #[test]
    fn mod_inverse_roundtrip() {
        for m in 2..200u64 {
            for a in 1..m {
                match mod_inverse(a, m) {
                    Some(b) => assert_eq!(mul_mod(a, b, m), 1),
                    None => assert_ne!(gcd(a, m), 1),
                }
            }
        }
    }
}
