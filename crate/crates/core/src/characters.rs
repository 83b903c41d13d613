//! Dirichlet characters modulo `q`, stored as exponent vectors over the
//! cyclic decomposition of `(Z/qZ)*` and evaluated as exact rational angles.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{gcd, UnitGroupStructure};

/// Residue tables are kept for moduli up to this size.
const RESIDUE_TABLE_LIMIT: u64 = 4_000_000;
/// Unit-circle tables are kept for group exponents up to this size.
const CIS_TABLE_LIMIT: u64 = 1 << 22;

/// A fraction of a full turn, `num / den`, with `0 ≤ num < den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalAngle {
    num: u64,
    den: u64,
}

impl RationalAngle {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0);
        let num = num % den;
        let g = gcd(num, den);
        Self { num: num / g, den: den / g }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn to_complex(self) -> Complex64 {
        cis_turn(self.num, self.den)
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `exp(2πi·num/den)`, exact at multiples of a quarter turn.
pub fn cis_turn(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if (4 * num as u128) % den as u128 == 0 {
        return match (4 * num as u128 / den as u128) as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = std::f64::consts::TAU * (num as f64 / den as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// The full character group modulo `q` with shared evaluation tables.
pub struct CharacterGroup {
    structure: UnitGroupStructure,
    exponent: u64,
    scales: Vec<u64>,
    residue_logs: Option<Vec<u32>>,
    cis: Option<Vec<Complex64>>,
}

impl fmt::Debug for CharacterGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacterGroup")
            .field("modulus", &self.modulus())
            .field("order", &self.order())
            .field("exponent", &self.exponent)
            .finish()
    }
}

impl CharacterGroup {
    pub fn new(q: u64) -> Arc<Self> {
        assert!(q >= 1, "characters of a zero modulus");
        let structure = UnitGroupStructure::new(q);
        let exponent = structure.exponent();
        let scales = structure.orders().map(|o| exponent / o).collect();
        let k = structure.factors().len();
        let residue_logs = (q <= RESIDUE_TABLE_LIMIT).then(|| {
            let mut table = vec![u32::MAX; q as usize * k.max(1)];
            let mut buf = vec![0u64; k];
            for r in 0..q {
                if structure.discrete_log_into(r, &mut buf).is_ok() {
                    for (slot, &e) in table[r as usize * k..].iter_mut().zip(&buf) {
                        *slot = e as u32;
                    }
                    if k == 0 {
                        table[r as usize] = 0;
                    }
                }
            }
            table
        });
        let cis = (exponent <= CIS_TABLE_LIMIT)
            .then(|| (0..exponent).map(|j| cis_turn(j, exponent)).collect());
        Arc::new(Self {
            structure,
            exponent,
            scales,
            residue_logs,
            cis,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.structure.modulus()
    }

    /// Number of characters, φ(q).
    pub fn order(&self) -> u64 {
        self.structure.order()
    }

    /// Common denominator of all character angles.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn structure(&self) -> &UnitGroupStructure {
        &self.structure
    }

    /// Exponent vector of residue `n`, or `None` when `gcd(n, q) > 1`.
    fn with_log<T>(&self, n: u64, f: impl FnOnce(&[u64]) -> T) -> Option<T> {
        let q = self.modulus();
        let k = self.scales.len();
        let r = n % q;
        match &self.residue_logs {
            Some(table) => {
                let row = if k == 0 {
                    if table[r as usize] == u32::MAX {
                        return None;
                    }
                    &table[0..0]
                } else {
                    &table[r as usize * k..(r as usize + 1) * k]
                };
                if k > 0 && row[0] == u32::MAX {
                    return None;
                }
                let mut buf = [0u64; 16];
                for (b, &e) in buf.iter_mut().zip(row) {
                    *b = e as u64;
                }
                Some(f(&buf[..k]))
            }
            None => {
                let v = self.structure.discrete_log(r).ok()?;
                Some(f(&v))
            }
        }
    }

    /// Angle numerator (over `exponent()`) of `χ_a(n)`.
    fn angle_numerator(&self, exponents: &[u64], n: u64) -> Option<u64> {
        let l = self.exponent as u128;
        self.with_log(n, |logs| {
            let mut acc = 0u128;
            for ((&a, &e), &s) in exponents.iter().zip(logs).zip(&self.scales) {
                acc = (acc + a as u128 * e as u128 % l * s as u128) % l;
            }
            acc as u64
        })
    }

    /// `exp(2πi·j/exponent())`.
    pub fn cis(&self, j: u64) -> Complex64 {
        match &self.cis {
            Some(t) => t[(j % self.exponent) as usize],
            None => cis_turn(j, self.exponent),
        }
    }

    /// Character with the given mixed-radix index; index 0 is principal.
    pub fn character(self: &Arc<Self>, index: u64) -> Character {
        assert!(index < self.order(), "character index out of range");
        let mut rest = index;
        let exponents: Vec<u64> = self
            .structure
            .orders()
            .map(|o| {
                let a = rest % o;
                rest /= o;
                a
            })
            .collect();
        Character::from_parts(Arc::clone(self), exponents)
    }

    pub fn principal(self: &Arc<Self>) -> Character {
        self.character(0)
    }

    pub fn characters(self: &Arc<Self>) -> Vec<Character> {
        (0..self.order()).map(|i| self.character(i)).collect()
    }

    pub fn index_of(&self, exponents: &[u64]) -> u64 {
        let orders: Vec<u64> = self.structure.orders().collect();
        exponents
            .iter()
            .zip(&orders)
            .rev()
            .fold(0, |acc, (&a, &o)| acc * o + a)
    }

    /// `Σ_χ χ(n)·conj χ(m)` over the whole group, summed from exact angles.
    pub fn orthogonality_sum(self: &Arc<Self>, n: u64, m: u64) -> Complex64 {
        let l = self.exponent;
        let mut total = Complex64::new(0.0, 0.0);
        for chi in self.characters() {
            match (chi.angle_numerator(n), chi.angle_numerator(m)) {
                (Some(a), Some(b)) => total += self.cis((a + l - b) % l),
                _ => return Complex64::new(0.0, 0.0),
            }
        }
        total
    }
}

/// A Dirichlet character modulo `q`.
#[derive(Clone)]
pub struct Character {
    group: Arc<CharacterGroup>,
    exponents: Vec<u64>,
    principal: bool,
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Character")
            .field("modulus", &self.modulus())
            .field("exponents", &self.exponents)
            .finish()
    }
}

impl PartialEq for Character {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}

impl Eq for Character {}

impl Character {
    fn from_parts(group: Arc<CharacterGroup>, exponents: Vec<u64>) -> Self {
        let principal = exponents.iter().all(|&a| a == 0);
        Self {
            group,
            exponents,
            principal,
        }
    }

    /// Character with an explicit exponent vector; entries are reduced modulo the orders.
    pub fn from_exponents(group: &Arc<CharacterGroup>, exponents: &[u64]) -> Self {
        assert_eq!(exponents.len(), group.scales.len());
        let reduced = exponents
            .iter()
            .zip(group.structure.orders())
            .map(|(&a, o)| a % o)
            .collect();
        Self::from_parts(Arc::clone(group), reduced)
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_principal(&self) -> bool {
        self.principal
    }

    pub fn group(&self) -> &Arc<CharacterGroup> {
        &self.group
    }

    pub fn index(&self) -> u64 {
        self.group.index_of(&self.exponents)
    }

    /// Angle numerator over `group().exponent()`, `None` off the unit group.
    pub fn angle_numerator(&self, n: u64) -> Option<u64> {
        self.group.angle_numerator(&self.exponents, n)
    }

    pub fn angle(&self, n: u64) -> Option<RationalAngle> {
        self.angle_numerator(n)
            .map(|j| RationalAngle::new(j, self.group.exponent))
    }

    pub fn evaluate(&self, n: u64) -> Complex64 {
        match self.angle_numerator(n) {
            Some(j) => self.group.cis(j),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `χ(n)` for `n = 0..=n_max`, built from one period.
    pub fn values(&self, n_max: u64) -> Vec<Complex64> {
        let q = self.modulus();
        let period: Vec<Complex64> = (0..q.min(n_max + 1)).map(|r| self.evaluate(r)).collect();
        (0..=n_max).map(|n| period[(n % q) as usize]).collect()
    }

    pub fn conj(&self) -> Self {
        let exps = self
            .exponents
            .iter()
            .zip(self.group.structure.orders())
            .map(|(&a, o)| (o - a) % o)
            .collect();
        Self::from_parts(Arc::clone(&self.group), exps)
    }

    /// Pointwise product; both characters must share the modulus.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modulus(), other.modulus());
        let exps = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .zip(self.group.structure.orders())
            .map(|((&a, &b), o)| (a + b) % o)
            .collect();
        Self::from_parts(Arc::clone(&self.group), exps)
    }

    /// `max_r |Σ_{n≤r} χ(n)|` over one period.
    pub fn max_partial_sum(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut best: f64 = 0.0;
        for n in 1..=self.modulus() {
            acc += self.evaluate(n);
            best = best.max(acc.norm());
        }
        best
    }
}

pub fn enumerate_characters(q: u64) -> Vec<Character> {
    CharacterGroup::new(q).characters()
}

pub fn evaluate(chi: &Character, n: u64) -> Complex64 {
    chi.evaluate(n)
}

pub fn orthogonality_sum(q: u64, n: u64, m: u64) -> Complex64 {
    CharacterGroup::new(q).orthogonality_sum(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value_table(chi: &Character) -> Vec<(i64, i64)> {
        (1..=chi.modulus())
            .map(|n| {
                let z = chi.evaluate(n);
                ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64)
            })
            .collect()
    }

    #[test]
    fn counts_and_distinctness() {
        for (q, count) in [(1, 1), (2, 1), (5, 4), (12, 4), (8, 4), (36, 12)] {
            let chars = enumerate_characters(q);
            assert_eq!(chars.len(), count, "q={q}");
            assert!(chars[0].is_principal());
            let mut tables: Vec<_> = chars.iter().map(value_table).collect();
            tables.sort();
            tables.dedup();
            assert_eq!(tables.len(), count, "q={q}");
        }
    }

    #[test]
    fn evaluation_examples() {
        let g = CharacterGroup::new(5);
        let chi0 = g.principal();
        assert_eq!(chi0.evaluate(3), Complex64::new(1.0, 0.0));
        for chi in g.characters() {
            assert_eq!(chi.evaluate(10), Complex64::new(0.0, 0.0));
        }
        let chi = Character::from_exponents(&g, &[1]);
        assert_eq!(chi.evaluate(2), Complex64::new(0.0, 1.0));
        assert_eq!(chi.angle(2).unwrap(), RationalAngle::new(1, 4));
    }

    #[test]
    fn orthogonality_examples() {
        assert_eq!(orthogonality_sum(5, 2, 7), Complex64::new(4.0, 0.0));
        assert!(orthogonality_sum(5, 2, 3).norm() < 1e-12);
        assert_eq!(orthogonality_sum(5, 5, 2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn index_roundtrip_and_closure() {
        let g = CharacterGroup::new(48);
        let chars = g.characters();
        for (i, chi) in chars.iter().enumerate() {
            assert_eq!(chi.index(), i as u64);
        }
        for a in &chars {
            for b in &chars {
                let c = a.mul(b);
                assert!(chars.contains(&c));
                for n in 1..=48 {
                    assert!((c.evaluate(n) - a.evaluate(n) * b.evaluate(n)).norm() < 1e-12);
                }
            }
            assert!(a.mul(&a.conj()).is_principal());
        }
    }

    #[test]
    fn large_modulus_without_tables() {
        let q = 5_000_011u64; // prime, beyond the residue table limit
        let g = CharacterGroup::new(q);
        let chi = g.character(12345);
        let a = chi.evaluate(7);
        let b = chi.evaluate(11);
        assert!((chi.evaluate(77) - a * b).norm() < 1e-10);
        assert!((a.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_sum_bound() {
        for chi in enumerate_characters(13).iter().skip(1) {
            let b = chi.max_partial_sum();
            assert!(b <= 12.0 && b >= 1.0);
        }
    }
}
