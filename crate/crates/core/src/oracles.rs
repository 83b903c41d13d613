//! Exact and closed-form reference computations.
//!
//! Everything here is either a finite sum evaluated directly or a closed form
//! with a certified truncation, so the values can serve as oracles for the
//! sampled and series-based routes elsewhere in the crate.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{gcd, primes_up_to, totient};
use crate::characters::{Character, CharacterGroup};
use crate::error::{Error, Result};
use crate::quadrature::{try_integrate, PanelRule, Quadrature};
use crate::testfn::{FourierCache, TestFunction};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Weight `f(r)` in the summation identities.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    Constant(Complex64),
    /// `f(r) = r^k`.
    Power(u32),
    /// `f(r) = table[r]`; needs at least `q` entries.
    Table(Vec<Complex64>),
}

impl Weight {
    pub fn at(&self, r: u64) -> Complex64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Power(k) => Complex64::new((r as f64).powi(*k as i32), 0.0),
            Weight::Table(t) => t[r as usize],
        }
    }
}

/// Parameters of the double sums over `r, t ∈ 1..q−1` with kernel `δ_{r,t} − 1/φ(q)`.
///
/// The offsets enter only through the coprimality indicators
/// `1_{(mq+r, q)=1}` and `1_{(sq+t, q)=1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSumSpec {
    pub q: u64,
    pub m: u64,
    pub s: u64,
    pub a: u32,
    pub b: u32,
    pub sigma: f64,
    pub weight: Weight,
}

impl KernelSumSpec {
    pub fn new(q: u64, a: u32, b: u32, sigma: f64) -> Self {
        Self {
            q,
            m: 0,
            s: 0,
            a,
            b,
            sigma,
            weight: Weight::Constant(Complex64::new(1.0, 0.0)),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidArgument(format!("modulus must be at least 2, got {}", self.q)));
        }
        if self.sigma < 0.5 {
            return Err(Error::InvalidArgument(format!("sigma must be at least 1/2, got {}", self.sigma)));
        }
        if let Weight::Table(t) = &self.weight {
            if (t.len() as u64) < self.q {
                return Err(Error::InvalidArgument(format!(
                    "weight table has {} entries, needs {}",
                    t.len(),
                    self.q
                )));
            }
        }
        Ok(())
    }

    fn row_unit(&self, r: u64) -> bool {
        gcd(self.m * self.q + r, self.q) == 1
    }

    fn col_unit(&self, t: u64) -> bool {
        gcd(self.s * self.q + t, self.q) == 1
    }
}

/// A sum that should vanish, with the scale its rounding error lives on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroSum {
    pub value: Complex64,
    /// `Σ_r 1_{(r,q)=1} |f(r)|`.
    pub scale: f64,
}

impl ZeroSum {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.norm()
        } else {
            self.value.norm() / self.scale
        }
    }
}

/// `Σ_{r,t} 1_{(mq+r,q)=1} 1_{(sq+t,q)=1} (δ_{r,t} − 1/φ(q)) f(r)`, summed literally.
pub fn kernel_sum_zero(spec: &KernelSumSpec) -> Result<ZeroSum> {
    spec.validate()?;
    let q = spec.q;
    let phi = totient(q) as f64;
    let rows: Vec<(Complex64, f64)> = (1..q)
        .into_par_iter()
        .map(|r| {
            if !spec.row_unit(r) {
                return (Complex64::new(0.0, 0.0), 0.0);
            }
            let fr = spec.weight.at(r);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 1..q {
                if spec.col_unit(t) {
                    let kernel = if r == t { 1.0 } else { 0.0 } - 1.0 / phi;
                    acc += fr * kernel;
                }
            }
            (acc, fr.norm())
        })
        .collect();
    let (value, scale) = rows
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(v, s), (dv, ds)| (v + dv, s + ds));
    Ok(ZeroSum { value, scale })
}

/// `S_c = Σ_{r<q, (r,q)=1} (r/q)^c`.
fn unit_power_sum(q: u64, c: u32) -> f64 {
    let qf = q as f64;
    (1..q)
        .filter(|&r| gcd(r, q) == 1)
        .map(|r| (r as f64 / qf).powi(c as i32))
        .sum()
}

/// `q^{−2σ} Σ_{r,t} 1·1 |(δ_{r,t} − 1/φ)(r/q)^a (t/q)^b|`.
///
/// The absolute value splits the kernel into its diagonal and off-diagonal
/// parts, so the double sum factorizes into sums `S_c` over units.
pub fn kernel_sum_square(q: u64, a: u32, b: u32, sigma: f64) -> Result<f64> {
    KernelSumSpec::new(q, a, b, sigma).validate()?;
    let phi = totient(q) as f64;
    let (sa, sb, sab) = (unit_power_sum(q, a), unit_power_sum(q, b), unit_power_sum(q, a + b));
    let inner = (1.0 - 1.0 / phi) * sab + (sa * sb - sab) / phi;
    Ok(inner * (q as f64).powf(-2.0 * sigma))
}

/// [`kernel_sum_square`] times `q^{2(σ−1/2)}`; bounded in `q`.
pub fn kernel_square_ratio(q: u64, a: u32, b: u32, sigma: f64) -> Result<f64> {
    Ok(kernel_sum_square(q, a, b, sigma)? * (q as f64).powf(2.0 * (sigma - 0.5)))
}

/// `(φ(q) q^σ)^{−1} Σ_{r,t} 1·1 r^{−σ} (r/q)^a (t/q)^b`, factorized over `r` and `t`.
pub fn kernel_sum_weighted(q: u64, a: u32, b: u32, sigma: f64) -> Result<f64> {
    KernelSumSpec::new(q, a, b, sigma).validate()?;
    let phi = totient(q) as f64;
    let qf = q as f64;
    let row: f64 = (1..q)
        .filter(|&r| gcd(r, q) == 1)
        .map(|r| (r as f64).powf(-sigma) * (r as f64 / qf).powi(a as i32))
        .sum();
    Ok(unit_power_sum(q, b) / phi * qf.powf(-sigma) * row)
}

/// [`kernel_sum_weighted`] times `q^{σ−1/2}`; bounded in `q`.
pub fn kernel_weighted_ratio(q: u64, a: u32, b: u32, sigma: f64) -> Result<f64> {
    Ok(kernel_sum_weighted(q, a, b, sigma)? * (q as f64).powf(sigma - 0.5))
}

/// [`kernel_sum_square`] as a literal double sum, honoring the offsets in `spec`.
pub fn kernel_sum_square_direct(spec: &KernelSumSpec) -> Result<f64> {
    spec.validate()?;
    let (q, qf) = (spec.q, spec.q as f64);
    let phi = totient(q) as f64;
    let rows: Vec<f64> = (1..q)
        .into_par_iter()
        .map(|r| {
            if !spec.row_unit(r) {
                return 0.0;
            }
            let x = (r as f64 / qf).powi(spec.a as i32);
            (1..q)
                .filter(|&t| spec.col_unit(t))
                .map(|t| {
                    let kernel = if r == t { 1.0 } else { 0.0 } - 1.0 / phi;
                    (kernel * x * (t as f64 / qf).powi(spec.b as i32)).abs()
                })
                .sum()
        })
        .collect();
    Ok(rows.into_iter().sum::<f64>() * qf.powf(-2.0 * spec.sigma))
}

/// [`kernel_sum_weighted`] as a literal double sum, honoring the offsets in `spec`.
pub fn kernel_sum_weighted_direct(spec: &KernelSumSpec) -> Result<f64> {
    spec.validate()?;
    let (q, qf) = (spec.q, spec.q as f64);
    let phi = totient(q) as f64;
    let rows: Vec<f64> = (1..q)
        .into_par_iter()
        .map(|r| {
            if !spec.row_unit(r) {
                return 0.0;
            }
            let x = (r as f64).powf(-spec.sigma) * (r as f64 / qf).powi(spec.a as i32);
            (1..q)
                .filter(|&t| spec.col_unit(t))
                .map(|t| x * (t as f64 / qf).powi(spec.b as i32))
                .sum()
        })
        .collect();
    Ok(rows.into_iter().sum::<f64>() / (phi * qf.powf(spec.sigma)))
}

/// `(1/φ(q)) Σ_χ evaluator(χ)` over every character mod `q`.
///
/// Characters are evaluated in parallel; the reduction runs in index order.
pub fn exact_expectation<F>(group: &Arc<CharacterGroup>, evaluator: F) -> Result<Complex64>
where
    F: Fn(&Character) -> Result<Complex64> + Sync,
{
    let values = (0..group.order())
        .into_par_iter()
        .map(|i| evaluator(&group.character(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().sum::<Complex64>() / group.order() as f64)
}

/// The truncated variance kernel and its split by block index.
///
/// With `n = mq + r`, `S_M` collects `m = s = 0`, `S_L` pairs `m ≥ 1` with
/// `s = 0`, `S̄_L` the reverse and `S_{L,L}` has both indices past the first block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceKernelSum {
    pub total: Complex64,
    pub s_m: Complex64,
    pub s_l: Complex64,
    pub s_l_bar: Complex64,
    pub s_ll: Complex64,
    /// Last index `L·q` included.
    pub cutoff: u64,
    /// Bound on the change in `total` if the sum ran to infinity.
    pub remainder_bound: f64,
}

/// Coefficients `1_{(n,q)=1} f̂(log n/2π)/√n` for `n ∈ (lo, hi]`, zero elsewhere.
fn kernel_coefficients(cache: &FourierCache, q: u64, lo: u64, hi: u64) -> Vec<(u64, Complex64)> {
    (lo + 1..=hi)
        .filter(|&n| gcd(n, q) == 1)
        .map(|n| (n, cache.get(n) / (n as f64).sqrt()))
        .collect()
}

/// `B(x, y) = Σ_{n,l} (1_{n≡l} − 1/φ) x_n conj(y_l)`, grouped by residue.
fn kernel_form(q: u64, phi: f64, x: &[(u64, Complex64)], y: &[(u64, Complex64)]) -> Complex64 {
    let residues = |v: &[(u64, Complex64)]| {
        let mut out = vec![Complex64::new(0.0, 0.0); q as usize];
        for &(n, c) in v {
            out[(n % q) as usize] += c;
        }
        out
    };
    let (xr, yr) = (residues(x), residues(y));
    let diag: Complex64 = xr.iter().zip(&yr).map(|(a, b)| a * b.conj()).sum();
    let sx: Complex64 = xr.iter().sum();
    let sy: Complex64 = yr.iter().sum();
    diag - sx * sy.conj() / phi
}

fn check_cache(cache: &FourierCache, needed: u64) -> Result<()> {
    if needed > cache.n_max() {
        return Err(Error::CacheTooShort {
            needed,
            available: cache.n_max(),
        });
    }
    Ok(())
}

/// `Σ_{n,l=M+1}^{Lq} 1_{(n,q)=1}1_{(l,q)=1} (nl)^{−1/2} (1_{n≡l} − 1/φ) f̂_n conj f̂_l`.
///
/// The remainder bound uses that partial sums of a non-principal character
/// never exceed `φ(q)/2`, so each character sum past `Lq` is at most
/// `T = φ/2·(|b_{Lq+1}| + TV_{>Lq})`; the kernel form then moves by at most
/// `T² + 2T·√total`.
pub fn variance_kernel_sum(q: u64, m: u64, cache: &FourierCache, blocks: u64) -> Result<VarianceKernelSum> {
    if q < 2 || blocks == 0 {
        return Err(Error::InvalidArgument(format!(
            "variance kernel needs q ≥ 2 and at least one block, got q={q}, blocks={blocks}"
        )));
    }
    let cutoff = blocks * q;
    check_cache(cache, cutoff)?;
    let phi = totient(q) as f64;
    let zero = Complex64::new(0.0, 0.0);
    if m >= cutoff {
        return Ok(VarianceKernelSum {
            total: zero,
            s_m: zero,
            s_l: zero,
            s_l_bar: zero,
            s_ll: zero,
            cutoff,
            remainder_bound: 0.0,
        });
    }
    let first = kernel_coefficients(cache, q, m.min(q), q);
    let rest = kernel_coefficients(cache, q, m.max(q), cutoff);
    let s_m = kernel_form(q, phi, &first, &first);
    let s_l = kernel_form(q, phi, &rest, &first);
    let s_l_bar = kernel_form(q, phi, &first, &rest);
    let s_ll = kernel_form(q, phi, &rest, &rest);
    let total = s_m + s_l + s_l_bar + s_ll;

    let profile = cache.tail_profile();
    let head = cache
        .try_get(cutoff + 1)
        .map(|v| v.norm() / ((cutoff + 1) as f64).sqrt())
        .unwrap_or_else(|_| profile.coefficient_beyond(cutoff as f64));
    let t = 0.5 * phi * (head + profile.variation_beyond(cutoff as f64));
    let remainder_bound = t * t + 2.0 * t * total.re.max(0.0).sqrt();
    Ok(VarianceKernelSum {
        total,
        s_m,
        s_l,
        s_l_bar,
        s_ll,
        cutoff,
        remainder_bound,
    })
}

/// The same double sum evaluated term by term, `O((Lq)²)`.
pub fn variance_kernel_double_sum(q: u64, m: u64, cache: &FourierCache, blocks: u64) -> Result<Complex64> {
    let cutoff = blocks * q;
    check_cache(cache, cutoff)?;
    let phi = totient(q) as f64;
    let coeffs = kernel_coefficients(cache, q, m, cutoff);
    let rows: Vec<Complex64> = coeffs
        .par_iter()
        .map(|&(n, x)| {
            coeffs
                .iter()
                .map(|&(l, y)| {
                    let kernel = if n % q == l % q { 1.0 } else { 0.0 } - 1.0 / phi;
                    x * y.conj() * kernel
                })
                .sum()
        })
        .collect();
    Ok(rows.into_iter().sum())
}

/// `(1/φ) Σ_{χ≠χ₀} |Σ_{M<n≤Lq} χ(n) f̂_n/√n|²` by enumerating characters.
pub fn variance_enumerated(group: &Arc<CharacterGroup>, m: u64, cache: &FourierCache, blocks: u64) -> Result<f64> {
    let q = group.modulus();
    let cutoff = blocks * q;
    check_cache(cache, cutoff)?;
    let coeffs = kernel_coefficients(cache, q, m, cutoff);
    let e = exact_expectation(group, |chi| {
        if chi.is_principal() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let s: Complex64 = coeffs.iter().map(|&(n, c)| chi.evaluate(n) * c).sum();
        Ok(Complex64::new(s.norm_sqr(), 0.0))
    })?;
    Ok(e.re)
}

/// `Σ_{r=M+1}^{q−1} |f̂_r|²/r + (φ^{−1/2} Σ_{r=M+1}^{q−1} r^{−1/2}|f̂_r|)²`, the bound on `|S_M|`.
pub fn s_m_bound(q: u64, m: u64, cache: &FourierCache) -> Result<f64> {
    check_cache(cache, q.saturating_sub(1))?;
    let phi = totient(q) as f64;
    let (mut diag, mut cross) = (0.0, 0.0);
    for r in m + 1..q {
        let v = cache.get(r).norm();
        diag += v * v / r as f64;
        cross += v / (r as f64).sqrt();
    }
    Ok(diag + cross * cross / phi)
}

/// All `M₂`-smooth integers in `1..=limit`, ascending.
///
/// Each number is reached once, from its factorization with non-decreasing primes.
pub fn smooth_numbers(m2: u64, limit: u64) -> Vec<u64> {
    let primes = primes_up_to(m2);
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((1u64, 0usize)));
    while let Some(Reverse((n, i))) = heap.pop() {
        out.push(n);
        for (j, &p) in primes.iter().enumerate().skip(i) {
            match n.checked_mul(p) {
                Some(next) if next <= limit => heap.push(Reverse((next, j))),
                _ => break,
            }
        }
    }
    out
}

/// Power-law domination `weight(n) ≤ scale·n^{−alpha}` for `n` past the cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothEnvelope {
    pub scale: f64,
    pub alpha: f64,
}

/// A truncated sum over smooth numbers with a bound on what was left out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// `Σ_{n>X, p|n⇒p≤M₂} scale·n^{−α}` bounded by Rankin's trick,
/// `scale·X^{−ε} ∏_{p≤M₂} (1 − p^{−(α−ε)})^{−1}`, minimized over `ε ∈ (0, α)`.
pub fn rankin_tail(m2: u64, envelope: SmoothEnvelope, cutoff: u64) -> Result<f64> {
    if m2 < 2 || envelope.scale == 0.0 {
        return Ok(0.0);
    }
    if envelope.alpha <= 0.0 {
        return Err(Error::NonSummable(envelope.alpha));
    }
    let primes = primes_up_to(m2);
    let lx = (cutoff.max(1) as f64).ln();
    let steps = 200;
    let best = (1..steps)
        .map(|i| {
            let eps = envelope.alpha * i as f64 / steps as f64;
            let beta = envelope.alpha - eps;
            let log_prod: f64 = primes.iter().map(|&p| -(1.0 - (p as f64).powf(-beta)).ln()).sum();
            (log_prod - eps * lx).exp()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(envelope.scale * best)
}

/// `Σ_{n≤cutoff, p|n⇒p≤M₂} weight(n)` with a Rankin tail bound from `envelope`.
pub fn smooth_series(
    m2: u64,
    weight: impl Fn(u64) -> f64 + Sync,
    envelope: SmoothEnvelope,
    cutoff: u64,
) -> Result<SmoothSum> {
    let numbers = smooth_numbers(m2, cutoff);
    let terms: Vec<f64> = numbers.par_iter().map(|&n| weight(n)).collect();
    Ok(SmoothSum {
        value: terms.iter().sum(),
        tail_bound: rankin_tail(m2, envelope, cutoff)?,
        terms: numbers.len(),
    })
}

fn is_smooth(mut n: u64, primes: &[u64]) -> bool {
    for &p in primes {
        while n % p == 0 {
            n /= p;
        }
    }
    n == 1
}

/// `Σ_{p|n ⇒ p≤M₂} |f̂_n|²/n` as `∫∫ f(x) f(y) ∏_{p≤M₂} (1 − p^{−1−i(x−y)})^{−1} dx dy`.
///
/// Expanding each Euler factor gives the Dirichlet series over smooth `n`,
/// so the infinite sum becomes a finite product under a compact double integral.
pub fn smooth_energy(f: &TestFunction, m2: u64, rule: &PanelRule) -> Result<Quadrature> {
    let logs: Vec<f64> = primes_up_to(m2).into_iter().map(|p| (p as f64).ln()).collect();
    let product = |u: f64| -> Complex64 {
        logs.iter().fold(Complex64::new(1.0, 0.0), |acc, &lp| {
            acc / (1.0 - Complex64::from_polar((-lp).exp(), -u * lp))
        })
    };
    let (a, b) = f.support();
    let inner_error = std::sync::Mutex::new(0.0f64);
    let outer = try_integrate(
        |x| {
            let fx = f.eval(x);
            if fx == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let inner = try_integrate(|y| Ok(product(x - y) * f.eval(y)), a, b, rule)?;
            let mut e = inner_error.lock().expect("not poisoned");
            *e = e.max(inner.error_estimate);
            Ok(inner.value * fx)
        },
        a,
        b,
        rule,
    )?;
    let inner = *inner_error.lock().expect("not poisoned");
    Ok(Quadrature {
        value: outer.value,
        error_estimate: outer.error_estimate + inner * f.l1_norm(),
        panels: outer.panels,
    })
}

/// The smooth sum of [`smooth_energy`] truncated at `cutoff`, with a Rankin
/// tail from `sup_{n>cutoff}|f̂_n|²`.
pub fn smooth_energy_truncated(cache: &FourierCache, m2: u64, cutoff: u64) -> Result<SmoothSum> {
    let numbers = smooth_numbers(m2, cutoff);
    let terms = numbers
        .par_iter()
        .map(|&n| Ok(cache.get_or_compute(n)?.norm_sqr() / n as f64))
        .collect::<Result<Vec<f64>>>()?;
    let envelope = SmoothEnvelope {
        scale: cache.tail_profile().sup_sq_beyond(cutoff as f64),
        alpha: 1.0,
    };
    Ok(SmoothSum {
        value: terms.iter().sum(),
        tail_bound: rankin_tail(m2, envelope, cutoff)?,
        terms: numbers.len(),
    })
}

/// A closed-form value with its numerical error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    pub error: f64,
}

/// `E|ℒ_{M₁,ω}(f) − ζ_{M₂,rand}(f)|²` in closed form:
/// `Σ_{n≤M₁} |f̂_n|²/n − 2Σ_{n≤M₁, M₂-smooth} |f̂_n|²/n + Σ_{M₂-smooth} |f̂_n|²/n`.
///
/// The infinite last sum comes from [`smooth_energy`].
pub fn e_m1m2_closed(cache: &FourierCache, m1: u64, m2: u64, rule: &PanelRule) -> Result<ClosedForm> {
    check_cache(cache, m1)?;
    let primes = primes_up_to(m2);
    let mut first = 0.0;
    let mut both = 0.0;
    for n in 1..=m1 {
        let v = cache.get(n).norm_sqr() / n as f64;
        first += v;
        if is_smooth(n, &primes) {
            both += v;
        }
    }
    if m2 < 2 {
        // Only n = 1 is 1-smooth, so the last sum is a single cached term.
        let one = cache.get(1).norm_sqr();
        return Ok(ClosedForm {
            value: first - 2.0 * both + one,
            error: 4.0 * f64::EPSILON * (first + one),
        });
    }
    let smooth = smooth_energy(cache.test_function(), m2, rule)?;
    let value = first - 2.0 * both + smooth.value.re;
    let rounding = 4.0 * f64::EPSILON * (first + smooth.value.re);
    Ok(ClosedForm {
        value,
        error: smooth.error_estimate + 3.0 * cache.tolerance() * first.max(1.0) + rounding,
    })
}

/// `Σ_{k≤M₁} k^{−2σ} − 2Σ_{k≤M₁, M₂-smooth} k^{−2σ} + Σ_{M₂-smooth} k^{−2σ}`.
///
/// The infinite smooth sum is the finite Euler product `∏_{p≤M₂}(1 − p^{−2σ})^{−1}`,
/// so no truncation is involved.
pub fn e_analytic_closed(sigma: f64, m1: u64, m2: u64) -> Result<f64> {
    if sigma <= 0.5 {
        return Err(Error::InvalidArgument(format!("needs Re(s) > 1/2, got {sigma}")));
    }
    let primes = primes_up_to(m2);
    let mut first = 0.0;
    let mut both = 0.0;
    for k in 1..=m1 {
        let v = (k as f64).powf(-2.0 * sigma);
        first += v;
        if is_smooth(k, &primes) {
            both += v;
        }
    }
    let euler: f64 = primes
        .iter()
        .map(|&p| -(1.0 - (p as f64).powf(-2.0 * sigma)).ln())
        .sum::<f64>()
        .exp();
    Ok(first - 2.0 * both + euler)
}

fn prime_power(p: u64, s: Complex64) -> Complex64 {
    (-s * (p as f64).ln()).exp()
}

/// `Σ_{p≤N} p^{−1−iu}`, the covariance `E[𝒢_N(x) conj 𝒢_N(y)]` at `u = x − y`.
pub fn gaussian_covariance_closed(u: f64, n: u64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("prime cutoff must be at least 2, got {n}")));
    }
    let s = Complex64::new(1.0, u);
    Ok(primes_up_to(n).into_iter().map(|p| prime_power(p, s)).sum())
}

/// `Σ_{p≤N} Σ_{k=2}^{k_max} p^{−k(1+iu)}/k`, the higher terms of `log ∏(1 − p^{−s})^{−1}`.
pub fn prime_power_correction(u: f64, n: u64, k_max: u32) -> Complex64 {
    let s = Complex64::new(1.0, u);
    primes_up_to(n)
        .into_iter()
        .map(|p| {
            let z = prime_power(p, s);
            let mut zk = z;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 2..=k_max {
                zk *= z;
                if zk.norm() < 1e-300 {
                    break;
                }
                acc += zk / k as f64;
            }
            acc
        })
        .sum()
}

/// Prime-number-theorem estimate `E₁((s−1) log N)` of `Σ_{p>N} p^{−s}` at `s = 1 + iu`.
pub fn prime_tail_estimate(u: f64, n: u64) -> Result<Complex64> {
    if u == 0.0 {
        return Err(Error::NonSummable(1.0));
    }
    Ok(exp_integral_e1(Complex64::new(0.0, u * (n as f64).ln())))
}

/// Exponential integral `E₁(z)` for `|arg z| < π`.
pub fn exp_integral_e1(z: Complex64) -> Complex64 {
    assert!(z.norm() > 0.0, "E1 has a logarithmic singularity at 0");
    if z.norm() <= 2.0 {
        // −γ − log z − Σ_{k≥1} (−z)^k / (k·k!)
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 1..200 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.norm() < 1e-17 * sum.norm().max(1e-300) {
                break;
            }
        }
        return -EULER_GAMMA - z.ln() - sum;
    }
    // Continued fraction e^{−z}/(z+1− 1²/(z+3− 2²/(z+5− …))), modified Lentz.
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = z + 1.0;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..10_000 {
        let a = -((k * k) as f64);
        let b = z + (2 * k + 1) as f64;
        d = b + a * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z).exp() / f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::{build_cache, TestFunction};
    use std::f64::consts::PI;

    fn bump_cache(n: u64) -> FourierCache {
        build_cache(&TestFunction::default(), n, 1e-12).unwrap()
    }

    #[test]
    fn zero_sum_examples() {
        let mut spec = KernelSumSpec::new(7, 0, 0, 0.5);
        assert!(kernel_sum_zero(&spec).unwrap().value.norm() < 1e-14);
        spec.q = 12;
        spec.weight = Weight::Power(2);
        assert!(kernel_sum_zero(&spec).unwrap().relative() < 1e-9);
        spec.m = 3;
        spec.s = 5;
        assert!(kernel_sum_zero(&spec).unwrap().relative() < 1e-9);
    }

    #[test]
    fn factorized_sums_match_double_sums() {
        for q in [2, 9, 30, 97, 210] {
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1), (2, 3)] {
                for sigma in [0.5, 0.75, 1.0] {
                    let mut spec = KernelSumSpec::new(q, a, b, sigma);
                    spec.m = 2;
                    spec.s = 1;
                    let r2 = kernel_sum_square(q, a, b, sigma).unwrap();
                    let d2 = kernel_sum_square_direct(&spec).unwrap();
                    assert!((r2 - d2).abs() <= 1e-12 * d2.abs().max(1e-300), "q={q} a={a} b={b}");
                    let r3 = kernel_sum_weighted(q, a, b, sigma).unwrap();
                    let d3 = kernel_sum_weighted_direct(&spec).unwrap();
                    assert!((r3 - d3).abs() <= 1e-12 * d3.abs().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn ratio_envelopes_at_half() {
        for q in [2, 10, 101, 1000, 9973] {
            let r2 = kernel_square_ratio(q, 0, 0, 0.5).unwrap();
            assert!(r2 <= 2.0, "q={q} ratio2={r2}");
            assert_eq!(r2, kernel_sum_square(q, 0, 0, 0.5).unwrap());
            let r3 = kernel_weighted_ratio(q, 0, 0, 0.5).unwrap();
            assert!(r3 <= 4.0, "q={q} ratio3={r3}");
            assert!(kernel_sum_square(q, 0, 0, 1.0).unwrap() <= kernel_sum_square(q, 0, 0, 0.5).unwrap());
        }
        assert!(kernel_sum_square(1, 0, 0, 0.5).is_err());
        assert!(kernel_sum_weighted(10, 0, 0, 0.4).is_err());
    }

    #[test]
    fn expectation_examples() {
        let g = CharacterGroup::new(15);
        let one = exact_expectation(&g, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((one - 1.0).norm() < 1e-15);
        let p0 = exact_expectation(&g, |chi| Ok(Complex64::new(f64::from(u8::from(chi.is_principal())), 0.0)))
            .unwrap();
        assert!((p0.re - 1.0 / 8.0).abs() < 1e-15);
        for (n, m) in [(2, 2), (2, 17), (4, 7), (3, 3)] {
            let e = exact_expectation(&g, |chi| Ok(chi.evaluate(n) * chi.evaluate(m).conj())).unwrap();
            let o = g.orthogonality_sum(n, m) / 8.0;
            assert!((e - o).norm() < 1e-13, "n={n} m={m}");
        }
    }

    #[test]
    fn kernel_three_routes_agree() {
        let cache = bump_cache(700);
        for q in [101, 211] {
            let group = CharacterGroup::new(q);
            for m in [5, 20] {
                let k = variance_kernel_sum(q, m, &cache, 3).unwrap();
                let parts = k.s_m + k.s_l + k.s_l_bar + k.s_ll;
                assert!((parts - k.total).norm() < 1e-15);
                assert!((k.s_l - k.s_l_bar.conj()).norm() < 1e-14);
                let direct = variance_kernel_double_sum(q, m, &cache, 3).unwrap();
                let enumerated = variance_enumerated(&group, m, &cache, 3).unwrap();
                assert!((k.total - direct).norm() < 1e-12 * direct.norm());
                assert!((k.total.re - enumerated).abs() < 1e-12 * enumerated);
                assert!(k.total.im.abs() < 1e-14);
                assert!(k.s_m.norm() <= s_m_bound(q, m, &cache).unwrap());
            }
        }
        let empty = variance_kernel_sum(101, 303, &cache, 3).unwrap();
        assert_eq!(empty.total, Complex64::new(0.0, 0.0));
        assert!(matches!(
            variance_kernel_sum(401, 5, &cache, 3),
            Err(Error::CacheTooShort { .. })
        ));
    }

    #[test]
    fn smooth_number_generation() {
        assert_eq!(smooth_numbers(1, 100), vec![1]);
        assert_eq!(smooth_numbers(2, 20), vec![1, 2, 4, 8, 16]);
        assert_eq!(smooth_numbers(3, 20), vec![1, 2, 3, 4, 6, 8, 9, 12, 16, 18]);
        let brute: Vec<u64> = (1..=5000).filter(|&n| is_smooth(n, &[2, 3, 5, 7, 11])).collect();
        assert_eq!(smooth_numbers(11, 5000), brute);
    }

    #[test]
    fn smooth_series_examples() {
        let env = |alpha| SmoothEnvelope { scale: 1.0, alpha };
        let one = smooth_series(1, |n| 1.0 / n as f64, env(1.0), 1000).unwrap();
        assert_eq!((one.value, one.tail_bound), (1.0, 0.0));
        let two = smooth_series(2, |n| 1.0 / n as f64, env(1.0), 1 << 40).unwrap();
        assert!((two.value - 2.0).abs() <= two.tail_bound + 1e-15);
        assert!(two.tail_bound < 1e-9);
        let three = smooth_series(3, |n| (n as f64).powi(-2), env(2.0), 1_000_000).unwrap();
        assert!(three.value <= 1.5);
        assert!(1.5 - three.value <= three.tail_bound);
        assert!(three.tail_bound < 1e-4);
        assert!(matches!(rankin_tail(5, env(0.0), 10), Err(Error::NonSummable(_))));
    }

    #[test]
    fn closed_forms() {
        let cache = bump_cache(200);
        let rule = PanelRule::with_tolerance(1e-12);
        let trivial = e_m1m2_closed(&cache, 1, 1, &rule).unwrap();
        assert_eq!(trivial.value, 0.0);
        assert_eq!(e_analytic_closed(1.0, 1, 1).unwrap(), 0.0);
        let seq: Vec<f64> = [2, 8, 32, 128]
            .iter()
            .map(|&m| e_m1m2_closed(&cache, m, m, &rule).unwrap().value)
            .collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0), "{seq:?}");
        let a = e_analytic_closed(1.0, 10_000, 1000).unwrap();
        assert!(a > 0.0 && a < e_analytic_closed(1.0, 1000, 1000).unwrap());
        assert!(a < e_analytic_closed(1.0, 10_000, 100).unwrap());
        assert!(e_analytic_closed(1.5, 100, 10).unwrap() < e_analytic_closed(1.0, 100, 10).unwrap());
        let via_series = smooth_series(7, |k| (k as f64).powi(-2), SmoothEnvelope { scale: 1.0, alpha: 2.0 }, 1 << 30)
            .unwrap();
        let closed = e_analytic_closed(1.0, 1, 7).unwrap() + 1.0;
        assert!((via_series.value - closed).abs() <= via_series.tail_bound + 1e-12);
    }

    #[test]
    fn smooth_energy_two_routes() {
        let cache = bump_cache(1000);
        let rule = PanelRule::with_tolerance(1e-12);
        for m2 in [1, 2, 3, 5] {
            let exact = smooth_energy(cache.test_function(), m2, &rule).unwrap();
            let series = smooth_energy_truncated(&cache, m2, 1 << 50).unwrap();
            assert!(exact.value.im.abs() < 1e-12);
            let gap = (exact.value.re - series.value).abs();
            assert!(gap <= series.tail_bound + exact.error_estimate + 1e-10, "m2={m2} gap={gap}");
        }
        let f0 = cache.get(1).norm_sqr();
        assert!((smooth_energy(cache.test_function(), 1, &rule).unwrap().value.re - f0).abs() < 1e-12);
    }

    #[test]
    fn covariance_closed_form() {
        let v = gaussian_covariance_closed(0.0, 10).unwrap();
        assert!((v.re - (0.5 + 1.0 / 3.0 + 0.2 + 1.0 / 7.0)).abs() < 1e-15);
        let a = gaussian_covariance_closed(1.3, 1000).unwrap();
        let b = gaussian_covariance_closed(-1.3, 1000).unwrap();
        assert!((a - b.conj()).norm() < 1e-13);
    }

    #[test]
    fn e1_reference_values() {
        assert!((exp_integral_e1(Complex64::new(1.0, 0.0)).re - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((exp_integral_e1(Complex64::new(5.0, 0.0)).re - 1.148_295_591_275_325_8e-3).abs() < 1e-16);
        // E1(ix) = −Ci(x) + i(Si(x) − π/2)
        let ci1 = 0.337_403_922_900_968_1;
        let si1 = 0.946_083_070_367_183_0;
        let z = exp_integral_e1(Complex64::new(0.0, 1.0));
        assert!((z - Complex64::new(-ci1, si1 - PI / 2.0)).norm() < 1e-14);
        let ci10 = -0.045_456_433_004_455_37;
        let si10 = 1.658_347_594_218_874_0;
        let z = exp_integral_e1(Complex64::new(0.0, 10.0));
        assert!((z - Complex64::new(-ci10, si10 - PI / 2.0)).norm() < 1e-13);
    }
}
