//! Riemann zeta by Euler–Maclaurin summation with a certified remainder,
//! the principal-character L-function and the kernel `log ζ(1+iu)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::arith::factorize;
use crate::error::{Error, Result};

/// `B_{2j}` for `j = 1..=20`.
const BERNOULLI_EVEN: [f64; 20] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
    -26315271553053477373.0 / 1919190.0,
    2929993913841559.0 / 6.0,
    -261082718496449122051.0 / 13530.0,
];

pub const MAX_BERNOULLI_TERMS: usize = BERNOULLI_EVEN.len();
const MAX_CUTOFF: u64 = 1 << 26;
const POLE_WINDOW: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaEvalConfig {
    /// Number of directly summed terms; `None` picks and doubles it automatically.
    pub cutoff: Option<u64>,
    pub bernoulli_terms: usize,
    pub tolerance: f64,
}

impl Default for ZetaEvalConfig {
    fn default() -> Self {
        Self {
            cutoff: None,
            bernoulli_terms: 8,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaEvaluation {
    pub value: Complex64,
    pub remainder_bound: f64,
    pub cutoff: u64,
}

/// Euler–Maclaurin pieces of `Σ_{m≥0} (a+m)^{−s}`.
#[derive(Clone, Copy, Debug)]
pub struct TailExpansion {
    /// `a^{1−s}/(s−1)`.
    pub leading: Complex64,
    /// `a^{−s}/2` plus the Bernoulli corrections.
    pub correction: Complex64,
    /// Bound on the omitted remainder.
    pub bound: f64,
}

/// Expansion of the Hurwitz tail `Σ_{m≥0} (a+m)^{−s}` with `p` Bernoulli terms.
///
/// The remainder bound `4|(s)_{2p}|/(2π)^{2p} · a^{1−σ−2p}/(σ+2p−1)` needs
/// `σ + 2p > 1`; callers check that.
pub fn tail_expansion(s: Complex64, a: f64, p: usize) -> TailExpansion {
    assert!(a > 0.0 && p >= 1 && p <= MAX_BERNOULLI_TERMS);
    let ln_a = a.ln();
    let a_neg_s = (-s * ln_a).exp();
    let leading = a_neg_s * a / (s - 1.0);
    let mut correction = a_neg_s * 0.5;
    // rising = (s)_{2j-1}, power = a^{-s-2j+1}, factorial = (2j)!
    let mut rising = s;
    let mut power = a_neg_s / a;
    let mut factorial = 2.0;
    for j in 1..=p {
        correction += rising * power * (BERNOULLI_EVEN[j - 1] / factorial);
        let k = (2 * j) as f64;
        rising *= (s + (k - 1.0)) * (s + k);
        power /= a * a;
        factorial *= (k + 1.0) * (k + 2.0);
    }
    let sigma = s.re;
    let two_p = (2 * p) as f64;
    let rising_2p = (0..2 * p).fold(1.0, |acc, i| acc * (s + i as f64).norm());
    let bound = 4.0 * rising_2p / TAU.powf(two_p) * a.powf(1.0 - sigma - two_p)
        / (sigma + two_p - 1.0);
    TailExpansion {
        leading,
        correction,
        bound,
    }
}

/// `(e^z − 1)/z`, accurate near 0.
pub fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

fn check_pole(s: Complex64) -> Result<()> {
    if (s - 1.0).norm() < POLE_WINDOW {
        return Err(Error::PoleProximity { re: s.re, im: s.im });
    }
    Ok(())
}

/// `Σ_{n<N} n^{−s}` plus the tail expansion at `N`.
fn zeta_at_cutoff(s: Complex64, n: u64, p: usize) -> (Complex64, f64) {
    let mut direct = Complex64::new(0.0, 0.0);
    for k in 1..n {
        direct += (-s * (k as f64).ln()).exp();
    }
    let t = tail_expansion(s, n as f64, p);
    (direct + t.leading + t.correction, t.bound)
}

pub fn zeta_detailed(s: Complex64, cfg: &ZetaEvalConfig) -> Result<ZetaEvaluation> {
    check_pole(s)?;
    let p = cfg.bernoulli_terms;
    if p == 0 || p > MAX_BERNOULLI_TERMS {
        return Err(Error::InvalidArgument(format!(
            "bernoulli_terms must lie in 1..={MAX_BERNOULLI_TERMS}"
        )));
    }
    if s.re + 2.0 * p as f64 - 1.0 <= 0.0 {
        return Err(Error::ToleranceNotReached {
            achieved: f64::INFINITY,
            target: cfg.tolerance,
        });
    }
    if let Some(n) = cfg.cutoff {
        let (value, bound) = zeta_at_cutoff(s, n.max(1), p);
        if !(bound < cfg.tolerance) {
            return Err(Error::ToleranceNotReached {
                achieved: bound,
                target: cfg.tolerance,
            });
        }
        return Ok(ZetaEvaluation {
            value,
            remainder_bound: bound,
            cutoff: n.max(1),
        });
    }
    let mut n = ((s.norm() + 2.0 * p as f64) * 0.6).ceil().max(8.0) as u64;
    loop {
        let t = tail_expansion(s, n as f64, p);
        if t.bound < 0.5 * cfg.tolerance {
            break;
        }
        if n >= MAX_CUTOFF {
            return Err(Error::ToleranceNotReached {
                achieved: t.bound,
                target: cfg.tolerance,
            });
        }
        n *= 2;
    }
    let (value, bound) = zeta_at_cutoff(s, n, p);
    Ok(ZetaEvaluation {
        value,
        remainder_bound: bound,
        cutoff: n,
    })
}

pub fn zeta(s: Complex64, cfg: &ZetaEvalConfig) -> Result<Complex64> {
    zeta_detailed(s, cfg).map(|z| z.value)
}

/// `ζ(s)·∏_{p|q}(1 − p^{−s})`.
pub fn principal_l(s: Complex64, q: u64, cfg: &ZetaEvalConfig) -> Result<Complex64> {
    let z = zeta(s, cfg)?;
    Ok(factorize(q)
        .primes()
        .fold(z, |acc, p| acc * (1.0 - (-s * (p as f64).ln()).exp())))
}

/// Principal-branch `log ζ(1+iu)`.
///
/// The argument is tracked continuously along `σ + iu`, `σ` from 3 down to 1,
/// where `ζ` has no zeros; a mismatch with the principal argument at `σ = 1`
/// is reported as a branch ambiguity.
pub fn covariance_kernel(u: f64, cfg: &ZetaEvalConfig) -> Result<Complex64> {
    if u.abs() < POLE_WINDOW {
        return Err(Error::SingularityWindow(u));
    }
    let at = |sigma: f64| zeta(Complex64::new(sigma, u), cfg);
    let end = at(1.0)?;
    let mut arg = at(3.0)?.arg();
    let mut sigma: f64 = 3.0;
    let mut step: f64 = 0.125;
    while sigma > 1.0 {
        let next_sigma = (sigma - step).max(1.0);
        let next = at(next_sigma)?;
        let mut delta = next.arg() - arg;
        delta = (delta + PI).rem_euclid(TAU) - PI;
        if delta.abs() > 0.5 && step > 1e-6 {
            step *= 0.5;
            continue;
        }
        arg += delta;
        sigma = next_sigma;
    }
    if (arg - end.arg()).abs() > 1e-8 {
        return Err(Error::BranchAmbiguity(u));
    }
    Ok(end.ln())
}
