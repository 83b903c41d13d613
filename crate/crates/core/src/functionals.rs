//! Smoothed and pointwise L-objects: `L_q(f)`, its truncations, the random
//! model `ℒ_{M,ω}(f)`, randomized Euler products and the Gaussian part.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::factorize;
use crate::characters::Character;
use crate::error::{Error, Result};
use crate::quadrature::{try_integrate, PanelRule};
use crate::randmodel::OmegaAssignment;
use crate::testfn::{FourierCache, TestFunction};
use crate::zetafn::{exprel, tail_expansion, zeta, ZetaEvalConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FourierSeries,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalValue {
    pub value: Complex64,
    /// Last index summed (series) or number of panels (quadrature).
    pub cutoff: u64,
    pub tail_bound: f64,
    pub numerical_error: f64,
    pub method: Method,
}

impl FunctionalValue {
    pub fn error_budget(&self) -> f64 {
        self.tail_bound + self.numerical_error
    }
}

/// How far to sum a conditionally convergent character series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CutoffPolicy {
    /// Exactly this many complete periods.
    Blocks(u64),
    /// Complete periods until the tail bound drops below the tolerance.
    Tolerance(f64),
}

/// Quadrature settings for integrals against `f` over its support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub panels: PanelRule,
    pub zeta: ZetaEvalConfig,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panels: PanelRule::with_tolerance(1e-10),
            zeta: ZetaEvalConfig {
                tolerance: 1e-12,
                ..ZetaEvalConfig::default()
            },
        }
    }
}

fn integrate_against(
    f: &TestFunction,
    cfg: &QuadratureConfig,
    g: impl Fn(f64) -> Result<Complex64>,
) -> Result<FunctionalValue> {
    if f.amplitude == 0.0 {
        return Ok(FunctionalValue {
            value: Complex64::new(0.0, 0.0),
            cutoff: 0,
            tail_bound: 0.0,
            numerical_error: 0.0,
            method: Method::Quadrature,
        });
    }
    let (a, b) = f.support();
    let q = try_integrate(|x| Ok(g(x)? * f.eval(x)), a, b, &cfg.panels)?;
    Ok(FunctionalValue {
        value: q.value,
        cutoff: q.panels as u64,
        tail_bound: 0.0,
        numerical_error: q.error_estimate,
        method: Method::Quadrature,
    })
}

#[inline]
fn n_pow(n: u64, s: Complex64) -> Complex64 {
    (-s * (n as f64).ln()).exp()
}

/// `L_q(f) = Σ χ(n) n^{−1/2} f̂(log n/2π)` for non-principal `χ`.
///
/// Summation runs over complete periods, so after `X = mq` terms the partial
/// character sums restart from zero and Abel summation bounds the tail by
/// `max_r |Σ_{n≤r} χ(n)|` times the variation of the coefficients past `X`.
pub fn l_functional(cache: &FourierCache, chi: &Character, policy: CutoffPolicy) -> Result<FunctionalValue> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    let q = chi.modulus();
    let period: Vec<Complex64> = (0..q).map(|r| chi.evaluate(r)).collect();
    let partial_max = chi.max_partial_sum();
    let profile = cache.tail_profile();
    let tail = |x: u64| -> f64 {
        let head = cache
            .try_get(x + 1)
            .map(|v| v.norm() / ((x + 1) as f64).sqrt())
            .unwrap_or_else(|_| profile.coefficient_beyond(x as f64));
        partial_max * (head + profile.variation_beyond(x as f64))
    };
    let block = |m: u64| -> Complex64 {
        (m * q + 1..=(m + 1) * q)
            .map(|n| period[(n % q) as usize] * cache.get(n) / (n as f64).sqrt())
            .sum()
    };
    let mut acc = Complex64::new(0.0, 0.0);
    let mut m = 0u64;
    let done = |m: u64| match policy {
        CutoffPolicy::Blocks(b) => m >= b,
        CutoffPolicy::Tolerance(tol) => m > 0 && tail(m * q) < tol,
    };
    while !done(m) {
        if (m + 1) * q > cache.n_max() {
            return match policy {
                CutoffPolicy::Blocks(_) => Err(Error::CacheTooShort {
                    needed: (m + 1) * q,
                    available: cache.n_max(),
                }),
                CutoffPolicy::Tolerance(tol) => Err(Error::ToleranceNotReached {
                    achieved: tail(m * q),
                    target: tol,
                }),
            };
        }
        acc += block(m);
        m += 1;
    }
    Ok(FunctionalValue {
        value: acc,
        cutoff: m * q,
        tail_bound: tail(m * q),
        numerical_error: cache.tolerance() * 2.0 * ((m * q) as f64).sqrt(),
        method: Method::FourierSeries,
    })
}

/// `∫ f(x)·ζ(1/2+ix)·∏_{p|q}(1 − p^{−1/2−ix}) dx`.
pub fn l_functional_principal(f: &TestFunction, q: u64, cfg: &QuadratureConfig) -> Result<FunctionalValue> {
    let primes: Vec<u64> = factorize(q).primes().collect();
    integrate_against(f, cfg, |x| {
        let s = Complex64::new(0.5, x);
        let z = zeta(s, &cfg.zeta)?;
        Ok(primes.iter().fold(z, |acc, &p| acc * (1.0 - n_pow(p, s))))
    })
}

/// `∫ f(x)·L(1/2+ix, χ) dx` by quadrature, for non-principal `χ`.
pub fn l_functional_quadrature(f: &TestFunction, chi: &Character, cfg: &QuadratureConfig) -> Result<FunctionalValue> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    let tol = cfg.zeta.tolerance;
    integrate_against(f, cfg, |x| l_series_continued(Complex64::new(0.5, x), chi, tol))
}

/// `Σ_{n≤M} c_n n^{−1/2} f̂(log n/2π)` for coefficients `c[n]` (index 0 unused).
pub fn dirichlet_polynomial(cache: &FourierCache, coeffs: &[Complex64], m: u64) -> Result<Complex64> {
    if m > cache.n_max() {
        return Err(Error::CacheTooShort {
            needed: m,
            available: cache.n_max(),
        });
    }
    assert!(coeffs.len() as u64 > m, "coefficient table shorter than the truncation");
    Ok((1..=m)
        .map(|n| coeffs[n as usize] * cache.get(n) / (n as f64).sqrt())
        .sum())
}

/// `ℒ_{M,q}(f) = Σ_{n≤M} χ(n) n^{−1/2} f̂(log n/2π)`.
pub fn l_truncated(cache: &FourierCache, chi: &Character, m: u64) -> Result<Complex64> {
    dirichlet_polynomial(cache, &chi.values(m), m)
}

/// `ℒ_{M,ω}(f) = Σ_{n≤M} ω_n n^{−1/2} f̂(log n/2π)`.
pub fn l_omega_truncated(cache: &FourierCache, assignment: &OmegaAssignment, m: u64) -> Result<Complex64> {
    dirichlet_polynomial(cache, &assignment.table(m)?, m)
}

fn check_assignment(assignment: &OmegaAssignment, n: u64) -> Result<()> {
    if n > assignment.cutoff() {
        return Err(Error::PrimeAboveCutoff {
            prime: n,
            cutoff: assignment.cutoff(),
        });
    }
    Ok(())
}

fn primes_with_turns(assignment: &OmegaAssignment, n: u64) -> impl Iterator<Item = (u64, Complex64)> + '_ {
    assignment
        .primes()
        .iter()
        .zip(assignment.turns())
        .take_while(move |(&p, _)| p <= n)
        .map(|(&p, t)| (p, t.to_complex()))
}

/// `ζ_{N,rand}(f) = ∫ f(x) ∏_{p≤N} (1 − ω_p p^{−1/2−ix})^{−1} dx`.
pub fn euler_product_functional(
    f: &TestFunction,
    assignment: &OmegaAssignment,
    n: u64,
    cfg: &QuadratureConfig,
) -> Result<FunctionalValue> {
    check_assignment(assignment, n)?;
    let factors: Vec<(f64, Complex64)> = primes_with_turns(assignment, n)
        .map(|(p, w)| ((p as f64).ln(), w / (p as f64).sqrt()))
        .collect();
    integrate_against(f, cfg, |x| {
        let mut prod = Complex64::new(1.0, 0.0);
        for &(lp, c) in &factors {
            let factor = 1.0 - c * Complex64::from_polar(1.0, -x * lp);
            debug_assert!(factor.norm() > 1e-6);
            prod /= factor;
        }
        Ok(prod)
    })
}

/// `Σ χ(n) n^{−s}` continued to `Re s > 0` for non-principal `χ`.
///
/// The first `K` periods are summed directly; the rest is written as
/// `q^{−s} Σ_a χ(a) ζ(s, K + a/q)` and each Hurwitz tail is expanded by
/// Euler–Maclaurin. Since `Σ_a χ(a) = 0`, the pole term is replaced by its
/// regular part, which keeps `s = 1` finite.
fn l_series_continued(s: Complex64, chi: &Character, tol: f64) -> Result<Complex64> {
    let q = chi.modulus();
    let p_terms = 8usize;
    let sigma = s.re;
    let period: Vec<Complex64> = (0..q).map(|r| chi.evaluate(r)).collect();
    let units = period.iter().filter(|z| z.norm() > 0.0).count() as f64;
    let scale = (q as f64).powf(-sigma) * units;
    let mut k = ((s.norm() + 2.0 * p_terms as f64) / TAU).ceil().max(1.0) as u64;
    loop {
        let b = tail_expansion(s, k as f64, p_terms).bound * scale;
        if b < 0.5 * tol {
            break;
        }
        if k > 1 << 24 {
            return Err(Error::ToleranceNotReached {
                achieved: b,
                target: tol,
            });
        }
        k *= 2;
    }
    let mut direct = Complex64::new(0.0, 0.0);
    for n in 1..=k * q {
        let c = period[(n % q) as usize];
        if c.norm_sqr() > 0.0 {
            direct += c * n_pow(n, s);
        }
    }
    let mut tail = Complex64::new(0.0, 0.0);
    for a in 1..=q {
        let c = period[(a % q) as usize];
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let x = k as f64 + a as f64 / q as f64;
        let t = tail_expansion(s, x, p_terms);
        let lx = x.ln();
        let regular_leading = -lx * exprel((1.0 - s) * lx);
        tail += c * (regular_leading + t.correction);
    }
    Ok(direct + tail * n_pow(q, s))
}

/// `L(s, χ)` for non-principal `χ` and `Re s > 1/2`, within `tol`.
pub fn l_pointwise(s: Complex64, chi: &Character, tol: f64) -> Result<Complex64> {
    if chi.is_principal() {
        return Err(Error::PrincipalCharacter);
    }
    if s.re <= 0.5 {
        return Err(Error::InvalidArgument(format!(
            "l_pointwise needs Re(s) > 1/2, got {}",
            s.re
        )));
    }
    l_series_continued(s, chi, tol)
}

/// `∏_{p≤N} (1 − ω_p p^{−s})^{−1}`.
pub fn euler_product_pointwise(s: Complex64, assignment: &OmegaAssignment, n: u64) -> Result<Complex64> {
    check_assignment(assignment, n)?;
    Ok(primes_with_turns(assignment, n).fold(Complex64::new(1.0, 0.0), |acc, (p, w)| {
        acc / (1.0 - w * n_pow(p, s))
    }))
}

/// `Σ_{p≤N} −log(1 − ω_p p^{−s})`, principal branch factor by factor.
pub fn euler_product_log(s: Complex64, assignment: &OmegaAssignment, n: u64) -> Result<Complex64> {
    check_assignment(assignment, n)?;
    Ok(primes_with_turns(assignment, n)
        .map(|(p, w)| -(1.0 - w * n_pow(p, s)).ln())
        .sum())
}

/// `𝒢_N(x) = Σ_{p≤N} ω_p p^{−1/2−ix}`, the first-order term of the log Euler product.
pub fn gaussian_part(x: f64, assignment: &OmegaAssignment, n: u64) -> Result<Complex64> {
    check_assignment(assignment, n)?;
    let s = Complex64::new(0.5, x);
    Ok(primes_with_turns(assignment, n).map(|(p, w)| w * n_pow(p, s)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::CharacterGroup;
    use crate::randmodel::{sample_omegas, OmegaSampler, RandomStream, Turn};
    use crate::testfn::build_cache;
    use std::f64::consts::PI;

    fn cache(n: u64) -> FourierCache {
        build_cache(&TestFunction::default(), n, 1e-11).unwrap()
    }

    #[test]
    fn truncated_examples() {
        let c = cache(64);
        let g = CharacterGroup::new(2);
        let chi0 = g.principal();
        assert_eq!(l_truncated(&c, &chi0, 1).unwrap(), c.get(1));
        let want = c.get(1) + c.get(3) / 3f64.sqrt();
        assert!((l_truncated(&c, &chi0, 4).unwrap() - want).norm() < 1e-15);
        assert!(matches!(l_truncated(&c, &chi0, 65), Err(Error::CacheTooShort { .. })));
    }

    #[test]
    fn truncated_matches_quadrature() {
        let c = cache(64);
        let f = *c.test_function();
        let g = CharacterGroup::new(7);
        let chi = g.character(3);
        let m = 20;
        let series = l_truncated(&c, &chi, m).unwrap();
        let direct = integrate_against(&f, &QuadratureConfig::default(), |x| {
            Ok((1..=m)
                .map(|n| chi.evaluate(n) * n_pow(n, Complex64::new(0.5, x)))
                .sum())
        })
        .unwrap();
        assert!((series - direct.value).norm() < 1e-8);
    }

    #[test]
    fn functional_cutoffs_agree() {
        let c = cache(20_000);
        let g = CharacterGroup::new(3);
        let chi = g.character(1);
        let a = l_functional(&c, &chi, CutoffPolicy::Blocks(1000)).unwrap();
        let b = l_functional(&c, &chi, CutoffPolicy::Blocks(2000)).unwrap();
        assert!((a.value - b.value).norm() <= a.error_budget() + b.error_budget());
        assert!(a.tail_bound > 0.0);
        let t = l_functional(&c, &chi, CutoffPolicy::Tolerance(1e-3)).unwrap();
        assert!(t.tail_bound < 1e-3);
        assert!(matches!(
            l_functional(&c, &g.principal(), CutoffPolicy::Blocks(1)),
            Err(Error::PrincipalCharacter)
        ));
    }

    #[test]
    fn series_and_quadrature_routes_agree() {
        let c = cache(50_000);
        let g = CharacterGroup::new(5);
        for idx in 1..4 {
            let chi = g.character(idx);
            let series = l_functional(&c, &chi, CutoffPolicy::Tolerance(1e-3)).unwrap();
            let quad = l_functional_quadrature(c.test_function(), &chi, &QuadratureConfig::default()).unwrap();
            assert!(
                (series.value - quad.value).norm() <= series.error_budget() + 1e-8,
                "idx={idx} {:?} {:?}",
                series,
                quad
            );
        }
    }

    #[test]
    fn linearity_and_zero() {
        let f0 = TestFunction::bump(0.0, 1.0, 0.0).unwrap();
        let c0 = build_cache(&f0, 100, 1e-10).unwrap();
        let g = CharacterGroup::new(3);
        let chi = g.character(1);
        assert_eq!(l_functional(&c0, &chi, CutoffPolicy::Blocks(10)).unwrap().value, Complex64::new(0.0, 0.0));
        let c1 = cache(3000);
        let c2 = build_cache(&TestFunction::default().scaled(2.0), 3000, 1e-11).unwrap();
        let v1 = l_functional(&c1, &chi, CutoffPolicy::Blocks(1000)).unwrap().value;
        let v2 = l_functional(&c2, &chi, CutoffPolicy::Blocks(1000)).unwrap().value;
        assert!((v2 - v1 * 2.0).norm() < 1e-9);
    }

    #[test]
    fn principal_functional() {
        let cfg = QuadratureConfig::default();
        let f = TestFunction::default();
        let v2 = l_functional_principal(&f, 2, &cfg).unwrap();
        let v4 = l_functional_principal(&f, 4, &cfg).unwrap();
        assert_eq!(v2.value, v4.value);
        let v1 = l_functional_principal(&f, 1, &cfg).unwrap();
        assert!(v1.value.re.is_finite());
        let zero = l_functional_principal(&f.scaled(0.0), 7, &cfg).unwrap();
        assert_eq!(zero.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn pointwise_examples() {
        let g4 = CharacterGroup::new(4);
        let chi = g4.character(1);
        let v = l_pointwise(Complex64::new(1.0, 0.0), &chi, 1e-12).unwrap();
        assert!((v.re - PI / 4.0).abs() < 1e-10 && v.im.abs() < 1e-12);

        let g = CharacterGroup::new(11);
        let chi = g.character(3);
        let s = Complex64::new(2.0, 0.7);
        let direct: Complex64 = (1..200_000u64).map(|n| chi.evaluate(n) * n_pow(n, s)).sum();
        assert!((l_pointwise(s, &chi, 1e-12).unwrap() - direct).norm() < 1e-10);

        let s = Complex64::new(0.8, 3.0);
        let a = l_pointwise(s.conj(), &chi.conj(), 1e-12).unwrap();
        let b = l_pointwise(s, &chi, 1e-12).unwrap();
        assert!((a - b.conj()).norm() < 1e-10);
        assert!(l_pointwise(Complex64::new(0.5, 1.0), &chi, 1e-10).is_err());
    }

    #[test]
    fn euler_product_examples() {
        let w = sample_omegas(100, &RandomStream::new(3));
        let s = Complex64::new(0.9, 1.3);
        assert_eq!(euler_product_pointwise(s, &w, 1).unwrap(), Complex64::new(1.0, 0.0));
        let prod = euler_product_pointwise(s, &w, 100).unwrap();
        let log = euler_product_log(s, &w, 100).unwrap();
        assert!((prod.ln() - log).norm() < 1e-12 || ((prod.ln() - log).im.abs() - TAU).abs() < 1e-9);
        assert!((log.exp() - prod).norm() < 1e-12 * prod.norm());

        let ones = OmegaSampler::new(1000).constant(Turn(0));
        let z = euler_product_pointwise(Complex64::new(2.0, 0.0), &ones, 1000).unwrap();
        // the omitted factors ∏_{p>N}(1−p^{−2})^{−1} exceed 1 by at most about 1/N
        assert!((z.re - PI * PI / 6.0).abs() < PI * PI / 6.0 / 1000.0);
        assert_eq!(gaussian_part(0.3, &w, 1).unwrap(), Complex64::new(0.0, 0.0));
        assert!(gaussian_part(0.3, &w, 101).is_err());
    }

    #[test]
    fn euler_functional_small_cases() {
        let f = TestFunction::default();
        let cfg = QuadratureConfig::default();
        let w = sample_omegas(10, &RandomStream::new(5));
        let empty = euler_product_functional(&f, &w, 1, &cfg).unwrap();
        let c = cache(1 << 12);
        assert!((empty.value - c.get(1)).norm() < 1e-10);
        // N = 2: geometric series in ω_2 2^{−1/2−ix}
        let w2 = w.turn_of_prime(2).unwrap().to_complex();
        let series: Complex64 = (0..48u32)
            .map(|k| w2.powu(k) * c.get_or_compute(1 << k).unwrap() / 2f64.powf(k as f64 / 2.0))
            .sum();
        let quad = euler_product_functional(&f, &w, 2, &cfg).unwrap();
        assert!((series - quad.value).norm() < 1e-9);
    }
}
