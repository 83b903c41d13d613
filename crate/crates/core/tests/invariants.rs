//! Deterministic invariants too heavy for property testing.

use num_complex::Complex64;

use chaoszeta::arith::primes_up_to;
use chaoszeta::characters::CharacterGroup;
use chaoszeta::functionals::{dirichlet_polynomial, euler_product_pointwise, l_functional, CutoffPolicy};
use chaoszeta::harness::analytic::CompactRect;
use chaoszeta::harness::sup_norm_on_rect;
use chaoszeta::oracles::{e_analytic_closed, e_m1m2_closed};
use chaoszeta::quadrature::{integrate, PanelRule};
use chaoszeta::randmodel::{omega_moment_oracle, omega_of, MomentTuple, OmegaAssignment, OmegaSampler, RandomStream, Turn};
use chaoszeta::testfn::{build_cache, transform_energy, TestFunction};

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn plancherel() {
    let f = TestFunction::default();
    let (a, b) = f.support();
    let direct = integrate(|x| Complex64::new(f.eval(x).powi(2), 0.0), a, b, &PanelRule::with_tolerance(1e-13))
        .unwrap()
        .value
        .re;
    let spectral = transform_energy(&f, 30.0, 1e-10).unwrap();
    assert!((direct - spectral).abs() < 1e-6, "{direct} vs {spectral}");
}

#[test]
fn coefficient_energy_series_settles() {
    let cache = build_cache(&TestFunction::default(), 100_000, 1e-12).unwrap();
    let partial = |n: u64| -> f64 { (1..=n).map(|k| cache.get(k).norm_sqr() / k as f64).sum() };
    let (short, long) = (partial(10_000), partial(100_000));
    assert!((long - short).abs() < 1e-3 * short, "{short} vs {long}");
}

#[test]
fn quadrature_tightening_is_stable() {
    let f = TestFunction::default();
    for k in [0.0, 0.3, 1.7, 5.0] {
        let coarse = f.fourier(k, 1e-10).unwrap();
        let fine = f.fourier(k, 1e-13).unwrap();
        assert!((coarse - fine).norm() < 1e-10, "k = {k}");
    }
}

#[test]
fn omega_moments_by_monte_carlo() {
    let sampler = OmegaSampler::new(7);
    let stream = RandomStream::new(11).named("moment-check");
    let samples: Vec<_> = (0..100_000u64).map(|i| sampler.sample(&stream.child(i))).collect();
    let cases: [&[MomentTuple]; 4] = [
        &[MomentTuple::new(2, 1, 1)],
        &[MomentTuple::new(2, 2, 0)],
        &[MomentTuple::new(2, 1, 0), MomentTuple::new(3, 1, 0), MomentTuple::new(6, 0, 1)],
        &[MomentTuple::new(5, 1, 0), MomentTuple::new(7, 0, 1)],
    ];
    for tuples in cases {
        let values: Vec<Complex64> = samples
            .iter()
            .map(|w| {
                tuples.iter().fold(Complex64::new(1.0, 0.0), |acc, t| {
                    let z = omega_of(t.n, w).unwrap();
                    acc * z.powu(t.k) * z.conj().powu(t.m)
                })
            })
            .collect();
        let exact = omega_moment_oracle(tuples) as f64;
        for (part, target) in [(0usize, exact), (1, 0.0)] {
            let xs: Vec<f64> = values.iter().map(|z| if part == 0 { z.re } else { z.im }).collect();
            let (mean, se) = mean_se(&xs);
            let gap = (mean - target).abs();
            assert!(gap <= 5.0 * se + 1e-12, "{tuples:?} part {part}: {mean} vs {target} (se {se})");
        }
    }
}

#[test]
fn functional_moves_less_than_its_budget_when_the_cutoff_doubles() {
    for q in [3u64, 7, 11] {
        let group = CharacterGroup::new(q);
        let cache = build_cache(&TestFunction::default(), 400 * q, 1e-12).unwrap();
        for i in 1..group.order() {
            let chi = group.character(i);
            let a = l_functional(&cache, &chi, CutoffPolicy::Blocks(200)).unwrap();
            let b = l_functional(&cache, &chi, CutoffPolicy::Blocks(400)).unwrap();
            let moved = (a.value - b.value).norm();
            assert!(moved <= a.error_budget(), "q={q} chi={i}: moved {moved:e}, budget {:e}", a.error_budget());
        }
    }
}

#[test]
fn pointwise_truncation_closed_form_matches_monte_carlo() {
    let s = Complex64::new(1.0, 0.7);
    let (m1, m2) = (16u64, 5u64);
    let polynomial = |w: &OmegaAssignment| -> Complex64 {
        let table = w.table(m1).unwrap();
        (1..=m1).map(|n| table[n as usize] * (-s * (n as f64).ln()).exp()).sum()
    };
    let sampler = OmegaSampler::new(m1);
    let stream = RandomStream::new(3).named("pointwise-bridge");
    let xs: Vec<f64> = (0..20_000u64)
        .map(|i| {
            let w = sampler.sample(&stream.child(i));
            (polynomial(&w) - euler_product_pointwise(s, &w, m2).unwrap()).norm_sqr()
        })
        .collect();
    let (mean, se) = mean_se(&xs);
    let closed = e_analytic_closed(s.re, m1, m2).unwrap();
    assert!((mean - closed).abs() <= 5.0 * se, "{mean} ± {se} vs {closed}");
}

#[test]
fn diagonal_truncation_error_decays() {
    let cache = build_cache(&TestFunction::default(), 128, 1e-12).unwrap();
    let rule = PanelRule::with_tolerance(1e-10);
    let values: Vec<f64> = [2u64, 8, 32, 128]
        .iter()
        .map(|&m| e_m1m2_closed(&cache, m, m, &rule).unwrap().value)
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn degenerate_euler_product_sup_norm() {
    let n = 50;
    let ones = OmegaSampler::new(n).constant(Turn(0));
    let primes = primes_up_to(n);
    let direct = |s: Complex64| -> Complex64 {
        primes
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &p| acc / (1.0 - (-s * (p as f64).ln()).exp()))
    };
    let rect = CompactRect::new(1.5, 2.0, 0.0, 1.0).unwrap();
    let diff = sup_norm_on_rect(|s| Ok(euler_product_pointwise(s, &ones, n)? - direct(s)), &rect, 0.01).unwrap();
    assert!(diff.value < 1e-12);
    let sup = sup_norm_on_rect(|s| euler_product_pointwise(s, &ones, n), &rect, 0.01).unwrap();
    // The modulus is largest on the real axis at the left edge.
    assert!((sup.value - direct(Complex64::new(1.5, 0.0)).norm()).abs() < 1e-12);
    assert!(sup.converged);
}

#[test]
fn truncated_functional_uses_the_cache_convention() {
    let cache = build_cache(&TestFunction::default(), 10, 1e-12).unwrap();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 11];
    coeffs[1] = Complex64::new(1.0, 0.0);
    let v = dirichlet_polynomial(&cache, &coeffs, 10).unwrap();
    assert!((v.re - 0.4439938161680793).abs() < 1e-12);
}
