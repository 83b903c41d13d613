//! Distances between empirical laws on the complex plane.

use num_complex::Complex64;
use rayon::prelude::*;

/// A frequency `(ξ₁, ξ₂)` pairing with `z` as `ξ₁ Re z + ξ₂ Im z`.
pub type Frequency = (f64, f64);

/// The 5×5 grid `{−2,−1,0,1,2}² · step`.
pub fn frequency_grid(step: f64) -> Vec<Frequency> {
    let axis = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| k * step);
    axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect()
}

/// Empirical characteristic function `(1/n) Σ exp(i⟨ξ, z_j⟩)` at each frequency.
pub fn empirical_cf(points: &[Complex64], freqs: &[Frequency]) -> Vec<Complex64> {
    let n = points.len() as f64;
    freqs
        .par_iter()
        .map(|&(a, b)| {
            let s: Complex64 = points
                .iter()
                .map(|z| Complex64::from_polar(1.0, a * z.re + b * z.im))
                .sum();
            s / n
        })
        .collect()
}

/// `max_ξ |φ_a(ξ) − φ_b(ξ)|` over the frequency grid.
pub fn ecf_distance(a: &[Complex64], b: &[Complex64], freqs: &[Frequency]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let (fa, fb) = (empirical_cf(a, freqs), empirical_cf(b, freqs));
    fa.iter().zip(&fb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `(1/(|a||b|)) Σ_{i,j} |a_i − b_j|`, accumulated row by row in a fixed order.
fn mean_pair_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let rows: Vec<f64> = a
        .par_iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).sum::<f64>())
        .collect();
    rows.iter().sum::<f64>() / (a.len() as f64 * b.len() as f64)
}

/// Energy distance `2E|X−Y| − E|X−X'| − E|Y−Y'|` (V-statistic) in the plane.
pub fn energy_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let d = 2.0 * mean_pair_distance(a, b) - mean_pair_distance(a, a) - mean_pair_distance(b, b);
    d.max(0.0)
}

/// Energy statistic with a general metric, for laws on a metric space.
pub fn metric_energy<T: Sync>(a: &[T], b: &[T], d: impl Fn(&T, &T) -> f64 + Sync) -> f64 {
    let mean = |x: &[T], y: &[T]| -> f64 {
        let rows: Vec<f64> = x.par_iter().map(|u| y.iter().map(|v| d(u, v)).sum::<f64>()).collect();
        rows.iter().sum::<f64>() / (x.len() as f64 * y.len() as f64)
    };
    2.0 * mean(a, b) - mean(a, a) - mean(b, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn point_masses() {
        let a = vec![c(0.4, 0.0); 10];
        let freqs = frequency_grid(1.0);
        assert_eq!(freqs.len(), 25);
        assert!(ecf_distance(&a, &a, &freqs) < 1e-15);
        assert!(energy_distance(&a, &a) < 1e-15);
        let b = vec![c(1.4, 0.0); 7];
        // Two point masses at distance 1: energy 2·1 − 0 − 0.
        assert!((energy_distance(&a, &b) - 2.0).abs() < 1e-14);
        // |e^{iξ} − 1| is maximal on the grid at ξ = 2: 2|sin 1|.
        assert!((ecf_distance(&a, &b, &freqs) - 2.0 * 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn symmetric_and_nonnegative() {
        let a: Vec<Complex64> = (0..50).map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let b: Vec<Complex64> = (0..40).map(|i| c((i as f64 * 0.29).cos(), (i as f64 * 0.53).sin())).collect();
        let freqs = frequency_grid(0.7);
        assert!((energy_distance(&a, &b) - energy_distance(&b, &a)).abs() < 1e-14);
        assert!(energy_distance(&a, &b) > 0.0);
        assert!((ecf_distance(&a, &b, &freqs) - ecf_distance(&b, &a, &freqs)).abs() < 1e-15);
        let e = metric_energy(&a, &b, |x, y| (x - y).norm());
        assert!((e - energy_distance(&a, &b)).abs() < 1e-13);
    }
}
