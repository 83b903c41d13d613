//! Smooth bump test functions and their Fourier values at `log n / 2π`.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, PanelRule};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// `f(x) = A·exp(−1/(1−((x−c)/w)²))` on `|x−c| < w`, zero elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl Default for TestFunction {
    fn default() -> Self {
        Self {
            center: 0.0,
            half_width: 1.0,
            amplitude: 1.0,
        }
    }
}

fn bump_profile(u: f64) -> f64 {
    let d = 1.0 - u * u;
    if d <= 0.0 {
        0.0
    } else {
        (-1.0 / d).exp()
    }
}

fn bump_second_derivative(u: f64) -> f64 {
    let d = 1.0 - u * u;
    if d <= 0.0 {
        0.0
    } else {
        bump_profile(u) * (6.0 * u.powi(4) - 2.0) / d.powi(4)
    }
}

impl TestFunction {
    pub fn bump(center: f64, half_width: f64, amplitude: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if !(center.is_finite() && amplitude.is_finite()) {
            return Err(Error::InvalidArgument("non-finite bump parameter".into()));
        }
        Ok(Self {
            center,
            half_width,
            amplitude,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitude: self.amplitude * factor,
            ..*self
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * bump_profile((x - self.center) / self.half_width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// `∫ g` over the support, split at `breaks` where `g` has kinks.
    fn integrate_real(&self, g: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
        let (a, b) = self.support();
        let mut points = vec![a];
        points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        points.push(b);
        points
            .windows(2)
            .map(|w| {
                integrate(|x| Complex64::new(g(x), 0.0), w[0], w[1], &PanelRule::with_tolerance(1e-12))
                    .expect("smooth integrand on a bounded interval")
                    .value
                    .re
            })
            .sum()
    }

    /// `∫ |f|`.
    pub fn l1_norm(&self) -> f64 {
        self.integrate_real(|x| self.eval(x).abs(), &[])
    }

    /// `∫ |f|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.integrate_real(|x| self.eval(x).powi(2), &[])
    }

    /// `∫ |x·f(x)|`.
    pub fn first_moment_abs(&self) -> f64 {
        self.integrate_real(|x| (x * self.eval(x)).abs(), &[0.0])
    }

    /// `∫ |f''|`.
    pub fn second_derivative_l1(&self) -> f64 {
        let w = self.half_width;
        let u0 = (1.0f64 / 3.0).powf(0.25);
        let breaks = [self.center - u0 * w, self.center + u0 * w];
        self.amplitude.abs() / (w * w)
            * self.integrate_real(|x| bump_second_derivative((x - self.center) / w).abs(), &breaks)
    }

    fn panel_rule(&self, k: f64, tol: f64) -> PanelRule {
        let cycles = (2.0 * self.half_width * k.abs()).ceil() as usize;
        PanelRule {
            tolerance: tol,
            initial_panels: cycles.max(4),
            ..PanelRule::default()
        }
    }

    /// `f̂(k) = ∫ f(x) e^{−2πixk} dx`.
    pub fn fourier(&self, k: f64, tol: f64) -> Result<Complex64> {
        if self.amplitude == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (a, b) = self.support();
        integrate(
            |x| Complex64::from_polar(self.eval(x), -TAU * x * k),
            a,
            b,
            &self.panel_rule(k, tol),
        )
        .map(|q| q.value)
    }

    /// `d/dk f̂(k) = ∫ (−2πix) f(x) e^{−2πixk} dx`.
    pub fn fourier_derivative(&self, k: f64, tol: f64) -> Result<Complex64> {
        if self.amplitude == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (a, b) = self.support();
        integrate(
            |x| Complex64::new(0.0, -TAU * x) * Complex64::from_polar(self.eval(x), -TAU * x * k),
            a,
            b,
            &self.panel_rule(k, tol),
        )
        .map(|q| q.value)
    }
}

pub fn fourier_at(f: &TestFunction, k: f64) -> Result<Complex64> {
    f.fourier(k, DEFAULT_TOLERANCE)
}

/// Tabulated `f̂(log n / 2π)` for `n = 1..=n_max`.
#[derive(Debug)]
pub struct FourierCache {
    function: TestFunction,
    tolerance: f64,
    values: Vec<Complex64>,
    tail: OnceLock<TailProfile>,
}

impl FourierCache {
    pub fn test_function(&self) -> &TestFunction {
        &self.function
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn n_max(&self) -> u64 {
        self.values.len() as u64
    }

    /// `f̂(log n / 2π)`; panics outside `1..=n_max`.
    pub fn get(&self, n: u64) -> Complex64 {
        self.values[(n - 1) as usize]
    }

    pub fn try_get(&self, n: u64) -> Result<Complex64> {
        if n == 0 || n > self.n_max() {
            return Err(Error::CacheTooShort {
                needed: n,
                available: self.n_max(),
            });
        }
        Ok(self.get(n))
    }

    /// Cached value, or a fresh evaluation at the cache tolerance beyond it.
    pub fn get_or_compute(&self, n: u64) -> Result<Complex64> {
        match self.try_get(n) {
            Ok(v) => Ok(v),
            Err(_) => self.function.fourier(log_frequency(n), self.tolerance),
        }
    }

    /// Entries for `n = 1..=n_max`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn tail_profile(&self) -> &TailProfile {
        self.tail.get_or_init(|| TailProfile::new(&self.function, self.tolerance))
    }
}

/// `log n / 2π`.
pub fn log_frequency(n: u64) -> f64 {
    (n as f64).ln() / TAU
}

pub fn build_cache(f: &TestFunction, n_max: u64, tol: f64) -> Result<FourierCache> {
    assert!(n_max >= 1, "build_cache: n_max must be at least 1");
    let values = (1..=n_max)
        .into_par_iter()
        .map(|n| f.fourier(log_frequency(n), tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(FourierCache {
        function: *f,
        tolerance: tol,
        values,
        tail: OnceLock::new(),
    })
}

/// `max_{n_min ≤ n ≤ n_max} |f̂(log n/2π)|·(log n)^k`.
pub fn verify_decay(f: &TestFunction, k_order: u32, n_min: u64, n_max: u64) -> Result<f64> {
    assert!(n_min >= 1 && n_min < n_max);
    let best = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let v = f.fourier(log_frequency(n), DEFAULT_TOLERANCE)?;
            Ok(v.norm() * (n as f64).ln().powi(k_order as i32))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(best.into_iter().fold(0.0, f64::max))
}

/// Tail envelopes for `b(y) = e^{−y/2} f̂(y/2π)` used by the truncation bounds.
///
/// On a grid of `y` the profile stores the total variation of `b` beyond each
/// node and the supremum of `|f̂|²` beyond each node; past the grid both are
/// closed by analytic bounds in `‖f‖₁`, `‖xf‖₁` and `‖f''‖₁`.
#[derive(Clone, Debug)]
pub struct TailProfile {
    step: f64,
    y_max: f64,
    variation_beyond: Vec<f64>,
    sup_sq_beyond: Vec<f64>,
    far_sup_sq: f64,
}

impl TailProfile {
    const STEP: f64 = 1.0 / 64.0;
    const Y_MAX: f64 = 64.0;

    fn new(f: &TestFunction, tol: f64) -> Self {
        let h = Self::STEP;
        let count = (Self::Y_MAX / h) as usize + 1;
        let samples: Vec<(f64, f64)> = (0..count)
            .into_par_iter()
            .map(|i| {
                let y = i as f64 * h;
                let k = y / TAU;
                let v = f.fourier(k, tol).expect("bump transform converges");
                let d = f.fourier_derivative(k, tol).expect("bump transform converges");
                let slope = (-0.5 * y).exp() * (d / TAU - v * 0.5).norm();
                (v.norm(), slope)
            })
            .collect();

        let l1 = f.l1_norm();
        let m1 = f.first_moment_abs();
        let far_variation = 2.0 * (-0.5 * Self::Y_MAX).exp() * (0.5 * l1 + m1);
        let k_far = Self::Y_MAX / TAU;
        let far_sup = f.second_derivative_l1() / (TAU * k_far).powi(2);
        let far_sup_sq = far_sup.min(l1).powi(2);

        let mut variation_beyond = vec![0.0; count];
        let mut sup_sq_beyond = vec![0.0; count];
        let mut tv = far_variation;
        let mut sup = far_sup_sq.sqrt();
        // Local slack between nodes: |f̂'| ≤ 2π‖xf‖₁.
        let slack = h * m1;
        for i in (0..count).rev() {
            if i + 1 < count {
                tv += 0.5 * h * (samples[i].1 + samples[i + 1].1);
            }
            sup = sup.max(samples[i].0 + slack);
            variation_beyond[i] = tv;
            sup_sq_beyond[i] = sup.min(l1).powi(2);
        }
        Self {
            step: h,
            y_max: Self::Y_MAX,
            variation_beyond,
            sup_sq_beyond,
            far_sup_sq,
        }
    }

    fn node_below(&self, y: f64) -> Option<usize> {
        if y >= self.y_max {
            return None;
        }
        Some((y.max(0.0) / self.step).floor() as usize)
    }

    /// Total variation of `n ↦ n^{−1/2} f̂(log n/2π)` over `n > x`.
    pub fn variation_beyond(&self, x: f64) -> f64 {
        let y = x.max(1.0).ln();
        match self.node_below(y) {
            Some(i) => self.variation_beyond[i],
            None => self.variation_beyond[self.variation_beyond.len() - 1],
        }
    }

    /// `|n^{−1/2} f̂(log n/2π)|` bound for `n > x`.
    pub fn coefficient_beyond(&self, x: f64) -> f64 {
        x.max(1.0).sqrt().recip() * self.sup_sq_beyond(x).sqrt()
    }

    /// `sup_{n > x} |f̂(log n/2π)|²`.
    pub fn sup_sq_beyond(&self, x: f64) -> f64 {
        let y = x.max(1.0).ln();
        match self.node_below(y) {
            Some(i) => self.sup_sq_beyond[i],
            None => self.far_sup_sq,
        }
    }
}

/// `∫_{−∞}^{∞} |f̂(k)|² dk` on a truncated frequency window.
pub fn transform_energy(f: &TestFunction, k_max: f64, tol: f64) -> Result<f64> {
    let rule = PanelRule {
        tolerance: tol,
        initial_panels: (4.0 * k_max).ceil() as usize,
        max_panels: 1 << 12,
    };
    let q = integrate(
        |k| {
            let v = f.fourier(k, tol * 1e-2).expect("bump transform converges");
            Complex64::new(v.norm_sqr(), 0.0)
        },
        -k_max,
        k_max,
        &rule,
    )?;
    Ok(q.value.re)
}
