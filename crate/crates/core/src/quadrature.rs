//! Composite Gauss–Legendre quadrature with panel doubling.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f` with a single panel.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: &F, a: f64, b: f64) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * w;
        }
        acc * half
    }

    /// `∫_a^b f` over `panels` equal panels.
    pub fn integrate_panels<F: Fn(f64) -> Complex64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        panels: usize,
    ) -> Complex64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| self.integrate(f, a + i as f64 * h, a + (i + 1) as f64 * h))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The 20-point rule used throughout the crate.
pub fn gauss_legendre_20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

/// Panel-doubling policy: start at `initial_panels`, double until two
/// successive estimates differ by less than `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelRule {
    pub tolerance: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl PanelRule {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

impl Default for PanelRule {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            initial_panels: 4,
            max_panels: 1 << 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels: usize,
}

pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, rule: &PanelRule) -> Result<Quadrature> {
    try_integrate(|x| Ok(f(x)), a, b, rule)
}

/// As [`integrate`], for integrands whose evaluation can fail.
pub fn try_integrate<F: Fn(f64) -> Result<Complex64>>(
    f: F,
    a: f64,
    b: f64,
    rule: &PanelRule,
) -> Result<Quadrature> {
    let gl = gauss_legendre_20();
    let panel_sum = |panels: usize| -> Result<Complex64> {
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..panels {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (&x, &w) in gl.nodes().iter().zip(gl.weights()) {
                acc += f(mid + half * x)? * (w * half);
            }
        }
        Ok(acc)
    };
    let mut panels = rule.initial_panels.max(1);
    let mut prev = panel_sum(panels)?;
    loop {
        panels *= 2;
        let next = panel_sum(panels)?;
        let err = (next - prev).norm();
        if err < rule.tolerance {
            return Ok(Quadrature {
                value: next,
                error_estimate: err,
                panels,
            });
        }
        if panels >= rule.max_panels {
            return Err(Error::QuadratureNotConverged {
                estimate: err,
                target: rule.tolerance,
            });
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(20);
        let sum: f64 = gl.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        for deg in 0..40u32 {
            let got = gl.integrate(&|x: f64| Complex64::new(x.powi(deg as i32), 0.0), -1.0, 1.0);
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got.re - exact).abs() < 1e-14, "deg={deg}");
        }
    }

    #[test]
    fn odd_order_rule() {
        let gl = GaussLegendre::new(7);
        let got = gl.integrate(&|x: f64| Complex64::new(x.powi(12), 0.0), 0.0, 1.0);
        assert!((got.re - 1.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_integral() {
        let q = integrate(
            |x| Complex64::new(0.0, -40.0 * x).exp(),
            0.0,
            1.0,
            &PanelRule::default(),
        )
        .unwrap();
        let exact = (Complex64::new(0.0, -40.0).exp() - 1.0) / Complex64::new(0.0, -40.0);
        assert!((q.value - exact).norm() < 1e-12);
    }
}
