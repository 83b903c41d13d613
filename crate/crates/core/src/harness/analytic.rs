//! Sup-norms on compact rectangles of `Re s > 1/2`, the Fréchet metric of a
//! compact exhaustion, and the Cauchy-integral cross-check for sup-norms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_20;

/// `[σ_min, σ_max] × [t_min, t_max]` with a grid of `resolution` points per unit length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactRect {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
}

fn default_resolution() -> f64 {
    8.0
}

impl Default for CompactRect {
    /// `[0.75, 2] × [−2, 2]`.
    fn default() -> Self {
        Self {
            sigma_min: 0.75,
            sigma_max: 2.0,
            t_min: -2.0,
            t_max: 2.0,
            resolution: default_resolution(),
        }
    }
}

impl CompactRect {
    pub fn new(sigma_min: f64, sigma_max: f64, t_min: f64, t_max: f64) -> Result<Self> {
        let r = Self {
            sigma_min,
            sigma_max,
            t_min,
            t_max,
            resolution: default_resolution(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.sigma_min, self.sigma_max, self.t_min, self.t_max, self.resolution]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.sigma_min > 0.5) {
            return Err(Error::InvalidArgument(format!(
                "rectangle must lie strictly inside Re s > 1/2, got sigma_min = {}",
                self.sigma_min
            )));
        }
        if self.sigma_max < self.sigma_min || self.t_max < self.t_min || !(self.resolution > 0.0) {
            return Err(Error::InvalidArgument(format!("degenerate rectangle {self:?}")));
        }
        Ok(())
    }

    /// The rectangle grown by `delta` on every side.
    pub fn expanded(&self, delta: f64) -> Self {
        Self {
            sigma_min: self.sigma_min - delta,
            sigma_max: self.sigma_max + delta,
            t_min: self.t_min - delta,
            t_max: self.t_max + delta,
            resolution: self.resolution,
        }
    }

    /// Grid sizes along `σ` and `t` after `level` refinements; each refinement
    /// halves the spacing, so coarser grids are subgrids of finer ones.
    pub fn dims(&self, level: u32) -> (usize, usize) {
        let base = |len: f64| (len * self.resolution).ceil().max(1.0) as usize;
        let refine = |n: usize| n * (1 << level) + 1;
        (refine(base(self.sigma_max - self.sigma_min)), refine(base(self.t_max - self.t_min)))
    }

    /// Grid points, `σ`-major.
    pub fn grid(&self, level: u32) -> Vec<Complex64> {
        let (ns, nt) = self.dims(level);
        let coord = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        (0..ns)
            .flat_map(|i| {
                (0..nt).map(move |j| {
                    Complex64::new(
                        coord(self.sigma_min, self.sigma_max, ns, i),
                        coord(self.t_min, self.t_max, nt, j),
                    )
                })
            })
            .collect()
    }

    /// Max of `values` (on the grid at `fine`) restricted to the subgrid at `coarse`.
    pub fn subgrid_max(&self, values: &[f64], fine: u32, coarse: u32) -> f64 {
        assert!(coarse <= fine);
        let (ns, nt) = self.dims(fine);
        assert_eq!(values.len(), ns * nt);
        let stride = 1 << (fine - coarse);
        (0..ns)
            .step_by(stride)
            .flat_map(|i| (0..nt).step_by(stride).map(move |j| i * nt + j))
            .map(|k| values[k])
            .fold(0.0, f64::max)
    }

    fn contains(&self, s: Complex64) -> bool {
        s.re >= self.sigma_min && s.re <= self.sigma_max && s.im >= self.t_min && s.im <= self.t_max
    }
}

/// A grid sup-norm with its refinement history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupNorm {
    pub value: f64,
    /// Relative change at the last refinement.
    pub refinement_change: f64,
    pub level: u32,
    pub converged: bool,
}

const MAX_REFINEMENTS: u32 = 4;

/// `max |g|` over the grid of `rect`, refined until one doubling changes it by
/// less than `rel_tol`.
pub fn sup_norm_on_rect<G>(g: G, rect: &CompactRect, rel_tol: f64) -> Result<SupNorm>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    rect.validate()?;
    let eval = |level: u32| -> Result<f64> {
        let vals = rect
            .grid(level)
            .into_par_iter()
            .map(|s| g(s).map(|v| v.norm()))
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    };
    let mut prev = eval(0)?;
    let mut level = 0;
    loop {
        level += 1;
        let next = eval(level)?;
        let change = if next == 0.0 { 0.0 } else { (next - prev).abs() / next };
        if change < rel_tol || level >= MAX_REFINEMENTS {
            return Ok(SupNorm {
                value: next,
                refinement_change: change,
                level,
                converged: change < rel_tol,
            });
        }
        prev = next;
    }
}

/// Compact exhaustion `K_n = [1/2 + 1/(n+1), n] × [−n, n]` of `Re s > 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExhaustionSpec {
    pub resolution: f64,
}

impl Default for ExhaustionSpec {
    fn default() -> Self {
        Self { resolution: 4.0 }
    }
}

impl ExhaustionSpec {
    pub fn compact(&self, n: u32) -> CompactRect {
        assert!(n >= 1, "compacts are indexed from 1");
        let n_f = n as f64;
        CompactRect {
            sigma_min: 0.5 + 1.0 / (n_f + 1.0),
            sigma_max: n_f,
            t_min: -n_f,
            t_max: n_f,
            resolution: self.resolution,
        }
    }
}

/// `Σ_{n≤N} 2^{−n} p_n/(1+p_n)` with the bound `2^{−N}` on the omitted terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrechetDistance {
    pub value: f64,
    pub tail_bound: f64,
}

impl FrechetDistance {
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// Combines seminorms `p_1, …, p_N` into the Fréchet metric.
pub fn frechet_from_seminorms(seminorms: &[f64]) -> FrechetDistance {
    let value = seminorms
        .iter()
        .enumerate()
        .map(|(i, &p)| (0.5f64).powi(i as i32 + 1) * p / (1.0 + p))
        .sum();
    FrechetDistance {
        value,
        tail_bound: (0.5f64).powi(seminorms.len() as i32),
    }
}

/// `d(g1, g2)` with seminorms `sup_{K_n} |g1 − g2|` taken on the grids of the exhaustion.
pub fn frechet_distance<G1, G2>(g1: G1, g2: G2, exhaustion: &ExhaustionSpec, n_terms: u32) -> Result<FrechetDistance>
where
    G1: Fn(Complex64) -> Result<Complex64> + Sync,
    G2: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let seminorms = (1..=n_terms)
        .map(|n| {
            let vals = exhaustion
                .compact(n)
                .grid(0)
                .into_par_iter()
                .map(|s| Ok((g1(s)? - g2(s)?).norm()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(vals.into_iter().fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(frechet_from_seminorms(&seminorms))
}

/// Quadrature nodes `w_j` and weights `dw_j/(2πi)` on the counterclockwise
/// boundary of `ring`, with panels no longer than `panel`.
pub fn contour_nodes(ring: &CompactRect, panel: f64) -> Vec<(Complex64, Complex64)> {
    let gl = gauss_legendre_20();
    let corners = [
        Complex64::new(ring.sigma_min, ring.t_min),
        Complex64::new(ring.sigma_max, ring.t_min),
        Complex64::new(ring.sigma_max, ring.t_max),
        Complex64::new(ring.sigma_min, ring.t_max),
    ];
    let scale = Complex64::new(0.0, TAU).inv();
    let mut out = Vec::new();
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let panels = ((b - a).norm() / panel).ceil().max(1.0) as usize;
        let step = (b - a) / panels as f64;
        for p in 0..panels {
            let start = a + step * p as f64;
            for (&x, &w) in gl.nodes().iter().zip(gl.weights()) {
                let node = start + step * (0.5 * (x + 1.0));
                out.push((node, step * (0.5 * w) * scale));
            }
        }
    }
    out
}

/// `max_{z ∈ grid(K)} |g(z)|` with `g(z)` reconstructed by the Cauchy integral
/// over the boundary of `K′ = K + δ`, using only samples of `g` on that boundary.
pub fn cauchy_sup<G>(g: G, rect: &CompactRect, delta: f64, level: u32) -> Result<f64>
where
    G: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let ring = rect.expanded(delta);
    ring.validate()?;
    let nodes = contour_nodes(&ring, delta);
    let samples = nodes
        .par_iter()
        .map(|&(w, dw)| Ok((w, g(w)? * dw)))
        .collect::<Result<Vec<_>>>()?;
    let vals: Vec<f64> = rect
        .grid(level)
        .into_par_iter()
        .map(|z| {
            debug_assert!(rect.contains(z));
            samples.iter().map(|&(w, gw)| gw / (w - z)).sum::<Complex64>().norm()
        })
        .collect();
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_power_maps() {
        let rect = CompactRect::new(1.0, 2.0, 0.0, 1.0).unwrap();
        let one = sup_norm_on_rect(|_| Ok(Complex64::new(1.0, 0.0)), &rect, 0.01).unwrap();
        assert_eq!(one.value, 1.0);
        let pow = sup_norm_on_rect(|s| Ok((-s * 2f64.ln()).exp()), &rect, 0.01).unwrap();
        assert!((pow.value - 0.5).abs() < 1e-15);
        assert!(pow.converged);
        assert!(CompactRect::new(0.5, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn subgrids_nest() {
        let rect = CompactRect::default();
        let fine = rect.grid(2);
        let coarse = rect.grid(0);
        let (_, nt) = rect.dims(2);
        let (cs, ct) = rect.dims(0);
        for i in 0..cs {
            for j in 0..ct {
                let z = fine[4 * i * nt + 4 * j];
                assert!((z - coarse[i * ct + j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn frechet_axioms() {
        let ex = ExhaustionSpec::default();
        let g1 = |s: Complex64| Ok((-s * 3f64.ln()).exp());
        let g2 = |s: Complex64| Ok((-s * 2f64.ln()).exp() * 0.5);
        let same = frechet_distance(g1, g1, &ex, 4).unwrap();
        assert_eq!(same.value, 0.0);
        let d12 = frechet_distance(g1, g2, &ex, 4).unwrap();
        let d21 = frechet_distance(g2, g1, &ex, 4).unwrap();
        assert!((d12.value - d21.value).abs() < 1e-15);
        assert!(d12.value > 0.0 && d12.upper() <= 1.0);
        assert!(frechet_from_seminorms(&[1e300; 30]).upper() <= 1.0);
        let k1 = ex.compact(1);
        assert_eq!((k1.sigma_min, k1.sigma_max, k1.t_max), (1.0, 1.0, 1.0));
    }

    #[test]
    fn cauchy_reconstruction_matches_grid() {
        let rect = CompactRect::default();
        let g = |s: Complex64| Ok((-s * 3f64.ln()).exp() + 1.0 / (s - 0.3));
        let direct = sup_norm_on_rect(g, &rect, 0.01).unwrap();
        let ring = cauchy_sup(g, &rect, 0.125, direct.level).unwrap();
        assert!((ring - direct.value).abs() < 1e-10 * direct.value);
    }
}
