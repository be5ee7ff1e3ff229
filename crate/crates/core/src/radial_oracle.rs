//! Physical-space evaluation of the `d = 3` damped wave flow,
//! `φ(t) = J₀(t)g + e^{−t/2}W(t)g`, with
//!
//! ```text
//! W(t)g(x)  = t/(4π) ∫_{S²} g(x + tω) dω
//! J₀(t)g(x) = e^{−t/2}/(8π) ∫₀^t ∫_{S²} I₁(½√(t²−r²)) g(x+rω) r² / √(t²−r²) dω dr
//! ```
//!
//! plus the data family showing that `‖𝒟(t)g‖_{L²_t L^∞_x} ≲ ‖g‖_{L²}` fails.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::propagator::{apply_propagator, PropagatorKind};
use crate::spectral::{Field, Grid};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("positive order"));
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.as_node_weight_pairs().iter().map(|&(x, w)| (c + h * x, h * w)).collect()
}

/// `Σ_m (z/2)^{2m} / (m!(m+1)!)`, the series as printed (no leading `z/2`).
pub fn bessel_i1_printed(z: f64) -> f64 {
    assert!(z >= 0.0, "I1 argument must be non-negative");
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        term *= q / ((m + 1.0) * (m + 2.0));
        m += 1.0;
        if term < 1e-16 * sum {
            break;
        }
        sum += term;
    }
    sum
}

/// The modified Bessel function `I₁(z) = (z/2) Σ_m (z/2)^{2m} / (m!(m+1)!)`.
pub fn bessel_i1(z: f64) -> f64 {
    0.5 * z * bessel_i1_printed(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum I1Normalization {
    /// With the leading `z/2`.
    Standard,
    /// Series exactly as printed, `I₁(0) = 1`.
    Printed,
}

impl I1Normalization {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            I1Normalization::Standard => bessel_i1(z),
            I1Normalization::Printed => bessel_i1_printed(z),
        }
    }
}

/// Product rule on `S²`: Gauss–Legendre in `u = ω·e₁` times the trapezoid
/// rule in the azimuth. Weights sum to `4π` for the full-range rule.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRule {
    polar: Vec<(f64, f64)>,
    n_phi: usize,
}

impl SphereRule {
    pub fn new(n_theta: usize, n_phi: usize) -> SphereRule {
        SphereRule { polar: gauss_legendre(n_theta, -1.0, 1.0), n_phi }
    }

    /// Only `u ∈ [c, 1]`, split into panels geometric in `1 + u`, for
    /// integrands that vanish below `c` and behave like `1/(1+u)` above it.
    pub fn graded(c: f64, per_panel: usize, n_phi: usize) -> SphereRule {
        let c = c.max(-1.0);
        let mut polar = Vec::new();
        if c >= 1.0 {
            return SphereRule { polar, n_phi };
        }
        let mut lo = 1.0 + c;
        if lo <= 0.0 {
            lo = 1e-300;
        }
        let mut edges = vec![lo];
        while edges.last().unwrap() * 2.0 < 2.0 {
            edges.push(edges.last().unwrap() * 2.0);
        }
        edges.push(2.0);
        for w in edges.windows(2) {
            if w[1] > w[0] {
                polar.extend(gauss_legendre(per_panel, w[0] - 1.0, w[1] - 1.0));
            }
        }
        SphereRule { polar, n_phi }
    }

    /// `∫_{S²} f(ω) dω`.
    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        let dphi = 2.0 * PI / self.n_phi as f64;
        let mut s = 0.0;
        for &(u, wu) in &self.polar {
            let sin = (1.0 - u * u).max(0.0).sqrt();
            let mut row = 0.0;
            for k in 0..self.n_phi {
                let (sp, cp) = (k as f64 * dphi).sin_cos();
                row += f([u, sin * cp, sin * sp]);
            }
            s += wu * row * dphi;
        }
        s
    }
}

impl Default for SphereRule {
    fn default() -> SphereRule {
        SphereRule::new(32, 64)
    }
}

fn shift(x: [f64; 3], r: f64, w: [f64; 3]) -> [f64; 3] {
    [x[0] + r * w[0], x[1] + r * w[1], x[2] + r * w[2]]
}

/// `W(t)g(x)`.
pub fn spherical_mean_w(g: &(dyn Fn([f64; 3]) -> f64 + Sync), t: f64, x: [f64; 3], rule: &SphereRule) -> f64 {
    t / (4.0 * PI) * rule.integrate(|w| g(shift(x, t, w)))
}

/// Quadrature orders for [`volume_term`].
#[derive(Clone, Debug, PartialEq)]
pub struct J0Rule {
    pub sphere: SphereRule,
    /// Gauss–Legendre nodes in `θ ∈ [0, π/2]` after `r = t sin θ`.
    pub radial: usize,
}

impl Default for J0Rule {
    fn default() -> J0Rule {
        J0Rule { sphere: SphereRule::default(), radial: 48 }
    }
}

/// `J₀(t)g(x)`. With `r = t sin θ` the weight `dr/√(t²−r²)` becomes `dθ`.
pub fn volume_term(
    g: &(dyn Fn([f64; 3]) -> f64 + Sync),
    t: f64,
    x: [f64; 3],
    rule: &J0Rule,
    norm: I1Normalization,
) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let nodes = gauss_legendre(rule.radial, 0.0, 0.5 * PI);
    let s: f64 = nodes
        .iter()
        .map(|&(th, w)| {
            let (sn, cs) = th.sin_cos();
            let r = t * sn;
            let shell = rule.sphere.integrate(|om| g(shift(x, r, om)));
            w * norm.eval(0.5 * t * cs) * r * r * shell
        })
        .sum();
    (-0.5 * t).exp() / (8.0 * PI) * s
}

/// `J₀(t)g(x) + e^{−t/2}W(t)g(x)`.
pub fn physical_solution(
    g: &(dyn Fn([f64; 3]) -> f64 + Sync),
    t: f64,
    x: [f64; 3],
    rule: &J0Rule,
    norm: I1Normalization,
) -> f64 {
    volume_term(g, t, x, rule, norm) + (-0.5 * t).exp() * spherical_mean_w(g, t, x, &rule.sphere)
}

/// Radial profile sampled at Gauss–Legendre nodes on `[0, R]` with cubic
/// Lagrange interpolation; zero at and beyond `R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r_max: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn from_fn(f: impl Fn(f64) -> f64, r_max: f64, n: usize) -> Result<RadialProfile> {
        if !(r_max > 0.0) || n < 4 {
            return Err(Error::Domain("radial profile needs R > 0 and at least 4 nodes".into()));
        }
        let nodes: Vec<f64> = gauss_legendre(n, 0.0, r_max).into_iter().map(|p| p.0).collect();
        let values = nodes.iter().map(|&r| f(r)).collect();
        Ok(RadialProfile { r_max, nodes, values })
    }

    /// `e^{−r²/(2σ²)}` scaled to unit `L²(ℝ³)` norm, truncated where it
    /// drops below `1e−16`.
    pub fn gaussian(sigma: f64, n: usize) -> Result<RadialProfile> {
        let amp = (PI * sigma * sigma).powf(-0.75);
        let r_max = sigma * (2.0 * 16.0 * 10f64.ln()).sqrt();
        RadialProfile::from_fn(|r| amp * (-0.5 * r * r / (sigma * sigma)).exp(), r_max, n)
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.r_max {
            return 0.0;
        }
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&x| x < r);
        let start = i.saturating_sub(2).min(n - 4);
        let xs = &self.nodes[start..start + 4];
        let ys = &self.values[start..start + 4];
        let mut s = 0.0;
        for a in 0..4 {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (r - xs[b]) / (xs[a] - xs[b]);
                }
            }
            s += ys[a] * l;
        }
        s
    }

    pub fn eval3(&self, x: [f64; 3]) -> f64 {
        self.eval((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckEntry {
    pub t: f64,
    pub x: [f64; 3],
    pub spectral: f64,
    pub standard: f64,
    pub printed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub entries: Vec<CrossCheckEntry>,
    pub max_dev_standard: f64,
    pub max_dev_printed: f64,
    /// The normalization whose quadrature matches the spectral propagator.
    pub selected: I1Normalization,
    pub max_rel_dev: f64,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Compares the quadrature `J₀ + e^{−t/2}W` with the spectral `𝒟(t)g` on a
/// `d = 3` grid, evaluated at `x_list` by direct Fourier summation.
pub fn cross_check_d3(
    g: &RadialProfile,
    grid: Grid,
    t_list: &[f64],
    x_list: &[[f64; 3]],
    rule: &J0Rule,
) -> Result<CrossCheckReport> {
    if grid.d != 3 {
        return Err(Error::Domain("cross check needs a d = 3 grid".into()));
    }
    let half = 0.5 * grid.box_length;
    for &t in t_list {
        if t < 0.0 {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        for x in x_list {
            let xr = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if g.r_max + t + xr > half {
                return Err(Error::Guard(format!(
                    "support R = {} plus cone t = {t} at |x| = {xr} leaves the box half-width {half}",
                    g.r_max
                )));
            }
        }
    }
    let data = Field::from_fn(grid, |x| num_complex::Complex64::new(g.eval3([x[0], x[1], x[2]]), 0.0));
    let gf = |x: [f64; 3]| g.eval3(x);
    let mut entries = Vec::new();
    for &t in t_list {
        let evolved = apply_propagator(PropagatorKind::D, t, &data)?.into_frequency();
        let rows: Vec<CrossCheckEntry> = x_list
            .par_iter()
            .map(|x| CrossCheckEntry {
                t,
                x: *x,
                spectral: evolved.evaluate_at(x).re,
                standard: physical_solution(&gf, t, *x, rule, I1Normalization::Standard),
                printed: physical_solution(&gf, t, *x, rule, I1Normalization::Printed),
            })
            .collect();
        entries.extend(rows);
    }
    let dev = |f: fn(&CrossCheckEntry) -> f64| {
        entries.iter().map(|e| rel_dev(f(e), e.spectral)).fold(0.0, f64::max)
    };
    let max_dev_standard = dev(|e| e.standard);
    let max_dev_printed = dev(|e| e.printed);
    let (selected, max_rel_dev) = if max_dev_standard <= max_dev_printed {
        (I1Normalization::Standard, max_dev_standard)
    } else {
        (I1Normalization::Printed, max_dev_printed)
    };
    Ok(CrossCheckReport { entries, max_dev_standard, max_dev_printed, selected, max_rel_dev })
}

/// Smooth non-negative bump `φ` supported on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
}

impl Default for Bump {
    fn default() -> Bump {
        Bump { lo: 1.0, hi: 2.0 }
    }
}

impl Bump {
    pub fn phi(&self, t: f64) -> f64 {
        if t <= self.lo || t >= self.hi {
            return 0.0;
        }
        let w = self.hi - self.lo;
        let a = (t - self.lo) / w;
        let b = (self.hi - t) / w;
        // normalised to 1 at the midpoint
        (4.0 - 1.0 / a - 1.0 / b).exp()
    }

    /// `φ̃(t) = e^{−t/2}φ(t)`.
    pub fn phi_tilde(&self, t: f64) -> f64 {
        (-0.5 * t).exp() * self.phi(t)
    }
}

/// The truncated and normalized data `g_η = ψ·1{z₁ > η} / ‖ψ·1{z₁ > η}‖₂`
/// with `ψ(z) = φ̃(|z|²/(2z₁)) / z₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleData {
    pub eta: f64,
    pub bump: Bump,
    /// Support radius; `|z| ≤ 2·hi` on the support of `ψ`.
    pub r_bump: f64,
    /// `‖ψ·1{z₁ > η}‖₂²`.
    pub norm_sq: f64,
}

const LAMBDA_NODES: usize = 96;

impl CounterexampleData {
    pub fn new(eta: f64, bump: Bump) -> Result<CounterexampleData> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Domain(format!("η = {eta} outside (0, 1)")));
        }
        if !(bump.lo > 0.0 && bump.hi > bump.lo) {
            return Err(Error::Domain("bump support must be an interval in (0, ∞)".into()));
        }
        // polar coordinates around z = y + (|y|, 0, 0): the angular integral of
        // sinθ/(1+cosθ) over λ(1+cosθ) > η is log(2λ/η)
        let lo = bump.lo.max(0.5 * eta);
        let norm_sq = 2.0
            * PI
            * gauss_legendre(LAMBDA_NODES, lo, bump.hi)
                .into_iter()
                .map(|(l, w)| w * bump.phi_tilde(l).powi(2) * (2.0 * l / eta).ln().max(0.0))
                .sum::<f64>();
        Ok(CounterexampleData { eta, bump, r_bump: 2.0 * bump.hi, norm_sq })
    }

    /// `g_η(z)` (unit `L²` norm).
    pub fn value(&self, z: [f64; 3]) -> f64 {
        if z[0] <= self.eta {
            return 0.0;
        }
        let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        if r2 > self.r_bump * self.r_bump {
            return 0.0;
        }
        self.bump.phi_tilde(r2 / (2.0 * z[0])) / z[0] / self.norm_sq.sqrt()
    }

    /// `e^{−t/2}W(t)g_η` at the cone point `(t, 0, 0)`, with the sphere rule
    /// graded at the truncation `ω₁ = η/t − 1`.
    pub fn cone_w(&self, t: f64, per_panel: usize, n_phi: usize) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let rule = SphereRule::graded(self.eta / t - 1.0, per_panel, n_phi);
        let g = |z: [f64; 3]| self.value(z);
        (-0.5 * t).exp() * spherical_mean_w(&g, t, [t, 0.0, 0.0], &rule)
    }

    /// `J_W(η) = ∫ |e^{−t/2}W(t)g_η(t,0,0)|² dt` over the bump support.
    pub fn j_w(&self) -> f64 {
        gauss_legendre(64, self.bump.lo, self.bump.hi)
            .into_iter()
            .map(|(t, w)| w * self.cone_w(t, 12, 8).powi(2))
            .sum()
    }

    /// `∫ |φ(t,t,0,0)|² dt` including the `J₀` volume term.
    pub fn j_full(&self, rule: &J0Rule) -> f64 {
        let g = |z: [f64; 3]| self.value(z);
        gauss_legendre(32, self.bump.lo, self.bump.hi)
            .into_iter()
            .map(|(t, w)| {
                let j0 = volume_term(&g, t, [t, 0.0, 0.0], rule, I1Normalization::Standard);
                w * (j0 + self.cone_w(t, 12, 8)).powi(2)
            })
            .sum()
    }
}

/// Builds `g_η` and returns it with `J_W(η)`.
pub fn counterexample_family(eta: f64, bump: Bump) -> Result<(CounterexampleData, f64)> {
    let data = CounterexampleData::new(eta, bump)?;
    let j = data.j_w();
    Ok((data, j))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointFailureReport {
    pub eta: Vec<f64>,
    pub j_w: Vec<f64>,
    /// Fit of `J_W` against `log(1/η)`.
    pub fit_slope: f64,
    pub r2: f64,
    pub strictly_increasing: bool,
    /// `sup_t ‖𝒟(t)g_η‖₂ / ‖g_η‖₂` on a grid, per `η`.
    pub contrast: Vec<f64>,
    pub contrast_slope: f64,
}

/// `sup_t ‖𝒟(t)g‖_{L²} / ‖g‖_{L²}` over `t ∈ times` for grid samples of `g_η`.
pub fn energy_ratio(data: &CounterexampleData, grid: Grid, times: &[f64]) -> Result<f64> {
    if grid.d != 3 {
        return Err(Error::Domain("energy ratio needs a d = 3 grid".into()));
    }
    let f = Field::from_fn(grid, |x| num_complex::Complex64::new(data.value([x[0], x[1], x[2]]), 0.0));
    let base = f.l2_norm();
    if base == 0.0 {
        return Err(Error::Unresolvable("g_η vanishes at every grid point".into()));
    }
    let fs = f.to_frequency();
    let mut best: f64 = 0.0;
    for &t in times {
        best = best.max(apply_propagator(PropagatorKind::D, t, &fs)?.l2_norm() / base);
    }
    Ok(best)
}

/// `J_W(2^{−k})` for the given `k`, the log-fit, and the energy-ratio contrast.
pub fn endpoint_failure(ks: &[u32], bump: Bump, contrast_grid: Grid) -> Result<EndpointFailureReport> {
    if ks.len() < 2 {
        return Err(Error::Domain("need at least two η values".into()));
    }
    let eta: Vec<f64> = ks.iter().map(|&k| 2f64.powi(-(k as i32))).collect();
    let rows: Vec<Result<(f64, f64)>> = eta
        .par_iter()
        .map(|&e| {
            let (data, j) = counterexample_family(e, bump)?;
            let times: Vec<f64> = (1..=16).map(|i| 0.25 * i as f64).collect();
            Ok((j, energy_ratio(&data, contrast_grid, &times)?))
        })
        .collect();
    let mut j_w = Vec::new();
    let mut contrast = Vec::new();
    for r in rows {
        let (a, b) = r?;
        j_w.push(a);
        contrast.push(b);
    }
    let x: Vec<f64> = eta.iter().map(|e| (1.0 / e).ln()).collect();
    let fit = fit_line(&x, &j_w);
    let cfit = fit_line(&x, &contrast);
    Ok(EndpointFailureReport {
        strictly_increasing: j_w.windows(2).all(|w| w[1] > w[0]),
        eta,
        j_w,
        fit_slope: fit.slope,
        r2: fit.r2,
        contrast,
        contrast_slope: cfit.slope,
    })
}
