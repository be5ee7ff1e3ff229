//! Paraproduct splitting `fg = G₁(f, g) + G₂(f, g)` and ratio probes for the
//! Besov paraproduct estimates.
//!
//! ```text
//! G₁(f,g) = Δ_{≤0}((Δ_{≤3}f) g) + Σ_{j≥1} Δ_j((Δ_{≤j+3}f) g)
//! G₂(f,g) = Δ_{≤0}((Δ_{>3}f)(Δ_{>1}g)) + Σ_{j≥1} Δ_j((Δ_{>j+3}f)(Δ_{>j+1}g))
//! ```
//!
//! Every product is dealiased, so the splitting is exact on the lattice.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_loglog;
use crate::lp_besov::{besov_norm, chi, nyquist_index, BesovSpec, LpVariant};
use crate::rational::Rational;
use crate::spectral::{dilate, lebesgue_norm, product, random_field, Field, Grid, Rep, Spectrum};

/// Zero-padding factor for quadratic products.
pub const PAD: usize = 2;

/// Default ensemble seed.
pub const DEFAULT_SEED: u64 = 0xD15_9E25;

fn filtered(spec: &Field, norms: &[f64], v: Option<LpVariant>) -> Field {
    let mut g = spec.clone();
    if let Some(v) = v {
        for (x, &r) in g.values.iter_mut().zip(norms) {
            *x *= v.symbol(r);
        }
    }
    g
}

fn outer_symbol(j: i32, rho: f64) -> f64 {
    if j == 0 {
        chi(rho)
    } else {
        LpVariant::Eq(j).symbol(rho)
    }
}

/// `Σ_{j=j_lo}^{j_max} Δ̃_j((A_j f)(B_j g))` with `Δ̃_0 = Δ_{≤0}`; returned
/// in physical representation.
fn dyadic_sum(
    f: &Field,
    g: &Field,
    j_lo: i32,
    j_max: i32,
    fa: impl Fn(i32) -> Option<LpVariant>,
    gb: impl Fn(i32) -> Option<LpVariant>,
) -> Result<Field> {
    if !f.grid.same_as(&g.grid) {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid;
    let norms = grid.freq_norms();
    let fs = f.to_frequency();
    let gs = g.to_frequency();
    let mut acc = Field::zeros(grid, Rep::Frequency);
    for j in j_lo..=j_max {
        let a = filtered(&fs, &norms, fa(j));
        let b = filtered(&gs, &norms, gb(j));
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let ab = product(&a, &b, PAD)?.into_frequency();
        for ((x, y), &r) in acc.values.iter_mut().zip(&ab.values).zip(&norms) {
            *x += outer_symbol(j, r) * y;
        }
    }
    Ok(acc.into_physical())
}

fn resolve_j_max(grid: &Grid, j_max: Option<i32>) -> Result<i32> {
    let top = nyquist_index(grid);
    match j_max {
        None => Ok(top),
        Some(j) if j < top => Err(Error::Domain(format!(
            "j_max = {j} would drop lattice modes (need {top})"
        ))),
        Some(j) => Ok(j),
    }
}

/// Low–high part `G₁(f, g)`. `j_max` defaults to the grid's dyadic index.
pub fn g1(f: &Field, g: &Field, j_max: Option<i32>) -> Result<Field> {
    let jm = resolve_j_max(&f.grid, j_max)?;
    dyadic_sum(f, g, 0, jm, |j| Some(LpVariant::Leq(j + 3)), |_| None)
}

/// High–high part `G₂(f, g)`.
pub fn g2(f: &Field, g: &Field, j_max: Option<i32>) -> Result<Field> {
    let jm = resolve_j_max(&f.grid, j_max)?;
    dyadic_sum(
        f,
        g,
        0,
        jm,
        |j| Some(LpVariant::Gt(j + 3)),
        |j| Some(LpVariant::Gt(j + 1)),
    )
}

/// The single `G₂` summand `Δ̃_j((Δ_{>j+3}f)(Δ_{>j+1}g))`.
pub fn g2_term(f: &Field, g: &Field, j: i32) -> Result<Field> {
    if j < 0 {
        return Err(Error::Domain("summand index must be non-negative".into()));
    }
    dyadic_sum(f, g, j, j, |j| Some(LpVariant::Gt(j + 3)), |j| Some(LpVariant::Gt(j + 1)))
}

/// `(G₁₁, G₁₂)` with
/// `G₁₁ = Δ_{≤0}((Δ_{≤3}w)h) + Σ_{j≥1} Δ_j((Δ_{≤j+3}w)(Δ_{≥j−3}h))` and
/// `G₁₂ = Σ_{j≥1} Δ_j((Δ_{j−2≤·≤j+3}w)(Δ_{<j−3}h))`.
pub fn g1_split(w: &Field, h: &Field, j_max: Option<i32>) -> Result<(Field, Field)> {
    let jm = resolve_j_max(&w.grid, j_max)?;
    let low = dyadic_sum(w, h, 0, 0, |_| Some(LpVariant::Leq(3)), |_| None)?;
    let g11 = dyadic_sum(
        w,
        h,
        1,
        jm,
        |j| Some(LpVariant::Leq(j + 3)),
        |j| Some(LpVariant::Geq(j - 3)),
    )?
    .add(&low)?;
    let g12 = dyadic_sum(
        w,
        h,
        1,
        jm,
        |j| Some(LpVariant::Range(j - 2, j + 3)),
        |j| Some(LpVariant::Lt(j - 3)),
    )?;
    Ok((g11, g12))
}

/// `‖fg − G₁ − G₂‖₂ / ‖fg‖₂` with the dealiased product; 0 when `fg = 0`.
pub fn identity_residual(f: &Field, g: &Field) -> Result<f64> {
    let fg = product(f, g, PAD)?;
    let sum = g1(f, g, None)?.add(&g2(f, g, None)?)?;
    let base = fg.l2_norm();
    let diff = fg.sub(&sum)?.l2_norm();
    Ok(if base > 0.0 { diff / base } else { diff })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateId {
    /// `‖G₁(f,g)‖_{B^{−s}_{p,2}} ≲ ‖f‖_{B^{−s}_{p₁,2}} ‖g‖_{L^{p₂}}`
    G1Est,
    /// `‖G₂(f,g)‖_{B^{−s}_{p,2}} ≲ ‖f‖_{B^{−s}_{p₃,2}} ‖g‖_{B^{s₁}_{p₄,∞}}`
    G2Est1,
    /// `‖G₂(f,g)‖_{B^{σ}_{p,2}} ≲ ‖f‖_{B^{−s}_{p₅,2}} ‖g‖_{B^{s+σ}_{p₆,∞}}`
    G2Est2,
    /// `‖G₁(f,f)‖_{B^{σ}_{p,2}} ≲ ‖f‖_{B^{−s}_{p₇,2}} ‖f‖_{B^{s+σ}_{p₈,∞}}`
    G1Est2,
}

impl EstimateId {
    pub const ALL: [EstimateId; 4] = [
        EstimateId::G1Est,
        EstimateId::G2Est1,
        EstimateId::G2Est2,
        EstimateId::G1Est2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimateId::G1Est => "g1_est",
            EstimateId::G2Est1 => "g2_est1",
            EstimateId::G2Est2 => "g2_est2",
            EstimateId::G1Est2 => "g1_est2",
        }
    }

    pub fn parse(s: &str) -> Result<EstimateId> {
        EstimateId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown estimate '{s}'")))
    }
}

/// Exponents of one estimate. Only the entries the estimate uses are read.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BilinearParams {
    pub s: Option<Rational>,
    pub sigma: Option<Rational>,
    pub s1: Option<Rational>,
    pub p: Option<Rational>,
    /// `p₁ … p₈`.
    pub pi: [Option<Rational>; 8],
}

impl BilinearParams {
    pub fn with_p(mut self, i: usize, v: Rational) -> Self {
        self.pi[i - 1] = Some(v);
        self
    }
}

/// The exponents an estimate is evaluated with, after validation.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Resolved {
    s: f64,
    /// Regularity on the left: `−s` or `σ`.
    lhs_s: f64,
    p: Rational,
    pa: Rational,
    pb: Rational,
    /// Regularity of the `g` factor; `None` means a plain `L^{p_b}` norm.
    rhs_g_s: Option<f64>,
}

fn need(v: Option<Rational>, name: &str) -> Result<Rational> {
    v.ok_or_else(|| Error::Domain(format!("missing parameter {name}")))
}

fn lebesgue_ok(p: Rational, name: &str) -> Result<()> {
    if p.is_infinite() || p <= Rational::one() {
        return Err(Error::Domain(format!("{name} = {p} must lie in (1, ∞)")));
    }
    Ok(())
}

fn resolve(which: EstimateId, params: &BilinearParams, d: usize) -> Result<Resolved> {
    let s = need(params.s, "s")?;
    if s <= Rational::zero() {
        return Err(Error::Domain(format!("s = {s} must be positive")));
    }
    let p = need(params.p, "p")?;
    lebesgue_ok(p, "p")?;
    let (ia, ib) = match which {
        EstimateId::G1Est => (1, 2),
        EstimateId::G2Est1 => (3, 4),
        EstimateId::G2Est2 => (5, 6),
        EstimateId::G1Est2 => (7, 8),
    };
    let pa = need(params.pi[ia - 1], &format!("p{ia}"))?;
    let pb = need(params.pi[ib - 1], &format!("p{ib}"))?;
    lebesgue_ok(pa, &format!("p{ia}"))?;
    lebesgue_ok(pb, &format!("p{ib}"))?;
    let lhs_inv = p.recip();
    let rhs_inv = pa.recip() + pb.recip();
    let res = match which {
        EstimateId::G1Est => {
            if lhs_inv != rhs_inv {
                return Err(Error::ScalingRelation(format!(
                    "1/p = 1/p1 + 1/p2 fails: {lhs_inv} ≠ {rhs_inv}"
                )));
            }
            Resolved { s: s.to_f64(), lhs_s: -s.to_f64(), p, pa, pb, rhs_g_s: None }
        }
        EstimateId::G2Est1 => {
            let s1 = need(params.s1, "s1")?;
            if s1 <= s {
                return Err(Error::ScalingRelation(format!("s1 > s fails: s1 = {s1}, s = {s}")));
            }
            let left = lhs_inv + s1 / Rational::int(d as i64);
            if left != rhs_inv {
                return Err(Error::ScalingRelation(format!(
                    "1/p + s1/d = 1/p3 + 1/p4 fails at d = {d}: {left} ≠ {rhs_inv}"
                )));
            }
            Resolved { s: s.to_f64(), lhs_s: -s.to_f64(), p, pa, pb, rhs_g_s: Some(s1.to_f64()) }
        }
        EstimateId::G2Est2 | EstimateId::G1Est2 => {
            let sigma = need(params.sigma, "sigma")?;
            if sigma <= Rational::zero() {
                return Err(Error::Domain(format!("σ = {sigma} must be positive")));
            }
            if lhs_inv != rhs_inv {
                let (a, b) = if which == EstimateId::G2Est2 { (5, 6) } else { (7, 8) };
                return Err(Error::ScalingRelation(format!(
                    "1/p = 1/p{a} + 1/p{b} fails: {lhs_inv} ≠ {rhs_inv}"
                )));
            }
            Resolved {
                s: s.to_f64(),
                lhs_s: sigma.to_f64(),
                p,
                pa,
                pb,
                rhs_g_s: Some((s + sigma).to_f64()),
            }
        }
    };
    Ok(res)
}

/// Checks the scaling relation of an estimate with exact arithmetic.
pub fn validate(which: EstimateId, params: &BilinearParams, d: usize) -> Result<()> {
    resolve(which, params, d).map(|_| ())
}

/// `(LHS, RHS)` of one estimate for one pair of fields.
pub fn estimate_sides(which: EstimateId, params: &BilinearParams, f: &Field, g: &Field) -> Result<(f64, f64)> {
    let r = resolve(which, params, f.grid.d)?;
    let g = if which == EstimateId::G1Est2 { f } else { g };
    let jm = nyquist_index(&f.grid);
    let two = Rational::int(2);
    let big = match which {
        EstimateId::G1Est | EstimateId::G1Est2 => g1(f, g, None)?,
        EstimateId::G2Est1 | EstimateId::G2Est2 => g2(f, g, None)?,
    };
    let lhs = besov_norm(&big, BesovSpec::new(r.lhs_s, r.p, two)?, jm)?.norm;
    let nf = besov_norm(f, BesovSpec::new(-r.s, r.pa, two)?, jm)?.norm;
    let ng = match r.rhs_g_s {
        None => lebesgue_norm(&g.to_physical(), r.pb)?,
        Some(sg) => besov_norm(g, BesovSpec::new(sg, r.pb, Rational::inf())?, jm)?.norm,
    };
    Ok((lhs, nf * ng))
}

/// Ensemble layout for [`bilinear_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub grid: Grid,
    pub ensemble: usize,
    pub seed: u64,
    /// Base WhiteBand `(2^{j_lo}, 2^{j_hi}]` before rescaling.
    pub j_lo: i32,
    pub j_hi: i32,
    /// Integer rescaling factors `N` for `f ↦ f(N·)`.
    pub scales: Vec<i64>,
}

impl ProbeConfig {
    /// `d = 3`, `n = 32` with lattice spacing 4, base band `(4, 16]` and
    /// `N ∈ {1, 2, 3}`; the largest dilated wavenumber stays on the lattice.
    pub fn default_3d(ensemble: usize, seed: u64) -> ProbeConfig {
        ProbeConfig {
            grid: Grid::new(3, 32, 0.5 * std::f64::consts::PI).expect("valid grid"),
            ensemble,
            seed,
            j_lo: 2,
            j_hi: 4,
            scales: vec![1, 2, 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParaproductReport {
    pub which: EstimateId,
    pub params: BilinearParams,
    pub max_ratio: f64,
    /// Log–log slope of the per-scale maximum ratio against `N`.
    pub trend_slope: f64,
    /// Largest decomposition residual over the ensemble at `N = 1`.
    pub identity_residual: f64,
    pub ensemble_size: usize,
    pub seed: u64,
    /// Per-scale maxima keyed by `N`.
    pub ratios: BTreeMap<String, f64>,
}

/// One seeded pair `(f, g)` of the ensemble.
pub fn ensemble_pair(cfg: &ProbeConfig, k: usize) -> Result<(Field, Field)> {
    let sp = Spectrum::WhiteBand { j_lo: cfg.j_lo, j_hi: cfg.j_hi };
    let base = cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(2 * k as u64);
    Ok((random_field(cfg.grid, sp, base)?, random_field(cfg.grid, sp, base + 1)?))
}

/// Ratios `LHS/RHS` over a seeded ensemble and a frequency-rescaling family.
pub fn bilinear_probe(which: EstimateId, params: &BilinearParams, cfg: &ProbeConfig) -> Result<ParaproductReport> {
    validate(which, params, cfg.grid.d)?;
    if cfg.scales.len() < 2 || cfg.ensemble == 0 {
        return Err(Error::Domain("probe needs a non-empty ensemble and two scales".into()));
    }
    let rows: Vec<Result<(Vec<f64>, f64)>> = (0..cfg.ensemble)
        .into_par_iter()
        .map(|k| {
            let (f0, g0) = ensemble_pair(cfg, k)?;
            let mut out = Vec::with_capacity(cfg.scales.len());
            let mut resid = 0.0;
            for (i, &nn) in cfg.scales.iter().enumerate() {
                let f = dilate(&f0, nn)?;
                let g = dilate(&g0, nn)?;
                if i == 0 {
                    resid = identity_residual(&f, &g)?;
                }
                let (lhs, rhs) = estimate_sides(which, params, &f, &g)?;
                out.push(if rhs > 0.0 { lhs / rhs } else { 0.0 });
            }
            Ok((out, resid))
        })
        .collect();
    let mut per_scale = vec![0.0f64; cfg.scales.len()];
    let mut resid: f64 = 0.0;
    for row in rows {
        let (r, e) = row?;
        for (m, v) in per_scale.iter_mut().zip(r) {
            *m = m.max(v);
        }
        resid = resid.max(e);
    }
    let xs: Vec<f64> = cfg.scales.iter().map(|&n| n as f64).collect();
    let trend_slope = if per_scale.iter().all(|&v| v > 0.0) {
        fit_loglog(&xs, &per_scale).slope
    } else {
        0.0
    };
    let ratios = cfg
        .scales
        .iter()
        .zip(&per_scale)
        .map(|(n, v)| (format!("N={n}"), *v))
        .collect();
    Ok(ParaproductReport {
        which,
        params: params.clone(),
        max_ratio: per_scale.iter().cloned().fold(0.0, f64::max),
        trend_slope,
        identity_residual: resid,
        ensemble_size: cfg.ensemble,
        seed: cfg.seed,
        ratios,
    })
}

/// Exponents of the four estimates as used for `d = 4` with `s = σ = 1/3`.
/// `g2_est1` takes `s₁ = d/6` so that its scaling relation holds on a
/// `d`-dimensional grid with `p = p₄ = 30/17`, `p₃ = 6`.
pub fn endpoint_params(which: EstimateId, d: usize) -> BilinearParams {
    use crate::rational::rat;
    let third = Some(rat(1, 3));
    match which {
        EstimateId::G1Est => BilinearParams { s: third, p: Some(rat(30, 17)), ..Default::default() }
            .with_p(1, rat(6, 1))
            .with_p(2, rat(5, 2)),
        EstimateId::G2Est1 => BilinearParams {
            s: third,
            s1: Some(rat(d as i64, 6)),
            p: Some(rat(30, 17)),
            ..Default::default()
        }
        .with_p(3, rat(6, 1))
        .with_p(4, rat(30, 17)),
        EstimateId::G2Est2 => BilinearParams { s: third, sigma: third, p: Some(rat(12, 7)), ..Default::default() }
            .with_p(5, rat(6, 1))
            .with_p(6, rat(12, 5)),
        EstimateId::G1Est2 => BilinearParams { s: third, sigma: third, p: Some(rat(12, 7)), ..Default::default() }
            .with_p(7, rat(6, 1))
            .with_p(8, rat(12, 5)),
    }
}
