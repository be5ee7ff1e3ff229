//! Littlewood–Paley blocks, inhomogeneous Besov norms and mixed
//! space-time norms.
//!
//! `Δ_{≤j}` multiplies by `χ(|ξ|/2^j)` where `χ` is a smooth step equal to 1
//! on `[0, 1]` and 0 on `[25/24, ∞)`. All other blocks are differences of
//! these, so the dyadic sums telescope exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::Trajectory;
use crate::rational::Rational;
use crate::spectral::{lp_norm, Field, Grid, Rep};

fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

fn smooth_step(s: f64) -> f64 {
    if s >= 1.0 {
        return 1.0;
    }
    if s <= 0.0 {
        return 0.0;
    }
    let a = bump(s);
    a / (a + bump(1.0 - s))
}

/// The cutoff profile `χ`.
pub fn chi(rho: f64) -> f64 {
    smooth_step((25.0 / 24.0 - rho) * 24.0)
}

/// Symbol of `Δ_{≤j}` at `|ξ| = rho`.
pub fn chi_leq(j: i32, rho: f64) -> f64 {
    chi(rho * 2f64.powi(-j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpVariant {
    /// `Δ_j`
    Eq(i32),
    /// `Δ_{≤j}`
    Leq(i32),
    /// `Δ_{>j}`
    Gt(i32),
    /// `Δ_{<j}`
    Lt(i32),
    /// `Δ_{≥j}`
    Geq(i32),
    /// `Σ_{k=j}^{l} Δ_k`
    Range(i32, i32),
    /// `Δ_{j−1} + Δ_j + Δ_{j+1}`
    Tilde(i32),
    /// `P_{>1} = 1 − χ`
    PGt1,
    /// `P_{≤1} = χ`
    PLeq1,
}

impl LpVariant {
    pub fn symbol(&self, rho: f64) -> f64 {
        match *self {
            LpVariant::Eq(j) => chi_leq(j, rho) - chi_leq(j - 1, rho),
            LpVariant::Leq(j) => chi_leq(j, rho),
            LpVariant::Gt(j) => 1.0 - chi_leq(j, rho),
            LpVariant::Lt(j) => chi_leq(j - 1, rho),
            LpVariant::Geq(j) => 1.0 - chi_leq(j - 1, rho),
            LpVariant::Range(j, l) => chi_leq(l, rho) - chi_leq(j - 1, rho),
            LpVariant::Tilde(j) => chi_leq(j + 1, rho) - chi_leq(j - 2, rho),
            LpVariant::PGt1 => 1.0 - chi(rho),
            LpVariant::PLeq1 => chi(rho),
        }
    }

    /// Lower edge of the annulus, for variants that vanish near the origin.
    fn lower_edge(&self) -> Option<f64> {
        match *self {
            LpVariant::Eq(j) => Some(2f64.powi(j - 1)),
            LpVariant::Tilde(j) => Some(2f64.powi(j - 2)),
            LpVariant::Range(j, _) => Some(2f64.powi(j - 1)),
            _ => None,
        }
    }
}

/// Smallest `j` with `2^j` at or above every lattice frequency.
pub fn nyquist_index(grid: &Grid) -> i32 {
    grid.max_freq().log2().ceil().max(0.0) as i32
}

/// Applies a Littlewood–Paley block; the result keeps the input's representation.
pub fn lp_project(variant: LpVariant, f: &Field) -> Result<Field> {
    if let Some(lo) = variant.lower_edge() {
        if lo > f.grid.max_freq() {
            return Err(Error::Unresolvable(format!(
                "{variant:?} starts at |ξ| = {lo}, above the grid's {}",
                f.grid.max_freq()
            )));
        }
    }
    let rep = f.rep;
    let mut g = f.to_frequency();
    for (v, rho) in g.values.iter_mut().zip(f.grid.freq_norms()) {
        *v *= variant.symbol(rho);
    }
    Ok(match rep {
        Rep::Physical => g.into_physical(),
        Rep::Frequency => g,
    })
}

/// Multiplies a frequency-space array by a block symbol and returns the
/// physical values. `norms` are the lattice `|ξ|`.
fn block_physical(spec: &Field, norms: &[f64], m: impl Fn(f64) -> f64) -> Field {
    let mut g = spec.clone();
    for (v, &rho) in g.values.iter_mut().zip(norms) {
        *v *= m(rho);
    }
    g.into_physical()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Rational,
    pub q: Rational,
}

impl BesovSpec {
    pub fn new(s: f64, p: Rational, q: Rational) -> Result<BesovSpec> {
        if p.is_infinite() || p <= Rational::one() {
            return Err(Error::Domain(format!("Besov p = {p} must lie in (1, ∞)")));
        }
        if q < Rational::one() {
            return Err(Error::Domain(format!("Besov q = {q} must be at least 1")));
        }
        Ok(BesovSpec { s, p, q })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovValue {
    pub norm: f64,
    /// `‖Δ_{j_max} f‖_{L^p} / ‖f‖_{L^p}`, 0 for the zero field.
    pub tail: f64,
}

/// `ℓ^q` norm with summation in descending order of magnitude.
pub fn lq_sum(terms: &[f64], q: Rational) -> f64 {
    let mut t: Vec<f64> = terms.iter().map(|x| x.abs()).collect();
    if q.is_infinite() {
        return t.into_iter().fold(0.0, f64::max);
    }
    t.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let m = t.first().copied().unwrap_or(0.0);
    if m == 0.0 {
        return 0.0;
    }
    let qf = q.to_f64();
    let s: f64 = t.iter().map(|x| (x / m).powf(qf)).sum();
    m * s.powf(1.0 / qf)
}

fn check_j_max(grid: &Grid, j_max: i32) -> Result<()> {
    let top = nyquist_index(grid);
    if j_max > top || j_max < 0 {
        return Err(Error::Domain(format!("j_max = {j_max} outside 0..={top}")));
    }
    Ok(())
}

/// The `L^p` norms of `Δ_{≤0} f, Δ_1 f, …, Δ_{j_max} f`.
pub fn block_norms(f: &Field, p: Rational, j_max: i32) -> Result<Vec<f64>> {
    check_j_max(&f.grid, j_max)?;
    let spec = f.to_frequency();
    let norms = f.grid.freq_norms();
    let pf = p.to_f64();
    let cv = f.grid.cell_volume();
    let mut out = Vec::with_capacity(j_max as usize + 1);
    for j in 0..=j_max {
        let b = if j == 0 {
            block_physical(&spec, &norms, |r| chi(r))
        } else {
            block_physical(&spec, &norms, |r| chi_leq(j, r) - chi_leq(j - 1, r))
        };
        out.push(lp_norm(&b.values, pf, cv));
    }
    Ok(out)
}

/// `‖Δ_{≤0} f‖_{L^p} + ‖{2^{js} ‖Δ_j f‖_{L^p}}_{j=1}^{j_max}‖_{ℓ^q}`.
pub fn besov_norm(f: &Field, spec: BesovSpec, j_max: i32) -> Result<BesovValue> {
    let spec = BesovSpec::new(spec.s, spec.p, spec.q)?;
    let blocks = block_norms(f, spec.p, j_max)?;
    Ok(besov_from_blocks(&blocks, spec, &f.to_physical()))
}

fn besov_from_blocks(blocks: &[f64], spec: BesovSpec, phys: &Field) -> BesovValue {
    let terms: Vec<f64> = blocks[1..]
        .iter()
        .enumerate()
        .map(|(i, b)| 2f64.powf((i + 1) as f64 * spec.s) * b)
        .collect();
    let norm = blocks[0] + lq_sum(&terms, spec.q);
    let total = lp_norm(&phys.values, spec.p.to_f64(), phys.grid.cell_volume());
    let tail = if total > 0.0 {
        blocks[blocks.len() - 1] / total
    } else {
        0.0
    };
    BesovValue { norm, tail }
}

/// `(∫ a(t)^q dt)^{1/q}` by the composite trapezoid rule on a uniform grid,
/// or `max a` when `q = ∞`.
pub fn time_norm(values: &[f64], dt: f64, q: Rational) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    if q.is_infinite() {
        return Ok(values.iter().cloned().fold(0.0, f64::max));
    }
    if values.len() == 1 {
        return Ok(0.0);
    }
    let qf = q.to_f64();
    let m = values.iter().cloned().fold(0.0, f64::max);
    if m == 0.0 {
        return Ok(0.0);
    }
    let n = values.len() - 1;
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * (v / m).powf(qf)
        })
        .sum();
    Ok(m * (s * dt).powf(1.0 / qf))
}

/// `‖F‖_{L^{q_t}(I; L^{r_x})}`.
pub fn mixed_norm(traj: &Trajectory, q_t: Rational, r_x: Rational) -> Result<f64> {
    if traj.frames.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    if r_x < Rational::one() {
        return Err(Error::Domain(format!("Lebesgue exponent {r_x} below 1")));
    }
    let rf = r_x.to_f64();
    let vals: Vec<f64> = traj
        .frames
        .iter()
        .map(|f| {
            let p = f.to_physical();
            lp_norm(&p.values, rf, p.grid.cell_volume())
        })
        .collect();
    time_norm(&vals, traj.time.dt(), q_t)
}

/// `‖F‖_{L^{q_t}(I; B^s_{p,q})}`; the second value is the worst tail indicator.
pub fn mixed_besov_norm(
    traj: &Trajectory,
    q_t: Rational,
    spec: BesovSpec,
    j_max: i32,
) -> Result<(f64, f64)> {
    if traj.frames.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let mut vals = Vec::with_capacity(traj.frames.len());
    let mut tail: f64 = 0.0;
    for f in &traj.frames {
        let b = besov_norm(f, spec, j_max)?;
        vals.push(b.norm);
        tail = tail.max(b.tail);
    }
    Ok((time_norm(&vals, traj.time.dt(), q_t)?, tail))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesovSign {
    PlusS,
    MinusS,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub besov: f64,
    pub alternative: f64,
    /// `besov / alternative`; 1 when both vanish.
    pub ratio: f64,
    pub degenerate: bool,
}

/// Compares `‖f‖_{B^{±s}_{p,q}}` with the cumulative-block form
/// `‖Δ_{≤J} f‖ + ‖{2^{js}‖Δ_{≥j} f‖}_{j≥J}‖_{ℓ^q}` (plus sign) or
/// `‖Δ_{≤J} f‖ + ‖{2^{−js}‖Δ_{≤j} f‖}_{j≥J}‖_{ℓ^q}` (minus sign), both
/// truncated at the grid's dyadic index.
pub fn lp_equivalence_check(
    f: &Field,
    s: f64,
    p: Rational,
    q: Rational,
    j0: i32,
    sign: BesovSign,
) -> Result<EquivalenceReport> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("regularity s = {s} must be positive")));
    }
    if j0 < 0 {
        return Err(Error::Domain("J must be non-negative".into()));
    }
    let j_max = nyquist_index(&f.grid).max(j0);
    let signed = match sign {
        BesovSign::PlusS => s,
        BesovSign::MinusS => -s,
    };
    let spec = BesovSpec::new(signed, p, q)?;
    let besov = besov_norm(f, spec, nyquist_index(&f.grid))?.norm;

    let fs = f.to_frequency();
    let norms = f.grid.freq_norms();
    let pf = p.to_f64();
    let cv = f.grid.cell_volume();
    let low = lp_norm(&block_physical(&fs, &norms, |r| chi_leq(j0, r)).values, pf, cv);
    let mut terms = Vec::new();
    for j in j0..=j_max {
        let b = match sign {
            BesovSign::PlusS => block_physical(&fs, &norms, |r| 1.0 - chi_leq(j - 1, r)),
            BesovSign::MinusS => block_physical(&fs, &norms, |r| chi_leq(j, r)),
        };
        terms.push(2f64.powf(j as f64 * signed) * lp_norm(&b.values, pf, cv));
    }
    let alternative = low + lq_sum(&terms, q);
    let degenerate = besov == 0.0 && alternative == 0.0;
    let ratio = if degenerate { 1.0 } else { besov / alternative };
    Ok(EquivalenceReport {
        besov,
        alternative,
        ratio,
        degenerate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `‖|u|^α‖_{B^s_{p,∞}} / ‖u‖^α_{B^{s/α}_{pα,∞}}`. The power is taken
/// pointwise on the grid without dealiasing, so the left side sees the
/// grid-resolved part of `|u|^α`.
pub fn holder_besov_check(u: &Field, alpha: f64, s: f64, p: Rational) -> Result<HolderReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("α = {alpha} outside (0, 1]")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} outside (0, 1)")));
    }
    if p.is_infinite() || p.to_f64() * alpha <= 1.0 {
        return Err(Error::Domain(format!("need finite p with pα > 1, got p = {p}")));
    }
    let j_max = nyquist_index(&u.grid);
    let up = u.to_physical();
    let fu = Field::from_values(
        up.grid,
        Rep::Physical,
        up.values.iter().map(|z| Complex64::new(z.norm().powf(alpha), 0.0)).collect(),
    )?;
    let lhs = besov_norm(&fu, BesovSpec::new(s, p, Rational::inf())?, j_max)?.norm;
    let pa = p.to_f64() * alpha;
    let blocks = {
        let spec = up.to_frequency();
        let norms = up.grid.freq_norms();
        let cv = up.grid.cell_volume();
        let mut out = Vec::new();
        for j in 0..=j_max {
            let b = if j == 0 {
                block_physical(&spec, &norms, chi)
            } else {
                block_physical(&spec, &norms, |r| chi_leq(j, r) - chi_leq(j - 1, r))
            };
            out.push(lp_norm(&b.values, pa, cv));
        }
        out
    };
    let sa = s / alpha;
    let sup = blocks[1..]
        .iter()
        .enumerate()
        .map(|(i, b)| 2f64.powf((i + 1) as f64 * sa) * b)
        .fold(0.0, f64::max);
    let rhs = (blocks[0] + sup).powf(alpha);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(HolderReport { lhs, rhs, ratio })
}

/// `f ↦ Σ_{j} Δ_j f` over `Δ_{≤0}, Δ_1, …, Δ_J` as one multiplier; equals
/// `Δ_{≤J}` exactly.
pub fn telescoped_symbol(j_top: i32, rho: f64) -> f64 {
    let mut s = chi(rho);
    for j in 1..=j_top {
        s += chi_leq(j, rho) - chi_leq(j - 1, rho);
    }
    s
}
