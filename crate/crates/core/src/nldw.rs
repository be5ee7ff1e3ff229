//! Picard solver for `∂ₜ²u − Δu + ∂ₜu = |u|^{4/(d−2)}u` in `d ∈ {3, 4}`.
//!
//! The whole interval is solved at once: each iteration re-evaluates the
//! Duhamel integral of the previous iterate's nonlinearity on the time grid.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::harness::{tail_indicator, TAIL_GUARD};
use crate::lp_besov::time_norm;
use crate::propagator::{duhamel_stream, linear_stream, QuadratureRule, StatePair, TimeGrid};
use crate::rational::Rational;
use crate::spectral::{apply_radial, lp_norm, pointwise, upsample, Field, Rep};

/// Power `p` in `|u|^p u`.
fn power(d: usize) -> Result<i32> {
    match d {
        3 => Ok(4),
        4 => Ok(2),
        _ => Err(Error::Domain(format!("field nonlinearity only for d in {{3, 4}}, got {d}"))),
    }
}

fn pad(d: usize, dealias: bool) -> usize {
    match (dealias, d) {
        (false, _) => 1,
        (true, 4) => 2,
        _ => 3,
    }
}

/// `|u|^{4/(d−2)}u` with zero-pad dealiasing.
pub fn nonlinearity(u: &Field, d: usize) -> Result<Field> {
    nonlinearity_with(u, d, true)
}

pub fn nonlinearity_with(u: &Field, d: usize, dealias: bool) -> Result<Field> {
    u.expect(Rep::Physical)?;
    if u.grid.d != d {
        return Err(Error::Domain(format!("grid has d = {}, asked for d = {d}", u.grid.d)));
    }
    let p = power(d)?;
    Ok(pointwise(u, pad(d, dealias), |z| z * z.norm_sqr().powi(p / 2)).into_physical())
}

/// Initial Picard iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialIterate {
    #[default]
    Linear,
    Zero,
}

/// One way of running the fixed-point iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Scheme {
    pub initial: InitialIterate,
    pub rule: QuadratureRule,
}

impl Scheme {
    pub const A: Scheme = Scheme { initial: InitialIterate::Zero, rule: QuadratureRule::Trapezoid };
    pub const B: Scheme = Scheme { initial: InitialIterate::Linear, rule: QuadratureRule::Midpoint };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub horizon: f64,
    pub steps: usize,
    pub picard_tol: f64,
    pub max_iters: usize,
    pub dealias: bool,
    pub scheme: Scheme,
    /// Off turns the solver into the linear flow; used to test the plumbing.
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(horizon: f64, steps: usize) -> SolverConfig {
        SolverConfig {
            horizon,
            steps,
            picard_tol: 1e-10,
            max_iters: 50,
            dealias: true,
            scheme: Scheme::default(),
            nonlinear: true,
        }
    }

    pub fn time(&self) -> Result<TimeGrid> {
        if self.steps < 8 {
            return Err(Error::Domain(format!("need at least 8 steps, got {}", self.steps)));
        }
        if self.max_iters == 0 || !(self.picard_tol > 0.0) {
            return Err(Error::Domain("max_iters and picard_tol must be positive".into()));
        }
        TimeGrid::new(self.horizon, self.steps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub time: TimeGrid,
    /// `(u, ∂ₜu)` at every node, physical representation.
    pub states: Vec<StatePair>,
    pub iterations: usize,
    /// Relative `L^∞_t L²_x` distance between successive iterates.
    pub increments: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    /// `‖u‖_{L^{2(d+1)/(d−2)}_{t,x}}`.
    pub s_norm: f64,
    pub converged: bool,
    pub d: usize,
}

impl SolveResult {
    pub fn u(&self, i: usize) -> &Field {
        &self.states[i].u
    }
}

/// Linear part `S(t)(u₀, u₁)` at every node, frequency representation.
fn linear_part(time: TimeGrid, data: &StatePair) -> Result<(Vec<Field>, Vec<Field>)> {
    let mut u = Vec::with_capacity(time.len());
    let mut ut = Vec::with_capacity(time.len());
    linear_stream(time, &data.u, &data.ut, |_, a, b| {
        u.push(a.clone());
        ut.push(b.clone());
        Ok(())
    })?;
    Ok((u, ut))
}

/// One Picard map: `S(t)(u₀,u₁) + ∫₀^t 𝒟(t−s)F(u(s))ds` and its time
/// derivative, from the differentiated Duhamel formula. Inputs and outputs in
/// frequency representation.
fn picard_map(
    iterate: &[Field],
    lin: &(Vec<Field>, Vec<Field>),
    time: TimeGrid,
    cfg: &SolverConfig,
    d: usize,
) -> Result<(Vec<Field>, Vec<Field>)> {
    let grid = lin.0[0].grid;
    let mut u = lin.0.clone();
    let mut ut = lin.1.clone();
    if !cfg.nonlinear {
        return Ok((u, ut));
    }
    let forcing: Vec<Field> = iterate
        .par_iter()
        .map(|f| nonlinearity_with(&f.to_physical(), d, cfg.dealias).map(Field::into_frequency))
        .collect::<Result<_>>()?;
    duhamel_stream(grid, time, cfg.scheme.rule, |i| Ok(forcing[i].clone()), |i, a, b| {
        u[i].add_assign(a)?;
        ut[i].add_assign(b)?;
        Ok(())
    })?;
    Ok((u, ut))
}

fn rel_sup_distance(a: &[Field], b: &[Field]) -> Result<f64> {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        num = num.max(x.sub(y)?.l2_norm());
        den = den.max(x.l2_norm());
    }
    Ok(if den == 0.0 { num } else { num / den })
}

fn s_exponent(d: usize) -> Rational {
    let d = d as i64;
    Rational::new(2 * (d + 1), d - 2)
}

/// Solves on `[0, T]` by Picard iteration.
///
/// Fails with [`Error::NonContraction`] when the increments stop shrinking:
/// three successive factors at or above one, a non-finite increment, or
/// `max_iters` exhausted.
pub fn picard_solve(data: &StatePair, cfg: &SolverConfig) -> Result<SolveResult> {
    let time = cfg.time()?;
    let d = data.grid().d;
    power(d)?;
    for f in [&data.u, &data.ut] {
        let t = tail_indicator(f);
        if t >= TAIL_GUARD {
            return Err(Error::Guard(format!("data tail indicator {t:.2e} exceeds {TAIL_GUARD:e}")));
        }
    }
    let lin = linear_part(time, data)?;
    let mut iterate = match cfg.scheme.initial {
        InitialIterate::Linear => lin.0.clone(),
        InitialIterate::Zero => vec![Field::zeros(data.grid(), Rep::Frequency); time.len()],
    };
    let mut increments = Vec::new();
    let mut factors = Vec::new();
    let mut rising = 0;
    loop {
        let (u, ut) = picard_map(&iterate, &lin, time, cfg, d)?;
        let inc = rel_sup_distance(&u, &iterate)?;
        if let Some(&prev) = increments.last() {
            let f: f64 = if prev > 0.0 { inc / prev } else { 0.0 };
            factors.push(f);
            rising = if f >= 1.0 { rising + 1 } else { 0 };
        }
        increments.push(inc);
        iterate = u;
        let iterations = increments.len();
        if inc < cfg.picard_tol {
            let states: Vec<StatePair> = iterate
                .into_iter()
                .zip(ut)
                .map(|(a, b)| StatePair { u: a.into_physical(), ut: b.into_physical() })
                .collect();
            let q = s_exponent(d);
            let norms: Vec<f64> =
                states.iter().map(|s| lp_norm(&s.u.values, q.to_f64(), s.u.grid.cell_volume())).collect();
            let s_norm = time_norm(&norms, time.dt(), q)?;
            return Ok(SolveResult {
                time,
                states,
                iterations,
                increments,
                contraction_factors: factors,
                s_norm,
                converged: true,
                d,
            });
        }
        if !inc.is_finite() || rising >= 3 || iterations >= cfg.max_iters {
            return Err(Error::NonContraction { iterations, last_factor: factors.last().copied().unwrap_or(f64::NAN) });
        }
    }
}

/// Relative `L^∞_t L²_x` distance between a solution and its image under one
/// more Picard map.
pub fn fixed_point_residual(data: &StatePair, result: &SolveResult, cfg: &SolverConfig) -> Result<f64> {
    let lin = linear_part(result.time, data)?;
    let u: Vec<Field> = result.states.iter().map(|s| s.u.to_frequency()).collect();
    let (next, _) = picard_map(&u, &lin, result.time, cfg, result.d)?;
    rel_sup_distance(&next, &u)
}

/// `∫ ½|∂ₜu|² + ½|∇u|² − (d−2)/(2d)|u|^{2d/(d−2)} dx`; with `nonlinear`
/// off only the quadratic part.
pub fn energy_with(state: &StatePair, d: usize, nonlinear: bool) -> Result<f64> {
    let p = power(d)?;
    let kin = state.ut.l2_norm().powi(2);
    let grad = apply_radial(&state.u, |r| r).l2_norm().powi(2);
    let mut e = 0.5 * (kin + grad);
    if nonlinear {
        // padded so the potential density is integrated without aliasing
        let fine = upsample(&state.u, pad(d, true) + 1);
        let q = (p + 2) as f64;
        e -= lp_norm(&fine.values, q, fine.grid.cell_volume()).powf(q) / q;
    }
    Ok(e)
}

pub fn energy(state: &StatePair, d: usize) -> Result<f64> {
    energy_with(state, d, true)
}

/// `max_i |E(t_i) + ∫₀^{t_i}‖∂ₜu‖₂² − E(0)| / (|E(0)| + 1)`, trapezoid in time.
pub fn energy_balance_residual(result: &SolveResult, nonlinear: bool) -> Result<f64> {
    if !result.converged {
        return Err(Error::Unconverged);
    }
    let energies: Vec<f64> =
        result.states.iter().map(|s| energy_with(s, result.d, nonlinear)).collect::<Result<_>>()?;
    let diss: Vec<f64> = result.states.iter().map(|s| s.ut.l2_norm().powi(2)).collect();
    let e0 = energies[0];
    let h = result.time.dt();
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    for i in 1..energies.len() {
        acc += 0.5 * h * (diss[i - 1] + diss[i]);
        worst = worst.max((energies[i] + acc - e0).abs());
    }
    Ok(worst / (e0.abs() + 1.0))
}

/// Max-over-time relative `L²` distance between the limits of two schemes.
pub fn uniqueness_smoke(data: &StatePair, cfg: &SolverConfig, a: Scheme, b: Scheme) -> Result<f64> {
    let ra = picard_solve(data, &SolverConfig { scheme: a, ..cfg.clone() })?;
    let rb = picard_solve(data, &SolverConfig { scheme: b, ..cfg.clone() })?;
    let ua: Vec<Field> = ra.states.into_iter().map(|s| s.u).collect();
    let ub: Vec<Field> = rb.states.into_iter().map(|s| s.u).collect();
    rel_sup_distance(&ua, &ub)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayNorm {
    #[default]
    L2,
    /// `(‖u‖²_{H¹} + ‖∂ₜu‖²₂)^{1/2}`.
    Energy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub norm: DecayNorm,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    /// Fit of `ln‖u‖` against `t` on `[T/2, T]`; the slope is minus the
    /// exponential rate.
    pub exp_fit: Option<LineFit>,
    /// Fit of `ln‖u‖` against `ln t` on `[T/2, T]`.
    pub power_fit: Option<LineFit>,
    /// Non-increasing on `[T/2, T]` up to round-off.
    pub monotone: bool,
    pub flag: Option<String>,
}

/// Solves on `[0, T]`, `T ≥ 20`, and fits the late-time decay of the chosen norm.
pub fn small_data_decay_probe(data: &StatePair, cfg: &SolverConfig, norm: DecayNorm) -> Result<DecayReport> {
    if cfg.horizon < 20.0 {
        return Err(Error::Domain(format!("decay probe needs T >= 20, got {}", cfg.horizon)));
    }
    let res = picard_solve(data, cfg)?;
    let t = res.time.nodes();
    let values: Vec<f64> = res
        .states
        .iter()
        .map(|s| match norm {
            DecayNorm::L2 => s.u.l2_norm(),
            DecayNorm::Energy => {
                let h1 = apply_radial(&s.u, |r| (1.0 + r * r).sqrt()).l2_norm();
                h1.hypot(s.ut.l2_norm())
            }
        })
        .collect();
    let late: Vec<usize> = (0..t.len()).filter(|&i| t[i] >= 0.5 * cfg.horizon).collect();
    let top = values.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(DecayReport {
            norm,
            t,
            values,
            exp_fit: None,
            power_fit: None,
            monotone: true,
            flag: Some("degenerate: zero solution".into()),
        });
    }
    let monotone = late.windows(2).all(|w| values[w[1]] <= values[w[0]] * (1.0 + 1e-12));
    let ys: Vec<f64> = late.iter().map(|&i| values[i].ln()).collect();
    let ts: Vec<f64> = late.iter().map(|&i| t[i]).collect();
    let lts: Vec<f64> = ts.iter().map(|v| v.ln()).collect();
    Ok(DecayReport {
        norm,
        exp_fit: Some(fit_line(&ts, &ys)),
        power_fit: Some(fit_line(&lts, &ys)),
        t,
        values,
        monotone,
        flag: None,
    })
}

/// Multiplies both components by `c`.
pub fn scale_state(s: &StatePair, c: Complex64) -> StatePair {
    StatePair { u: s.u.scale(c), ut: s.ut.scale(c) }
}
