//! Exact solution operators of `∂ₜ²φ − Δφ + ∂ₜφ = 0`.
//!
//! With `κ = |ξ|² − 1/4` the symbol `L(t, ξ)` solves `L'' = −κL`, `L(0) = 0`,
//! `L'(0) = 1`, so it is `sin(t√κ)/√κ` above `|ξ| = 1/2` and
//! `sinh(t√−κ)/√−κ` below. `𝒟(t)` multiplies by `e^{−t/2}L`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_besov::chi;
use crate::spectral::{write_snapshot, Field, Grid, Multiplier, Rep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropagatorKind {
    D,
    DtD,
    Dt2D,
    HalfWave,
}

/// Damped symbols at one `(t, |ξ|)`: `e^{−t/2}L`, `e^{−t/2}L'` and `κ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Symbols {
    pub el: f64,
    pub elp: f64,
    pub kappa: f64,
}

impl Symbols {
    pub fn new(t: f64, rho: f64) -> Symbols {
        let kappa = rho * rho - 0.25;
        let near = (4.0 * rho * rho - 1.0).abs() < 1e-5 && kappa.abs() * t * t < 1e-2;
        let damp = (-0.5 * t).exp();
        if near {
            let k = kappa;
            let t2 = t * t;
            let l = t * (1.0 - k * t2 / 6.0 + k * k * t2 * t2 / 120.0 - k * k * k * t2 * t2 * t2 / 5040.0);
            let lp = 1.0 - k * t2 / 2.0 + k * k * t2 * t2 / 24.0 - k * k * k * t2 * t2 * t2 / 720.0;
            return Symbols {
                el: damp * l,
                elp: damp * lp,
                kappa,
            };
        }
        if kappa > 0.0 {
            let w = kappa.sqrt();
            let (s, c) = (w * t).sin_cos();
            Symbols {
                el: damp * s / w,
                elp: damp * c,
                kappa,
            }
        } else {
            // μ = √(1/4 − ρ²); e^{−t/2}sinh(tμ)/μ = e^{−tβ}(1 − e^{−2tμ})/(2μ), β = 1/2 − μ
            let mu = (-kappa).sqrt();
            let beta = rho * rho / (0.5 + mu);
            let slow = (-t * beta).exp();
            let el = if mu * t < 1e-300 {
                damp * t
            } else {
                -slow * (-2.0 * t * mu).exp_m1() / (2.0 * mu)
            };
            let fast = (-t * (0.5 + mu)).exp();
            Symbols {
                el,
                elp: 0.5 * (slow + fast),
                kappa,
            }
        }
    }

    /// Symbol of `𝒟(t)`.
    pub fn d(&self) -> f64 {
        self.el
    }

    /// Symbol of `∂ₜ𝒟(t)`: `e^{−t/2}(L' − L/2)`.
    pub fn dtd(&self) -> f64 {
        self.elp - 0.5 * self.el
    }

    /// Symbol of `∂ₜ²𝒟(t)`: `e^{−t/2}(L'' − L' + L/4)` with `L'' = −κL`.
    pub fn dt2d(&self) -> f64 {
        -self.kappa * self.el - self.elp + 0.25 * self.el
    }
}

/// `L(t, ξ)` itself (undamped). Overflows for large `t` on the low branch; use
/// [`Symbols`] for anything numerical.
pub fn symbol_l(t: f64, rho: f64) -> f64 {
    Symbols::new(t, rho).el * (0.5 * t).exp()
}

/// Half-wave symbol `e^{it√(|ξ|²−1/4)}(1 − χ(|ξ|))`.
pub fn half_wave_symbol(t: f64, rho: f64) -> Complex64 {
    let cut = 1.0 - chi(rho);
    if cut == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(cut, t * (rho * rho - 0.25).sqrt())
}

pub fn symbol(kind: PropagatorKind, t: f64, rho: f64) -> Complex64 {
    match kind {
        PropagatorKind::D => Complex64::new(Symbols::new(t, rho).d(), 0.0),
        PropagatorKind::DtD => Complex64::new(Symbols::new(t, rho).dtd(), 0.0),
        PropagatorKind::Dt2D => Complex64::new(Symbols::new(t, rho).dt2d(), 0.0),
        PropagatorKind::HalfWave => half_wave_symbol(t, rho),
    }
}

/// `L(t, ξ_k)` on the lattice.
pub fn multiplier_l(grid: Grid, t: f64) -> Multiplier {
    Multiplier::radial(grid, format!("L(t={t})"), |rho| symbol_l(t, rho))
}

pub fn propagator_multiplier(grid: Grid, kind: PropagatorKind, t: f64) -> Result<Multiplier> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("propagator time must be >= 0, got {t}")));
    }
    Ok(Multiplier::radial_complex(grid, format!("{kind:?}(t={t})"), |rho| {
        symbol(kind, t, rho)
    }))
}

/// Applies `𝒟(t)`, `∂ₜ𝒟(t)`, `∂ₜ²𝒟(t)` or the half-wave operator. The result
/// is in the input's representation.
pub fn apply_propagator(kind: PropagatorKind, t: f64, f: &Field) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("propagator time must be >= 0, got {t}")));
    }
    let rep = f.rep;
    let mut g = f.to_frequency();
    for (v, rho) in g.values.iter_mut().zip(g.grid.freq_norms()) {
        *v *= symbol(kind, t, rho);
    }
    Ok(match rep {
        Rep::Physical => g.into_physical(),
        Rep::Frequency => g,
    })
}

/// `(u, ∂ₜu)` at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePair {
    pub u: Field,
    pub ut: Field,
}

impl StatePair {
    pub fn new(u: Field, ut: Field) -> Result<StatePair> {
        if !u.grid.same_as(&ut.grid) {
            return Err(Error::GridMismatch);
        }
        let ut = if ut.rep == u.rep {
            ut
        } else if u.rep == Rep::Physical {
            ut.into_physical()
        } else {
            ut.into_frequency()
        };
        Ok(StatePair { u, ut })
    }

    pub fn zeros(grid: Grid) -> StatePair {
        StatePair {
            u: Field::zeros(grid, Rep::Physical),
            ut: Field::zeros(grid, Rep::Physical),
        }
    }

    pub fn grid(&self) -> Grid {
        self.u.grid
    }

    pub fn to_physical(&self) -> StatePair {
        StatePair {
            u: self.u.to_physical(),
            ut: self.ut.to_physical(),
        }
    }

    pub fn to_frequency(&self) -> StatePair {
        StatePair {
            u: self.u.to_frequency(),
            ut: self.ut.to_frequency(),
        }
    }
}

/// `φ(t) = 𝒟(t)(u₀+u₁) + ∂ₜ𝒟(t)u₀` and its time derivative.
pub fn linear_solution(t: f64, u0: &Field, u1: &Field) -> Result<StatePair> {
    if !u0.grid.same_as(&u1.grid) {
        return Err(Error::GridMismatch);
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let a = u0.to_frequency();
    let b = u1.to_frequency();
    let mut u = Field::zeros(a.grid, Rep::Frequency);
    let mut ut = Field::zeros(a.grid, Rep::Frequency);
    for (i, rho) in a.grid.freq_norms().into_iter().enumerate() {
        let s = Symbols::new(t, rho);
        u.values[i] = (s.d() + s.dtd()) * a.values[i] + s.d() * b.values[i];
        ut.values[i] = (s.dtd() + s.dt2d()) * a.values[i] + s.dtd() * b.values[i];
    }
    Ok(StatePair {
        u: u.into_physical(),
        ut: ut.into_physical(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<TimeGrid> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {t_end}")));
        }
        if steps < 2 {
            return Err(Error::Domain(format!("need at least 2 steps, got {steps}")));
        }
        Ok(TimeGrid { t_end, steps })
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t_end * i as f64 / self.steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.node(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.steps {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }
}

/// Fields sampled at every node of a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub time: TimeGrid,
    pub frames: Vec<Field>,
}

impl Trajectory {
    pub fn new(time: TimeGrid, frames: Vec<Field>) -> Result<Trajectory> {
        if frames.len() != time.len() {
            return Err(Error::Domain(format!(
                "trajectory has {} frames for {} nodes",
                frames.len(),
                time.len()
            )));
        }
        if let Some(f0) = frames.first() {
            if frames.iter().any(|f| !f.grid.same_as(&f0.grid)) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Trajectory { time, frames })
    }

    pub fn from_fn(time: TimeGrid, mut f: impl FnMut(f64) -> Field) -> Result<Trajectory> {
        let frames = time.nodes().into_iter().map(&mut f).collect();
        Trajectory::new(time, frames)
    }

    pub fn grid(&self) -> Grid {
        self.frames[0].grid
    }

    /// Writes `frame_XXXXX.dwf1` snapshots and an `index.json` listing the
    /// node times.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut files = Vec::new();
        for (i, f) in self.frames.iter().enumerate() {
            let name = format!("frame_{i:05}.dwf1");
            write_snapshot(&dir.join(&name), f)?;
            files.push(name);
        }
        let index = serde_json::json!({ "t": self.time.nodes(), "files": files });
        fs::write(dir.join("index.json"), serde_json::to_vec_pretty(&index).expect("json"))?;
        Ok(())
    }
}

/// Frequency-space one-step map of the linear flow over a fixed `h`.
pub struct LinearStepper {
    s11: Vec<f64>,
    s12: Vec<f64>,
    s21: Vec<f64>,
    s22: Vec<f64>,
    /// `𝒟(h/2)` and `∂ₜ𝒟(h/2)`, used by the midpoint rule.
    half_d: Vec<f64>,
    half_dtd: Vec<f64>,
}

impl LinearStepper {
    pub fn new(grid: Grid, h: f64) -> LinearStepper {
        let rho = grid.freq_norms();
        let m = rho.len();
        let mut s = LinearStepper {
            s11: Vec::with_capacity(m),
            s12: Vec::with_capacity(m),
            s21: Vec::with_capacity(m),
            s22: Vec::with_capacity(m),
            half_d: Vec::with_capacity(m),
            half_dtd: Vec::with_capacity(m),
        };
        for r in rho {
            let y = Symbols::new(h, r);
            s.s11.push(y.d() + y.dtd());
            s.s12.push(y.d());
            s.s21.push(y.dtd() + y.dt2d());
            s.s22.push(y.dtd());
            let z = Symbols::new(0.5 * h, r);
            s.half_d.push(z.d());
            s.half_dtd.push(z.dtd());
        }
        s
    }

    /// Advances `(p, q) = (φ̂, ∂ₜφ̂)` by one step in place.
    pub fn step(&self, p: &mut [Complex64], q: &mut [Complex64]) {
        for i in 0..p.len() {
            let (a, b) = (p[i], q[i]);
            p[i] = self.s11[i] * a + self.s12[i] * b;
            q[i] = self.s21[i] * a + self.s22[i] * b;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum QuadratureRule {
    /// Composite trapezoid on the nodes.
    #[default]
    Trapezoid,
    /// Midpoint rule with the forcing linearly interpolated to half nodes.
    Midpoint,
}

/// Streams `U(t_i) = ∫₀^{t_i} 𝒟(t_i−s)F(s)ds` and `∂ₜU(t_i)` node by node.
///
/// `forcing(i)` returns `F(t_i)`; `sink(i, U, ∂ₜU)` receives frequency fields.
/// Instead of the `O(m²)` double sum the partial integrals are propagated with
/// the exact one-step map, which gives the same quadrature in `O(m)` steps.
pub fn duhamel_stream(
    grid: Grid,
    time: TimeGrid,
    rule: QuadratureRule,
    mut forcing: impl FnMut(usize) -> Result<Field>,
    mut sink: impl FnMut(usize, &Field, &Field) -> Result<()>,
) -> Result<()> {
    let h = time.dt();
    let stepper = LinearStepper::new(grid, h);
    let fetch = |f: Field| -> Result<Field> {
        if !f.grid.same_as(&grid) {
            return Err(Error::GridMismatch);
        }
        Ok(f.into_frequency())
    };
    let mut p = Field::zeros(grid, Rep::Frequency);
    let mut q = Field::zeros(grid, Rep::Frequency);
    let mut f_prev = fetch(forcing(0)?)?;
    let mut u = Field::zeros(grid, Rep::Frequency);
    let mut ut = Field::zeros(grid, Rep::Frequency);
    sink(0, &u, &ut)?;
    if rule == QuadratureRule::Trapezoid {
        // weight h/2 on the s = 0 sample; the s = t endpoint enters ∂ₜU only
        for (qv, fv) in q.values.iter_mut().zip(&f_prev.values) {
            *qv = 0.5 * h * fv;
        }
    }
    for i in 1..=time.steps {
        let f_next = fetch(forcing(i)?)?;
        stepper.step(&mut p.values, &mut q.values);
        match rule {
            QuadratureRule::Trapezoid => {
                for k in 0..q.values.len() {
                    q.values[k] += h * f_next.values[k];
                    u.values[k] = p.values[k];
                    ut.values[k] = q.values[k] - 0.5 * h * f_next.values[k];
                }
            }
            QuadratureRule::Midpoint => {
                for k in 0..q.values.len() {
                    let fm = 0.5 * (f_prev.values[k] + f_next.values[k]);
                    p.values[k] += h * stepper.half_d[k] * fm;
                    q.values[k] += h * stepper.half_dtd[k] * fm;
                    u.values[k] = p.values[k];
                    ut.values[k] = q.values[k];
                }
            }
        }
        sink(i, &u, &ut)?;
        f_prev = f_next;
    }
    Ok(())
}

/// Trapezoidal Duhamel integral of a forcing trajectory; returns `U` and
/// `∂ₜU` in physical representation.
pub fn duhamel_pair(forcing: &Trajectory, rule: QuadratureRule) -> Result<(Trajectory, Trajectory)> {
    let grid = forcing.grid();
    let mut us = Vec::with_capacity(forcing.time.len());
    let mut uts = Vec::with_capacity(forcing.time.len());
    duhamel_stream(
        grid,
        forcing.time,
        rule,
        |i| Ok(forcing.frames[i].clone()),
        |_, u, ut| {
            us.push(u.to_physical());
            uts.push(ut.to_physical());
            Ok(())
        },
    )?;
    Ok((
        Trajectory::new(forcing.time, us)?,
        Trajectory::new(forcing.time, uts)?,
    ))
}

/// `t ↦ ∫₀^t 𝒟(t−s)F(s)ds` by the composite trapezoid rule.
pub fn duhamel(forcing: &Trajectory) -> Result<Trajectory> {
    Ok(duhamel_pair(forcing, QuadratureRule::Trapezoid)?.0)
}

/// Streams the linear solution `S(t_i)(u₀, u₁)` in frequency representation.
pub fn linear_stream(
    time: TimeGrid,
    u0: &Field,
    u1: &Field,
    mut sink: impl FnMut(usize, &Field, &Field) -> Result<()>,
) -> Result<()> {
    if !u0.grid.same_as(&u1.grid) {
        return Err(Error::GridMismatch);
    }
    let grid = u0.grid;
    let stepper = LinearStepper::new(grid, time.dt());
    let mut p = u0.to_frequency();
    let mut q = u1.to_frequency();
    sink(0, &p, &q)?;
    for i in 1..=time.steps {
        stepper.step(&mut p.values, &mut q.values);
        sink(i, &p, &q)?;
    }
    Ok(())
}

/// Linear solution sampled on a time grid (physical representation).
pub fn linear_trajectory(time: TimeGrid, u0: &Field, u1: &Field) -> Result<(Trajectory, Trajectory)> {
    let mut us = Vec::new();
    let mut uts = Vec::new();
    linear_stream(time, u0, u1, |_, u, ut| {
        us.push(u.to_physical());
        uts.push(ut.to_physical());
        Ok(())
    })?;
    Ok((Trajectory::new(time, us)?, Trajectory::new(time, uts)?))
}

/// Relative residual of the damped wave equation for the linear solution,
/// with time derivatives replaced by second-order central differences and
/// `Δ` applied spectrally.
pub fn pde_residual(u0: &Field, u1: &Field, time: TimeGrid) -> Result<f64> {
    if time.steps < 4 {
        return Err(Error::Domain("pde_residual needs at least 4 steps".into()));
    }
    if !u0.grid.same_as(&u1.grid) {
        return Err(Error::GridMismatch);
    }
    let a = u0.to_frequency();
    let b = u1.to_frequency();
    let grid = a.grid;
    let rho = grid.freq_norms();
    let h = time.dt();
    let phi = |t: f64| -> Vec<Complex64> {
        rho.iter()
            .enumerate()
            .map(|(i, &r)| {
                let s = Symbols::new(t, r);
                (s.d() + s.dtd()) * a.values[i] + s.d() * b.values[i]
            })
            .collect()
    };
    let mut prev = phi(time.node(0));
    let mut cur = phi(time.node(1));
    let mut worst: f64 = 0.0;
    for i in 1..time.steps {
        let next = phi(time.node(i + 1));
        let mut res = 0.0;
        let mut base = 0.0;
        for k in 0..cur.len() {
            let tt = (next[k] - 2.0 * cur[k] + prev[k]) / (h * h);
            let t1 = (next[k] - prev[k]) / (2.0 * h);
            let r = tt + rho[k] * rho[k] * cur[k] + t1;
            res += r.norm_sqr();
            base += cur[k].norm_sqr();
        }
        if base > 0.0 {
            worst = worst.max((res / base).sqrt());
        }
        prev = cur;
        cur = next;
    }
    Ok(worst)
}
