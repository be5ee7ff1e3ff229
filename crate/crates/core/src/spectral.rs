//! Periodic grids, unitary FFTs, Fourier multipliers and norms.
//!
//! The box is `[-L/2, L/2)^d` with `n` points per axis, `x_j = -L/2 + j L/n`.
//! Frequency coefficients follow the unitary convention
//! `f̂_k = M^{-1/2} Σ_j f(x_j) e^{-i ξ_k·x_j}` with `M = n^d`, so a plane wave
//! `e^{i ξ_k·x}` becomes a single coefficient `√M` and Plancherel is exact up
//! to the cell volume: `‖f‖_{L²}² = h^d Σ |f(x_j)|² = h^d Σ |f̂_k|²`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub n: usize,
    pub box_length: f64,
}

impl Grid {
    /// `n` must be even and at least 8. Powers of two are fastest but any even
    /// size works (the `d = 4` probes use `n = 24`).
    pub fn new(d: usize, n: usize, box_length: f64) -> Result<Grid> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::Domain(format!("dimension {d} outside 1..=4")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::Domain(format!("points per axis must be even and >= 8, got {n}")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::Domain(format!("box length must be positive, got {box_length}")));
        }
        Ok(Grid { d, n, box_length })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.d as i32)
    }

    /// Lattice spacing `2π/L` in frequency.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Radius of the largest ball contained in the frequency lattice, `πn/L`.
    pub fn axis_max_freq(&self) -> f64 {
        PI * self.n as f64 / self.box_length
    }

    /// Largest resolved `|ξ|`, `πn√d/L`.
    pub fn max_freq(&self) -> f64 {
        self.axis_max_freq() * (self.d as f64).sqrt()
    }

    /// Signed wavenumber of an axis index.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Axis index of a signed wavenumber, if representable.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let h = self.n as i64 / 2;
        if k < -h || k >= h {
            None
        } else {
            Some(k.rem_euclid(self.n as i64) as usize)
        }
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for a in (0..self.d).rev() {
            idx[a] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.d].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn wavevector(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.d {
            xi[a] = self.dk() * self.wavenumber(idx[a]) as f64;
        }
        xi
    }

    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.d {
            x[a] = -0.5 * self.box_length + idx[a] as f64 * self.spacing();
        }
        x
    }

    /// `|ξ_k|` for every lattice point, in storage order.
    pub fn freq_norms(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let dk = self.dk();
        let sq: Vec<f64> = (0..self.n).map(|j| (dk * self.wavenumber(j) as f64).powi(2)).collect();
        let mut idx = [0usize; MAX_DIM];
        for _ in 0..self.len() {
            let s: f64 = idx[..self.d].iter().map(|&j| sq[j]).sum();
            out.push(s.sqrt());
            self.advance(&mut idx);
        }
        out
    }

    /// Odometer increment over row-major multi-indices.
    pub fn advance(&self, idx: &mut [usize; MAX_DIM]) {
        for a in (0..self.d).rev() {
            idx[a] += 1;
            if idx[a] < self.n {
                return;
            }
            idx[a] = 0;
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.d == other.d && self.n == other.n && self.box_length == other.box_length
    }

    /// The grid with `factor` times as many points over the same box.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid {
            d: self.d,
            n: self.n * factor,
            box_length: self.box_length,
        }
    }
}

pub fn make_grid(d: usize, n: usize, box_length: f64) -> Result<Grid> {
    Grid::new(d, n, box_length)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rep {
    Physical,
    Frequency,
}

impl Rep {
    fn name(self) -> &'static str {
        match self {
            Rep::Physical => "physical",
            Rep::Frequency => "frequency",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub rep: Rep,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, rep: Rep) -> Field {
        Field {
            grid,
            rep,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: Grid, rep: Rep, values: Vec<Complex64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Field { grid, rep, values })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Field {
        let values = (0..grid.len())
            .map(|i| f(&grid.position(i)[..grid.d]))
            .collect();
        Field {
            grid,
            rep: Rep::Physical,
            values,
        }
    }

    /// Frequency field with coefficients `f(ξ_k)`.
    pub fn from_spectrum(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Field {
        let values = (0..grid.len())
            .map(|i| f(&grid.wavevector(i)[..grid.d]))
            .collect();
        Field {
            grid,
            rep: Rep::Frequency,
            values,
        }
    }

    pub fn constant(grid: Grid, c: Complex64) -> Field {
        Field {
            grid,
            rep: Rep::Physical,
            values: vec![c; grid.len()],
        }
    }

    /// The plane wave `e^{i ξ_k·x}` for a signed wavenumber multi-index.
    pub fn plane_wave(grid: Grid, k: &[i64]) -> Field {
        let dk = grid.dk();
        Field::from_fn(grid, |x| {
            let phase: f64 = (0..grid.d).map(|a| dk * k[a] as f64 * x[a]).sum();
            Complex64::from_polar(1.0, phase)
        })
    }

    pub fn transform(&self) -> Result<Field> {
        self.expect(Rep::Physical)?;
        let mut out = self.clone();
        fft_nd(&mut out.values, &self.grid, FftDirection::Forward);
        out.rep = Rep::Frequency;
        Ok(out)
    }

    pub fn inverse_transform(&self) -> Result<Field> {
        self.expect(Rep::Frequency)?;
        let mut out = self.clone();
        fft_nd(&mut out.values, &self.grid, FftDirection::Inverse);
        out.rep = Rep::Physical;
        Ok(out)
    }

    pub fn into_frequency(mut self) -> Field {
        if self.rep == Rep::Physical {
            fft_nd(&mut self.values, &self.grid, FftDirection::Forward);
            self.rep = Rep::Frequency;
        }
        self
    }

    pub fn into_physical(mut self) -> Field {
        if self.rep == Rep::Frequency {
            fft_nd(&mut self.values, &self.grid, FftDirection::Inverse);
            self.rep = Rep::Physical;
        }
        self
    }

    pub fn to_frequency(&self) -> Field {
        self.clone().into_frequency()
    }

    pub fn to_physical(&self) -> Field {
        self.clone().into_physical()
    }

    pub fn expect(&self, rep: Rep) -> Result<()> {
        if self.rep != rep {
            return Err(Error::RepresentationMismatch {
                expected: rep.name(),
                found: self.rep.name(),
            });
        }
        Ok(())
    }

    fn compatible(&self, other: &Field) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        if self.rep != other.rep {
            return Err(Error::RepresentationMismatch {
                expected: self.rep.name(),
                found: other.rep.name(),
            });
        }
        Ok(())
    }

    /// Discrete `L²` norm; identical in both representations.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|z| z.norm_sqr()).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// `L²` inner product `∫ f ḡ`.
    pub fn inner(&self, other: &Field) -> Result<Complex64> {
        self.compatible(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn scale(&self, c: Complex64) -> Field {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn scale_real(&self, c: f64) -> Field {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &Field) -> Result<Field> {
        self.compatible(other)?;
        let mut out = self.clone();
        out.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += c * b);
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &Field) -> Result<()> {
        self.compatible(other)?;
        self.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn conj(&self) -> Field {
        let mut out = self.to_physical();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Relative `L²` distance `‖self − other‖/‖other‖` (absolute if `other = 0`).
    pub fn rel_l2_distance(&self, other: &Field) -> Result<f64> {
        let a = self.clone().into_frequency();
        let b = other.clone().into_frequency();
        let diff = a.sub(&b)?.l2_norm();
        let base = b.l2_norm();
        Ok(if base > 0.0 { diff / base } else { diff })
    }

    /// Evaluates the trigonometric interpolant at an arbitrary point.
    pub fn evaluate_at(&self, x: &[f64]) -> Complex64 {
        let f = self.to_frequency();
        let g = &self.grid;
        let dk = g.dk();
        let axis_phase: Vec<Vec<Complex64>> = (0..g.d)
            .map(|a| {
                (0..g.n)
                    .map(|j| Complex64::from_polar(1.0, dk * g.wavenumber(j) as f64 * x[a]))
                    .collect()
            })
            .collect();
        let mut idx = [0usize; MAX_DIM];
        let mut acc = Complex64::new(0.0, 0.0);
        for v in &f.values {
            let mut ph = Complex64::new(1.0, 0.0);
            for a in 0..g.d {
                ph *= axis_phase[a][idx[a]];
            }
            acc += v * ph;
            g.advance(&mut idx);
        }
        acc / (g.len() as f64).sqrt()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unitary `d`-dimensional transform with the centred-box phase.
fn fft_nd(values: &mut [Complex64], grid: &Grid, dir: FftDirection) {
    let n = grid.n;
    let d = grid.d;
    let scale = 1.0 / (grid.len() as f64).sqrt();
    if dir == FftDirection::Inverse {
        apply_parity(values, grid, scale);
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir));
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf: Vec<Complex64> = Vec::new();
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(values, &mut scratch);
            continue;
        }
        buf.resize(n * stride, Complex64::new(0.0, 0.0));
        for block in values.chunks_mut(n * stride) {
            // block is n rows of `stride` entries; lines run down the columns
            for k in 0..n {
                for i in 0..stride {
                    buf[i * n + k] = block[k * stride + i];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                for i in 0..stride {
                    block[k * stride + i] = buf[i * n + k];
                }
            }
        }
    }
    if dir == FftDirection::Forward {
        apply_parity(values, grid, scale);
    }
}

/// Multiplies by `scale·(-1)^{Σ j_a}`, the phase of the shift to `x_0 = -L/2`.
fn apply_parity(values: &mut [Complex64], grid: &Grid, scale: f64) {
    let mut idx = [0usize; MAX_DIM];
    for v in values.iter_mut() {
        let parity: usize = idx[..grid.d].iter().sum();
        *v *= if parity % 2 == 0 { scale } else { -scale };
        grid.advance(&mut idx);
    }
}

/// A diagonal operator on the frequency lattice.
#[derive(Clone, Debug)]
pub struct Multiplier {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub label: String,
}

impl Multiplier {
    pub fn from_fn(grid: Grid, label: impl Into<String>, m: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|i| m(&grid.wavevector(i)[..grid.d]))
            .collect();
        Multiplier {
            grid,
            values,
            label: label.into(),
        }
    }

    /// A radial real symbol `m(|ξ|)`.
    pub fn radial(grid: Grid, label: impl Into<String>, m: impl Fn(f64) -> f64) -> Self {
        let values = grid
            .freq_norms()
            .into_iter()
            .map(|rho| Complex64::new(m(rho), 0.0))
            .collect();
        Multiplier {
            grid,
            values,
            label: label.into(),
        }
    }

    pub fn radial_complex(grid: Grid, label: impl Into<String>, m: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.freq_norms().into_iter().map(m).collect();
        Multiplier {
            grid,
            values,
            label: label.into(),
        }
    }

    pub fn identity(grid: Grid) -> Self {
        Self::radial(grid, "1", |_| 1.0)
    }

    /// `⟨ξ⟩^s = (1 + |ξ|²)^{s/2}`.
    pub fn bessel_potential(grid: Grid, s: f64) -> Self {
        Self::radial(grid, format!("<xi>^{s}"), |rho| (1.0 + rho * rho).powf(0.5 * s))
    }

    pub fn compose(&self, other: &Multiplier) -> Result<Multiplier> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Multiplier {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            label: format!("{}*{}", self.label, other.label),
        })
    }
}

/// Applies `m(∇)`; the result is returned in the input's representation.
pub fn apply_multiplier(m: &Multiplier, f: &Field) -> Result<Field> {
    if !m.grid.same_as(&f.grid) {
        return Err(Error::GridMismatch);
    }
    let rep = f.rep;
    let mut g = f.to_frequency();
    g.values.iter_mut().zip(&m.values).for_each(|(v, s)| *v *= s);
    Ok(match rep {
        Rep::Physical => g.into_physical(),
        Rep::Frequency => g,
    })
}

/// Multiplies the spectrum by a radial real symbol without building a
/// [`Multiplier`]. Output is in frequency representation.
pub fn apply_radial(f: &Field, m: impl Fn(f64) -> f64) -> Field {
    let mut g = f.to_frequency();
    for (v, rho) in g.values.iter_mut().zip(g.grid.freq_norms()) {
        *v *= m(rho);
    }
    g
}

/// `L^p` norm of a physical field; `p = ∞` is the max norm.
pub fn lebesgue_norm(f: &Field, r: Rational) -> Result<f64> {
    f.expect(Rep::Physical)?;
    if r < Rational::one() {
        return Err(Error::Domain(format!("Lebesgue exponent {r} below 1")));
    }
    Ok(lp_norm(&f.values, r.to_f64(), f.grid.cell_volume()))
}

/// `(h^d Σ |v|^p)^{1/p}`, or `max |v|` for `p = ∞`.
pub fn lp_norm(values: &[Complex64], p: f64, cell_volume: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    if p == 2.0 {
        let s: f64 = values.iter().map(|z| z.norm_sqr()).sum();
        return (s * cell_volume).sqrt();
    }
    let m = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    // scaled to avoid under/overflow for large p
    let s: f64 = values.iter().map(|z| (z.norm() / m).powf(p)).sum();
    m * (s * cell_volume).powf(1.0 / p)
}

/// `‖⟨∇⟩^s f‖_{L^p}`.
pub fn sobolev_norm(f: &Field, s: f64, p: Rational) -> Result<f64> {
    let g = if s == 0.0 {
        f.to_physical()
    } else {
        apply_radial(f, |rho| (1.0 + rho * rho).powf(0.5 * s)).into_physical()
    };
    lebesgue_norm(&g, p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Spectrum {
    /// Complex Gaussian coefficients on `2^{j_lo} < |ξ| ≤ 2^{j_hi}`.
    WhiteBand { j_lo: i32, j_hi: i32 },
    /// `L²`-normalized Gaussian `e^{-|x-x₀|²/(2σ²)}` at a random centre with a
    /// random global phase.
    GaussianBump { sigma: f64 },
    /// Phase-coherent packet with spectrum on `|ξ₁ - c| ≤ w/2`,
    /// `|ξ_⊥| ≤ √(c·w)/2`, centred at a random point.
    KnappSlab { width: f64, center_freq: f64 },
}

pub fn random_field(grid: Grid, spectrum: Spectrum, seed: u64) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spectrum {
        Spectrum::WhiteBand { j_lo, j_hi } => {
            if j_hi <= j_lo {
                return Err(Error::Domain(format!("empty band ({j_lo}, {j_hi}]")));
            }
            let lo = 2f64.powi(j_lo);
            let hi = 2f64.powi(j_hi);
            if hi > grid.axis_max_freq() {
                return Err(Error::Unresolvable(format!(
                    "band up to {hi} exceeds the lattice radius {}",
                    grid.axis_max_freq()
                )));
            }
            let mut f = Field::zeros(grid, Rep::Frequency);
            let mut count = 0;
            for (v, rho) in f.values.iter_mut().zip(grid.freq_norms()) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                if rho > lo && rho <= hi {
                    *v = Complex64::new(re, im);
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::Unresolvable(format!("no lattice point in band ({lo}, {hi}]")));
            }
            Ok(f.into_physical())
        }
        Spectrum::GaussianBump { sigma } => {
            if sigma * grid.axis_max_freq() < 8.0 || 16.0 * sigma > grid.box_length {
                return Err(Error::Unresolvable(format!(
                    "Gaussian width {sigma} not resolved on box {} with n = {}",
                    grid.box_length, grid.n
                )));
            }
            let mut c = [0.0; MAX_DIM];
            let room = 0.5 * grid.box_length - 8.0 * sigma;
            for a in c.iter_mut().take(grid.d) {
                *a = rng.gen_range(-room..=room) * 0.5;
            }
            let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
            let f = gaussian(grid, sigma, &c[..grid.d]).scale(phase);
            let norm = f.l2_norm();
            Ok(f.scale_real(1.0 / norm))
        }
        Spectrum::KnappSlab { width, center_freq } => {
            let perp = 0.5 * (center_freq * width).sqrt();
            if center_freq + 0.5 * width > grid.axis_max_freq() {
                return Err(Error::Unresolvable("Knapp slab beyond the lattice".into()));
            }
            let mut c = [0.0; MAX_DIM];
            for a in c.iter_mut().take(grid.d) {
                *a = rng.gen_range(-0.25..=0.25) * grid.box_length;
            }
            let f = Field::from_spectrum(grid, |xi| {
                let p2: f64 = xi[1..].iter().map(|v| v * v).sum();
                if (xi[0] - center_freq).abs() <= 0.5 * width && p2.sqrt() <= perp {
                    let phase: f64 = xi.iter().zip(&c).map(|(k, x)| k * x).sum();
                    Complex64::from_polar(1.0, -phase)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            if f.is_zero() {
                return Err(Error::Unresolvable("Knapp slab contains no lattice point".into()));
            }
            let norm = f.l2_norm();
            Ok(f.scale_real(1.0 / norm).into_physical())
        }
    }
}

/// Unnormalized Gaussian `e^{-|x-c|²/(2σ²)}`, periodized over neighbouring
/// cells so it is smooth on the torus.
pub fn gaussian(grid: Grid, sigma: f64, center: &[f64]) -> Field {
    let l = grid.box_length;
    Field::from_fn(grid, |x| {
        let mut v = 1.0;
        for a in 0..grid.d {
            let mut s = 0.0;
            for m in -1..=1 {
                let y = x[a] - center[a] + m as f64 * l;
                s += (-y * y / (2.0 * sigma * sigma)).exp();
            }
            v *= s;
        }
        Complex64::new(v, 0.0)
    })
}

/// `f(N x)`, by moving each coefficient from `k` to `N k`. Coefficients below
/// `1e-13` of the largest one are treated as round-off and dropped.
pub fn dilate(f: &Field, factor: i64) -> Result<Field> {
    if factor < 1 {
        return Err(Error::Domain("dilation factor must be a positive integer".into()));
    }
    let g = f.to_frequency();
    let grid = g.grid;
    let floor = 1e-13 * g.max_abs();
    let mut out = Field::zeros(grid, Rep::Frequency);
    for (flat, v) in g.values.iter().enumerate() {
        if v.norm() <= floor {
            continue;
        }
        let idx = grid.multi_index(flat);
        let mut target = [0usize; MAX_DIM];
        for a in 0..grid.d {
            let k = grid.wavenumber(idx[a]) * factor;
            target[a] = grid.index_of(k).ok_or_else(|| {
                Error::Unresolvable(format!("dilation by {factor} pushes wavenumber {k} off the lattice"))
            })?;
        }
        out.values[grid.flat_index(&target)] = *v;
    }
    Ok(match f.rep {
        Rep::Physical => out.into_physical(),
        Rep::Frequency => out,
    })
}

/// The same trigonometric polynomial sampled on a grid `factor` times finer.
/// Returned in physical representation.
pub fn upsample(f: &Field, factor: usize) -> Field {
    let g = f.to_frequency();
    let fine = g.grid.refined(factor);
    let mut out = Field::zeros(fine, Rep::Frequency);
    let s = (fine.len() as f64 / g.grid.len() as f64).sqrt();
    let mut idx = [0usize; MAX_DIM];
    let mut target = [0usize; MAX_DIM];
    for v in &g.values {
        for a in 0..g.grid.d {
            let k = g.grid.wavenumber(idx[a]);
            target[a] = fine.index_of(k).expect("refined lattice contains coarse lattice");
        }
        out.values[fine.flat_index(&target)] = v * s;
        g.grid.advance(&mut idx);
    }
    out.into_physical()
}

/// Projects a fine-grid field onto the lattice of `coarse` (frequency
/// truncation). Returned in physical representation.
pub fn truncate_to(f: &Field, coarse: Grid) -> Result<Field> {
    let g = f.to_frequency();
    let fine = g.grid;
    if fine.d != coarse.d || fine.box_length != coarse.box_length || fine.n < coarse.n {
        return Err(Error::GridMismatch);
    }
    let s = (coarse.len() as f64 / fine.len() as f64).sqrt();
    let mut out = Field::zeros(coarse, Rep::Frequency);
    let mut idx = [0usize; MAX_DIM];
    let mut src = [0usize; MAX_DIM];
    for v in out.values.iter_mut() {
        for a in 0..coarse.d {
            src[a] = fine.index_of(coarse.wavenumber(idx[a])).expect("coarse inside fine");
        }
        *v = g.values[fine.flat_index(&src)] * s;
        coarse.advance(&mut idx);
    }
    Ok(out.into_physical())
}

/// Dealiased pointwise product `P(f·g)`: both factors are evaluated on a grid
/// refined by `pad`, multiplied, and the product truncated back.
pub fn product(f: &Field, g: &Field, pad: usize) -> Result<Field> {
    if !f.grid.same_as(&g.grid) {
        return Err(Error::GridMismatch);
    }
    let a = upsample(f, pad);
    let b = upsample(g, pad);
    let mut c = a;
    c.values.iter_mut().zip(&b.values).for_each(|(x, y)| *x *= y);
    truncate_to(&c, f.grid)
}

/// Dealiased pointwise map `P(op(f))`.
pub fn pointwise(f: &Field, pad: usize, op: impl Fn(Complex64) -> Complex64) -> Field {
    let mut a = upsample(f, pad);
    a.values.iter_mut().for_each(|v| *v = op(*v));
    truncate_to(&a, f.grid).expect("same box")
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"DWF1";

/// Writes a field in the `DWF1` little-endian snapshot format.
pub fn write_snapshot(path: &Path, f: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(f.grid.d as u32).to_le_bytes())?;
    w.write_all(&(f.grid.n as u32).to_le_bytes())?;
    w.write_all(&f.grid.box_length.to_le_bytes())?;
    w.write_all(&[match f.rep {
        Rep::Physical => 0u8,
        Rep::Frequency => 1u8,
    }])?;
    for v in &f.values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Field> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_snapshot(&bytes)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Field> {
    const HEADER: usize = 4 + 4 + 4 + 8 + 1;
    if bytes.len() < HEADER || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Format("missing DWF1 magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let d = u32_at(4) as usize;
    let n = u32_at(8) as usize;
    let l = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let rep = match bytes[20] {
        0 => Rep::Physical,
        1 => Rep::Frequency,
        b => return Err(Error::Format(format!("unknown representation tag {b}"))),
    };
    let grid = Grid::new(d, n, l).map_err(|e| Error::Format(e.to_string()))?;
    let expected = HEADER + 16 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "length {} does not match header (expected {expected})",
            bytes.len()
        )));
    }
    let values = bytes[HEADER..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(Field { grid, rep, values })
}
