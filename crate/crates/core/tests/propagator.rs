use std::f64::consts::PI;

use approx::assert_relative_eq;
use dwlab_core::propagator::*;
use dwlab_core::spectral::*;
use dwlab_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `e^{−t/2} sin(t√κ)/√κ` through a complex square root; series near κ = 0.
fn kernel_oracle(t: f64, rho: f64) -> f64 {
    let kappa = rho * rho - 0.25;
    let l = if kappa.abs() * t * t < 1e-8 {
        t - kappa * t.powi(3) / 6.0
    } else {
        let w = Complex64::new(kappa, 0.0).sqrt();
        ((w * t).sin() / w).re
    };
    (-0.5 * t).exp() * l
}

/// Derivative of the oracle kernel by a complex-step-free central difference
/// of high order.
fn kernel_oracle_dt(t: f64, rho: f64) -> f64 {
    let h = 1e-4;
    (-kernel_oracle(t + 2.0 * h, rho) + 8.0 * kernel_oracle(t + h, rho) - 8.0 * kernel_oracle(t - h, rho)
        + kernel_oracle(t - 2.0 * h, rho))
        / (12.0 * h)
}

/// RK4 for `y'' + y' + ρ² y = 0`.
fn ode_oracle(t: f64, rho: f64, y0: f64, v0: f64) -> (f64, f64) {
    let steps = ((t / 1e-3).ceil() as usize).max(1);
    let h = t / steps as f64;
    let f = |y: f64, v: f64| (v, -v - rho * rho * y);
    let (mut y, mut v) = (y0, v0);
    for _ in 0..steps {
        let (a1, b1) = f(y, v);
        let (a2, b2) = f(y + 0.5 * h * a1, v + 0.5 * h * b1);
        let (a3, b3) = f(y + 0.5 * h * a2, v + 0.5 * h * b2);
        let (a4, b4) = f(y + h * a3, v + h * b3);
        y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    (y, v)
}

fn grid2() -> Grid {
    make_grid(2, 16, 2.0 * PI).unwrap()
}

#[test]
fn symbol_examples() {
    for t in [0.0, 0.3, 1.0, 7.5] {
        assert_relative_eq!(Symbols::new(t, 0.0).d(), 1.0 - (-t as f64).exp(), epsilon = 1e-15);
    }
    let m = multiplier_l(grid2(), 0.0);
    assert!(m.values.iter().all(|v| v.norm() == 0.0));
    for t in [0.1, 1.0, 3.0] {
        assert_relative_eq!(symbol_l(t, 0.5), t, max_relative = 1e-14);
        // both sides of the branch point at |4ρ² − 1| = 1e−6
        for sgn in [-1.0f64, 1.0] {
            let rho = (0.25 * (1.0 + sgn * 1e-6)).sqrt();
            assert_relative_eq!(symbol_l(t, rho), t, max_relative = 1e-6 * t * t);
        }
    }
    // continuity across the switch to the series
    for t in [0.5, 2.0, 10.0] {
        for e in [0.9e-5, 1.1e-5, 1e-3] {
            for sgn in [-1.0f64, 1.0] {
                let rho = (0.25 * (1.0 + sgn * e)).sqrt();
                let s = Symbols::new(t, rho);
                assert_relative_eq!(s.d(), kernel_oracle(t, rho), epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn symbols_match_ode_oracle() {
    for &rho in &[0.0, 0.1, 0.3, 0.49, 0.5, 0.51, 0.8, 2.0, 5.0] {
        for &t in &[0.25, 1.0, 4.0, 9.0] {
            let s = Symbols::new(t, rho);
            // 𝒟 solves the ODE with (0, 1) data
            let (y, v) = ode_oracle(t, rho, 0.0, 1.0);
            assert!((s.d() - y).abs() < 1e-9, "D rho={rho} t={t}");
            assert!((s.dtd() - v).abs() < 1e-9, "DtD rho={rho} t={t}");
            // ∂ₜ²𝒟 from the ODE itself
            assert!((s.dt2d() - (-v - rho * rho * y)).abs() < 1e-9, "Dt2D rho={rho} t={t}");
            assert!((s.dtd() - kernel_oracle_dt(t, rho)).abs() < 1e-8);
        }
    }
}

#[test]
fn propagator_examples() {
    let g = grid2();
    let f = random_field(g, Spectrum::WhiteBand { j_lo: -1, j_hi: 2 }, 3).unwrap();
    let z = apply_propagator(PropagatorKind::D, 0.0, &f).unwrap();
    assert!(z.max_abs() < 1e-15 * f.max_abs().max(1.0));
    let id = apply_propagator(PropagatorKind::DtD, 0.0, &f).unwrap();
    assert!(id.rel_l2_distance(&f).unwrap() < 1e-14);
    assert_eq!(id.rep, Rep::Physical);
    let low = Field::from_spectrum(g, |xi| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        if r <= 1.0 {
            c(1.0 + xi[0])
        } else {
            c(0.0)
        }
    });
    for t in [0.0, 1.3, 40.0] {
        let w = apply_propagator(PropagatorKind::HalfWave, t, &low).unwrap();
        assert!(w.is_zero() || w.max_abs() < 1e-15);
    }
    assert!(matches!(apply_propagator(PropagatorKind::D, -0.1, &f), Err(Error::Domain(_))));
    // half-wave is unitary on the high band and preserves the L² norm there
    let high = random_field(g, Spectrum::WhiteBand { j_lo: 1, j_hi: 2 }, 9).unwrap();
    let w = apply_propagator(PropagatorKind::HalfWave, 2.7, &high).unwrap();
    assert_relative_eq!(w.l2_norm(), high.l2_norm(), max_relative = 1e-13);
}

#[test]
fn linear_solution_examples() {
    let g = grid2();
    let u0 = random_field(g, Spectrum::WhiteBand { j_lo: -1, j_hi: 2 }, 1).unwrap();
    let u1 = random_field(g, Spectrum::WhiteBand { j_lo: -1, j_hi: 2 }, 2).unwrap();
    let s = linear_solution(0.0, &u0, &u1).unwrap();
    assert!(s.u.rel_l2_distance(&u0).unwrap() < 1e-14);
    assert!(s.ut.rel_l2_distance(&u1).unwrap() < 1e-14);

    let cst = Field::constant(g, c(2.5));
    let zero = Field::zeros(g, Rep::Physical);
    for t in [0.5, 3.0, 60.0] {
        let s = linear_solution(t, &cst, &zero).unwrap();
        assert!(s.u.rel_l2_distance(&cst).unwrap() < 1e-13);
        assert!(s.ut.max_abs() < 1e-13);
        let s = linear_solution(t, &zero, &cst).unwrap();
        let want = cst.scale_real(1.0 - (-t as f64).exp());
        assert!(s.u.rel_l2_distance(&want).unwrap() < 1e-13);
        let (y, _) = ode_oracle(t.min(10.0), 0.0, 0.0, 2.5);
        if t <= 10.0 {
            assert!((s.u.values[0].re - y).abs() < 1e-9);
        }
    }
    let other = make_grid(2, 32, 2.0 * PI).unwrap();
    assert!(matches!(
        linear_solution(1.0, &u0, &Field::zeros(other, Rep::Physical)),
        Err(Error::GridMismatch)
    ));
}

#[test]
fn linear_solution_per_mode_oracle() {
    let g = grid2();
    let k = [2i64, -1];
    let rho = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
    let w = Field::plane_wave(g, &k);
    let (a, b) = (0.7, -1.3);
    let s = linear_solution(2.2, &w.scale_real(a), &w.scale_real(b)).unwrap();
    let (y, v) = ode_oracle(2.2, rho, a, b);
    assert!(s.u.rel_l2_distance(&w.scale_real(y)).unwrap() < 1e-9);
    assert!(s.ut.rel_l2_distance(&w.scale_real(v)).unwrap() < 1e-9);
}

#[test]
fn semigroup_property() {
    let g = make_grid(3, 16, 8.0).unwrap();
    let u0 = random_field(g, Spectrum::WhiteBand { j_lo: -2, j_hi: 2 }, 11).unwrap();
    let u1 = random_field(g, Spectrum::WhiteBand { j_lo: -2, j_hi: 2 }, 12).unwrap();
    for (t1, t2) in [(0.3, 0.9), (2.0, 5.0), (10.0, 0.01)] {
        let mid = linear_solution(t1, &u0, &u1).unwrap();
        let two = linear_solution(t2, &mid.u, &mid.ut).unwrap();
        let one = linear_solution(t1 + t2, &u0, &u1).unwrap();
        assert!(two.u.rel_l2_distance(&one.u).unwrap() < 1e-10);
        assert!(two.ut.rel_l2_distance(&one.ut).unwrap() < 1e-10);
    }
}

#[test]
fn multiplier_bounds_and_no_overflow() {
    let g = make_grid(2, 64, 40.0).unwrap();
    let rho = g.freq_norms();
    for t in [1e-3, 0.1, 1.0, 10.0, 50.0, 100.0] {
        for &r in &rho {
            let s = Symbols::new(t, r);
            if r <= 0.5 {
                assert!(s.d().abs() <= t * (1.0 + 1e-14), "t={t} rho={r}");
            } else {
                let bound = 1.0 / (r * r - 0.25).sqrt();
                assert!(s.d().abs() <= bound * (1.0 + 1e-12), "t={t} rho={r}");
            }
        }
    }
    for &r in &[0.0, 1e-8, 0.2, 0.5, 0.7, 50.0] {
        let s = Symbols::new(1e4, r);
        assert!(s.d().is_finite() && s.dtd().is_finite() && s.dt2d().is_finite());
        for kind in [PropagatorKind::D, PropagatorKind::DtD, PropagatorKind::Dt2D, PropagatorKind::HalfWave] {
            assert!(symbol(kind, 1e4, r).norm().is_finite());
        }
    }
    // slowest mode decays to the heat-like value 1 at large t
    assert_relative_eq!(Symbols::new(1e4, 0.0).d(), 1.0, epsilon = 1e-15);
}

#[test]
fn pde_residual_examples() {
    let g = make_grid(2, 16, 8.0).unwrap();
    let zero = Field::zeros(g, Rep::Physical);
    assert_eq!(pde_residual(&zero, &zero, TimeGrid::new(1.0, 8).unwrap()).unwrap(), 0.0);
    let cst = Field::constant(g, c(1.7));
    assert!(pde_residual(&cst, &zero, TimeGrid::new(2.0, 16).unwrap()).unwrap() <= 1e-12);
    let u0 = random_field(g, Spectrum::WhiteBand { j_lo: -2, j_hi: 1 }, 5).unwrap();
    let u1 = random_field(g, Spectrum::WhiteBand { j_lo: -2, j_hi: 1 }, 6).unwrap();
    let r1 = pde_residual(&u0, &u1, TimeGrid::new(2.0, 64).unwrap()).unwrap();
    let r2 = pde_residual(&u0, &u1, TimeGrid::new(2.0, 128).unwrap()).unwrap();
    let ratio = r1 / r2;
    assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
    assert!(matches!(pde_residual(&u0, &u1, TimeGrid::new(1.0, 3).unwrap()), Err(Error::Domain(_))));
}

fn forcing_traj(g: Grid, time: TimeGrid, seed: u64) -> Trajectory {
    let a = random_field(g, Spectrum::WhiteBand { j_lo: -1, j_hi: 2 }, seed).unwrap();
    let b = random_field(g, Spectrum::WhiteBand { j_lo: -1, j_hi: 2 }, seed + 1).unwrap();
    Trajectory::from_fn(time, |t| a.scale_real((1.3 * t).cos()).add(&b.scale_real(t * t)).unwrap()).unwrap()
}

/// Direct `O(m²)` trapezoid sums of `𝒟(t_i − s_j)F(s_j)` and `∂ₜ𝒟(t_i − s_j)F(s_j)`.
fn direct_duhamel(f: &Trajectory) -> (Vec<Field>, Vec<Field>) {
    let time = f.time;
    let g = f.grid();
    let h = time.dt();
    let mut us = Vec::new();
    let mut uts = Vec::new();
    for i in 0..time.len() {
        let mut u = Field::zeros(g, Rep::Physical);
        let mut ut = Field::zeros(g, Rep::Physical);
        for j in 0..=i {
            let w = if i == 0 { 0.0 } else if j == 0 || j == i { 0.5 * h } else { h };
            let tau = time.node(i) - time.node(j);
            let a = apply_propagator(PropagatorKind::D, tau, &f.frames[j]).unwrap();
            let b = apply_propagator(PropagatorKind::DtD, tau, &f.frames[j]).unwrap();
            u = u.axpy(c(w), &a).unwrap();
            ut = ut.axpy(c(w), &b).unwrap();
        }
        us.push(u);
        uts.push(ut);
    }
    (us, uts)
}

#[test]
fn duhamel_matches_direct_sum() {
    let g = grid2();
    let time = TimeGrid::new(3.0, 24).unwrap();
    let f = forcing_traj(g, time, 40);
    let (u, ut) = duhamel_pair(&f, QuadratureRule::Trapezoid).unwrap();
    let (du, dut) = direct_duhamel(&f);
    assert!(u.frames[0].is_zero());
    for i in 1..time.len() {
        assert!(u.frames[i].rel_l2_distance(&du[i]).unwrap() < 1e-10, "U at {i}");
        assert!(ut.frames[i].rel_l2_distance(&dut[i]).unwrap() < 1e-10, "dU at {i}");
    }
    let zero = Trajectory::from_fn(time, |_| Field::zeros(g, Rep::Physical)).unwrap();
    assert!(duhamel(&zero).unwrap().frames.iter().all(|f| f.is_zero()));
    let other = make_grid(2, 32, 2.0 * PI).unwrap();
    let res = duhamel_stream(g, time, QuadratureRule::Trapezoid, |_| Ok(Field::zeros(other, Rep::Physical)), |_, _, _| Ok(()));
    assert!(matches!(res, Err(Error::GridMismatch)));
}

#[test]
fn duhamel_constant_forcing() {
    let g = grid2();
    let cval = 0.8;
    for m in [200usize, 400] {
        let time = TimeGrid::new(2.0, m).unwrap();
        let f = Trajectory::from_fn(time, |_| Field::constant(g, c(cval))).unwrap();
        let u = duhamel(&f).unwrap();
        for i in [m / 4, m / 2, m] {
            let t = time.node(i);
            let want = cval * (t - 1.0 + (-t as f64).exp());
            let got = u.frames[i].values[0].re;
            assert!((got - want).abs() < 2e-6 * (400.0 / m as f64).powi(2), "m={m} t={t}");
        }
    }
}

/// Exact `∫₀^t K(t−s) g(s) ds` by composite Simpson with many panels.
fn scalar_exact(t: f64, rho: f64, g: impl Fn(f64) -> f64, deriv: bool) -> f64 {
    let n = 20000;
    let h = t / n as f64;
    let k = |tau: f64| if deriv { kernel_oracle_dt(tau.max(2e-4), rho) } else { kernel_oracle(tau, rho) };
    let mut s = 0.0;
    for i in 0..=n {
        let x = i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * k(t - x) * g(x);
    }
    s * h / 3.0
}

/// Scalar trapezoid with the oracle kernel, same nodes as the field solver.
fn scalar_trapezoid(t: f64, m: usize, rho: f64, g: impl Fn(f64) -> f64) -> f64 {
    let h = t / m as f64;
    (0..=m)
        .map(|j| {
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            w * h * kernel_oracle(t - j as f64 * h, rho) * g(j as f64 * h)
        })
        .sum()
}

#[test]
fn duhamel_per_mode_oracle_and_order() {
    let g = grid2();
    let k = [3i64, 1];
    let rho = 10f64.sqrt();
    let w = Field::plane_wave(g, &k);
    let prof = |s: f64| (0.9 * s).sin() + 0.3;
    let t_end = 2.5;
    let exact = scalar_exact(t_end, rho, prof, false);
    let mut errs = Vec::new();
    for m in [40usize, 80, 160] {
        let time = TimeGrid::new(t_end, m).unwrap();
        let f = Trajectory::from_fn(time, |s| w.scale_real(prof(s))).unwrap();
        let u = duhamel(&f).unwrap();
        let quad = scalar_trapezoid(t_end, m, rho, prof);
        let want = w.scale_real(quad);
        assert!(u.frames[m].rel_l2_distance(&want).unwrap() < 1e-10);
        errs.push((quad - exact).abs());
    }
    for pair in errs.windows(2) {
        let r = pair[0] / pair[1];
        assert!((r - 4.0).abs() < 0.4, "order ratio {r}");
    }
}

#[test]
fn duhamel_derivative_and_midpoint() {
    let g = grid2();
    let k = [1i64, 1];
    let rho = 2f64.sqrt();
    let w = Field::plane_wave(g, &k);
    let prof = |s: f64| (-(s - 1.0) * (s - 1.0)).exp();
    let t_end = 2.0;
    let exact_u = scalar_exact(t_end, rho, prof, false);
    let exact_ut = scalar_exact(t_end, rho, prof, true);
    let scale = (g.len() as f64).sqrt();
    for rule in [QuadratureRule::Trapezoid, QuadratureRule::Midpoint] {
        let mut errs = Vec::new();
        for m in [50usize, 100, 200] {
            let time = TimeGrid::new(t_end, m).unwrap();
            let f = Trajectory::from_fn(time, |s| w.scale_real(prof(s))).unwrap();
            let mut last = (c(0.0), c(0.0));
            let idx = g.flat_index(&[g.index_of(1).unwrap(), g.index_of(1).unwrap()]);
            duhamel_stream(g, time, rule, |i| Ok(f.frames[i].clone()), |i, u, ut| {
                if i == m {
                    last = (u.values[idx] / scale, ut.values[idx] / scale);
                }
                Ok(())
            })
            .unwrap();
            assert!(last.0.im.abs() < 1e-12 && last.1.im.abs() < 1e-12);
            errs.push(((last.0.re - exact_u).abs(), (last.1.re - exact_ut).abs()));
        }
        for pair in errs.windows(2) {
            let r = pair[0].0 / pair[1].0;
            assert!((r - 4.0).abs() < 0.6, "{rule:?} U ratio {r}");
            let r = pair[0].1 / pair[1].1;
            assert!((r - 4.0).abs() < 0.6, "{rule:?} dU ratio {r}");
        }
    }
}

#[test]
fn trajectory_write_dir() {
    let g = make_grid(1, 8, 1.0).unwrap();
    let time = TimeGrid::new(1.0, 2).unwrap();
    let tr = Trajectory::from_fn(time, |t| Field::constant(g, c(t))).unwrap();
    let dir = tempfile::tempdir().unwrap();
    tr.write_dir(dir.path()).unwrap();
    let idx: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("index.json")).unwrap()).unwrap();
    assert_eq!(idx["t"].as_array().unwrap().len(), 3);
    let f = read_snapshot(&dir.path().join("frame_00002.dwf1")).unwrap();
    assert_eq!(f, tr.frames[2]);
    assert!(TimeGrid::new(1.0, 1).is_err());
    assert!(TimeGrid::new(0.0, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn symbols_agree_with_complex_formula(rho in 0.0f64..6.0, t in 0.0f64..30.0) {
        let s = Symbols::new(t, rho);
        let o = kernel_oracle(t, rho);
        prop_assert!((s.d() - o).abs() <= 1e-11 * (1.0 + o.abs()));
    }
}
