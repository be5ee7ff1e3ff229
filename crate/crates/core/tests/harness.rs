use std::f64::consts::PI;

use dwlab_core::exponents::{wave_endpoint_pair, PairSpec};
use dwlab_core::harness::*;
use dwlab_core::lp_besov::{lp_project, LpVariant};
use dwlab_core::propagator::{PropagatorKind, TimeGrid};
use dwlab_core::spectral::*;
use dwlab_core::{rat, Error, Rational};
use num_complex::Complex64;
use proptest::prelude::*;

/// RK4 for `m'' + m' + ρ²m = a(t)` from rest; returns `(m, m')` at the nodes.
fn forced_ode(rho: f64, a: impl Fn(f64) -> f64, t_end: f64, nodes: usize) -> Vec<(f64, f64)> {
    let sub = 64;
    let h = t_end / ((nodes - 1) * sub) as f64;
    let rhs = |t: f64, m: f64, v: f64| (v, a(t) - v - rho * rho * m);
    let (mut m, mut v, mut t) = (0.0, 0.0, 0.0);
    let mut out = vec![(0.0, 0.0)];
    for _ in 1..nodes {
        for _ in 0..sub {
            let k1 = rhs(t, m, v);
            let k2 = rhs(t + h / 2.0, m + h / 2.0 * k1.0, v + h / 2.0 * k1.1);
            let k3 = rhs(t + h / 2.0, m + h / 2.0 * k2.0, v + h / 2.0 * k2.1);
            let k4 = rhs(t + h, m + h * k3.0, v + h * k3.1);
            m += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            t += h;
        }
        out.push((m, v));
    }
    out
}

#[test]
fn duhamel_norms_match_scalar_ode() {
    let g = make_grid(2, 16, 2.0 * PI).unwrap();
    let horizon = 3.0;
    let time = TimeGrid::new(horizon, 600).unwrap();
    let profile: Vec<f64> = time.nodes().iter().map(|&t| time_profile(t, horizon)).collect();
    let vol_sqrt = g.volume().sqrt();
    for k in [[0i64, 0], [1, 0], [2, 3]] {
        let rho = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let f = Field::plane_wave(g, &k);
        let (u, ut) = duhamel_norms(&f, time, &profile, Rational::int(2), true).unwrap();
        let want = forced_ode(rho, |t| time_profile(t, horizon), horizon, time.len());
        for (i, (m, v)) in want.iter().enumerate() {
            let scale = f.l2_norm() / vol_sqrt;
            assert!((u[i] / scale - m.abs() * vol_sqrt).abs() < 1e-4, "k={k:?} i={i}");
            assert!((ut[i] / scale - v.abs() * vol_sqrt).abs() < 1e-4, "k={k:?} i={i}");
        }
    }
    let short = vec![0.0; 3];
    assert!(duhamel_norms(&Field::plane_wave(g, &[1, 0]), time, &short, Rational::int(2), false).is_err());
}

#[test]
fn time_profile_shape() {
    assert_eq!(time_profile(0.0, 6.0), 0.0);
    assert!((time_profile(3.0, 6.0) - 1.0).abs() < 1e-15);
    assert!(time_profile(6.0, 6.0).abs() < 1e-30);
}

#[test]
fn degenerate_samples_are_flagged() {
    let s = Sample::new(0, &[("N", 1.0)], 0.0, 0.0);
    assert!(s.flag.as_deref().unwrap().starts_with("degenerate"));
    assert!(!s.usable());
    let ok = Sample::new(1, &[("N", 2.0)], 1.0, 4.0);
    assert_eq!(ok.ratio, 0.25);
    assert!(ok.usable());
    assert_eq!(ok.param("N"), 2.0);
}

fn synthetic(slope: f64) -> Vec<Sample> {
    let mut v = Vec::new();
    for (i, n) in [1.0f64, 2.0, 4.0].iter().enumerate() {
        for k in 0..3 {
            let ratio = n.powf(slope) * (1.0 - 0.01 * k as f64);
            v.push(Sample::new(3 * i + k, &[("N", *n)], ratio, 1.0));
        }
    }
    v
}

#[test]
fn judge_is_pure_in_samples_and_tolerances() {
    let rep = VerificationReport::new("inhomogeneous", "abc".into(), 7, synthetic(0.05), &[("trend_slope_max", 0.1)]);
    assert!(rep.pass);
    let fit = rep.fit.unwrap();
    assert!((fit.slope - 0.05).abs() < 1e-12);
    let mut tight = rep.clone();
    tight.tolerances.insert("trend_slope_max".into(), 0.01);
    tight.judge();
    assert!(!tight.pass);
    let mut again = rep.clone();
    again.judge();
    assert_eq!(again, rep);

    let ctrl = VerificationReport::new("x", "abc".into(), 7, synthetic(0.3), &[("trend_slope_min", 0.15)]);
    assert!(ctrl.pass);
    let flat = VerificationReport::new("x", "abc".into(), 7, synthetic(0.0), &[("trend_slope_min", 0.15)]);
    assert!(!flat.pass);

    // a degenerate sample is recorded but excluded from the fit
    let mut samples = synthetic(0.05);
    samples.push(Sample::new(99, &[("N", 8.0)], 0.0, 0.0));
    let rep2 = VerificationReport::new("x", "abc".into(), 7, samples, &[("trend_slope_max", 0.1)]);
    assert_eq!(rep2.samples.len(), 10);
    assert!((rep2.fit.unwrap().slope - 0.05).abs() < 1e-12);

    let rows = rep.csv_records();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][0], "inhomogeneous");
    assert_eq!(rows[0][2], r#"{"N":1.0}"#);
    assert_eq!(rows[4][5].parse::<f64>().unwrap(), rep.samples[4].ratio);
}

#[test]
fn digest_is_reproducible() {
    let g = make_grid(2, 16, 2.0 * PI).unwrap();
    let a = ProbeSetup::new(g, 1.0, 10, 2, 5, vec![1.0, 2.0]);
    let mut b = a.clone();
    assert_eq!(config_digest(&a), config_digest(&b));
    assert_eq!(config_digest(&a).len(), 64);
    b.seed = 6;
    assert_ne!(config_digest(&a), config_digest(&b));
}

#[test]
fn tail_indicator_examples() {
    let g = make_grid(2, 32, 2.0 * PI).unwrap();
    assert_eq!(tail_indicator(&Field::plane_wave(g, &[1, 0])), 0.0);
    assert!(tail_indicator(&Field::plane_wave(g, &[16, 16])) > 0.5);
    assert_eq!(tail_indicator(&Field::zeros(g, Rep::Physical)), 0.0);
}

#[test]
fn mexican_hat_family_scales() {
    let g = make_grid(2, 64, 2.0 * PI).unwrap();
    let f = mexican_hat_family(g, 2.0, 11, 3);
    assert_eq!(f, mexican_hat_family(g, 2.0, 11, 3));
    assert_ne!(f, mexican_hat_family(g, 2.0, 12, 3));
    // real data, no zero mode
    assert!(f.to_physical().values.iter().all(|v| v.im.abs() < 1e-12 * f.max_abs()));
    assert!(f.to_frequency().values[0].norm() < 1e-14);
    assert!(tail_indicator(&f) < TAIL_GUARD);
}

#[test]
fn kernel_decay_targets() {
    let k = KernelDecayConfig::new(3, Rational::inf());
    assert_eq!(k.targets(), (-1.0, 3.0));
    assert_eq!(KernelDecayConfig::new(3, Rational::int(4)).targets(), (-0.5, 1.5));
    assert_eq!(KernelDecayConfig::new(2, Rational::int(4)).targets(), (-0.25, 1.0));
    assert_eq!(KernelDecayConfig::new(2, Rational::int(2)).targets(), (0.0, 0.0));
}

#[test]
fn kernel_decay_radial_route() {
    for r in [Rational::inf(), Rational::int(4)] {
        let mut cfg = KernelDecayConfig::new(3, r);
        cfg.scales = vec![4.0, 8.0];
        cfg.tn = vec![10.0, 30.0, 100.0];
        let rep = verify_kernel_decay(&cfg).unwrap();
        assert!(rep.pass, "{:?}", rep.fits);
        assert!(rep.samples.iter().all(|s| s.flag.is_none()));
        assert_eq!(rep.experiment, "kernel_decay");
        assert_eq!(rep, verify_kernel_decay(&cfg).unwrap());
    }
    // unitary at r = 2
    let mut cfg = KernelDecayConfig::new(3, Rational::int(2));
    cfg.scales = vec![4.0];
    cfg.tn = vec![10.0, 100.0];
    let rep = verify_kernel_decay(&cfg).unwrap();
    for s in &rep.samples {
        assert!((s.ratio - 1.0).abs() < 1e-3, "{}", s.ratio);
    }
    assert!(verify_kernel_decay(&KernelDecayConfig::new(5, Rational::inf())).is_err());
}

fn setup(d: usize, n: usize, scales: Vec<f64>) -> ProbeSetup {
    ProbeSetup::new(make_grid(d, n, 2.0 * PI).unwrap(), 2.0, 40, 2, 3, scales)
}

#[test]
fn homogeneous_energy_pair() {
    let pair = PairSpec::new(2, Rational::inf(), Rational::int(2)).unwrap();
    let cfg = HomogeneousConfig { setup: setup(2, 32, vec![1.0, 2.0, 4.0]), pair, kind: PropagatorKind::D };
    let rep = verify_homogeneous(&cfg).unwrap();
    assert_eq!(rep.samples.len(), 6);
    // 𝒟 is bounded by ⟨ξ⟩^{-1} times sup over the lattice of ⟨ρ⟩|𝒟(t,ρ)|
    let mut bound: f64 = 0.0;
    for &rho in &cfg.setup.grid.freq_norms() {
        for i in 0..=400 {
            let t = 2.0 * i as f64 / 400.0;
            bound = bound.max((1.0 + rho * rho).sqrt() * dwlab_core::propagator::Symbols::new(t, rho).d().abs());
        }
    }
    assert!(rep.max_ratio <= bound * (1.0 + 1e-9));
    assert!(rep.pass, "{:?}", rep.fit);
    let bad = HomogeneousConfig { kind: PropagatorKind::HalfWave, ..cfg.clone() };
    assert!(verify_homogeneous(&bad).is_err());
    let wrong_d = HomogeneousConfig { pair: PairSpec::new(3, Rational::inf(), Rational::int(2)).unwrap(), ..cfg };
    assert!(matches!(verify_homogeneous(&wrong_d), Err(Error::Domain(_))));
}

#[test]
fn homogeneous_rejects_inadmissible() {
    let pair = PairSpec::new(3, Rational::int(2), Rational::int(4)).unwrap();
    let ok = dwlab_core::exponents::check_homogeneous(&pair).admissible;
    let cfg = HomogeneousConfig { setup: setup(3, 16, vec![1.0]), pair, kind: PropagatorKind::D };
    if !ok {
        assert!(matches!(verify_homogeneous(&cfg), Err(Error::Inadmissible(_))));
    }
    let far = PairSpec::new(3, Rational::int(2), Rational::int(3)).unwrap();
    assert!(!dwlab_core::exponents::check_homogeneous(&far).admissible);
    let cfg = HomogeneousConfig { pair: far, ..cfg };
    assert!(matches!(verify_homogeneous(&cfg), Err(Error::Inadmissible(_))));
}

#[test]
fn inhomogeneous_small_run() {
    let e = wave_endpoint_pair(4).unwrap();
    let mut s = ProbeSetup::new(make_grid(4, 8, 2.0 * PI).unwrap(), 1.0, 20, 1, 9, vec![1.0, 2.0]);
    s.bumps = 1;
    let cfg = InhomogeneousConfig { setup: s, p: e, pt: e, endpoint: true, loss_shift: 0.0, with_dt: true };
    let reps = verify_inhomogeneous(&cfg, &[-0.3], 0.15).unwrap();
    assert_eq!(reps.main.samples.len(), 2);
    assert_eq!(reps.controls.len(), 1);
    assert_eq!(reps.main.tolerances["loss"], 2.0 / 3.0);
    assert_eq!(reps.dt.as_ref().unwrap().tolerances["loss"], 5.0 / 3.0);
    assert!((reps.controls[0].tolerances["loss"] - (2.0 / 3.0 - 0.3)).abs() < 1e-15);
    // the control shares left-hand sides with the main report
    for (a, b) in reps.main.samples.iter().zip(&reps.controls[0].samples) {
        assert_eq!(a.lhs, b.lhs);
        assert!(b.rhs < a.rhs);
    }
    assert_eq!(reps, verify_inhomogeneous(&cfg, &[-0.3], 0.15).unwrap());
    let no_end = InhomogeneousConfig { endpoint: false, ..cfg };
    assert!(matches!(verify_inhomogeneous(&no_end, &[], 0.15), Err(Error::Inadmissible(_))));
}

#[test]
fn low_frequency_run() {
    let pair = PairSpec::new(2, Rational::inf(), Rational::int(2)).unwrap();
    let mut s = ProbeSetup::new(make_grid(2, 32, 16.0 * PI).unwrap(), 2.0, 40, 2, 1, vec![0.5, 1.0, 2.0]);
    s.bumps = 1;
    let cfg = LowFrequencyConfig { setup: s, p: pair, pt: pair };
    let rep = verify_low_frequency(&cfg).unwrap();
    assert_eq!(rep.samples.len(), 6);
    assert!(rep.samples.iter().all(|s| s.flag.is_none()));
    assert!(rep.pass, "{:?}", rep.fit);
    // a forcing with no low modes has a vanishing projection
    let g = make_grid(2, 32, 2.0 * PI).unwrap();
    let high = Field::plane_wave(g, &[4, 0]);
    assert!(lp_project(LpVariant::Leq(0), &high).unwrap().max_abs() < 1e-15);
    let bad_r = PairSpec::new(2, Rational::int(4), Rational::int(4)).unwrap();
    let cfg2 = LowFrequencyConfig { p: pair, pt: bad_r, ..cfg };
    assert!(verify_low_frequency(&cfg2).is_err());
}

#[test]
fn besov_transfer_run() {
    let pair = PairSpec::new(2, Rational::inf(), Rational::int(2)).unwrap();
    let cfg = BesovTransferConfig { setup: setup(2, 32, vec![1.0, 2.0, 4.0]), pair, s: 0.5 };
    let rep = verify_besov_transfer(&cfg).unwrap();
    assert_eq!(rep.samples.len(), 6);
    assert!(rep.max_ratio.is_finite() && rep.max_ratio > 0.0);
    assert!(rep.pass, "{:?}", rep.fit);
    assert_eq!(rep.tolerances["loss"], -1.0);
    let _ = rat(1, 2);
}

#[test]
fn zero_forcing_is_degenerate() {
    let g = make_grid(2, 16, 2.0 * PI).unwrap();
    let time = TimeGrid::new(1.0, 10).unwrap();
    let prof = vec![1.0; time.len()];
    let (u, _) = duhamel_norms(&Field::zeros(g, Rep::Physical), time, &prof, Rational::int(2), false).unwrap();
    assert!(u.iter().all(|v| *v == 0.0));
    let _ = Complex64::new(0.0, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn ratio_is_lhs_over_rhs(lhs in 0.0f64..10.0, rhs in 1e-6f64..10.0) {
        let s = Sample::new(0, &[], lhs, rhs);
        prop_assert_eq!(s.ratio, lhs / rhs);
        prop_assert!(s.flag.is_none());
    }

    #[test]
    fn family_amplitude_homogeneous(seed in 0u64..1000) {
        let g = make_grid(2, 16, 2.0 * PI).unwrap();
        let f = mexican_hat_family(g, 1.0, seed, 2);
        let t = tail_indicator(&f);
        prop_assert!(t.is_finite() && t >= 0.0 && t <= 1.0);
        prop_assert!((tail_indicator(&f.scale_real(3.0)) - t).abs() < 1e-12);
    }
}
