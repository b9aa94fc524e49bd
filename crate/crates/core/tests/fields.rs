use betaprufer::fields::*;
use betaprufer::noise::*;
use betaprufer::prufer::phase_trajectory;
use betaprufer::specfun::{joukowsky, SpectrumGeometry};
use betaprufer::stats::complex_cov;
use betaprufer::Complex64;
use std::f64::consts::PI;

fn stream(beta: f64, seed: u64, rep: u64) -> NoiseStream {
    NoiseStream::new(NoiseParams::new(beta, seed), rep)
}

#[test]
fn fields_vanish_without_noise() {
    let run = field_run(&stream(f64::INFINITY, 0, 0), 0.4, 5000, 1.0).unwrap();
    assert_eq!(run.ledger.g, Complex64::new(0.0, 0.0));
    assert_eq!(run.ledger.w, Complex64::new(0.0, 0.0));
    assert_eq!(run.ledger.m, Complex64::new(0.0, 0.0));
}

#[test]
fn hyperbolic_part_is_real() {
    for case in 0..100u64 {
        let z = 0.2 + 0.6 * (case as f64 / 100.0);
        let z = if case % 2 == 0 { z } else { -z };
        let run = field_run(&stream(2.0, case, 0), z, 2000, 1.0).unwrap();
        assert_eq!(run.ledger.g_turning.im, 0.0, "case {case}");
        assert_eq!(run.ledger.w_turning, Complex64::new(0.0, 0.0));
    }
}

#[test]
fn reflected_stream_conjugates_g() {
    for seed in 0..5 {
        let s = stream(1.0, seed, 0);
        let a = field_run(&s, 0.35, 20_000, 1.0).unwrap().ledger;
        let b = field_run(&s.sign_flipped(), -0.35, 20_000, 1.0).unwrap().ledger;
        assert!((b.g - a.g.conj()).norm() < 1e-10, "{} vs {}", b.g, a.g);
    }
}

#[test]
fn m_is_g_plus_conjugate_w() {
    let l = field_run(&stream(2.0, 1, 0), 0.1, 10_000, 1.0).unwrap().ledger;
    assert_eq!(l.m, l.g + l.w.conj());
}

#[test]
fn stored_and_streaming_paths_agree() {
    let s = stream(2.0, 9, 3);
    let (z, n) = (0.3, 8000);
    let run = field_run(&s, z, n, 1.0).unwrap();
    let acc = FieldAccumulator::new(z, n, 1.0, 2.0);
    let traj = phase_trajectory(&s, z, n, Some(acc.phase_start())).unwrap();
    let l = accumulate_fields(&s, z, n, 1.0, &traj).unwrap();
    assert!((l.m - run.ledger.m).norm() < 1e-9);
    assert!((traj.psi_final() - run.psi).norm() < 1e-9);
    // other stream or other point is rejected
    assert!(accumulate_fields(&stream(2.0, 10, 3), z, n, 1.0, &traj).is_err());
    assert!(accumulate_fields(&s, 0.31, n, 1.0, &traj).is_err());
}

#[test]
fn g_bracket_global_limit() {
    let (z, x, n) = (0.5, 0.2, 1_000_000);
    let (b, _) = bracket_g_pair(z, x, n, 1.0);
    let want = -2.0 * (1.0 - joukowsky(z) * joukowsky(x)).ln();
    assert!((b - want).norm() < 0.1, "{b} vs {want}");
}

#[test]
fn g_bracket_up_to_turning_point() {
    let (z, n) = (0.5, 1_000_000);
    let g = SpectrumGeometry::new(n, z);
    let (_, bar) = bracket_g_range(z, z, n, 1.0, 1, g.n0);
    assert!((bar.re - 2.0 * (g.l / 2.0).ln()).abs() < 0.1, "{bar}");
}

#[test]
fn g_bracket_imaginary_part_beyond_window() {
    let n = 1_000_000;
    for z in [0.5f64, -0.5] {
        let g = SpectrumGeometry::new(n, z);
        let (b, _) = bracket_g_range(z, z, n, 1.0, g.n_t(1.0) + 1, n);
        let want = z.signum() * PI - 2.0 * z.asin();
        assert!((b.im.abs() - want.abs()).abs() < 0.05, "z={z}: {b}");
    }
}

#[test]
fn g_bracket_resummation_is_stable() {
    let terms: Vec<_> = bracket_g_terms(0.3, -0.1, 200_000, 1.0, 1..=200_000).collect();
    let fwd: Complex64 = bracket_g_pair(0.3, -0.1, 200_000, 1.0).0;
    let mut rev = Complex64::new(0.0, 0.0);
    let mut c = Complex64::new(0.0, 0.0);
    for (t, _) in terms.iter().rev() {
        let y = t - c;
        let s = rev + y;
        c = (s - rev) - y;
        rev = s;
    }
    assert!((fwd - rev).norm() < 1e-12);
}

#[test]
fn w_bracket_is_harmonic_sum() {
    let (z, n, t) = (0.5, 1_000_000, 1.0);
    let g = SpectrumGeometry::new(n, z);
    let sum = bracket_wwbar_sum(z, n, t);
    let want = ((1.0 - z * z) * n as f64 / (t * g.l)).ln();
    assert!((sum - want).abs() < 0.2, "{sum} vs {want}");
    let run = field_run(&stream(2.0, 1, 0), z, 100_000, t).unwrap();
    let (wwbar, _) = bracket_w(&run.ledger);
    assert!((wwbar - bracket_wwbar_sum(z, 100_000, t)).abs() < 1e-9);
}

#[test]
fn w_bracket_nearly_empty_at_edge() {
    let n = 1_000_000u64;
    let z = 1.0 - (n as f64).powf(-2.0 / 3.0);
    assert!(bracket_wwbar_sum(z, n, 1.0) <= 2.0);
}

#[test]
fn w_pseudo_bracket_cancels() {
    let (z, n) = (0.5, 1_000_000);
    for rep in 0..100 {
        let run = field_run(&stream(2.0, 31, rep), z, n, 1.0).unwrap();
        let (_, ww) = bracket_w(&run.ledger);
        assert!(ww.norm() <= 3.0, "rep {rep}: {ww}");
    }
}

#[test]
fn g_increments_are_centred() {
    let (z, n) = (0.4, 10_000u64);
    for k in [3u64, 800, 1599, 5000, 10_000] {
        let s = sigma(k, z, n);
        let xs: Vec<Complex64> = (0..100_000)
            .map(|r| stream(2.0, 5, r).z_field(k, z, n) / s)
            .collect();
        let mean: Complex64 = xs.iter().sum::<Complex64>() / xs.len() as f64;
        let var: f64 = xs.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / xs.len() as f64;
        let se = (var / xs.len() as f64).sqrt();
        assert!(mean.norm() < 4.0 * se, "k={k}: {mean}");
    }
}

fn empirical_cov(z: f64, x: f64, n: u64, reps: u64) -> (Complex64, Complex64) {
    let mut mz = Vec::new();
    let mut mx = Vec::new();
    for r in 0..reps {
        let s = stream(2.0, 404, r);
        mz.push(field_run(&s, z, n, 1.0).unwrap().ledger.m);
        mx.push(field_run(&s, x, n, 1.0).unwrap().ledger.m);
    }
    complex_cov(&mz, &mx).unwrap()
}

#[test]
fn covariance_matches_log_correlated_theory() {
    let n = 10_000;
    for (z, x) in [(0.3, 0.1), (0.5, -0.2), (0.2, 0.6)] {
        let (pseudo, herm) = empirical_cov(z, x, n, 1000);
        let th = covariance_theory(z, x, n);
        assert_eq!(th.regime, Regime::Global);
        let (pp, ph) = th.predicted();
        assert!((pseudo - pp).norm() < 1.0, "({z},{x}) {pseudo} vs {pp}");
        assert!((herm - ph).norm() < 1.0, "({z},{x}) {herm} vs {ph}");
    }
}

#[test]
#[ignore = "about fifteen minutes on one core; run with --ignored"]
fn covariance_matches_theory_at_scale() {
    let n = 100_000;
    for (z, x) in [(0.3, 0.1), (0.5, -0.2), (0.2, 0.6)] {
        let (pseudo, herm) = empirical_cov(z, x, n, 4000);
        let (pp, ph) = covariance_theory(z, x, n).predicted();
        assert!((pseudo - pp).norm() < 1.0 && (herm - ph).norm() < 1.0);
    }
}

#[test]
fn regime_boundary_classification() {
    let n = 1_000_000u64;
    let z = 0.4;
    let b = covariance_theory(z, z, n).boundary;
    for i in 1..=20 {
        let d = b * 10f64.powf((i as f64 - 10.5) / 3.0);
        let th = covariance_theory(z, z - d, n);
        let expect = if d > b { Regime::Global } else { Regime::Local };
        assert_eq!(th.regime, expect, "d/b = {}", d / b);
    }
}
