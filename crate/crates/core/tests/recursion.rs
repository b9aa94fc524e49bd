//! Characteristic polynomials, Sturm counts and the Prüfer phase.

use betaprufer::charpoly::*;
use betaprufer::noise::*;
use betaprufer::prufer::*;
use betaprufer::specfun::{hermite_normalized, semicircle};
use betaprufer::stats::SampleSummary;
use betaprufer::Complex64;
use proptest::prelude::*;

fn stream(beta: f64, seed: u64) -> NoiseStream {
    NoiseStream::new(NoiseParams::new(beta, seed), 0)
}

/// Eigenvalues `≥ z` of the scaled `n × n` minor via the inertia of `J − z`.
fn inertia_count(s: &NoiseStream, n: usize, n_size: u64, z: f64) -> u64 {
    let (d, c) = jacobi_minor(s, n, n_size);
    let mut below = 0;
    let mut q = 1.0;
    for i in 0..n {
        q = d[i] - z - if i == 0 { 0.0 } else { c[i - 1] / q };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            below += 1;
        }
    }
    (n - below) as u64
}

#[test]
fn chi_square_and_normal_moments() {
    for beta in [0.5, 2.0] {
        let s = stream(beta, 17);
        let k = 3u64;
        let mut a = SampleSummary::new();
        let mut x = SampleSummary::new();
        for r in 0..20_000 {
            let e = NoiseStream::new(NoiseParams::new(beta, 17), r).entry(k);
            a.push(Complex64::new(e.a_sq, 0.0));
            x.push(Complex64::new(e.x, 0.0));
        }
        let bk = beta * k as f64;
        assert!((a.mean.re - bk).abs() < 4.0 * a.standard_error().0, "beta={beta}");
        assert!((a.variance().0 / (2.0 * bk) - 1.0).abs() < 0.06);
        assert!(x.mean.re.abs() < 4.0 * x.standard_error().0);
        assert!((x.variance().0 - 1.0).abs() < 0.05);
        assert!(s.entry(0).a_sq == 0.0 && s.entry(0).y == 0.0);
    }
}

#[test]
fn monic_polynomial_is_product_over_eigenvalues() {
    let s = stream(1.5, 8);
    let n_size = 40;
    let z = 0.137;
    let t = run_recursion(&s, n_size, z);
    for n in 1..=12usize {
        let ev = eigen_oracle(&s, n, n_size).unwrap();
        let prod: f64 = ev.iter().map(|l| z - l).product();
        let got = t.monic(n as u64);
        assert!((got - prod).abs() <= 1e-9 * prod.abs().max(1e-12), "n={n}");
    }
}

#[test]
fn hatted_polynomial_matches_scaled_recursion() {
    let s = stream(2.0, 5);
    let n_size = 50u64;
    let z = 0.31;
    let t = run_recursion(&s, n_size, z);
    let mu = 2.0 * (n_size as f64).sqrt() * z;
    for n in [1u64, 4, 9, 20] {
        let (sh, lh) = hatted_charpoly_log(&s, n, mu);
        let (m, e) = t.scaled(n);
        let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
        let expect = m.abs().ln() + e + n as f64 * (2.0 * (n_size as f64).sqrt()).ln() - 0.5 * log_fact;
        assert_eq!(sh, m.signum());
        assert!((lh - expect).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn deterministic_recursion_is_hermite() {
    let s = stream(f64::INFINITY, 0);
    let n_size = 300;
    for z in [-0.7, 0.0, 0.45] {
        let t = run_recursion(&s, n_size, z);
        for n in [1u64, 17, 300] {
            let h = hermite_normalized(n, n_size, z);
            assert!((t.normalized(n) - h).abs() <= 1e-12 * h.abs().max(1e-300));
        }
    }
}

#[test]
fn sign_flip_reflects_the_spectrum() {
    let s = stream(2.0, 23);
    let f = s.sign_flipped();
    let n_size = 500;
    let a = run_recursion(&s, n_size, 0.3);
    let b = run_recursion(&f, n_size, -0.3);
    for n in [1u64, 2, 77, 500] {
        let (sa, la) = a.log_normalized(n);
        let (sb, lb) = b.log_normalized(n);
        let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(sa, parity * sb);
        assert!((la - lb).abs() < 1e-9);
    }
}

#[test]
fn counting_identity_on_random_cases() {
    let mut checked = 0;
    for case in 0..200u64 {
        let seed = derive_seed(2024, case);
        let betas = [0.7, 1.0, 2.0, 4.0, 10.0, f64::INFINITY];
        let beta = betas[(seed % 6) as usize];
        let n_size = 64 + (seed >> 8) % 4033;
        let z = ((seed >> 20) % 1000) as f64 / 1000.0 * 1.6 - 0.8;
        let s = stream(beta, seed);
        let start = default_start(n_size, z);
        if start > n_size {
            continue;
        }
        let mut w = PhaseWalker::new(beta, z, n_size, start).unwrap();
        for k in 0..=n_size {
            w.feed(&s.entry(k)).unwrap();
            if k >= start {
                assert_eq!(w.phase_count(), w.sturm_count() as i64, "case {case} n={k}");
            }
        }
        assert_eq!(w.sturm_count(), inertia_count(&s, n_size as usize, n_size, z), "case {case}");
        checked += 1;
    }
    assert!(checked >= 190);
}

#[test]
fn phase_reproduces_polynomial() {
    for (beta, z, seed) in [(2.0, 0.3, 1u64), (1.0, -0.55, 2), (4.0, 0.0, 3), (f64::INFINITY, 0.7, 0)] {
        let n_size = 3000;
        let s = stream(beta, seed);
        let traj = phase_trajectory(&s, z, n_size, None).unwrap();
        let poly = run_recursion(&s, n_size, z);
        for n in traj.start()..=traj.end() {
            let psi = traj.psi(n);
            let (sg, l) = poly.log_normalized(n);
            let lhs = sg * (l - psi.re).exp();
            assert!((lhs - psi.im.cos()).abs() < 1e-8, "beta={beta} n={n}");
        }
    }
}

#[test]
fn xi_formula_agrees_with_walker() {
    let s = stream(2.0, 77);
    let (n_size, z) = (800, 0.2);
    let traj = phase_trajectory(&s, z, n_size, None).unwrap();
    let poly = run_recursion(&s, n_size, z);
    for n in [traj.start() + 1, 400, 799] {
        let xi = xi_from_polys(z, n, poly.normalized(n), poly.normalized(n + 1), n_size).unwrap();
        let got = traj.psi(n).exp();
        assert!((xi - got).norm() < 1e-9 * xi.norm(), "n={n}");
    }
}

#[test]
fn relative_phase_counts_eigenvalues() {
    let n_size = 4000;
    let z = 0.25;
    let lambdas = [0.0, 0.5, 1.0, 2.0, 3.0];
    let (rho, _) = semicircle(z);
    for seed in 0..5 {
        let s = stream(2.0, seed);
        let rel = relative_phase(&s, z, &lambdas, n_size).unwrap();
        assert_eq!(rel[0], Complex64::new(0.0, 0.0));
        for w in rel.windows(2) {
            assert!(w[1].im >= w[0].im - 1e-9);
        }
        // Im φ_N / 2π is the eigenvalue count in [z − λ/(Nρ), z) up to one.
        for (i, &l) in lambdas.iter().enumerate().skip(1) {
            let x = z - l / (n_size as f64 * rho);
            let count = inertia_count(&s, n_size as usize, n_size, x)
                - inertia_count(&s, n_size as usize, n_size, z);
            let k = rel[i].im / std::f64::consts::TAU;
            assert!((k - count as f64).abs() <= 1.0, "λ={l}: {k} vs {count}");
        }
    }
}

#[test]
fn ratio_from_phases_matches_polynomials() {
    let (n_size, z) = (20_000u64, 0.4);
    let lambdas = [0.5, 1.0, 2.5];
    let (rho, _) = semicircle(z);
    for seed in 0..4 {
        let s = stream(2.0, seed);
        let got = polynomial_ratio(&s, z, &lambdas, n_size).unwrap();
        let (s0, l0) = run_recursion(&s, n_size, z).log_normalized(n_size);
        for (l, r) in lambdas.iter().zip(got) {
            let x = z - l / (n_size as f64 * rho);
            let (s1, l1) = run_recursion(&s, n_size, x).log_normalized(n_size);
            let want = s0 * s1 * (l1 - l0).exp();
            assert!((r - want).abs() < 1e-7 * want.abs().max(1.0), "λ={l}: {r} vs {want}");
        }
    }
}

#[test]
fn omega_at_infinite_beta() {
    let s = stream(f64::INFINITY, 0);
    for z in [0.4, -0.2] {
        let traj = phase_trajectory(&s, z, 1 << 16, None).unwrap();
        let o = omega_error(&traj, Complex64::new(0.0, 0.0));
        let target = Complex64::new(-0.5 * std::f64::consts::PI.ln(), -(z as f64).asin() / 2.0);
        assert!((o - target).norm() < 1e-3, "z={z}: {o}");
    }
}

#[test]
fn branch_checkpoints_are_recorded() {
    let s = stream(1.0, 4);
    let traj = phase_trajectory(&s, 0.1, 4096, None).unwrap();
    assert_eq!(traj.checkpoints.len(), 12);
    assert_eq!(traj.checkpoints.last().unwrap().0, 4096);
    assert!(phase_trajectory(&s, 0.5, 100, Some(20)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sturm_count_matches_bisection_oracle(
        seed in any::<u64>(),
        n in 1usize..=64,
        z in -1.2f64..1.2,
        beta_idx in 0usize..4,
    ) {
        let beta = [0.5, 1.0, 2.0, 4.0][beta_idx];
        let s = stream(beta, seed);
        let n_size = 64;
        let t = run_recursion(&s, n_size, z);
        let ev = eigen_oracle(&s, n, n_size).unwrap();
        let above = ev.iter().filter(|&&l| l >= z).count() as u64;
        // bisection is accurate to ~1e-12; skip exact ties
        prop_assume!(ev.iter().all(|l| (l - z).abs() > 1e-9));
        prop_assert_eq!(t.sturm_count(n as u64).unwrap(), above);
    }

    #[test]
    fn entries_are_random_access(seed in any::<u64>(), rep in 0u64..100, k in 0u64..100_000) {
        let s = NoiseStream::new(NoiseParams::new(2.0, seed), rep);
        prop_assert_eq!(s.entry(k), s.entry(k));
        let f = s.sign_flipped();
        prop_assert_eq!(f.entry(k).x, -s.entry(k).x);
    }
}
