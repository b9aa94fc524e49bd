use betaprufer::noise::derive_seed;
use betaprufer::sine::*;
use betaprufer::stats::{ks_two_sample, SampleSummary};
use std::f64::consts::PI;

const STEPS: usize = 2000;

fn paths(beta: f64, lambdas: &[f64], t_end: f64, count: u64, master: u64) -> Vec<SinePath> {
    (0..count)
        .map(|i| solve_sine(beta, lambdas, t_end, STEPS, derive_seed(master, i)).unwrap())
        .collect()
}

#[test]
fn mean_drift_at_time_one() {
    let lambdas = [0.5, 1.0, 2.0];
    let ps = paths(2.0, &lambdas, 1.0, 3000, 1);
    for (j, &l) in lambdas.iter().enumerate() {
        let xs: Vec<f64> = ps.iter().map(|p| p.omega_end(j).im).collect();
        let s = SampleSummary::from_reals(&xs);
        let se = s.standard_error().0;
        assert!((s.mean.re - 2.0 * PI * l).abs() < 3.0 * se, "λ={l}: {} ± {se}", s.mean.re);
    }
}

#[test]
fn mean_bound_along_the_grid() {
    let ps = paths(1.0, &[1.0], 1.0, 2000, 2);
    let grid = &ps[0].grid;
    for i in (1..grid.len()).step_by(50) {
        let xs: Vec<f64> = ps.iter().map(|p| p.omega[0][i].im).collect();
        let s = SampleSummary::from_reals(&xs);
        let bound = 2.0 * PI * grid[i].sqrt();
        assert!(s.mean.re <= bound + 3.0 * s.standard_error().0 + 1e-12, "t={}", grid[i]);
    }
}

#[test]
fn monotone_positive_and_zero_at_origin() {
    let lambdas = [-1.0, -0.3, 0.0, 0.2, 0.7, 1.5, 3.0];
    for p in paths(2.0, &lambdas, 1.0, 300, 3) {
        for i in 0..p.grid.len() {
            assert_eq!(p.omega[2][i].norm(), 0.0);
            for j in 1..lambdas.len() {
                assert!(p.omega[j - 1][i].im <= p.omega[j][i].im + 1e-6);
            }
            if p.grid[i] > p.delta0 {
                for j in 3..lambdas.len() {
                    assert!(p.omega[j][i].im > -1e-9);
                }
            }
        }
    }
}

#[test]
fn reflection_symmetry_in_law() {
    let a = paths(2.0, &[0.8], 1.0, 2000, 4);
    let b = paths(2.0, &[-0.8], 1.0, 2000, 5);
    let neg: Vec<_> = a.iter().map(|p| -p.omega_end(0)).collect();
    let refl: Vec<_> = b.iter().map(|p| p.omega_end(0)).collect();
    for part in [|w: &betaprufer::Complex64| w.re, |w: &betaprufer::Complex64| w.im] {
        let x: Vec<f64> = neg.iter().map(part).collect();
        let y: Vec<f64> = refl.iter().map(part).collect();
        let (d, _) = ks_two_sample(&x, &y).unwrap();
        assert!(d <= 0.05, "KS {d}");
    }
}

#[test]
fn space_time_scaling_in_law() {
    // ω_{γ²t}(λ/γ) has the law of ω_t(λ); here γ = 1/2, t = 1, λ = 1.
    let a = paths(2.0, &[1.0], 1.0, 2000, 6);
    let b = paths(2.0, &[2.0], 0.25, 2000, 7);
    let xa: Vec<_> = a.iter().map(|p| p.omega_end(0)).collect();
    let xb: Vec<_> = b.iter().map(|p| p.omega_end(0)).collect();
    let re = ks_two_sample(
        &xa.iter().map(|w| w.re).collect::<Vec<_>>(),
        &xb.iter().map(|w| w.re).collect::<Vec<_>>(),
    )
    .unwrap();
    let im = ks_two_sample(
        &xa.iter().map(|w| w.im).collect::<Vec<_>>(),
        &xb.iter().map(|w| w.im).collect::<Vec<_>>(),
    )
    .unwrap();
    assert!(re.0 <= 0.05 && im.0 <= 0.05, "{re:?} {im:?}");
}

#[test]
fn quadratic_clock_agrees_at_matched_times() {
    // t = (s/2π)²: s = π ↔ t = 1/4 and s = 2π ↔ t = 1.
    let lambda = 1.0;
    for (t, s) in [(0.25, PI), (1.0, 2.0 * PI)] {
        let xa: Vec<f64> = paths(2.0, &[lambda], t, 1500, 8)
            .iter()
            .map(|p| p.omega_end(0).im)
            .collect();
        let xb: Vec<f64> = (0..1500)
            .map(|i| {
                let p = solve_sine_quadratic(2.0, &[lambda], s, STEPS, derive_seed(9, i)).unwrap();
                p.omega_end(0).im
            })
            .collect();
        let (sa, sb) = (SampleSummary::from_reals(&xa), SampleSummary::from_reals(&xb));
        let se = (sa.standard_error().0.powi(2) + sb.standard_error().0.powi(2)).sqrt();
        assert!((sa.mean.re - sb.mean.re).abs() < 3.0 * se, "t={t}");
    }
}

#[test]
fn halving_the_step_moves_the_mean_less_than_its_error() {
    let mut fine = Vec::new();
    let mut coarse = Vec::new();
    for i in 0..2000 {
        let p = solve_sine(2.0, &[1.0], 1.0, 4000, derive_seed(10, i)).unwrap();
        let (g, n) = p.coarsened();
        let c = solve_sine_on(Clock::Sine, 2.0, &[1.0], g, n).unwrap();
        fine.push(p.omega_end(0).im);
        coarse.push(c.omega_end(0).im);
    }
    let (sf, sc) = (SampleSummary::from_reals(&fine), SampleSummary::from_reals(&coarse));
    assert!((sf.mean.re - sc.mean.re).abs() < sf.standard_error().0);
}

#[test]
fn sine_points_have_unit_intensity() {
    let counts: Vec<f64> = (0..400)
        .map(|i| sine_points(2.0, 5.0, derive_seed(11, i)).unwrap().len() as f64)
        .collect();
    let s = SampleSummary::from_reals(&counts);
    assert!((s.mean.re - 5.0).abs() < 3.0 * s.standard_error().0, "{}", s.mean.re);
}

#[test]
fn sine_points_number_variance() {
    let counts: Vec<f64> = (0..2000)
        .map(|i| sine_points(2.0, 5.0, derive_seed(12, i)).unwrap().len() as f64)
        .collect();
    let var = SampleSummary::from_reals(&counts).variance().0;
    // sine-kernel number variance for an interval of length 5
    let euler_gamma = 0.577_215_664_901_532_9;
    let want = ((2.0 * PI * 5.0).ln() + euler_gamma + 1.0) / (PI * PI);
    assert!((var / want - 1.0).abs() < 0.5, "{var} vs {want}");
}

#[test]
fn sine_points_sit_on_level_crossings() {
    for i in 0..20 {
        let seed = derive_seed(13, i);
        let pts = sine_points(1.0, 4.0, seed).unwrap();
        assert!(pts.windows(2).all(|w| w[1] - w[0] > 1e-6));
        let p = solve_sine(1.0, &[], 1.0, POINTS_STEPS, seed).unwrap();
        // consecutive points are one full turn apart
        for w in pts.windows(2) {
            let d = p.probe(w[1]).im - p.probe(w[0]).im;
            assert!((d - 2.0 * PI).abs() < 0.05, "{d}");
        }
    }
}

#[test]
fn zeta_is_one_at_origin_and_real() {
    let p = solve_sine(2.0, &[0.0, 0.5, 1.0], 1.0, STEPS, 14).unwrap();
    let z = zeta_eval(&p, 0.7).unwrap();
    assert_eq!(z[0], 1.0);
    assert!(z.iter().all(|v| v.is_finite()));
    assert!(zeta_eval(&p, 1.5 * PI).is_err());
}
