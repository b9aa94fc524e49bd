//! Euler–Maruyama solver for the complex sine SDE
//!
//! `dω_t(λ) = 2πiλ d√t + √(2/(βt)) (1 − e^{−i Im ω_t(λ)}) dZ_t`,
//!
//! where `Z = B¹ + iB²` is a complex Brownian motion with `[Z, Z̄] = 2t`.
//! All `λ` share the same increments, so `λ ↦ Im ω_t(λ)` is monotone path by
//! path. The singular start is cut off: `ω ≡ 0` on `[0, δ0]`.

use crate::error::{domain, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use std::f64::consts::PI;

/// `δ0 / t_end`.
pub const DELTA0_FRACTION: f64 = 1e-6;

/// Step count used by [`sine_points`].
pub const POINTS_STEPS: usize = 2000;

/// Which clock the equation is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    /// `2πiλ d√t + √(2/(βt))(…)dZ_t`.
    Sine,
    /// The reparametrization `t = (s/2π)²`: `iλ ds + (2/√(βs))(…)dZ_s`.
    Quadratic,
}

#[derive(Clone, Debug)]
pub struct SinePath {
    pub beta: f64,
    pub clock: Clock,
    pub lambdas: Vec<f64>,
    /// `0 = t_0 < t_1 = δ0 < … < t_M = t_end`.
    pub grid: Vec<f64>,
    /// `omega[j][i]` is `ω_{t_i}(λ_j)`.
    pub omega: Vec<Vec<Complex64>>,
    /// `(ΔB¹, ΔB²)` over `[t_i, t_{i+1}]` for `i ≥ 1`; entry 0 is unused.
    pub noise_record: Vec<[f64; 2]>,
    pub delta0: f64,
}

/// `0, δ0`, then `steps/2` geometric steps up to `t_end/10`, then uniform steps.
pub fn sine_grid(t_end: f64, steps: usize) -> Vec<f64> {
    let delta0 = t_end * DELTA0_FRACTION;
    let n_geo = steps / 2;
    let n_uni = steps - n_geo;
    let t_mid = t_end / 10.0;
    let ratio = (t_mid / delta0).powf(1.0 / n_geo as f64);
    let mut grid = Vec::with_capacity(steps + 2);
    grid.push(0.0);
    grid.push(delta0);
    for i in 1..n_geo {
        grid.push(delta0 * ratio.powi(i as i32));
    }
    grid.push(t_mid);
    for i in 1..=n_uni {
        grid.push(t_mid + (t_end - t_mid) * i as f64 / n_uni as f64);
    }
    grid
}

fn draw_noise(grid: &[f64], seed: u64) -> Vec<[f64; 2]> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut rec = vec![[0.0; 2]; grid.len() - 1];
    for i in 1..grid.len() - 1 {
        let s = (grid[i + 1] - grid[i]).sqrt();
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        rec[i] = [a * s, b * s];
    }
    rec
}

/// Integrates one `λ` over `grid`, calling `visit(i, ω_{t_i})` at every grid point.
fn integrate(
    clock: Clock,
    beta: f64,
    grid: &[f64],
    noise: &[[f64; 2]],
    lambda: f64,
    mut visit: impl FnMut(usize, Complex64),
) {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    visit(0, Complex64::new(0.0, 0.0));
    visit(1, Complex64::new(0.0, 0.0));
    let scale = match clock {
        Clock::Sine => (2.0 / beta).sqrt(),
        Clock::Quadratic => 2.0 / beta.sqrt(),
    };
    for i in 1..grid.len() - 1 {
        let (t0, t1) = (grid[i], grid[i + 1]);
        let drift = match clock {
            Clock::Sine => 2.0 * PI * lambda * (t1.sqrt() - t0.sqrt()),
            Clock::Quadratic => lambda * (t1 - t0),
        };
        let s = scale / t0.sqrt();
        let (sa, ca) = im.sin_cos();
        let [d1, d2] = noise[i];
        let dc = 1.0 - ca;
        re += s * (dc * d1 - sa * d2);
        im += drift + s * (sa * d1 + dc * d2);
        visit(i + 1, Complex64::new(re, im));
    }
}

fn check_inputs(lambdas: &[f64], t_end: f64, steps: usize) -> Result<()> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return domain("solve_sine", format!("t_end={t_end} must be positive"));
    }
    if steps < 1000 {
        return domain("solve_sine", format!("steps={steps} below 1000"));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return domain("solve_sine", "non-finite lambda");
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return domain("solve_sine", "duplicate lambda");
    }
    Ok(())
}

/// Solves the sine SDE for every `λ` in `lambdas` on `[0, t_end]`.
pub fn solve_sine(beta: f64, lambdas: &[f64], t_end: f64, steps: usize, seed: u64) -> Result<SinePath> {
    solve_with_clock(Clock::Sine, beta, lambdas, t_end, steps, seed)
}

/// Same as [`solve_sine`] in the clock `s` with `t = (s/2π)²`.
pub fn solve_sine_quadratic(
    beta: f64,
    lambdas: &[f64],
    s_end: f64,
    steps: usize,
    seed: u64,
) -> Result<SinePath> {
    solve_with_clock(Clock::Quadratic, beta, lambdas, s_end, steps, seed)
}

fn solve_with_clock(
    clock: Clock,
    beta: f64,
    lambdas: &[f64],
    t_end: f64,
    steps: usize,
    seed: u64,
) -> Result<SinePath> {
    check_inputs(lambdas, t_end, steps)?;
    let grid = sine_grid(t_end, steps);
    let noise_record = draw_noise(&grid, seed);
    solve_sine_on(clock, beta, lambdas, grid, noise_record)
}

/// Solves on a caller-supplied grid and noise record (same layout as
/// [`SinePath`]), e.g. one obtained from [`SinePath::coarsened`].
pub fn solve_sine_on(
    clock: Clock,
    beta: f64,
    lambdas: &[f64],
    grid: Vec<f64>,
    noise_record: Vec<[f64; 2]>,
) -> Result<SinePath> {
    if !(beta > 0.0 && beta.is_finite()) {
        return domain("solve_sine", format!("beta={beta} must be positive and finite"));
    }
    if grid.len() < 3 || noise_record.len() + 1 != grid.len() || grid[0] != 0.0 {
        return domain("solve_sine", "grid and noise record do not match");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("solve_sine", "grid is not strictly increasing");
    }
    check_inputs(lambdas, grid[grid.len() - 1], 1000)?;
    let mut path = SinePath {
        beta,
        clock,
        lambdas: lambdas.to_vec(),
        omega: Vec::with_capacity(lambdas.len()),
        delta0: grid[1],
        grid,
        noise_record,
    };
    for &l in lambdas {
        let mut row = vec![Complex64::new(0.0, 0.0); path.grid.len()];
        integrate(clock, beta, &path.grid, &path.noise_record, l, |i, w| row[i] = w);
        path.omega.push(row);
    }
    Ok(path)
}

impl SinePath {
    pub fn t_end(&self) -> f64 {
        *self.grid.last().expect("grid is never empty")
    }

    /// `ω_{t_end}(λ_j)`.
    pub fn omega_end(&self, j: usize) -> Complex64 {
        *self.omega[j].last().expect("grid is never empty")
    }

    /// `ω_{t_end}(λ)` for an arbitrary `λ`, re-solved on the stored noise.
    pub fn probe(&self, lambda: f64) -> Complex64 {
        let mut last = Complex64::new(0.0, 0.0);
        integrate(
            self.clock,
            self.beta,
            &self.grid,
            &self.noise_record,
            lambda,
            |_, w| last = w,
        );
        last
    }

    /// Grid and noise with every other interval merged (for `t > δ0`), i.e.
    /// the same Brownian path seen on a twice coarser grid.
    pub fn coarsened(&self) -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut grid = vec![0.0, self.grid[1]];
        let mut noise = vec![[0.0; 2]];
        let mut i = 1;
        while i + 2 < self.grid.len() {
            let (a, b) = (self.noise_record[i], self.noise_record[i + 1]);
            noise.push([a[0] + b[0], a[1] + b[1]]);
            grid.push(self.grid[i + 2]);
            i += 2;
        }
        (grid, noise)
    }

    /// Rows `(t, λ, Re ω, Im ω)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.lambdas.iter().enumerate().flat_map(move |(j, &l)| {
            self.grid
                .iter()
                .zip(&self.omega[j])
                .map(move |(&t, w)| (t, l, w.re, w.im))
        })
    }
}

/// Points of `{λ ∈ [0, Λ] : Im ω_1(λ) + α ∈ 2πℤ}` with `α` uniform on `[0, 2π)`.
pub fn sine_points(beta: f64, window_end: f64, seed: u64) -> Result<Vec<f64>> {
    sine_points_with(beta, window_end, seed, POINTS_STEPS)
}

pub fn sine_points_with(beta: f64, window_end: f64, seed: u64, steps: usize) -> Result<Vec<f64>> {
    if !(window_end > 0.0 && window_end.is_finite()) {
        return domain("sine_points", format!("window end {window_end} must be positive"));
    }
    let path = solve_sine(beta, &[], 1.0, steps, seed)?;
    let alpha = uniform_phase(seed);
    let n_cells = (window_end / 0.25).ceil() as usize;
    let knots: Vec<f64> = (0..=n_cells)
        .map(|i| (i as f64 * 0.25).min(window_end))
        .collect();
    let values: Vec<f64> = knots.iter().map(|&l| path.probe(l).im).collect();
    let mut points = Vec::new();
    // the first level above Im ω(0) + α = α
    let mut level_k = 1i64;
    for c in 0..n_cells {
        let (lo_v, hi_v) = (values[c], values[c + 1]);
        loop {
            let level = 2.0 * PI * level_k as f64 - alpha;
            if level > hi_v {
                break;
            }
            if level > lo_v {
                points.push(bisect(&path, knots[c], knots[c + 1], level));
            }
            level_k += 1;
        }
    }
    Ok(points)
}

fn bisect(path: &SinePath, mut lo: f64, mut hi: f64, level: f64) -> f64 {
    for _ in 0..40 {
        if hi - lo <= 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if path.probe(mid).im < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Phase uniform on `[0, 2π)`, independent of the path drawn from the same seed,
/// and never within `1e-6` of a zero of `cos`.
pub fn uniform_phase(seed: u64) -> f64 {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed ^ 0xa1fa_5eed_0000_0001);
    loop {
        let a = rng.random::<f64>() * 2.0 * PI;
        if a.cos().abs() >= 1e-6 {
            return a;
        }
    }
}

/// One draw of `(ζ_β(λ))_λ`: a fresh path to `t = 1` and an independent phase.
pub fn zeta_sample(beta: f64, lambdas: &[f64], steps: usize, seed: u64) -> Result<Vec<f64>> {
    let path = solve_sine(beta, lambdas, 1.0, steps, seed)?;
    zeta_eval(&path, uniform_phase(seed))
}

/// `ζ_β(λ) = Re(e^{iα + ω_1(λ)/2}) / cos α` for each `λ` of the path.
pub fn zeta_eval(path: &SinePath, alpha: f64) -> Result<Vec<f64>> {
    let c = alpha.cos();
    if c.abs() < 1e-8 {
        return domain("zeta_eval", format!("cos({alpha}) too close to 0"));
    }
    let j = path
        .grid
        .iter()
        .position(|&t| (t - 1.0).abs() < 1e-12)
        .ok_or_else(|| crate::Error::Domain {
            what: "zeta_eval",
            detail: "path does not reach t = 1".into(),
        })?;
    Ok(path
        .omega
        .iter()
        .map(|row| zeta_from_omega(row[j], alpha))
        .collect())
}

/// `Re(e^{iα + ω/2}) / cos α`.
pub fn zeta_from_omega(omega: Complex64, alpha: f64) -> f64 {
    let w = Complex64::new(0.0, alpha) + omega * 0.5;
    w.exp().re / alpha.cos()
}
