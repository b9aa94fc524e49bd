//! The stochastic Airy function `∂_tt φ = φ·(t + λ + (2/√β) dB/dt)`, integrated
//! downward from Airy data at `t_max`, its oscillatory phase, and the
//! edge comparison of the characteristic polynomial against `Ai`.

use crate::charpoly::run_recursion;
use crate::error::{domain, Error, Result};
use crate::noise::{derive_seed, NoiseParams, NoiseStream};
use crate::specfun::{airy_ai, hermite_log};
use crate::stats::SampleSummary;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Clone, Debug)]
pub struct AiryPath {
    pub beta: f64,
    pub lambda: f64,
    pub t_max: f64,
    /// Decreasing, `grid[0] = t_max`, last entry `t_min`.
    pub grid: Vec<f64>,
    /// `(SAi_t, SAi′_t)` at each grid time.
    pub sai: Vec<(f64, f64)>,
    /// `B(s_i) − B(s_{i+1})` over each step.
    pub bm_record: Vec<f64>,
}

/// Integrates the stochastic Airy equation from `t_max` down to `t_min`.
///
/// Trapezoidal drift, left-point noise; the implicit part is a 2×2 solve.
/// `beta = ∞` gives the deterministic Airy function.
pub fn solve_sai(
    beta: f64,
    lambda: f64,
    t_max: f64,
    t_min: f64,
    steps: usize,
    seed: u64,
) -> Result<AiryPath> {
    if !(t_max >= 8.0) {
        return domain("solve_sai", format!("t_max={t_max} below 8"));
    }
    if !(t_min >= -10.0 && t_min < t_max) {
        return domain("solve_sai", format!("t_min={t_min} outside [-10, t_max)"));
    }
    if steps < 10_000 {
        return domain("solve_sai", format!("steps={steps} below 10^4"));
    }
    if !(beta > 0.0) {
        return domain("solve_sai", format!("beta={beta} must be positive"));
    }
    let h = (t_max - t_min) / steps as f64;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let sh = h.sqrt();
    let bm_record: Vec<f64> = (0..steps)
        .map(|_| sh * rng.sample::<f64, _>(StandardNormal))
        .collect();
    integrate(beta, lambda, t_max, t_min, bm_record)
}

/// [`solve_sai`] on given Brownian increments, one per step of the uniform grid.
pub fn solve_sai_on(
    beta: f64,
    lambda: f64,
    t_max: f64,
    t_min: f64,
    bm_record: Vec<f64>,
) -> Result<AiryPath> {
    if !(t_max >= 8.0 && t_min >= -10.0 && t_min < t_max) {
        return domain("solve_sai_on", format!("interval [{t_min}, {t_max}] not allowed"));
    }
    if bm_record.is_empty() || !(beta > 0.0) {
        return domain("solve_sai_on", "need positive beta and at least one increment");
    }
    integrate(beta, lambda, t_max, t_min, bm_record)
}

fn integrate(beta: f64, lambda: f64, t_max: f64, t_min: f64, bm_record: Vec<f64>) -> Result<AiryPath> {
    let steps = bm_record.len();
    let h = (t_max - t_min) / steps as f64;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| if i == steps { t_min } else { t_max - h * i as f64 })
        .collect();
    let noise_scale = if beta.is_infinite() { 0.0 } else { 2.0 / beta.sqrt() };
    let mut sai = Vec::with_capacity(steps + 1);
    let (mut u, mut v) = airy_ai(t_max + lambda)?;
    sai.push((u, v));
    let hh = 0.5 * h;
    for i in 0..steps {
        let (s0, s1) = (grid[i] + lambda, grid[i + 1] + lambda);
        // u₁ + (h/2)v₁ = r1, (h/2)s₁u₁ + v₁ = r2
        let r1 = u - hh * v;
        let r2 = v - hh * s0 * u - noise_scale * u * bm_record[i];
        let det = 1.0 - hh * hh * s1;
        let u1 = (r1 - hh * r2) / det;
        let v1 = (r2 - hh * s1 * r1) / det;
        u = u1;
        v = v1;
        sai.push((u, v));
    }
    Ok(AiryPath {
        beta,
        lambda,
        t_max,
        grid,
        sai,
        bm_record,
    })
}

impl AiryPath {
    pub fn t_min(&self) -> f64 {
        *self.grid.last().expect("grid is never empty")
    }

    /// `(SAi_t, SAi′_t)` by linear interpolation on the grid.
    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        if !(t <= self.t_max && t >= self.t_min()) {
            return domain("AiryPath::at", format!("t={t} not covered"));
        }
        let h = (self.t_max - self.t_min()) / (self.grid.len() - 1) as f64;
        let x = (self.t_max - t) / h;
        let i = (x.floor() as usize).min(self.grid.len() - 2);
        let w = x - i as f64;
        let (a, b) = (self.sai[i], self.sai[i + 1]);
        Ok((a.0 + w * (b.0 - a.0), a.1 + w * (b.1 - a.1)))
    }

    /// Brownian increments summed pairwise, for the same path on a grid twice as coarse.
    pub fn coarsened_noise(&self) -> Vec<f64> {
        self.bm_record.chunks(2).map(|c| c.iter().sum()).collect()
    }

    /// Rows `(t, SAi, SAi′)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.grid.iter().zip(&self.sai).map(|(&t, &(a, b))| (t, a, b))
    }
}

/// `(exp ϖ⁺_t, exp ϖ⁻_t) = SAi_{−t} ± i t^{−1/2} SAi′_{−t}`.
pub fn varpi_phase(path: &AiryPath, t: f64) -> Result<(Complex64, Complex64)> {
    if !(t > 0.0) {
        return domain("varpi_phase", format!("t={t} must be positive"));
    }
    let (a, ap) = path.at(-t)?;
    varpi_from_values(a, ap, t)
}

/// [`varpi_phase`] from given values of the function and its derivative at `−t`.
pub fn varpi_from_values(a: f64, ap: f64, t: f64) -> Result<(Complex64, Complex64)> {
    if a.abs() + ap.abs() < 1e-300 {
        return Err(Error::Degenerate(format!("both components vanish at t={t}")));
    }
    let plus = Complex64::new(a, ap / t.sqrt());
    Ok((plus, plus.conj()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRow {
    pub lambda: f64,
    pub ai: f64,
    /// `(±1)^N h_N(±(1 + λ/(2N^{2/3}))) · N^{−1/6}`.
    pub deterministic: f64,
    pub rel_error: f64,
    /// Same scaling for the random polynomial: mean over replicates and its SE.
    pub mc_mean: f64,
    pub mc_se: f64,
}

#[derive(Clone, Debug)]
pub struct EdgeTable {
    pub n_size: u64,
    pub sign: i8,
    pub beta: f64,
    pub replicates: u64,
    pub rows: Vec<EdgeRow>,
}

/// Edge point `±(1 + λ/(2N^{2/3}))`.
pub fn edge_point(n_size: u64, sign: i8, lambda: f64) -> f64 {
    f64::from(sign) * (1.0 + lambda / (2.0 * (n_size as f64).powf(2.0 / 3.0)))
}

/// Scaled deterministic polynomial `(±1)^N h_N(x) N^{−1/6}` at the edge.
pub fn edge_scaled_hermite(n_size: u64, sign: i8, lambda: f64) -> f64 {
    let x = edge_point(n_size, sign, lambda);
    let (s, l) = hermite_log(n_size, n_size, x);
    edge_sign(n_size, sign) * s * (l - (n_size as f64).ln() / 6.0).exp()
}

fn edge_sign(n_size: u64, sign: i8) -> f64 {
    if sign < 0 && n_size % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Compares the scaled polynomial at the edge with `Ai(λ)`; at `β = ∞` exactly,
/// and for finite `β` through the Monte-Carlo mean over `replicates` streams.
pub fn edge_compare(
    n_size: u64,
    sign: i8,
    lambdas: &[f64],
    replicates: u64,
    seed: u64,
    beta: f64,
) -> Result<EdgeTable> {
    if n_size < 10_000 {
        return domain("edge_compare", format!("N={n_size} below 10^4"));
    }
    if sign != 1 && sign != -1 {
        return domain("edge_compare", format!("sign={sign} must be ±1"));
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    let scale = (n_size as f64).ln() / 6.0;
    for &lambda in lambdas {
        let (ai, _) = airy_ai(lambda)?;
        let det = edge_scaled_hermite(n_size, sign, lambda);
        let mut summary = SampleSummary::new();
        if beta.is_finite() {
            let x = edge_point(n_size, sign, lambda);
            for r in 0..replicates {
                let stream = NoiseStream::new(NoiseParams::new(beta, derive_seed(seed, r)), 0);
                let traj = run_recursion(&stream, n_size, x);
                let (s, l) = traj.log_normalized(n_size);
                summary.push(Complex64::new(edge_sign(n_size, sign) * s * (l - scale).exp(), 0.0));
            }
        }
        rows.push(EdgeRow {
            lambda,
            ai,
            deterministic: det,
            rel_error: ((det - ai) / ai).abs(),
            mc_mean: summary.mean.re,
            mc_se: summary.standard_error().0,
        });
    }
    Ok(EdgeTable {
        n_size,
        sign,
        beta,
        replicates,
        rows,
    })
}
