//! Deterministic special functions and the geometry of the model: the
//! semicircle law, the Joukowsky map, elliptic angles and scales, Hermite
//! reference functions, the Airy function and Plancherel–Rotach asymptotics.

use crate::error::{domain, Result};
use crate::recur::{coeff_inf, LogWeight, ScaledPair};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

/// Scales attached to a spectral parameter `z` for matrix size `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumGeometry {
    pub n_size: u64,
    pub z: f64,
    /// Turning point `⌊Nz²⌋`.
    pub n0: u64,
    /// Parabolic scale `⌈Nz²⌉^{1/3}`.
    pub l: f64,
    pub rho: f64,
    pub f: f64,
    /// `1 / max(N^{1/3}, Nρ²)`.
    pub eps_n: f64,
}

impl SpectrumGeometry {
    pub fn new(n_size: u64, z: f64) -> Self {
        let nf = n_size as f64;
        let nz2 = nf * z * z;
        let (rho, f) = semicircle(z);
        SpectrumGeometry {
            n_size,
            z,
            n0: nz2.floor() as u64,
            l: nz2.ceil().cbrt(),
            rho,
            f,
            eps_n: 1.0 / nf.cbrt().max(nf * rho * rho),
        }
    }

    /// `N z²` as a real number.
    pub fn nz2(&self) -> f64 {
        self.n_size as f64 * self.z * self.z
    }

    /// `N_T = ⌊Nz² + T·L⌋`.
    pub fn n_t(&self, t: f64) -> u64 {
        (self.nz2() + t * self.l).floor() as u64
    }

    /// Whether `k` lies in the turning-point window `|k − Nz²| < T·L`.
    pub fn excluded(&self, k: u64, t: f64) -> bool {
        (k as f64 - self.nz2()).abs() < t * self.l
    }
}

/// Semicircle density `(2/π)√(1−x²)` and its tail `∫_x^1`.
pub fn semicircle(x: f64) -> (f64, f64) {
    if x >= 1.0 {
        return (0.0, 0.0);
    }
    if x <= -1.0 {
        return (0.0, 1.0);
    }
    let s = (1.0 - x * x).sqrt();
    let density = 2.0 / PI * s;
    let tail = ((x.acos() - x * s) / PI).clamp(0.0, 1.0);
    (density, tail)
}

/// Joukowsky map `J(w) = w − √(w²−1)`, equal to `e^{−i arccos w}` on [−1, 1].
pub fn joukowsky(w: f64) -> Complex64 {
    if w.abs() <= 1.0 {
        Complex64::new(w, -(1.0 - w * w).sqrt())
    } else {
        // 1/(|w| + √(w²−1)) avoids the cancellation in w − √(w²−1).
        Complex64::new(w.signum() / (w.abs() + (w * w - 1.0).sqrt()), 0.0)
    }
}

fn elliptic_check(what: &'static str, n: u64, z: f64, n_size: u64) -> Result<f64> {
    let nz2 = n_size as f64 * z * z;
    if (n as f64) <= nz2 {
        return domain(what, format!("n={n} is not above N z² = {nz2}"));
    }
    Ok(nz2)
}

/// `θ_n(z) = arccos(z√(N/n))` for `n > Nz²`.
pub fn angle_theta(n: u64, z: f64, n_size: u64) -> Result<f64> {
    elliptic_check("angle_theta", n, z, n_size)?;
    Ok(theta_unchecked(n, z, n_size))
}

#[inline]
pub(crate) fn theta_unchecked(n: u64, z: f64, n_size: u64) -> f64 {
    (z * (n_size as f64 / n as f64).sqrt()).clamp(-1.0, 1.0).acos()
}

/// `δ_n(z) = 1/√(n − Nz²)` for `n > Nz²`.
pub fn scale_delta(n: u64, z: f64, n_size: u64) -> Result<f64> {
    let nz2 = elliptic_check("scale_delta", n, z, n_size)?;
    Ok(1.0 / (n as f64 - nz2).sqrt())
}

/// Normalized Hermite function `h_n(z) = E Φ_n(z)`, i.e. the β = ∞ recursion
/// times the weight `w_n(z)`, evaluated in log scale.
pub fn hermite_normalized(n: u64, n_size: u64, z: f64) -> f64 {
    let (sign, log_abs) = hermite_log(n, n_size, z);
    sign * log_abs.exp()
}

/// `∫ h_n(z)² dz` by the trapezoid rule on `points` nodes over a window that
/// reaches eight Gaussian widths past the oscillatory region.
pub fn hermite_square_integral(n: u64, n_size: u64, points: usize) -> f64 {
    let nf = n_size as f64;
    let r = ((n as f64 + 1.0) / nf).sqrt() + 8.0 / nf.sqrt();
    let m = points.max(2) - 1;
    let h = 2.0 * r / m as f64;
    let sum: f64 = (0..=m)
        .map(|i| {
            let v = hermite_normalized(n, n_size, -r + h * i as f64);
            if i == 0 || i == m {
                0.5 * v * v
            } else {
                v * v
            }
        })
        .sum();
    sum * h
}

/// `(sign, log|h_n(z)|)`.
pub fn hermite_log(n: u64, n_size: u64, z: f64) -> (f64, f64) {
    let mut pair = ScaledPair::start();
    let mut w = LogWeight::new(n_size, z);
    for k in 0..n {
        pair.step(z, coeff_inf(k, n_size));
        w.advance();
    }
    let m = pair.cur;
    if m == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    (m.signum(), m.abs().ln() + pair.log_scale() + w.value())
}

const AI0: f64 = 0.355_028_053_887_817_24;
const AIP0: f64 = 0.258_819_403_792_806_8;

/// `(Ai(t), Ai′(t))` for `t ∈ [−50, 50]`, absolute error below 1e−9.
///
/// Maclaurin series on `[−7, 6]`, asymptotic expansions outside.
pub fn airy_ai(t: f64) -> Result<(f64, f64)> {
    if !(-50.0..=50.0).contains(&t) {
        return domain("airy_ai", format!("t={t} outside [-50, 50]"));
    }
    Ok(if t > 6.0 {
        airy_asym_pos(t)
    } else if t < -7.0 {
        airy_asym_neg(-t)
    } else {
        airy_series(t)
    })
}

/// Maclaurin series `Ai = c₁f − c₂g`; usable as a reference near the origin.
pub fn airy_series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ a_k x^{3k}, g = Σ b_k x^{3k+1} and their derivatives.
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg, mut tfp, mut tgp) = (1.0, x, x * x / 2.0, 1.0);
    fp += tfp;
    let mut k = 0.0_f64;
    loop {
        tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
        tgp *= x3 / ((3.0 * k + 1.0) * (3.0 * k + 3.0));
        f += tf;
        g += tg;
        gp += tgp;
        k += 1.0;
        tfp *= x3 / (3.0 * k * (3.0 * k + 2.0));
        fp += tfp;
        let scale = f.abs().max(g.abs()).max(1.0);
        if tf.abs().max(tg.abs()).max(tfp.abs()).max(tgp.abs()) < 1e-18 * scale && k > 2.0 {
            break;
        }
        if k > 400.0 {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// Coefficients `u_k`, `v_k` of the Airy asymptotic series.
fn airy_uv(kmax: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..=kmax {
        let kf = k as f64;
        let prev = u[k - 1];
        let uk = prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// Sums `Σ s_k c_k/ζ^k` over the selected indices, stopping at the smallest term.
fn truncated_sum(c: &[f64], zeta: f64, start: usize, sign: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut k = start;
    while k < c.len() {
        let term = sign(k) * c[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        k += 2;
    }
    sum
}

fn airy_asym_pos(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = airy_uv(40);
    let alt = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let su = truncated_sum(&u, zeta, 0, alt) + truncated_sum(&u, zeta, 1, alt);
    let sv = truncated_sum(&v, zeta, 0, alt) + truncated_sum(&v, zeta, 1, alt);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    (e * x.powf(-0.25) * su, -e * x.powf(0.25) * sv)
}

fn airy_asym_neg(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = airy_uv(40);
    // (−1)^j for the j-th even (resp. odd) index.
    let alt = |k: usize| if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let ue = truncated_sum(&u, zeta, 0, alt);
    let uo = truncated_sum(&u, zeta, 1, alt);
    let ve = truncated_sum(&v, zeta, 0, alt);
    let vo = truncated_sum(&v, zeta, 1, alt);
    let (s, c) = (zeta - FRAC_PI_4).sin_cos();
    let a = x.powf(-0.25) / PI.sqrt() * (c * ue + s * uo);
    let ap = x.powf(0.25) / PI.sqrt() * (s * ve - c * vo);
    (a, ap)
}

/// Leading Plancherel–Rotach value whose real part approximates
/// `h_N(z + λ/(Nρ(z)))` in the bulk: modulus `√(1/π)(1−z²)^{−1/4}`, phase
/// `π(NF(z) − arcsin(z)/(2π) − λ)`.
pub fn pr_bulk(n_size: u64, z: f64, lambda: f64) -> Result<Complex64> {
    let nf = n_size as f64;
    if z.abs() > 1.0 - 4.0 * nf.powf(-2.0 / 3.0) {
        return domain("pr_bulk", format!("z={z} is in the edge regime for N={n_size}"));
    }
    let (_, f) = semicircle(z);
    let modulus = (1.0 / PI).sqrt() * (1.0 - z * z).powf(-0.25);
    let turns = (nf * f).rem_euclid(2.0) - z.asin() / (2.0 * PI) - lambda;
    Ok(Complex64::from_polar(modulus, PI * turns))
}

/// Truncated logarithm `−Σ_{k ≥ 1, kε < 1} w^k/k`.
pub fn log_trunc(eps: f64, w: Complex64) -> Result<Complex64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return domain("log_trunc", format!("eps={eps} outside (0, 1]"));
    }
    if w.norm() > 1.0 + 1e-12 {
        return domain("log_trunc", format!("|w|={} exceeds 1", w.norm()));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pw = Complex64::new(1.0, 0.0);
    let mut k = 1u64;
    while (k as f64) * eps < 1.0 {
        pw *= w;
        sum -= pw / k as f64;
        k += 1;
    }
    Ok(sum)
}

/// Exact partial sum `Σ_{k=m+1}^{n} θ_k(z)`.
///
/// Every summed index must be elliptic, i.e. `m + 1 > Nz²`.
pub fn theta_sum(n_size: u64, z: f64, m: u64, n: u64) -> Result<f64> {
    let nz2 = n_size as f64 * z * z;
    if (m + 1) as f64 <= nz2 {
        return domain("theta_sum", format!("m={m} reaches below N z² = {nz2}"));
    }
    if m > n || n > n_size {
        return domain("theta_sum", format!("need m ≤ n ≤ N, got m={m}, n={n}"));
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in m + 1..=n {
        let y = theta_unchecked(k, z, n_size) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Asymptotic value of `Σ_{k>N_T} θ_k(z) − πNF(z)`:
/// `−πN_T·1{z<0} − sgn(z)(⅔T^{3/2} − π/4) − arcsin(z)/2`.
pub fn theta_sum_prediction(n_size: u64, z: f64, t: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let g = SpectrumGeometry::new(n_size, z);
    let n_t = g.n_t(t) as f64;
    let neg = if z < 0.0 { -PI * n_t } else { 0.0 };
    neg - z.signum() * (2.0 / 3.0 * t.powf(1.5) - FRAC_PI_4) - z.asin() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircle_values() {
        let (d, f) = semicircle(0.0);
        assert!((d - 2.0 / PI).abs() < 1e-15);
        assert!((f - 0.5).abs() < 1e-15);
        assert_eq!(semicircle(1.0), (0.0, 0.0));
        assert!((semicircle(0.5).0 - 0.551_328_895_421_792).abs() < 1e-12);
    }

    #[test]
    fn joukowsky_values() {
        assert!((joukowsky(0.0) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((joukowsky(1.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((joukowsky(2.0).re - (2.0 - 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn angle_and_delta() {
        assert!((angle_theta(7, 0.0, 100).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((angle_theta(50, 0.5, 100).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!(angle_theta(25, 0.5, 100).is_err());
        assert_eq!(scale_delta(4, 0.0, 100).unwrap(), 0.5);
        assert!((scale_delta(26, 0.5, 100).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermite_first_terms() {
        let n = 37;
        let z = 0.21;
        let h0 = hermite_normalized(0, n, z);
        let expect = (n as f64 / (2.0 * PI)).powf(0.25) * (-(n as f64) * z * z).exp();
        assert!((h0 - expect).abs() < 1e-14 * expect);
        let h1 = hermite_normalized(1, n, z);
        assert!((h1 / h0 - 2.0 * (n as f64).sqrt() * z).abs() < 1e-12);
    }

    #[test]
    fn airy_at_origin() {
        let (a, ap) = airy_ai(0.0).unwrap();
        assert!((a - 0.355_028_053_9).abs() < 1e-10);
        assert!((ap + 0.258_819_403_8).abs() < 1e-10);
        assert!(airy_ai(50.5).is_err());
    }

    #[test]
    fn pr_bulk_modulus_and_edge_rejection() {
        for &l in &[0.0, 0.3, 1.7] {
            let v = pr_bulk(1000, 0.3, l).unwrap();
            let m = (1.0 / PI).sqrt() * (1.0 - 0.09f64).powf(-0.25);
            assert!((v.norm() - m).abs() < 1e-14);
        }
        assert!(pr_bulk(1000, 0.99, 0.0).is_err());
    }

    #[test]
    fn log_trunc_cases() {
        let w = Complex64::new(0.3, -0.4);
        assert_eq!(log_trunc(0.3, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        assert!((log_trunc(0.5, w).unwrap() + w).norm() < 1e-15);
        let n = 17;
        let h: f64 = (1..n).map(|k| 1.0 / k as f64).sum();
        let v = log_trunc(1.0 / n as f64, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re + h).abs() < 1e-13);
    }

    #[test]
    fn theta_sum_at_zero() {
        let s = theta_sum(1000, 0.0, 0, 1000).unwrap();
        assert!((s - 500.0 * PI).abs() < 1e-9);
        assert!(theta_sum(100, 0.5, 24, 100).is_err());
    }
}
