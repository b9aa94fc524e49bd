//! Estimators for the Monte-Carlo checks: streaming complex moments,
//! complex covariances, the two-sample Kolmogorov–Smirnov distance and
//! least-squares slopes.

use crate::error::{domain, Result};
use num_complex::Complex64;

/// Mergeable streaming moments of complex samples (Welford / Chan).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SampleSummary {
    pub count: u64,
    pub mean: Complex64,
    m2_re: f64,
    m2_im: f64,
    c_re_im: f64,
}

impl SampleSummary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[Complex64]) -> Self {
        let mut s = Self::new();
        for &x in xs {
            s.push(x);
        }
        s
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        let mut s = Self::new();
        for &x in xs {
            s.push(Complex64::new(x, 0.0));
        }
        s
    }

    pub fn push(&mut self, x: Complex64) {
        self.count += 1;
        let n = self.count as f64;
        let d = x - self.mean;
        self.mean += d / n;
        let d2 = x - self.mean;
        self.m2_re += d.re * d2.re;
        self.m2_im += d.im * d2.im;
        self.c_re_im += d.re * d2.im;
    }

    /// Combines two summaries as if all samples had been pushed into one.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        let w = na * nb / n;
        SampleSummary {
            count: self.count + other.count,
            mean: self.mean + d * (nb / n),
            m2_re: self.m2_re + other.m2_re + d.re * d.re * w,
            m2_im: self.m2_im + other.m2_im + d.im * d.im * w,
            c_re_im: self.c_re_im + other.c_re_im + d.re * d.im * w,
        }
    }

    fn denom(&self) -> f64 {
        (self.count.max(2) - 1) as f64
    }

    /// Unbiased variances of the real and imaginary parts.
    pub fn variance(&self) -> (f64, f64) {
        (self.m2_re / self.denom(), self.m2_im / self.denom())
    }

    /// `(E X² − (EX)², E|X|² − |EX|²)`, unbiased.
    pub fn covariance(&self) -> (Complex64, f64) {
        let (vr, vi) = self.variance();
        let c = self.c_re_im / self.denom();
        (Complex64::new(vr - vi, 2.0 * c), vr + vi)
    }

    /// Standard errors of the mean of the real and imaginary parts.
    pub fn standard_error(&self) -> (f64, f64) {
        let (vr, vi) = self.variance();
        let n = self.count as f64;
        ((vr / n).sqrt(), (vi / n).sqrt())
    }
}

/// Unbiased `(E XY − EX·EY, E X conj(Y) − EX·conj(EY))` from paired samples.
pub fn complex_cov(xs: &[Complex64], ys: &[Complex64]) -> Result<(Complex64, Complex64)> {
    if xs.len() != ys.len() {
        return domain("complex_cov", format!("lengths {} and {}", xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return domain("complex_cov", "need at least two samples");
    }
    let n = xs.len() as f64;
    let mx: Complex64 = xs.iter().sum::<Complex64>() / n;
    let my: Complex64 = ys.iter().sum::<Complex64>() / n;
    let mut pseudo = Complex64::new(0.0, 0.0);
    let mut herm = Complex64::new(0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        pseudo += dx * dy;
        herm += dx * dy.conj();
    }
    Ok((pseudo / (n - 1.0), herm / (n - 1.0)))
}

/// Asymptotic 1% critical constant of the two-sample KS statistic.
pub const KS_C_001: f64 = 1.628;

/// Two-sample KS distance and the 1% threshold `1.628·√((m+n)/(mn))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() < 100 || b.len() < 100 {
        return domain("ks_two_sample", format!("need ≥ 100 samples, got {} and {}", a.len(), b.len()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return domain("ks_two_sample", "NaN sample");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (m, n) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < m && j < n {
        let v = x[i].min(y[j]);
        while i < m && x[i] <= v {
            i += 1;
        }
        while j < n && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / m as f64 - j as f64 / n as f64).abs());
    }
    let (mf, nf) = (m as f64, n as f64);
    Ok((d, KS_C_001 * ((mf + nf) / (mf * nf)).sqrt()))
}

/// Least-squares fit `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 4 {
        return domain("slope_fit", "need at least four paired points");
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-300 * n {
        return domain("slope_fit", "degenerate abscissae");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        slope_stderr: (rss / (n - 2.0) / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_extremes() {
        let a: Vec<f64> = (0..200).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a).unwrap().0, 0.0);
        let b: Vec<f64> = (0..200).map(|i| 1000.0 + i as f64).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap().0, 1.0);
        assert!(ks_two_sample(&a[..50], &b).is_err());
    }

    #[test]
    fn slope_exact_line() {
        let xs = [1.0, 2.0, 3.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = slope_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-13);
        assert!(f.slope_stderr < 1e-12);
        assert!(slope_fit(&[1.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]).is_err());
    }

    #[test]
    fn constant_samples_have_zero_covariance() {
        let xs = vec![Complex64::new(1.5, -2.0); 10];
        let (p, h) = complex_cov(&xs, &xs).unwrap();
        assert_eq!((p, h), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
        assert!(complex_cov(&xs, &xs[..3]).is_err());
    }
}
