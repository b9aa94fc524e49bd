//! Monic and normalized characteristic polynomials of the scaled Jacobi
//! matrix, Sturm counts and a small-matrix eigenvalue oracle.
//!
//! `Φ̂_{n+1}(z) = (z − d_n)Φ̂_n(z) − c_n Φ̂_{n−1}(z)` from `(Φ̂_0, Φ̂_{−1}) = (1, 0)`,
//! and `Φ_n = w_n Φ̂_n` with the Gaussian weight `w_n(z)`.

use crate::error::{domain, Result};
use crate::noise::{NoiseStream, StreamId};
use crate::recur::{LogWeight, ScaledPair, SignCounter};

/// Per-index scaled values of `Φ̂_n(z)` for `n = 0..=n_max`.
#[derive(Clone, Debug)]
pub struct CharPolyTrajectory {
    pub n_size: u64,
    pub z: f64,
    pub beta: f64,
    stream: StreamId,
    /// `(mantissa of Φ̂_n, mantissa of Φ̂_{n−1}, binary exponent)`.
    pairs: Vec<ScaledPair>,
    log_w: Vec<f64>,
    /// Sign changes in `Φ̂_0, …, Φ̂_n`.
    changes: Vec<u64>,
}

/// Runs the recursion for `n = 0..=N`.
pub fn run_recursion(stream: &NoiseStream, n_size: u64, z: f64) -> CharPolyTrajectory {
    run_recursion_to(stream, n_size, z, n_size)
}

/// Runs the recursion for `n = 0..=n_max` with the scaling of size `N`.
pub fn run_recursion_to(
    stream: &NoiseStream,
    n_size: u64,
    z: f64,
    n_max: u64,
) -> CharPolyTrajectory {
    assert!(n_size >= 1, "N must be positive");
    let cap = n_max as usize + 1;
    let mut pairs = Vec::with_capacity(cap);
    let mut log_w = Vec::with_capacity(cap);
    let mut changes = Vec::with_capacity(cap);
    let mut pair = ScaledPair::start();
    let mut w = LogWeight::new(n_size, z);
    let mut signs = SignCounter::new();
    pairs.push(pair);
    log_w.push(w.value());
    changes.push(0);
    for k in 0..n_max {
        let e = stream.entry(k);
        let (d, c) = stream.coeffs(&e, n_size);
        pair.step(z - d, c);
        w.advance();
        signs.push(pair.cur);
        pairs.push(pair);
        log_w.push(w.value());
        changes.push(signs.changes());
    }
    CharPolyTrajectory {
        n_size,
        z,
        beta: stream.beta(),
        stream: stream.id(),
        pairs,
        log_w,
        changes,
    }
}

impl CharPolyTrajectory {
    pub fn n_max(&self) -> u64 {
        self.pairs.len() as u64 - 1
    }

    pub fn stream_id(&self) -> StreamId {
        self.stream
    }

    /// `(mantissa, exponent)` with `Φ̂_n = mantissa · e^{exponent}`.
    pub fn scaled(&self, n: u64) -> (f64, f64) {
        let p = &self.pairs[n as usize];
        (p.cur, p.log_scale())
    }

    /// Mantissa pair `(Φ̂_n, Φ̂_{n−1})` sharing the exponent of [`Self::scaled`].
    pub fn mantissa_pair(&self, n: u64) -> (f64, f64) {
        let p = &self.pairs[n as usize];
        (p.cur, p.prev)
    }

    /// `log w_n(z)`.
    pub fn log_weight(&self, n: u64) -> f64 {
        self.log_w[n as usize]
    }

    /// `Φ̂_n(z)`; may overflow for large `n`.
    pub fn monic(&self, n: u64) -> f64 {
        let (m, e) = self.scaled(n);
        m * e.exp()
    }

    /// `(sign, log|Φ_n(z)|)` for the normalized polynomial.
    pub fn log_normalized(&self, n: u64) -> (f64, f64) {
        let (m, e) = self.scaled(n);
        if m == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        (m.signum(), m.abs().ln() + e + self.log_w[n as usize])
    }

    /// `Φ_n(z) = w_n(z)Φ̂_n(z)`.
    pub fn normalized(&self, n: u64) -> f64 {
        let (s, l) = self.log_normalized(n);
        s * l.exp()
    }

    /// Number of eigenvalues `≥ z` of the leading `n × n` minor.
    pub fn sturm_count(&self, n: u64) -> Result<u64> {
        if n == 0 || n > self.n_max() {
            return domain(
                "sturm_count",
                format!("n={n} outside [1, {}]", self.n_max()),
            );
        }
        Ok(self.changes[n as usize])
    }

    /// Rows `(n, mantissa, exponent)` for diagnostics.
    pub fn rows(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        self.pairs
            .iter()
            .enumerate()
            .map(|(n, p)| (n as u64, p.cur, p.log_scale()))
    }
}

/// Diagonal `d_0..d_{n−1}` and squared off-diagonal `c_1..c_{n−1}` of the
/// scaled `n × n` Jacobi minor.
pub fn jacobi_minor(stream: &NoiseStream, n: usize, n_size: u64) -> (Vec<f64>, Vec<f64>) {
    let mut diag = Vec::with_capacity(n);
    let mut off_sq = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n as u64 {
        let e = stream.entry(k);
        let (d, c) = stream.coeffs(&e, n_size);
        diag.push(d);
        if k > 0 {
            off_sq.push(c);
        }
    }
    (diag, off_sq)
}

/// Number of eigenvalues strictly below `x`, from the LDLᵀ pivots of `J − x`.
fn count_below(diag: &[f64], off_sq: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let c = if i == 0 { 0.0 } else { off_sq[i - 1] };
        q = (d - x) - if i == 0 { 0.0 } else { c / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of the scaled `n × n` minor by Sturm bisection, ascending,
/// to absolute tolerance 1e−12.
pub fn eigen_oracle(stream: &NoiseStream, n: usize, n_size: u64) -> Result<Vec<f64>> {
    if n == 0 || n > 64 {
        return domain("eigen_oracle", format!("n={n} outside [1, 64]"));
    }
    let (diag, off_sq) = jacobi_minor(stream, n, n_size);
    Ok(tridiagonal_eigenvalues(&diag, &off_sq))
}

/// Bisection eigenvalues of a symmetric tridiagonal matrix given its diagonal
/// and squared off-diagonal.
pub fn tridiagonal_eigenvalues(diag: &[f64], off_sq: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let off: Vec<f64> = off_sq.iter().map(|c| c.sqrt()).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1] } else { 0.0 } + if i + 1 < n { off[i] } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    lo -= 1e-9;
    hi += 1e-9;
    (0..n)
        .map(|i| {
            // smallest x with more than i eigenvalues ≤ x
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-13 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if count_below(diag, off_sq, m) > i {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Size-independent polynomial `Φ̂_n(μ) = det[μ − β^{−1/2}A]_{n,n}/√(n!)`.
pub fn hatted_charpoly(stream: &NoiseStream, n: u64, mu: f64) -> f64 {
    let (s, l) = hatted_charpoly_log(stream, n, mu);
    s * l.exp()
}

/// `(sign, log|Φ̂_n(μ)|)` of [`hatted_charpoly`].
pub fn hatted_charpoly_log(stream: &NoiseStream, n: u64, mu: f64) -> (f64, f64) {
    let beta = stream.beta();
    let mut pair = ScaledPair::start();
    for k in 0..n {
        let e = stream.entry(k);
        let (shift, c) = if beta.is_infinite() {
            (mu, k as f64)
        } else {
            (mu - e.b / beta.sqrt(), e.a_sq / beta)
        };
        // P_{k+1} = [(μ − b/√β)P_k − (a²/β)P_{k−1}/√k]/√(k+1)
        let kf = k as f64;
        let c_eff = if k == 0 { 0.0 } else { c / kf.sqrt() };
        let s = 1.0 / (kf + 1.0).sqrt();
        pair.step(shift * s, c_eff * s);
    }
    if pair.cur == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    (pair.cur.signum(), pair.cur.abs().ln() + pair.log_scale())
}
