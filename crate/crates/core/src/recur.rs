//! Shared three-term recursion kernel. Both the Hermite reference and the
//! random characteristic polynomials go through `ScaledPair::step`, so the
//! β = ∞ trajectory and `hermite_normalized` agree bitwise.

use std::f64::consts::LN_2;

/// `(Φ̂_{n+1}, Φ̂_n) = (cur, prev) · 2^exp2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct ScaledPair {
    pub cur: f64,
    pub prev: f64,
    pub exp2: i64,
}

impl ScaledPair {
    pub fn start() -> Self {
        ScaledPair {
            cur: 1.0,
            prev: 0.0,
            exp2: 0,
        }
    }

    /// One step `p ← (z − d)p − c·q` with `shift = z − d`.
    #[inline]
    pub fn step(&mut self, shift: f64, c: f64) {
        let next = shift * self.cur - c * self.prev;
        self.prev = self.cur;
        self.cur = next;
        let m = self.cur.abs().max(self.prev.abs());
        if !(1e-2..=1e2).contains(&m) && m > 0.0 && m.is_finite() {
            // Power-of-two rescale: exact, so the represented value never drifts.
            let e = exponent_of(m);
            let s = pow2(-e);
            self.cur *= s;
            self.prev *= s;
            self.exp2 += e;
        }
    }

    pub fn log_scale(&self) -> f64 {
        self.exp2 as f64 * LN_2
    }
}

/// Binary exponent `e` with `m / 2^e ∈ [0.5, 1)` for positive normal `m`.
#[inline]
fn exponent_of(m: f64) -> i64 {
    let bits = m.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        return exponent_of(m * pow2(64)) - 64;
    }
    raw - 1022
}

#[inline]
pub(crate) fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Recursion coefficients at β = ∞: `d = 0`, `c = k/(4N)`.
#[inline]
pub(crate) fn coeff_inf(k: u64, n_size: u64) -> f64 {
    k as f64 / (4.0 * n_size as f64)
}

/// Running `log w_n(z) = ¼log(N/2π) − Nz² + ½Σ_{k≤n} log(4N/k)`, summed with
/// compensation so it stays accurate up to n ~ 10⁷.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LogWeight {
    n: u64,
    log4n: f64,
    sum: f64,
    comp: f64,
    base: f64,
}

impl LogWeight {
    pub fn new(n_size: u64, z: f64) -> Self {
        let nf = n_size as f64;
        LogWeight {
            n: 0,
            log4n: (4.0 * nf).ln(),
            sum: 0.0,
            comp: 0.0,
            base: 0.25 * (nf / (2.0 * std::f64::consts::PI)).ln() - nf * z * z,
        }
    }

    /// Moves from `log w_n` to `log w_{n+1}`.
    #[inline]
    pub fn advance(&mut self) {
        self.n += 1;
        let term = 0.5 * (self.log4n - (self.n as f64).ln());
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.base + self.sum
    }
}

/// Sign bookkeeping for a Sturm sequence: a zero takes the opposite sign of
/// its predecessor, so an eigenvalue sitting exactly at `z` counts as `≥ z`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SignCounter {
    last: i8,
    changes: u64,
}

impl SignCounter {
    /// Starts from `Φ̂_0 = 1`.
    pub fn new() -> Self {
        SignCounter {
            last: 1,
            changes: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            -self.last
        };
        if s != self.last {
            self.changes += 1;
        }
        self.last = s;
    }

    pub fn changes(&self) -> u64 {
        self.changes
    }
}

/// Kahan-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct KahanC {
    re: f64,
    im: f64,
    cre: f64,
    cim: f64,
}

impl KahanC {
    #[inline]
    pub fn add(&mut self, v: num_complex::Complex64) {
        let y = v.re - self.cre;
        let t = self.re + y;
        self.cre = (t - self.re) - y;
        self.re = t;
        let y = v.im - self.cim;
        let t = self.im + y;
        self.cim = (t - self.im) - y;
        self.im = t;
    }

    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re, self.im)
    }
}
