//! Complex Prüfer phase `ψ_n(z) = log ξ_n(z)` on the elliptic stretch
//! `n > Nz²`, where
//! `ξ_n = i√(n/(n−Nz²))(e^{−iθ_n}Φ_n − √((n+1)/n)Φ_{n+1})`, so `Re ξ_n = Φ_n`.
//!
//! The branch of `φ_n = Im ψ_n` is fixed by the counting identity
//! `⌊(φ_n + π/2)/π⌋ = #{eigenvalues ≥ z of the n × n minor}` and then carried
//! forward by principal-branch increments of the one-step map
//! `ξ_n e^{−iθ_n} = (1 − Δ_n + Z′_n)ξ_{n−1} + (Δ_n − conj(Z′_n)e^{−2iθ_n})conj(ξ_{n−1})`.

use crate::error::{domain, Error, Result};
use crate::noise::{Entry, NoiseStream, StreamId};
use crate::recur::{LogWeight, ScaledPair, SignCounter};
use crate::specfun::{semicircle, theta_unchecked, SpectrumGeometry};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `ξ_n(z)` from the normalized values `Φ_n(z)`, `Φ_{n+1}(z)`.
pub fn xi_from_polys(z: f64, n: u64, phi_n: f64, phi_np1: f64, n_size: u64) -> Result<Complex64> {
    let nz2 = n_size as f64 * z * z;
    if (n as f64) <= nz2 {
        return domain("xi_from_polys", format!("n={n} is not above N z² = {nz2}"));
    }
    let nf = n as f64;
    let cos_t = z * (n_size as f64 / nf).sqrt();
    let sin_t = ((nf - nz2) / nf).sqrt();
    let e = Complex64::new(cos_t, -sin_t);
    let pre = (nf / (nf - nz2)).sqrt();
    let inner = e * phi_n - ((nf + 1.0) / nf).sqrt() * phi_np1;
    let mut xi = I * pre * inner;
    // Re ξ_n = Φ_n holds algebraically; pin it against rounding.
    xi.re = phi_n;
    Ok(xi)
}

/// Default starting index `N0 + ⌈L⌉`, kept strictly above `Nz²`.
pub fn default_start(n_size: u64, z: f64) -> u64 {
    let g = SpectrumGeometry::new(n_size, z);
    (g.n0 + g.l.ceil() as u64).max(g.n0 + 1)
}

/// Streaming evaluator of `ψ_n(z)` fed one noise entry at a time.
///
/// After consuming entries `0..=j` the recursion holds `(Φ̂_{j+1}, Φ̂_j)` and,
/// once `j ≥ start`, the phase is `ψ_j`.
#[derive(Clone, Debug)]
pub struct PhaseWalker {
    n_size: u64,
    z: f64,
    nz2: f64,
    beta: f64,
    noise_scale: f64,
    start: u64,
    fed: u64,
    pair: ScaledPair,
    weight: LogWeight,
    signs: SignCounter,
    changes_prev: u64,
    // ψ = re + i(2π·turns + frac)
    re: f64,
    turns: i64,
    frac: f64,
    cos_prev: f64,
    sin_prev: f64,
    delta_prev: f64,
}

impl PhaseWalker {
    pub fn new(beta: f64, z: f64, n_size: u64, start: u64) -> Result<Self> {
        let nz2 = n_size as f64 * z * z;
        if (start as f64) <= nz2 {
            return domain("phase start", format!("start={start} is not above N z² = {nz2}"));
        }
        if start > n_size {
            return domain("phase start", format!("start={start} exceeds N={n_size}"));
        }
        Ok(PhaseWalker {
            n_size,
            z,
            nz2,
            beta,
            noise_scale: if beta.is_infinite() {
                0.0
            } else {
                1.0 / (2.0 * beta).sqrt()
            },
            start,
            fed: 0,
            pair: ScaledPair::start(),
            weight: LogWeight::new(n_size, z),
            signs: SignCounter::new(),
            changes_prev: 0,
            re: 0.0,
            turns: 0,
            frac: 0.0,
            cos_prev: 0.0,
            sin_prev: 1.0,
            delta_prev: 1.0,
        })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Index of the current phase value, if any.
    pub fn index(&self) -> Option<u64> {
        (self.fed > self.start).then(|| self.fed - 1)
    }

    /// Number of entries consumed.
    pub fn consumed(&self) -> u64 {
        self.fed
    }

    pub fn psi(&self) -> Complex64 {
        Complex64::new(self.re, TAU * self.turns as f64 + self.frac)
    }

    /// `φ_n` reduced to `(−π, π]`.
    pub fn phi_reduced(&self) -> f64 {
        self.frac
    }

    /// `⌊(φ_n + π/2)/π⌋`, computed without forming the large phase.
    pub fn phase_count(&self) -> i64 {
        2 * self.turns + ((self.frac + FRAC_PI_2) / PI).floor() as i64
    }

    /// Sign changes in `Φ̂_0, …, Φ̂_n` for the current phase index `n`.
    pub fn sturm_count(&self) -> u64 {
        self.changes_prev
    }

    /// `(sign, log|Φ_n|)` at the current phase index, from the recursion.
    pub fn log_normalized(&self) -> (f64, f64) {
        let n1 = self.fed as f64;
        let m = self.pair.prev;
        let log_w_n = self.weight.value() - 0.5 * (4.0 * self.n_size as f64 / n1).ln();
        if m == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        (m.signum(), m.abs().ln() + self.pair.log_scale() + log_w_n)
    }

    /// Whether the counting identity holds at the current index.
    pub fn check(&self) -> Result<()> {
        let n = self.index().unwrap_or(0);
        let pc = self.phase_count();
        let sc = self.changes_prev as i64;
        if pc != sc {
            return Err(Error::Branch {
                index: n,
                phase_count: pc,
                sturm_count: sc,
            });
        }
        Ok(())
    }

    #[inline]
    fn set_phase_im(&mut self, im: f64) {
        let k = (im / TAU).round();
        self.turns += k as i64;
        self.frac = im - TAU * k;
    }

    /// Consumes entry `k == consumed()`.
    pub fn feed(&mut self, e: &Entry) -> Result<()> {
        debug_assert_eq!(e.k, self.fed);
        let n = e.k;
        let nsz = self.n_size as f64;
        if n > self.start {
            // ψ_{n−1} → ψ_n with X_n, Y_n
            let nf = n as f64;
            let cos_t = self.z * (nsz / nf).sqrt();
            let sin_t = ((nf - self.nz2) / nf).sqrt();
            let delta = 1.0 / (nf - self.nz2).sqrt();
            let e_m = Complex64::new(cos_t, -sin_t); // e^{−iθ_n}
            let half = 0.5 * (1.0 - delta / self.delta_prev);
            let zp = if self.noise_scale == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let e_prev = Complex64::new(self.cos_prev, self.sin_prev);
                I * (delta * self.noise_scale)
                    * (((nf - 1.0) / nf).sqrt() * e_prev * e.x + e.y)
                    * e_m
            };
            let a = 1.0 - half + zp;
            let b = half - zp.conj() * e_m * e_m;
            let rot = Complex64::from_polar(1.0, -2.0 * self.frac);
            let inc = (a + b * rot).ln();
            let theta = theta_unchecked(n, self.z, self.n_size);
            self.re += inc.re;
            self.set_phase_im(self.frac + theta + inc.im);
            self.cos_prev = cos_t;
            self.sin_prev = sin_t;
            self.delta_prev = delta;
        }
        let (d, c) = crate::noise::coeffs_of(e, self.beta, self.n_size);
        self.changes_prev = self.signs.changes();
        self.pair.step(self.z - d, c);
        self.weight.advance();
        self.signs.push(self.pair.cur);
        self.fed += 1;
        if n == self.start {
            self.anchor()?;
        }
        Ok(())
    }

    fn anchor(&mut self) -> Result<()> {
        let n = self.start;
        let nf = n as f64;
        let nsz = self.n_size as f64;
        let cos_t = self.z * (nsz / nf).sqrt();
        let sin_t = ((nf - self.nz2) / nf).sqrt();
        let delta = 1.0 / (nf - self.nz2).sqrt();
        // ξ_n = w_n 2^e · i√n δ_n (e^{−iθ}m_n − √(4N/n) m_{n+1})
        let inner = Complex64::new(cos_t, -sin_t) * self.pair.prev
            - (4.0 * nsz / nf).sqrt() * self.pair.cur;
        let v = I * inner;
        if v.norm() == 0.0 {
            return Err(Error::Degenerate(format!("ξ_{n} vanished")));
        }
        let log_w_n = self.weight.value() - 0.5 * (4.0 * nsz / (nf + 1.0)).ln();
        self.re = v.norm().ln() + (nf.sqrt() * delta).ln() + self.pair.log_scale() + log_w_n;
        let a = v.arg();
        let count = self.changes_prev as f64;
        let k = ((count * PI - a) / TAU).round();
        self.turns = k as i64;
        self.frac = a;
        self.cos_prev = cos_t;
        self.sin_prev = sin_t;
        self.delta_prev = delta;
        self.check()
    }
}

/// Stored phase `ψ_n(z)` for `n = start..=N`.
#[derive(Clone, Debug)]
pub struct PhaseTrajectory {
    pub z: f64,
    pub n_size: u64,
    pub beta: f64,
    stream: StreamId,
    start: u64,
    psi: Vec<Complex64>,
    /// `(index, sturm count)` used to pick the branch.
    pub anchor: (u64, u64),
    /// `(index, sturm count)` pairs where the counting identity was verified.
    pub checkpoints: Vec<(u64, u64)>,
}

impl PhaseTrajectory {
    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn end(&self) -> u64 {
        self.start + self.psi.len() as u64 - 1
    }

    pub fn stream_id(&self) -> StreamId {
        self.stream
    }

    pub fn psi(&self, n: u64) -> Complex64 {
        self.psi[(n - self.start) as usize]
    }

    pub fn psi_final(&self) -> Complex64 {
        *self.psi.last().expect("non-empty trajectory")
    }

    /// `φ_n` for `n` in range.
    pub fn phi(&self, n: u64) -> f64 {
        self.psi(n).im
    }

    /// Per-step principal increments `ψ_n − ψ_{n−1} − iθ_n`.
    pub fn ratio_log(&self) -> Vec<Complex64> {
        (self.start + 1..=self.end())
            .map(|n| {
                self.psi(n) - self.psi(n - 1)
                    - I * theta_unchecked(n, self.z, self.n_size)
            })
            .collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.psi
            .iter()
            .enumerate()
            .map(|(i, p)| (self.start + i as u64, *p))
    }
}

fn checkpoint_indices(start: u64, end: u64) -> Vec<u64> {
    let m = (end.max(2) as f64).log2().ceil() as u64;
    let span = end - start;
    let mut v: Vec<u64> = (1..=m).map(|i| start + span * i / m).collect();
    v.dedup();
    v
}

/// Builds `ψ_n(z)` for `n = start..=N`, verifying the branch at `⌈log₂N⌉`
/// checkpoints. `start` defaults to `N0 + ⌈L⌉`.
pub fn phase_trajectory(
    stream: &NoiseStream,
    z: f64,
    n_size: u64,
    start: Option<u64>,
) -> Result<PhaseTrajectory> {
    let start = start.unwrap_or_else(|| default_start(n_size, z));
    let mut walker = PhaseWalker::new(stream.beta(), z, n_size, start)?;
    let checks = checkpoint_indices(start, n_size);
    let mut next_check = 0;
    let mut psi = Vec::with_capacity((n_size - start + 1) as usize);
    let mut checkpoints = Vec::with_capacity(checks.len());
    let mut anchor = (start, 0);
    for k in 0..=n_size {
        walker.feed(&stream.entry(k))?;
        if k == start {
            anchor = (start, walker.sturm_count());
        }
        if k >= start {
            psi.push(walker.psi());
            if next_check < checks.len() && checks[next_check] == k {
                walker.check()?;
                checkpoints.push((k, walker.sturm_count()));
                next_check += 1;
            }
        }
    }
    Ok(PhaseTrajectory {
        z,
        n_size,
        beta: stream.beta(),
        stream: stream.id(),
        start,
        psi,
        anchor,
        checkpoints,
    })
}

/// Spectral points `z − λ/(Nρ(z))` probed by [`relative_phase`].
pub fn shifted_points(z: f64, lambdas: &[f64], n_size: u64) -> Result<Vec<f64>> {
    let (rho, _) = semicircle(z);
    let nf = n_size as f64;
    if nf.cbrt() * rho < 8.0 {
        return domain("relative_phase", format!("z={z} is not in the bulk for N={n_size}"));
    }
    lambdas
        .iter()
        .map(|&l| {
            let x = z - l / (nf * rho);
            if x.abs() >= 1.0 {
                domain("relative_phase", format!("shifted point {x} leaves (-1, 1)"))
            } else {
                Ok(x)
            }
        })
        .collect()
}

/// `ψ_N(z)` together with `φ_N(λ; z) = 2(ψ_N(z − λ/(Nρ(z))) − ψ_N(z))` for each
/// `λ`, all evaluated on one noise stream.
///
/// With this orientation `Im φ_N(λ; z)` is non-decreasing in `λ` and counts
/// eigenvalues in `[z − λ/(Nρ), z)` in units of `2π`, and
/// `Φ_N(z − λ/(Nρ)) = Re exp(ψ_N(z) + φ_N(λ; z)/2)`.
pub fn relative_phase_with_base(
    stream: &NoiseStream,
    z: f64,
    lambdas: &[f64],
    n_size: u64,
) -> Result<(Complex64, Vec<Complex64>)> {
    let points = shifted_points(z, lambdas, n_size)?;
    let mut lanes = Vec::with_capacity(points.len() + 1);
    lanes.push(PhaseWalker::new(stream.beta(), z, n_size, default_start(n_size, z))?);
    for &x in &points {
        lanes.push(PhaseWalker::new(stream.beta(), x, n_size, default_start(n_size, x))?);
    }
    for k in 0..=n_size {
        let e = stream.entry(k);
        for w in lanes.iter_mut() {
            w.feed(&e)?;
        }
    }
    for w in &lanes {
        w.check()?;
    }
    let base = lanes[0].psi();
    let rel = lambdas
        .iter()
        .zip(&lanes[1..])
        .map(|(&l, w)| {
            if l == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                2.0 * (w.psi() - base)
            }
        })
        .collect();
    Ok((base, rel))
}

/// `φ_N(λ; z)` for each `λ`; see [`relative_phase_with_base`].
pub fn relative_phase(
    stream: &NoiseStream,
    z: f64,
    lambdas: &[f64],
    n_size: u64,
) -> Result<Vec<Complex64>> {
    relative_phase_with_base(stream, z, lambdas, n_size).map(|(_, r)| r)
}

/// `Φ_N(z − λ/(Nρ(z))) / Φ_N(z)` for each `λ`, from the phases; the large
/// common modulus cancels before exponentiation.
pub fn polynomial_ratio(
    stream: &NoiseStream,
    z: f64,
    lambdas: &[f64],
    n_size: u64,
) -> Result<Vec<f64>> {
    let (base, rel) = relative_phase_with_base(stream, z, lambdas, n_size)?;
    let alpha = base.im;
    Ok(rel
        .iter()
        .map(|phi| (Complex64::new(0.0, alpha) + phi * 0.5).exp().re / alpha.cos())
        .collect())
}

/// `c_β = 1/4 − 1/(2β)`.
pub fn c_beta(beta: f64) -> f64 {
    0.25 - 0.5 / beta
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `Ω_N(z) = ψ_N − iπNF(z) + c_β log(1−z²) + M_N/√β` with the imaginary part
/// reported in `(−π, π]`.
pub fn omega_error(traj: &PhaseTrajectory, m_n: Complex64) -> Complex64 {
    omega_from_psi(traj.psi_final(), traj.z, traj.n_size, traj.beta, m_n)
}

/// [`omega_error`] from a bare `ψ_N`.
pub fn omega_from_psi(psi: Complex64, z: f64, n_size: u64, beta: f64, m_n: Complex64) -> Complex64 {
    let (_, f) = semicircle(z);
    let m_term = if beta.is_infinite() {
        Complex64::new(0.0, 0.0)
    } else {
        m_n / beta.sqrt()
    };
    // πNF is large; reduce NF mod 2 before multiplying by π.
    let nf = (n_size as f64 * f).rem_euclid(2.0);
    let im = wrap_angle(wrap_angle(psi.im) - PI * nf + m_term.im);
    let re = psi.re + c_beta(beta) * (1.0 - z * z).ln() + m_term.re;
    Complex64::new(re, im)
}
