//! Martingale noise fields
//! `G_n = Σ Z_k/σ_k`, `W_n = Σ_{k>N0} iδ_k Z_k e^{2i(θ_k+φ_{k−1})}`, `M = G + conj(W)`,
//! where the sums skip the turning-point window `|k − Nz²| < T·L`,
//! `σ_k = √k √(Nz²/k − 1)` is `sgn(z)√(Nz² − k)` below the turning point and
//! `i√(k − Nz²)` above it, and `δ_k = 1/√(k − Nz²)`.
//!
//! With this sign of `W` the one-step expansion of the phase reads
//! `ψ_n − ψ_{n−1} − iθ_n = −(M_n − M_{n−1})/√β + O(δ_n²)`, which is what makes
//! `ψ_N + M_N/√β` tight. Note `iδ_k = 1/conj(σ_k)`.

use crate::error::{domain, Error, Result};
use crate::noise::{z_of, Entry, NoiseStream};
use crate::prufer::{PhaseTrajectory, PhaseWalker};
use crate::recur::KahanC;
use crate::specfun::{joukowsky, semicircle, theta_unchecked, SpectrumGeometry};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `σ_k(z)`, the denominator of the field increments.
pub fn sigma(k: u64, z: f64, n_size: u64) -> Complex64 {
    let a = n_size as f64 * z * z;
    let kf = k as f64;
    if kf < a {
        Complex64::new(z.signum() * (a - kf).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (kf - a).sqrt())
    }
}

/// `E Z_k(z)² = (1 + J²)/2` and `E|Z_k(z)|² = (1 + |J|²)/2`.
fn z_moments(k: u64, z: f64, n_size: u64) -> (Complex64, f64) {
    let j = joukowsky(z * (n_size as f64 / k as f64).sqrt());
    ((1.0 + j * j) / 2.0, (1.0 + j.norm_sqr()) / 2.0)
}

/// Final values of the fields and their brackets along one trajectory.
#[derive(Clone, Debug)]
pub struct MartingaleLedger {
    pub z: f64,
    pub n_size: u64,
    pub beta: f64,
    pub t: f64,
    pub g: Complex64,
    pub w: Complex64,
    pub m: Complex64,
    /// `[G, G]` and `[G, conj G]` at `x = z`.
    pub bracket_gg: Complex64,
    pub bracket_ggbar: f64,
    pub bracket_ww: Complex64,
    pub bracket_wwbar: f64,
    /// Values of `G`, `W` at `n = N0`.
    pub g_turning: Complex64,
    pub w_turning: Complex64,
    /// Open interval of excluded indices `(Nz² − T·L, Nz² + T·L)`.
    pub excluded: (f64, f64),
}

/// Streaming accumulator; feed entries `k = 1..=N` in order.
#[derive(Clone, Debug)]
pub struct FieldAccumulator {
    geom: SpectrumGeometry,
    beta: f64,
    t: f64,
    g: KahanC,
    w: KahanC,
    gg: KahanC,
    ggbar: KahanC,
    ww: KahanC,
    wwbar: KahanC,
    g_turning: Complex64,
    w_turning: Complex64,
}

impl FieldAccumulator {
    pub fn new(z: f64, n_size: u64, t: f64, beta: f64) -> Self {
        FieldAccumulator {
            geom: SpectrumGeometry::new(n_size, z),
            beta,
            t,
            g: KahanC::default(),
            w: KahanC::default(),
            gg: KahanC::default(),
            ggbar: KahanC::default(),
            ww: KahanC::default(),
            wwbar: KahanC::default(),
            g_turning: ZERO,
            w_turning: ZERO,
        }
    }

    /// First `k` with a `W` term, or `None` if there is none up to `N`.
    pub fn first_w_index(&self) -> Option<u64> {
        (self.geom.n0 + 1..=self.geom.n_size).find(|&k| self.needs_phase(k))
    }

    /// Phase index needed before the first `W` term.
    pub fn phase_start(&self) -> u64 {
        self.first_w_index().map_or(self.geom.n_size, |k| k - 1)
    }

    /// Whether entry `k` contributes to `W`, which needs `φ_{k−1}`. Terms whose
    /// `φ_{k−1}` is undefined (`k − 1 ≤ Nz²`) are skipped.
    pub fn needs_phase(&self, k: u64) -> bool {
        k > self.geom.n0 && (k - 1) as f64 > self.geom.nz2() && !self.geom.excluded(k, self.t)
    }

    /// Adds entry `k ≥ 1`; `phi_prev` is `φ_{k−1}` (any representative mod 2π)
    /// and is required exactly when [`Self::needs_phase`] holds.
    pub fn push(&mut self, e: &Entry, phi_prev: Option<f64>) -> Result<()> {
        let k = e.k;
        let g = self.geom;
        let (z, n_size) = (g.z, g.n_size);
        if k >= 1 && !g.excluded(k, self.t) {
            let s = sigma(k, z, n_size);
            let zk = z_of(e, z, n_size);
            let (ez2, eabs2) = z_moments(k, z, n_size);
            self.g.add(zk / s);
            self.gg.add(ez2 / (s * s));
            self.ggbar.add(Complex64::new(eabs2 / s.norm_sqr(), 0.0));
            if self.needs_phase(k) {
                let phi = phi_prev.ok_or_else(|| {
                    Error::StreamMismatch(format!("phase at n={} is missing", k - 1))
                })?;
                let theta = theta_unchecked(k, z, n_size);
                let rot = Complex64::from_polar(1.0, 2.0 * (theta + phi));
                self.w.add(zk * rot / s.conj());
                self.wwbar.add(Complex64::new(1.0 / s.norm_sqr(), 0.0));
                self.ww.add(ez2 * rot * rot / (s * s));
            }
        }
        if k == g.n0 {
            self.g_turning = self.g.value();
            self.w_turning = self.w.value();
        }
        Ok(())
    }

    pub fn finish(&self) -> MartingaleLedger {
        let g = self.g.value();
        let w = self.w.value();
        let nz2 = self.geom.nz2();
        let half = self.t * self.geom.l;
        MartingaleLedger {
            z: self.geom.z,
            n_size: self.geom.n_size,
            beta: self.beta,
            t: self.t,
            g,
            w,
            m: g + w.conj(),
            bracket_gg: self.gg.value(),
            bracket_ggbar: self.ggbar.value().re,
            bracket_ww: self.ww.value(),
            bracket_wwbar: self.wwbar.value().re,
            g_turning: if self.geom.n0 == 0 { ZERO } else { self.g_turning },
            w_turning: if self.geom.n0 == 0 { ZERO } else { self.w_turning },
            excluded: (nz2 - half, nz2 + half),
        }
    }
}

/// Builds the ledger from a stored phase trajectory on the same stream.
pub fn accumulate_fields(
    stream: &NoiseStream,
    z: f64,
    n_size: u64,
    t: f64,
    phase: &PhaseTrajectory,
) -> Result<MartingaleLedger> {
    if phase.stream_id() != stream.id() || phase.z != z || phase.n_size != n_size {
        return Err(Error::StreamMismatch(
            "phase trajectory was built from a different stream or point".into(),
        ));
    }
    let mut acc = FieldAccumulator::new(z, n_size, t, stream.beta());
    if acc.first_w_index().is_some() && phase.start() > acc.phase_start() {
        return domain(
            "accumulate_fields",
            format!(
                "phase starts at {} but the W field needs it from {}",
                phase.start(),
                acc.phase_start()
            ),
        );
    }
    for k in 1..=n_size {
        let phi = acc.needs_phase(k).then(|| phase.phi(k - 1));
        acc.push(&stream.entry(k), phi)?;
    }
    Ok(acc.finish())
}

/// Everything a single streaming pass produces at one point `z`.
#[derive(Clone, Debug)]
pub struct FieldRun {
    pub ledger: MartingaleLedger,
    pub psi: Complex64,
    /// `(sign, log|Φ_N(z)|)`.
    pub log_phi: (f64, f64),
}

/// One pass over the stream computing `ψ_N(z)`, the fields and `Φ_N(z)`, with
/// the phase started where the `W` field first needs it.
pub fn field_run(stream: &NoiseStream, z: f64, n_size: u64, t: f64) -> Result<FieldRun> {
    let mut acc = FieldAccumulator::new(z, n_size, t, stream.beta());
    let start = acc.phase_start();
    let mut walker = PhaseWalker::new(stream.beta(), z, n_size, start)?;
    for k in 0..=n_size {
        let e = stream.entry(k);
        if k >= 1 {
            let phi = if acc.needs_phase(k) {
                if walker.index() != Some(k - 1) {
                    return domain("field_run", format!("phase unavailable at n={}", k - 1));
                }
                Some(walker.phi_reduced())
            } else {
                None
            };
            acc.push(&e, phi)?;
        }
        walker.feed(&e)?;
    }
    walker.check()?;
    Ok(FieldRun {
        ledger: acc.finish(),
        psi: walker.psi(),
        log_phi: walker.log_normalized(),
    })
}

/// Terms of `[G(z), G(x)]` and `[G(z), conj G(x)]` for `k ∉ Γ(z) ∪ Γ(x)`.
pub fn bracket_g_terms(
    z: f64,
    x: f64,
    n_size: u64,
    t: f64,
    ks: impl Iterator<Item = u64>,
) -> impl Iterator<Item = (Complex64, Complex64)> {
    let gz = SpectrumGeometry::new(n_size, z);
    let gx = SpectrumGeometry::new(n_size, x);
    ks.filter(move |&k| k >= 1 && !gz.excluded(k, t) && !gx.excluded(k, t))
        .map(move |k| {
            let r = (n_size as f64 / k as f64).sqrt();
            let (jz, jx) = (joukowsky(z * r), joukowsky(x * r));
            let (sz, sx) = (sigma(k, z, n_size), sigma(k, x, n_size));
            (
                (1.0 + jz * jx) / (2.0 * sz * sx),
                (1.0 + jz * jx.conj()) / (2.0 * sz * sx.conj()),
            )
        })
}

/// Deterministic brackets `([G_N(z), G_N(x)], [G_N(z), conj G_N(x)])`.
pub fn bracket_g_pair(z: f64, x: f64, n_size: u64, t: f64) -> (Complex64, Complex64) {
    bracket_g_range(z, x, n_size, t, 1, n_size)
}

/// Brackets restricted to `lo ≤ k ≤ hi`.
pub fn bracket_g_range(
    z: f64,
    x: f64,
    n_size: u64,
    t: f64,
    lo: u64,
    hi: u64,
) -> (Complex64, Complex64) {
    let mut a = KahanC::default();
    let mut b = KahanC::default();
    for (p, q) in bracket_g_terms(z, x, n_size, t, lo..=hi) {
        a.add(p);
        b.add(q);
    }
    (a.value(), b.value())
}

/// `([W, conj W], [W, W])` at `n = N`.
pub fn bracket_w(ledger: &MartingaleLedger) -> (f64, Complex64) {
    (ledger.bracket_wwbar, ledger.bracket_ww)
}

/// Deterministic `[W, conj W] = Σ_{k>N0, k∉Γ} 1/(k − Nz²)`.
pub fn bracket_wwbar_sum(z: f64, n_size: u64, t: f64) -> f64 {
    let g = SpectrumGeometry::new(n_size, z);
    let mut acc = KahanC::default();
    for k in g.n0 + 1..=n_size {
        if (k - 1) as f64 > g.nz2() && !g.excluded(k, t) {
            acc.add(Complex64::new(1.0 / (k as f64 - g.nz2()), 0.0));
        }
    }
    acc.value().re
}

/// Which asymptotic description of the covariance applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Global,
    Local,
}

/// Predicted `([M(z), M(x)], [M(z), conj M(x)])` in both regimes.
#[derive(Clone, Copy, Debug)]
pub struct CovarianceTheory {
    pub global: (Complex64, Complex64),
    pub local: (f64, f64),
    /// `N^{−2/3} max(|z|, N^{−1/2})^{−1/3}`.
    pub boundary: f64,
    pub regime: Regime,
}

impl CovarianceTheory {
    /// The prediction for the applicable regime.
    pub fn predicted(&self) -> (Complex64, Complex64) {
        match self.regime {
            Regime::Global => self.global,
            Regime::Local => (
                Complex64::new(self.local.0, 0.0),
                Complex64::new(self.local.1, 0.0),
            ),
        }
    }
}

/// Log-correlated covariance predictions for the pair `(z, x)`.
pub fn covariance_theory(z: f64, x: f64, n_size: u64) -> CovarianceTheory {
    let nf = n_size as f64;
    let (jz, jx) = (joukowsky(z), joukowsky(x));
    // the hermitian part is conjugated by swapping z and x, so keep the order here
    let global = (
        -2.0 * (1.0 - jz * jx).ln(),
        -2.0 * (1.0 - jz * jx.conj()).ln(),
    );
    let (z, x) = if x.abs() > z.abs() { (x, z) } else { (z, x) };
    let (rho, _) = semicircle(z);
    let eps = if z.abs() <= 1.0 {
        SpectrumGeometry::new(n_size, z).eps_n
    } else {
        nf.powf(-1.0 / 3.0)
    };
    let d = (x - z).abs();
    let local_bar = if rho > 0.0 { (d / rho).max(eps) } else { eps };
    let local = (-2.0 * rho.max(eps).ln(), -2.0 * local_bar.ln());
    let boundary = nf.powf(-2.0 / 3.0) * z.abs().max(nf.powf(-0.5)).powf(-1.0 / 3.0);
    let off_spectrum = z.abs() - 1.0 > nf.powf(-2.0 / 3.0);
    let regime = if off_spectrum || d > boundary {
        Regime::Global
    } else {
        Regime::Local
    };
    CovarianceTheory {
        global,
        local,
        boundary,
        regime,
    }
}
