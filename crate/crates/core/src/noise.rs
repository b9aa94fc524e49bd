//! Seeded, random-access generation of the tridiagonal entries
//! `b_k ~ N(0, 2)`, `a_k² ~ χ²_{βk}` and their standardized forms
//! `X_k = b_{k+1}/√2`, `Y_k = (a_k² − βk)/√(2βk)`.
//!
//! Entry `k` is a pure function of `(seed, replicate, k)`: a counter hash
//! seeds a small generator used only for that entry.

use crate::specfun::joukowsky;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Gamma, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use std::f64::consts::SQRT_2;

/// Optional cap on the standardized entries, applied for `k ≥ kappa` by
/// resampling (so the law is the conditioned one, not a clipped one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    None,
    /// `|X_k| ≤ c` and `|Y_k| ≤ c`.
    Fixed(f64),
    /// `|X_k|² + |Y_k|² ≤ β k^ε`.
    Schedule { eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    /// `f64::INFINITY` selects the deterministic limit.
    pub beta: f64,
    pub seed: u64,
    pub truncation: Truncation,
    pub kappa: u64,
}

impl NoiseParams {
    pub fn new(beta: f64, seed: u64) -> Self {
        assert!(beta > 0.0, "beta must be positive");
        NoiseParams {
            beta,
            seed,
            truncation: Truncation::None,
            kappa: 0,
        }
    }

    pub fn with_truncation(mut self, truncation: Truncation, kappa: u64) -> Self {
        self.truncation = truncation;
        self.kappa = kappa;
        self
    }
}

/// Raw and standardized entries with index `k`: `b = b_{k+1}`, `a_sq = a_k²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub k: u64,
    pub b: f64,
    pub a_sq: f64,
    pub x: f64,
    pub y: f64,
}

/// Identity of a stream, used to reject mixing data from different streams.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamId {
    pub seed: u64,
    pub replicate: u64,
    pub beta: f64,
    pub flipped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseStream {
    params: NoiseParams,
    replicate: u64,
    flipped: bool,
}

#[inline]
fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of replicate `index` under `master`; adding replicates never shifts
/// the seeds of existing ones.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix(master ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

impl NoiseStream {
    pub fn new(params: NoiseParams, replicate: u64) -> Self {
        NoiseStream {
            params,
            replicate,
            flipped: false,
        }
    }

    /// Stream with `b_k ↦ −b_k`, i.e. `(X_k, Y_k) ↦ (−X_k, Y_k)`.
    pub fn sign_flipped(&self) -> Self {
        NoiseStream {
            flipped: !self.flipped,
            ..*self
        }
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn is_deterministic(&self) -> bool {
        self.params.beta.is_infinite()
    }

    pub fn id(&self) -> StreamId {
        StreamId {
            seed: self.params.seed,
            replicate: self.replicate,
            beta: self.params.beta,
            flipped: self.flipped,
        }
    }

    fn rng_for(&self, k: u64) -> Xoshiro256PlusPlus {
        let key = splitmix(self.params.seed ^ splitmix(self.replicate ^ splitmix(k)));
        Xoshiro256PlusPlus::seed_from_u64(key)
    }

    /// Entry `k ≥ 0`. Index 0 carries `b_1` only (`a_0 = 0`, `Y_0 = 0`).
    pub fn entry(&self, k: u64) -> Entry {
        let beta = self.params.beta;
        if beta.is_infinite() {
            return Entry {
                k,
                b: 0.0,
                a_sq: f64::INFINITY,
                x: 0.0,
                y: 0.0,
            };
        }
        let mut rng = self.rng_for(k);
        let bk = beta * k as f64;
        let gamma = (k > 0).then(|| Gamma::new(bk / 2.0, 2.0).expect("positive shape"));
        let draw_x = |rng: &mut Xoshiro256PlusPlus| -> f64 { rng.sample(StandardNormal) };
        let draw_y = |rng: &mut Xoshiro256PlusPlus| -> f64 {
            match &gamma {
                Some(g) => (g.sample(rng) - bk) / (2.0 * bk).sqrt(),
                None => 0.0,
            }
        };
        let mut x = draw_x(&mut rng);
        let mut y = draw_y(&mut rng);
        if k >= self.params.kappa {
            match self.params.truncation {
                Truncation::None => {}
                Truncation::Fixed(c) => {
                    let mut tries = 0;
                    while x.abs() > c && tries < MAX_RESAMPLE {
                        x = draw_x(&mut rng);
                        tries += 1;
                    }
                    tries = 0;
                    while y.abs() > c && tries < MAX_RESAMPLE {
                        y = draw_y(&mut rng);
                        tries += 1;
                    }
                    x = x.clamp(-c, c);
                    y = y.clamp(-c, c);
                }
                Truncation::Schedule { eps } => {
                    let cap = beta * (k.max(1) as f64).powf(eps);
                    let mut tries = 0;
                    while x * x + y * y > cap && tries < MAX_RESAMPLE {
                        x = draw_x(&mut rng);
                        y = draw_y(&mut rng);
                        tries += 1;
                    }
                    if x * x + y * y > cap {
                        let s = (cap / (x * x + y * y)).sqrt();
                        x *= s;
                        y *= s;
                    }
                }
            }
        }
        if self.flipped {
            x = -x;
        }
        let a_sq = if k == 0 {
            0.0
        } else {
            bk + y * (2.0 * bk).sqrt()
        };
        Entry {
            k,
            b: x * SQRT_2,
            a_sq,
            x,
            y,
        }
    }

    /// Recursion coefficients of step `k`: `(d_k, c_k)` with
    /// `d_k = b_{k+1}/(2√(Nβ))` and `c_k = a_k²/(4Nβ)`.
    #[inline]
    pub fn coeffs(&self, e: &Entry, n_size: u64) -> (f64, f64) {
        coeffs_of(e, self.params.beta, n_size)
    }

    /// `Z_k(z) = (X_k + J(z√(N/k)) Y_k)/√2` for `k ≥ 1`.
    pub fn z_field(&self, k: u64, z: f64, n_size: u64) -> Complex64 {
        assert!(k >= 1, "z_field needs k >= 1");
        let e = self.entry(k);
        z_of(&e, z, n_size)
    }
}

const MAX_RESAMPLE: usize = 10_000;

#[inline]
pub(crate) fn coeffs_of(e: &Entry, beta: f64, n_size: u64) -> (f64, f64) {
    if beta.is_infinite() {
        return (0.0, crate::recur::coeff_inf(e.k, n_size));
    }
    let nb = n_size as f64 * beta;
    (e.b / (2.0 * nb.sqrt()), e.a_sq / (4.0 * nb))
}

#[inline]
pub(crate) fn z_of(e: &Entry, z: f64, n_size: u64) -> Complex64 {
    let j = joukowsky(z * (n_size as f64 / e.k as f64).sqrt());
    (Complex64::new(e.x, 0.0) + j * e.y) / SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_limit() {
        let s = NoiseStream::new(NoiseParams::new(f64::INFINITY, 3), 0);
        let e = s.entry(17);
        assert_eq!((e.x, e.y, e.b), (0.0, 0.0, 0.0));
        let (d, c) = s.coeffs(&e, 100);
        assert_eq!(d, 0.0);
        assert_eq!(c, 17.0 / 400.0);
    }

    #[test]
    fn random_access_is_pure() {
        let s = NoiseStream::new(NoiseParams::new(2.0, 99), 4);
        let fwd: Vec<_> = (0..50).map(|k| s.entry(k)).collect();
        for k in (0..50).rev() {
            assert_eq!(s.entry(k), fwd[k as usize]);
        }
        let other = NoiseStream::new(NoiseParams::new(2.0, 99), 5);
        assert_ne!(other.entry(3), fwd[3]);
    }

    #[test]
    fn flip_negates_b_only() {
        let s = NoiseStream::new(NoiseParams::new(1.0, 1), 0);
        let f = s.sign_flipped();
        for k in 0..20 {
            let (a, b) = (s.entry(k), f.entry(k));
            assert_eq!(a.x, -b.x);
            assert_eq!(a.b, -b.b);
            assert_eq!(a.y, b.y);
            assert_eq!(a.a_sq, b.a_sq);
        }
    }

    #[test]
    fn truncation_caps_entries() {
        let p = NoiseParams::new(1.0, 7).with_truncation(Truncation::Fixed(0.5), 10);
        let s = NoiseStream::new(p, 0);
        for k in 10..2000 {
            let e = s.entry(k);
            assert!(e.x.abs() <= 0.5 && e.y.abs() <= 0.5);
        }
        let p = NoiseParams::new(2.0, 7).with_truncation(Truncation::Schedule { eps: 0.1 }, 1);
        let s = NoiseStream::new(p, 0);
        for k in 1..2000 {
            let e = s.entry(k);
            assert!(e.x * e.x + e.y * e.y <= 2.0 * (k as f64).powf(0.1) + 1e-12);
        }
    }

    #[test]
    fn seeds_are_distinct() {
        let a: Vec<u64> = (0..1000).map(|i| derive_seed(5, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
    }
}
