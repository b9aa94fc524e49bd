//! Replicate farming over a scoped thread pool.
//!
//! Work is handed out by index; results are put back in index order, so the
//! output never depends on the number of workers or on scheduling.

use betaprufer::noise::derive_seed;
use betaprufer::Error;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

#[derive(Clone, Copy, Debug)]
pub struct FarmOptions {
    pub parallelism: usize,
    /// Fraction of replicates forced to fail, for testing the abort rule.
    pub inject_failure_rate: f64,
}

impl Default for FarmOptions {
    fn default() -> Self {
        FarmOptions {
            parallelism: default_parallelism(),
            inject_failure_rate: 0.0,
        }
    }
}

pub fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub replicate: u64,
    pub seed: u64,
    pub message: String,
    /// The replicate hit a domain error, which points at the config rather than the numerics.
    pub domain: bool,
}

#[derive(Debug)]
pub struct FarmOutput<T> {
    /// `(replicate, value)` in replicate order, failures left out.
    pub results: Vec<(u64, T)>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, thiserror::Error)]
#[error("{} of {total} replicates failed (first: replicate {}: {})", failures.len(), failures[0].replicate, failures[0].message)]
pub struct FarmAbort {
    pub total: u64,
    pub failures: Vec<Failure>,
}

/// Seed for replicate `index` of a run with `master` seed.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    derive_seed(master, index)
}

/// Evenly spaced: exactly `⌊replicates · rate⌋` replicates are hit.
fn injected(index: u64, rate: f64) -> bool {
    rate > 0.0 && ((index + 1) as f64 * rate).floor() > (index as f64 * rate).floor()
}

/// Runs `job(index, seed)` for every replicate. Aborts when at least 1% of
/// replicates fail; smaller failure counts are reported alongside the results.
pub fn replicate_farm<T, F>(
    master: u64,
    replicates: u64,
    opts: FarmOptions,
    job: F,
) -> Result<FarmOutput<T>, FarmAbort>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T, Error> + Sync,
{
    let next = AtomicU64::new(0);
    let done: Mutex<Vec<(u64, Result<T, Failure>)>> = Mutex::new(Vec::with_capacity(replicates as usize));
    let workers = opts.parallelism.max(1).min(replicates.max(1) as usize);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut local = Vec::new();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= replicates {
                        break;
                    }
                    let seed = replicate_seed(master, i);
                    let r = if injected(i, opts.inject_failure_rate) {
                        Err(Failure {
                            replicate: i,
                            seed,
                            message: "injected branch failure".into(),
                            domain: false,
                        })
                    } else {
                        job(i, seed).map_err(|e| Failure {
                            replicate: i,
                            seed,
                            message: e.to_string(),
                            domain: matches!(e, Error::Domain { .. }),
                        })
                    };
                    local.push((i, r));
                }
                done.lock().expect("no worker panicked").extend(local);
            });
        }
    });
    let mut all = done.into_inner().expect("no worker panicked");
    all.sort_by_key(|(i, _)| *i);
    let mut results = Vec::with_capacity(all.len());
    let mut failures = Vec::new();
    for (i, r) in all {
        match r {
            Ok(v) => results.push((i, v)),
            Err(f) => failures.push(f),
        }
    }
    if failures.len() as u64 * 100 >= replicates && !failures.is_empty() {
        return Err(FarmAbort {
            total: replicates,
            failures,
        });
    }
    Ok(FarmOutput { results, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_independent_of_workers() {
        let job = |i: u64, s: u64| Ok((i, s));
        let a = replicate_farm(5, 100, FarmOptions { parallelism: 1, inject_failure_rate: 0.0 }, job).unwrap();
        let b = replicate_farm(5, 100, FarmOptions { parallelism: 7, inject_failure_rate: 0.0 }, job).unwrap();
        assert_eq!(a.results, b.results);
        assert!(a.results.iter().enumerate().all(|(k, (i, _))| k as u64 == *i));
    }

    #[test]
    fn one_percent_rule() {
        let opts = FarmOptions { parallelism: 2, inject_failure_rate: 0.0 };
        let one_bad = |i: u64, _| {
            if i == 3 {
                Err(Error::Degenerate("boom".into()))
            } else {
                Ok(i)
            }
        };
        // 1 of 200 is below 1%
        let out = replicate_farm(0, 200, opts, one_bad).unwrap();
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.results.len(), 199);
        // 1 of 100 is not
        let err = replicate_farm(0, 100, opts, one_bad).unwrap_err();
        assert_eq!(err.failures[0].replicate, 3);
    }

    #[test]
    fn injection_hits_about_the_requested_fraction() {
        assert_eq!((0..10_000).filter(|&i| injected(i, 0.02)).count(), 200);
        assert_eq!((0..150).filter(|&i| injected(i, 0.02)).count(), 3);
        assert!(!(0..100).any(|i| injected(i, 0.0)));
    }
}
