//! One runner per experiment kind. Each returns CSV tables; nothing here
//! touches the filesystem.

use crate::config::{ExperimentConfig, Kind};
use crate::farm::{replicate_farm, replicate_seed, FarmAbort, FarmOptions, FarmOutput, Failure};
use betaprufer::airy::{edge_compare, solve_sai};
use betaprufer::charpoly::run_recursion;
use betaprufer::fields::{covariance_theory, field_run, Regime};
use betaprufer::noise::{derive_seed, NoiseParams, NoiseStream};
use betaprufer::prufer::{omega_from_psi, phase_trajectory, polynomial_ratio};
use betaprufer::sine::{sine_points_with, solve_sine, zeta_sample};
use betaprufer::specfun::{airy_ai, hermite_square_integral};
use betaprufer::stats::{complex_cov, ks_two_sample, slope_fit, SampleSummary};
use betaprufer::{Complex64, Error};
use std::f64::consts::PI;

/// Salt separating the sine-path seeds of `zeta-ratio` from its matrix seeds.
const ZETA_SALT: u64 = 0x7a65_7461_0000_0000;
const HERMITE_TOLERANCE: f64 = 1e-6;

/// A CSV file in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&'static str]) -> Self {
        Table {
            name: name.into(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip form (exponent notation for tiny and huge values), so
/// equal values always print equal.
fn f(x: f64) -> String {
    format!("{x:?}")
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

pub struct Outcome {
    pub tables: Vec<Table>,
    pub replicate_seeds: Vec<u64>,
    pub failures: Vec<Failure>,
    /// A post-run numerical check that did not hold.
    pub check_failure: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Farm(#[from] FarmAbort),
    #[error("{0}")]
    Domain(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Domain(e)
    }
}

fn stream(beta: f64, seed: u64) -> NoiseStream {
    NoiseStream::new(NoiseParams::new(beta, seed), 0)
}

fn seeds(c: &ExperimentConfig) -> Vec<u64> {
    (0..c.replicates).map(|i| replicate_seed(c.seed, i)).collect()
}

fn outcome(tables: Vec<Table>, c: &ExperimentConfig, failures: Vec<Failure>) -> Outcome {
    Outcome {
        tables,
        replicate_seeds: seeds(c),
        failures,
        check_failure: None,
    }
}

fn summary_of<'a>(xs: impl Iterator<Item = &'a Complex64>) -> SampleSummary {
    // fold in replicate order: deterministic whatever the worker count
    xs.fold(SampleSummary::new(), |acc, x| acc.merge(&SampleSummary::from_slice(&[*x])))
}

pub fn run_experiment(c: &ExperimentConfig, opts: FarmOptions) -> Result<Outcome, RunError> {
    let name = c.kind.name();
    match c.kind {
        Kind::HermiteCheck => hermite_check(c, name),
        Kind::CharpolySample => charpoly_sample(c, name, opts),
        Kind::PhaseTrace => phase_trace(c, name, opts),
        Kind::FieldsCov => fields_cov(c, name, opts),
        Kind::VarianceSlope => variance_slope(c, name, opts),
        Kind::ZetaRatio => zeta_ratio(c, name, opts),
        Kind::SineSim => sine_sim(c, name, opts),
        Kind::SinePoints => sine_points_run(c, name, opts),
        Kind::AirySim => airy_sim(c, name, opts),
        Kind::EdgeCompare => edge(c, name),
        Kind::OmegaTightness => omega_tightness(c, name, opts),
    }
}

fn hermite_check(c: &ExperimentConfig, name: &str) -> Result<Outcome, RunError> {
    let mut t = Table::new(name, &["n", "N", "integral", "deviation"]);
    let mut worst: f64 = 0.0;
    for &n_size in &c.n {
        for &n in &c.degree {
            let v = hermite_square_integral(n, n_size, 20_000);
            worst = worst.max((v - 0.5).abs());
            t.push(vec![s(n), s(n_size), f(v), f(v - 0.5)]);
        }
    }
    let mut o = outcome(vec![t], c, vec![]);
    if !(worst <= HERMITE_TOLERANCE) {
        o.check_failure = Some(format!("normalization off by {worst:e} (tolerance {HERMITE_TOLERANCE:e})"));
    }
    Ok(o)
}

fn charpoly_sample(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let n = c.n[0];
    let out = replicate_farm(c.seed, c.replicates, opts, |_, seed| {
        let st = stream(c.beta, seed);
        c.z.iter()
            .map(|&z| {
                let tr = run_recursion(&st, n, z);
                let (sg, l) = tr.log_normalized(n);
                Ok((sg, l, tr.sturm_count(n)?))
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;
    let mut t = Table::new(name, &["replicate", "seed", "z", "sign", "log_abs", "count_above"]);
    let mut summ = Table::new(format!("{name}_summary"), &["z", "count", "mean_log_abs", "var_log_abs"]);
    for (r, vals) in &out.results {
        for (&z, (sg, l, cnt)) in c.z.iter().zip(vals) {
            t.push(vec![s(r), s(replicate_seed(c.seed, *r)), f(z), f(*sg), f(*l), s(cnt)]);
        }
    }
    for (j, &z) in c.z.iter().enumerate() {
        let logs: Vec<Complex64> = out.results.iter().map(|(_, v)| Complex64::new(v[j].1, 0.0)).collect();
        let sm = summary_of(logs.iter());
        summ.push(vec![f(z), s(sm.count), f(sm.mean.re), f(sm.variance().0)]);
    }
    Ok(outcome(vec![t, summ], c, out.failures))
}

fn phase_trace(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let (n, z) = (c.n[0], c.z[0]);
    let out = replicate_farm(c.seed, c.replicates, opts, |i, seed| {
        let tr = phase_trajectory(&stream(c.beta, seed), z, n, None)?;
        let trace = (i == 0).then(|| tr.rows().collect::<Vec<_>>());
        let count = tr.checkpoints.last().map_or(tr.anchor.1, |cp| cp.1);
        Ok((tr.start(), tr.psi_final(), count, trace))
    })?;
    let mut summ = Table::new(name, &["replicate", "seed", "start", "re_psi", "im_psi", "count_above"]);
    let mut trace = Table::new(format!("{name}_trace"), &["n", "re_psi", "im_psi"]);
    for (r, (start, psi, count, rows)) in &out.results {
        summ.push(vec![s(r), s(replicate_seed(c.seed, *r)), s(start), f(psi.re), f(psi.im), s(count)]);
        for (k, p) in rows.iter().flatten() {
            trace.push(vec![s(k), f(p.re), f(p.im)]);
        }
    }
    Ok(outcome(vec![summ, trace], c, out.failures))
}

fn distinct_points(c: &ExperimentConfig) -> Vec<f64> {
    let mut pts: Vec<f64> = c.pairs.iter().flat_map(|&(z, x)| [z, x]).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn fields_cov(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let n = c.n[0];
    let pts = distinct_points(c);
    let out = replicate_farm(c.seed, c.replicates, opts, |_, seed| {
        let st = stream(c.beta, seed);
        pts.iter()
            .map(|&z| field_run(&st, z, n, c.t_exclusion).map(|r| r.ledger.m))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let col = |z: f64| -> Vec<Complex64> {
        let j = pts.iter().position(|&p| p == z).expect("point listed");
        out.results.iter().map(|(_, v)| v[j]).collect()
    };
    let mut cov = Table::new(
        name,
        &[
            "z", "x", "pseudo_re", "pseudo_im", "herm_re", "herm_im", "theory_pseudo_re", "theory_pseudo_im",
            "theory_herm_re", "theory_herm_im", "regime",
        ],
    );
    for &(z, x) in &c.pairs {
        let (p, h) = complex_cov(&col(z), &col(x))?;
        let th = covariance_theory(z, x, n);
        let (tp, thh) = th.predicted();
        let regime = if th.regime == Regime::Global { "global" } else { "local" };
        cov.push(vec![
            f(z), f(x), f(p.re), f(p.im), f(h.re), f(h.im), f(tp.re), f(tp.im), f(thh.re), f(thh.im), s(regime),
        ]);
    }
    let mut summ = Table::new(
        format!("{name}_summary"),
        &["z", "count", "mean_re", "mean_im", "var_re", "var_im"],
    );
    for &z in &pts {
        let sm = summary_of(col(z).iter());
        let (vr, vi) = sm.variance();
        summ.push(vec![f(z), s(sm.count), f(sm.mean.re), f(sm.mean.im), f(vr), f(vi)]);
    }
    Ok(outcome(vec![cov, summ], c, out.failures))
}

/// `(M_N, log|Φ_N|)` for each `N` on one stream per replicate, so every size
/// sees the same randomness.
pub fn variance_sweep(
    c: &ExperimentConfig,
    opts: FarmOptions,
) -> Result<FarmOutput<Vec<(Complex64, f64)>>, FarmAbort> {
    let z = c.z[0];
    replicate_farm(c.seed, c.replicates, opts, |_, seed| {
        let st = stream(c.beta, seed);
        c.n.iter()
            .map(|&n| field_run(&st, z, n, c.t_exclusion).map(|r| (r.ledger.m, r.log_phi.1)))
            .collect()
    })
}

fn variance_slope(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let out = variance_sweep(c, opts)?;
    let mut t = Table::new(name, &["N", "log_N", "count", "var_re_m", "var_im_m", "var_log_abs_phi"]);
    let (mut xs, mut vre, mut vim, mut vlog) = (vec![], vec![], vec![], vec![]);
    for (j, &n) in c.n.iter().enumerate() {
        let m = summary_of(out.results.iter().map(|(_, v)| &v[j].0));
        let logs: Vec<Complex64> = out.results.iter().map(|(_, v)| Complex64::new(v[j].1, 0.0)).collect();
        let l = summary_of(logs.iter());
        let (a, b) = m.variance();
        let ln = (n as f64).ln();
        t.push(vec![s(n), f(ln), s(m.count), f(a), f(b), f(l.variance().0)]);
        xs.push(ln);
        vre.push(a);
        vim.push(b);
        vlog.push(l.variance().0);
    }
    let mut sl = Table::new(format!("{name}_slopes"), &["quantity", "slope", "intercept", "slope_stderr", "target"]);
    if xs.len() >= 4 {
        for (q, ys, target) in [("var_re_m", &vre, 1.0), ("var_im_m", &vim, 1.0), ("var_log_abs_phi", &vlog, 1.0 / c.beta)] {
            let fit = slope_fit(&xs, ys)?;
            sl.push(vec![s(q), f(fit.slope), f(fit.intercept), f(fit.slope_stderr), f(target)]);
        }
    }
    Ok(outcome(vec![t, sl], c, out.failures))
}

fn zeta_ratio(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let (n, z) = (c.n[0], c.z[0]);
    let out = replicate_farm(c.seed, c.replicates, opts, |_, seed| {
        let ratio = polynomial_ratio(&stream(c.beta, seed), z, &c.lambda, n)?;
        let zeta = zeta_sample(c.beta, &c.lambda, c.steps, seed ^ ZETA_SALT)?;
        Ok((ratio, zeta))
    })?;
    let mut t = Table::new(name, &["replicate", "lambda", "ratio", "zeta"]);
    for (r, (ratio, zeta)) in &out.results {
        for ((l, a), b) in c.lambda.iter().zip(ratio).zip(zeta) {
            t.push(vec![s(r), f(*l), f(*a), f(*b)]);
        }
    }
    let mut ks = Table::new(format!("{name}_ks"), &["lambda", "ks", "threshold"]);
    if out.results.len() >= 100 {
        for (j, &l) in c.lambda.iter().enumerate() {
            let a: Vec<f64> = out.results.iter().map(|(_, v)| v.0[j]).collect();
            let b: Vec<f64> = out.results.iter().map(|(_, v)| v.1[j]).collect();
            let (d, thr) = ks_two_sample(&a, &b)?;
            ks.push(vec![f(l), f(d), f(thr)]);
        }
    }
    Ok(outcome(vec![t, ks], c, out.failures))
}

fn sine_sim(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let out = replicate_farm(c.seed, c.replicates, opts, |i, seed| {
        let p = solve_sine(c.beta, &c.lambda, c.t_end, c.steps, seed)?;
        let ends: Vec<Complex64> = (0..c.lambda.len()).map(|j| p.omega_end(j)).collect();
        Ok((ends, (i == 0).then_some(p)))
    })?;
    let mut t = Table::new(name, &["replicate", "lambda", "re_omega", "im_omega"]);
    let mut path = Table::new(format!("{name}_path"), &["t", "lambda", "re_omega", "im_omega"]);
    for (r, (ends, p)) in &out.results {
        for (l, w) in c.lambda.iter().zip(ends) {
            t.push(vec![s(r), f(*l), f(w.re), f(w.im)]);
        }
        if let Some(p) = p {
            for (tt, l, re, im) in p.rows() {
                path.push(vec![f(tt), f(l), f(re), f(im)]);
            }
        }
    }
    let mut summ = Table::new(format!("{name}_summary"), &["lambda", "count", "mean_im", "se_im", "bound"]);
    for (j, &l) in c.lambda.iter().enumerate() {
        let sm = summary_of(out.results.iter().map(|(_, v)| &v.0[j]));
        summ.push(vec![f(l), s(sm.count), f(sm.mean.im), f(sm.standard_error().1), f(2.0 * PI * l * c.t_end.sqrt())]);
    }
    Ok(outcome(vec![t, path, summ], c, out.failures))
}

fn sine_points_run(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let out = replicate_farm(c.seed, c.replicates, opts, |_, seed| sine_points_with(c.beta, c.window, seed, c.steps))?;
    let mut t = Table::new(name, &["replicate", "lambda"]);
    for (r, pts) in &out.results {
        for p in pts {
            t.push(vec![s(r), f(*p)]);
        }
    }
    let counts: Vec<f64> = out.results.iter().map(|(_, p)| p.len() as f64).collect();
    let sm = SampleSummary::from_reals(&counts);
    let mut summ = Table::new(format!("{name}_summary"), &["window", "count", "mean_points", "se", "var_points"]);
    summ.push(vec![f(c.window), s(sm.count), f(sm.mean.re), f(sm.standard_error().0), f(sm.variance().0)]);
    Ok(outcome(vec![t, summ], c, out.failures))
}

fn airy_sim(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let lambda = c.lambda[0];
    let probe = if c.t_min <= 0.0 && 0.0 <= c.t_max { 0.0 } else { c.t_min };
    let out = replicate_farm(c.seed, c.replicates, opts, |i, seed| {
        let p = solve_sai(c.beta, lambda, c.t_max, c.t_min, c.steps, seed)?;
        Ok((p.at(probe)?, (i == 0).then_some(p)))
    })?;
    let mut t = Table::new(name, &["replicate", "t", "sai", "sai_prime"]);
    let mut path = Table::new(format!("{name}_path"), &["t", "sai", "sai_prime"]);
    let (mut a, mut ap) = (vec![], vec![]);
    for (r, ((u, v), p)) in &out.results {
        t.push(vec![s(r), f(probe), f(*u), f(*v)]);
        a.push(*u);
        ap.push(*v);
        if let Some(p) = p {
            for (tt, u, v) in p.rows() {
                path.push(vec![f(tt), f(u), f(v)]);
            }
        }
    }
    let (ai, aip) = airy_ai(probe + lambda)?;
    let (sa, sp) = (SampleSummary::from_reals(&a), SampleSummary::from_reals(&ap));
    let mut summ = Table::new(
        format!("{name}_summary"),
        &["lambda", "t", "count", "mean_sai", "se_sai", "ai", "mean_sai_prime", "se_sai_prime", "ai_prime"],
    );
    summ.push(vec![
        f(lambda), f(probe), s(sa.count), f(sa.mean.re), f(sa.standard_error().0), f(ai), f(sp.mean.re),
        f(sp.standard_error().0), f(aip),
    ]);
    Ok(outcome(vec![t, path, summ], c, out.failures))
}

fn edge(c: &ExperimentConfig, name: &str) -> Result<Outcome, RunError> {
    let tab = edge_compare(c.n[0], c.sign, &c.lambda, c.replicates, c.seed, c.beta)?;
    let mut t = Table::new(
        name,
        &["lambda", "ai", "deterministic", "rel_error", "mc_mean", "mc_se", "N", "sign", "beta", "replicates"],
    );
    for r in &tab.rows {
        t.push(vec![
            f(r.lambda), f(r.ai), f(r.deterministic), f(r.rel_error), f(r.mc_mean), f(r.mc_se), s(tab.n_size),
            s(tab.sign), f(tab.beta), s(tab.replicates),
        ]);
    }
    Ok(outcome(vec![t], c, vec![]))
}

/// `Ω_N(z)` at each `N` of the config, per replicate, on independent streams
/// so that laws at different sizes are compared on independent samples.
pub fn omega_sweep(c: &ExperimentConfig, opts: FarmOptions) -> Result<FarmOutput<Vec<Complex64>>, FarmAbort> {
    let z = c.z[0];
    replicate_farm(c.seed, c.replicates, opts, |_, seed| {
        c.n.iter()
            .map(|&n| {
                field_run(&stream(c.beta, derive_seed(seed, n)), z, n, c.t_exclusion).map(|r| omega_from_psi(r.psi, z, n, c.beta, r.ledger.m))
            })
            .collect()
    })
}

fn omega_tightness(c: &ExperimentConfig, name: &str, opts: FarmOptions) -> Result<Outcome, RunError> {
    let out = omega_sweep(c, opts)?;
    let mut t = Table::new(name, &["replicate", "N", "re_omega", "im_omega"]);
    for (r, v) in &out.results {
        for (n, w) in c.n.iter().zip(v) {
            t.push(vec![s(r), s(n), f(w.re), f(w.im)]);
        }
    }
    let mut ks = Table::new(format!("{name}_ks"), &["N_a", "N_b", "ks_re", "ks_im", "threshold"]);
    if out.results.len() >= 100 {
        let part = |j: usize, im: bool| -> Vec<f64> {
            out.results.iter().map(|(_, v)| if im { v[j].im } else { v[j].re }).collect()
        };
        for j in 1..c.n.len() {
            let (dr, thr) = ks_two_sample(&part(j - 1, false), &part(j, false))?;
            let (di, _) = ks_two_sample(&part(j - 1, true), &part(j, true))?;
            ks.push(vec![s(c.n[j - 1]), s(c.n[j]), f(dr), f(di), f(thr)]);
        }
    }
    Ok(outcome(vec![t, ks], c, out.failures))
}
