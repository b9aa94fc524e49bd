//! Flat `key = value` experiment configs.
//!
//! One key per line, `#` starts a comment, lists are comma separated and
//! `(z, x)` pairs are written `z:x`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    HermiteCheck,
    CharpolySample,
    PhaseTrace,
    FieldsCov,
    VarianceSlope,
    ZetaRatio,
    SineSim,
    SinePoints,
    AirySim,
    EdgeCompare,
    OmegaTightness,
}

impl Kind {
    pub const ALL: [Kind; 11] = [
        Kind::HermiteCheck,
        Kind::CharpolySample,
        Kind::PhaseTrace,
        Kind::FieldsCov,
        Kind::VarianceSlope,
        Kind::ZetaRatio,
        Kind::SineSim,
        Kind::SinePoints,
        Kind::AirySim,
        Kind::EdgeCompare,
        Kind::OmegaTightness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::HermiteCheck => "hermite-check",
            Kind::CharpolySample => "charpoly-sample",
            Kind::PhaseTrace => "phase-trace",
            Kind::FieldsCov => "fields-cov",
            Kind::VarianceSlope => "variance-slope",
            Kind::ZetaRatio => "zeta-ratio",
            Kind::SineSim => "sine-sim",
            Kind::SinePoints => "sine-points",
            Kind::AirySim => "airy-sim",
            Kind::EdgeCompare => "edge-compare",
            Kind::OmegaTightness => "omega-tightness",
        }
    }

    /// Keys this kind reads besides the common ones.
    fn keys(self) -> &'static [&'static str] {
        match self {
            Kind::HermiteCheck => &["n", "degree"],
            Kind::CharpolySample => &["beta", "n", "z"],
            Kind::PhaseTrace => &["beta", "n", "z"],
            Kind::FieldsCov => &["beta", "n", "pairs", "t_exclusion"],
            Kind::VarianceSlope => &["beta", "n", "z", "t_exclusion"],
            Kind::ZetaRatio => &["beta", "n", "z", "lambda", "steps"],
            Kind::SineSim => &["beta", "lambda", "t_end", "steps"],
            Kind::SinePoints => &["beta", "window", "steps"],
            Kind::AirySim => &["beta", "lambda", "t_max", "t_min", "steps"],
            Kind::EdgeCompare => &["beta", "n", "sign", "lambda"],
            Kind::OmegaTightness => &["beta", "n", "z", "t_exclusion"],
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ConfigError::new("kind", format!("unknown experiment kind {s:?}")))
    }
}

const COMMON_KEYS: [&str; 6] = ["kind", "seed", "replicates", "out", "parallelism", "inject_failure_rate"];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// A validated experiment definition.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub beta: f64,
    pub n: Vec<u64>,
    pub degree: Vec<u64>,
    pub z: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
    pub lambda: Vec<f64>,
    pub replicates: u64,
    pub seed: u64,
    pub t_exclusion: f64,
    pub steps: usize,
    pub t_end: f64,
    pub t_max: f64,
    pub t_min: f64,
    pub window: f64,
    pub sign: i8,
    pub out: String,
    pub parallelism: Option<usize>,
    pub inject_failure_rate: f64,
}

impl ExperimentConfig {
    /// Defaults for `kind`; every field is overwritten by the keys present.
    pub fn defaults(kind: Kind) -> Self {
        let (n, steps) = match kind {
            Kind::HermiteCheck => (vec![16, 256], 0),
            Kind::VarianceSlope => ((10..=16).map(|p| 1u64 << p).collect(), 0),
            Kind::OmegaTightness => (vec![1 << 12, 1 << 14], 0),
            Kind::EdgeCompare => (vec![1_000_000], 0),
            Kind::AirySim => (vec![], 10_000),
            Kind::SineSim | Kind::SinePoints | Kind::ZetaRatio => (vec![100_000], 2000),
            _ => (vec![10_000], 0),
        };
        ExperimentConfig {
            kind,
            beta: if kind == Kind::EdgeCompare { f64::INFINITY } else { 2.0 },
            n,
            degree: vec![0, 1, 5, 20],
            z: vec![0.4],
            pairs: vec![(0.3, 0.1)],
            lambda: vec![1.0],
            replicates: 1,
            seed: 0,
            t_exclusion: 1.0,
            steps,
            t_end: 1.0,
            t_max: 8.0,
            t_min: -8.0,
            window: 5.0,
            sign: 1,
            out: "out".to_string(),
            parallelism: None,
            inject_failure_rate: 0.0,
        }
    }

    /// Parses and validates config text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_pairs(parse_pairs(text)?)
    }

    /// Builds a config from raw `key → value` strings, as echoed in a manifest.
    pub fn from_pairs(pairs: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let kind: Kind = pairs
            .get("kind")
            .ok_or_else(|| ConfigError::new("kind", "missing"))?
            .parse()?;
        let mut c = Self::defaults(kind);
        for (key, value) in &pairs {
            if !COMMON_KEYS.contains(&key.as_str()) && !kind.keys().contains(&key.as_str()) {
                return Err(ConfigError::new(key, format!("not a key of {kind}")));
            }
            c.set(key, value)?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Applies one `key = value`, as from the config file or a CLI override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "kind" => self.kind = v.parse()?,
            "beta" => self.beta = parse_beta(v)?,
            "n" => self.n = parse_list(key, v)?,
            "degree" => self.degree = parse_list(key, v)?,
            "z" => self.z = parse_list(key, v)?,
            "pairs" => self.pairs = parse_pairs_list(v)?,
            "lambda" => self.lambda = parse_list(key, v)?,
            "replicates" => self.replicates = parse_one(key, v)?,
            "seed" => self.seed = parse_one(key, v)?,
            "t_exclusion" => self.t_exclusion = parse_one(key, v)?,
            "steps" => self.steps = parse_one(key, v)?,
            "t_end" => self.t_end = parse_one(key, v)?,
            "t_max" => self.t_max = parse_one(key, v)?,
            "t_min" => self.t_min = parse_one(key, v)?,
            "window" => self.window = parse_one(key, v)?,
            "sign" => self.sign = parse_one(key, v)?,
            "out" => {
                if v.is_empty() {
                    return Err(ConfigError::new(key, "empty path"));
                }
                self.out = v.to_string()
            }
            "parallelism" => self.parallelism = Some(parse_one(key, v)?),
            "inject_failure_rate" => self.inject_failure_rate = parse_one(key, v)?,
            _ => return Err(ConfigError::new(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let uses = |k: &str| self.kind.keys().contains(&k);
        if self.replicates == 0 {
            return Err(ConfigError::new("replicates", "must be at least 1"));
        }
        if !(self.beta > 0.0) {
            return Err(ConfigError::new("beta", "must be positive"));
        }
        if self.parallelism == Some(0) {
            return Err(ConfigError::new("parallelism", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.inject_failure_rate) {
            return Err(ConfigError::new("inject_failure_rate", "must lie in [0, 1]"));
        }
        if uses("n") {
            if self.n.is_empty() || self.n.contains(&0) {
                return Err(ConfigError::new("n", "needs positive sizes"));
            }
            let single = !matches!(
                self.kind,
                Kind::HermiteCheck | Kind::VarianceSlope | Kind::OmegaTightness
            );
            if single && self.n.len() != 1 {
                return Err(ConfigError::new("n", format!("{} takes a single size", self.kind)));
            }
        }
        if uses("z") {
            if self.z.is_empty() || self.z.iter().any(|z| !(z.abs() < 1.0)) {
                return Err(ConfigError::new("z", "needs points in (-1, 1)"));
            }
            if self.kind != Kind::CharpolySample && self.z.len() != 1 {
                return Err(ConfigError::new("z", format!("{} takes a single point", self.kind)));
            }
        }
        if uses("pairs")
            && (self.pairs.is_empty() || self.pairs.iter().any(|&(z, x)| !(z.abs() < 1.0 && x.abs() < 1.0)))
        {
            return Err(ConfigError::new("pairs", "needs pairs of points in (-1, 1)"));
        }
        if uses("lambda") {
            if self.lambda.is_empty() || self.lambda.iter().any(|l| !l.is_finite()) {
                return Err(ConfigError::new("lambda", "needs finite values"));
            }
            if self.kind == Kind::AirySim && self.lambda.len() != 1 {
                return Err(ConfigError::new("lambda", "airy-sim takes a single value"));
            }
        }
        if uses("t_exclusion") && !(self.t_exclusion > 0.0 && self.t_exclusion.is_finite()) {
            return Err(ConfigError::new("t_exclusion", "must be positive"));
        }
        if uses("steps") && self.steps == 0 {
            return Err(ConfigError::new("steps", "must be positive"));
        }
        if uses("t_end") && !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ConfigError::new("t_end", "must be positive"));
        }
        if uses("window") && !(self.window > 0.0 && self.window.is_finite()) {
            return Err(ConfigError::new("window", "must be positive"));
        }
        if uses("sign") && self.sign != 1 && self.sign != -1 {
            return Err(ConfigError::new("sign", "must be 1 or -1"));
        }
        if uses("t_max") && !(self.t_min < self.t_max) {
            return Err(ConfigError::new("t_min", "must be below t_max"));
        }
        Ok(())
    }

    /// Canonical `key → value` echo of every key this kind reads.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("kind", self.kind.to_string());
        put("seed", self.seed.to_string());
        put("replicates", self.replicates.to_string());
        put("out", self.out.clone());
        if let Some(p) = self.parallelism {
            put("parallelism", p.to_string());
        }
        if self.inject_failure_rate > 0.0 {
            put("inject_failure_rate", self.inject_failure_rate.to_string());
        }
        for &k in self.kind.keys() {
            let v = match k {
                "beta" => self.beta.to_string(),
                "n" => join(&self.n),
                "degree" => join(&self.degree),
                "z" => join(&self.z),
                "pairs" => self
                    .pairs
                    .iter()
                    .map(|(z, x)| format!("{z}:{x}"))
                    .collect::<Vec<_>>()
                    .join(","),
                "lambda" => join(&self.lambda),
                "t_exclusion" => self.t_exclusion.to_string(),
                "steps" => self.steps.to_string(),
                "t_end" => self.t_end.to_string(),
                "t_max" => self.t_max.to_string(),
                "t_min" => self.t_min.to_string(),
                "window" => self.window.to_string(),
                "sign" => self.sign.to_string(),
                _ => unreachable!("key table out of sync: {k}"),
            };
            put(k, v);
        }
        m
    }

    /// The echo rendered back as config text.
    pub fn to_text(&self) -> String {
        self.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Splits config text into raw pairs, rejecting malformed lines and duplicates.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new("line", format!("line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim();
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
            return Err(ConfigError::new("line", format!("line {}: bad key {k:?}", lineno + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(ConfigError::new(k, "given twice"));
        }
    }
    Ok(out)
}

fn parse_one<T: FromStr>(field: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError::new(field, format!("cannot parse {v:?}")))
}

fn parse_list<T: FromStr>(field: &str, v: &str) -> Result<Vec<T>, ConfigError> {
    v.split(',').map(|s| parse_one(field, s.trim())).collect()
}

fn parse_beta(v: &str) -> Result<f64, ConfigError> {
    match v {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => {
            let b: f64 = parse_one("beta", v)?;
            if b.is_nan() {
                Err(ConfigError::new("beta", "NaN"))
            } else {
                Ok(b)
            }
        }
    }
}

fn parse_pairs_list(v: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    v.split(',')
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| ConfigError::new("pairs", format!("expected z:x, got {p:?}")))?;
            Ok((parse_one("pairs", a.trim())?, parse_one("pairs", b.trim())?))
        })
        .collect()
}
