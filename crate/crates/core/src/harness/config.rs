//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # Attack 1 on a strong direct link
//! h1 = 1
//! h2 = 1
//! h3 = 1
//! n = 1000
//! trials = 200
//! strategy = attack1
//! seed = 42
//! ```
//!
//! Recognised keys: h1, h2, h3, n, trials, strategy, n_x, n_y, n_u, n_v, range,
//! schedule, seed, quantile, out. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::quantizer::{self, Grid, NestedGridPair};
use crate::relay::RelayStrategy;

pub const KEYS: [&str; 15] = [
    "h1", "h2", "h3", "n", "trials", "strategy", "n_x", "n_y", "n_u", "n_v", "range", "schedule", "seed",
    "quantile", "out",
];

const REQUIRED: [&str; 6] = ["h1", "h2", "h3", "n", "trials", "strategy"];

/// Relay behaviour selectable from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Honest,
    Attack1,
    Attack2,
    /// Sign inversion, V = −U.
    Map,
    /// Noise injection, V ~ N(U, 1).
    Kernel,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Honest => "honest",
            StrategyKind::Attack1 => "attack1",
            StrategyKind::Attack2 => "attack2",
            StrategyKind::Map => "map",
            StrategyKind::Kernel => "kernel",
        }
    }

    pub fn strategy(self) -> RelayStrategy {
        match self {
            StrategyKind::Honest => RelayStrategy::Honest,
            StrategyKind::Attack1 => RelayStrategy::Attack1,
            StrategyKind::Attack2 => RelayStrategy::Attack2,
            StrategyKind::Map => RelayStrategy::map(|u| -u),
            StrategyKind::Kernel => RelayStrategy::kernel(|u, rng| {
                let g: f64 = rng.sample(StandardNormal);
                u + g
            }),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honest" => Ok(StrategyKind::Honest),
            "attack1" => Ok(StrategyKind::Attack1),
            "attack2" => Ok(StrategyKind::Attack2),
            "map" => Ok(StrategyKind::Map),
            "kernel" => Ok(StrategyKind::Kernel),
            other => Err(Error::Config(format!(
                "key 'strategy': unknown strategy '{other}' (expected honest|attack1|attack2|map|kernel)"
            ))),
        }
    }
}

/// Quantizer sizes. With `schedule` on, every grid is derived from `n_u` and the
/// other counts and `range` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n_x: usize,
    pub n_y: usize,
    pub n_u: usize,
    pub n_v: usize,
    pub range: f64,
    pub schedule: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_x: 22,
            n_y: 22,
            n_u: 82,
            n_v: 42,
            range: 5.0,
            schedule: false,
        }
    }
}

/// Concrete grids resolved from a [`GridConfig`].
#[derive(Debug, Clone)]
pub struct Grids {
    pub x: Grid,
    pub y: Grid,
    pub u: Grid,
    pub v: Grid,
    /// Present when the U- and V-grids nest exactly.
    pub pair: Option<NestedGridPair>,
}

impl Grids {
    /// Evaluation points t_m: the inner edges of the Y-grid.
    pub fn t_points(&self) -> Vec<f64> {
        self.y.inner_edges()
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schedule {
            quantizer::schedule(self.n_u).map(|_| ())?;
            return Ok(());
        }
        for (key, v) in [("n_x", self.n_x), ("n_y", self.n_y), ("n_u", self.n_u), ("n_v", self.n_v)] {
            if v < 3 {
                return Err(Error::Config(format!("key '{key}': bin count must be at least 3, got {v}")));
            }
        }
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(Error::Config(format!("key 'range': must be positive, got {}", self.range)));
        }
        if !(self.n_u - 2).is_multiple_of(self.n_v - 2) {
            return Err(Error::Config(format!(
                "keys 'n_u'/'n_v': inner counts {} and {} do not nest",
                self.n_u - 2,
                self.n_v - 2
            )));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Grids> {
        self.validate()?;
        if self.schedule {
            let s = quantizer::schedule(self.n_u)?;
            let (u, v) = (s.u_grid(), s.v_grid());
            let pair = NestedGridPair::new(u.clone(), v.clone()).ok();
            return Ok(Grids {
                x: s.x_grid(),
                y: s.y_grid(),
                u,
                v,
                pair,
            });
        }
        let pair = quantizer::build_nested_pair(self.range, self.n_v, (self.n_u - 2) / (self.n_v - 2))?;
        Ok(Grids {
            x: Grid::symmetric(self.range, self.n_x)?,
            y: Grid::symmetric(self.range, self.n_y)?,
            u: pair.fine().clone(),
            v: pair.coarse().clone(),
            pair: Some(pair),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ChannelParams,
    pub n: usize,
    pub trials: usize,
    pub strategy: StrategyKind,
    pub grids: GridConfig,
    pub seed: u64,
    pub quantile: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(params: ChannelParams, n: usize, trials: usize, strategy: StrategyKind) -> Self {
        Self {
            params,
            n,
            trials,
            strategy,
            grids: GridConfig::default(),
            seed: 0,
            quantile: 0.99,
            out: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grids(mut self, grids: GridConfig) -> Self {
        self.grids = grids;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("key 'n': must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("key 'trials': must be at least 1".into()));
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(Error::Config(format!("key 'quantile': must lie in (0, 1), got {}", self.quantile)));
        }
        self.grids.validate()
    }

    /// Canonical text form; [`parse_config`] reads it back to an equal config.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let g = &self.grids;
        let _ = writeln!(s, "h1 = {}", self.params.h1);
        let _ = writeln!(s, "h2 = {}", self.params.h2);
        let _ = writeln!(s, "h3 = {}", self.params.h3);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "strategy = {}", self.strategy.as_str());
        let _ = writeln!(s, "n_x = {}", g.n_x);
        let _ = writeln!(s, "n_y = {}", g.n_y);
        let _ = writeln!(s, "n_u = {}", g.n_u);
        let _ = writeln!(s, "n_v = {}", g.n_v);
        let _ = writeln!(s, "range = {}", g.range);
        let _ = writeln!(s, "schedule = {}", if g.schedule { "on" } else { "off" });
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "quantile = {}", self.quantile);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {}", out.display());
        }
        s
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse value '{raw}'")))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut values: Vec<(&str, &str)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key '{key}' on line {}", lineno + 1)));
        }
        if values.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config(format!("duplicate key '{key}' on line {}", lineno + 1)));
        }
        values.push((key, value));
    }
    let missing: Vec<&str> = REQUIRED
        .iter()
        .copied()
        .filter(|k| !values.iter().any(|(key, _)| key == k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("missing required keys: {}", missing.join(", "))));
    }
    let get = |key: &str| values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);

    let params = ChannelParams::new(
        parse_value("h1", get("h1").unwrap())?,
        parse_value("h2", get("h2").unwrap())?,
        parse_value("h3", get("h3").unwrap())?,
    )
    .map_err(|e| Error::Config(format!("channel coefficients: {e}")))?;
    let mut cfg = ExperimentConfig::new(
        params,
        parse_value("n", get("n").unwrap())?,
        parse_value("trials", get("trials").unwrap())?,
        get("strategy").unwrap().parse()?,
    );
    if let Some(v) = get("n_x") {
        cfg.grids.n_x = parse_value("n_x", v)?;
    }
    if let Some(v) = get("n_y") {
        cfg.grids.n_y = parse_value("n_y", v)?;
    }
    if let Some(v) = get("n_u") {
        cfg.grids.n_u = parse_value("n_u", v)?;
    }
    if let Some(v) = get("n_v") {
        cfg.grids.n_v = parse_value("n_v", v)?;
    }
    if let Some(v) = get("range") {
        cfg.grids.range = parse_value("range", v)?;
    }
    if let Some(v) = get("schedule") {
        cfg.grids.schedule = match v {
            "on" => true,
            "off" => false,
            other => return Err(Error::Config(format!("key 'schedule': expected on|off, got '{other}'"))),
        };
    }
    if let Some(v) = get("seed") {
        cfg.seed = parse_value("seed", v)?;
    }
    if let Some(v) = get("quantile") {
        cfg.quantile = parse_value("quantile", v)?;
    }
    if let Some(v) = get("out") {
        cfg.out = Some(PathBuf::from(v));
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
