//! Experiment configuration.
//!
//! The file format is one `key = value` pair per line. Blank lines and lines
//! starting with `#` are ignored, trailing `# ...` comments are stripped, and
//! values may be wrapped in double quotes. Keys mirror the fields of
//! [`ExperimentConfig`]; see [`KEYS`] for the full list.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Game, GameParams, ReadRewardRecipient, Q_MIN};
use crate::evolution::{Crossover, EvolutionParams, Optimizer, Selection};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}` {reason}")]
    Constraint { key: &'static str, reason: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
}

impl ConfigError {
    /// The key a diagnostic refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(k) => Some(k),
            ConfigError::InvalidValue { key, .. } => Some(key),
            ConfigError::Constraint { key, .. } => Some(key),
            ConfigError::Syntax { .. } => None,
        }
    }
}

/// Monetary reward schemes selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MrStrategy {
    #[default]
    PerPost,
}

impl FromStr for MrStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "per_post" => Ok(MrStrategy::PerPost),
            _ => Err(format!("expected `per_post`, got `{s}`")),
        }
    }
}

/// Every recognised key, in documentation order.
pub const KEYS: &[&str] = &[
    "n",
    "u",
    "c_ref",
    "mu",
    "delta",
    "pi",
    "mr",
    "W",
    "generations",
    "mutation_rate",
    "optimizer",
    "selection",
    "crossover",
    "elitism",
    "read_reward_recipient",
    "seed_graph",
    "seed_profiles",
    "seed_sim",
    "output_dir",
    "snapshot_every",
    "trace",
];

/// Resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub u: f64,
    pub c_ref: f64,
    pub mu: f64,
    pub delta: f64,
    pub pi: f64,
    pub mr: MrStrategy,
    #[serde(rename = "W")]
    pub worlds: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub optimizer: Optimizer,
    pub selection: Selection,
    pub crossover: Crossover,
    pub elitism: bool,
    pub read_reward_recipient: ReadRewardRecipient,
    pub seed_graph: u64,
    pub seed_profiles: u64,
    pub seed_sim: u64,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
    /// Write `events.csv` for world 0 replaying the final genomes.
    pub trace: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 400,
            u: 0.9,
            c_ref: 1.0,
            mu: 8.0,
            delta: 0.5,
            pi: 1.0,
            mr: MrStrategy::PerPost,
            worlds: 10,
            generations: 1000,
            mutation_rate: 0.01,
            optimizer: Optimizer::Mwga,
            selection: Selection::Roulette,
            crossover: Crossover::Uniform,
            elitism: false,
            read_reward_recipient: ReadRewardRecipient::Reader,
            seed_graph: 1,
            seed_profiles: 2,
            seed_sim: 3,
            output_dir: PathBuf::from("out"),
            snapshot_every: 10,
            trace: false,
        }
    }
}

/// Ordered `key = value` assignments from one source (file or flags).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    entries: Vec<(String, String)>,
}

impl ConfigLayer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            }
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            layer.set(key, value);
        }
        Ok(layer)
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: "expected a boolean".into(),
        }),
    }
}

impl ExperimentConfig {
    /// Parses and validates a config document; absent keys keep defaults.
    pub fn load(text: &str) -> Result<Self, ConfigError> {
        Self::resolve(&[ConfigLayer::parse(text)?])
    }

    /// Applies layers in order (later layers win) on top of the defaults,
    /// then validates.
    ///
    /// When `W` is never set explicitly, GA runs default to a single world.
    pub fn resolve(layers: &[ConfigLayer]) -> Result<Self, ConfigError> {
        let mut config = ExperimentConfig::default();
        let mut worlds_set = false;
        for layer in layers {
            for (key, value) in &layer.entries {
                worlds_set |= config.set(key, value)?;
            }
        }
        if !worlds_set && config.optimizer == Optimizer::Ga {
            config.worlds = 1;
        }
        config.validate()?;
        Ok(config)
    }

    /// Assigns one key. Returns whether the key was `W`.
    fn set(&mut self, key: &str, value: &str) -> Result<bool, ConfigError> {
        match key {
            "n" => self.n = parse_value(key, value)?,
            "u" => self.u = parse_value(key, value)?,
            "c_ref" => self.c_ref = parse_value(key, value)?,
            "mu" => self.mu = parse_value(key, value)?,
            "delta" => self.delta = parse_value(key, value)?,
            "pi" => self.pi = parse_value(key, value)?,
            "mr" => self.mr = parse_value(key, value)?,
            "W" | "worlds" => {
                self.worlds = parse_value(key, value)?;
                return Ok(true);
            }
            "generations" => self.generations = parse_value(key, value)?,
            "mutation_rate" | "m" => self.mutation_rate = parse_value(key, value)?,
            "optimizer" => self.optimizer = parse_value(key, value)?,
            "selection" => self.selection = parse_value(key, value)?,
            "crossover" => self.crossover = parse_value(key, value)?,
            "elitism" => self.elitism = parse_bool(key, value)?,
            "read_reward_recipient" => self.read_reward_recipient = parse_value(key, value)?,
            "seed_graph" => self.seed_graph = parse_value(key, value)?,
            "seed_profiles" => self.seed_profiles = parse_value(key, value)?,
            "seed_sim" => self.seed_sim = parse_value(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "snapshot_every" => self.snapshot_every = parse_value(key, value)?,
            "trace" => self.trace = parse_bool(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(false)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |key, reason: &str| {
            Err(ConfigError::Constraint {
                key,
                reason: reason.to_string(),
            })
        };
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return fail("n", "must be an even number of at least 2 (equal group split)");
        }
        if !(0.0..1.0).contains(&self.u) {
            return fail("u", "must lie in [0, 1)");
        }
        for (key, value) in [("c_ref", self.c_ref), ("mu", self.mu), ("delta", self.delta)] {
            if !(value.is_finite() && value > 0.0) {
                return fail(key, "must be a positive finite number");
            }
        }
        if !(self.pi.is_finite() && self.pi >= 0.0) {
            return fail("pi", "must be a nonnegative finite number");
        }
        if self.worlds == 0 {
            return fail("W", "must be at least 1");
        }
        if self.optimizer == Optimizer::Ga && self.worlds != 1 {
            return fail("W", "must be 1 when optimizer = GA");
        }
        if self.generations == 0 {
            return fail("generations", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return fail("mutation_rate", "must lie in [0, 1]");
        }
        if self.snapshot_every == 0 {
            return fail("snapshot_every", "must be at least 1");
        }
        if self.output_dir.as_os_str().is_empty() {
            return fail("output_dir", "must not be empty");
        }
        Ok(())
    }

    pub fn game_params(&self) -> GameParams {
        GameParams {
            c_ref: self.c_ref,
            mu: self.mu,
            delta: self.delta,
            pi: self.pi,
            q_min: Q_MIN,
        }
    }

    pub fn game(&self) -> Game {
        match self.mr {
            MrStrategy::PerPost => Game::per_post(self.game_params(), self.read_reward_recipient),
        }
    }

    pub fn evolution_params(&self) -> EvolutionParams {
        EvolutionParams {
            worlds: self.worlds,
            generations: self.generations,
            mutation_rate: self.mutation_rate,
            optimizer: self.optimizer,
            selection: self.selection,
            crossover: self.crossover,
            elitism: self.elitism,
        }
    }

    /// Renders the config in the file format; [`ExperimentConfig::load`]
    /// reads it back unchanged.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("n", self.n.to_string());
        line("u", self.u.to_string());
        line("c_ref", self.c_ref.to_string());
        line("mu", self.mu.to_string());
        line("delta", self.delta.to_string());
        line("pi", self.pi.to_string());
        line("mr", "per_post".into());
        line("W", self.worlds.to_string());
        line("generations", self.generations.to_string());
        line("mutation_rate", self.mutation_rate.to_string());
        line("optimizer", self.optimizer.to_string());
        line("selection", self.selection.to_string());
        line("crossover", self.crossover.to_string());
        line("elitism", self.elitism.to_string());
        line("read_reward_recipient", self.read_reward_recipient.to_string());
        line("seed_graph", self.seed_graph.to_string());
        line("seed_profiles", self.seed_profiles.to_string());
        line("seed_sim", self.seed_sim.to_string());
        line("output_dir", format!("\"{}\"", self.output_dir.display()));
        line("snapshot_every", self.snapshot_every.to_string());
        line("trace", self.trace.to_string());
        out
    }
}
