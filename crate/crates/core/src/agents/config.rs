use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentKind {
    Dfs,
    Random,
    QLearn,
    CountBonus,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [AgentKind::Dfs, AgentKind::Random, AgentKind::QLearn, AgentKind::CountBonus];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Dfs => "dfs",
            AgentKind::Random => "random",
            AgentKind::QLearn => "qlearn",
            AgentKind::CountBonus => "countbonus",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown agent kind {0:?}; expected dfs, random, qlearn or countbonus")]
    UnknownKind(String),
    #[error("unknown agent config key {0:?}")]
    UnknownKey(String),
    #[error("missing agent config key {0:?}")]
    MissingKey(&'static str),
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("{0}")]
    OutOfRange(&'static str),
}

/// Agent hyper-parameters. Fields irrelevant to a kind are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub kind: AgentKind,
    pub seed: u64,
    /// Exploration rate of the Q-learner.
    pub epsilon: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Scale of the count-based bonus.
    pub beta: f64,
    pub optimistic_init: f64,
}

impl AgentConfig {
    pub fn new(kind: AgentKind, seed: u64) -> Self {
        AgentConfig { kind, seed, epsilon: 0.1, alpha: 0.5, gamma: 0.95, beta: 1.0, optimistic_init: 0.0 }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(ConfigError::OutOfRange("epsilon must lie in [0, 1]"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(ConfigError::OutOfRange("alpha must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(ConfigError::OutOfRange("gamma must lie in [0, 1)"));
        }
        if !(self.beta >= 0.0) {
            return Err(ConfigError::OutOfRange("beta must be non-negative"));
        }
        if !self.optimistic_init.is_finite() {
            return Err(ConfigError::OutOfRange("optimistic_init must be finite"));
        }
        Ok(())
    }

    /// Flat `key=value` block, one pair per line.
    pub fn to_kv(&self) -> String {
        format!(
            "kind={}\nseed={}\nepsilon={}\nalpha={}\ngamma={}\nbeta={}\noptimistic_init={}\n",
            self.kind, self.seed, self.epsilon, self.alpha, self.gamma, self.beta, self.optimistic_init
        )
    }

    /// Parses `key=value` pairs separated by newlines or whitespace. `kind` is
    /// required; everything else falls back to the defaults.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let pairs = text
            .split_whitespace()
            .map(|tok| tok.split_once('=').ok_or_else(|| ConfigError::BadValue { key: tok.to_string(), value: String::new() }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_pairs(pairs)
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, ConfigError> {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let kind = pairs
            .iter()
            .find(|(k, _)| *k == "kind")
            .ok_or(ConfigError::MissingKey("kind"))?
            .1
            .parse()?;
        let mut cfg = AgentConfig::new(kind, 0);
        for (key, value) in pairs {
            let float = || value.parse::<f64>().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: value.to_string() });
            match key {
                "kind" => {}
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| ConfigError::BadValue { key: key.to_string(), value: value.to_string() })?
                }
                "epsilon" => cfg.epsilon = float()?,
                "alpha" => cfg.alpha = float()?,
                "gamma" => cfg.gamma = float()?,
                "beta" => cfg.beta = float()?,
                "optimistic_init" => cfg.optimistic_init = float()?,
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
