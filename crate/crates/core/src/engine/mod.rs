//! The stage game: one round lets every agent post, then neighbors read,
//! comment, and receive meta-comments.

mod genome;
mod kernels;
mod round;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use genome::{decode_level, Genome, Strategy, GENOME_BITS, GENOME_MASK, LEVELS, Q_MIN};
pub use kernels::{
    comment_probability, meta_comment_probability, post_probability, read_probability, utility,
    Costs, GameParams, PsychRewards,
};
pub use round::{
    run_generation, run_round, AgentLedger, ArticleRecord, GenerationOutcome, RoundLog, WorldState,
    ROUNDS_PER_GENERATION,
};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("quality {q} is below the minimum {q_min}")]
    QualityBelowMinimum { q: f64, q_min: f64 },
    #[error("non-finite input to utility")]
    NonFinite,
    #[error("invalid game parameter {name} = {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("monetary preference must lie in [0, 1], got {0}")]
    InvalidPreference(f64),
}

/// Which side of a read earns the read reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadRewardRecipient {
    #[default]
    Reader,
    Author,
}

impl FromStr for ReadRewardRecipient {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "reader" => Ok(ReadRewardRecipient::Reader),
            "author" => Ok(ReadRewardRecipient::Author),
            other => Err(format!("expected `reader` or `author`, got `{other}`")),
        }
    }
}

impl fmt::Display for ReadRewardRecipient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReadRewardRecipient::Reader => "reader",
            ReadRewardRecipient::Author => "author",
        })
    }
}

/// Agents preferring psychological (α) or monetary (β) rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Alpha,
    Beta,
}

impl Group {
    pub fn of(monetary_preference: f64) -> Group {
        if monetary_preference < 0.5 {
            Group::Alpha
        } else {
            Group::Beta
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Alpha => "alpha",
            Group::Beta => "beta",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alpha" => Ok(Group::Alpha),
            "beta" => Ok(Group::Beta),
            other => Err(format!("unknown group `{other}`")),
        }
    }
}

/// Fixed per-agent traits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub id: usize,
    monetary_preference: f64,
    group: Group,
}

impl AgentProfile {
    pub fn new(id: usize, monetary_preference: f64) -> Result<Self, EngineError> {
        if !(0.0..=1.0).contains(&monetary_preference) {
            return Err(EngineError::InvalidPreference(monetary_preference));
        }
        Ok(AgentProfile {
            id,
            monetary_preference,
            group: Group::of(monetary_preference),
        })
    }

    /// M: weight of monetary over psychological reward.
    pub fn monetary_preference(&self) -> f64 {
        self.monetary_preference
    }

    pub fn group(&self) -> Group {
        self.group
    }
}

/// Rule deciding when the platform pays monetary reward.
///
/// Only per-post payment is defined for now; the comment and meta-comment
/// hooks exist so other schemes can be plugged in without touching the
/// round executor.
pub trait MonetaryReward: fmt::Debug + Send + Sync {
    fn post_reward(&self) -> f64;

    fn comment_reward(&self) -> f64 {
        0.0
    }

    fn meta_comment_reward(&self) -> f64 {
        0.0
    }
}

/// Pays `pi` for every article posted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerPost {
    pub pi: f64,
}

impl MonetaryReward for PerPost {
    fn post_reward(&self) -> f64 {
        self.pi
    }
}

/// Everything the round executor needs besides the population.
#[derive(Debug, Clone)]
pub struct Game {
    pub params: GameParams,
    pub read_reward: ReadRewardRecipient,
    pub monetary: Arc<dyn MonetaryReward>,
}

impl Game {
    /// Game with per-post monetary reward `params.pi`.
    pub fn per_post(params: GameParams, read_reward: ReadRewardRecipient) -> Self {
        Game {
            params,
            read_reward,
            monetary: Arc::new(PerPost { pi: params.pi }),
        }
    }
}

impl Default for Game {
    fn default() -> Self {
        Game::per_post(GameParams::default(), ReadRewardRecipient::Reader)
    }
}
