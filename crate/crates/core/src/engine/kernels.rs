//! Event probabilities, costs, psychological rewards and utility of the
//! stage game.

use serde::{Deserialize, Serialize};

use super::genome::Q_MIN;
use super::EngineError;

/// Cost/reward constants of the game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Reference value for cost and psychological reward.
    pub c_ref: f64,
    /// Ratio of psychological reward to cost.
    pub mu: f64,
    /// Cost ratio between consecutive game stages.
    pub delta: f64,
    /// Monetary reward paid per article under the per-post scheme.
    pub pi: f64,
    pub q_min: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            c_ref: 1.0,
            mu: 8.0,
            delta: 0.5,
            pi: 1.0,
            q_min: Q_MIN,
        }
    }
}

impl GameParams {
    pub fn validate(&self) -> Result<(), EngineError> {
        let checks = [
            ("c_ref", self.c_ref, self.c_ref > 0.0),
            ("mu", self.mu, self.mu > 0.0),
            ("delta", self.delta, self.delta > 0.0),
            ("pi", self.pi, self.pi >= 0.0),
            ("q_min", self.q_min, self.q_min == Q_MIN),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(EngineError::InvalidParam { name, value });
            }
        }
        Ok(())
    }

    /// Article, comment and meta-comment costs for an article of quality `q`.
    pub fn costs(&self, q: f64) -> Costs {
        let comment = self.c_ref * self.delta;
        Costs {
            post: self.c_ref * q,
            comment,
            meta_comment: comment * self.delta,
        }
    }

    /// Psychological rewards tied to an article of quality `q`.
    pub fn psych_rewards(&self, q: f64) -> PsychRewards {
        let c = self.costs(q);
        PsychRewards {
            read: c.post * self.mu,
            comment: c.comment * self.mu,
            meta_comment: c.meta_comment * self.mu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costs {
    pub post: f64,
    pub comment: f64,
    pub meta_comment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsychRewards {
    pub read: f64,
    pub comment: f64,
    pub meta_comment: f64,
}

/// Probability that an agent with posting rate `b` and quality `q` posts an
/// article in a round: `b * q_min / q`.
pub fn post_probability(b: f64, q: f64, q_min: f64) -> Result<f64, EngineError> {
    if q < q_min || q_min <= 0.0 {
        return Err(EngineError::QualityBelowMinimum { q, q_min });
    }
    Ok(b * q_min / q)
}

/// Probability that a reader facing `articles_available` neighbor articles
/// reads one of quality `q`.
pub fn read_probability(q: f64, articles_available: usize) -> f64 {
    if articles_available == 0 {
        0.0
    } else {
        (q / articles_available as f64).min(1.0)
    }
}

/// Probability that a reader with comment rate `l` comments on an article of
/// quality `q`.
pub fn comment_probability(l: f64, q: f64) -> f64 {
    l * q
}

/// Probability that an author answers a received comment with a meta-comment,
/// given the author's own comment rate and quality.
pub fn meta_comment_probability(l_author: f64, q_author: f64) -> f64 {
    l_author * q_author
}

/// `(1 - m) * R + m * K - C`.
pub fn utility(monetary_preference: f64, psych: f64, monetary: f64, cost: f64) -> Result<f64, EngineError> {
    if ![monetary_preference, psych, monetary, cost]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(EngineError::NonFinite);
    }
    Ok((1.0 - monetary_preference) * psych + monetary_preference * monetary - cost)
}
