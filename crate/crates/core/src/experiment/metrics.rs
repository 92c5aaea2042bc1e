use serde::{Deserialize, Serialize};

use crate::engine::Group;
use crate::stats::{mean_std, spearman};

/// Final state of one agent in one world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub world: usize,
    pub id: usize,
    pub degree: usize,
    pub group: Group,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// Utility in the final evaluation generation.
    pub utility: f64,
    #[serde(rename = "R")]
    pub psych: f64,
    #[serde(rename = "K")]
    pub monetary: f64,
    #[serde(rename = "C")]
    pub cost: f64,
    pub posts_made: u64,
    pub reads_made: u64,
    pub reads_received: u64,
    pub comments_made: u64,
    pub comments_received: u64,
    pub meta_comments_made: u64,
    pub meta_comments_received: u64,
}

/// One row of the scatter files: the plotted axes (B, L, degree) and the
/// heat value Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub id: usize,
    pub degree: usize,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub group: Group,
    pub world: usize,
}

impl From<&AgentRecord> for ScatterRow {
    fn from(r: &AgentRecord) -> Self {
        ScatterRow {
            id: r.id,
            degree: r.degree,
            b: r.b,
            l: r.l,
            q: r.q,
            m: r.m,
            group: r.group,
            world: r.world,
        }
    }
}

/// Cross-world mean strategy of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub id: usize,
    pub degree: usize,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub group: Group,
    pub worlds: usize,
}

/// Averages each agent's strategy over worlds. Rows must be sorted by
/// world, then id; sums run in world order.
pub fn summarize_agents(rows: &[ScatterRow]) -> Vec<AgentSummary> {
    let n = rows.iter().map(|r| r.id + 1).max().unwrap_or(0);
    let mut acc: Vec<Option<AgentSummary>> = vec![None; n];
    for r in rows {
        let slot = acc[r.id].get_or_insert(AgentSummary {
            id: r.id,
            degree: r.degree,
            b: 0.0,
            l: 0.0,
            q: 0.0,
            m: r.m,
            group: r.group,
            worlds: 0,
        });
        slot.b += r.b;
        slot.l += r.l;
        slot.q += r.q;
        slot.worlds += 1;
    }
    acc.into_iter()
        .flatten()
        .map(|mut s| {
            let w = s.worlds as f64;
            s.b /= w;
            s.l /= w;
            s.q /= w;
            s
        })
        .collect()
}

/// Mean and dispersion of per-agent strategies within one group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StrategyStats {
    pub agents: usize,
    pub mean_b: f64,
    pub std_b: f64,
    pub mean_l: f64,
    pub std_l: f64,
    pub mean_q: f64,
    pub std_q: f64,
}

impl StrategyStats {
    fn of<'a>(agents: impl Iterator<Item = &'a AgentSummary>) -> Self {
        let agents: Vec<&AgentSummary> = agents.collect();
        let col = |f: fn(&AgentSummary) -> f64| -> Vec<f64> { agents.iter().map(|a| f(a)).collect() };
        let (mean_b, std_b) = mean_std(&col(|a| a.b));
        let (mean_l, std_l) = mean_std(&col(|a| a.l));
        let (mean_q, std_q) = mean_std(&col(|a| a.q));
        StrategyStats {
            agents: agents.len(),
            mean_b,
            std_b,
            mean_l,
            std_l,
            mean_q,
            std_q,
        }
    }
}

/// Headline numbers of a run, computed from the per-agent cross-world means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub worlds: usize,
    pub alpha: StrategyStats,
    pub beta: StrategyStats,
    pub all: StrategyStats,
    /// Spearman correlation between degree and mean Q across agents.
    pub spearman_degree_q: f64,
}

impl RunSummary {
    pub fn from_agents(agents: &[AgentSummary]) -> Self {
        let degrees: Vec<f64> = agents.iter().map(|a| a.degree as f64).collect();
        let qualities: Vec<f64> = agents.iter().map(|a| a.q).collect();
        RunSummary {
            worlds: agents.first().map_or(0, |a| a.worlds),
            alpha: StrategyStats::of(agents.iter().filter(|a| a.group == Group::Alpha)),
            beta: StrategyStats::of(agents.iter().filter(|a| a.group == Group::Beta)),
            all: StrategyStats::of(agents.iter()),
            spearman_degree_q: spearman(&degrees, &qualities),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(world: usize, id: usize, degree: usize, q: f64, group: Group) -> ScatterRow {
        ScatterRow {
            id,
            degree,
            b: 0.5,
            l: 0.25,
            q,
            m: if group == Group::Alpha { 0.2 } else { 0.7 },
            group,
            world,
        }
    }

    #[test]
    fn cross_world_means() {
        let rows = vec![
            row(0, 0, 3, 0.125, Group::Alpha),
            row(0, 1, 1, 1.0, Group::Beta),
            row(1, 0, 3, 0.375, Group::Alpha),
            row(1, 1, 1, 0.5, Group::Beta),
        ];
        let agents = summarize_agents(&rows);
        assert_eq!(agents.len(), 2);
        assert_eq!(agents[0].q, 0.25);
        assert_eq!(agents[1].q, 0.75);
        assert_eq!(agents[1].worlds, 2);
        let s = RunSummary::from_agents(&agents);
        assert_eq!(s.alpha.agents, 1);
        assert_eq!(s.all.mean_q, 0.5);
        assert_eq!(s.all.std_q, 0.25);
        // Higher degree has the lower Q.
        assert_eq!(s.spearman_degree_q, -1.0);
    }
}
