use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernels::{
    comment_probability, meta_comment_probability, post_probability, read_probability,
};
use super::{AgentProfile, Game, ReadRewardRecipient, Strategy};
use crate::network::{Graph, NodeId};

/// Game rounds that make up one generation.
pub const ROUNDS_PER_GENERATION: usize = 4;

/// Accumulated rewards, costs and event counts of one agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentLedger {
    /// R: psychological reward.
    pub psych: f64,
    /// K: monetary reward.
    pub monetary: f64,
    /// C: cost.
    pub cost: f64,
    pub posts_made: u64,
    pub reads_made: u64,
    pub reads_received: u64,
    pub comments_made: u64,
    pub comments_received: u64,
    pub meta_comments_made: u64,
    pub meta_comments_received: u64,
}

impl AgentLedger {
    pub fn utility(&self, profile: &AgentProfile) -> f64 {
        super::kernels::utility(
            profile.monetary_preference(),
            self.psych,
            self.monetary,
            self.cost,
        )
        .expect("ledger accumulators are finite")
    }

    /// Adds another ledger's counters and accumulators into this one.
    pub fn absorb(&mut self, other: &AgentLedger) {
        self.psych += other.psych;
        self.monetary += other.monetary;
        self.cost += other.cost;
        self.posts_made += other.posts_made;
        self.reads_made += other.reads_made;
        self.reads_received += other.reads_received;
        self.comments_made += other.comments_made;
        self.comments_received += other.comments_received;
        self.meta_comments_made += other.meta_comments_made;
        self.meta_comments_received += other.meta_comments_received;
    }
}

/// Per-agent accumulators of one world over one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub agents: Vec<AgentLedger>,
}

impl WorldState {
    pub fn new(agent_count: usize) -> Self {
        WorldState {
            agents: vec![AgentLedger::default(); agent_count],
        }
    }

    pub fn total_posts(&self) -> u64 {
        self.agents.iter().map(|a| a.posts_made).sum()
    }
}

/// One article and the interactions it triggered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub author: NodeId,
    pub quality: f64,
    pub readers: Vec<NodeId>,
    pub commenters: Vec<NodeId>,
    /// Commenters who received a meta-comment from the author.
    pub meta_commented: Vec<NodeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    /// Articles in ascending author order.
    pub articles: Vec<ArticleRecord>,
}

impl RoundLog {
    pub fn posts(&self) -> usize {
        self.articles.len()
    }

    pub fn reads(&self) -> usize {
        self.articles.iter().map(|a| a.readers.len()).sum()
    }

    pub fn comments(&self) -> usize {
        self.articles.iter().map(|a| a.commenters.len()).sum()
    }

    pub fn meta_comments(&self) -> usize {
        self.articles.iter().map(|a| a.meta_commented.len()).sum()
    }

    /// Writes `round,author,reader,event_type` lines; `reader` is empty for
    /// posts and names the commenter for meta-comments.
    pub fn write_events<W: Write>(&self, round: usize, out: &mut W) -> io::Result<()> {
        for article in &self.articles {
            writeln!(out, "{round},{},,post", article.author)?;
            for r in &article.readers {
                writeln!(out, "{round},{},{r},read", article.author)?;
            }
            for c in &article.commenters {
                writeln!(out, "{round},{},{c},comment", article.author)?;
            }
            for m in &article.meta_commented {
                writeln!(out, "{round},{},{m},meta_comment", article.author)?;
            }
        }
        Ok(())
    }
}

/// Plays one round and returns the full event log.
///
/// Panics if `strategies`, `profiles` or `state` do not cover every node.
pub fn run_round<R: Rng + ?Sized>(
    graph: &Graph,
    strategies: &[Strategy],
    profiles: &[AgentProfile],
    game: &Game,
    state: &mut WorldState,
    rng: &mut R,
) -> RoundLog {
    let mut log = RoundLog::default();
    play_round(graph, strategies, profiles, game, state, rng, Some(&mut log));
    log
}

fn play_round<R: Rng + ?Sized>(
    graph: &Graph,
    strategies: &[Strategy],
    profiles: &[AgentProfile],
    game: &Game,
    state: &mut WorldState,
    rng: &mut R,
    mut log: Option<&mut RoundLog>,
) {
    let n = graph.node_count();
    assert!(
        strategies.len() == n && profiles.len() == n && state.agents.len() == n,
        "population does not cover the graph"
    );
    let params = &game.params;
    let ledgers = &mut state.agents;

    // Posting: one opportunity per agent.
    let mut article_of: Vec<Option<usize>> = vec![None; n];
    let mut posted = 0;
    for (author, strategy) in strategies.iter().enumerate() {
        let p = post_probability(strategy.posting_rate, strategy.quality, params.q_min)
            .expect("strategy quality is at least q_min");
        if !rng.random_bool(p) {
            continue;
        }
        let ledger = &mut ledgers[author];
        ledger.posts_made += 1;
        ledger.cost += params.costs(strategy.quality).post;
        ledger.monetary += game.monetary.post_reward();
        if let Some(log) = log.as_deref_mut() {
            log.articles.push(ArticleRecord {
                author,
                quality: strategy.quality,
                readers: Vec::new(),
                commenters: Vec::new(),
                meta_commented: Vec::new(),
            });
        }
        article_of[author] = Some(posted);
        posted += 1;
    }
    if posted == 0 {
        return;
    }

    let comment_cost = params.costs(params.q_min).comment;
    let meta_cost = params.costs(params.q_min).meta_comment;

    // Reading, commenting and meta-commenting on this round's articles.
    for reader in 0..n {
        let neighbors = graph.neighbors(reader);
        let available = neighbors.iter().filter(|&&a| article_of[a].is_some()).count();
        if available == 0 {
            continue;
        }
        let reader_strategy = strategies[reader];
        for &author in neighbors {
            let Some(article) = article_of[author] else {
                continue;
            };
            let author_strategy = strategies[author];
            let q = author_strategy.quality;
            if !rng.random_bool(read_probability(q, available)) {
                continue;
            }
            let rewards = params.psych_rewards(q);
            ledgers[reader].reads_made += 1;
            ledgers[author].reads_received += 1;
            match game.read_reward {
                ReadRewardRecipient::Reader => ledgers[reader].psych += rewards.read,
                ReadRewardRecipient::Author => ledgers[author].psych += rewards.read,
            }
            if let Some(log) = log.as_deref_mut() {
                log.articles[article].readers.push(reader);
            }

            if !rng.random_bool(comment_probability(reader_strategy.comment_rate, q)) {
                continue;
            }
            ledgers[reader].comments_made += 1;
            ledgers[reader].cost += comment_cost;
            ledgers[reader].monetary += game.monetary.comment_reward();
            ledgers[author].comments_received += 1;
            ledgers[author].psych += rewards.comment;
            if let Some(log) = log.as_deref_mut() {
                log.articles[article].commenters.push(reader);
            }

            if !rng.random_bool(meta_comment_probability(author_strategy.comment_rate, q)) {
                continue;
            }
            ledgers[author].meta_comments_made += 1;
            ledgers[author].cost += meta_cost;
            ledgers[author].monetary += game.monetary.meta_comment_reward();
            ledgers[reader].meta_comments_received += 1;
            ledgers[reader].psych += rewards.meta_comment;
            if let Some(log) = log.as_deref_mut() {
                log.articles[article].meta_commented.push(reader);
            }
        }
    }
}

/// Fitness and accumulated ledgers of one generation in one world.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOutcome {
    pub fitness: Vec<f64>,
    pub state: WorldState,
}

/// Plays [`ROUNDS_PER_GENERATION`] rounds on a fresh [`WorldState`] and
/// scores every agent by its utility.
pub fn run_generation<R: Rng + ?Sized>(
    graph: &Graph,
    strategies: &[Strategy],
    profiles: &[AgentProfile],
    game: &Game,
    rng: &mut R,
) -> GenerationOutcome {
    let mut state = WorldState::new(graph.node_count());
    for _ in 0..ROUNDS_PER_GENERATION {
        play_round(graph, strategies, profiles, game, &mut state, rng, None);
    }
    let fitness = state
        .agents
        .iter()
        .zip(profiles)
        .map(|(ledger, profile)| ledger.utility(profile))
        .collect();
    GenerationOutcome { fitness, state }
}
