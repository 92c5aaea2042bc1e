//! Oracles shared by the integration tests. Everything here is computed
//! from the payoff tables directly, never through the engine's own helpers.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use snsng::engine::{AgentProfile, Game, ReadRewardRecipient, RoundLog, Strategy, WorldState};
use snsng::network::Graph;

/// Payoff constants written out from the tables: c0 = c_ref·Q, c1 = c_ref·δ,
/// c2 = c1·δ, and each psychological reward is μ times the matching cost.
#[derive(Debug, Clone, Copy)]
pub struct Tables {
    pub c_ref: f64,
    pub mu: f64,
    pub delta: f64,
    pub pi: f64,
}

impl Tables {
    pub const DEFAULT: Tables = Tables {
        c_ref: 1.0,
        mu: 8.0,
        delta: 0.5,
        pi: 1.0,
    };

    pub fn c0(&self, q: f64) -> f64 {
        self.c_ref * q
    }
    pub fn c1(&self) -> f64 {
        self.c_ref * self.delta
    }
    pub fn c2(&self) -> f64 {
        self.c1() * self.delta
    }
    pub fn r0(&self, q: f64) -> f64 {
        self.c0(q) * self.mu
    }
    pub fn r1(&self) -> f64 {
        self.c1() * self.mu
    }
    pub fn r2(&self) -> f64 {
        self.c2() * self.mu
    }
}

/// Mean and variance of one agent's single-round utility.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
}

/// Exact per-round utility moments of both agents on the two-node instance
/// where only node 0 can post (B = (1, 0)): enumerate the four leaves
/// no-read / read / read+comment / read+comment+meta-comment.
pub fn two_node_oracle(
    t: Tables,
    q_min: f64,
    strategies: [Strategy; 2],
    m: [f64; 2],
    recipient: ReadRewardRecipient,
) -> [Moments; 2] {
    let [author, reader] = strategies;
    let p_post = author.posting_rate * q_min / author.quality;
    assert_eq!(p_post, 1.0, "the oracle assumes node 0 posts every round");
    assert_eq!(reader.posting_rate, 0.0, "the oracle assumes node 1 never posts");
    let q = author.quality;
    let s_reader = 1.0;
    let p_read = (q / s_reader).min(1.0);
    let p_comment = reader.comment_rate * q;
    let p_meta = author.comment_rate * q;

    // (probability, [R, K, C] per agent)
    let mut leaves: Vec<(f64, [[f64; 3]; 2])> = Vec::new();
    for read in [false, true] {
        for comment in [false, true] {
            for meta in [false, true] {
                if (!read && (comment || meta)) || (!comment && meta) {
                    continue;
                }
                let mut p = if read { p_read } else { 1.0 - p_read };
                if read {
                    p *= if comment { p_comment } else { 1.0 - p_comment };
                }
                if comment {
                    p *= if meta { p_meta } else { 1.0 - p_meta };
                }
                let mut a = [0.0, t.pi, t.c0(q)];
                let mut b = [0.0, 0.0, 0.0];
                if read {
                    match recipient {
                        ReadRewardRecipient::Reader => b[0] += t.r0(q),
                        ReadRewardRecipient::Author => a[0] += t.r0(q),
                    }
                }
                if comment {
                    b[2] += t.c1();
                    a[0] += t.r1();
                }
                if meta {
                    a[2] += t.c2();
                    b[0] += t.r2();
                }
                leaves.push((p, [a, b]));
            }
        }
    }
    assert_eq!(leaves.len(), 4);
    let total: f64 = leaves.iter().map(|l| l.0).sum();
    assert!((total - 1.0).abs() < 1e-15);

    let mut out = [Moments { mean: 0.0, var: 0.0 }; 2];
    for agent in 0..2 {
        let u = |rkc: [f64; 3]| (1.0 - m[agent]) * rkc[0] + m[agent] * rkc[1] - rkc[2];
        let mean: f64 = leaves.iter().map(|(p, x)| p * u(x[agent])).sum();
        let var: f64 = leaves.iter().map(|(p, x)| p * (u(x[agent]) - mean).powi(2)).sum();
        out[agent] = Moments { mean, var };
    }
    out
}

/// Running totals rebuilt from round logs alone.
#[derive(Debug, Clone)]
pub struct Replay {
    pub psych: Vec<f64>,
    pub cost: Vec<f64>,
    pub posts: Vec<u64>,
    pub reads_made: Vec<u64>,
    pub comments_made: Vec<u64>,
    pub comments_received: Vec<u64>,
    pub meta_made: Vec<u64>,
    pub meta_received: Vec<u64>,
}

impl Replay {
    pub fn new(n: usize) -> Self {
        Replay {
            psych: vec![0.0; n],
            cost: vec![0.0; n],
            posts: vec![0; n],
            reads_made: vec![0; n],
            comments_made: vec![0; n],
            comments_received: vec![0; n],
            meta_made: vec![0; n],
            meta_received: vec![0; n],
        }
    }

    pub fn absorb(&mut self, log: &RoundLog, t: Tables, recipient: ReadRewardRecipient) {
        for a in &log.articles {
            let i = a.author;
            self.posts[i] += 1;
            self.cost[i] += t.c0(a.quality);
            for &j in &a.readers {
                self.reads_made[j] += 1;
                match recipient {
                    ReadRewardRecipient::Reader => self.psych[j] += t.r0(a.quality),
                    ReadRewardRecipient::Author => self.psych[i] += t.r0(a.quality),
                }
            }
            for &j in &a.commenters {
                self.comments_made[j] += 1;
                self.cost[j] += t.c1();
                self.comments_received[i] += 1;
                self.psych[i] += t.r1();
            }
            for &j in &a.meta_commented {
                self.meta_made[i] += 1;
                self.cost[i] += t.c2();
                self.meta_received[j] += 1;
                self.psych[j] += t.r2();
            }
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Checks every accounting law of one world after a round. `replay` must
/// already include that round's log.
pub fn check_accounting(
    graph: &Graph,
    strategies: &[Strategy],
    t: Tables,
    state: &WorldState,
    log: &RoundLog,
    replay: &Replay,
) -> Result<(), String> {
    for a in &log.articles {
        let nbrs = graph.neighbors(a.author);
        if (a.quality - strategies[a.author].quality).abs() > 0.0 {
            return Err(format!("article of {} carries the wrong quality", a.author));
        }
        if !a.readers.iter().all(|r| nbrs.contains(r)) {
            return Err(format!("reader outside the neighborhood of {}", a.author));
        }
        if !a.commenters.iter().all(|c| a.readers.contains(c)) {
            return Err(format!("commenter who did not read article of {}", a.author));
        }
        if !a.meta_commented.iter().all(|c| a.commenters.contains(c)) {
            return Err(format!("meta-comment without a comment on article of {}", a.author));
        }
    }
    let posters: Vec<usize> = log.articles.iter().map(|a| a.author).collect();
    let mut unique = posters.clone();
    unique.dedup();
    if unique.len() != posters.len() {
        return Err("an agent posted twice in one round".into());
    }

    for (i, l) in state.agents.iter().enumerate() {
        let expected_k = t.pi * l.posts_made as f64;
        if !close(l.monetary, expected_k) {
            return Err(format!("agent {i}: K = {} but π·posts = {expected_k}", l.monetary));
        }
        let expected_c = t.c0(strategies[i].quality) * l.posts_made as f64
            + t.c1() * l.comments_made as f64
            + t.c2() * l.meta_comments_made as f64;
        if !close(l.cost, expected_c) || !close(l.cost, replay.cost[i]) {
            return Err(format!("agent {i}: C = {} but decomposition gives {expected_c}", l.cost));
        }
        if !close(l.psych, replay.psych[i]) {
            return Err(format!("agent {i}: R = {} but the log gives {}", l.psych, replay.psych[i]));
        }
        let counters = [
            (l.posts_made, replay.posts[i], "posts_made"),
            (l.reads_made, replay.reads_made[i], "reads_made"),
            (l.comments_made, replay.comments_made[i], "comments_made"),
            (l.comments_received, replay.comments_received[i], "comments_received"),
            (l.meta_comments_made, replay.meta_made[i], "meta_comments_made"),
            (l.meta_comments_received, replay.meta_received[i], "meta_comments_received"),
        ];
        for (got, want, name) in counters {
            if got != want {
                return Err(format!("agent {i}: {name} = {got}, log says {want}"));
            }
        }
        if l.psych < 0.0 || l.cost < 0.0 || l.monetary < 0.0 {
            return Err(format!("agent {i}: negative accumulator"));
        }
    }

    let sum = |f: fn(&snsng::engine::AgentLedger) -> u64| state.agents.iter().map(f).sum::<u64>();
    if sum(|l| l.comments_made) != sum(|l| l.comments_received) {
        return Err("comments made and received disagree".into());
    }
    if sum(|l| l.meta_comments_made) != sum(|l| l.meta_comments_received) {
        return Err("meta-comments made and received disagree".into());
    }
    if sum(|l| l.reads_made) != replay.reads_made.iter().sum::<u64>() {
        return Err("reads made disagree with reader sets".into());
    }
    if sum(|l| l.reads_made) != sum(|l| l.reads_received) {
        return Err("reads made and received disagree".into());
    }
    Ok(())
}

/// Every regular file under `root`, keyed by relative path.
pub fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for path in entries {
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Two-node path graph.
pub fn pair_graph() -> Graph {
    Graph::from_edges(2, [(0, 1)]).unwrap()
}

pub fn profiles(m: &[f64]) -> Vec<AgentProfile> {
    m.iter()
        .enumerate()
        .map(|(i, &m)| AgentProfile::new(i, m).unwrap())
        .collect()
}

pub fn default_game(recipient: ReadRewardRecipient) -> Game {
    Game::per_post(Default::default(), recipient)
}
