//! Experiment orchestration: single runs, paired π-sweeps and re-analysis of
//! output directories.

pub mod config;
pub mod metrics;
pub mod output;
mod profiles;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ConfigError, ConfigLayer, ExperimentConfig, MrStrategy};
pub use metrics::{summarize_agents, AgentRecord, AgentSummary, RunSummary, ScatterRow, StrategyStats};
pub use output::Manifest;
pub use profiles::assign_profiles;

use crate::engine::{run_round, AgentLedger, AgentProfile, Strategy, WorldState, ROUNDS_PER_GENERATION};
use crate::evolution::{Ensemble, EvolutionError, Evolver, GenerationStats, Optimizer};
use crate::network::{generate_cnn, Graph, NetworkError};
use crate::rng::{seeded, seeded_stream, Stream};
use crate::stats::median;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("equal group split needs an even agent count, got {0}")]
    OddAgentCount(usize),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Analysis { path: PathBuf, message: String },
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub graph: Arc<Graph>,
    pub profiles: Arc<[AgentProfile]>,
    /// One record per (world, agent), ordered by world then id.
    pub records: Vec<AgentRecord>,
    /// Cross-world mean strategy per agent.
    pub agents: Vec<AgentSummary>,
    /// Snapshots every `snapshot_every` generations plus a final one.
    pub timeseries: Vec<GenerationStats>,
    pub summary: RunSummary,
    pub final_posts_per_round: f64,
    /// `round,author,reader,event_type` lines when tracing is on.
    pub events: Option<String>,
}

impl RunOutcome {
    pub fn final_stats(&self) -> &GenerationStats {
        self.timeseries.last().expect("a run has at least the final snapshot")
    }
}

/// Runs one experiment in memory. Uses the ambient rayon pool for world
/// evaluation; results do not depend on its size.
pub fn simulate(config: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    config.validate()?;
    let graph = Arc::new(generate_cnn(config.n, config.u, &mut seeded(config.seed_graph))?);
    let profiles: Arc<[AgentProfile]> = assign_profiles(config.n, config.seed_profiles)?.into();
    let ensemble = Ensemble::random(graph.clone(), profiles.clone(), config.worlds, config.seed_sim)?;
    let mut evolver = Evolver::new(
        ensemble,
        config.evolution_params(),
        config.game(),
        seeded_stream(config.seed_sim, Stream::Evolution),
    )?;

    let n = config.n;
    let mut lifetime = vec![vec![AgentLedger::default(); n]; config.worlds];
    let absorb = |lifetime: &mut Vec<Vec<AgentLedger>>, states: &[WorldState]| {
        for (acc, state) in lifetime.iter_mut().zip(states) {
            for (a, s) in acc.iter_mut().zip(&state.agents) {
                a.absorb(s);
            }
        }
    };

    let mut timeseries = Vec::with_capacity(config.generations / config.snapshot_every + 2);
    for generation in 0..config.generations {
        let (stats, outcomes) = evolver.step()?;
        let states: Vec<WorldState> = outcomes.into_iter().map(|o| o.state).collect();
        absorb(&mut lifetime, &states);
        if generation % config.snapshot_every == 0 {
            timeseries.push(stats);
        }
    }
    let final_outcomes = evolver.evaluate();
    let final_stats = GenerationStats::compute(config.generations, evolver.ensemble(), &final_outcomes);
    let final_states: Vec<WorldState> = final_outcomes.iter().map(|o| o.state.clone()).collect();
    absorb(&mut lifetime, &final_states);
    timeseries.push(final_stats);

    let ensemble = evolver.ensemble();
    let mut records = Vec::with_capacity(config.worlds * n);
    for (w, genomes) in ensemble.worlds().iter().enumerate() {
        for (id, genome) in genomes.iter().enumerate() {
            let last = &final_outcomes[w].state.agents[id];
            let life = &lifetime[w][id];
            let profile = &profiles[id];
            records.push(AgentRecord {
                world: w,
                id,
                degree: graph.neighbors(id).len(),
                group: profile.group(),
                m: profile.monetary_preference(),
                b: genome.posting_rate(),
                l: genome.comment_rate(),
                q: genome.quality(),
                utility: final_outcomes[w].fitness[id],
                psych: last.psych,
                monetary: last.monetary,
                cost: last.cost,
                posts_made: life.posts_made,
                reads_made: life.reads_made,
                reads_received: life.reads_received,
                comments_made: life.comments_made,
                comments_received: life.comments_received,
                meta_comments_made: life.meta_comments_made,
                meta_comments_received: life.meta_comments_received,
            });
        }
    }

    let events = config.trace.then(|| {
        let strategies: Vec<Strategy> = ensemble.worlds()[0].iter().map(|g| g.strategy()).collect();
        let mut rng = seeded_stream(config.seed_sim, Stream::Trace);
        let mut state = WorldState::new(n);
        let mut out = Vec::new();
        for round in 0..ROUNDS_PER_GENERATION {
            let log = run_round(&graph, &strategies, &profiles, evolver.game(), &mut state, &mut rng);
            log.write_events(round, &mut out).expect("writing to memory");
        }
        String::from_utf8(out).expect("event log is ASCII")
    });

    let scatter: Vec<ScatterRow> = records.iter().map(ScatterRow::from).collect();
    let agents = summarize_agents(&scatter);
    let summary = RunSummary::from_agents(&agents);
    let final_posts_per_round = final_stats.posts_per_round;

    Ok(RunOutcome {
        config: config.clone(),
        graph,
        profiles,
        records,
        agents,
        timeseries,
        summary,
        final_posts_per_round,
        events,
    })
}

/// Runs one experiment and writes its outputs to `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome, ExperimentError> {
    let outcome = simulate(config)?;
    output::write_run(&config.output_dir, &outcome)?;
    Ok(outcome)
}

/// One (π, seed) cell of a sweep; also the row format of `sweep.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub pi: f64,
    /// Simulation seed of the cell; graph and profile seeds are shared.
    pub seed: u64,
    #[serde(rename = "mean_Q")]
    pub mean_q: f64,
    #[serde(rename = "std_Q")]
    pub std_q: f64,
    #[serde(rename = "mean_B")]
    pub mean_b: f64,
    #[serde(rename = "mean_L")]
    pub mean_l: f64,
    pub posts_per_round: f64,
    #[serde(rename = "spearman_degree_Q")]
    pub spearman_degree_q: f64,
}

impl SweepCell {
    fn new(pi: f64, seed: u64, summary: &RunSummary, posts_per_round: f64) -> Self {
        SweepCell {
            pi,
            seed,
            mean_q: summary.all.mean_q,
            std_q: summary.all.std_q,
            mean_b: summary.all.mean_b,
            mean_l: summary.all.mean_l,
            posts_per_round,
            spearman_degree_q: summary.spearman_degree_q,
        }
    }
}

/// Aggregates of all seeds at one π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiAggregate {
    pub pi: f64,
    pub seeds: usize,
    pub alpha: StrategyStats,
    pub beta: StrategyStats,
    pub all: StrategyStats,
    pub mean_posts_per_round: f64,
    pub mean_spearman_degree_q: f64,
    pub median_mean_q: f64,
    pub median_posts_per_round: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Cells ordered by π, then seed.
    pub cells: Vec<SweepCell>,
    pub per_pi: Vec<PiAggregate>,
}

fn average_stats(stats: &[StrategyStats]) -> StrategyStats {
    let k = stats.len() as f64;
    let avg = |f: fn(&StrategyStats) -> f64| stats.iter().map(f).sum::<f64>() / k;
    StrategyStats {
        agents: stats.first().map_or(0, |s| s.agents),
        mean_b: avg(|s| s.mean_b),
        std_b: avg(|s| s.std_b),
        mean_l: avg(|s| s.mean_l),
        std_l: avg(|s| s.std_l),
        mean_q: avg(|s| s.mean_q),
        std_q: avg(|s| s.std_q),
    }
}

fn validate_sweep(pi_values: &[f64], seeds_per_cell: usize) -> Result<(), ExperimentError> {
    if pi_values.is_empty() {
        return Err(ExperimentError::Sweep("no pi values given".into()));
    }
    if seeds_per_cell == 0 {
        return Err(ExperimentError::Sweep("seeds per cell must be at least 1".into()));
    }
    if pi_values.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(ExperimentError::Sweep("pi values must be nonnegative and finite".into()));
    }
    if pi_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::Sweep("pi values must be strictly increasing".into()));
    }
    Ok(())
}

/// Configs of every cell: π varies, the simulation seed runs over
/// `seed_sim, seed_sim + 1, ...`, everything else is held fixed.
pub fn sweep_configs(
    config: &ExperimentConfig,
    pi_values: &[f64],
    seeds_per_cell: usize,
) -> Result<Vec<ExperimentConfig>, ExperimentError> {
    validate_sweep(pi_values, seeds_per_cell)?;
    let mut configs = Vec::with_capacity(pi_values.len() * seeds_per_cell);
    for &pi in pi_values {
        for k in 0..seeds_per_cell {
            let mut cell = config.clone();
            cell.pi = pi;
            cell.seed_sim = config.seed_sim.wrapping_add(k as u64);
            cell.output_dir = output::cell_dir(&config.output_dir, pi, cell.seed_sim);
            cell.validate()?;
            configs.push(cell);
        }
    }
    Ok(configs)
}

fn aggregate(cells: Vec<SweepCell>, pi_values: &[f64], run_summaries: &[RunSummary]) -> SweepResult {
    let per_pi = pi_values
        .iter()
        .map(|&pi| {
            let idx: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].pi == pi).collect();
            let pick = |f: fn(&RunSummary) -> StrategyStats| -> Vec<StrategyStats> {
                idx.iter().map(|&i| f(&run_summaries[i])).collect()
            };
            let mean_q: Vec<f64> = idx.iter().map(|&i| cells[i].mean_q).collect();
            let posts: Vec<f64> = idx.iter().map(|&i| cells[i].posts_per_round).collect();
            let rho: Vec<f64> = idx.iter().map(|&i| cells[i].spearman_degree_q).collect();
            let k = idx.len() as f64;
            PiAggregate {
                pi,
                seeds: idx.len(),
                alpha: average_stats(&pick(|s| s.alpha)),
                beta: average_stats(&pick(|s| s.beta)),
                all: average_stats(&pick(|s| s.all)),
                mean_posts_per_round: posts.iter().sum::<f64>() / k,
                mean_spearman_degree_q: rho.iter().sum::<f64>() / k,
                median_mean_q: median(&mean_q),
                median_posts_per_round: median(&posts),
            }
        })
        .collect();
    SweepResult { cells, per_pi }
}

fn sweep_impl(
    config: &ExperimentConfig,
    pi_values: &[f64],
    seeds_per_cell: usize,
    write: bool,
) -> Result<SweepResult, ExperimentError> {
    let configs = sweep_configs(config, pi_values, seeds_per_cell)?;
    let outcomes: Vec<(SweepCell, RunSummary)> = configs
        .par_iter()
        .map(|cell| {
            let outcome = if write { run_experiment(cell)? } else { simulate(cell)? };
            Ok((
                SweepCell::new(cell.pi, cell.seed_sim, &outcome.summary, outcome.final_posts_per_round),
                outcome.summary,
            ))
        })
        .collect::<Result<_, ExperimentError>>()?;
    let (cells, summaries): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    Ok(aggregate(cells, pi_values, &summaries))
}

/// Paired π-sweep in memory.
pub fn sweep(
    config: &ExperimentConfig,
    pi_values: &[f64],
    seeds_per_cell: usize,
) -> Result<SweepResult, ExperimentError> {
    sweep_impl(config, pi_values, seeds_per_cell, false)
}

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_SUMMARY_CSV: &str = "sweep_summary.csv";

#[derive(Debug, Serialize)]
struct SweepSummaryRow {
    pi: f64,
    seeds: usize,
    #[serde(rename = "median_mean_Q")]
    median_mean_q: f64,
    median_posts_per_round: f64,
    #[serde(rename = "mean_Q")]
    mean_q: f64,
    #[serde(rename = "std_Q")]
    std_q: f64,
    #[serde(rename = "alpha_mean_Q")]
    alpha_mean_q: f64,
    #[serde(rename = "beta_mean_Q")]
    beta_mean_q: f64,
    #[serde(rename = "mean_B")]
    mean_b: f64,
    #[serde(rename = "mean_L")]
    mean_l: f64,
    #[serde(rename = "mean_spearman_degree_Q")]
    mean_spearman_degree_q: f64,
}

/// Paired π-sweep writing every cell's run directory under
/// `config.output_dir/pi_<π>/seed_<seed>/`, plus `sweep.csv` and
/// `sweep_summary.csv` at the root.
pub fn run_sweep(
    config: &ExperimentConfig,
    pi_values: &[f64],
    seeds_per_cell: usize,
) -> Result<SweepResult, ExperimentError> {
    let result = sweep_impl(config, pi_values, seeds_per_cell, true)?;
    let root = &config.output_dir;
    output::write_csv(&root.join(SWEEP_CSV), &result.cells)?;
    output::write_csv(
        &root.join(SWEEP_SUMMARY_CSV),
        result.per_pi.iter().map(|a| SweepSummaryRow {
            pi: a.pi,
            seeds: a.seeds,
            median_mean_q: a.median_mean_q,
            median_posts_per_round: a.median_posts_per_round,
            mean_q: a.all.mean_q,
            std_q: a.all.std_q,
            alpha_mean_q: a.alpha.mean_q,
            beta_mean_q: a.beta.mean_q,
            mean_b: a.all.mean_b,
            mean_l: a.all.mean_l,
            mean_spearman_degree_q: a.mean_spearman_degree_q,
        }),
    )?;
    Ok(result)
}

/// Summary recomputed from a run directory's scatter files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAnalysis {
    pub dir: PathBuf,
    pub optimizer: Optimizer,
    pub summary: RunSummary,
    pub manifest_summary: RunSummary,
}

impl RunAnalysis {
    /// Whether the recomputed summary equals the one in the manifest exactly.
    pub fn consistent(&self) -> bool {
        self.summary == self.manifest_summary
    }
}

pub fn analyze_run(dir: &Path) -> Result<RunAnalysis, ExperimentError> {
    let manifest = output::read_manifest(dir)?;
    let rows = output::read_scatter(dir)?;
    if rows.is_empty() {
        return Err(ExperimentError::Analysis {
            path: dir.to_path_buf(),
            message: "scatter files contain no rows".into(),
        });
    }
    let summary = RunSummary::from_agents(&summarize_agents(&rows));
    Ok(RunAnalysis {
        dir: dir.to_path_buf(),
        optimizer: manifest.config.optimizer,
        summary,
        manifest_summary: manifest.summary,
    })
}

/// Per-π medians over the cells of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiMedians {
    pub pi: f64,
    pub cells: usize,
    pub mean_q: f64,
    pub posts_per_round: f64,
    pub spearman_degree_q: f64,
}

/// Per-π medians recomputed from a sweep directory's `sweep.csv`.
pub fn analyze_sweep(dir: &Path) -> Result<Vec<PiMedians>, ExperimentError> {
    let cells: Vec<SweepCell> = output::read_csv(&dir.join(SWEEP_CSV))?;
    let mut pis: Vec<f64> = cells.iter().map(|c| c.pi).collect();
    pis.sort_by(|a, b| a.partial_cmp(b).expect("pi is finite"));
    pis.dedup();
    Ok(pis
        .into_iter()
        .map(|pi| {
            let at: Vec<&SweepCell> = cells.iter().filter(|c| c.pi == pi).collect();
            let column = |f: fn(&SweepCell) -> f64| median(&at.iter().map(|c| f(c)).collect::<Vec<_>>());
            PiMedians {
                pi,
                cells: at.len(),
                mean_q: column(|c| c.mean_q),
                posts_per_round: column(|c| c.posts_per_round),
                spearman_degree_q: column(|c| c.spearman_degree_q),
            }
        })
        .collect())
}
