//! Run directories: CSV datasets plus a JSON manifest.
//!
//! ```text
//! <dir>/scatter_alpha.csv   id,degree,B,L,Q,M,group,world  (one row per world and agent)
//! <dir>/scatter_beta.csv    same schema
//! <dir>/scatter_mean.csv    id,degree,B,L,Q,M,group,worlds (cross-world means)
//! <dir>/agents.csv          full per-world agent records
//! <dir>/timeseries.csv      per-generation group statistics
//! <dir>/network.txt         edge list
//! <dir>/manifest.json       resolved config, seeds, graph facts, summary
//! <dir>/events.csv          only with `trace = true`
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{AgentRecord, RunSummary, ScatterRow};
use super::{ExperimentError, RunOutcome};
use crate::engine::Group;
use crate::evolution::GenerationStats;

pub const SCATTER_ALPHA: &str = "scatter_alpha.csv";
pub const SCATTER_BETA: &str = "scatter_beta.csv";
pub const SCATTER_MEAN: &str = "scatter_mean.csv";
pub const AGENTS: &str = "agents.csv";
pub const TIMESERIES: &str = "timeseries.csv";
pub const NETWORK: &str = "network.txt";
pub const MANIFEST: &str = "manifest.json";
pub const EVENTS: &str = "events.csv";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub graph: u64,
    pub profiles: u64,
    pub sim: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub nodes: usize,
    pub edges: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
    pub clustering: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: Seeds,
    pub graph: GraphInfo,
    pub summary: RunSummary,
    pub final_posts_per_round: f64,
    pub timeseries_rows: usize,
}

impl Manifest {
    pub fn new(outcome: &RunOutcome) -> Self {
        let c = &outcome.config;
        let g = &outcome.graph;
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: c.clone(),
            seeds: Seeds {
                graph: c.seed_graph,
                profiles: c.seed_profiles,
                sim: c.seed_sim,
            },
            graph: GraphInfo {
                nodes: g.node_count(),
                edges: g.edge_count(),
                mean_degree: g.mean_degree(),
                max_degree: g.max_degree(),
                clustering: g.clustering_coefficient(),
            },
            summary: outcome.summary,
            final_posts_per_round: outcome.final_posts_per_round,
            timeseries_rows: outcome.timeseries.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TimeseriesRow {
    generation: usize,
    alpha_mean_b: f64,
    alpha_std_b: f64,
    alpha_mean_l: f64,
    alpha_std_l: f64,
    alpha_mean_q: f64,
    alpha_std_q: f64,
    alpha_mean_utility: f64,
    beta_mean_b: f64,
    beta_std_b: f64,
    beta_mean_l: f64,
    beta_std_l: f64,
    beta_mean_q: f64,
    beta_std_q: f64,
    beta_mean_utility: f64,
    mean_utility: f64,
    posts_per_round: f64,
}

impl From<&GenerationStats> for TimeseriesRow {
    fn from(s: &GenerationStats) -> Self {
        TimeseriesRow {
            generation: s.generation,
            alpha_mean_b: s.alpha.mean_b,
            alpha_std_b: s.alpha.std_b,
            alpha_mean_l: s.alpha.mean_l,
            alpha_std_l: s.alpha.std_l,
            alpha_mean_q: s.alpha.mean_q,
            alpha_std_q: s.alpha.std_q,
            alpha_mean_utility: s.alpha.mean_utility,
            beta_mean_b: s.beta.mean_b,
            beta_std_b: s.beta.std_b,
            beta_mean_l: s.beta.mean_l,
            beta_std_l: s.beta.std_l,
            beta_mean_q: s.beta.mean_q,
            beta_std_q: s.beta.std_q,
            beta_mean_utility: s.beta.mean_utility,
            mean_utility: s.all.mean_utility,
            posts_per_round: s.posts_per_round,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), ExperimentError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        writer.serialize(row).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

pub(crate) fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ExperimentError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(csv_err(path))
}

/// Writes every output of a run into `dir`, creating it if needed.
pub fn write_run(dir: &Path, outcome: &RunOutcome) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let scatter = |group: Group| {
        outcome
            .records
            .iter()
            .filter(move |r| r.group == group)
            .map(ScatterRow::from)
    };
    write_csv(&dir.join(SCATTER_ALPHA), scatter(Group::Alpha))?;
    write_csv(&dir.join(SCATTER_BETA), scatter(Group::Beta))?;
    write_csv(&dir.join(SCATTER_MEAN), &outcome.agents)?;
    write_csv(&dir.join(AGENTS), &outcome.records)?;
    write_csv(
        &dir.join(TIMESERIES),
        outcome.timeseries.iter().map(TimeseriesRow::from),
    )?;

    let network = dir.join(NETWORK);
    let file = File::create(&network).map_err(io_err(&network))?;
    outcome
        .graph
        .write_edge_list(BufWriter::new(file), outcome.config.u, outcome.config.seed_graph)
        .map_err(io_err(&network))?;

    if let Some(events) = &outcome.events {
        let path = dir.join(EVENTS);
        let mut out = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        out.write_all(b"round,author,reader,event_type\n")
            .and_then(|_| out.write_all(events.as_bytes()))
            .and_then(|_| out.flush())
            .map_err(io_err(&path))?;
    }

    let path = dir.join(MANIFEST);
    let mut json = serde_json::to_string_pretty(&Manifest::new(outcome)).expect("manifest serializes");
    json.push('\n');
    fs::write(&path, json).map_err(io_err(&path))
}

/// Reads both per-group scatter files, ordered by world then id.
pub fn read_scatter(dir: &Path) -> Result<Vec<ScatterRow>, ExperimentError> {
    let mut rows: Vec<ScatterRow> = read_csv(&dir.join(SCATTER_ALPHA))?;
    rows.extend(read_csv::<ScatterRow>(&dir.join(SCATTER_BETA))?);
    rows.sort_by_key(|r| (r.world, r.id));
    Ok(rows)
}

pub fn read_agents(dir: &Path) -> Result<Vec<AgentRecord>, ExperimentError> {
    read_csv(&dir.join(AGENTS))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ExperimentError> {
    let path = dir.join(MANIFEST);
    let file = File::open(&path).map_err(io_err(&path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| ExperimentError::Json { path, source })
}

/// Output directory of one sweep cell.
pub fn cell_dir(root: &Path, pi: f64, seed: u64) -> PathBuf {
    root.join(format!("pi_{pi}")).join(format!("seed_{seed}"))
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use crate::rng::seeded;

    #[test]
    fn json_floats_round_trip_exactly() {
        // Summaries are compared with `==` after a manifest round trip.
        let mut rng = seeded(11);
        for _ in 0..100_000 {
            let x: f64 = rng.random::<f64>() * 10f64.powi(rng.random_range(-6..6));
            let back: f64 = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x:e}");
        }
    }
}
