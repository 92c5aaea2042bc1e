//! Strategy evolution: a single-population GA baseline and the
//! multiple-world GA (MWGA).
//!
//! MWGA keeps `W` copies of the network. Every copy plays the game on its own;
//! the next genome of node `i` in any world is bred from parents chosen among
//! node `i`'s genomes across all worlds, weighted by their utility there. Each
//! node therefore evolves a strategy suited to its own position. The GA
//! baseline is the `W = 1` case with parents drawn from the whole population.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    run_generation, AgentProfile, Game, GenerationOutcome, Genome, Group, Strategy, GENOME_BITS,
    GENOME_MASK, LEVELS, ROUNDS_PER_GENERATION,
};
use crate::network::Graph;
use crate::rng::{seeded_stream, Stream};
use crate::stats::mean_std;

/// Floor added to shifted fitness so that all-equal columns stay drawable.
pub const SELECTION_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EvolutionError {
    #[error("non-finite fitness {value} at index {index}")]
    NonFiniteFitness { index: usize, value: f64 },
    #[error("selection needs at least {needed} candidates, got {got}")]
    TooFewCandidates { needed: usize, got: usize },
    #[error("invalid evolution parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("ensemble shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    /// Single population, population-wide parent selection.
    #[serde(rename = "GA")]
    Ga,
    /// Multiple worlds, per-node parent selection across worlds.
    #[serde(rename = "MWGA")]
    Mwga,
}

impl FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "GA" => Ok(Optimizer::Ga),
            "MWGA" => Ok(Optimizer::Mwga),
            _ => Err(format!("expected `GA` or `MWGA`, got `{s}`")),
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Ga => "GA",
            Optimizer::Mwga => "MWGA",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Fitness-proportional over min-shifted fitness.
    #[default]
    Roulette,
}

impl FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "roulette" => Ok(Selection::Roulette),
            _ => Err(format!("expected `roulette`, got `{s}`")),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("roulette")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossover {
    #[default]
    Uniform,
    OnePoint,
}

impl FromStr for Crossover {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" => Ok(Crossover::Uniform),
            "one_point" => Ok(Crossover::OnePoint),
            _ => Err(format!("expected `uniform` or `one_point`, got `{s}`")),
        }
    }
}

impl fmt::Display for Crossover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Crossover::Uniform => "uniform",
            Crossover::OnePoint => "one_point",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub worlds: usize,
    pub generations: usize,
    /// Per-bit flip probability.
    pub mutation_rate: f64,
    pub optimizer: Optimizer,
    pub selection: Selection,
    pub crossover: Crossover,
    /// Keep the best genome of each selection pool unchanged.
    pub elitism: bool,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        EvolutionParams {
            worlds: 10,
            generations: 1000,
            mutation_rate: 0.01,
            optimizer: Optimizer::Mwga,
            selection: Selection::Roulette,
            crossover: Crossover::Uniform,
            elitism: false,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let invalid = |name, reason: &str| EvolutionError::InvalidParam {
            name,
            reason: reason.to_string(),
        };
        if self.worlds == 0 {
            return Err(invalid("W", "must be at least 1"));
        }
        if self.optimizer == Optimizer::Ga && self.worlds != 1 {
            return Err(invalid("W", "the GA optimizer runs a single world (W = 1)"));
        }
        if self.generations == 0 {
            return Err(invalid("generations", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(invalid("mutation_rate", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Roulette wheel over `f - min(f) + ε`.
#[derive(Debug, Clone)]
pub struct Roulette {
    wheel: WeightedIndex<f64>,
}

impl Roulette {
    pub fn new(fitness: &[f64]) -> Result<Self, EvolutionError> {
        let weights = shifted_weights(fitness)?;
        let wheel = WeightedIndex::new(&weights).map_err(|_| EvolutionError::TooFewCandidates {
            needed: 1,
            got: fitness.len(),
        })?;
        Ok(Roulette { wheel })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.wheel.sample(rng)
    }

    /// Two independent draws; the same index may come up twice.
    pub fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        (self.draw(rng), self.draw(rng))
    }
}

/// Selection weights `f - min(f) + ε`.
pub fn shifted_weights(fitness: &[f64]) -> Result<Vec<f64>, EvolutionError> {
    if let Some((index, &value)) = fitness.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(EvolutionError::NonFiniteFitness { index, value });
    }
    let min = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(fitness.iter().map(|f| f - min + SELECTION_EPSILON).collect())
}

/// Picks two source worlds for one node from that node's fitness in every
/// world.
pub fn select_parents_mwga<R: Rng + ?Sized>(
    fitness_column: &[f64],
    rng: &mut R,
) -> Result<(usize, usize), EvolutionError> {
    match fitness_column.len() {
        0 => Err(EvolutionError::TooFewCandidates { needed: 1, got: 0 }),
        1 => {
            shifted_weights(fitness_column)?;
            Ok((0, 0))
        }
        _ => Ok(Roulette::new(fitness_column)?.draw_pair(rng)),
    }
}

/// Picks two parent agents from the whole population.
pub fn select_parents_ga<R: Rng + ?Sized>(
    fitness: &[f64],
    rng: &mut R,
) -> Result<(usize, usize), EvolutionError> {
    if fitness.len() < 2 {
        return Err(EvolutionError::TooFewCandidates {
            needed: 2,
            got: fitness.len(),
        });
    }
    Ok(Roulette::new(fitness)?.draw_pair(rng))
}

pub fn crossover<R: Rng + ?Sized>(a: Genome, b: Genome, kind: Crossover, rng: &mut R) -> Genome {
    let mask = match kind {
        Crossover::Uniform => rng.random::<u16>() & GENOME_MASK,
        Crossover::OnePoint => {
            // Cut strictly inside the string: the top `cut` bits come from `a`.
            let cut = rng.random_range(1..GENOME_BITS);
            GENOME_MASK & !((1u16 << (GENOME_BITS - cut)) - 1)
        }
    };
    Genome::from_bits((a.bits() & mask) | (b.bits() & !mask))
}

pub fn mutate<R: Rng + ?Sized>(genome: Genome, rate: f64, rng: &mut R) -> Genome {
    let mut flips = 0u16;
    for bit in 0..GENOME_BITS {
        if rng.random_bool(rate) {
            flips |= 1 << bit;
        }
    }
    Genome::from_bits(genome.bits() ^ flips)
}

/// `W` copies of one network with their genomes and private RNG streams.
#[derive(Debug, Clone)]
pub struct Ensemble {
    graph: Arc<Graph>,
    profiles: Arc<[AgentProfile]>,
    worlds: Vec<Vec<Genome>>,
    world_rngs: Vec<ChaCha8Rng>,
}

impl Ensemble {
    pub fn new(
        graph: Arc<Graph>,
        profiles: Arc<[AgentProfile]>,
        worlds: Vec<Vec<Genome>>,
        world_rngs: Vec<ChaCha8Rng>,
    ) -> Result<Self, EvolutionError> {
        let n = graph.node_count();
        if profiles.len() != n {
            return Err(EvolutionError::Shape(format!(
                "{} profiles for {n} nodes",
                profiles.len()
            )));
        }
        if worlds.is_empty() || worlds.len() != world_rngs.len() {
            return Err(EvolutionError::Shape(format!(
                "{} worlds with {} RNG streams",
                worlds.len(),
                world_rngs.len()
            )));
        }
        if let Some(w) = worlds.iter().position(|g| g.len() != n) {
            return Err(EvolutionError::Shape(format!("world {w} does not cover {n} nodes")));
        }
        Ok(Ensemble {
            graph,
            profiles,
            worlds,
            world_rngs,
        })
    }

    /// Uniformly random initial genomes; all randomness derives from `seed`.
    pub fn random(
        graph: Arc<Graph>,
        profiles: Arc<[AgentProfile]>,
        world_count: usize,
        seed: u64,
    ) -> Result<Self, EvolutionError> {
        let n = graph.node_count();
        let mut init = seeded_stream(seed, Stream::InitialGenomes);
        let worlds = (0..world_count)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        Genome::from_levels(
                            init.random_range(0..LEVELS),
                            init.random_range(0..LEVELS),
                            init.random_range(0..LEVELS),
                        )
                    })
                    .collect()
            })
            .collect();
        let world_rngs = (0..world_count)
            .map(|w| seeded_stream(seed, Stream::World(w)))
            .collect();
        Ensemble::new(graph, profiles, worlds, world_rngs)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn profiles(&self) -> &[AgentProfile] {
        &self.profiles
    }

    pub fn worlds(&self) -> &[Vec<Genome>] {
        &self.worlds
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn agent_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Plays one generation in every world, concurrently when a rayon pool
    /// is available. Each world consumes only its own RNG stream.
    pub fn fitness_sweep(&mut self, game: &Game) -> Vec<GenerationOutcome> {
        let graph = &self.graph;
        let profiles = &self.profiles;
        self.worlds
            .par_iter()
            .zip(self.world_rngs.par_iter_mut())
            .map(|(genomes, rng)| {
                let strategies: Vec<Strategy> = genomes.iter().map(|g| g.strategy()).collect();
                run_generation(graph, &strategies, profiles, game, rng)
            })
            .collect()
    }
}

/// Strategy summary of one agent group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    /// Number of (world, agent) slots summarized.
    pub count: usize,
    pub mean_b: f64,
    pub std_b: f64,
    pub mean_l: f64,
    pub std_l: f64,
    pub mean_q: f64,
    pub std_q: f64,
    pub mean_utility: f64,
}

impl GroupStats {
    fn from_slots(slots: &[(Genome, f64)]) -> Self {
        let col = |f: fn(&Genome) -> f64| -> Vec<f64> { slots.iter().map(|(g, _)| f(g)).collect() };
        let (mean_b, std_b) = mean_std(&col(|g| g.posting_rate()));
        let (mean_l, std_l) = mean_std(&col(|g| g.comment_rate()));
        let (mean_q, std_q) = mean_std(&col(|g| g.quality()));
        let utilities: Vec<f64> = slots.iter().map(|(_, u)| *u).collect();
        GroupStats {
            count: slots.len(),
            mean_b,
            std_b,
            mean_l,
            std_l,
            mean_q,
            std_q,
            mean_utility: mean_std(&utilities).0,
        }
    }
}

/// Summary of the genomes evaluated in one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub alpha: GroupStats,
    pub beta: GroupStats,
    pub all: GroupStats,
    /// Articles posted per round in one world, averaged over worlds.
    pub posts_per_round: f64,
}

impl GenerationStats {
    pub fn compute(generation: usize, ensemble: &Ensemble, outcomes: &[GenerationOutcome]) -> Self {
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut all = Vec::new();
        for (genomes, outcome) in ensemble.worlds.iter().zip(outcomes) {
            for ((genome, &fitness), profile) in genomes.iter().zip(&outcome.fitness).zip(ensemble.profiles.iter()) {
                let slot = (*genome, fitness);
                match profile.group() {
                    Group::Alpha => alpha.push(slot),
                    Group::Beta => beta.push(slot),
                }
                all.push(slot);
            }
        }
        let total_posts: u64 = outcomes.iter().map(|o| o.state.total_posts()).sum();
        let posts_per_round =
            total_posts as f64 / (ROUNDS_PER_GENERATION * outcomes.len().max(1)) as f64;
        GenerationStats {
            generation,
            alpha: GroupStats::from_slots(&alpha),
            beta: GroupStats::from_slots(&beta),
            all: GroupStats::from_slots(&all),
            posts_per_round,
        }
    }
}

/// Drives an [`Ensemble`] through successive generations.
#[derive(Debug, Clone)]
pub struct Evolver {
    ensemble: Ensemble,
    params: EvolutionParams,
    game: Game,
    rng: ChaCha8Rng,
    generation: usize,
}

impl Evolver {
    /// `rng` drives selection, crossover and mutation only.
    pub fn new(
        ensemble: Ensemble,
        params: EvolutionParams,
        game: Game,
        rng: ChaCha8Rng,
    ) -> Result<Self, EvolutionError> {
        params.validate()?;
        if ensemble.world_count() != params.worlds {
            return Err(EvolutionError::Shape(format!(
                "ensemble has {} worlds, parameters ask for {}",
                ensemble.world_count(),
                params.worlds
            )));
        }
        if params.optimizer == Optimizer::Ga && ensemble.agent_count() < 2 {
            return Err(EvolutionError::TooFewCandidates {
                needed: 2,
                got: ensemble.agent_count(),
            });
        }
        Ok(Evolver {
            ensemble,
            params,
            game,
            rng,
            generation: 0,
        })
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    /// Plays a generation without breeding.
    pub fn evaluate(&mut self) -> Vec<GenerationOutcome> {
        self.ensemble.fitness_sweep(&self.game)
    }

    /// Evaluates the current genomes, then replaces every slot with a child
    /// bred from the old generation. Returns the evaluation outcomes together
    /// with stats of the genomes that were evaluated.
    pub fn step(&mut self) -> Result<(GenerationStats, Vec<GenerationOutcome>), EvolutionError> {
        let outcomes = self.ensemble.fitness_sweep(&self.game);
        let stats = GenerationStats::compute(self.generation, &self.ensemble, &outcomes);
        let next = self.breed(&outcomes)?;
        self.ensemble.worlds = next;
        self.generation += 1;
        Ok((stats, outcomes))
    }

    fn breed(&mut self, outcomes: &[GenerationOutcome]) -> Result<Vec<Vec<Genome>>, EvolutionError> {
        let old = &self.ensemble.worlds;
        let n = self.ensemble.agent_count();
        let world_count = old.len();
        let EvolutionParams {
            mutation_rate,
            crossover: kind,
            elitism,
            ..
        } = self.params;
        let rng = &mut self.rng;
        let mut next = vec![Vec::with_capacity(n); world_count];

        match self.params.optimizer {
            Optimizer::Ga => {
                let fitness = &outcomes[0].fitness;
                let wheel = Roulette::new(fitness)?;
                let elite = elitism.then(|| argmax(fitness));
                for slot in 0..n {
                    if elite == Some(slot) {
                        next[0].push(old[0][slot]);
                        continue;
                    }
                    let (a, b) = wheel.draw_pair(rng);
                    let child = crossover(old[0][a], old[0][b], kind, rng);
                    next[0].push(mutate(child, mutation_rate, rng));
                }
            }
            Optimizer::Mwga => {
                let mut wheels = Vec::with_capacity(n);
                let mut elites = Vec::with_capacity(n);
                for node in 0..n {
                    let column: Vec<f64> = outcomes.iter().map(|o| o.fitness[node]).collect();
                    wheels.push(Roulette::new(&column)?);
                    elites.push(elitism.then(|| argmax(&column)));
                }
                for (w, world) in next.iter_mut().enumerate() {
                    for node in 0..n {
                        if elites[node] == Some(w) {
                            world.push(old[w][node]);
                            continue;
                        }
                        let (a, b) = wheels[node].draw_pair(rng);
                        let child = crossover(old[a][node], old[b][node], kind, rng);
                        world.push(mutate(child, mutation_rate, rng));
                    }
                }
            }
        }
        Ok(next)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
