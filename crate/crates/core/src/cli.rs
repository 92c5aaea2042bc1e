//! Command-line front end.
//!
//! Exit codes: 0 success, 1 analysis found an inconsistent run directory,
//! 2 usage error, 3 config validation error, 4 I/O error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::evolution::Optimizer;
use crate::experiment::{
    analyze_run, analyze_sweep, output, run_experiment, run_sweep, ConfigError, ConfigLayer,
    ExperimentConfig, ExperimentError, RunAnalysis, SWEEP_CSV,
};
use crate::network::generate_cnn;
use crate::rng::seeded;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "snsng", version, about = "SNS-norms game with monetary reward: GA and multiple-world GA experiments")]
struct Cli {
    /// Cap on concurrent worlds/cells; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a CNN network and write its edge list to <out>/network.txt.
    GenNet(ConfigArgs),
    /// Run one experiment.
    Run(ConfigArgs),
    /// Run a paired sweep over monetary reward values.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated, strictly increasing π values.
        #[arg(long, value_delimiter = ',', required = true)]
        pi_values: Vec<f64>,
        /// Simulation seeds per π value.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
    },
    /// Recompute summaries from run or sweep output directories.
    Analyze {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

/// Config sources plus one flag per config key.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Config file in `key = value` format.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, alias = "output_dir")]
    out: Option<String>,
    /// Network seed.
    #[arg(long = "seed-graph", alias = "seed_graph", allow_negative_numbers = true)]
    seed_graph: Option<String>,
    /// Monetary-preference seed.
    #[arg(long = "seed-profiles", alias = "seed_profiles", allow_negative_numbers = true)]
    seed_profiles: Option<String>,
    /// Simulation seed (initial genomes, evolution, game rounds).
    #[arg(long = "seed-sim", alias = "seed_sim", allow_negative_numbers = true)]
    seed_sim: Option<String>,
    /// Agent count (even).
    #[arg(long, allow_negative_numbers = true)]
    n: Option<String>,
    /// CNN conversion probability.
    #[arg(long, allow_negative_numbers = true)]
    u: Option<String>,
    /// Cost unit.
    #[arg(long = "c_ref", alias = "c-ref", allow_negative_numbers = true)]
    c_ref: Option<String>,
    /// Reward/cost ratio.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<String>,
    /// Stage cost ratio.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<String>,
    /// Monetary reward per post.
    #[arg(long, allow_negative_numbers = true)]
    pi: Option<String>,
    /// Monetary reward strategy.
    #[arg(long, allow_negative_numbers = true)]
    mr: Option<String>,
    /// World count (GA requires 1).
    #[arg(long = "W", alias = "worlds", allow_negative_numbers = true)]
    worlds: Option<String>,
    /// Generations to evolve.
    #[arg(long, allow_negative_numbers = true)]
    generations: Option<String>,
    /// Per-bit mutation probability.
    #[arg(long = "mutation_rate", alias = "mutation-rate", allow_negative_numbers = true)]
    mutation_rate: Option<String>,
    /// GA or MWGA.
    #[arg(long, allow_negative_numbers = true)]
    optimizer: Option<String>,
    /// Selection operator.
    #[arg(long, allow_negative_numbers = true)]
    selection: Option<String>,
    /// uniform or one-point.
    #[arg(long, allow_negative_numbers = true)]
    crossover: Option<String>,
    /// Keep the best genome unchanged.
    #[arg(long, allow_negative_numbers = true)]
    elitism: Option<String>,
    /// reader or author.
    #[arg(long = "read_reward_recipient", alias = "read-reward-recipient", allow_negative_numbers = true)]
    read_reward_recipient: Option<String>,
    /// Time-series stride in generations.
    #[arg(long = "snapshot_every", alias = "snapshot-every", allow_negative_numbers = true)]
    snapshot_every: Option<String>,
    /// Write an event log of world 0.
    #[arg(long, allow_negative_numbers = true)]
    trace: Option<String>,
}

impl ConfigArgs {
    fn flag_layer(&self) -> ConfigLayer {
        let mut layer = ConfigLayer::new();
        let pairs: [(&str, &Option<String>); 21] = [
            ("output_dir", &self.out),
            ("seed_graph", &self.seed_graph),
            ("seed_profiles", &self.seed_profiles),
            ("seed_sim", &self.seed_sim),
            ("n", &self.n),
            ("u", &self.u),
            ("c_ref", &self.c_ref),
            ("mu", &self.mu),
            ("delta", &self.delta),
            ("pi", &self.pi),
            ("mr", &self.mr),
            ("W", &self.worlds),
            ("generations", &self.generations),
            ("mutation_rate", &self.mutation_rate),
            ("optimizer", &self.optimizer),
            ("selection", &self.selection),
            ("crossover", &self.crossover),
            ("elitism", &self.elitism),
            ("read_reward_recipient", &self.read_reward_recipient),
            ("snapshot_every", &self.snapshot_every),
            ("trace", &self.trace),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                layer.set(key, v.as_str());
            }
        }
        layer
    }

    /// File values override defaults; flags override file values.
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut layers = Vec::new();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            layers.push(ConfigLayer::parse(&text).map_err(|e| config_failure(&e, Some(path)))?);
        }
        layers.push(self.flag_layer());
        ExperimentConfig::resolve(&layers).map_err(|e| config_failure(&e, None))
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn config_failure(e: &ConfigError, path: Option<&Path>) -> Failure {
    let message = match path {
        Some(p) => format!("{}: {e}", p.display()),
        None => e.to_string(),
    };
    Failure::new(EXIT_CONFIG, message)
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = match &e {
            ExperimentError::Io { .. } | ExperimentError::Csv { .. } | ExperimentError::Json { .. } => EXIT_IO,
            ExperimentError::Analysis { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Failure::new(code, e.to_string())
    }
}

fn print_seeds(config: &ExperimentConfig) {
    eprintln!(
        "seeds: graph={} profiles={} sim={}",
        config.seed_graph, config.seed_profiles, config.seed_sim
    );
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(threads);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_IO;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::GenNet(args) => {
            let config = args.resolve()?;
            print_seeds(&config);
            let graph = generate_cnn(config.n, config.u, &mut seeded(config.seed_graph))
                .map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
            let dir = &config.output_dir;
            fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", dir.display())))?;
            let path = dir.join(output::NETWORK);
            let file = File::create(&path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            graph
                .write_edge_list(BufWriter::new(file), config.u, config.seed_graph)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            println!(
                "{graph} max_degree={} clustering={:.4} -> {}",
                graph.max_degree(),
                graph.clustering_coefficient(),
                path.display()
            );
            Ok(EXIT_OK)
        }
        Command::Run(args) => {
            let config = args.resolve()?;
            print_seeds(&config);
            let outcome = run_experiment(&config)?;
            let s = &outcome.summary;
            println!(
                "{} n={} W={} generations={} pi={}: mean_Q={:.4} std_Q={:.4} mean_B={:.4} mean_L={:.4} posts_per_round={:.2} spearman_degree_Q={:.4} -> {}",
                config.optimizer,
                config.n,
                config.worlds,
                config.generations,
                config.pi,
                s.all.mean_q,
                s.all.std_q,
                s.all.mean_b,
                s.all.mean_l,
                outcome.final_posts_per_round,
                s.spearman_degree_q,
                config.output_dir.display()
            );
            Ok(EXIT_OK)
        }
        Command::Sweep {
            config,
            pi_values,
            seeds,
        } => {
            let config = config.resolve()?;
            if seeds == 0 {
                return Err(Failure::new(EXIT_USAGE, "--seeds must be at least 1"));
            }
            print_seeds(&config);
            let result = run_sweep(&config, &pi_values, seeds)?;
            println!("pi,seeds,median_mean_Q,median_posts_per_round,mean_spearman_degree_Q");
            for a in &result.per_pi {
                println!(
                    "{},{},{:.4},{:.3},{:.4}",
                    a.pi, a.seeds, a.median_mean_q, a.median_posts_per_round, a.mean_spearman_degree_q
                );
            }
            Ok(EXIT_OK)
        }
        Command::Analyze { dirs } => analyze(&dirs),
    }
}

fn analyze(dirs: &[PathBuf]) -> Result<i32, Failure> {
    let mut runs: Vec<RunAnalysis> = Vec::new();
    let mut code = EXIT_OK;
    for dir in dirs {
        if dir.join(SWEEP_CSV).is_file() {
            println!("{}: sweep", dir.display());
            println!("  pi,cells,median_mean_Q,median_posts_per_round,median_spearman_degree_Q");
            for m in analyze_sweep(dir)? {
                println!(
                    "  {},{},{:.4},{:.3},{:.4}",
                    m.pi, m.cells, m.mean_q, m.posts_per_round, m.spearman_degree_q
                );
            }
            continue;
        }
        let manifest = output::read_manifest(dir)?;
        print_seeds(&manifest.config);
        let a = analyze_run(dir)?;
        let s = &a.summary;
        println!("{}: {} W={}", dir.display(), a.optimizer, s.worlds);
        for (name, g) in [("alpha", &s.alpha), ("beta", &s.beta), ("all", &s.all)] {
            println!(
                "  {name:<5} agents={:<4} B={:.4}±{:.4} L={:.4}±{:.4} Q={:.4}±{:.4}",
                g.agents, g.mean_b, g.std_b, g.mean_l, g.std_l, g.mean_q, g.std_q
            );
        }
        println!("  spearman_degree_Q={:.4}", s.spearman_degree_q);
        if a.consistent() {
            println!("  manifest summary: match");
        } else {
            println!("  manifest summary: MISMATCH");
            code = EXIT_INCONSISTENT;
        }
        runs.push(a);
    }
    let dispersion = |opt: Optimizer| -> Vec<f64> {
        runs.iter()
            .filter(|r| r.optimizer == opt)
            .map(|r| r.summary.all.std_q)
            .collect()
    };
    let (ga, mwga) = (dispersion(Optimizer::Ga), dispersion(Optimizer::Mwga));
    if !ga.is_empty() && !mwga.is_empty() {
        let ga_med = crate::stats::median(&ga);
        let mwga_med = crate::stats::median(&mwga);
        println!(
            "dispersion of Q across agents: GA median {ga_med:.4} ({} runs), MWGA median {mwga_med:.4} ({} runs), MWGA/GA = {:.3}",
            ga.len(),
            mwga.len(),
            mwga_med / ga_med
        );
    }
    Ok(code)
}
