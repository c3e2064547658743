//! Command-line harness: instance generation, follower evaluation, leader
//! solving, edge-list ingestion, and LP export.
//!
//! Exit codes: 0 on success, 2 when a size guard refuses an exact method,
//! 1 on any other error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use impd::bench::{
    resolve_out_dir, run_eval_follower, run_generate, run_ingest, run_solve, write_atomic,
    RunConfig, SolverChoice, TimingMode,
};
use impd::diffusion::{LhsSampler, NodeSet, ThresholdSampler};
use impd::instance::{load_instance, random_feasible_seed, BudgetRule, CostMode, InstanceSpec};
use impd::lp::{allp_lp_string, DEFAULT_LP_EPSILON};
use impd::rng::substream;
use impd::saa::SaaParams;
use impd::search::{SamParams, TsmParams};
use impd::ImpdError;

#[derive(Parser)]
#[command(name = "impd", about = "Influence maximization with seed deactivation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Global RNG seed; every stream in the run derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (overridden by IMPD_OUT_DIR).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Time columns: wall-clock readings or zeros for byte-stable output.
    #[arg(long, default_value = "wall")]
    timing: String,
}

#[derive(Args, Clone)]
struct SaaOpts {
    /// Stage-1 sample size N per batch.
    #[arg(long, default_value_t = 50)]
    batch_size: usize,
    /// Stage-1 batch count M.
    #[arg(long, default_value_t = 20)]
    batch_count: usize,
    /// Stage-2 screening sample size N'.
    #[arg(long, default_value_t = 2000)]
    select_size: usize,
    /// Stage-3 evaluation sample size N''.
    #[arg(long, default_value_t = 10000)]
    final_size: usize,
}

impl SaaOpts {
    fn to_params(&self) -> SaaParams {
        SaaParams {
            batch_size: self.batch_size,
            batch_count: self.batch_count,
            select_size: self.select_size,
            final_size: self.final_size,
            rng_seed: 0,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize small-world instances and write them as instance files.
    Generate {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of nodes per instance.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Target arc density m / (n (n - 1)).
        #[arg(long, default_value_t = 0.105)]
        density: f64,
        /// Cost mode: cardinality or cost.
        #[arg(long, default_value = "cardinality")]
        mode: String,
        /// How many instances (seeds seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Explicit leader budget C; omit to derive budgets from the
        /// 10-percent rule.
        #[arg(long)]
        leader_budget: Option<f64>,
        /// Explicit follower budget E (requires --leader-budget).
        #[arg(long)]
        follower_budget: Option<f64>,
        /// Rewiring probability of the small-world generator.
        #[arg(long, default_value_t = 0.1)]
        rewire: f64,
    },
    /// Estimate the follower's optimal response for fixed random seed sets.
    EvalFollower {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        saa: SaaOpts,
        /// Instance files to evaluate.
        #[arg(long, required = true, num_args = 1..)]
        instance: Vec<PathBuf>,
        /// Follower budgets to evaluate per instance; default is each
        /// instance's own budget.
        #[arg(long, num_args = 0..)]
        follower_budget: Vec<f64>,
    },
    /// Run complete enumeration and/or the matheuristics on instances.
    Solve {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        saa: SaaOpts,
        /// Instance files to solve.
        #[arg(long, required = true, num_args = 1..)]
        instance: Vec<PathBuf>,
        /// enum, sam, tsm, or both.
        #[arg(long, default_value = "both")]
        solver: String,
        /// Independent replications per matheuristic.
        #[arg(long, default_value_t = 3)]
        replications: u64,
        /// Matheuristic time limit in seconds.
        #[arg(long, default_value_t = 60.0)]
        t_max: f64,
        /// Checkpoint interval in seconds for trace and delta reporting.
        #[arg(long, default_value_t = 60.0)]
        checkpoint: f64,
        /// Annealing initial acceptance probability p0.
        #[arg(long, default_value_t = 0.8)]
        p0: f64,
        /// Annealing geometric cooling ratio r.
        #[arg(long, default_value_t = 0.9)]
        cooling: f64,
        /// Annealing cycle growth gamma.
        #[arg(long, default_value_t = 0.2)]
        growth: f64,
        /// Annealing acceptance threshold phi for halving the temperature.
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
        /// Tabu candidate-list fraction tau.
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        /// Tabu frequency-penalty weight mu.
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Realizations used to score nodes for initial solutions.
        #[arg(long, default_value_t = 200)]
        score_sample: usize,
    },
    /// Convert an edge list into an instance file, optionally restricted to
    /// the densest subgraph.
    Ingest {
        #[command(flatten)]
        common: CommonOpts,
        /// Edge-list file: "tail head [weight]" per line.
        #[arg(long)]
        edges: PathBuf,
        /// Keep only this many top-out-degree nodes.
        #[arg(long)]
        n_sub: Option<usize>,
        /// Cost mode: cardinality or cost.
        #[arg(long, default_value = "cardinality")]
        mode: String,
        #[arg(long)]
        leader_budget: Option<f64>,
        #[arg(long)]
        follower_budget: Option<f64>,
    },
    /// Export the sampled follower model of one instance in LP format.
    ExportLp {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated seed node ids; default is a random seed set of
        /// 15 percent of the nodes.
        #[arg(long)]
        seeds: Option<String>,
        /// Threshold realizations in the model.
        #[arg(long, default_value_t = 50)]
        realizations: usize,
        /// Strict-inequality epsilon of the threshold rows.
        #[arg(long, default_value_t = DEFAULT_LP_EPSILON)]
        epsilon: f64,
        /// Output file; default <instance stem>.lp in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn budget_rule(leader: Option<f64>, follower: Option<f64>) -> Result<BudgetRule, ImpdError> {
    match (leader, follower) {
        (Some(leader), Some(follower)) => Ok(BudgetRule::Explicit { leader, follower }),
        (None, None) => Ok(BudgetRule::LeaderFraction),
        _ => Err(ImpdError::InvalidArgument(
            "--leader-budget and --follower-budget must be given together".into(),
        )),
    }
}

fn base_config(common: &CommonOpts) -> Result<RunConfig, ImpdError> {
    let mut cfg = RunConfig::new(resolve_out_dir(common.out_dir.clone()), common.seed);
    cfg.timing = TimingMode::parse(&common.timing)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), ImpdError> {
    match cli.command {
        Command::Generate {
            common,
            n,
            density,
            mode,
            count,
            leader_budget,
            follower_budget,
            rewire,
        } => {
            let cfg = base_config(&common)?;
            let mode = CostMode::parse(&mode)?;
            let rule = budget_rule(leader_budget, follower_budget)?;
            let specs: Vec<InstanceSpec> = (0..count)
                .map(|i| {
                    let mut spec = InstanceSpec::new(n, density, mode).with_seed(common.seed + i);
                    spec.budget_rule = rule;
                    spec.rewire_prob = rewire;
                    spec
                })
                .collect();
            let paths = run_generate(&specs, &cfg.out_dir)?;
            for p in paths {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::EvalFollower {
            common,
            saa,
            instance,
            follower_budget,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.instances = instance;
            cfg.saa = saa.to_params();
            cfg.follower_budgets = follower_budget;
            let path = run_eval_follower(&cfg)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Solve {
            common,
            saa,
            instance,
            solver,
            replications,
            t_max,
            checkpoint,
            p0,
            cooling,
            growth,
            phi,
            tau,
            mu,
            score_sample,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.instances = instance;
            cfg.saa = saa.to_params();
            cfg.solver = SolverChoice::parse(&solver)?;
            cfg.replications = replications;
            cfg.checkpoint_secs = checkpoint;
            let time_limit = Duration::from_secs_f64(t_max);
            cfg.sam = SamParams {
                initial_acceptance: p0,
                cooling_ratio: cooling,
                cycle_growth: growth,
                accept_threshold: phi,
                time_limit,
                score_sample_size: score_sample,
            };
            cfg.tsm = TsmParams {
                candidate_fraction: tau,
                frequency_penalty: mu,
                time_limit,
                score_sample_size: score_sample,
            };
            let artifacts = run_solve(&cfg)?;
            println!("{}", artifacts.solve_csv.display());
            println!("{}", artifacts.checkpoint_csv.display());
            if let Some(d) = artifacts.delta_csv {
                println!("{}", d.display());
            }
            Ok(())
        }
        Command::Ingest {
            common,
            edges,
            n_sub,
            mode,
            leader_budget,
            follower_budget,
        } => {
            let cfg = base_config(&common)?;
            let mode = CostMode::parse(&mode)?;
            let rule = budget_rule(leader_budget, follower_budget)?;
            let report = run_ingest(
                &edges,
                n_sub,
                mode,
                rule,
                &[10.0, 15.0, 20.0],
                common.seed,
                &cfg.out_dir,
            )?;
            println!(
                "nodes {} arcs {} avg_out_degree {:.2}",
                report.node_count, report.arc_count, report.avg_out_degree
            );
            if report.matching_like {
                eprintln!(
                    "warning: every node has in- and out-degree at most 1; \
                     the leader optimum is trivially 2(C - E) in cardinality mode"
                );
            }
            println!("{}", report.instance_path.display());
            Ok(())
        }
        Command::ExportLp {
            common,
            instance,
            seeds,
            realizations,
            epsilon,
            out,
        } => {
            let cfg = base_config(&common)?;
            let inst = load_instance(&instance)?;
            let x = match seeds {
                Some(list) => {
                    let ids = list
                        .split(',')
                        .filter(|t| !t.is_empty())
                        .map(|t| {
                            t.trim().parse::<u32>().map_err(|_| {
                                ImpdError::InvalidArgument(format!("bad seed node id {t:?}"))
                            })
                        })
                        .collect::<Result<Vec<u32>, _>>()?;
                    NodeSet::new(ids)
                }
                None => {
                    let k = ((0.15 * inst.node_count() as f64).floor() as usize).max(1);
                    let mut rng = substream(common.seed, "eval-seed", 0);
                    random_feasible_seed(&inst, k, &mut rng)?
                }
            };
            let mut rng = substream(common.seed, "sampler", 0);
            let sample = LhsSampler.sample(inst.node_count(), realizations, &mut rng);
            let text = allp_lp_string(&inst, &x, &sample, epsilon);
            let path = out.unwrap_or_else(|| {
                let stem = instance
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "model".into());
                cfg.out_dir.join(format!("{stem}.lp"))
            });
            write_atomic(&path, &text)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ ImpdError::Guard(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
