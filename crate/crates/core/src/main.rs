use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use aoi_sim::config::ConfigFile;
use aoi_sim::error::Error;
use aoi_sim::experiment::{run_grid, sweep_rows, ExperimentConfig, ExperimentSummary};
use aoi_sim::oracle::{compare_with_baselines, write_value_csv, MdpModel, COMPARISON_STATE_LIMIT};
use aoi_sim::output::{
    write_file, write_learning_curve, write_sweep, write_text, Manifest, LEARNING_CURVE_FILE,
    MANIFEST_FILE, SWEEP_FILE,
};
use aoi_sim::policies::PolicyKind;

const EXIT_CONFIG: u8 = 2;
const EXIT_ORACLE_REFUSED: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_MALFORMED: u8 = 5;
const EXIT_INTERNAL: u8 = 1;

const THREADS_ENV: &str = "AOI_SIM_THREADS";
const ORACLE_HORIZON: u64 = 1_000_000;

/// Simulate age-aware status-update control for energy-harvesting sensors.
#[derive(Debug, Parser)]
#[command(name = "aoi-sim", version)]
struct Args {
    /// JSON configuration file; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Policy to run (repeatable): q_learning, q_learning_genie, greedy,
    /// threshold, random.
    #[arg(long = "policy")]
    policies: Vec<PolicyKind>,

    /// β value (repeatable). Replaces the β grid; the first value is used for
    /// the learning curve.
    #[arg(long = "beta")]
    betas: Vec<f64>,

    /// Slots per episode.
    #[arg(long)]
    slots: Option<u64>,

    #[arg(long)]
    episodes: Option<u32>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Solve the full-knowledge MDP of each sensor and compare it with the
    /// baselines (small instances only).
    #[arg(long)]
    oracle: bool,

    #[arg(long)]
    quiet: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig { .. } => EXIT_CONFIG,
        Error::MalformedConfig(_) => EXIT_MALFORMED,
        Error::StateSpaceTooLarge { .. } => EXIT_ORACLE_REFUSED,
        Error::Io { .. } => EXIT_IO,
        Error::ContractViolation(_) => EXIT_INTERNAL,
    }
}

fn resolve(args: &Args) -> Result<ExperimentConfig, Error> {
    let mut file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if !args.policies.is_empty() {
        file.policies = args.policies.clone();
    }
    if !args.betas.is_empty() {
        file.cost.beta = args.betas[0];
        file.beta_grid = Some(args.betas.clone());
    }
    if let Some(slots) = args.slots {
        file.slots_per_episode = slots;
    }
    if let Some(episodes) = args.episodes {
        file.episodes = episodes;
    }
    if let Some(seed) = args.seed {
        file.master_seed = seed;
    }
    file.resolve()
}

fn run_oracle(cfg: &ExperimentConfig, args: &Args) -> Result<(), Error> {
    let mut reports = Vec::new();
    for setup in &cfg.sensors {
        let mdp = MdpModel::build_with_limit(
            &setup.config,
            &setup.harvest,
            &cfg.cost,
            cfg.schedule.discount,
            COMPARISON_STATE_LIMIT,
        )?;
        let (report, vf) = compare_with_baselines(&mdp, setup.id, ORACLE_HORIZON, cfg.master_seed)?;
        write_file(
            &args.out,
            &format!("oracle_sensor{}.csv", setup.id),
            |buf| write_value_csv(&mdp, &vf, buf),
        )?;
        if !args.quiet {
            eprintln!(
                "oracle sensor {}: {} states, {} sweeps, optimal {:.6}, threshold {:.6}, greedy {:.6}",
                report.sensor_id,
                report.states,
                report.iterations,
                report.optimal_avg_cost,
                report.threshold_avg_cost,
                report.greedy_avg_cost
            );
        }
        reports.push(report);
    }
    let json = serde_json::to_string_pretty(&reports).expect("report serializes") + "\n";
    write_text(&args.out, "oracle_summary.json", &json)?;
    Ok(())
}

fn run(args: &Args) -> Result<(), Error> {
    let cfg = resolve(args)?;
    let manifest = Manifest::new(&cfg);
    if !args.quiet {
        eprintln!(
            "resolved configuration:\n{}",
            serde_json::to_string_pretty(&manifest.config).unwrap()
        );
    }
    if args.oracle {
        run_oracle(&cfg, args)?;
    }

    let curve_beta = cfg.cost.beta;
    let mut betas = cfg.beta_grid.clone().unwrap_or_default();
    if !betas.contains(&curve_beta) {
        betas.insert(0, curve_beta);
    }
    let mut policies = cfg.policies.clone();
    if cfg.beta_grid.is_some() && !policies.contains(&PolicyKind::Random) {
        policies.push(PolicyKind::Random);
    }
    let summaries = run_grid(&cfg, &betas, &policies)?;

    let curve: Vec<&ExperimentSummary> = cfg
        .policies
        .iter()
        .map(|&p| {
            summaries
                .iter()
                .find(|s| s.beta == curve_beta && s.policy == p)
                .expect("curve β was simulated")
        })
        .collect();
    write_file(&args.out, LEARNING_CURVE_FILE, |buf| {
        write_learning_curve(&curve, buf)
    })?;

    let qtable_dir = args.out.join("qtables");
    for summary in &curve {
        for (setup, table) in cfg.sensors.iter().zip(&summary.q_tables) {
            if let Some(table) = table {
                write_file(
                    &qtable_dir,
                    &format!("{}_sensor{}.csv", summary.policy, setup.id),
                    |buf| table.write_csv(buf),
                )?;
            }
        }
    }

    if let Some(grid) = &cfg.beta_grid {
        let rows = sweep_rows(grid, &cfg.policies, &summaries);
        write_file(&args.out, SWEEP_FILE, |buf| write_sweep(&rows, buf))?;
    }
    write_text(&args.out, MANIFEST_FILE, &manifest.to_json())?;

    if !args.quiet {
        println!(
            "β = {curve_beta}, {} episode(s) of {} slots",
            cfg.episodes, cfg.slots_per_episode
        );
        for s in &curve {
            println!(
                "  {:<18} {:>12.6} ± {:.6}",
                s.policy.name(),
                s.final_cost.mean,
                s.final_cost.std
            );
        }
        println!("results written to {}", args.out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    match pool.install(|| run(&args)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("aoi-sim: {err}");
            if let Error::StateSpaceTooLarge { .. } = err {
                eprintln!(
                    "aoi-sim: the oracle is meant for tiny instances (at most {COMPARISON_STATE_LIMIT} states); \
                     try e.g. battery_capacity = 3 and aoi_cap = 8 in the config"
                );
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
