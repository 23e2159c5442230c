use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::info;

use hypart::harness::generator::{generate_netlist, NetlistSpec};
use hypart::harness::{
    brute_force_optimum, cross_instance_series, merge_events, normalize_series,
    performance_ratios, read_events_csv, read_results_csv, run, write_convergence_csv,
    write_events_csv, write_ratios_csv, ImprovementEvent, Mode, RunConfig,
};
use hypart::io::{read_hgr, read_partition, write_hgr, write_partition};
use hypart::metrics::{connectivity_metric, cut_metric, lmax};
use hypart::Error;

#[derive(Parser)]
#[command(name = "hypart", version, about = "Memetic multilevel k-way hypergraph partitioner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition an hMetis hypergraph under a time budget.
    Partition(PartitionArgs),
    /// Build convergence or performance-ratio tables.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Recompute objective and balance of a partition file.
    Verify(VerifyArgs),
    /// Exhaustively find an optimal partition of a tiny hypergraph.
    Oracle(OracleArgs),
    /// Write a synthetic netlist-like hypergraph.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    hgr: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.03)]
    epsilon: f64,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "evo-c-er")]
    mode: Mode,
    #[arg(long, default_value_t = 0.5)]
    mutation_chance: f64,
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Partition file, one block id per line.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Improvement events as `time_s,seed,lambda_minus_one`.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Analyze {
    /// Geometric-mean convergence over instances; one events file and one
    /// `t_I` per instance.
    Convergence {
        #[arg(long, num_args = 1.., required = true)]
        events: Vec<PathBuf>,
        #[arg(long = "t-i", num_args = 1.., required = true)]
        t_i: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Performance ratios from `instance,algorithm,value` rows.
    Ratios {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    hgr: PathBuf,
    #[arg(long)]
    partition: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.03)]
    epsilon: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    hgr: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0.03)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    vertices: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Internal(_) => 1,
        Error::Infeasible(_) => 2,
        Error::Parse { .. } | Error::Io(_) | Error::Csv(_) => 3,
    }
}

fn output(path: Option<&Path>) -> hypart::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn partition(args: PartitionArgs) -> hypart::Result<()> {
    if !(args.time_limit > 0.0) || !args.time_limit.is_finite() {
        return Err(Error::Usage("--time-limit must be positive".into()));
    }
    let mut h = read_hgr(&args.hgr)?;
    let mut cfg = RunConfig::new(
        args.mode,
        args.k,
        args.epsilon,
        Duration::from_secs_f64(args.time_limit),
        args.seed,
    );
    cfg.mutation_chance = args.mutation_chance;
    cfg.delta = args.delta;
    cfg.gamma = args.gamma;
    cfg.evo_config().validate()?;
    info!(
        "{}: {} vertices, {} nets, k = {}, mode {}",
        args.hgr.display(),
        h.num_vertices(),
        h.num_nets(),
        args.k,
        args.mode
    );
    let outcome = run(&mut h, &cfg)?;
    if let Some(path) = &args.events {
        write_events_csv(BufWriter::new(File::create(path)?), &outcome.events)?;
    }
    if let Some(path) = &args.out {
        std::fs::write(path, write_partition(outcome.partition.blocks()))?;
    }
    let p = &outcome.partition;
    println!("lambda_minus_one={}", p.objective());
    println!("cut={}", cut_metric(&h, p)?);
    println!("max_block_weight={}", p.max_block_weight());
    println!("lmax={}", lmax(h.total_weight(), args.k, args.epsilon)?);
    println!("iterations={}", outcome.iterations);
    if let Some(first) = outcome.events.first() {
        println!("first_event_s={}", first.time);
    }
    Ok(())
}

fn analyze(cmd: Analyze) -> hypart::Result<()> {
    match cmd {
        Analyze::Convergence { events, t_i, out } => {
            if events.len() != t_i.len() {
                return Err(Error::Usage(format!(
                    "{} events files but {} t_I values",
                    events.len(),
                    t_i.len()
                )));
            }
            let mut instances = Vec::with_capacity(events.len());
            for (path, &t) in events.iter().zip(&t_i) {
                let all = read_events_csv(File::open(path)?)?;
                let mut seeds: Vec<u64> = all.iter().map(|e| e.seed).collect();
                seeds.sort_unstable();
                seeds.dedup();
                let runs: Vec<Vec<ImprovementEvent>> = seeds
                    .iter()
                    .map(|&s| all.iter().filter(|e| e.seed == s).copied().collect())
                    .collect();
                let series = normalize_series(&merge_events(&runs)?, t)?;
                instances.push((path.display().to_string(), series));
            }
            let series = cross_instance_series(&instances)?;
            write_convergence_csv(output(out.as_deref())?, &series)
        }
        Analyze::Ratios { results, out } => {
            let table = read_results_csv(File::open(results)?)?;
            write_ratios_csv(output(out.as_deref())?, &performance_ratios(&table)?)
        }
    }
}

fn verify(args: VerifyArgs) -> hypart::Result<()> {
    let h = read_hgr(&args.hgr)?;
    let p = read_partition(&std::fs::read_to_string(&args.partition)?, &h, args.k)?;
    let bound = lmax(h.total_weight(), args.k, args.epsilon)?;
    println!("lambda_minus_one={}", connectivity_metric(&h, &p)?);
    println!("cut={}", cut_metric(&h, &p)?);
    println!("max_block_weight={}", p.max_block_weight());
    println!("lmax={bound}");
    let balanced = p.max_block_weight() <= bound;
    println!("balanced={balanced}");
    if !balanced {
        return Err(Error::Infeasible(format!(
            "heaviest block {} exceeds L_max = {bound}",
            p.max_block_weight()
        )));
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> hypart::Result<()> {
    let h = read_hgr(&args.hgr)?;
    let (value, blocks) = brute_force_optimum(&h, args.k, args.epsilon)?;
    if let Some(path) = &args.out {
        std::fs::write(path, write_partition(&blocks))?;
    }
    println!("lambda_minus_one={value}");
    Ok(())
}

fn generate(args: GenerateArgs) -> hypart::Result<()> {
    let h = generate_netlist(&NetlistSpec::new(args.vertices), args.seed)?;
    std::fs::write(&args.out, write_hgr(&h))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Partition(a) => partition(a),
        Command::Analyze(a) => analyze(a),
        Command::Verify(a) => verify(a),
        Command::Oracle(a) => oracle(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hypart: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
