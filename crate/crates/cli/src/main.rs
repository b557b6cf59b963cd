use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use fps_hybrid::eval::{describe_hardware, power_total, PsAccounting};
use fps_hybrid::experiment::{run_experiment, write_outputs, ExperimentConfig};
use fps_hybrid::oracles::{certify_switch_solver, certify_tiny_altmin};
use fps_hybrid::pipeline::Method;

/// Fixed-phase-shifter hybrid precoding simulator.
#[derive(Parser)]
#[command(name = "fpsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep described by a TOML file.
    Run(RunArgs),
    /// Print component counts and analog-network power per structure.
    Hardware(HardwareArgs),
    /// Check the closed-form updates against brute-force enumeration.
    OracleCheck(OracleArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "FPSIM_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    prefix: Option<String>,
    /// Comma-separated subset of fully-digital, fps-altmin, random-switch.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Replace the sweep values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Option<Vec<f64>>,
    #[arg(long)]
    no_json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Accounting {
    Footnote,
    Physical,
}

#[derive(clap::Args)]
struct HardwareArgs {
    #[arg(long)]
    nt: u64,
    #[arg(long)]
    nrf: u64,
    #[arg(long)]
    nc: u64,
    #[arg(long, default_value_t = 1)]
    groups: u64,
    #[arg(long, value_enum, default_value = "footnote")]
    accounting: Accounting,
    /// Emit JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct OracleArgs {
    /// Random vectors per length.
    #[arg(long, default_value_t = 1000)]
    vectors: usize,
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    /// Tiny single-chain targets for the codebook guard.
    #[arg(long, default_value_t = 100)]
    targets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(n) = args.realizations {
        cfg.n_realizations = n;
    }
    if let Some(s) = args.base_seed {
        cfg.channel.base_seed = s;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(d) = args.out_dir {
        cfg.output.dir = d;
    }
    if let Some(p) = args.prefix {
        cfg.output.prefix = p;
    }
    if let Some(ms) = args.methods {
        cfg.methods = ms.iter().map(|m| m.parse::<Method>()).collect::<Result<_, _>>()?;
    }
    if let Some(v) = args.values {
        cfg.sweep.values = v;
    }
    if args.no_json {
        cfg.output.json = false;
    }
    let res = run_experiment(&cfg)?;
    for p in write_outputs(&res)? {
        eprintln!("wrote {}", p.display());
    }
    println!("{:>12} {:>14} {:>6} {:>6} {:>10} {:>10}", res.config.sweep.axis, "method", "ok", "failed", "mean_se", "stderr");
    for s in &res.summary {
        println!(
            "{:>12} {:>14} {:>6} {:>6} {:>10} {:>10}",
            s.sweep_value,
            s.method,
            s.n_ok,
            s.n_failed,
            s.mean_se.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into()),
            s.stderr_se.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into()),
        );
    }
    let failed = res.n_failed();
    if failed > 0 {
        eprintln!("{failed} row(s) failed; see the error column of the detail CSV");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn hardware(args: HardwareArgs) -> Result<ExitCode> {
    let accounting = match args.accounting {
        Accounting::Footnote => PsAccounting::Footnote,
        Accounting::Physical => PsAccounting::Physical,
    };
    let rows = describe_hardware(args.nt, args.nrf, args.nc, args.groups, accounting);
    if args.json {
        let out: Vec<_> = rows
            .iter()
            .map(|r| serde_json::json!({ "profile": r, "power_total_w": power_total(r).watts(), "power_total": power_total(r).to_string() }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(ExitCode::SUCCESS);
    }
    println!("{:<34} {:>8} {:>8} {:>8} {:>10}  note", "structure", "N_PS", "powered", "N_OC", "P_total");
    for r in &rows {
        println!(
            "{:<34} {:>8} {:>8} {:>8} {:>10}  {}",
            r.structure.to_string(),
            r.n_ps,
            r.n_ps_powered,
            r.n_oc,
            power_total(r).to_string(),
            r.note.as_deref().unwrap_or("")
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(args: OracleArgs) -> Result<ExitCode> {
    let sw = certify_switch_solver(args.max_n, args.vectors, args.seed, 1e-9)?;
    let sw_ok = sw.failures == 0;
    println!(
        "[{}] switch/gain solver vs subset enumeration: {} vectors, worst gap {:.3e}",
        if sw_ok { "PASS" } else { "FAIL" },
        sw.vectors,
        sw.worst_gap
    );
    let tiny = certify_tiny_altmin(args.targets, args.seed)?;
    let tiny_ok = tiny.mean_ratio <= 1.25 && tiny.bound_violations == 0;
    println!(
        "[{}] altmin vs codebook lower bound: {} targets, mean ratio {:.4}, max ratio {:.4}, bound violations {}",
        if tiny_ok { "PASS" } else { "FAIL" },
        tiny.targets,
        tiny.mean_ratio,
        tiny.max_ratio,
        tiny.bound_violations
    );
    println!("       refit-gain diagnostic: mean ratio {:.4}", tiny.refit_mean_ratio);
    Ok(if sw_ok && tiny_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Run(a) => run(a),
        Command::Hardware(a) => hardware(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
