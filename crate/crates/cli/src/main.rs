use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vlmc_cli::bench::{estimate_once, sampler_config};
use vlmc_cli::{
    export_ordinate_histograms, run_benchmark, run_diagnostics, CliResult, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "vmc", version, about = "Evidence estimation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One estimate per method.
    Run(Common),
    /// Repeated estimates and an RMSE table.
    Bench(Common),
    /// Histograms of draws and of ln Z across repetitions.
    Hist(Common),
    /// Distributional checks of the samplers.
    Diag(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Base seed; repetition r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_path(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        Ok(cfg)
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Run(c) => {
            let cfg = c.load()?;
            let (problem, methods) = cfg.prepare()?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let truth = problem.true_log_evidence().ok();
            for (i, m) in methods.iter().enumerate() {
                let sampler = sampler_config(&cfg, 0).with_trace();
                let (est, trace) = estimate_once(problem.as_ref(), m, &sampler)?;
                std::fs::write(cfg.out_dir.join(format!("trace_{i}.csv")), trace.to_csv())?;
                let err = truth
                    .map(|t| format!(", error {:+.4}", est.log_z - t))
                    .unwrap_or_default();
                println!(
                    "{}: ln Z = {:.6} ± {:.4}{err} ({} likelihood evaluations)",
                    m.label, est.log_z, est.std_err_log, est.likelihood_evals
                );
            }
        }
        Command::Bench(c) => {
            let cfg = c.load()?;
            let table = run_benchmark(&cfg)?;
            table.write(&cfg.out_dir)?;
            print!("{}", table.to_text());
        }
        Command::Hist(c) => {
            let cfg = c.load()?;
            for p in export_ordinate_histograms(&cfg, &cfg.out_dir)? {
                println!("{}", p.display());
            }
        }
        Command::Diag(c) => {
            let cfg = c.load()?;
            let report = run_diagnostics(&cfg)?;
            report.write(&cfg.out_dir)?;
            print!("{}", report.to_text());
            if !report.all_passed() {
                log::warn!("some diagnostics failed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
