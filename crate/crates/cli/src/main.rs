use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rankdiv::{Error, Result};
use rankdiv_cli::experiments::*;
use rankdiv_cli::output::{header, write_table};
use rankdiv_cli::{ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "rankdiv", version = env!("RANKDIV_VERSION"), about = "Rank-statistic f-divergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Univariate estimate/reference ratios over seeds.
    Bench1d(Common),
    /// Dimension-scaled sliced ratios over seeds.
    BenchSliced(Common),
    /// Axis-corrected KL on the truncated-Gaussian boxes against sample size.
    KlVsN(Common),
    /// Exact gap `D − D^(K)` over an order grid with its fitted slope.
    Rates(Common),
    /// Finite-sample mean bound and concentration coverage.
    Bounds(Common),
    /// Particle transport to a 2D toy target; writes snapshots and the trace.
    Transport(Common),
    /// One-shot estimate between two CSV sample files.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Samples of μ: one row per sample, one column per coordinate.
        #[arg(long)]
        mu: PathBuf,
        /// Samples of ν, same layout.
        #[arg(long)]
        nu: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML file of configuration keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set orders=[32,512]`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file (directory for transport; `-` for standard output).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
}

fn quoted(p: &std::path::Path) -> String {
    toml::Value::String(p.display().to_string()).to_string()
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut v = self.set.clone();
        if let Some(o) = &self.output {
            v.push(format!("output={}", quoted(o)));
        }
        if let Some(s) = self.seeds {
            v.push(format!("seeds={s}"));
        }
        if let Some(s) = self.base_seed {
            v.push(format!("base_seed={s}"));
        }
        v
    }
}

fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<String> {
    let out = &cfg.output;
    let head = header(cfg);
    let written = |rows: usize| format!("wrote {rows} rows to {}", out.display());
    Ok(match kind {
        ExperimentKind::Bench1d => {
            let rows = run_bench1d(cfg)?;
            write_table(out, &head, &rows)?;
            written(rows.len())
        }
        ExperimentKind::BenchSliced => {
            let rows = run_bench_sliced(cfg)?;
            write_table(out, &head, &rows)?;
            written(rows.len())
        }
        ExperimentKind::KlVsN => {
            let rows = run_kl_vs_n(cfg)?;
            write_table(out, &head, &rows)?;
            written(rows.len())
        }
        ExperimentKind::Rates => {
            let rows = run_rates(cfg)?;
            write_table(out, &head, &rows)?;
            written(rows.len())
        }
        ExperimentKind::Bounds => {
            let rows = run_bounds(cfg)?;
            write_table(out, &head, &rows)?;
            written(rows.len())
        }
        ExperimentKind::Transport => {
            let states = run_transport_experiment(cfg)?;
            let files = write_transport(cfg, &states)?;
            let trace = &states.last().expect("at least the initial state").trace;
            let (first, last) = (trace[0].energy, trace[trace.len() - 1].energy);
            format!(
                "wrote {} files to {}; energy {first:.4e} -> {last:.4e} (ratio {:.4})",
                files.len(),
                out.display(),
                last / first
            )
        }
        ExperimentKind::Estimate => {
            let rows = run_estimate(cfg)?;
            write_table(out, &head, &rows)?;
            if out.as_os_str() == "-" {
                String::new()
            } else {
                written(rows.len())
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, extra) = match &cli.command {
        Command::Bench1d(c) => (ExperimentKind::Bench1d, c, vec![]),
        Command::BenchSliced(c) => (ExperimentKind::BenchSliced, c, vec![]),
        Command::KlVsN(c) => (ExperimentKind::KlVsN, c, vec![]),
        Command::Rates(c) => (ExperimentKind::Rates, c, vec![]),
        Command::Bounds(c) => (ExperimentKind::Bounds, c, vec![]),
        Command::Transport(c) => (ExperimentKind::Transport, c, vec![]),
        Command::Estimate { common, mu, nu } => (
            ExperimentKind::Estimate,
            common,
            vec![format!("mu_path={}", quoted(mu)), format!("nu_path={}", quoted(nu))],
        ),
    };
    let mut overrides = extra;
    overrides.extend(common.overrides());
    let result = ExperimentConfig::resolve(kind, common.config.as_deref(), &overrides).and_then(|cfg| run(kind, &cfg));
    match result {
        Ok(msg) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_) | Error::NotDifferentiable(_)) { 2 } else { 1 })
        }
    }
}
