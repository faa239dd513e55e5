use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fastslow_core::harness::{
    cmd_generate, cmd_plot, cmd_report, cmd_run, write_csv, write_csv_to, GenerateSpec, LabelFilter, SweepSpec,
};
use log::info;

#[derive(Parser)]
#[command(name = "fastslow", version, about = "Fast/slow solver orchestration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Filter {
    All,
    Solvable,
    Unsolvable,
}

impl From<Filter> for LabelFilter {
    fn from(f: Filter) -> Self {
        match f {
            Filter::All => LabelFilter::All,
            Filter::Solvable => LabelFilter::Solvable,
            Filter::Unsolvable => LabelFilter::Unsolvable,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled graph-coloring dataset.
    Generate {
        /// Vertex counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 15, 20, 25])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Edge probability range as LO:HI.
        #[arg(long, default_value = "0.1:0.9")]
        edge_prob: String,
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30_000)]
        oracle_budget_ms: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a sweep described by a TOML file.
    Run {
        spec: PathBuf,
        /// Override the spec's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recompute report rows from transcript files.
    Report {
        #[arg(required = true)]
        transcripts: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Filter::All)]
        filter: Filter,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scatter plot (SVG) of success rate against mean time.
    Plot {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "")]
        title: String,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = match s.split_once(':') {
        Some((a, b)) => (a.trim().parse()?, b.trim().parse()?),
        None => {
            let v: f64 = s.trim().parse()?;
            (v, v)
        }
    };
    Ok((lo, hi))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Generate {
            sizes,
            count,
            edge_prob,
            k,
            seed,
            oracle_budget_ms,
            out,
        } => {
            let spec = GenerateSpec {
                sizes,
                count_per_size: count,
                edge_prob_range: parse_range(&edge_prob).context("bad --edge-prob")?,
                k,
                seed,
                oracle_budget_ms,
                ..GenerateSpec::default()
            };
            let report = cmd_generate(&spec, &out)?;
            println!(
                "{} instances: {} solvable, {} unsolvable, {} redraws",
                report.manifest.entries.len(),
                report.solvable,
                report.unsolvable,
                report.redraws
            );
        }
        Command::Run { spec, workers } => {
            let mut sweep = SweepSpec::load(&spec).with_context(|| format!("loading {}", spec.display()))?;
            if let Some(w) = workers {
                sweep.workers = w;
            }
            let summary = cmd_run(&sweep)?;
            for r in &summary.rows {
                println!(
                    "{:<16} {:>4}/{:<4} {:6.1}%  {:8.3}s  {:5.2} it  {:5.1}% fallback",
                    r.label, r.solved, r.instances, r.success_rate, r.mean_time_s, r.mean_iterations, r.fallback_rate
                );
            }
            info!("report written to {}", summary.csv.display());
        }
        Command::Report {
            transcripts,
            filter,
            out,
        } => {
            let rows = cmd_report(&transcripts, filter.into())?;
            match out {
                Some(path) => write_csv(&path, &rows)?,
                None => write_csv_to(std::io::stdout().lock(), &rows)?,
            }
        }
        Command::Plot { csv, out, title } => {
            let n = cmd_plot(&csv, &out, &title)?;
            if n == 0 {
                bail!("no rows plotted");
            }
            info!("{n} points written to {}", out.display());
        }
    }
    Ok(())
}
