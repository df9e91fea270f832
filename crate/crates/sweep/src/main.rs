//! `sweep`: run QAOA density sweeps and summarize their CSV output.
//!
//! Exit codes: 0 success, 2 invalid spec or input, 3 I/O failure.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qaoa_core::sweep::{
    read_csv, run_google_families, run_sweep, summarize, write_csv, write_summary_csv, EdgeCounts, GroupKey,
    SweepOptimizer, SweepSpec,
};
use qaoa_core::{Family, QaoaError};

#[derive(Parser)]
#[command(name = "sweep", version, about = "QAOA performance versus graph density")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one graph family over node counts, edge counts and depths.
    Run(RunArgs),
    /// Grid, 3-regular (even n) and complete sweeps into one CSV.
    Google(GoogleArgs),
    /// Aggregate a sweep CSV into mean/std per group.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    family: Family,
    /// Node counts, e.g. `10` or `8,10,12` or `8-12`.
    #[arg(long, value_parser = parse_list)]
    n: ::std::vec::Vec<usize>,
    /// Edge counts as a list, or `auto` for families that fix them.
    #[arg(long, default_value = "auto", value_parser = parse_edge_counts)]
    m: EdgeCounts,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GoogleArgs {
    /// Node counts, e.g. `10-14`.
    #[arg(long, value_parser = parse_list)]
    n: ::std::vec::Vec<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Depths, e.g. `3` or `3,6,9`.
    #[arg(long, value_parser = parse_list)]
    p: ::std::vec::Vec<usize>,
    #[arg(long, default_value_t = 1)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimizer restarts per cell [default: 50 at p = 3, 20·p otherwise].
    #[arg(long)]
    starts: Option<usize>,
    /// Nelder–Mead evaluations per start, per layer.
    #[arg(long)]
    evals_per_layer: Option<usize>,
    #[arg(long)]
    xtol: Option<f64>,
    #[arg(long)]
    ftol: Option<f64>,
    /// Start each depth from the previous depth's optimum.
    #[arg(long)]
    warm_start: bool,
    /// Write 0 in the wall_time_ms column so repeated runs are byte-identical.
    #[arg(long)]
    no_wall_time: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Group keys among family, n, density, p.
    #[arg(long, value_delimiter = ',', default_value = "family,n,density,p")]
    by: Vec<GroupKey>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("'{t}' is not a non-negative integer"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}

fn parse_edge_counts(s: &str) -> Result<EdgeCounts, String> {
    if s == "auto" {
        Ok(EdgeCounts::Auto)
    } else {
        parse_list(s).map(EdgeCounts::List)
    }
}

impl CommonArgs {
    fn spec(&self, family: Family, n_values: Vec<usize>, m_values: EdgeCounts) -> SweepSpec {
        let defaults = SweepOptimizer::default();
        SweepSpec {
            instances_per_cell: self.instances,
            base_seed: self.seed,
            optimizer: SweepOptimizer {
                starts: self.starts,
                evals_per_layer: self.evals_per_layer.unwrap_or(defaults.evals_per_layer),
                xtol: self.xtol.unwrap_or(defaults.xtol),
                ftol: self.ftol.unwrap_or(defaults.ftol),
            },
            warm_start: self.warm_start,
            threads: self.threads,
            record_wall_time: !self.no_wall_time,
            output_path: self.out.clone(),
            ..SweepSpec::new(family, n_values, m_values, self.p.clone())
        }
    }
}

fn to_stdout(f: impl FnOnce(&mut dyn Write) -> qaoa_core::Result<()>) -> qaoa_core::Result<()> {
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> qaoa_core::Result<()> {
    match cli.command {
        Command::Run(a) => {
            let Format::Csv = a.common.format;
            let spec = a.common.spec(a.family, a.n, a.m);
            let records = run_sweep(&spec)?;
            if spec.output_path.is_none() {
                to_stdout(|w| write_csv(w, &records))?;
            }
        }
        Command::Google(a) => {
            let Format::Csv = a.common.format;
            let spec = a.common.spec(Family::Grid, a.n, EdgeCounts::Auto);
            let records = run_google_families(&spec)?;
            if spec.output_path.is_none() {
                to_stdout(|w| write_csv(w, &records))?;
            }
        }
        Command::Summarize(a) => {
            let records = read_csv(BufReader::new(File::open(&a.input)?))?;
            let rows = summarize(&records, &a.by)?;
            match a.out {
                Some(path) => write_summary_csv(BufWriter::new(File::create(path)?), &rows)?,
                None => to_stdout(|w| write_summary_csv(w, &rows))?,
            }
        }
    }
    Ok(())
}

fn exit_code(e: &QaoaError) -> u8 {
    match e {
        QaoaError::Io(_) => 3,
        QaoaError::Csv(c) if c.is_io_error() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sweep: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
