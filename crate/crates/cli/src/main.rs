use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sumfree_core::error::Result;
use sumfree_core::lp::report_csv;
use sumfree_core::pipeline::{
    emit_plotdata, install_workers, load_input, run, Command, LpFamily, PlotKind, RunConfig, WeightKind,
};
use sumfree_core::sets::Format;

#[derive(Parser)]
#[command(name = "sumfree", version, about = "Certified (k,l)-sum-free subsets and the checks behind them")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Structure of the input set and its route classification.
    Analyze(Common),
    /// Certified sum-free subset by dilation counting.
    Extract(Common),
    /// Exact sieve identities on the input set.
    Verify(Common),
    /// Bourgain test function certificate for B = input or {1..size}.
    Phi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        size: Option<u64>,
        #[arg(long, value_enum, default_value = "unit")]
        weights: Weights,
    },
    /// Lacunary L¹ growth diagnostic (CSV).
    Lp {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "triadic")]
        family: Family,
        /// Family sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<u64>,
        /// Emit the JSON report instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Exact maximum against the extractor for small sets.
    Oracle(Common),
    /// Every stage on the input set, with growth and surplus tables.
    Report {
        #[command(flatten)]
        common: Common,
        /// N values for the growth and surplus tables, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<u64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    input: Option<String>,
    #[arg(long, value_enum, default_value = "lines")]
    format: InputFormat,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    l: u32,
    #[arg(long, default_value_t = 5)]
    q: u64,
    /// Sieve threshold P; defaults to the least prime ≥ N².
    #[arg(long)]
    p: Option<u64>,
    /// Frequency cutoff X.
    #[arg(long, default_value_t = 2000)]
    cutoff: u64,
    #[arg(long, default_value_t = 1 << 17)]
    grid: usize,
    #[arg(long, default_value_t = 100)]
    base: u64,
    /// Structure threshold exponent as num/den.
    #[arg(long, default_value = "1/2", value_parser = parse_exp)]
    threshold_exp: [u64; 2],
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
    /// Emit plot data of this kind instead of the report.
    #[arg(long, value_enum)]
    plot: Option<Plot>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Lines,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    Unit,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Triadic,
    Interval,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Plot {
    L1Growth,
    #[value(name = "surplus_vs_N")]
    SurplusVsN,
    PhiProfile,
}

fn parse_exp(s: &str) -> std::result::Result<[u64; 2], String> {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n = n.trim().parse::<u64>().map_err(|e| e.to_string())?;
    let d = d.trim().parse::<u64>().map_err(|e| e.to_string())?;
    if d == 0 {
        return Err("zero denominator".into());
    }
    Ok([n, d])
}

fn config(sub: Sub) -> (RunConfig, Option<Plot>, bool) {
    match sub {
        Sub::Analyze(c) => (base_config(Command::Analyze, &c), c.plot, false),
        Sub::Extract(c) => (base_config(Command::Extract, &c), c.plot, false),
        Sub::Verify(c) => (base_config(Command::Verify, &c), c.plot, false),
        Sub::Oracle(c) => (base_config(Command::Oracle, &c), c.plot, false),
        Sub::Phi { common, size, weights } => {
            let mut cfg = base_config(Command::Phi, &common);
            cfg.size = size;
            cfg.weights = match weights {
                Weights::Unit => WeightKind::Unit,
                Weights::Random => WeightKind::Random,
            };
            (cfg, common.plot, false)
        }
        Sub::Lp { common, family, sizes, json } => {
            let mut cfg = base_config(Command::Lp, &common);
            cfg.sizes = sizes;
            cfg.family = match family {
                Family::Triadic => LpFamily::Triadic,
                Family::Interval => LpFamily::Interval,
            };
            (cfg, common.plot, !json)
        }
        Sub::Report { common, sizes } => {
            let mut cfg = base_config(Command::Report, &common);
            cfg.sizes = sizes;
            (cfg, common.plot, false)
        }
    }
}

fn base_config(command: Command, c: &Common) -> RunConfig {
    RunConfig {
        command,
        input: c.input.clone(),
        format: match c.format {
            InputFormat::Lines => Format::Lines,
            InputFormat::Json => Format::Json,
        },
        k: c.k,
        l: c.l,
        q: c.q,
        p: c.p,
        cutoff: c.cutoff,
        grid: c.grid,
        base: c.base,
        threshold_exp: c.threshold_exp,
        seed: c.seed,
        out: c.out.clone(),
        ..RunConfig::default()
    }
}

/// Ok(true) when the run found no invariant violations.
fn execute(cli: Cli) -> Result<bool> {
    install_workers()?;
    let (cfg, plot, csv) = config(cli.command);
    cfg.validate()?;
    let input = cfg.input.as_deref().map(|p| load_input(p, cfg.format)).transpose()?;
    let report = run(&cfg, input)?;
    let text = match plot {
        Some(kind) => emit_plotdata(
            &report,
            match kind {
                Plot::L1Growth => PlotKind::L1Growth,
                Plot::SurplusVsN => PlotKind::SurplusVsN,
                Plot::PhiProfile => PlotKind::PhiProfile,
            },
        )?,
        None if csv => report_csv(report.stages.lp.as_ref().expect("lp stage ran")),
        None => report.to_json()? + "\n",
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    Ok(report.violations.is_empty())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
