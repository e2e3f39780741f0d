use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use nfscan::classifiers::ClassifierKind;
use nfscan::field::{Combine, FieldKind};
use nfscan::pipeline::{self, Overrides, RunConfig};

/// Near-field scan synthesis and open/closed radiator classification.
#[derive(Parser)]
#[command(name = "nfscan", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; every flag below overrides its key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Probe kind: e or h.
    #[arg(long, global = true, value_parser = parse_probe)]
    probe: Option<FieldKind>,
    #[arg(long, global = true, value_parser = parse_classifier)]
    classifier: Option<ClassifierKind>,
    /// Field combination: total, x, y or z.
    #[arg(long, global = true, value_parser = parse_combine)]
    combine: Option<Combine>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the wire library and the scan image datasets.
    Generate,
    /// Leave-one-out evaluation of the configured classifiers.
    Evaluate,
    /// Render every field component of one shape.
    Render {
        /// Shape id (defaults to the first library shape).
        #[arg(long)]
        shape: Option<String>,
    },
    /// Build a dataset from external rasters (.png or .grid).
    Ingest {
        /// CSV of `file,label` rows.
        #[arg(long)]
        labels: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Rebuild the summary table from results files.
    Report { results: Vec<PathBuf> },
}

fn parse_probe(s: &str) -> Result<FieldKind, String> {
    FieldKind::parse(s).ok_or_else(|| format!("expected e or h, got `{s}`"))
}

fn parse_classifier(s: &str) -> Result<ClassifierKind, String> {
    ClassifierKind::parse(s).ok_or_else(|| format!("unknown classifier `{s}`"))
}

fn parse_combine(s: &str) -> Result<Combine, String> {
    Combine::parse(s).ok_or_else(|| format!("expected total, x, y or z, got `{s}`"))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = cli.global;
    let base = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        seed: g.seed,
        probe: g.probe,
        classifier: g.classifier,
        combine: g.combine,
        out: g.out,
        jobs: g.jobs,
    };
    let cfg = base.apply(&overrides)?;
    let jobs = cfg.jobs;
    match cli.command {
        Command::Generate => {
            let written = pipeline::with_jobs(jobs, || pipeline::generate(&cfg))??;
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Evaluate => {
            let reports = pipeline::with_jobs(jobs, || pipeline::evaluate(&cfg))??;
            for r in &reports {
                println!("{:<16} {}  F1 {:.3}", r.classifier.name(), r.probe_kind.as_str(), r.f1);
            }
        }
        Command::Render { shape } => {
            let written = pipeline::with_jobs(jobs, || pipeline::render(&cfg, shape.as_deref()))??;
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Ingest { labels, files } => {
            let probe = g.probe.context("ingest needs --probe e or --probe h")?;
            let path = pipeline::ingest(&cfg, &files, &labels, probe)?;
            println!("{}", path.display());
        }
        Command::Report { results } => {
            print!("{}", pipeline::report(&cfg, &results)?.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NFSCAN_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<nfscan::Error>().map_or(1, pipeline::exit_code);
            ExitCode::from(code)
        }
    }
}
