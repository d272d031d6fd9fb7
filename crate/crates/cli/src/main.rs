use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sp2brst::artifact::Artifact;
use sp2brst::commands::{self, BuildOptions, LiftOptions, Report};
use sp2brst::model_file;

/// Build and check BRST-anti-BRST charges of reducible constraint systems.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the master equation up to a (c, pi)-degree and write an artifact.
    Build {
        model: PathBuf,
        /// Largest (c, pi)-degree kept.
        #[arg(long = "order", default_value_t = 3)]
        order: u32,
        #[arg(long)]
        out: PathBuf,
        /// TOML file with `y` and/or `upsilon` component arrays.
        #[arg(long = "free-terms")]
        free_terms: Option<PathBuf>,
        #[arg(long, env = "SP2BRST_SEED", default_value_t = 0)]
        seed: u64,
        /// Random elements per identity of the suite.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Re-check an artifact exactly and at seeded rational points.
    Verify {
        artifact: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, env = "SP2BRST_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Lift a first-class function to a BRST observable.
    Lift {
        artifact: PathBuf,
        /// File holding one polynomial in the phase-space variables.
        #[arg(long)]
        observable: PathBuf,
        #[arg(long = "order")]
        order: Option<u32>,
        #[arg(long)]
        out: PathBuf,
        /// Check brackets and products against observables already lifted.
        #[arg(long)]
        homomorphism: bool,
    },
    /// Run the operator identities on seeded random elements.
    IdentitySuite {
        model: PathBuf,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, env = "SP2BRST_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn finish(report: &Report) -> ExitCode {
    print!("{}", report.render());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build { model, order, out, free_terms, seed, samples } => {
            let loaded = model_file::load(&model)?;
            let free_terms = free_terms
                .map(|p| std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let options = BuildOptions { cutoff: order, seed, samples, free_terms };
            let (art, report) = commands::build(&loaded, &options)?;
            art.write(&out)?;
            Ok(finish(&report))
        }
        Command::Verify { artifact, samples, seed } => {
            let art = Artifact::read(&artifact)?;
            Ok(finish(&commands::verify(&art, samples, seed)?))
        }
        Command::Lift { artifact, observable, order, out, homomorphism } => {
            let art = Artifact::read(&artifact)?;
            let source = std::fs::read_to_string(&observable).with_context(|| format!("reading {}", observable.display()))?;
            let (next, report) = commands::lift(&art, &source, &LiftOptions { cutoff: order, homomorphism })?;
            next.write(&out)?;
            Ok(finish(&report))
        }
        Command::IdentitySuite { model, samples, seed } => {
            let loaded = model_file::load(&model)?;
            Ok(finish(&commands::identity_suite(&loaded, samples, seed, None)?))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
