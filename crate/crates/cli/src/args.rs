use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nesteq::logic::LogicId;

#[derive(Debug, Parser)]
#[command(name = "nesteq", version, about = "Satisfiability tools for two-variable logic with nested equivalences")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. A `-- logic: NAME` header in an input
/// file overrides `--logic`.
#[derive(Clone, Debug, Args)]
pub struct RunConfig {
    #[arg(long, global = true, value_parser = parse_logic)]
    pub logic: Option<LogicId>,
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    /// Search nodes per domain size (states per level for the solver).
    #[arg(long, global = true)]
    pub budget_nodes: Option<u64>,
    #[arg(long, global = true, env = "NESTEQ_BUDGET_SECS")]
    pub budget_secs: Option<u64>,
    /// Verdict commands append JSON lines here; generators write here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Backtracking search with Kleene-logic pruning.
    Dfs,
    /// Clause grounding and a CDCL solver (equivalence-only logics).
    Sat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide satisfiability within the cap; certifies unsatisfiability
    /// when the cap reaches the small-model bound.
    Check { formula: PathBuf },
    /// Search for a model of the normal form, up to the cap.
    Oracle {
        formula: PathBuf,
        /// Only the domain size equal to the cap.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = Engine::Dfs)]
        engine: Engine,
    },
    /// Print the Scott normal form and its size report.
    Normalize { formula: PathBuf },
    /// Validate a model and evaluate the formula in it.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Shrink a model by class replacement until no class can be replaced.
    Pump {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: PathBuf,
    },
    /// Generate reduction sentences or a seeded corpus.
    #[command(subcommand)]
    Gen(Gen),
    /// Check every `.fo2` file of a directory; one JSON line per file.
    Corpus {
        dir: PathBuf,
        /// Also run the brute-force oracle and report agreement.
        #[arg(long)]
        agree: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum Gen {
    /// Sentence of a corridor tiling instance (JSON).
    Tiling {
        instance: PathBuf,
        /// Write the encoded tiling found within `--cap` rows here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Sentence of a two-counter machine (JSON).
    Tcm {
        machine: PathBuf,
        /// Write the encoded halting run here.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Steps simulated when looking for a halting run.
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
    /// Seeded preorder-with-successor sentences, one file each.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

fn parse_logic(s: &str) -> Result<LogicId, String> {
    LogicId::from_cli_name(s).ok_or_else(|| {
        let names: Vec<&str> = LogicId::ALL.iter().map(|l| l.cli_name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}
