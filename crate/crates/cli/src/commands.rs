use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use nesteq::generate::agreement_corpus;
use nesteq::logic::{parse_formula, render_formula, Formula, LogicId};
use nesteq::normalize::to_snf;
use nesteq::oracle::{decide_bounded, find_model, find_model_sat, FindResult, Mode, SearchConfig, Status};
use nesteq::preorder_solver::{decide_preorder_succ, SolverConfig};
use nesteq::pumping::shrink;
use nesteq::reductions::{
    run_to_structure, simulate, solution_to_structure, solve_tiling, tcm_to_formula, tiling_to_formula,
    TilingInstance, TwoCounterMachine,
};
use nesteq::structure::{evaluate, validate_structure, Structure, Valuation};

use crate::args::{Engine, RunConfig};
use crate::{EXIT_OK, EXIT_SAT, EXIT_UNKNOWN, EXIT_UNSAT};

/// A parsed formula file with its effective logic.
pub struct Source {
    pub logic: LogicId,
    pub formula: Formula,
}

/// First `-- logic: NAME` comment line, if any.
pub fn header_logic(text: &str) -> Result<Option<LogicId>> {
    for line in text.lines() {
        let Some(rest) = line.trim().strip_prefix("--") else { continue };
        if let Some(name) = rest.trim().strip_prefix("logic:") {
            let name = name.trim();
            return LogicId::from_cli_name(name)
                .map(Some)
                .ok_or_else(|| anyhow!("unknown logic `{name}` in header"));
        }
    }
    Ok(None)
}

pub fn parse_source(path: &Path, text: &str, cfg: &RunConfig) -> Result<Source> {
    let formula = parse_formula(text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    let logic = header_logic(text)?.or(cfg.logic).unwrap_or(LogicId::RawFo2);
    Ok(Source { logic, formula })
}

pub fn read_source(path: &Path, cfg: &RunConfig) -> Result<Source> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_source(path, &text, cfg)
}

fn read_model(path: &Path) -> Result<Structure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Structure::from_json(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

pub fn search_config(cfg: &RunConfig) -> SearchConfig {
    SearchConfig {
        max_nodes: cfg.budget_nodes,
        max_secs: cfg.budget_secs.map(|s| s as f64),
        ..SearchConfig::default()
    }
}

fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        max_states: cfg.budget_nodes.map(|n| n as usize),
        max_secs: cfg.budget_secs.map(|s| s as f64),
        ..SolverConfig::default()
    }
}

/// One line of a verdict log.
#[derive(Debug, Serialize)]
pub struct Record {
    pub file: String,
    pub logic: &'static str,
    pub status: Status,
    pub cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u128>,
    pub sizes_exhausted: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Structure>,
}

pub fn exit_for(status: Status) -> i32 {
    match status {
        Status::Sat => EXIT_SAT,
        Status::UnsatCertified => EXIT_UNSAT,
        Status::Unknown => EXIT_UNKNOWN,
    }
}

/// `decide_preorder_succ` for preorders with successors, otherwise
/// `decide_bounded`.
pub fn decide(name: &str, src: &Source, cfg: &RunConfig) -> Result<Record> {
    let cap = cfg.cap as usize;
    let verdict = if src.logic == LogicId::PreorderSucc {
        let snf = to_snf(&src.formula, src.logic)?;
        decide_preorder_succ(&snf, cap, &solver_config(cfg))?.verdict
    } else {
        decide_bounded(&src.formula, src.logic, cap, &search_config(cfg))?
    };
    Ok(Record {
        file: name.to_string(),
        logic: src.logic.cli_name(),
        status: verdict.status,
        cap,
        bound: verdict.bound,
        sizes_exhausted: verdict.stats.sizes_exhausted,
        stopped: verdict.stats.stopped,
        model: verdict.model,
    })
}

/// Append one JSON line to `--out`, if given.
pub fn append_line(cfg: &RunConfig, line: &str) -> Result<()> {
    if let Some(path) = &cfg.out {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("cannot open {}", path.display()))?;
        writeln!(f, "{line}")?;
    }
    Ok(())
}

/// Write to `--out` when given, else to standard output.
fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn check(path: &Path, cfg: &RunConfig) -> Result<i32> {
    let src = read_source(path, cfg)?;
    let record = decide(&path.display().to_string(), &src, cfg)?;
    let line = serde_json::to_string(&record)?;
    println!("{line}");
    append_line(cfg, &line)?;
    Ok(exit_for(record.status))
}

pub fn oracle(path: &Path, exact: bool, engine: Engine, cfg: &RunConfig) -> Result<i32> {
    let src = read_source(path, cfg)?;
    let snf = to_snf(&src.formula, src.logic)?;
    let cap = cfg.cap as usize;
    let mode = if exact { Mode::Exact } else { Mode::AtMost };
    let (found, stats) = match engine {
        Engine::Dfs => find_model(&snf, src.logic, cap, mode, &search_config(cfg))?,
        Engine::Sat => find_model_sat(&snf, src.logic, cap, mode)?,
    };
    let (status, model) = match found {
        FindResult::Found(m) => (Status::Sat, Some(snf.restore(&m))),
        FindResult::Absent | FindResult::Unknown(_) => (Status::Unknown, None),
    };
    let record = Record {
        file: path.display().to_string(),
        logic: src.logic.cli_name(),
        status,
        cap,
        bound: None,
        sizes_exhausted: stats.sizes_exhausted,
        stopped: stats.stopped,
        model,
    };
    let line = serde_json::to_string(&record)?;
    println!("{line}");
    append_line(cfg, &line)?;
    Ok(exit_for(status))
}

pub fn normalize(path: &Path, cfg: &RunConfig) -> Result<i32> {
    let src = read_source(path, cfg)?;
    let snf = to_snf(&src.formula, src.logic)?;
    let size = snf.size_report(&src.formula);
    let text = format!(
        "-- logic: {}\n-- size: input {}, output {}, fresh {}, skolem {}\n{}\n",
        src.logic.cli_name(),
        size.input,
        size.output,
        size.fresh,
        snf.m(),
        render_formula(&snf.to_formula())
    );
    emit(cfg, &text)?;
    Ok(EXIT_OK)
}

/// Both checks must pass; a false formula is reported as an input error.
pub fn verify(model: &Path, formula: &Path, cfg: &RunConfig) -> Result<i32> {
    let src = read_source(formula, cfg)?;
    let s = read_model(model)?;
    let report = validate_structure(&s, src.logic);
    if !report.ok {
        let failures: Vec<String> = report
            .failures
            .iter()
            .map(|f| format!("{} at {:?}", f.axiom, f.witness))
            .collect();
        bail!("{} is not a {} structure: {}", model.display(), src.logic.cli_name(), failures.join("; "));
    }
    if !evaluate(&s, &src.formula, &Valuation::default())? {
        bail!("the formula is false in {}", model.display());
    }
    eprintln!("ok: {} elements, formula holds", s.n);
    Ok(EXIT_OK)
}

pub fn pump(model: &Path, formula: &Path, cfg: &RunConfig) -> Result<i32> {
    let src = read_source(formula, cfg)?;
    let s = read_model(model)?;
    let snf = to_snf(&src.formula, src.logic)?;
    let lifted = snf.lift(&s)?;
    let small = snf.restore(&shrink(&lifted, &snf, src.logic)?);
    eprintln!("{} -> {} elements", s.n, small.n);
    emit(cfg, &format!("{}\n", small.to_json()))?;
    Ok(EXIT_OK)
}

fn sentence_file(logic: LogicId, f: &Formula) -> String {
    format!("-- logic: {}\n{}\n", logic.cli_name(), render_formula(f))
}

pub fn gen_tiling(instance: &Path, witness: Option<&Path>, cfg: &RunConfig) -> Result<i32> {
    let text = fs::read_to_string(instance).with_context(|| format!("cannot read {}", instance.display()))?;
    let t = TilingInstance::from_json(&text)?;
    emit(cfg, &sentence_file(LogicId::PreorderSucc, &tiling_to_formula(&t)?))?;
    if let Some(path) = witness {
        match solve_tiling(&t, cfg.cap as usize) {
            Some(sol) => fs::write(path, solution_to_structure(&t, &sol)?.to_json())?,
            None => eprintln!("no tiling with at most {} rows", cfg.cap),
        }
    }
    Ok(EXIT_OK)
}

pub fn gen_tcm(machine: &Path, witness: Option<&Path>, steps: usize, cfg: &RunConfig) -> Result<i32> {
    let text = fs::read_to_string(machine).with_context(|| format!("cannot read {}", machine.display()))?;
    let m = TwoCounterMachine::from_json(&text)?;
    emit(cfg, &sentence_file(LogicId::TwoFamilies, &tcm_to_formula(&m)?))?;
    if let Some(path) = witness {
        match simulate(&m, steps) {
            Some(run) => fs::write(path, run_to_structure(&m, &run)?.to_json())?,
            None => eprintln!("no halting run within {steps} steps"),
        }
    }
    Ok(EXIT_OK)
}

pub fn gen_corpus(dir: &Path, count: usize, cfg: &RunConfig) -> Result<i32> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let width = count.saturating_sub(1).to_string().len().max(3);
    for (i, f) in agreement_corpus(cfg.seed, count).iter().enumerate() {
        let path = dir.join(format!("{i:0width$}.fo2"));
        fs::write(&path, sentence_file(LogicId::PreorderSucc, f))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(EXIT_OK)
}
