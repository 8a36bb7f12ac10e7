use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use nesteq::logic::LogicId;
use nesteq::normalize::to_snf;
use nesteq::oracle::{find_model, FindResult, Mode, Status};
use nesteq::par;

use crate::args::RunConfig;
use crate::commands::{append_line, decide, parse_source, search_config};
use crate::EXIT_OK;

/// One report line. Timings are left out so reports are reproducible.
#[derive(Debug, Default, Serialize)]
pub struct Entry {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logic: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_size: Option<usize>,
    /// Whether the oracle found a model within the cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_sat: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn process(path: &Path, agree: bool, cfg: &RunConfig) -> Entry {
    let file = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut entry = Entry {
        file: file.clone(),
        ..Entry::default()
    };
    if let Err(e) = fill(path, &file, agree, cfg, &mut entry) {
        entry.error = Some(format!("{e:#}"));
    }
    entry
}

fn fill(path: &Path, file: &str, agree: bool, cfg: &RunConfig, entry: &mut Entry) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {file}"))?;
    let src = parse_source(Path::new(file), &text, cfg)?;
    entry.logic = Some(src.logic.cli_name());
    let record = decide(file, &src, cfg)?;
    entry.status = Some(record.status);
    entry.model_size = record.model.as_ref().map(|m| m.n);
    if agree && src.logic != LogicId::TwoFamilies {
        let snf = to_snf(&src.formula, src.logic)?;
        let (found, _) = find_model(&snf, src.logic, cfg.cap as usize, Mode::AtMost, &search_config(cfg))?;
        if !matches!(found, FindResult::Unknown(_)) {
            let sat = matches!(found, FindResult::Found(_));
            entry.oracle_sat = Some(sat);
            entry.agree = Some(sat == (record.status == Status::Sat));
        }
    }
    Ok(())
}

/// `.fo2` files of `dir` in name order.
fn inputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for item in fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))? {
        let path = item?.path();
        if path.extension().is_some_and(|e| e == "fo2") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Entries come back in input order whatever the completion order.
pub fn corpus_run(dir: &Path, agree: bool, cfg: &RunConfig) -> Result<Vec<Entry>> {
    let paths = inputs(dir)?;
    Ok(par::with_threads(cfg.jobs as usize, || {
        par::map(paths, |p| process(&p, agree, cfg))
    }))
}

pub fn corpus(dir: &Path, agree: bool, cfg: &RunConfig) -> Result<i32> {
    let entries = corpus_run(dir, agree, cfg)?;
    let mut tally = [0usize; 4];
    for e in &entries {
        let line = serde_json::to_string(e)?;
        println!("{line}");
        append_line(cfg, &line)?;
        let slot = match (&e.error, e.status) {
            (Some(_), _) | (None, None) => 3,
            (None, Some(Status::Sat)) => 0,
            (None, Some(Status::UnsatCertified)) => 1,
            (None, Some(Status::Unknown)) => 2,
        };
        tally[slot] += 1;
    }
    let compared = entries.iter().filter(|e| e.agree.is_some()).count();
    let agreed = entries.iter().filter(|e| e.agree == Some(true)).count();
    eprintln!(
        "{} files: {} sat, {} unsat-certified, {} unknown, {} errors; agreement {agreed}/{compared}",
        entries.len(),
        tally[0],
        tally[1],
        tally[2],
        tally[3]
    );
    Ok(EXIT_OK)
}
