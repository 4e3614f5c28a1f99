//! Batch runs from a line-oriented manifest.
//!
//! Each non-blank line not starting with `#` is one session, written as
//! space-separated `key=value` pairs. Plan keys are `experiment`,
//! `condition`, `maze` (one id or path, experiment 1), `mazes` (two,
//! comma-separated, experiment 2), `budget` and `id`. Every other key goes to
//! the agent configuration; `kind` is required and `seed` defaults to 0:
//!
//! ```text
//! kind=dfs seed=1 experiment=1 maze=exp1
//! kind=qlearn seed=2 epsilon=0.2 experiment=2 condition=dense mazes=exp2a,exp2b
//! ```
//!
//! Maze references name a builtin maze or a file, resolved relative to the
//! manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{builtin_maze, default_session_id, run_session, Condition, ExperimentPlan, MazeDesign, ProtocolError};
use crate::agents::AgentConfig;

const PLAN_KEYS: [&str; 6] = ["experiment", "condition", "maze", "mazes", "budget", "id"];

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    /// 1-based line in the manifest.
    pub line: usize,
    pub agent: AgentConfig,
    pub experiment: u8,
    pub condition: Condition,
    pub mazes: Vec<String>,
    pub budget: Option<usize>,
    pub id: Option<String>,
}

/// Outcome of one manifest line.
#[derive(Debug)]
pub struct BatchResult {
    pub line: usize,
    pub session_id: Option<String>,
    pub result: Result<PathBuf, ProtocolError>,
}

/// Parses the manifest. Lines that fail to parse come back as errors in
/// place so the rest can still run.
pub fn parse_manifest(text: &str) -> Vec<(usize, Result<ManifestRow, ProtocolError>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i + 1, parse_row(i + 1, l)))
        .collect()
}

fn parse_row(line: usize, text: &str) -> Result<ManifestRow, ProtocolError> {
    let bad = |reason: String| ProtocolError::Manifest { line, reason };
    let mut agent_pairs = Vec::new();
    let mut plan: std::collections::BTreeMap<&str, &str> = Default::default();
    for tok in text.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad(format!("expected key=value, found {tok:?}")))?;
        if PLAN_KEYS.contains(&k) {
            if plan.insert(k, v).is_some() {
                return Err(bad(format!("duplicate key {k}")));
            }
        } else {
            agent_pairs.push((k, v));
        }
    }
    let agent = AgentConfig::from_pairs(agent_pairs).map_err(|e| bad(e.to_string()))?;
    let experiment: u8 = plan
        .get("experiment")
        .ok_or_else(|| bad("missing experiment".into()))?
        .parse()
        .map_err(|_| bad("experiment must be 1 or 2".into()))?;
    let condition = match plan.get("condition") {
        Some(c) => c.parse()?,
        None if experiment == 1 => Condition::Standard,
        None => return Err(bad("experiment 2 needs condition=dense or condition=sparse".into())),
    };
    let mazes: Vec<String> = match (plan.get("maze"), plan.get("mazes")) {
        (Some(m), None) => vec![m.to_string()],
        (None, Some(ms)) => ms.split(',').map(str::to_string).collect(),
        (None, None) if experiment == 1 => vec!["exp1".into()],
        (None, None) => vec!["exp2a".into(), "exp2b".into()],
        (Some(_), Some(_)) => return Err(bad("give maze or mazes, not both".into())),
    };
    let budget = plan
        .get("budget")
        .map(|b| b.parse::<usize>().map_err(|_| bad(format!("bad budget {b:?}"))))
        .transpose()?;
    Ok(ManifestRow { line, agent, experiment, condition, mazes, budget, id: plan.get("id").map(|s| s.to_string()) })
}

/// A builtin maze id, or a path to an ASCII maze file whose stem becomes
/// the maze id.
pub fn resolve_maze(reference: &str, base: &Path) -> Result<MazeDesign, ProtocolError> {
    if let Some(m) = builtin_maze(reference) {
        return Ok(m);
    }
    let path = base.join(reference);
    let text = fs::read_to_string(&path).map_err(|e| ProtocolError::Io(format!("{}: {e}", path.display())))?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(reference).to_string();
    Ok(MazeDesign::new(id, text))
}

impl ManifestRow {
    pub fn plan(&self, base: &Path) -> Result<ExperimentPlan, ProtocolError> {
        let mazes = self.mazes.iter().map(|m| resolve_maze(m, base)).collect::<Result<Vec<_>, _>>()?;
        let plan = ExperimentPlan::build(self.experiment, self.condition, mazes)?;
        match self.budget {
            Some(b) => plan.with_budget(b),
            None => Ok(plan),
        }
    }

    pub fn session_id(&self, plan: &ExperimentPlan) -> String {
        self.id.clone().unwrap_or_else(|| default_session_id(&self.agent, plan))
    }
}

/// Runs every manifest line in parallel and writes one session directory
/// per successful line under `out`. Results are in manifest order.
pub fn batch_run(manifest: &str, base: &Path, out: &Path) -> Result<Vec<BatchResult>, ProtocolError> {
    let rows = parse_manifest(manifest);
    if rows.is_empty() {
        return Err(ProtocolError::EmptyManifest);
    }
    fs::create_dir_all(out)?;
    Ok(rows
        .into_par_iter()
        .map(|(line, row)| {
            let row = match row {
                Ok(r) => r,
                Err(e) => return BatchResult { line, session_id: None, result: Err(e) },
            };
            let plan = match row.plan(base) {
                Ok(p) => p,
                Err(e) => return BatchResult { line, session_id: None, result: Err(e) },
            };
            let id = row.session_id(&plan);
            let result = run_session(&row.agent, &plan, &id).and_then(|log| log.write_dir(out));
            BatchResult { line, session_id: Some(id), result }
        })
        .collect())
}
