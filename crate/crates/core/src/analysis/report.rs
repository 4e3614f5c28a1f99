//! CSV reports: one row per session phase, plus a long-format cohort
//! summary with explorer clusters, group statistics and permutation tests.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    cells_crossed, cluster_explorers, coverage, dfs_consistency, discretize, mean, median, permutation_test_detailed,
    pooled_fraction, re_exploration, steps_to_goal, welch_t, AnalysisError, ConsistencyResult, GoalOutcome,
    TrajectoryLog,
};
use crate::maze::MazeSpec;

/// Column order of the per-phase CSV.
pub const SESSION_COLUMNS: [&str; 12] = [
    "session_id",
    "agent_kind_or_human",
    "condition",
    "phase",
    "coverage",
    "steps_to_goal",
    "dnf",
    "consistency_fraction",
    "decision_count",
    "re_exploration",
    "cells_crossed",
    "duration_ms",
];

/// Column order of the cohort CSV.
pub const COHORT_COLUMNS: [&str; 6] = ["section", "group", "metric", "value", "n", "note"];

pub const PERMUTATION_ITERATIONS: usize = 10_000;
pub const PERMUTATION_SEED: u64 = 0x5EED;
const CLUSTER_K: usize = 3;

/// Everything needed to score one played phase.
#[derive(Debug, Clone, Copy)]
pub struct PhaseInput<'a> {
    pub session_id: &'a str,
    /// Agent kind, or `human:<tag>`.
    pub subject: &'a str,
    pub condition: &'a str,
    pub phase: &'a str,
    pub maze: &'a MazeSpec,
    pub log: &'a TrajectoryLog,
}

/// One line of the per-phase CSV. `steps_to_goal` and `dnf` are empty for
/// phases without a goal; `steps_to_goal` is also empty on DNF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRow {
    pub session_id: String,
    pub agent_kind_or_human: String,
    pub condition: String,
    pub phase: String,
    pub coverage: f64,
    pub steps_to_goal: Option<usize>,
    pub dnf: Option<bool>,
    pub consistency_fraction: f64,
    pub decision_count: usize,
    pub re_exploration: f64,
    pub cells_crossed: usize,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMetrics {
    pub row: SessionRow,
    pub consistency: ConsistencyResult,
}

pub fn phase_metrics(input: PhaseInput<'_>) -> Result<PhaseMetrics, AnalysisError> {
    let traj = discretize(input.log, input.maze)?;
    let consistency = dfs_consistency(&traj, input.maze)?;
    let goal = match input.maze.goal() {
        Some(_) => Some(steps_to_goal(&traj, input.maze)?),
        None => None,
    };
    let row = SessionRow {
        session_id: input.session_id.to_string(),
        agent_kind_or_human: input.subject.to_string(),
        condition: input.condition.to_string(),
        phase: input.phase.to_string(),
        coverage: coverage(&traj, input.maze),
        steps_to_goal: goal.and_then(GoalOutcome::steps),
        dnf: goal.map(|g| g == GoalOutcome::Dnf),
        consistency_fraction: consistency.fraction,
        decision_count: consistency.decisions.len(),
        re_exploration: re_exploration(&traj),
        cells_crossed: cells_crossed(&traj),
        duration_ms: input.log.duration_ms(),
    };
    Ok(PhaseMetrics { row, consistency })
}

pub fn write_session_csv<W: Write>(rows: &[SessionRow], out: W) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(SESSION_COLUMNS).map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AnalysisError::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRow {
    pub section: String,
    pub group: String,
    pub metric: String,
    pub value: Option<f64>,
    pub n: usize,
    pub note: String,
}

impl CohortRow {
    fn new(section: &str, group: &str, metric: &str, value: Option<f64>, n: usize, note: impl Into<String>) -> Self {
        CohortRow {
            section: section.to_string(),
            group: group.to_string(),
            metric: metric.to_string(),
            value,
            n,
            note: note.into(),
        }
    }

    /// A file that could not be analyzed.
    pub fn load_error(source: &str, message: &str) -> Self {
        CohortRow::new("errors", source, "load_error", None, 0, message)
    }
}

pub fn write_cohort_csv<W: Write>(rows: &[CohortRow], out: W) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COHORT_COLUMNS).map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| AnalysisError::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> AnalysisError {
    AnalysisError::Io(e.to_string())
}

fn insufficient(need: usize, have: usize) -> String {
    format!("insufficient data: need {need}, have {have}")
}

/// Cohort summary, in this section order:
///
/// * `clusters`: k-means (k = 3) over first-phase coverage of experiment 1
///   (condition `standard`, phase `A`), one centroid row per level;
/// * `cluster_members`: each clustered session with its level;
/// * `phase_summary`: per `condition/phase` means, medians, DNF rate and
///   both mean and pooled consistency;
/// * `consistency_test`: experiment 1 phase `A` (no goal) against `B`
///   (goal), permutation p-value and Welch t;
/// * `dense_vs_sparse`: permutation p-values per shared phase label.
pub fn cohort_summary(metrics: &[PhaseMetrics]) -> Vec<CohortRow> {
    let mut out = Vec::new();
    clusters(metrics, &mut out);
    phase_summary(metrics, &mut out);
    consistency_test(metrics, &mut out);
    dense_vs_sparse(metrics, &mut out);
    out
}

fn select<'a>(metrics: &'a [PhaseMetrics], condition: &str, phase: &str) -> Vec<&'a PhaseMetrics> {
    metrics.iter().filter(|m| m.row.condition == condition && m.row.phase == phase).collect()
}

fn clusters(metrics: &[PhaseMetrics], out: &mut Vec<CohortRow>) {
    let group = select(metrics, "standard", "A");
    let values: Vec<f64> = group.iter().map(|m| m.row.coverage).collect();
    let Ok(c) = cluster_explorers(&values, CLUSTER_K) else {
        out.push(CohortRow::new("clusters", "standard/A", "centroid", None, values.len(), insufficient(CLUSTER_K, values.len())));
        return;
    };
    for rank in 0..c.k() {
        let size = c.members(rank).count();
        out.push(CohortRow::new("clusters", &c.label_name(rank), "centroid", Some(c.centroids[rank]), size, "coverage"));
    }
    for (i, m) in group.iter().enumerate() {
        out.push(CohortRow::new(
            "cluster_members",
            &m.row.session_id,
            "coverage",
            Some(m.row.coverage),
            1,
            c.label_name(c.labels[i]),
        ));
    }
}

fn phase_summary(metrics: &[PhaseMetrics], out: &mut Vec<CohortRow>) {
    let mut groups: BTreeMap<(String, String), Vec<&PhaseMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry((m.row.condition.clone(), m.row.phase.clone())).or_default().push(m);
    }
    for ((condition, phase), ms) in groups {
        let g = format!("{condition}/{phase}");
        let n = ms.len();
        let col = |f: fn(&SessionRow) -> f64| ms.iter().map(|m| f(&m.row)).collect::<Vec<f64>>();
        let mut push = |metric: &str, value: Option<f64>, n: usize, note: &str| {
            out.push(CohortRow::new("phase_summary", &g, metric, value, n, note));
        };

        let cov = col(|r| r.coverage);
        push("coverage_mean", Some(mean(&cov)), n, "percent of maze explored");
        push("coverage_median", median(&cov), n, "");
        let crossed = col(|r| r.cells_crossed as f64);
        push("cells_crossed_mean", Some(mean(&crossed)), n, "");
        push("cells_crossed_median", median(&crossed), n, "");
        let rex = col(|r| r.re_exploration);
        push("re_exploration_mean", Some(mean(&rex)), n, "percent of maze re-explored");
        let dur = col(|r| r.duration_ms as f64);
        push("duration_ms_mean", Some(mean(&dur)), n, "");

        let with_goal: Vec<&SessionRow> = ms.iter().map(|m| &m.row).filter(|r| r.dnf.is_some()).collect();
        if !with_goal.is_empty() {
            let finished: Vec<f64> = with_goal.iter().filter_map(|r| r.steps_to_goal).map(|s| s as f64).collect();
            let dnf = with_goal.len() - finished.len();
            let note = if finished.is_empty() { "no finishers" } else { "finishers only" };
            push("steps_to_goal_mean", (!finished.is_empty()).then(|| mean(&finished)), finished.len(), note);
            push("steps_to_goal_median", median(&finished), finished.len(), note);
            push("dnf_rate", Some(dnf as f64 / with_goal.len() as f64), with_goal.len(), "");
        }

        let cons = col(|r| r.consistency_fraction);
        push("consistency_mean", Some(mean(&cons)), n, "mean of per-phase fractions");
        let decisions: usize = ms.iter().map(|m| m.consistency.decisions.len()).sum();
        push(
            "consistency_pooled",
            pooled_fraction(ms.iter().map(|m| &m.consistency)),
            decisions,
            "consistent decisions over all decisions",
        );
    }
}

fn compare(section: &str, group: &str, metric: &str, a: &[f64], b: &[f64], out: &mut Vec<CohortRow>) {
    let n = a.len() + b.len();
    if a.is_empty() || b.is_empty() {
        out.push(CohortRow::new(section, group, &format!("{metric}_p"), None, n, insufficient(1, a.len().min(b.len()))));
        return;
    }
    let perm = permutation_test_detailed(a, b, PERMUTATION_ITERATIONS, PERMUTATION_SEED).expect("finite non-empty groups");
    let method = match perm.method {
        super::PermutationMethod::Exact { .. } => "exact permutation",
        super::PermutationMethod::MonteCarlo { .. } => "monte carlo permutation",
    };
    out.push(CohortRow::new(section, group, &format!("{metric}_p"), Some(perm.p_value), n, method));
    out.push(CohortRow::new(section, group, &format!("{metric}_mean_difference"), Some(perm.observed), n, ""));
    match welch_t(a, b) {
        Some(w) => {
            out.push(CohortRow::new(section, group, &format!("{metric}_welch_t"), Some(w.t), n, ""));
            out.push(CohortRow::new(section, group, &format!("{metric}_welch_df"), Some(w.df), n, ""));
        }
        None => out.push(CohortRow::new(section, group, &format!("{metric}_welch_t"), None, n, "undefined: needs two values per group and nonzero variance")),
    }
}

fn consistency_test(metrics: &[PhaseMetrics], out: &mut Vec<CohortRow>) {
    let frac = |phase| select(metrics, "standard", phase).iter().map(|m| m.row.consistency_fraction).collect::<Vec<_>>();
    compare("consistency_test", "standard/A_vs_B", "consistency", &frac("A"), &frac("B"), out);
}

fn dense_vs_sparse(metrics: &[PhaseMetrics], out: &mut Vec<CohortRow>) {
    let mut phases: Vec<&str> = metrics
        .iter()
        .filter(|m| m.row.condition == "dense" || m.row.condition == "sparse")
        .map(|m| m.row.phase.as_str())
        .collect();
    phases.sort();
    phases.dedup();
    if phases.is_empty() {
        out.push(CohortRow::new("dense_vs_sparse", "-", "coverage_p", None, 0, insufficient(1, 0)));
        return;
    }
    for phase in phases {
        let dense = select(metrics, "dense", phase);
        let sparse = select(metrics, "sparse", phase);
        let group = phase.to_string();
        let take = |ms: &[&PhaseMetrics], f: fn(&SessionRow) -> Option<f64>| ms.iter().filter_map(|m| f(&m.row)).collect::<Vec<f64>>();
        let fields: [(&str, fn(&SessionRow) -> Option<f64>); 5] = [
            ("coverage", |r| Some(r.coverage)),
            ("cells_crossed", |r| Some(r.cells_crossed as f64)),
            ("re_exploration", |r| Some(r.re_exploration)),
            ("steps_to_goal", |r| r.steps_to_goal.map(|s| s as f64)),
            ("consistency", |r| Some(r.consistency_fraction)),
        ];
        for (name, f) in fields {
            compare("dense_vs_sparse", &group, name, &take(&dense, f), &take(&sparse, f), out);
        }
    }
}
