//! Run one agent through both experiment protocols on the built-in mazes and
//! print the per-phase metrics. Pass `--keep DIR` to write the session logs.

use std::path::PathBuf;

use explab::agents::{AgentConfig, AgentKind};
use explab::protocol::{builtin_maze, run_experiment1, run_experiment2, Condition, SessionLog};

fn show(log: &SessionLog) -> Result<(), Box<dyn std::error::Error>> {
    println!("{} ({})", log.session_id, log.subject.label());
    for m in log.phase_metrics()? {
        let r = &m.row;
        let goal = match (r.dnf, r.steps_to_goal) {
            (Some(true), _) => "dnf".to_string(),
            (_, Some(n)) => n.to_string(),
            _ => "-".to_string(),
        };
        println!(
            "  phase {}: coverage {:.3}, steps to goal {goal}, consistency {:.3} over {} decisions",
            r.phase, r.coverage, r.consistency_fraction, r.decision_count
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let keep: Option<PathBuf> = std::env::args().skip_while(|a| a != "--keep").nth(1).map(PathBuf::from);
    let exp1 = builtin_maze("exp1").ok_or("missing built-in maze")?;
    let mazes = [builtin_maze("exp2a").ok_or("missing")?, builtin_maze("exp2b").ok_or("missing")?];

    let mut logs = vec![run_experiment1(&AgentConfig::new(AgentKind::Dfs, 1), exp1, None)?];
    for condition in [Condition::Dense, Condition::Sparse] {
        logs.push(run_experiment2(&AgentConfig::new(AgentKind::QLearn, 1), condition, mazes.clone(), None)?);
    }
    for log in &logs {
        show(log)?;
        if let Some(dir) = &keep {
            println!("  wrote {}", log.write_dir(dir)?.display());
        }
    }
    Ok(())
}
