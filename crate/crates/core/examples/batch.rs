//! Run a small manifest of agent sessions in parallel, then summarise the
//! results with the same analysis the `analyze` command uses.

use explab::protocol::batch_run;

const MANIFEST: &str = "\
# kind, seed and experiment are required; the rest have defaults
kind=dfs seed=1 experiment=1
kind=random seed=2 experiment=1 budget=200
kind=qlearn seed=3 experiment=2 condition=dense
kind=qlearn seed=3 experiment=2 condition=sparse
kind=countbonus seed=4 experiment=2 condition=sparse mazes=exp2b,exp2a
kind=dfs seed=5 experiment=1 maze=not-a-maze.txt
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = tempfile::tempdir()?;
    for r in batch_run(MANIFEST, std::path::Path::new("."), out.path())? {
        match r.result {
            Ok(dir) => println!("line {}: {}", r.line, dir.file_name().unwrap().to_string_lossy()),
            Err(e) => println!("line {}: error: {e}", r.line),
        }
    }
    let (rows, cohort, problems) = explab::cli::analyze_dir(out.path())?;
    println!("\n{} phase rows, {} cohort rows, {} problems", rows.len(), cohort.len(), problems.len());
    for c in cohort.iter().filter(|c| c.section == "phase_summary" && c.metric == "coverage_mean") {
        println!("  {:<28} coverage mean {}", c.group, c.value.map_or("-".into(), |v| format!("{v:.3}")));
    }
    Ok(())
}
