//! Analyse a directory of session logs and print the two CSV reports.
//! Defaults to the bundled test corpus.

use std::path::PathBuf;

use explab::analysis::{write_cohort_csv, write_session_csv, SessionRow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/corpus"));
    let (metrics, cohort, problems) = explab::cli::analyze_dir(&dir)?;
    for p in &problems {
        eprintln!("skipped: {p}");
    }
    let rows: Vec<SessionRow> = metrics.into_iter().map(|m| m.row).collect();
    let mut out = std::io::stdout().lock();
    write_session_csv(&rows, &mut out)?;
    println!();
    write_cohort_csv(&cohort, &mut out)?;
    Ok(())
}
