//! Writes a full result directory (series, summary, events, plots) and reads
//! the summary back from the exported series.
//!
//! `cargo run --example export_reports -- out/p1`

use std::path::PathBuf;

use kubesim::bundled;
use kubesim::scenario::{load_summary, run_scenario, write_result};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("kubesim-homogeneous-P1"));
    let table = bundled::cost_table();
    let scenario = bundled::scenario("homogeneous-P1").unwrap();
    let result = run_scenario(&scenario, &table).unwrap();
    write_result(&result, &dir).unwrap();

    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), e.metadata().unwrap().len()))
        .collect();
    files.sort();
    println!("wrote {}", dir.display());
    for (name, len) in files {
        println!("  {name:<16} {len:>9} bytes");
    }
    let reread = load_summary(&dir).unwrap();
    println!("summary recomputed from series.csv matches: {}", reread == result.summary);
}
