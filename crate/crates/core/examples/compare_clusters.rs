//! Runs the three heterogeneous cluster configurations concurrently and
//! ranks them by how evenly they spread the load over their workers.

use kubesim::bundled;
use kubesim::scenario::{compare_scenarios, run_many};

fn main() {
    let table = bundled::cost_table();
    let scenarios: Vec<_> = ["mixed-1B3C", "mixed-2B2C", "mixed-3B1C"]
        .iter()
        .map(|n| bundled::scenario(n).unwrap())
        .collect();
    let jobs: Vec<_> = scenarios.iter().map(|s| (s, &table)).collect();
    let summaries: Vec<_> = run_many(&jobs)
        .into_iter()
        .map(|r| r.expect("covered").summary)
        .collect();

    for s in &summaries {
        let loads: Vec<String> = s
            .nodes
            .iter()
            .map(|(n, a)| format!("{n}={:.0}", a.cpu_millicores))
            .collect();
        println!("{:<12} {}", s.scenario, loads.join("  "));
    }
    println!("\nrank  scenario      max/min   stddev  total");
    for r in compare_scenarios(&summaries).ranking {
        println!(
            "{:>4}  {:<12} {:>8.4} {:>8.2} {:>7.0}",
            r.rank, r.scenario, r.max_min_ratio, r.stddev, r.total_cpu
        );
    }
}
