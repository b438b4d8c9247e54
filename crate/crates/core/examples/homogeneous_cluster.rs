//! Runs a mixed-workflow profile on four identical nodes and prints the
//! per-node and per-service averages over the trimmed window.
//!
//! `cargo run --example homogeneous_cluster -- homogeneous-T2`

use kubesim::bundled;
use kubesim::scenario::run_scenario;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "homogeneous-P1".into());
    let Some(scenario) = bundled::scenario(&name) else {
        eprintln!("unknown scenario `{name}`; try one of:");
        for (n, _) in bundled::SCENARIOS {
            eprintln!("  {n}");
        }
        std::process::exit(1);
    };
    let table = bundled::cost_table();
    let result = run_scenario(&scenario, &table).expect("bundled table covers bundled scenarios");
    let s = &result.summary;

    println!("{}", scenario.description.as_deref().unwrap_or(&scenario.name));
    println!("window {}..{} of {} ticks\n", s.window.start, s.window.end, s.ticks);
    for (node, avg) in &s.nodes {
        println!("{node:<24} {:>12.3} millicores", avg.cpu_millicores);
    }
    println!();
    for (service, avg) in &s.services {
        println!("{service:<24} {:>12.3} millicores", avg.cpu_millicores);
    }
    println!("\nmax/min node ratio {:.6}, completed requests {}", s.balance.ratio(), result.ledger.completed_requests);
}
