//! Scores a prediction against measured averages. The measurements here are
//! made up for illustration; real ones come from stress tests on a cluster.

use kubesim::bundled;
use kubesim::metrics::EntityKind;
use kubesim::scenario::{run_scenario, validate_against_measurements, MeasuredDataset};

fn main() {
    let table = bundled::cost_table();
    let scenario = bundled::scenario("homogeneous-P2").unwrap();
    let prediction = run_scenario(&scenario, &table).unwrap().summary;

    let mut measured = MeasuredDataset::default();
    for (node, cpu) in [("worker-1", 2480.0), ("worker-2", 2530.0), ("worker-3", 2610.0), ("worker-4", 2455.0)] {
        measured.push("P2", EntityKind::Node, node, cpu, 5);
    }
    measured.push("P2", EntityKind::Service, "frontend", 4020.0, 5);
    measured.push("P2", EntityKind::Service, "istio-proxy", 310.0, 5);

    let report = validate_against_measurements(&prediction, &measured).unwrap();
    for e in &report.entities {
        println!(
            "{:<8} {:<12} predicted {:>9.1}  measured {:>7.1}  error {:>6.2}%",
            e.entity_kind.as_str(),
            e.entity_id,
            e.predicted,
            e.measured,
            100.0 * e.relative_error
        );
    }
    for (kind, id) in &report.uncovered {
        println!("not predicted: {kind} {id}");
    }
    println!("MAPE {:.2}%", 100.0 * report.mape);
}
