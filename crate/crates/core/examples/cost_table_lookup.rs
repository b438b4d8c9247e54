//! Reads the bundled cost table and shows how per-service costs fall out of
//! it: exact knots, interpolation between knots, the origin segment below the
//! first knot, and the mixed-workflow combination rules.

use std::collections::BTreeMap;

use kubesim::bundled;
use kubesim::model::{build_service_consumption, interpolate_cost, Region, Resource, WorkflowMix};

fn main() {
    let table = bundled::cost_table();

    println!("image A, workflow1, frontend:");
    for rps in [10.0, 25.0, 37.5, 50.0, 150.0, 180.0] {
        let l = table.lookup("A", "workflow1", "frontend", rps, Resource::Cpu).unwrap();
        let region = match l.region {
            Region::AtKnot => "knot",
            Region::Between => "interpolated",
            Region::BelowFirst => "origin segment",
            Region::AboveLast => "extrapolated",
        };
        println!("  {rps:>6} RPS -> {:>9.3} millicores ({region})", l.value);
    }

    let wf3 = interpolate_cost(&table, "A", "workflow3", "productcatalogservice", 25.0).unwrap();
    println!("\nproductcatalogservice under workflow3 at 25 RPS: {wf3} millicores");

    // frontend serving 30 RPS of workflow1 and 20 RPS of workflow3 on one node
    let mut rps = BTreeMap::new();
    rps.insert(
        "frontend".to_string(),
        BTreeMap::from([("workflow1".to_string(), 30), ("workflow3".to_string(), 20)]),
    );
    for mix in [WorkflowMix::Share, WorkflowMix::Additive] {
        let cost = build_service_consumption(&table, "A", &rps, mix).unwrap();
        println!("mixed traffic, {mix:>8}: frontend {:.3} millicores", cost["frontend"]);
    }
}
