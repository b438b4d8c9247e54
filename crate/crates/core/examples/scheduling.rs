//! Places pods with and without a placement rule and prints where each went.

use kubesim::control::{NodeReservation, Placement, PlacementRules, Scheduler};
use kubesim::ids::NodeId;
use kubesim::units::Millicores;

fn nodes(n: usize) -> Vec<NodeReservation> {
    (0..n)
        .map(|i| NodeReservation {
            node: NodeId(i),
            capacity: Millicores::from_whole(4000),
            reserved: Millicores::ZERO,
        })
        .collect()
}

fn main() {
    // ten frontend pods pinned to nodes 0..4 in turn
    let rules = PlacementRules::new().with_rule("frontend", (0..4).map(NodeId).collect());
    let mut scheduler = Scheduler::new(rules);
    let mut cluster = nodes(4);
    let mut counts = [0; 4];
    for _ in 0..10 {
        if let Placement::Placed(node) = scheduler.deploy_pod("frontend", Millicores::from_whole(100), &mut cluster) {
            counts[node.0] += 1;
        }
    }
    println!("rule-based frontend placement: {counts:?}");

    // without a rule the pod goes to the node with the most unreserved CPU
    let mut scheduler = Scheduler::new(PlacementRules::new());
    let mut cluster = nodes(3);
    cluster[0].reserved = Millicores::from_whole(1500);
    cluster[2].reserved = Millicores::from_whole(200);
    for request in [900, 900, 900, 3000, 3000] {
        let request = Millicores::from_whole(request);
        let outcome = scheduler.deploy_pod("cartservice", request, &mut cluster);
        let free: Vec<String> = cluster.iter().map(|n| format!("{:.0}", n.available().as_f64())).collect();
        println!("request {:>5.0} -> {outcome:?}; free now [{}]", request.as_f64(), free.join(", "));
    }
}
