//! Fans one client batch out over the pods of a small cluster and shows how
//! the round-robin split turns into per-node requests.

use kubesim::ids::NodeId;
use kubesim::model::WorkflowData;
use kubesim::traffic::{balance_client_request, split_round_robin, ClientRequest, PodPlacement};

fn main() {
    println!("10 requests over 4 pods: {:?}", split_round_robin(10, 4));
    println!(" 8 requests over 4 pods: {:?}", split_round_robin(8, 4));

    // three nodes; node 0 runs two frontend pods, the others one each
    let mut placement = PodPlacement::new();
    placement.insert("frontend".into(), [(NodeId(0), 2), (NodeId(1), 1), (NodeId(2), 1)].into());
    placement.insert("currencyservice".into(), [(NodeId(1), 1), (NodeId(2), 1)].into());

    let request = ClientRequest {
        workflow: WorkflowData::new("workflow1", ["frontend", "currencyservice"]).unwrap(),
        rps: 25,
    };
    println!("\n{} RPS of {}:", request.rps, request.workflow.name);
    for (node, r) in balance_client_request(&request, &placement).unwrap() {
        println!("  {node}: {:<16} {:>3} RPS", r.service, r.rps);
    }
}
