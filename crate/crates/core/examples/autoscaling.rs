//! A single frontend service under a load ramp with the autoscaler on. Pods
//! are added while utilization stays above the upscale threshold and drained
//! once the load drops.

use kubesim::cluster::{EventKind, Simulation};
use kubesim::model::CostTable;
use kubesim::scenario::Scenario;

const SCENARIO: &str = r#"{
  "format_version": 1,
  "name": "ramp",
  "duration_ticks": 300,
  "images": [
    {"id": "small", "cpu_capacity": 4000, "mem_capacity": 16000, "pods": {"frontend": 1}}
  ],
  "nodes": [{"id": "n1", "image": "small"}, {"id": "n2", "image": "small"}],
  "services": [{
    "name": "frontend", "starting_pods": 2, "min_pods": 2, "max_pods": 8,
    "autoscaler": {"scaler_cycle": 10, "upscale_threshold": 0.8, "downscale_threshold": 0.2, "downscale_period": 2},
    "pod": {"monitor_cycle": 1, "memory_cooldown": 0, "cpu_request": 200, "cpu_limit": 400, "cost_granularity": 4}
  }],
  "workflows": [{"name": "browse", "services": ["frontend"]}],
  "clients": [
    {"workflow": "browse", "rps": 40, "batches": 60},
    {"workflow": "browse", "rps": 60, "start": 40, "batches": 80}
  ],
  "options": {"autoscaler": true}
}"#;

fn main() {
    let scenario = Scenario::from_json(SCENARIO).unwrap();
    // 10 millicores per request
    let table = CostTable::new().with_knot("small", "browse", 10, [("frontend", 100.0)]);
    let mut sim = Simulation::new(&scenario, &table);
    for _ in 0..scenario.duration_ticks {
        for e in sim.tick() {
            if matches!(e.kind, EventKind::ScaleUp { .. } | EventKind::ScaleDown { .. } | EventKind::PodRemoved { .. }) {
                let running = sim.pods().filter(|p| p.is_running()).count();
                println!("{e}  (running pods: {running})");
            }
        }
    }
}
