#![allow(dead_code)]

use serde_json::{json, Value};

use kubesim::scenario::Scenario;

/// One image `img` with the given pods, `nodes` copies of it, one service per
/// entry of `pods`, and a single workflow over every service.
pub struct Builder {
    pub doc: Value,
}

impl Builder {
    pub fn new(name: &str, ticks: u64) -> Self {
        Self {
            doc: json!({
                "format_version": 1,
                "name": name,
                "duration_ticks": ticks,
                "images": [],
                "nodes": [],
                "services": [],
                "workflows": [],
                "clients": [],
            }),
        }
    }

    pub fn image(mut self, id: &str, cpu: f64, mem: f64, pods: &[(&str, u32)]) -> Self {
        let pods: serde_json::Map<String, Value> = pods.iter().map(|(s, n)| (s.to_string(), json!(n))).collect();
        self.doc["images"]
            .as_array_mut()
            .unwrap()
            .push(json!({"id": id, "cpu_capacity": cpu, "mem_capacity": mem, "pods": pods}));
        self
    }

    pub fn node(mut self, id: &str, image: &str) -> Self {
        self.doc["nodes"].as_array_mut().unwrap().push(json!({"id": id, "image": image}));
        self
    }

    pub fn service(mut self, name: &str, pods: u32, pod: Value) -> Self {
        self.doc["services"].as_array_mut().unwrap().push(json!({
            "name": name, "starting_pods": pods, "min_pods": pods, "max_pods": pods, "pod": pod
        }));
        self
    }

    pub fn workflow(mut self, name: &str, services: &[&str]) -> Self {
        self.doc["workflows"]
            .as_array_mut()
            .unwrap()
            .push(json!({"name": name, "services": services}));
        self
    }

    pub fn client(mut self, client: Value) -> Self {
        self.doc["clients"].as_array_mut().unwrap().push(client);
        self
    }

    pub fn build(self) -> Scenario {
        Scenario::from_json(&self.doc.to_string()).expect("test scenario is valid")
    }
}

pub fn pod(request: f64, limit: f64, granularity: u32) -> Value {
    json!({
        "monitor_cycle": 1,
        "memory_cooldown": 0,
        "cpu_request": request,
        "cpu_limit": limit,
        "cost_granularity": granularity
    })
}

/// A single type-A node driven by one workflow at a constant rate.
pub fn single_a_node(workflow: &str, services: &[&str], rps: u64, ticks: u64) -> Scenario {
    let a_pods = [
        ("frontend", 2),
        ("currencyservice", 2),
        ("adservice", 1),
        ("cartservice", 1),
        ("productcatalogservice", 2),
        ("redis-cart", 1),
        ("recommendationservice", 2),
    ];
    let mut b = Builder::new("single-a", ticks)
        .image("A", 4000.0, 16000.0, &a_pods)
        .node("worker-1", "A");
    for (s, n) in a_pods {
        b = b.service(s, n, pod(100.0, 1000.0, 10));
    }
    b.workflow(workflow, services)
        .client(json!({"workflow": workflow, "rps": rps}))
        .build()
}

pub const WF1: [&str; 6] = [
    "frontend",
    "currencyservice",
    "adservice",
    "cartservice",
    "productcatalogservice",
    "redis-cart",
];
