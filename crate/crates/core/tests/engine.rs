mod common;

use proptest::prelude::*;
use serde_json::json;

use common::{pod, single_a_node, Builder, WF1};
use kubesim::bundled;
use kubesim::cluster::{EventKind, PodRequest, Simulation};
use kubesim::ids::PodId;
use kubesim::metrics::{EntityKey, EntityKind};
use kubesim::model::{CostTable, Knot, ServiceCost};
use kubesim::units::{Megabytes, Millicores};

fn one_pod(limit: f64, granularity: u32, cpu: f64, mem: f64) -> kubesim::scenario::Scenario {
    Builder::new("one-pod", 10)
        .image("img", cpu, mem, &[("svc", 1)])
        .node("n1", "img")
        .service("svc", 1, pod(limit.min(10.0), limit, granularity))
        .workflow("wf", &["svc"])
        .build()
}

fn request(cost: i64, mem: i64) -> PodRequest {
    PodRequest {
        service: "svc".into(),
        cost: Millicores::from_whole(cost),
        memory: Megabytes::from_whole(mem),
        rps_quota: 1,
    }
}

fn pod_cpu(sim: &Simulation, name: &str) -> Vec<f64> {
    sim.series()
        .get(&EntityKey::new(EntityKind::Pod, name))
        .unwrap()
        .cpu
        .iter()
        .map(|m| m.as_f64())
        .collect()
}

#[test]
fn pod_limit_spreads_a_request_over_ticks() {
    // cost 100 in 2 steps of 50, but only 50 per monitor cycle: one step a tick
    let scenario = one_pod(50.0, 2, 4000.0, 1000.0);
    let table = CostTable::new();
    let mut sim = Simulation::new(&scenario, &table);
    sim.submit(PodId(0), request(100, 0));
    sim.run_for(3);
    assert_eq!(pod_cpu(&sim, "svc-0"), vec![50.0, 50.0, 0.0]);
    assert_eq!(sim.ledger().completed_requests, 1);
}

#[test]
fn node_budget_defers_whole_steps() {
    // steps of 30 against a node budget of 100: three steps fit, the fourth waits
    let scenario = one_pod(1000.0, 4, 100.0, 1000.0);
    let table = CostTable::new();
    let mut sim = Simulation::new(&scenario, &table);
    sim.submit(PodId(0), request(120, 0));
    sim.run_for(2);
    assert_eq!(pod_cpu(&sim, "svc-0"), vec![90.0, 30.0]);
}

#[test]
fn zero_cost_completes_in_the_same_tick() {
    let scenario = one_pod(50.0, 4, 4000.0, 1000.0);
    let table = CostTable::new();
    let mut sim = Simulation::new(&scenario, &table);
    sim.submit(PodId(0), request(0, 40));
    sim.tick();
    assert_eq!(sim.ledger().completed_requests, 1);
    assert_eq!(sim.nodes()[0].free_mem, Megabytes::from_whole(1000));
    sim.check_invariants().unwrap();
}

#[test]
fn memory_is_held_until_the_request_finishes() {
    let scenario = one_pod(50.0, 2, 4000.0, 1000.0);
    let table = CostTable::new();
    let mut sim = Simulation::new(&scenario, &table);
    sim.submit(PodId(0), request(100, 300));
    sim.tick();
    let node = EntityKey::new(EntityKind::Node, "n1");
    assert_eq!(sim.series().get(&node).unwrap().mem[0], Megabytes::from_whole(300));
    sim.tick();
    assert_eq!(sim.series().get(&node).unwrap().mem[1], Megabytes::ZERO);
    sim.check_invariants().unwrap();
}

fn memory_table(cpu: f64, mem: f64) -> CostTable {
    let mut t = CostTable::new();
    t.push_knot(
        "img",
        "wf",
        Knot::new(1, [ServiceCost { service: "svc".into(), cpu_millicores: cpu, memory_mb: Some(mem) }]),
    );
    t
}

fn memory_bound(cooldown: u64) -> kubesim::scenario::Scenario {
    // 100 MB nodes and one pod on each; a batch of 2 RPS sends one request to
    // each pod
    let mut b = Builder::new("mem", 20)
        .image("img", 4000.0, 100.0, &[("svc", 1)])
        .node("n1", "img")
        .node("n2", "img")
        .service(
            "svc",
            2,
            json!({"monitor_cycle": 1, "memory_cooldown": cooldown, "cpu_request": 10,
                   "cpu_limit": 50, "cost_granularity": 2}),
        )
        .workflow("wf", &["svc"]);
    b = b.client(json!({"workflow": "wf", "rps": 2, "batches": 1}));
    b = b.client(json!({"workflow": "wf", "rps": 2, "batches": 1, "start": 1}));
    b.build()
}

#[test]
fn pending_memory_waits_for_release() {
    // 60 MB and 100 millicores per request at 50 per tick: two ticks each
    let scenario = memory_bound(0);
    let table = memory_table(100.0, 60.0);
    let mut sim = Simulation::new(&scenario, &table);
    let first = sim.tick();
    assert!(first.is_empty());
    // the second batch finds 40 MB free on each node and queues
    let second = sim.tick();
    let deferred = second
        .iter()
        .filter(|e| matches!(e.kind, EventKind::MemoryDeferred { .. }))
        .count();
    assert_eq!(deferred, 2);
    for _ in 0..4 {
        sim.tick();
        sim.check_invariants().unwrap();
    }
    let out = sim.finish();
    assert_eq!(out.ledger.completed_requests, 4);
    assert_eq!(out.backlog.requests, 0);
}

#[test]
fn memory_cooldown_reschedules_the_pod() {
    // requests of 150 at 50 per tick hold their memory through tick 2; the
    // second batch queues at t=1 and, with a cool-down of 1, moves at t=2
    let scenario = memory_bound(1);
    let table = memory_table(150.0, 60.0);
    let mut sim = Simulation::new(&scenario, &table);
    let mut reschedules = Vec::new();
    for _ in 0..6 {
        for e in sim.tick() {
            if let EventKind::MemoryReschedule { pod, .. } = &e.kind {
                reschedules.push((e.time, pod.clone()));
            }
        }
        sim.check_invariants().unwrap();
    }
    assert_eq!(reschedules.len(), 2, "{reschedules:?}");
    assert!(reschedules.iter().all(|(t, _)| *t == 2));
    let ledger = sim.ledger();
    // a move drops all of the pod's work: the queued request (150) and the
    // running one, which burnt 50 then 25 (up to its step boundary at 75)
    assert_eq!(ledger.abandoned_consumed, Millicores::from_whole(2 * 75));
    assert_eq!(ledger.abandoned_remaining, Millicores::from_whole(2 * (150 + 75)));
}

#[test]
fn zero_cooldown_never_reschedules() {
    let scenario = memory_bound(0);
    let table = memory_table(150.0, 60.0);
    let mut sim = Simulation::new(&scenario, &table);
    sim.run_for(10);
    assert!(!sim
        .events()
        .iter()
        .any(|e| matches!(e.kind, EventKind::MemoryReschedule { .. })));
}

#[test]
fn a_900_tick_run_samples_every_tick() {
    let scenario = single_a_node("workflow1", &WF1, 25, 900);
    let table = bundled::cost_table();
    let mut sim = Simulation::new(&scenario, &table);
    sim.run_for(900);
    let series = sim.series();
    assert_eq!(series.len(), 900);
    assert!(series.entities().all(|(_, s)| s.cpu.len() == 900 && s.mem.len() == 900));
    assert_eq!(kubesim::metrics::trimmed_window(900), 45..855);
}

#[test]
fn single_node_frontend_matches_the_table() {
    let scenario = single_a_node("workflow1", &WF1, 25, 20);
    let table = bundled::cost_table();
    let mut sim = Simulation::new(&scenario, &table);
    sim.run_for(20);
    let frontend = sim
        .series()
        .get(&EntityKey::new(EntityKind::Service, "frontend"))
        .unwrap();
    // below saturation every batch finishes within its tick
    assert!(frontend.cpu.iter().all(|&c| c == Millicores::from_whole(526)));
}

#[test]
fn unroutable_services_are_reported() {
    let scenario = Builder::new("gap", 2)
        .image("img", 1000.0, 1000.0, &[("a", 1)])
        .node("n1", "img")
        .service("a", 1, pod(10.0, 100.0, 1))
        .service("b", 0, pod(10.0, 100.0, 1))
        .workflow("wf", &["a", "b"])
        .client(json!({"workflow": "wf", "rps": 5}))
        .build();
    let table = CostTable::new().with_knot("img", "wf", 5, [("a", 50.0), ("b", 50.0)]);
    let mut sim = Simulation::new(&scenario, &table);
    let events = sim.tick();
    assert!(events
        .iter()
        .any(|e| matches!(&e.kind, EventKind::Unroutable { service, .. } if service == "b")));
    assert_eq!(sim.ledger().completed_requests, 1);
}

#[test]
fn extrapolation_warns_once_per_curve() {
    let scenario = single_a_node("workflow1", &WF1, 400, 5);
    let table = bundled::cost_table();
    let mut sim = Simulation::new(&scenario, &table);
    sim.run_for(5);
    let warnings = sim
        .events()
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Extrapolated { .. }))
        .count();
    assert_eq!(warnings, 1);
}

#[test]
fn overload_builds_a_backlog_without_breaking_accounting() {
    // 400 RPS on one node wants far more than 4000 millicores per tick
    let scenario = single_a_node("workflow1", &WF1, 400, 60);
    let table = bundled::cost_table();
    let mut sim = Simulation::new(&scenario, &table);
    for _ in 0..60 {
        sim.tick();
        sim.check_invariants().unwrap();
        let node = &sim.nodes()[0];
        assert!(node.granted_this_tick <= node.cpu_capacity());
    }
    let out = sim.finish();
    assert!(out.backlog.requests > 0);
    assert!(out.ledger.granted > out.ledger.completed);
}

fn scenario_strategy() -> impl Strategy<Value = (u32, u32, f64, f64, u32, u64, f64, u64)> {
    (
        1u32..4,        // nodes
        1u32..4,        // pods per node
        200.0f64..4000.0, // node cpu
        50.0f64..2000.0,  // node memory
        1u32..6,        // granularity
        1u64..60,       // rps
        1.0f64..400.0,  // memory cost at the knot
        0u64..4,        // cool-down
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn invariants_hold_every_tick(
        (nodes, pods, cpu, mem, g, rps, mem_cost, cooldown) in scenario_strategy(),
        cost in 1.0f64..3000.0,
        limit in 20.0f64..1500.0,
    ) {
        let mut b = Builder::new("prop", 25).image("img", cpu, mem, &[("svc", pods)]);
        for n in 0..nodes {
            b = b.node(&format!("n{n}"), "img");
        }
        let request = (cpu / f64::from(pods) / 2.0).min(limit).max(1.0).floor();
        let scenario = b
            .service("svc", nodes * pods, json!({"monitor_cycle": 2, "memory_cooldown": cooldown,
                "cpu_request": request, "cpu_limit": limit, "cost_granularity": g}))
            .workflow("wf", &["svc"])
            .client(json!({"workflow": "wf", "rps": rps, "delay": 2}))
            .build();
        let mut table = CostTable::new();
        table.push_knot("img", "wf", Knot::new(10, [ServiceCost {
            service: "svc".into(), cpu_millicores: cost, memory_mb: Some(mem_cost) }]));
        let mut sim = Simulation::new(&scenario, &table);
        for _ in 0..25 {
            sim.tick();
            prop_assert!(sim.check_invariants().is_ok(), "{:?}", sim.check_invariants());
        }
    }
}
