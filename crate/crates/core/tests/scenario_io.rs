mod common;

use serde_json::{json, Value};

use common::{pod, Builder};
use kubesim::bundled;
use kubesim::metrics::EntityKind;
use kubesim::model::{CostTable, Resource};
use kubesim::scenario::{
    check_coverage, compare_scenarios, load_summary, parse_cost_table_str, parse_scenario, read_series,
    run_scenario, serialize_cost_table, summarize, validate_against_measurements, write_result,
    MeasuredDataset, Scenario,
};

#[test]
fn p1_has_two_clients_on_four_a_nodes() {
    let s = bundled::scenario("homogeneous-P1").unwrap();
    assert_eq!(s.clients.len(), 2);
    assert_eq!(s.nodes.len(), 4);
    assert!(s.nodes.iter().all(|n| n.image == "A"));
    let rps: Vec<(&str, u64)> = s.clients.iter().map(|c| (c.workflow.as_str(), c.rps)).collect();
    assert_eq!(rps, [("workflow1", 100), ("workflow3", 100)]);
}

#[test]
fn three_b_one_c_is_heterogeneous() {
    let s = bundled::scenario("mixed-3B1C").unwrap();
    let workers: Vec<&str> = s.nodes.iter().filter(|n| !n.helper).map(|n| n.image.as_str()).collect();
    assert_eq!(workers, ["B", "B", "B", "C"]);
    assert_eq!(s.helper_nodes(), ["helper"]);
}

#[test]
fn parse_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p1.json");
    std::fs::write(&path, bundled::SCENARIOS[0].1).unwrap();
    assert_eq!(parse_scenario(&path).unwrap().name, "homogeneous-P1");
    let err = parse_scenario(&dir.path().join("missing.json")).unwrap_err();
    assert!(err.path.ends_with("missing.json"));
}

fn p1_doc() -> Value {
    serde_json::from_str(bundled::SCENARIOS[0].1).unwrap()
}

#[test]
fn unknown_workflow_is_a_schema_error() {
    let mut doc = p1_doc();
    doc["clients"][1]["workflow"] = json!("checkout");
    let err = Scenario::from_json(&doc.to_string()).unwrap_err();
    assert_eq!(err.path, "clients[1].workflow");
}

#[test]
fn unknown_keys_are_rejected() {
    let mut doc = p1_doc();
    doc["nodes"][0]["zone"] = json!("eu");
    assert!(Scenario::from_json(&doc.to_string()).is_err());
    let mut doc = p1_doc();
    doc["extra"] = json!(1);
    assert!(Scenario::from_json(&doc.to_string()).is_err());
}

#[test]
fn bad_references_are_caught() {
    let mut doc = p1_doc();
    doc["nodes"][2]["image"] = json!("Z");
    assert_eq!(Scenario::from_json(&doc.to_string()).unwrap_err().path, "nodes[2].image");

    let mut doc = p1_doc();
    doc["format_version"] = json!(2);
    assert_eq!(Scenario::from_json(&doc.to_string()).unwrap_err().path, "format_version");

    let mut doc = p1_doc();
    doc["duration_ticks"] = json!(0);
    assert!(Scenario::from_json(&doc.to_string()).is_err());

    let mut doc = p1_doc();
    doc["placement_rules"] = json!({"frontend": ["worker-9"]});
    assert_eq!(Scenario::from_json(&doc.to_string()).unwrap_err().path, "placement_rules.frontend");
}

#[test]
fn scenario_round_trip() {
    for s in bundled::scenarios() {
        assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
    }
}

#[test]
fn cost_table_round_trip() {
    let t = bundled::cost_table();
    let text = serialize_cost_table(&t);
    let again = parse_cost_table_str(&text).unwrap();
    assert_eq!(again, t);
    assert_eq!(serialize_cost_table(&again), text);
}

#[test]
fn measured_knots_are_verbatim() {
    let t = parse_cost_table_str("image,workflow,rps,service,cpu_millicores\nA,workflow1,25,frontend,526\n").unwrap();
    assert_eq!(t.lookup("A", "workflow1", "frontend", 25.0, Resource::Cpu).unwrap().value, 526.0);
    let bundled = bundled::cost_table();
    let excerpt = bundled::excerpt_table();
    for ((image, wf), knots) in excerpt.curves() {
        for cost in &knots[0].services {
            let full = bundled.lookup(image, wf, &cost.service, 25.0, Resource::Cpu).unwrap();
            assert_eq!(full.value, cost.cpu_millicores, "{image} {wf} {}", cost.service);
        }
    }
}

#[test]
fn synthetic_knots_follow_the_manifest() {
    let manifest: Value = serde_json::from_str(bundled::COST_TABLE_MANIFEST).unwrap();
    let gen = &manifest["generator"];
    let exponent = gen["exponent"].as_f64().unwrap();
    let excerpt = bundled::excerpt_table();
    let table = bundled::cost_table();
    let knots = manifest["knots"].as_array().unwrap();
    assert_eq!(knots.len(), table.curves().map(|(_, k)| k.len()).sum::<usize>());
    for k in knots {
        let (image, wf) = (k["image"].as_str().unwrap(), k["workflow"].as_str().unwrap());
        let rps = k["rps"].as_u64().unwrap() as f64;
        let factor = gen["factor"][image][wf].as_f64().unwrap();
        let curve = table.curve(image, wf).unwrap();
        let knot = curve.iter().find(|kn| f64::from(kn.rps) == rps).unwrap();
        for cost in &knot.services {
            let base = excerpt.lookup("A", wf, &cost.service, 25.0, Resource::Cpu).unwrap().value;
            let expected = base * factor * (rps / 25.0).powf(exponent);
            assert!((cost.cpu_millicores - expected).abs() <= 5e-4, "{image} {wf} {rps} {}", cost.service);
            let per_rps = gen["per_rps_mb"][&cost.service].as_f64().unwrap();
            assert!((cost.memory_mb.unwrap() - per_rps * rps).abs() <= 5e-4);
            if !k["cpu_synthetic"].as_bool().unwrap() {
                assert_eq!(cost.cpu_millicores, base);
            }
        }
    }
}

#[test]
fn missing_curves_fail_before_running() {
    let s = bundled::scenario("mixed-2B2C").unwrap();
    let err = run_scenario(&s, &bundled::excerpt_table()).unwrap_err();
    let images: std::collections::BTreeSet<&str> = err.0.iter().map(|g| g.image.as_str()).collect();
    assert_eq!(images, ["B", "C", "H"].into());
    assert!(check_coverage(&bundled::scenario("homogeneous-P1").unwrap(), &bundled::excerpt_table()).is_ok());
}

#[test]
fn missing_service_in_a_curve_is_a_gap() {
    let s = Builder::new("gap", 3)
        .image("img", 1000.0, 1000.0, &[("a", 1), ("b", 1)])
        .node("n", "img")
        .service("a", 1, pod(10.0, 100.0, 1))
        .service("b", 1, pod(10.0, 100.0, 1))
        .workflow("wf", &["a", "b"])
        .client(json!({"workflow": "wf", "rps": 1}))
        .build();
    let table = CostTable::new().with_knot("img", "wf", 1, [("a", 5.0)]);
    let err = check_coverage(&s, &table).unwrap_err();
    assert_eq!(err.0.len(), 1);
    assert_eq!(err.0[0].service.as_deref(), Some("b"));
}

#[test]
fn no_clients_no_consumption() {
    let mut s = bundled::scenario("homogeneous-P1").unwrap();
    s.clients.clear();
    s.duration_ticks = 50;
    let r = run_scenario(&s, &bundled::cost_table()).unwrap();
    assert!(r.series.entities().all(|(_, e)| e.cpu.iter().all(|c| c.is_zero())));
    assert!(r.events.is_empty());
}

fn two_tick_one_pod() -> Scenario {
    Builder::new("tiny", 2)
        .image("img", 1000.0, 1000.0, &[("a", 1)])
        .node("n", "img")
        .service("a", 1, pod(10.0, 100.0, 1))
        .workflow("wf", &["a"])
        .client(json!({"workflow": "wf", "rps": 3}))
        .build()
}

#[test]
fn two_ticks_one_pod_two_pod_rows() {
    let table = CostTable::new().with_knot("img", "wf", 3, [("a", 30.0)]);
    let r = run_scenario(&two_tick_one_pod(), &table).unwrap();
    let csv = kubesim::scenario::series_csv(&r.series);
    let pod_rows = csv.lines().filter(|l| l.split(',').nth(1) == Some("pod")).count();
    assert_eq!(pod_rows, 2);
    assert_eq!(csv.lines().next().unwrap(), "time,entity_kind,entity_id,service,cpu_millicores,memory_mb");
}

#[test]
fn exported_series_reproduce_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["homogeneous-T1", "mixed-1B3C"] {
        let r = run_scenario(&bundled::scenario(name).unwrap(), &bundled::cost_table()).unwrap();
        let out = dir.path().join(name);
        write_result(&r, &out).unwrap();
        assert_eq!(read_series(&out.join("series.csv")).unwrap(), r.series);
        assert_eq!(load_summary(&out).unwrap(), r.summary);
        for file in ["summary.csv", "events.log", "run.json", "per_node.svg", "per_service.svg"] {
            assert!(out.join(file).exists(), "{file}");
        }
    }
}

#[test]
fn homogeneous_per_node_plot_has_coincident_lines() {
    let r = run_scenario(&bundled::scenario("homogeneous-P1").unwrap(), &bundled::cost_table()).unwrap();
    let svg = kubesim::scenario::plot_svg(&r.series, EntityKind::Node, "P1");
    let lines: Vec<&str> = svg
        .lines()
        .filter(|l| l.starts_with("<polyline"))
        .map(|l| l.split("points=\"").nth(1).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.iter().all(|p| *p == lines[0]));
}

/// Two nodes of one image, one service. Pods 1+1 split any load evenly; pods
/// 2+1 give the first node twice the second's share, a max/min ratio of 2.
fn two_nodes(name: &str, pods_per_node: [u32; 2]) -> Scenario {
    Builder::new(name, 40)
        .image("even", 4000.0, 1000.0, &[("svc", pods_per_node[1])])
        .image("heavy", 4000.0, 1000.0, &[("svc", pods_per_node[0])])
        .node("n1", "heavy")
        .node("n2", "even")
        .service("svc", pods_per_node[0] + pods_per_node[1], pod(10.0, 1000.0, 2))
        .workflow("wf", &["svc"])
        .client(json!({"workflow": "wf", "rps": 30}))
        .build()
}

#[test]
fn the_balanced_configuration_ranks_first() {
    let table = CostTable::new()
        .with_knot("even", "wf", 30, [("svc", 300.0)])
        .with_knot("heavy", "wf", 30, [("svc", 300.0)]);
    let skewed = run_scenario(&two_nodes("skewed", [2, 1]), &table).unwrap().summary;
    let balanced = run_scenario(&two_nodes("balanced", [1, 1]), &table).unwrap().summary;
    assert_eq!(skewed.balance.ratio(), 2.0);
    assert_eq!(balanced.balance.ratio(), 1.0);
    let c = compare_scenarios(&[skewed.clone(), balanced]);
    assert_eq!(c.best().unwrap().scenario, "balanced");
    assert_eq!(c.ranking[1].ratio_gap, 1.0);

    let tie = compare_scenarios(&[skewed.clone(), skewed]);
    assert_eq!(tie.ranking[1].ratio_gap, 0.0);
}

#[test]
fn overestimate_of_500_on_5500() {
    let mut summary = summarize("x", &kubesim::metrics::ConsumptionSeries::new(), &[]);
    summary.services.insert(
        "frontend".into(),
        kubesim::scenario::Averages { cpu_millicores: 6000.0, memory_mb: 0.0 },
    );
    let mut measured = MeasuredDataset::default();
    measured.push("stress", EntityKind::Service, "frontend", 5500.0, 5);
    let report = validate_against_measurements(&summary, &measured).unwrap();
    let e = report.get(EntityKind::Service, "frontend").unwrap();
    // oracle: 500 / 5500
    assert!((e.relative_error - 1.0 / 11.0).abs() < 1e-12);
}
