use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kubesim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kubesim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
        .display()
        .to_string()
}

fn simulate(out: &Path, scenario: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate",
        "--scenario",
        scenario,
        "--cost-table",
    ];
    let table = fixture("cost_tables/online_boutique.csv");
    let out = out.display().to_string();
    args.push(&table);
    args.extend(["--out", &out]);
    args.extend(extra);
    kubesim(&args)
}

#[test]
fn simulate_compare_validate() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("p1");
    let p2 = dir.path().join("p2");
    let o = simulate(&p1, &fixture("scenarios/homogeneous-P1.json"), &["--ticks", "100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = simulate(&p2, &fixture("scenarios/homogeneous-P2.json"), &["--ticks", "100", "--no-autoscaler", "--wf-mix", "additive"]);
    assert_eq!(o.status.code(), Some(0));
    let series = std::fs::read_to_string(p1.join("series.csv")).unwrap();
    assert_eq!(series.lines().last().unwrap().split(',').next(), Some("99"));

    let cmp = dir.path().join("cmp");
    let o = kubesim(&["compare", "--out", cmp.to_str().unwrap(), p2.to_str().unwrap(), p1.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let ranking = std::fs::read_to_string(cmp.join("ranking.csv")).unwrap();
    assert_eq!(ranking.lines().nth(1).unwrap().split(',').nth(1), Some("homogeneous-P1"));

    let measured = dir.path().join("m.csv");
    std::fs::write(
        &measured,
        "experiment,entity_kind,entity_id,cpu_millicores,repetitions\nP1,node,worker-1,1793.195,5\n",
    )
    .unwrap();
    let o = kubesim(&["validate", "--result", p1.to_str().unwrap(), "--measured", measured.to_str().unwrap(), "--max-error", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("# mape 0.000000"));

    std::fs::write(
        &measured,
        "experiment,entity_kind,entity_id,cpu_millicores,repetitions\nP1,node,worker-1,1500,5\n",
    )
    .unwrap();
    let o = kubesim(&["validate", "--result", p1.to_str().unwrap(), "--measured", measured.to_str().unwrap(), "--max-error", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_cost_table_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("bad.csv");
    std::fs::write(&table, "image,workflow,rps,service,cpu_millicores\nA,workflow1,25,frontend,-1\n").unwrap();
    let scenario = fixture("scenarios/homogeneous-P1.json");
    let out = dir.path().join("out");
    let o = kubesim(&[
        "simulate",
        "--scenario",
        &scenario,
        "--cost-table",
        table.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing: PathBuf = dir.path().join("nope.json");
    let o = simulate(&dir.path().join("o"), missing.to_str().unwrap(), &[]);
    assert_eq!(o.status.code(), Some(1));
    // the excerpt lacks the B, C and H curves
    let o = kubesim(&[
        "simulate",
        "--scenario",
        &fixture("scenarios/mixed-1B3C.json"),
        "--cost-table",
        &fixture("cost_tables/type_a_25rps.csv"),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not cover"));
}
