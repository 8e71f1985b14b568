use std::process::{Command, Output};

use idla_core::blocks::BlockDocument;

fn idla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idla")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_is_seeded_and_emits_a_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("block.json");
    let args = ["simulate", "--graph", "cycle:10", "--process", "par", "--seed", "7"];
    let first = idla(&[&args[..], &["--emit-block", path.to_str().unwrap()]].concat());
    assert!(first.status.success());
    assert_eq!(stdout(&first), stdout(&idla(&args)));
    let result: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    let (block, timing) = BlockDocument::read(&path).unwrap().into_parts().unwrap();
    assert_eq!(block.rows(), 10);
    assert!(timing.is_none());
    assert_eq!(block.stats().total_length, result["total_length"].as_u64().unwrap());
}

#[test]
fn uniform_blocks_carry_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.json");
    let out = idla(&["simulate", "--graph", "star:5", "--process", "unif", "--emit-block", path.to_str().unwrap()]);
    assert!(out.status.success());
    let (block, timing) = BlockDocument::read(&path).unwrap().into_parts().unwrap();
    assert!(timing.unwrap().is_consistent_with(&block));
}

#[test]
fn estimate_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("cdf.dat");
    let out = idla(&[
        "estimate", "--graph", "complete:20", "--trials", "40", "--seed", "3", "--plot-data", plot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,n,origin,process,lazy,trials,seed,mean,stderr,q50,q90,q99,min,max"));
    assert!(lines.next().unwrap().starts_with("complete,20,0,seq,false,40,3,"));
    let cdf = std::fs::read_to_string(plot).unwrap();
    assert_eq!(cdf.lines().count(), 40);
    assert!(cdf.lines().last().unwrap().ends_with(" 1"));
}

#[test]
fn estimate_json_names_the_process() {
    let out = idla(&["estimate", "--graph", "cycle:6", "--process", "unif", "--continuous", "--trials", "10", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["trials"], 10);
    assert!(v.get("values").is_none());
}

#[test]
fn bounds_formats() {
    let out = idla(&["bounds", "--graph", "path:3", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], 3);
    assert_eq!(v["lower_tree"], 3.0);
    let csv = stdout(&idla(&["bounds", "--graph", "hypercube:16", "--mode", "spectral"]));
    assert!(csv.starts_with("quantity,value\nn,16\nbasic_upper,"));
}

#[test]
fn verify_exit_codes() {
    let ok = idla(&["verify", "bijection", "--graph", "complete:3", "--m-max", "5"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("[PASS] counts_equal"));
    let tight = idla(&["verify", "ratios", "--graph", "cycle:8", "--trials", "50", "--lazy-tol", "0", "--ctu-tol", "0"]);
    assert_eq!(tight.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&stdout(&idla(&["verify", "dominance", "--graph", "cycle:6", "--trials", "100", "--json"])))
            .unwrap();
    assert_eq!(report["experiment"], "dominance");
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(idla(&["simulate", "--graph", "cycle:0"]).status.code(), Some(2));
    assert_eq!(idla(&["simulate", "--graph", "cycle:5", "--origin", "9"]).status.code(), Some(2));
    assert_eq!(idla(&["verify", "ratios"]).status.code(), Some(2));
    assert_eq!(idla(&["enumerate", "--graph", "cycle:9", "--m", "3"]).status.code(), Some(2));
}

#[test]
fn enumerate_lists_blocks() {
    let out = idla(&["enumerate", "--graph", "complete:3", "--m", "3", "--kind", "par"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "{\"origin\":0,\"rows\":[[0],[0,1],[0,1,2]]}\n{\"origin\":0,\"rows\":[[0],[0,2],[0,2,1]]}\n");
}

#[test]
fn table_writes_csv_and_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let plots = dir.path().join("plots");
    let out = idla(&[
        "table", "--families", "cycle,hypercube", "--sizes", "8,16", "--trials", "10", "--seed", "1",
        "--out", csv.to_str().unwrap(), "--plot-data", plots.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    let seq = std::fs::read_to_string(plots.join("hypercube_seq.dat")).unwrap();
    assert_eq!(seq.lines().map(|l| l.split(' ').next().unwrap()).collect::<Vec<_>>(), ["8", "16"]);
}
