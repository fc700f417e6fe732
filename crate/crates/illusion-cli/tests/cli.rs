//! End-to-end checks of the command surface: exit codes, JSON outputs,
//! determinism, and the export/ingest round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use illusion_core::cnf::{is_2p2n, parse_dimacs};
use illusion_core::io;
use illusion_core::plurality::separating_example;

fn illusion(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_illusion"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_minority_fixture(dir: &Path) -> String {
    let g = illusion_core::fixtures::minority_fixture();
    let path = dir.join("minority_fixture.json");
    fs::write(&path, io::labelled_to_json(&g)).unwrap();
    path.to_str().unwrap().to_string()
}

fn write_separating_example(dir: &Path) -> String {
    let (sn, ml) = separating_example();
    let path = dir.join("separating.json");
    fs::write(&path, io::network_to_json(&sn, Some(ml.colours()))).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn analyze_minority_fixture_full_illusion_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let minority_fixture = write_minority_fixture(dir.path());
    let out = illusion(&["analyze", &minority_fixture, "--q", "1/1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(value["illuded_count"], 9);
    assert_eq!(value["global_winner"], "blue");
    assert_eq!(value["fraction"], "1");

    // A threshold above the achieved fraction flips the exit code.
    let out = illusion(&["analyze", &minority_fixture, "--q", "1/1", "--table"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("illuded: 9 of 9"));
}

#[test]
fn analyze_plurality_separating_example() {
    let dir = tempfile::tempdir().unwrap();
    let separating = write_separating_example(dir.path());
    let out = illusion(&["analyze", &separating, "--plurality", "--q", "1/1"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(value["illuded_count"], 13);

    // The same file read as a binary labelling must fail cleanly.
    let out = illusion(&["analyze", &separating], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn search_backtrack_finds_minority_fixture_and_rejects_separating_example() {
    let dir = tempfile::tempdir().unwrap();
    let minority_fixture = write_minority_fixture(dir.path());
    let separating = write_separating_example(dir.path());

    let out = illusion(&["search", &minority_fixture, "--q", "1/1", "--method", "backtrack"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("labels"));

    let out = illusion(&["search", &separating, "--q", "1/1", "--method", "backtrack"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out).trim(), "none");

    // backtrack is a q = 1 method only.
    let out = illusion(&["search", &minority_fixture, "--q", "3/4", "--method", "backtrack"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eliminate_on_the_minority_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let minority_fixture = write_minority_fixture(dir.path());
    let out = illusion(&["eliminate", &minority_fixture, "--q", "1/1", "--k", "1"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let plan: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let edits = plan["add"].as_array().unwrap().len() + plan["remove"].as_array().unwrap().len();
    assert_eq!(edits, 1);

    let out = illusion(
        &["eliminate", &minority_fixture, "--q", "1/1", "--k", "1", "--method", "greedy", "--mode", "remove"],
        dir.path(),
    );
    assert!(matches!(out.status.code(), Some(0 | 1)));
}

#[test]
fn verify_reduction_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sat3 = dir.path().join("sat.cnf");
    fs::write(&sat3, "p cnf 2 1\n1 1 2 0\n").unwrap();
    let out = illusion(
        &["verify-reduction", sat3.to_str().unwrap(), "--theorem", "1", "--q", "1/1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["verdict"], "pass");

    // The xor-style 2P2N instance is unsatisfiable: not-refuted, exit 3.
    let xor = dir.path().join("xor.cnf");
    fs::write(&xor, "p cnf 2 4\n1 2 0\n-1 -2 0\n1 -2 0\n-1 2 0\n").unwrap();
    let out = illusion(
        &["verify-reduction", xor.to_str().unwrap(), "--theorem", "2", "--q", "1/2", "--variant", "removal"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn export_and_ingest_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let minority_fixture = write_minority_fixture(dir.path());
    let map_path = dir.path().join("minority_fixture.map.json");
    let out = illusion(
        &["export-cnf", &minority_fixture, "--q", "1/1", "--map", map_path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let formula = parse_dimacs(&stdout(&out)).expect("exported DIMACS parses");
    assert!(formula.variable_count() >= 18);
    let map: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&map_path).unwrap()).unwrap();
    assert_eq!(map["node_vars"].as_array().unwrap().len(), 9);

    // Feed back an external-style model putting the clique red.
    let model_path = dir.path().join("model.txt");
    fs::write(&model_path, "s SATISFIABLE\nv 1 2 3 4 -5 -6 -7 -8 -9 0\n").unwrap();
    let out = illusion(
        &["ingest-model", map_path.to_str().unwrap(), model_path.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let labels: Vec<String> =
        value["labels"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().into()).collect();
    assert_eq!(labels[..4], ["r", "r", "r", "r"]);
    assert!(labels[4..].iter().all(|l| l == "b"));
}

#[test]
fn generators_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "graph", "--nodes", "8", "--prob", "1/3", "--labelled", "--seed", "42"];
    let first = illusion(&args, dir.path());
    let second = illusion(&args, dir.path());
    assert_eq!(first.stdout, second.stdout);
    let doc = io::parse_network_json(stdout(&first).trim()).unwrap();
    assert_eq!(doc.network.node_count(), 8);

    let out = illusion(&["gen", "2p2n", "--vars", "3", "--seed", "7"], dir.path());
    let f = parse_dimacs(&stdout(&out)).unwrap();
    assert!(is_2p2n(&f));
}

#[test]
fn encode_emits_budget_and_roles() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("f.cnf");
    fs::write(&cnf, "p cnf 2 4\n1 2 0\n1 2 0\n-1 -2 0\n-1 -2 0\n").unwrap();
    let out = illusion(
        &["encode", cnf.to_str().unwrap(), "--target", "eliminate", "--variant", "mixed", "--q", "1/2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(value["budget"], 12);
    assert_eq!(value["variant"], "mixed");
    assert!(value["pump"].is_object());

    let out = illusion(
        &["encode", cnf.to_str().unwrap(), "--target", "verify", "--q", "1/1"],
        dir.path(),
    );
    // Not 3-CNF: clean single-line error, exit 2.
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error:"));
}

#[test]
fn edge_list_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("net.txt");
    fs::write(&edges, "0 1\n0 2\n3 4\n").unwrap();
    let labels = dir.path().join("net.labels");
    fs::write(&labels, "1 r\n2 r\n").unwrap();
    let out = illusion(
        &["analyze", edges.to_str().unwrap(), "--labels", labels.to_str().unwrap(), "--q", "1/5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(value["illuded_count"], 1);
}

#[test]
fn missing_file_is_a_single_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = illusion(&["analyze", "no-such-file.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim().lines().count(), 1);
    assert!(err.starts_with("error:"));
}

/// Every JSON output carries at least the fields its shipped schema marks
/// required.
#[test]
fn outputs_carry_schema_required_fields() {
    let schemas_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas");
    let required_of = |name: &str| -> Vec<String> {
        let schema: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(schemas_dir.join(name)).unwrap()).unwrap();
        schema["required"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect()
    };
    let check = |value: &serde_json::Value, schema: &str| {
        for field in required_of(schema) {
            assert!(!value[&field].is_null() || value.get(&field).is_some(), "{schema} needs {field}");
        }
    };

    let dir = tempfile::tempdir().unwrap();
    let minority_fixture = write_minority_fixture(dir.path());

    let out = illusion(&["analyze", &minority_fixture], dir.path());
    check(&serde_json::from_str(stdout(&out).trim()).unwrap(), "analysis-report.schema.json");

    let out = illusion(&["eliminate", &minority_fixture, "--q", "1/1", "--k", "1"], dir.path());
    check(&serde_json::from_str(stdout(&out).trim()).unwrap(), "edit-plan.schema.json");

    let out = illusion(&["search", &minority_fixture, "--q", "1/1"], dir.path());
    check(&serde_json::from_str(stdout(&out).trim()).unwrap(), "labelling.schema.json");

    let map_path = dir.path().join("m.json");
    illusion(&["export-cnf", &minority_fixture, "--q", "1/1", "--map", map_path.to_str().unwrap()], dir.path());
    let map: serde_json::Value = serde_json::from_str(&fs::read_to_string(&map_path).unwrap()).unwrap();
    check(&map, "variable-map.schema.json");

    let cnf = dir.path().join("f.cnf");
    fs::write(&cnf, "p cnf 2 4\n1 2 0\n1 2 0\n-1 -2 0\n-1 -2 0\n").unwrap();
    let out = illusion(
        &["verify-reduction", cnf.to_str().unwrap(), "--theorem", "2", "--q", "1/2"],
        dir.path(),
    );
    check(&serde_json::from_str(stdout(&out).trim()).unwrap(), "verdict-record.schema.json");

    let out = illusion(
        &["encode", cnf.to_str().unwrap(), "--target", "eliminate", "--q", "1/2"],
        dir.path(),
    );
    check(&serde_json::from_str(stdout(&out).trim()).unwrap(), "elimination-encoding.schema.json");

    let out = illusion(&["gen", "graph", "--nodes", "4", "--seed", "1"], dir.path());
    check(&serde_json::from_str(stdout(&out).trim()).unwrap(), "network.schema.json");
}

#[test]
fn search_via_cnf_method() {
    let dir = tempfile::tempdir().unwrap();
    // A single edge admits no full illusion; the CNF route agrees and the
    // formula stays within the internal solver's variable cap.
    let pair = dir.path().join("pair.json");
    fs::write(&pair, r#"{"nodes": [{"id":0},{"id":1}], "edges": [[0,1]]}"#).unwrap();
    let out = illusion(&["search", pair.to_str().unwrap(), "--q", "1/1", "--method", "cnf"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).trim(), "none");

    // Larger networks exceed the internal cap and point at export-cnf.
    let fixture = write_minority_fixture(dir.path());
    let out = illusion(&["search", &fixture, "--q", "1/1", "--method", "cnf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("export-cnf"));
}
