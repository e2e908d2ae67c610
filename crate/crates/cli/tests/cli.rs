use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn pathshap(args: &[&str], graph: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathshap"))
        .args(args)
        .arg("--graph")
        .arg(data(graph))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn eval_running_example() {
    let o = pathshap(
        &["eval", "--query", "(x, a b c, y)", "--bind", "x=v1,y=v6"],
        "running_example.tsv",
    );
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "1\n"));
    let o = pathshap(
        &["eval", "--query", "a b c", "--bind", "x=v3,y=v5"],
        "running_example.tsv",
    );
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "0\n"));
}

#[test]
fn eval_missing_binding_exits_2() {
    let o = pathshap(
        &["eval", "--query", "a b c", "--bind", "x=v1"],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not bound"));
}

#[test]
fn unreadable_graph_exits_2() {
    let o = pathshap(
        &["eval", "--query", "a", "--bind", "x=a,y=b"],
        "no_such_file.tsv",
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_query_exits_2() {
    let o = pathshap(
        &["eval", "--query", "a(*", "--bind", "x=v1,y=v6"],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn answers_running_example() {
    let o = pathshap(
        &["answers", "--query", "(x, a b c, y)", "--format", "csv"],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "x,y\nv1,v6\nv4,v6\n");
}

#[test]
fn answers_unsatisfiable_and_capped() {
    let o = pathshap(
        &["answers", "--query", "c a", "--format", "csv"],
        "running_example.tsv",
    );
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "x,y\n"));
    let o = pathshap(
        &["answers", "--query", "(x, a b c, y)", "--cap", "1"],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn shapley_ab_star_rows() {
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "a b*",
            "--bind",
            "x=v1,y=v6",
            "--format",
            "csv",
        ],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "id,value,method,eps,delta,samples,seed");
    assert_eq!(rows[1], "v1->v2,7/12,exact-subset,,,,");
    assert_eq!(rows[2], "v2->v6,1/4,exact-subset,,,,");
    assert_eq!(rows[3], "v2->v4,1/12,exact-subset,,,,");
    assert_eq!(rows[4], "v4->v6,1/12,exact-subset,,,,");
    assert_eq!(rows.len(), 10);
    assert!(rows[5..].iter().all(|r| r.split(',').nth(1) == Some("0")));
}

#[test]
fn shapley_table_layout() {
    let o = pathshap(
        &["shapley", "--query", "abc", "--bind", "x=v1,y=v6"],
        "running_example.tsv",
    );
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method: exact-subset"));
    assert_eq!(lines.next(), Some("player  value"));
    assert_eq!(lines.next(), Some("v1->v3  1/3"));
}

#[test]
fn shapley_multiplicative_on_infinite_language_exits_4() {
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "a b*",
            "--bind",
            "x=v1,y=v6",
            "--mode",
            "approx-multiplicative",
        ],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn shapley_vertex_chain() {
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "a b",
            "--bind",
            "x=s,y=t",
            "--player-kind",
            "vertex",
            "--format",
            "csv",
        ],
        "vertex_chain.tsv",
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o),
        "id,value,method,eps,delta,samples,seed\nu,1,exact-subset,,,,\n"
    );
}

#[test]
fn shapley_cap_overflow_exits_3() {
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "abc",
            "--bind",
            "x=v1,y=v6",
            "--mode",
            "exact",
            "--cap",
            "3",
        ],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 3);
}

#[test]
fn shapley_focus_and_unknown_player() {
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "a b*",
            "--bind",
            "x=v1,y=v6",
            "--focus",
            "v2->v6",
            "--format",
            "csv",
        ],
        "running_example.tsv",
    );
    assert_eq!(
        stdout(&o),
        "id,value,method,eps,delta,samples,seed\nv2->v6,1/4,exact-subset,,,,\n"
    );
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "a b*",
            "--bind",
            "x=v1,y=v6",
            "--focus",
            "v6->v1",
        ],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn nonzero_verdicts() {
    let run = |q: &str, focus: &str| {
        let o = pathshap(
            &[
                "nonzero",
                "--query",
                q,
                "--bind",
                "x=v1,y=v6",
                "--focus",
                focus,
            ],
            "running_example.tsv",
        );
        (code(&o), stdout(&o))
    };
    assert_eq!(run(".*", "v4->v3"), (0, "true\n".into()));
    assert_eq!(run("a b c", "v2->v4"), (0, "false\n".into()));
}

#[test]
fn nonzero_budget_exhaustion_is_unknown() {
    let o = pathshap(
        &[
            "nonzero", "--query", ".*", "--bind", "x=s,y=t", "--focus", "k0->d", "--budget", "1000",
        ],
        "dense.tsv",
    );
    assert_eq!((code(&o), stdout(&o).as_str()), (5, "unknown\n"));
    let o = pathshap(
        &[
            "nonzero", "--query", ".*", "--bind", "x=s,y=t", "--focus", "k0->d",
        ],
        "dense.tsv",
    );
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "false\n"));
}

#[test]
fn sampled_json_validates_against_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for mode in ["exact", "approx-additive", "approx-multiplicative"] {
        let query = if mode == "approx-multiplicative" {
            "abc"
        } else {
            "a b*"
        };
        let o = pathshap(
            &[
                "shapley",
                "--query",
                query,
                "--bind",
                "x=v1,y=v6",
                "--mode",
                mode,
                "--format",
                "json",
                "--eps",
                "0.2",
                "--delta",
                "0.1",
                "--seed",
                "3",
            ],
            "running_example.tsv",
        );
        assert_eq!(code(&o), 0, "{mode}");
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(validator.is_valid(&report), "{mode}: {report}");
        if mode == "approx-additive" {
            let row = &report["players"][0];
            assert_eq!(row["samples"], 38);
            assert_eq!(row["seed"], 3);
        }
    }
}

#[test]
fn exact_json_rationals_round_trip() {
    use num_rational::BigRational;
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "a b*",
            "--bind",
            "x=v1,y=v6",
            "--format",
            "json",
        ],
        "running_example.tsv",
    );
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total = report["players"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["value"].as_str().unwrap().parse::<BigRational>().unwrap())
        .fold(BigRational::from_integer(0.into()), |a, b| a + b);
    assert_eq!(total, BigRational::from_integer(1.into()));
}

#[test]
fn sampled_output_is_byte_identical() {
    let args = [
        "shapley",
        "--query",
        "a b*",
        "--bind",
        "x=v1,y=v6",
        "--mode",
        "approx-additive",
        "--seed",
        "42",
        "--format",
        "json",
    ];
    let a = pathshap(&args, "running_example.tsv");
    let b = pathshap(&args, "running_example.tsv");
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sample_limit_exits_5() {
    let o = pathshap(
        &[
            "shapley",
            "--query",
            "abc",
            "--bind",
            "x=v1,y=v6",
            "--mode",
            "approx-additive",
            "--max-samples",
            "100",
        ],
        "running_example.tsv",
    );
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("samples needed"));
}
