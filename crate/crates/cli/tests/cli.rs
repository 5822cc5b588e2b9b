use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const TREFOIL_PD: &str = "X 1 5 2 4\nX 3 1 4 6\nX 5 3 6 2\n";
const FIGURE_EIGHT_PD: &str = "X 4 2 5 1\nX 8 6 1 5\nX 6 3 7 4\nX 2 7 3 8\n";
/// One crossing between two open strands.
const OPEN_PD: &str = "X 1 2 3 4\nendpoint 1\nendpoint 2\nendpoint 3\nendpoint 4\n";

fn fixture(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn pjones(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pjones"))
        .args(args)
        .env_remove("PJONES_WORKERS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn terms(v: &Value) -> Vec<(i64, i64, String)> {
    serde_json::from_value(v["terms"].clone()).unwrap()
}

fn t(list: &[(i64, i64, &str)]) -> Vec<(i64, i64, String)> {
    list.iter().map(|&(n, d, c)| (n, d, c.to_string())).collect()
}

#[test]
fn compute_trefoil() {
    let f = fixture("trefoil.pd", TREFOIL_PD);
    let out = pjones(&["compute", f.to_str().unwrap(), "--m", "1", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["polynomial"]["variable"], "A");
    assert_eq!(
        terms(&v["polynomial"]),
        t(&[(-16, 1, "-1"), (-12, 1, "1"), (-4, 1, "1")])
    );
    assert_eq!(v["metadata"]["crossings"], 3);
    assert_eq!(v["metadata"]["m"], 1);
    assert_eq!(v["metadata"]["workers"], 2);

    let out = pjones(&[
        "compute",
        "--input",
        f.to_str().unwrap(),
        "--var",
        "t",
        "--workers",
        "1",
    ]);
    let v = json(&out);
    assert_eq!(v["polynomial"]["variable"], "t");
    assert_eq!(terms(&v["polynomial"]), t(&[(1, 1, "1"), (3, 1, "1"), (4, 1, "-1")]));
    assert_eq!(v["metadata"]["m"], 0);
}

#[test]
fn compute_gauss_matches_pd() {
    let g = fixture("trefoil.gauss", "O1+ U2+ O3+ U1+ O2+ U3+\n");
    let p = fixture("trefoil2.pd", TREFOIL_PD);
    let a = json(&pjones(&["compute", g.to_str().unwrap(), "--workers", "2"]));
    let b = json(&pjones(&["compute", p.to_str().unwrap(), "--workers", "2"]));
    assert_eq!(a["polynomial"], b["polynomial"]);
    assert_eq!(a["metadata"]["format"], "gauss");
}

#[test]
fn compute_segment_is_one() {
    let f = fixture("segment.xyz", "0 0 0\n1 2 3\n");
    let out = pjones(&["compute", f.to_str().unwrap(), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(terms(&v["polynomial"]), t(&[(0, 1, "1")]));
    assert_eq!(v["metadata"]["accepted"], 10);
}

#[test]
fn open_diagram_needs_closure() {
    let f = fixture("open.pd", OPEN_PD);
    let out = pjones(&["compute", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closure"));

    // Closing the crossing's strands into a kink gives 1 either way.
    let out = pjones(&["compute", f.to_str().unwrap(), "--closure", "1-4,2-3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(terms(&json(&out)["polynomial"]), t(&[(0, 1, "1")]));

    let out = pjones(&["compute", f.to_str().unwrap(), "--closure", "1-2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pjones(&["compute", f.to_str().unwrap(), "--closure", "1-2,2-3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let bad = fixture("bad.pd", "X 1 2 3\n");
    assert_eq!(pjones(&["compute", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(pjones(&["compute", "/nonexistent/k.pd"]).status.code(), Some(1));
    let f = fixture("trefoil3.pd", TREFOIL_PD);
    let f = f.to_str().unwrap();
    assert_eq!(pjones(&["compute", f, "--m", "2"]).status.code(), Some(2));
    assert_eq!(pjones(&["compute", f, "--workers", "0"]).status.code(), Some(2));
    assert_eq!(pjones(&["compute", f, "--var", "q"]).status.code(), Some(2));
    assert_eq!(pjones(&["compute"]).status.code(), Some(2));
}

#[test]
fn verify_figure_eight() {
    let f = fixture("fig8.pd", FIGURE_EIGHT_PD);
    let f = f.to_str().unwrap();
    for m in ["0", "1", "2"] {
        let out = pjones(&["verify", f, "--m", m, "--workers", "2"]);
        assert_eq!(out.status.code(), Some(0), "m={m}");
        assert_eq!(json(&out)["equal"], true);
    }
    let out = pjones(&["verify", f, "--inject-fault"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["equal"], false);
    assert_eq!(v["mismatches"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_open_diagram_and_curves() {
    let f = fixture("open2.pd", OPEN_PD);
    let out = pjones(&["verify", f.to_str().unwrap(), "--closure", "1-3,2-4"]);
    assert_eq!(out.status.code(), Some(0));
    let c = fixture("skew.xyz", "-1 0 0\n1 0 0\n\n0 -1 1\n0 1 1\n");
    let out = pjones(&["verify", c.to_str().unwrap(), "--samples", "5", "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["cases"], 5);
}

#[test]
fn bench_csv_shape() {
    let out = pjones(&[
        "bench",
        "--sizes",
        "10,12,14,16,18",
        "--workers",
        "2",
        "--m",
        "1",
        "--repetitions",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,mode,m,workers,seconds_median,repetitions,stddev");
    assert_eq!(lines.len(), 11);
    assert!(lines[1].starts_with("10,serial,0,1,"));
    assert!(lines[2].starts_with("10,parallel,1,2,"));
    let out = pjones(&["bench", "--sizes", "1", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_sums_to_compute() {
    let f = fixture("trefoil4.pd", TREFOIL_PD);
    let f = f.to_str().unwrap();
    for piece in ["1", "2"] {
        let out = pjones(&["spectrum", f, "--m", "1", "--piece", piece]);
        assert_eq!(out.status.code(), Some(0));
        let v = json(&out);
        assert_eq!(v["equal"], true);
        assert_eq!(v["total"], v["polynomial"]);
        assert_eq!(v["entries"].as_array().unwrap().len(), 3);
    }
    assert_eq!(pjones(&["spectrum", f, "--piece", "3"]).status.code(), Some(2));
    assert_eq!(pjones(&["spectrum", f, "--m", "0"]).status.code(), Some(2));
    let open = fixture("open3.pd", OPEN_PD);
    assert_eq!(
        pjones(&["spectrum", open.to_str().unwrap(), "--closure", "1-2,3-4"])
            .status
            .code(),
        Some(2)
    );
}

fn without_time(mut v: Value) -> Value {
    v["metadata"].as_object_mut().unwrap().remove("wall_seconds");
    v
}

#[test]
fn output_is_deterministic_across_workers() {
    let f = fixture("fig8b.pd", FIGURE_EIGHT_PD);
    let f = f.to_str().unwrap();
    let runs: Vec<Value> = ["1", "2", "4", "8"]
        .iter()
        .map(|w| {
            let mut v = without_time(json(&pjones(&[
                "compute",
                f,
                "--m",
                "2",
                "--workers",
                w,
                "--seed",
                "3",
            ])));
            v["metadata"].as_object_mut().unwrap().remove("workers");
            v
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn workers_flag_beats_environment() {
    let f = fixture("trefoil5.pd", TREFOIL_PD);
    let run = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_pjones"))
            .args(["compute", f.to_str().unwrap()])
            .args(extra)
            .env("PJONES_WORKERS", "3")
            .output()
            .unwrap();
        json(&out)["metadata"]["workers"].clone()
    };
    assert_eq!(run(&[]), 3);
    assert_eq!(run(&["--workers", "1"]), 1);
}
