use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semcarto_cli::{parse_invocation, Command as Sub};

const SCHEMA: &str = "# semcarto-schema=1";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn arg(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn semcarto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semcarto")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows as field vectors, after checking the schema line.
fn rows(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(SCHEMA));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn emb() -> String {
    arg(&fixture("toy.txt"))
}

fn dtm() -> String {
    arg(&fixture("toy"))
}

#[test]
fn lc_rwmd_matches_independent_values() {
    let out = stdout(&semcarto(&["docdist", "--emb", &emb(), "--dtm", &dtm(), "--method", "lc-rwmd"]));
    let got = rows(&out);
    assert_eq!(got[0], ["row_id", "col_id", "value", "method", "ground_metric"]);
    let expected = std::fs::read_to_string(fixture("docdist_lcrwmd_expected.csv")).unwrap();
    let expected: Vec<Vec<&str>> = expected.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(got.len() - 1, expected.len());
    for (g, e) in got[1..].iter().zip(&expected) {
        assert_eq!((g[0].as_str(), g[1].as_str()), (e[0], e[1]));
        let (g, e): (f64, f64) = (g[2].parse().unwrap(), e[2].parse().unwrap());
        assert!((g - e).abs() < 1e-12, "{g} vs {e}");
    }
    assert!(got[1..].iter().all(|r| r[3] == "lc-rwmd" && r[4] == "euclidean"));
}

#[test]
fn rwmd_and_lc_rwmd_agree_and_emd_bounds_them() {
    let run = |m: &str| {
        let out = stdout(&semcarto(&["docdist", "--emb", &emb(), "--dtm", &dtm(), "--method", m]));
        rows(&out)[1..].iter().map(|r| r[2].parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    let (rwmd, lc, emd) = (run("rwmd"), run("lc-rwmd"), run("emd"));
    for ((r, l), e) in rwmd.iter().zip(&lc).zip(&emd) {
        assert!((r - l).abs() < 1e-12);
        assert!(*r <= e + 1e-12);
    }
}

#[test]
fn grouped_output_averages_blocks() {
    let out = stdout(&semcarto(&["docdist", "--emb", &emb(), "--dtm", &dtm(), "--group-by", "source"]));
    let got = rows(&out);
    assert_eq!(got[0], ["row_key", "col_key", "mean", "count", "method", "ground_metric"]);
    let counts: Vec<(&str, &str, &str)> =
        got[1..].iter().map(|r| (r[0].as_str(), r[1].as_str(), r[3].as_str())).collect();
    assert_eq!(
        counts,
        [("alpha", "alpha", "4"), ("alpha", "beta", "2"), ("beta", "alpha", "2"), ("beta", "beta", "1")]
    );
    assert_eq!(got[4][2], "0");
}

fn toy_vectors() -> Vec<(String, Vec<f64>)> {
    std::fs::read_to_string(fixture("toy.txt"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.map(|x| x.parse().unwrap()).collect())
        })
        .collect()
}

#[test]
fn single_term_engagement_ranks_like_the_direct_transport_cost() {
    let vecs = toy_vectors();
    let v = |t: &str| vecs.iter().find(|(w, _)| w == t).unwrap().1.clone();
    let dist = |a: &str, b: &str| v(a).iter().zip(v(b)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let cost = |doc: &[(&str, f64)]| {
        let total: f64 = doc.iter().map(|d| d.1).sum();
        doc.iter().map(|(t, c)| c / total * dist(t, "king")).sum::<f64>()
    };
    let oracle = [
        ("q1", -cost(&[("king", 2.0), ("queen", 1.0)])),
        ("q2", -cost(&[("man", 1.0), ("woman", 1.0)])),
        ("q3", -cost(&[("market", 3.0), ("king", 1.0)])),
    ];
    for method in ["exact", "rwmd", "lc-rwmd"] {
        let out = stdout(&semcarto(&["cmd", "--emb", &emb(), "--dtm", &dtm(), "--concept", "king", "--method", method]));
        let got = rows(&out);
        assert_eq!(got[0], ["doc_id", "date", "raw", "standardized", "concept_label"]);
        for (row, (id, raw)) in got[1..].iter().zip(&oracle) {
            assert_eq!(row[0], *id);
            assert!((row[2].parse::<f64>().unwrap() - raw).abs() < 1e-12, "{method} {id}");
        }
        let mut by_raw: Vec<_> = got[1..].iter().collect();
        by_raw.sort_by(|a, b| b[3].parse::<f64>().unwrap().total_cmp(&a[3].parse().unwrap()));
        assert_eq!(by_raw.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["q1", "q3", "q2"]);
    }
}

#[test]
fn bucketed_engagement_reports_deltas() {
    let out = stdout(&semcarto(&[
        "cmd", "--emb", &emb(), "--dtm", &dtm(), "--concept", "king", "--bucket", "year", "--deltas",
    ]));
    let got = rows(&out);
    assert_eq!(got[0], ["concept_label", "bucket", "mean", "count", "delta"]);
    assert_eq!(got[1][1..2], ["2016"]);
    assert_eq!(got[1][3..], ["2", ""]);
    let (m16, m17): (f64, f64) = (got[1][2].parse().unwrap(), got[2][2].parse().unwrap());
    let delta: f64 = got[2][4].parse().unwrap();
    assert!((delta - (m17 - m16)).abs() < 1e-12);
}

#[test]
fn concept_file_mixes_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let concepts = dir.path().join("concepts.csv");
    std::fs::write(dir.path().join("royal.csv"), "royal,common\nking,man\nqueen,woman\n").unwrap();
    std::fs::write(
        &concepts,
        "label,kind,payload\nk,term,king\nroyals,compound,king queen\nmid,centroid,man woman\nup,pole+,royal.csv\ndown,pole-,royal.csv\n",
    )
    .unwrap();
    let out = stdout(&semcarto(&["cmd", "--emb", &emb(), "--dtm", &dtm(), "--concepts", &arg(&concepts)]));
    let got = rows(&out);
    let labels: Vec<&str> = got[1..].iter().map(|r| r[4].as_str()).collect();
    assert_eq!(labels, ["k", "k", "k", "royals", "royals", "royals", "mid", "mid", "mid", "up", "up", "up", "down", "down", "down"]);
    let std_of = |label: &str, doc: &str| -> f64 {
        got[1..].iter().find(|r| r[4] == label && r[0] == doc).unwrap()[3].parse().unwrap()
    };
    assert!(std_of("up", "q1") > std_of("up", "q2"));
    assert!(std_of("down", "q2") > std_of("down", "q1"));
}

#[test]
fn drift_over_identical_spaces_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    std::fs::copy(fixture("toy.txt"), &a).unwrap();
    std::fs::copy(fixture("toy.txt"), &b).unwrap();
    let out = stdout(&semcarto(&["drift", "--emb", &arg(&a), &arg(&b), "--term", "queen"]));
    let got = rows(&out);
    assert_eq!(got[0], ["space", "term", "reference", "cosine"]);
    for r in &got[1..] {
        assert!((r[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn cosine_and_neighbors() {
    let out = stdout(&semcarto(&["cosine", "--emb", &emb(), "--a", "king", "--b", "king"]));
    assert_eq!(rows(&out)[1], ["king", "king", "1"]);
    let out = stdout(&semcarto(&["neighbors", "--emb", &emb(), "--expr", "king - man + woman", "--k", "1"]));
    let got = rows(&out);
    assert_eq!(got[0], ["rank", "term", "similarity"]);
    assert_eq!(got[1][..2], ["1", "queen"]);
}

#[test]
fn project_orders_terms_along_the_direction() {
    let out = stdout(&semcarto(&[
        "project", "--emb", &emb(), "--pairs", &arg(&fixture("royal_pairs.csv")), "--terms", "queen", "woman", "zebra",
    ]));
    let got = rows(&out);
    assert_eq!(got.len(), 3);
    let (q, w): (f64, f64) = (got[1][1].parse().unwrap(), got[2][1].parse().unwrap());
    assert!(q > 0.0 && w < 0.0);
    assert_eq!(got[1][2..], ["royal", "common"]);
}

#[test]
fn config_values_yield_to_explicit_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("train.conf");
    std::fs::write(&cfg, "# defaults\nwindow = 5\ndim = 2\nppmi_shift = 1\n").unwrap();
    let corpus = arg(&fixture("corpus.txt"));
    let parsed = parse_invocation([
        "semcarto", "--config", &arg(&cfg), "train", "--corpus", &corpus, "--save", "x.txt", "--window", "2",
    ])
    .unwrap();
    let Sub::Train(t) = parsed.command else { panic!("expected train") };
    assert_eq!((t.window, t.dim, t.ppmi_shift), (2, 2, 1.0));

    let parsed = parse_invocation(["semcarto", "--config", &arg(&cfg), "train", "--corpus", &corpus, "--save", "x.txt"]).unwrap();
    let Sub::Train(t) = parsed.command else { panic!("expected train") };
    assert_eq!(t.window, 5);
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "windw = 5\n").unwrap();
    let o = semcarto(&["--config", &arg(&cfg), "train", "--corpus", &arg(&fixture("corpus.txt")), "--save", "x.txt"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error code=2 class=usage:") && err.contains("windw"), "{err}");
}

#[test]
fn exit_codes_follow_error_class() {
    assert_eq!(semcarto(&["cosine", "--a", "king", "--b", "queen"]).status.code(), Some(2));
    assert_eq!(semcarto(&["cosine", "--emb", "/no/such/file", "--a", "x", "--b", "y"]).status.code(), Some(2));
    assert_eq!(semcarto(&["neighbors", "--emb", &emb(), "--term", "king", "--k", "0"]).status.code(), Some(2));
    assert_eq!(
        semcarto(&["docdist", "--emb", &emb(), "--dtm", &dtm(), "--method", "emd", "--weights", "raw-count"]).status.code(),
        Some(2)
    );

    let o = semcarto(&["cosine", "--emb", &emb(), "--a", "king", "--b", "zebra"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error code=3 class=data:"));

    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.txt");
    std::fs::write(&zero, "king 1 0\nnull 0 0\n").unwrap();
    let o = semcarto(&["cosine", "--emb", &arg(&zero), "--a", "king", "--b", "null"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error code=4 class=numeric:"));

    assert_eq!(semcarto(&["--help"]).status.code(), Some(0));
}

#[test]
fn preprocess_writes_a_readable_dtm() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("d");
    let out = stdout(&semcarto(&[
        "preprocess", "--corpus", &arg(&fixture("corpus.txt")), "--meta", &arg(&fixture("meta.csv")),
        "--sparsity", "0.99", "--dtm", &arg(&prefix),
    ]));
    let got = rows(&out);
    assert_eq!(got[0], ["term", "doc_freq", "count"]);
    let king = got.iter().find(|r| r[0] == "king").unwrap();
    assert_eq!(king[1..], ["3", "3"]);
    assert!(got.iter().any(|r| r[0] == "ninety"));
    assert!(!got.iter().any(|r| r[0].contains("http") || r[0] == "b"));

    let out = stdout(&semcarto(&["cmd", "--emb", &emb(), "--dtm", &arg(&prefix), "--compound", "king", "queen"]));
    assert_eq!(rows(&out).len(), 7);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let save = dir.path().join(format!("{name}.emb"));
        let o = semcarto(&[
            "-o", &arg(&path), "train", "--corpus", &arg(&fixture("corpus.txt")), "--dim", "3", "--window", "2",
            "--save", &arg(&save), "--label", "t",
        ]);
        assert!(o.status.success());
        let o = semcarto(&["-o", &arg(&path), "docdist", "--emb", &arg(&save), "--dtm", &dtm(), "--method", "emd"]);
        assert!(o.status.success());
        (std::fs::read(&path).unwrap(), std::fs::read(&save).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn align_reports_every_space() {
    let dir = tempfile::tempdir().unwrap();
    let spaces: Vec<String> = (0..3)
        .map(|i| {
            let p = dir.path().join(format!("s{i}.txt"));
            std::fs::copy(fixture("toy.txt"), &p).unwrap();
            arg(&p)
        })
        .collect();
    let save = dir.path().join("aligned");
    let out = stdout(&semcarto(&[
        "align", "--emb", &spaces.join(","), "--mode", "to-previous", "--save-dir", &arg(&save),
    ]));
    let got = rows(&out);
    assert_eq!(got[0], ["space", "anchor_size", "residual", "scale"]);
    assert_eq!(got[1..].iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["s0", "s1", "s2"]);
    assert!(got[1..].iter().all(|r| r[1] == "5" && r[2].parse::<f64>().unwrap() < 1e-9));
    assert!(save.join("s2.txt").exists());
}
