use std::path::Path;
use std::process::{Command, Output};

use gdl::cache::Cache;
use gdl::format::parse_hex;
use gdl::scan::scan;
use gdl_core::gram::classify;
use gdl_core::z_model::CoefficientModel;
use proptest::prelude::*;

fn gdl(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gdl"))
        .args(args)
        .env("GDL_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> (Vec<String>, Vec<csv::StringRecord>) {
    let meta: Vec<String> = text.lines().take_while(|l| l.starts_with('#')).map(String::from).collect();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = rdr.records().map(|r| r.unwrap()).collect();
    (meta, rows)
}

#[test]
fn gram_scan_marks_126_bad() {
    let dir = tempfile::tempdir().unwrap();
    let o = gdl(&["gram", "scan", "--from", "0", "--to", "1000", "--model", "riemann"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (meta, rows) = data_rows(&text);
    assert!(meta[0].starts_with("#version="));
    assert_eq!(meta[1], "#model=riemann");
    assert_eq!(meta[2], "#seed=42");
    assert!(text.lines().any(|l| l.starts_with("n,t,t_hex,z,z_hex")));
    assert_eq!(rows.len(), 1001);
    assert_eq!(&rows[126][0], "126");
    assert_eq!(&rows[126][7], "bad");
    assert_eq!(&rows[90][7], "good");
    // Decimal and hex columns agree.
    for r in rows.iter().take(50) {
        let dec: f64 = r[1].parse().unwrap();
        assert_eq!(dec.to_bits(), parse_hex(&r[2]).unwrap().to_bits());
    }
}

#[test]
fn output_is_byte_identical_across_threads_and_cache_state() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gram", "scan", "--from", "99990", "--to", "100020"];
    let cold = gdl(&[&args[..], &["--threads", "1"]].concat(), dir.path());
    let warm = gdl(&[&args[..], &["--threads", "4"]].concat(), dir.path());
    let none = gdl(&[&args[..], &["--no-cache"]].concat(), dir.path());
    assert_eq!(cold.status.code(), Some(0));
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(cold.stdout, none.stdout);
    // The range straddles two shards.
    let status = stdout(&gdl(&["cache", "status"], dir.path()));
    assert!(status.contains("riemann shard 00000: 10 records"), "{status}");
    assert!(status.contains("riemann shard 00001: 21 records"), "{status}");
    let mc1 = gdl(&["mc", "--n", "730119", "--trials", "200", "--seed", "9", "--threads", "1"], dir.path());
    let mc2 = gdl(&["mc", "--n", "730119", "--trials", "200", "--seed", "9", "--threads", "3"], dir.path());
    assert_eq!(mc1.status.code(), Some(0));
    assert_eq!(mc1.stdout, mc2.stdout);
    assert!(stdout(&mc1).contains("#seed=9"));
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("blocks.csv");
    let o = gdl(&["gram", "blocks", "--from", "9807962", "--to", "9807962", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let (_, rows) = data_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "9807960");
    assert_eq!(&rows[0][1], "9807963");
    assert_eq!(&rows[0][2], "3");
    assert_eq!(&rows[0][3], "9807961;9807962");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(gdl(&["--help"], p).status.code(), Some(0));
    assert_eq!(gdl(&["--version"], p).status.code(), Some(0));
    let bogus = gdl(&["bogus"], p);
    assert_eq!(bogus.status.code(), Some(1));
    assert!(!bogus.stderr.is_empty());
    assert_eq!(gdl(&["gram", "scan", "--from", "10", "--to", "5"], p).status.code(), Some(1));
    assert_eq!(gdl(&["newton"], p).status.code(), Some(1));
    assert_eq!(gdl(&["mc", "--n", "126", "--trials", "10"], p).status.code(), Some(1));
    assert_eq!(gdl(&["--model", "dh", "gram", "scan", "--from", "0", "--to", "3"], p).status.code(), Some(1));
    // Every isolated Bad point counts as corrupt under a huge bound.
    let neg = gdl(&["viscosity", "--from", "0", "--to", "300", "--gbg", "--bound", "1e9"], p);
    assert_eq!(neg.status.code(), Some(2));
    let ok = gdl(&["viscosity", "--from", "0", "--to", "300", "--gbg"], p);
    assert_eq!(ok.status.code(), Some(0));
    // A violation in the model experiment is data, not a failure.
    let dh = gdl(&["dh", "violation", "--steps", "100"], p);
    assert_eq!(dh.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&dh.stdout).unwrap();
    assert_eq!(v["report"]["violation"], serde_json::Value::Bool(true));
    assert_eq!(gdl(&["curve", "corrected", "--n", "126"], p).status.code(), Some(0));
}

#[test]
fn hessian_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = gdl(&["hessian", "--n", "90"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let h = v["report"]["hessian"].as_f64().unwrap();
    assert!((h - 0.002_036_15).abs() < 0.01 * 0.002_036_15);
    assert!(v["report"]["relative_gap"].as_f64().unwrap() < 1e-3);
    assert_eq!(v["model"], "riemann");
}

#[test]
fn linear_trace_at_730119_collides() {
    let dir = tempfile::tempdir().unwrap();
    let o = gdl(&["discriminant", "--n", "730119", "--curve", "linear", "--steps", "200"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "#verdict=collision"), "{}", &text[..200]);
    let (meta, rows) = data_rows(&text);
    let r: f64 = meta.iter().find_map(|l| l.strip_prefix("#verdict_r=")).unwrap().parse().unwrap();
    assert!(r > 0.2 && r < 0.3);
    assert!(!rows.is_empty());
}

#[test]
fn newton_from_an_index() {
    let dir = tempfile::tempdir().unwrap();
    let o = gdl(&["newton", "--index", "6709"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let (meta, rows) = data_rows(&stdout(&o));
    let zero: f64 = meta.iter().find_map(|l| l.strip_prefix("#zero=")).unwrap().parse().unwrap();
    assert!((zero - 7005.0629).abs() < 1e-3);
    assert_eq!(&rows[0][0], "0");
}

#[test]
fn cache_clear_removes_shards() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("c");
    assert_eq!(gdl(&["gram", "scan", "--from", "0", "--to", "20"], &root).status.code(), Some(0));
    assert!(root.join("riemann").join("shard-00000.csv").exists());
    let o = gdl(&["cache", "clear"], &root);
    assert_eq!(o.status.code(), Some(0));
    assert!(!root.exists());
    // --cache-dir wins over the environment.
    let other = dir.path().join("d");
    gdl(&["--cache-dir", other.to_str().unwrap(), "gram", "scan", "--from", "0", "--to", "2"], &root);
    assert!(other.join("riemann").exists());
    assert!(!root.exists());
}

#[test]
fn corrupt_shard_versions_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let c = Cache::new(dir.path());
    let m = CoefficientModel::riemann();
    scan(&m, 0, 5, Some(&c)).unwrap();
    let path = c.shard_path("riemann", 0);
    let text = std::fs::read_to_string(&path).unwrap().replacen("schema", "schema-old", 1);
    std::fs::write(&path, text).unwrap();
    assert!(c.load("riemann", 0).unwrap().is_empty());
    assert_eq!(scan(&m, 0, 5, Some(&c)).unwrap().len(), 6);
    assert_eq!(c.load("riemann", 0).unwrap().len(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cached_records_equal_recomputation(from in 0u64..300_000, len in 1u64..40) {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let m = CoefficientModel::riemann();
        let to = from + len;
        let first = scan(&m, from, to, Some(&c)).unwrap();
        let second = scan(&m, from, to, Some(&c)).unwrap();
        prop_assert_eq!(&first, &second);
        for r in &second {
            let fresh = classify(&m, r.n).unwrap();
            prop_assert_eq!(r.t.to_bits(), fresh.t.to_bits());
            prop_assert_eq!(r.z_value.to_bits(), fresh.z_value.to_bits());
            prop_assert_eq!(r.zprime_value.to_bits(), fresh.zprime_value.to_bits());
            prop_assert_eq!(r.viscosity.to_bits(), fresh.viscosity.to_bits());
            prop_assert_eq!(r.classical_z.to_bits(), fresh.classical_z.to_bits());
            prop_assert_eq!(r.classical_zprime.to_bits(), fresh.classical_zprime.to_bits());
            prop_assert_eq!(r.kind, fresh.kind);
            prop_assert_eq!(r.source, fresh.source);
        }
    }
}
