use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use qsim_core::modulator::bessel_j;

fn qsim(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsim"))
        .args(args)
        .current_dir(cwd)
        .env_remove("QSIM_THREADS")
        .output()
        .expect("qsim runs")
}

fn qsim_threads(cwd: &Path, threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsim"))
        .args(args)
        .current_dir(cwd)
        .env("QSIM_THREADS", threads)
        .output()
        .expect("qsim runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}\nstdout: {}\nstderr: {}", o.status.code(), stdout(&o), stderr(&o));
    o
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

/// `key=value` pairs of a summary line.
fn summary(line: &str) -> BTreeMap<String, String> {
    line.split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn num(map: &BTreeMap<String, String>, key: &str) -> f64 {
    map.get(key).unwrap_or_else(|| panic!("no {key} in {map:?}")).parse().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|row| row.unwrap().iter().map(String::from).collect()).collect()
}

const HBT_SMALL: &str = r#"{
  "schema_version": 1, "experiment": "hbt", "seed": 5, "output_dir": "out",
  "emitter": {"lifetime_ps": 745},
  "detector": {"jitter_ps": 117.2},
  "hbt": {"photons": 200000}
}"#;

#[test]
fn identical_config_and_seed_give_identical_artifacts() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&d1, &d2] {
        std::fs::write(d.path().join("c.json"), HBT_SMALL).unwrap();
        ok(qsim(d.path(), &["run", "c.json"]));
    }
    let (a, b) = (snapshot(&d1.path().join("out")), snapshot(&d2.path().join("out")));
    assert!(a.contains_key("tags.ttag") && a.contains_key("hbt_histogram.csv") && a.contains_key("g2_fit.json"));
    assert_eq!(a, b);
}

#[test]
fn effective_config_reruns_to_identical_outputs() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.json"), HBT_SMALL).unwrap();
    let first_line = stdout(&ok(qsim(d.path(), &["run", "c.json"])));
    let first = snapshot(&d.path().join("out"));
    std::fs::copy(d.path().join("out/effective_config.json"), d.path().join("eff.json")).unwrap();
    let second_line = stdout(&ok(qsim(d.path(), &["run", "eff.json"])));
    assert_eq!(first, snapshot(&d.path().join("out")));
    assert_eq!(first_line, second_line);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let cfg = r#"{"schema_version": 1, "experiment": "bessel-sweep", "output_dir": "out",
                  "modulator": {"drive_ghz": 5}, "sweep": {"beta_max": 1.0, "beta_step": 0.25}}"#;
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, n) in [(&d1, "1"), (&d2, "3")] {
        std::fs::write(d.path().join("c.json"), cfg).unwrap();
        ok(qsim_threads(d.path(), n, &["run", "c.json"]));
    }
    assert_eq!(snapshot(&d1.path().join("out")), snapshot(&d2.path().join("out")));
}

#[test]
fn ideal_detector_hbt_is_antibunched() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "experiment": "hbt", "seed": 1, "output_dir": "out",
                  "tag_format": "none", "emitter": {"lifetime_ps": 745}}"#;
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    let s = summary(&stdout(&ok(qsim(d.path(), &["run", "c.json"]))));
    assert!(num(&s, "photons") >= 1e6);
    assert!(num(&s, "g2_zero") <= 0.01, "{s:?}");
    assert!(!d.path().join("out/tags.ttag").exists());
}

#[test]
fn jittered_tag_file_reproduces_dot_one_dip() {
    let d = tempfile::tempdir().unwrap();
    let cfg = HBT_SMALL.replace("200000", "500000");
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    ok(qsim(d.path(), &["run", "c.json"]));
    let o = ok(qsim(
        d.path(),
        &[
            "correlate-file", "out/tags.ttag", "out/tags.ttag", "--channel-a", "0", "--channel-b", "1",
            "--bin-ps", "64", "--window-ps", "20000", "--out", "hist.csv",
        ],
    ));
    let s = summary(&stdout(&o));
    assert!((num(&s, "center_g2") - 0.039).abs() <= 0.01, "{s:?}");
    // same counts bin for bin; g² differs slightly since a tag file only
    // knows its last timestamp, not the acquisition length
    let counts = |p: &Path| -> Vec<(String, String)> {
        csv_rows(p).into_iter().map(|r| (r[0].clone(), r[1].clone())).collect()
    };
    assert_eq!(counts(&d.path().join("hist.csv")), counts(&d.path().join("out/hbt_histogram.csv")));
}

#[test]
fn single_pair_gives_single_count() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("a.csv"), "channel,time_ps\n0,5000\n").unwrap();
    std::fs::write(d.path().join("b.csv"), "channel,time_ps\n3,5700\n").unwrap();
    let o = ok(qsim(
        d.path(),
        &["correlate-file", "a.csv", "b.csv", "--bin-ps", "100", "--window-ps", "2000"],
    ));
    let rows = csv_rows_from(&stdout(&o));
    let total: u64 = rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 1);
    let hit = rows.iter().find(|r| r[1] == "1").unwrap();
    assert_eq!(hit[0], "700");
    assert_eq!(rows.len(), 41);
}

fn csv_rows_from(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|row| row.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn self_correlation_is_symmetric() {
    let d = tempfile::tempdir().unwrap();
    let mut text = String::from("channel,time_ps\n");
    let mut t = 0u64;
    for k in 0..400u64 {
        t += 1 + (k * 7919) % 997;
        text.push_str(&format!("0,{t}\n"));
    }
    std::fs::write(d.path().join("s.csv"), text).unwrap();
    let o = ok(qsim(d.path(), &["correlate-file", "s.csv", "s.csv", "--bin-ps", "50", "--window-ps", "3000"]));
    let counts: Vec<u64> = csv_rows_from(&stdout(&o)).iter().map(|r| r[1].parse().unwrap()).collect();
    let rev: Vec<u64> = counts.iter().rev().copied().collect();
    assert_eq!(counts, rev);
    assert!(counts.iter().sum::<u64>() > 0);
}

#[test]
fn bessel_sweep_tracks_bessel_squares() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "experiment": "bessel-sweep", "output_dir": "out",
                  "modulator": {"drive_ghz": 5}}"#;
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    ok(qsim(d.path(), &["run", "c.json"]));
    let rows = csv_rows(&d.path().join("out/bessel_sweep.csv"));
    assert_eq!(rows.len(), 32);
    for r in rows {
        let beta: f64 = r[0].parse().unwrap();
        for n in 0..3 {
            let w: f64 = r[1 + n].parse().unwrap();
            assert!((w - bessel_j(n as i32, beta).powi(2)).abs() < 0.02, "beta {beta} n {n}");
        }
    }
}

#[test]
fn spectrum_run_reports_carrier_ratio() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "experiment": "spectrum", "output_dir": "out",
                  "modulator": {"modulation_index": 1.0471975511965976, "drive_ghz": 5}}"#;
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    let s = summary(&stdout(&ok(qsim(d.path(), &["run", "c.json"]))));
    assert!((num(&s, "carrier_to_first") - 2.7).abs() <= 0.1);
    for f in ["spectrum.csv", "ladder.csv", "comb_fit.json"] {
        assert!(d.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn lifetime_run_recovers_lifetime() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema_version": 1, "experiment": "lifetime", "seed": 4, "output_dir": "out",
                  "tag_format": "csv", "emitter": {"lifetime_ps": 745},
                  "detector": {"jitter_ps": 50, "dark_rate_hz": 1000},
                  "lifetime": {"pulses": 200000}}"#;
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    let s = summary(&stdout(&ok(qsim(d.path(), &["run", "c.json"]))));
    let (t, e) = (num(&s, "lifetime_ps"), num(&s, "lifetime_err_ps"));
    assert!((t - 745.0).abs() <= 4.0 * e, "{t} ± {e}");
    assert!(d.path().join("out/tags.csv").exists());
}

#[test]
fn modulated_and_unmodulated_visibilities_agree() {
    let d = tempfile::tempdir().unwrap();
    let base = r#"{"schema_version": 1, "experiment": "hom", "seed": SEED, "output_dir": "OUT",
                   "emitter": {"lifetime_ps": 745}, "detector": {"jitter_ps": 117.2},
                   "hom": {"mode_overlap": 0.74, "coherence_time_ps": 2205, "pairs": 300000}MOD}"#;
    let plain = base.replace("SEED", "1").replace("OUT", "plain").replace("MOD", "");
    let modulated = base.replace("SEED", "2").replace("OUT", "mod").replace(
        "MOD",
        r#", "modulator": {"modulation_index": 1.0471975511965976, "drive_ghz": 5}"#,
    );
    std::fs::write(d.path().join("p.json"), plain).unwrap();
    std::fs::write(d.path().join("m.json"), modulated).unwrap();
    let p = summary(&stdout(&ok(qsim(d.path(), &["run", "p.json"]))));
    let m = summary(&stdout(&ok(qsim(d.path(), &["run", "m.json"]))));
    let z = (num(&p, "visibility") - num(&m, "visibility")).abs()
        / (num(&p, "visibility_err").powi(2) + num(&m, "visibility_err").powi(2)).sqrt();
    assert!(z <= 3.0, "{p:?} vs {m:?}");
    for f in ["hom_parallel.csv", "hom_orthogonal.csv", "hom_fit.json"] {
        assert!(d.path().join("mod").join(f).exists());
    }
}

#[test]
fn validation_failures_exit_one_and_name_the_field() {
    let d = tempfile::tempdir().unwrap();
    let cases = [
        (HBT_SMALL.replace("745", "-745"), "emitter.lifetime_ps"),
        (HBT_SMALL.replace("\"seed\": 5,", ""), "seed"),
        (HBT_SMALL.replace("117.2", "\"wide\""), "detector.jitter_ps"),
        (HBT_SMALL.replace("\"hbt\", ", "\"hom\", "), "hom"),
        (HBT_SMALL.replace("\"schema_version\": 1", "\"schema_version\": 2"), "schema_version"),
    ];
    for (i, (cfg, field)) in cases.iter().enumerate() {
        let name = format!("c{i}.json");
        std::fs::write(d.path().join(&name), cfg).unwrap();
        let o = qsim(d.path(), &["run", &name]);
        assert_eq!(o.status.code(), Some(1), "case {i}: {}", stderr(&o));
        assert!(stderr(&o).contains(&format!("`{field}`")), "case {i}: {}", stderr(&o));
    }
    assert_eq!(qsim(d.path(), &["run", "missing.json"]).status.code(), Some(1));
    assert_eq!(qsim(d.path(), &["bessel"]).status.code(), Some(1));
    let o = qsim_threads(d.path(), "zero", &["bessel", "--beta", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("QSIM_THREADS"));
}

#[test]
fn malformed_tag_file_reports_byte_offset() {
    let d = tempfile::tempdir().unwrap();
    let mut bytes = b"TTAG\x01".to_vec();
    bytes.extend_from_slice(&[0, 1, 0, 0, 0, 0, 0, 0, 0]);
    bytes.extend_from_slice(&[0, 2, 0]);
    std::fs::write(d.path().join("bad.ttag"), bytes).unwrap();
    let o = qsim(d.path(), &["correlate-file", "bad.ttag", "bad.ttag", "--bin-ps", "10", "--window-ps", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("offset 14"), "{}", stderr(&o));
}

#[test]
fn numerical_failures_exit_two() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("t.csv"), "channel,time_ps\n0,100\n1,110\n").unwrap();
    let o = qsim(
        d.path(),
        &[
            "correlate-file", "t.csv", "t.csv", "--channel-a", "0", "--channel-b", "1", "--bin-ps", "10",
            "--window-ps", "1000", "--plateau", "0.1",
        ],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bessel_table_sums_to_one() {
    let d = tempfile::tempdir().unwrap();
    let o = ok(qsim(d.path(), &["bessel", "--beta", "2.404825557695773"]));
    let rows = csv_rows_from(&stdout(&o));
    let total: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let carrier = rows.iter().find(|r| r[0] == "0").unwrap();
    assert!(carrier[2].parse::<f64>().unwrap() < 1e-24);
}

#[test]
fn spectrum_subcommand_peaks_on_the_ladder() {
    let d = tempfile::tempdir().unwrap();
    ok(qsim(d.path(), &["spectrum", "--beta", "1", "--drive-ghz", "5", "--out", "s.csv"]));
    let rows = csv_rows(&d.path().join("s.csv"));
    let (f, y): (Vec<f64>, Vec<f64>) =
        rows.iter().map(|r| (r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap())).unzip();
    let top = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(f[top].abs() < 1e6);
    let o = qsim(d.path(), &["spectrum", "--beta", "1", "--drive-ghz", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("drive-ghz"));
}
