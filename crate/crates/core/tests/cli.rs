use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use snsng::experiment::output;

const SMALL: &[&str] = &["--n", "24", "--W", "2", "--generations", "6"];

fn snsng(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snsng"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().chain(SMALL).copied().collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_owned()).collect()
}

#[test]
fn run_with_zero_pi_pays_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = snsng(tmp.path(), &with_small(&["run", "--pi", "0", "--out", "r"]));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("seeds: graph=1 profiles=2 sim=3"));
    let dir = tmp.path().join("r");
    let manifest = output::read_manifest(&dir).unwrap();
    assert_eq!(manifest.config.pi, 0.0);
    let k = csv_column(&dir.join(output::AGENTS), "K");
    assert_eq!(k.len(), 48);
    assert!(k.iter().all(|v| v.parse::<f64>().unwrap() == 0.0));
}

#[test]
fn default_output_directory_is_out() {
    let tmp = tempfile::tempdir().unwrap();
    let out = snsng(tmp.path(), &with_small(&["run"]));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(tmp.path().join("out").join(output::MANIFEST).is_file());
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let out = snsng(
        tmp.path(),
        &with_small(&["sweep", "--pi-values", "0,1,2", "--seeds", "5", "--out", "s"]),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let pis = csv_column(&tmp.path().join("s").join("sweep.csv"), "pi");
    assert_eq!(pis.len(), 15);
    let seeds = csv_column(&tmp.path().join("s").join("sweep.csv"), "seed");
    assert_eq!(seeds[..5], ["3", "4", "5", "6", "7"]);

    let analyzed = snsng(tmp.path(), &["analyze", "s"]);
    assert!(analyzed.status.success());
    assert!(String::from_utf8_lossy(&analyzed.stdout).contains("sweep"));
}

#[test]
fn flags_override_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("exp.cfg"),
        "# small run\nn = 24\nW = 2\ngenerations = 6\npi = 2.5\nseed_sim = 40\noutput_dir = from_file\n",
    )
    .unwrap();
    let out = snsng(tmp.path(), &["run", "--config", "exp.cfg", "--pi", "0.5", "--seed-graph", "9"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("seeds: graph=9 profiles=2 sim=40"));
    let manifest = output::read_manifest(&tmp.path().join("from_file")).unwrap();
    assert_eq!(manifest.config.pi, 0.5);
    assert_eq!(manifest.config.n, 24);
    assert_eq!(manifest.seeds.graph, 9);
}

#[test]
fn usage_errors_exit_2_and_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--bogus", "1", "--out", "x"],
        vec!["fly"],
        vec![],
        vec!["sweep", "--out", "x"],
        vec!["sweep", "--pi-values", "a,b", "--out", "x"],
        vec!["run", "--threads", "0", "--out", "x"],
        vec!["analyze"],
    ] {
        let out = snsng(tmp.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn config_errors_exit_3_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &str)] = &[
        (&["run", "--pi", "-1", "--out", "x"], "pi"),
        (&["run", "--n", "21", "--out", "x"], "n"),
        (&["run", "--optimizer", "GA", "--W", "10", "--out", "x"], "W"),
        (&["run", "--mutation_rate", "1.5", "--out", "x"], "mutation_rate"),
        (&["run", "--u", "oops", "--out", "x"], "u"),
        (&["gen-net", "--u", "1.0", "--out", "x"], "u"),
        (&["sweep", "--pi-values", "2,1", "--out", "x"], "pi"),
    ];
    for (args, key) in cases {
        let out = snsng(tmp.path(), args);
        assert_eq!(out.status.code(), Some(3), "{args:?}: {}", stderr(&out));
        let err = stderr(&out);
        let line = err.lines().last().unwrap();
        assert!(line.starts_with("error:") && line.contains(key), "{args:?}: {err}");
    }
    fs::write(tmp.path().join("bad.cfg"), "colour = blue\n").unwrap();
    let out = snsng(tmp.path(), &["run", "--config", "bad.cfg", "--out", "x"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("colour"));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn io_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = snsng(tmp.path(), &["run", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("missing.cfg"));
    let out = snsng(tmp.path(), &["analyze", "nowhere"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("nowhere"));
}

#[test]
fn gen_net_writes_a_readable_edge_list() {
    let tmp = tempfile::tempdir().unwrap();
    let out = snsng(tmp.path(), &["gen-net", "--n", "50", "--u", "0.5", "--seed-graph", "7", "--out", "g"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(tmp.path().join("g").join(output::NETWORK)).unwrap();
    assert!(text.starts_with("# nodes=50 u=0.5 seed=7\n"));
    let g = snsng::network::Graph::read_edge_list(text.as_bytes()).unwrap();
    let direct = snsng::network::generate_cnn(50, 0.5, &mut snsng::rng::seeded(7)).unwrap();
    assert_eq!(g, direct);
}

#[test]
fn analyze_checks_manifest_and_compares_optimizers() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(snsng(tmp.path(), &with_small(&["run", "--out", "m"])).status.success());
    let ga = ["run", "--optimizer", "GA", "--n", "24", "--generations", "6", "--out", "g"];
    assert!(snsng(tmp.path(), &ga).status.success());
    let out = snsng(tmp.path(), &["analyze", "m", "g"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches("manifest summary: match").count(), 2);
    assert!(stdout.contains("spearman_degree_Q="));
    assert!(stdout.contains("MWGA/GA"));

    // A tampered summary is reported and flips the exit status.
    let path = tmp.path().join("m").join(output::MANIFEST);
    let mut manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    manifest["summary"]["spearman_degree_q"] = serde_json::json!(0.99);
    fs::write(&path, manifest.to_string()).unwrap();
    let out = snsng(tmp.path(), &["analyze", "m"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("MISMATCH"));
}

#[test]
fn thread_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for (dir, threads) in [("a", "1"), ("b", "3")] {
        fs::create_dir(tmp.path().join(dir)).unwrap();
        let args = with_small(&["run", "--threads", threads, "--out", "r"]);
        assert!(snsng(&tmp.path().join(dir), &args).status.success());
    }
    for name in [output::AGENTS, output::SCATTER_ALPHA, output::TIMESERIES, output::MANIFEST] {
        let a = fs::read(tmp.path().join("a/r").join(name)).unwrap();
        let b = fs::read(tmp.path().join("b/r").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}
