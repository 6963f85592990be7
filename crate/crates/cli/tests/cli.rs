use std::fs;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixed-hardy")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn doob_check_emits_one_row_per_trial() {
    let o = bin(&[
        "doob-check",
        "--dims",
        "2",
        "--depth",
        "2",
        "--p",
        "1.5,1.5",
        "--p",
        "2,3",
        "--trials",
        "4",
        "--seed",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("suite,trial,seed,exponent,hypotheses,status,"));
    assert_eq!(lines.len(), 1 + 8);
    assert!(lines[1..].iter().all(|l| l.contains(",pass,")));
}

#[test]
fn same_seed_gives_identical_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = bin(&[
            "bdg-ratio",
            "--depth",
            "2",
            "--trials",
            "20",
            "--seed",
            "5",
            "--svg",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(a.join("bdg-ratio.csv")).unwrap(), fs::read(b.join("bdg-ratio.csv")).unwrap());
    assert!(a.join("bdg-ratio.svg").exists());
}

#[test]
fn counterexample_reports_the_sixteenth_function() {
    let o = bin(&["counterexample", "--n", "16", "--p", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    // suite,trial,seed,"(2","inf)",hypotheses,status,n,norm_f,...
    assert_eq!(fields[7], "16");
    assert_eq!(fields[8], "1");
}

#[test]
fn decompose_prints_manifest_and_error_line() {
    for kind in ["s", "P", "Q", "M", "S"] {
        let o = bin(&["decompose", "--kind", kind, "--dims", "1", "--depth", "3", "--p", "1.5", "--seed", "2"]);
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.starts_with("k,mu,chi_norm,atom_sup\n"));
        let err: f64 = text.lines().find_map(|l| l.strip_prefix("reconstruction_error=")).unwrap().parse().unwrap();
        assert!(err < 1e-9);
    }
}

#[test]
fn norm_reads_a_martingale_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    let text = r#"{"schema_version":1,
        "space":{"schema_version":1,"coordinates":[{"weights":[0.5,0.5],"partitions":[[[0,1]],[[0],[1]]]}]},
        "terminal":[1.0,-1.0]}"#;
    fs::write(&path, text).unwrap();
    let o = bin(&["norm", "--input", path.to_str().unwrap(), "--p", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1..4], ["1", "1", "1"]);
}

#[test]
fn run_reads_config_and_rejects_zero_trials() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(
        &good,
        "schema_version = 1\nsuites = [\"atomic-roundtrip\", \"weak-type\"]\ntrials = 3\nseed = 7\n\
         [space]\nkind = \"dyadic\"\ndims = 2\ndepth = 2\n[output]\ndir = \"out\"\n",
    )
    .unwrap();
    let o = bin(&["run", "--config", good.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/atomic-roundtrip.csv").exists());
    assert!(dir.path().join("out/weak-type.csv").exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "schema_version = 1\nsuites = [\"doob-check\"]\ntrials = 0\n").unwrap();
    let o = bin(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
}

#[test]
fn malformed_input_is_an_error() {
    let o = bin(&["doob-check", "--p", "2,x"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&["decompose", "--p", "2,2", "--p", "3,3"]);
    assert_eq!(o.status.code(), Some(2));
}
