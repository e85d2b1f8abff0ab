use std::path::Path;
use std::process::{Command, Output};

fn monotone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monotone")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 8] = [
    "--set",
    "runs=2",
    "--set",
    "test_size=300",
    "--set",
    "plan.rounds=8",
    "--set",
    "learners=[\"SL\",\"MT_SIMPLE\",\"MT_HT\",\"MT_CV\",\"LAMBDA_S\"]",
];

fn run_small(out: &Path) -> Output {
    let mut args = vec!["run", "--config", "table1-dipping", "--out", out.to_str().unwrap()];
    args.extend(SMALL);
    monotone(&args)
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res");
    let o = run_small(&res);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["rounds.csv", "summary.csv", "summary.json"] {
        assert!(res.join(f).exists(), "{f}");
    }
    let rounds = std::fs::read_to_string(res.join("rounds.csv")).unwrap();
    assert_eq!(rounds.lines().count(), 1 + 2 * 5 * 8);

    let rep = dir.path().join("rep");
    let o = monotone(&["report", "--in", res.to_str().unwrap(), "--out", rep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(rep.join("summary_table.txt")).unwrap();
    for label in ["SL", "M_S", "M_HT", "M_CV", "λ_S"] {
        assert!(table.contains(label), "{label} missing from\n{table}");
    }
    assert!(table.contains(" *"));
    let curve = std::fs::read_to_string(rep.join("curve_MT_HT.csv")).unwrap();
    assert!(curve.starts_with("round,training_size,mean_error,std_error"));
    assert_eq!(curve.lines().count(), 9);

    let again = dir.path().join("rep2");
    let o = monotone(&["report", "--in", res.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    for entry in std::fs::read_dir(&rep).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(std::fs::read(rep.join(&name)).unwrap(), std::fs::read(again.join(&name)).unwrap());
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_small(&a).status.success());
    assert!(run_small(&b).status.success());
    for f in ["rounds.csv", "summary.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let cases = [
        ("runs=0", "runs"),
        ("alpha=0.7", "alpha"),
        ("plan.val_per_round=0", "plan.val_per_round"),
        ("plan.bogus=1", "plan.bogus"),
        ("learners=[\"NOPE\"]", "learners"),
    ];
    for (set, key) in cases {
        let o = monotone(&["run", "--config", "table1-peaking", "--set", set, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{set}");
        assert!(stderr(&o).contains(key), "{set}: {}", stderr(&o));
        assert!(!out.exists());
    }
    let o = monotone(&["run", "--config", "/no/such/file.toml", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 1\n[plan]\nrounds = 2\ntrain_per_round = 1\nval_per_round = 1\nsampling = \"random\"\nappend_validation = false\n[source]\nkind = \"peaking\"\n").unwrap();
    let o = monotone(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`source.dim`"), "{}", stderr(&o));
}

#[test]
fn report_without_results_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep");
    let o = monotone(&["report", "--in", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    std::fs::write(dir.path().join("summary.json"), "{ not json").unwrap();
    let o = monotone(&["report", "--in", dir.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("sw");
    let mut args = vec![
        "sweep",
        "--config",
        "table1-dipping",
        "--alphas",
        "0.01,0.5",
        "--nvs",
        "2,8",
        "--out",
        res.to_str().unwrap(),
    ];
    args.extend(SMALL);
    args.extend(["--set", "learners=[\"SL\",\"MT_HT\"]"]);
    let o = monotone(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = dir.path().join("rep");
    let o = monotone(&["report", "--in", res.to_str().unwrap(), "--out", rep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let surface = std::fs::read_to_string(rep.join("sweep_surface.csv")).unwrap();
    assert!(surface.starts_with("alpha,nv,learner,aulc,fraction"));
    assert_eq!(surface.lines().count(), 1 + 4 * 2);
    assert!(!rep.join("summary_table.txt").exists());
}

#[test]
fn verify_prints_checks() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["verify", "--config", "table1-dipping", "--out", dir.path().to_str().unwrap()];
    args.extend(SMALL);
    let o = monotone(&args);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(matches!(o.status.code(), Some(0) | Some(3)));
    assert!(stdout.contains("MT_HT non-monotone decisions"), "{stdout}");
    assert!(stdout.contains("MT_SIMPLE final error within"), "{stdout}");
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn gen_data_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    std::fs::write(&spec, "seed = 4\n[source]\nkind = \"peaking\"\ndim = 3\n").unwrap();
    let out = dir.path().join("d.csv");
    let o = monotone(&["gen-data", "--spec", spec.to_str().unwrap(), "--count", "25", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,x1,x2,label"));
    assert_eq!(lines.count(), 25);

    let o = monotone(&["gen-data", "--spec", spec.to_str().unwrap(), "--count", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mnist_without_files_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_monotone"))
        .args(["run", "--config", "table1-mnist", "--out", dir.path().join("m").to_str().unwrap()])
        .env_remove("MNIST_DIR")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("source."), "{}", stderr(&o));
}
