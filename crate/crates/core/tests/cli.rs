use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qontinual");

fn repo_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("QONTINUAL_DATA_DIR").output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_toy(dir: &Path) {
    let rows = "0,1,0.1,0,0\n1,0,0,0.2,1\n0,0.9,0.2,0,0.1\n1,0.1,0,0.1,0.8\n";
    fs::write(dir.join("toy_train.csv"), format!("label,f0,f1,f2,f3\n{rows}")).unwrap();
    fs::write(dir.join("toy_test.csv"), format!("label,f0,f1,f2,f3\n{rows}")).unwrap();
    let rows = "1,0,1,0.2,0\n0,0.4,0,1,0.1\n1,0.1,0.9,0,0\n0,0,0.2,0.9,0.3\n";
    fs::write(dir.join("toy2_train.csv"), format!("label,f0,f1,f2,f3\n{rows}")).unwrap();
    fs::write(dir.join("toy2_test.csv"), format!("label,f0,f1,f2,f3\n{rows}")).unwrap();
}

#[test]
fn gen_data_tof_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["gen-data", "tof", "--n", "6", "--n-test", "2", "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["tof_train.csv", "tof_test.csv", "tof_manifest.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest = fs::read_to_string(a.join("tof_manifest.txt")).unwrap();
    assert!(manifest.contains("master_seed=7"));
}

#[test]
fn gen_data_mnist_pair_has_both_labels() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "gen-data", "mnist-pair", "--a", "0", "--b", "9", "--n-train", "5", "--n-test", "3", "--seed", "1",
        "--data-dir", repo_data().to_str().unwrap(), "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for split in ["train", "test"] {
        let text = fs::read_to_string(dir.path().join(format!("mnist_0_9_{split}.csv"))).unwrap();
        let labels: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert!(labels.contains(&"0") && labels.contains(&"1"));
    }
}

#[test]
fn missing_labels_file_is_a_file_error() {
    let dir = tempfile::tempdir().unwrap();
    let images = repo_data().join("mnist/mnist5k-images-idx3-ubyte.gz");
    let labels = dir.path().join("no-such-labels.idx");
    let o = run(&[
        "gen-data", "mnist-pair", "--a", "0", "--b", "9", "--images", images.to_str().unwrap(),
        "--labels", labels.to_str().unwrap(), "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no-such-labels.idx"));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(run(&["gen-data", "cifar"]).status.code(), Some(2));
    assert_eq!(run(&["gen-data", "mnist-pair", "--a", "3"]).status.code(), Some(2));
    assert_eq!(run(&["train", "--epochs", "many"]).status.code(), Some(2));
    let o = run(&["reproduce", "fig7"]);
    assert_eq!(o.status.code(), Some(2));
    for id in ["fig2", "fig3a", "fig3b", "fig3c", "figS2", "figS3"] {
        assert!(stderr(&o).contains(id));
    }
    for sub in ["gen-data", "train", "continual", "sweep", "plot", "reproduce"] {
        assert!(run(&[sub, "--help"]).status.success(), "{sub}");
    }
}

#[test]
fn toy_train_writes_one_row_per_split() {
    let dir = tempfile::tempdir().unwrap();
    write_toy(dir.path());
    let outs: Vec<PathBuf> = ["o1", "o2"].iter().map(|d| dir.path().join(d)).collect();
    for out in &outs {
        let o = run(&[
            "train", "--dataset", "toy", "--data-dir", dir.path().to_str().unwrap(), "--epochs", "1", "--layers", "1",
            "--seed", "4", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let csv = fs::read_to_string(outs[0].join("toy_curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2);
    assert_eq!(fs::read(outs[0].join("toy.ckpt")).unwrap(), fs::read(outs[1].join("toy.ckpt")).unwrap());

    // a malformed cache is a format error
    fs::write(dir.path().join("bad_train.csv"), "label,f0\n0,abc\n").unwrap();
    fs::write(dir.path().join("bad_test.csv"), "label,f0\n0,1\n").unwrap();
    let o = run(&["train", "--dataset", "bad", "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bad_train.csv:2"));
}

#[test]
fn continual_flags() {
    let dir = tempfile::tempdir().unwrap();
    write_toy(dir.path());
    let data = dir.path().to_str().unwrap();
    let base = ["continual", "--tasks", "cache:toy,cache:toy2", "--data-dir", data, "--epochs", "2", "--layers", "1"];

    let out = dir.path().join("off");
    let mut args = base.to_vec();
    args.extend(["--ewc", "off", "--lambda", "10", "--out", out.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let ck = fs::read_to_string(out.join("continual.ckpt")).unwrap();
    assert_eq!(ck.lines().filter(|l| l.starts_with("anchor ")).count(), 0);

    let out = dir.path().join("on");
    let mut args = base.to_vec();
    args.extend(["--ewc", "on", "--lambda", "3", "--out", out.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let ck = fs::read_to_string(out.join("continual.ckpt")).unwrap();
    let anchors: Vec<&str> = ck.lines().filter(|l| l.starts_with("anchor ")).collect();
    assert_eq!(anchors.len(), 1);
    assert!(anchors[0].starts_with("anchor toy lambda="));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("toy,") && summary.contains("toy2,"));

    // config file supplies values, flags override them
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "tasks=cache:toy,cache:toy2\nepochs=5\nn_layers=1\newc=on\nlambda=3\n").unwrap();
    let out2 = dir.path().join("conf");
    let o = run(&[
        "continual", "--config", conf.to_str().unwrap(), "--epochs", "2", "--data-dir", data, "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read(out.join("continual_curve.csv")).unwrap(), fs::read(out2.join("continual_curve.csv")).unwrap());
}

#[test]
fn full_fisher_bound_checked_before_training() {
    let dir = tempfile::tempdir().unwrap();
    write_toy(dir.path());
    // 2 qubits × 130 layers: 3·2·130 + 2 = 782 parameters
    let o = run(&[
        "continual", "--tasks", "cache:toy,cache:toy2", "--data-dir", dir.path().to_str().unwrap(), "--ewc", "on",
        "--fisher", "full", "--layers", "130", "--epochs", "1", "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("512"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn plot_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let header = "phase,epoch,task,split,accuracy,loss\n";
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, header).unwrap();
    let o = run(&["plot", empty.to_str().unwrap(), "--out", dir.path().join("e.svg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, format!("{header}1,1,a,test,0.5,0.6\n1,2,a,test,zero,0.6\n")).unwrap();
    let o = run(&["plot", bad.to_str().unwrap(), "--out", dir.path().join("b.svg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("bad.csv:3"));

    let good = dir.path().join("good.csv");
    let mut body = String::from(header);
    for phase in 1..=2 {
        for epoch in 1..=4 {
            body.push_str(&format!("{phase},{epoch},a&b,train,{},0.5\n", 0.5 + 0.1 * epoch as f64));
            body.push_str(&format!("{phase},{epoch},a&b,test,{},0.5\n", 0.4 + 0.1 * epoch as f64));
            if phase == 2 {
                body.push_str(&format!("{phase},{epoch},c,test,0.7,0.5\n"));
            }
        }
    }
    fs::write(&good, body).unwrap();
    let (s1, s2) = (dir.path().join("1.svg"), dir.path().join("2.svg"));
    for s in [&s1, &s2] {
        let o = run(&["plot", good.to_str().unwrap(), "--out", s.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let svg = fs::read_to_string(&s1).unwrap();
    assert_eq!(svg, fs::read_to_string(&s2).unwrap());
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.attribute("viewBox"), Some("0 0 800 500"));
    let lines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    assert_eq!(lines, 3);
    assert!(doc.descendants().any(|n| n.text() == Some("phase 2")));
}

#[test]
fn commands_do_not_touch_inputs() {
    let dir = tempfile::tempdir().unwrap();
    write_toy(dir.path());
    let before = fs::read(dir.path().join("toy_train.csv")).unwrap();
    let o = run(&[
        "train", "--dataset", "toy", "--data-dir", dir.path().to_str().unwrap(), "--epochs", "1", "--layers", "1",
        "--out", dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(before, fs::read(dir.path().join("toy_train.csv")).unwrap());
}
