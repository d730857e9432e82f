use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mpfusion::traindata::read_dataset;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpfusion"))
        .args(args)
        .output()
        .expect("spawn mpfusion")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    _tmp: tempfile::TempDir,
    root: PathBuf,
    data: PathBuf,
}

fn fixture(extra: &[&str]) -> Fixture {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let data = root.join("data");
    let mut args = vec![
        "generate",
        "--out",
        s(&data),
        "--subjects",
        "6",
        "--seed",
        "4",
        "--duration",
        "30",
    ];
    args.extend_from_slice(extra);
    ok(&args);
    Fixture { _tmp: tmp, root, data }
}

fn train(f: &Fixture, name: &str, extra: &[&str]) -> PathBuf {
    let out = f.root.join(name);
    let mut args = vec!["train", "--out", s(&out), "--data", s(&f.data), "--epochs", "2"];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

fn metrics_row(dir: &Path) -> Vec<String> {
    let text = fs::read_to_string(dir.join("metrics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("model,modalities,acc,auc,eer,f1"));
    lines.next().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn generate_splits_six_subjects_four_one_one() {
    let f = fixture(&[]);
    let ds = read_dataset(&f.data).unwrap();
    assert_eq!(ds.split_sizes(), (4, 1, 1));
    assert_eq!(ds.subjects.len(), 6);
    assert!(fs::read_to_string(f.data.join("config.echo"))
        .unwrap()
        .starts_with("# mpfusion generate\n"));
}

#[test]
fn train_writes_log_and_checkpoint() {
    let f = fixture(&[]);
    let out = train(&f, "mpf", &["--mask", "FS"]);
    let log = fs::read_to_string(out.join("trainlog.csv")).unwrap();
    let mut lines = log.lines();
    assert_eq!(
        lines.next(),
        Some("epoch,lr,train_loss,dev_acc,dev_auc,dev_eer,dev_f1,selected")
    );
    assert_eq!(lines.count(), 2);
    assert!(out.join("checkpoint").is_file());
    let echo = fs::read_to_string(out.join("config.echo")).unwrap();
    assert!(echo.contains("mask = FS\n") && echo.contains("epochs = 2\n"));
}

#[test]
fn eval_is_repeatable() {
    let f = fixture(&[]);
    let model = train(&f, "nn", &["--variant", "nn-cube"]);
    let ckpt = model.join("checkpoint");
    let a = f.root.join("eval_a");
    let b = f.root.join("eval_b");
    for dir in [&a, &b] {
        ok(&["eval", "--out", s(dir), "--data", s(&f.data), "--checkpoint", s(&ckpt)]);
    }
    assert_eq!(
        fs::read(a.join("metrics.csv")).unwrap(),
        fs::read(b.join("metrics.csv")).unwrap()
    );
    assert_eq!(metrics_row(&a)[0], "NN-Cube");
}

#[test]
fn majority_checkpoint_scores_half_auc() {
    let f = fixture(&[]);
    let model = train(&f, "maj", &["--variant", "majority"]);
    let out = f.root.join("eval");
    ok(&[
        "eval",
        "--out",
        s(&out),
        "--data",
        s(&f.data),
        "--checkpoint",
        s(&model.join("checkpoint")),
    ]);
    let row = metrics_row(&out);
    assert_eq!(row[0], "Majority");
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn roc_curve_spans_the_unit_square() {
    let f = fixture(&[]);
    let model = train(&f, "svm", &["--variant", "svm"]);
    let out = f.root.join("roc");
    ok(&[
        "roc",
        "--out",
        s(&out),
        "--data",
        s(&f.data),
        "--checkpoint",
        s(&model.join("checkpoint")),
        "--split",
        "dev",
    ]);
    let text = fs::read_to_string(out.join("roc.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.first().unwrap(), &vec![0.0, 0.0]);
    assert_eq!(rows.last().unwrap(), &vec![1.0, 1.0]);
    assert!(rows.windows(2).all(|w| w[1][0] >= w[0][0] && w[1][1] >= w[0][1]));
}

#[test]
fn viz1d_is_normalised_and_aligned_with_labels() {
    let f = fixture(&[]);
    let out = f.root.join("viz");
    ok(&["viz1d", "--out", s(&out), "--data", s(&f.data), "--subject", "2"]);
    let text = fs::read_to_string(out.join("viz1d_subject2.csv")).unwrap();
    let ds = read_dataset(&f.data).unwrap();
    let frames = &ds.subject(2).unwrap().frames;
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,face_1d,speech_1d,car_1d,label"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), frames.len());
    let mut peak = [0.0f64; 3];
    for (row, frame) in rows.iter().zip(frames) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0].parse::<usize>().unwrap(), frame.t);
        for k in 0..3 {
            let v: f64 = cols[k + 1].parse().unwrap();
            assert!((-1.0..=1.0).contains(&v));
            peak[k] = peak[k].max(v.abs());
        }
        assert_eq!(cols[4], if frame.label { "1" } else { "0" });
    }
    assert_eq!(peak, [1.0; 3]);
}

#[test]
fn config_file_and_overrides_follow_precedence() {
    let f = fixture(&[]);
    let cfg = f.root.join("run.cfg");
    fs::write(&cfg, "# shared\nepochs = 4\nlr0 = 0.01\nsubjects = 99\n").unwrap();
    let out = train(
        &f,
        "cfg",
        &["--config", s(&cfg), "--set", "lr0=0.02", "--set", "hidden=6"],
    );
    let echo = fs::read_to_string(out.join("config.echo")).unwrap();
    // --epochs 2 on the command line beats the file.
    assert!(echo.contains("epochs = 2\n"));
    assert!(echo.contains("lr0 = 0.02\n"));
    assert!(echo.contains("hidden = 6\n"));
    assert!(!echo.contains("subjects"));
}

#[test]
fn mismatched_dims_are_rejected() {
    let f = fixture(&[]);
    let model = train(&f, "mpf", &[]);
    let other = f.root.join("other");
    ok(&[
        "generate",
        "--out",
        s(&other),
        "--subjects",
        "6",
        "--seed",
        "4",
        "--duration",
        "30",
        "--set",
        "speech_dims=8",
    ]);
    let out = run(&[
        "eval",
        "--out",
        s(&f.root.join("e")),
        "--data",
        s(&other),
        "--checkpoint",
        s(&model.join("checkpoint")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: ") && err.contains("dims"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn bad_input_exits_nonzero_with_one_line() {
    let f = fixture(&[]);
    let x = f.root.join("x");
    let x = s(&x);
    let cases: [(&[&str], i32); 4] = [
        (&["train", "--out", x], 2),
        (&["train", "--out", x, "--data", s(&f.data), "--variant", "quantum"], 1),
        (
            &["train", "--out", x, "--data", s(&f.data), "--set", "learning_rate=1"],
            1,
        ),
        (
            &[
                "eval",
                "--out",
                x,
                "--data",
                s(&f.data),
                "--checkpoint",
                "/nonexistent/ckpt",
            ],
            1,
        ),
    ];
    for (args, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn ablate_writes_the_full_table() {
    let f = fixture(&[]);
    let out = f.root.join("ablate");
    let stdout = ok(&[
        "ablate",
        "--out",
        s(&out),
        "--data",
        s(&f.data),
        "--epochs",
        "1",
        "--threshold",
        "dev",
    ]);
    let table = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let models: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(models.len(), 12);
    assert_eq!((models[0], models[7], models[11]), ("Majority", "SVM", "MPF"));
    assert!(stdout.starts_with(&table));
    assert!(stdout.contains("not a kernel SVM"));
    assert!(fs::read_to_string(out.join("config.echo"))
        .unwrap()
        .contains("threshold = dev\n"));
}
