use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tcomfort::formats;
use tcomfort::svg::data_values;

fn tcomfort(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcomfort")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tcomfort(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// A simulated session carried through extraction, conditioning and
/// dataset assembly.
fn run_chain(dir: &Path, protocol: &str, seed: &str) {
    let d = |f: &str| s(&dir.join(f));
    ok(&["simulate", "--protocol", protocol, "--seed", seed, "--out", &d("")]);
    let views: Vec<String> = (0..10).map(|i| d(&format!("calibration/view_{i:02}.txt"))).collect();
    let mut args: Vec<&str> = vec!["calibrate", "--seed", "1", "--out"];
    let prior = d("prior.txt");
    args.push(&prior);
    args.push("--correspondences");
    args.extend(views.iter().map(String::as_str));
    ok(&args);
    ok(&["extract", "--session", &d("manifest.txt"), "--prior", &prior, "--seed", "1", "--jobs", "2", "--out", &d("features.csv"), "--registration-log", &d("reg.txt")]);
    ok(&["condition", "--features", &d("features.csv"), "--out", &d("cond.csv"), "--report", &d("cond_report.csv")]);
    ok(&["dataset", "--features", &d("cond.csv"), "--votes", &d("votes.csv"), "--room", &d("room.csv"), "--out", &d("skin.csv")]);
}

fn exp1() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = scratch("exp1_seed2");
        run_chain(&dir, "exp1", "2");
        dir
    })
}

#[test]
fn exp2_chain_runs_to_eval_unattended() {
    let dir = scratch("exp2_seed7");
    run_chain(&dir, "exp2", "7");
    let d = |f: &str| s(&dir.join(f));
    ok(&["dataset", "--features", &d("cond.csv"), "--votes", &d("votes.csv"), "--kind", "pixel_intensity", "--out", &d("intensity.csv")]);
    let corr = ok(&["correlate", "--dataset", &d("skin.csv"), &d("intensity.csv"), "--room", &d("room.csv"), "--out", &d("corr.csv")]);
    assert!(corr.contains("skin_temperature_C="), "{corr}");
    ok(&["train", "--dataset", &d("skin.csv"), "--model", "random_forest", "--seed", "3", "--out", &d("rf.bin")]);
    for model in ["random_forest", "knn", "svm"] {
        let line = ok(&["eval", "--dataset", &d("skin.csv"), "--model", model, "--seed", "1", "--out", &d(&format!("eval_{model}.txt"))]);
        let acc: f64 = line.split_whitespace().find_map(|t| t.strip_prefix("accuracy=")).unwrap().parse().unwrap();
        let base: f64 = line.split_whitespace().find_map(|t| t.strip_prefix("majority_baseline=")).unwrap().parse().unwrap();
        assert!(acc > base, "{model}: {line}");
    }
    let text = std::fs::read_to_string(dir.join("skin.csv")).unwrap();
    let ds = formats::parse_dataset(&text, Path::new("skin.csv")).unwrap();
    assert_eq!(ds.len(), 5400);
    assert!(ds.regions.iter().all(|r| !r.is_eye()), "exp2 omits the eyes");
}

#[test]
fn exp1_dataset_has_24_frames_per_vote() {
    let text = std::fs::read_to_string(exp1().join("skin.csv")).unwrap();
    let d = formats::parse_dataset(&text, Path::new("skin.csv")).unwrap();
    assert_eq!(d.len(), 720);
    let mut per_vote = BTreeMap::new();
    for i in 0..d.len() {
        *per_vote.entry(d.vote_window(i)).or_insert(0) += 1;
    }
    assert_eq!(per_vote.len(), 30);
    assert!(per_vote.values().all(|&c| c == 24));
    assert!(text.starts_with("# tcomfort "));
    assert!(text.lines().nth(1).unwrap().starts_with("# config subcommand=dataset"));
}

#[test]
fn eval_reports_are_byte_identical() {
    let dir = exp1();
    let d = |f: &str| s(&dir.join(f));
    let args = |out: &str| {
        ["eval", "--dataset", &d("skin.csv"), "--model", "random_forest", "--folds", "5", "--split", "blocked_by_vote", "--seed", "1", "--out", out].map(String::from)
    };
    let (a, b) = (d("eval_a.txt"), d("eval_b.txt"));
    ok(&args(&a).each_ref().map(String::as_str));
    ok(&args(&b).each_ref().map(String::as_str));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn registration_log_matches_extraction() {
    let dir = exp1();
    let d = |f: &str| s(&dir.join(f));
    ok(&["register", "--session", &d("manifest.txt"), "--prior", &d("prior.txt"), "--seed", "1", "--out", &d("register.txt")]);
    let p = Path::new("log");
    let a = formats::parse_registration_log(&std::fs::read_to_string(dir.join("register.txt")).unwrap(), p).unwrap();
    let b = formats::parse_registration_log(&std::fs::read_to_string(dir.join("reg.txt")).unwrap(), p).unwrap();
    assert_eq!(a, b, "worker count must not change results");
    assert_eq!(a.len(), 720);
    assert!(a.iter().all(|r| r.result.n_inliers <= r.result.n_matches));
}

#[test]
fn reports_plot_the_table_values() {
    let dir = exp1();
    let d = |f: &str| s(&dir.join(f));
    ok(&["eval", "--dataset", &d("skin.csv"), "--model", "knn", "--seed", "1", "--out", &d("eval_knn.txt")]);
    ok(&["report", "--input", &d("eval_knn.txt"), "--out", &d("report_eval")]);
    let tsv = std::fs::read_to_string(dir.join("report_eval/confusion.tsv")).unwrap();
    let svg = std::fs::read_to_string(dir.join("report_eval/confusion.svg")).unwrap();
    let cells: Vec<&str> = tsv.lines().skip(1).flat_map(|l| l.split('\t').skip(1)).collect();
    assert_eq!(data_values(&svg), cells);

    ok(&["report", "--input", &d("features.csv"), "--conditioned", &d("cond.csv"), "--out", &d("report_features")]);
    let tsv = std::fs::read_to_string(dir.join("report_features/nose_skin_temperature_C_series.tsv")).unwrap();
    let svg = std::fs::read_to_string(dir.join("report_features/nose_skin_temperature_C_series.svg")).unwrap();
    let values: Vec<&str> = tsv.lines().skip(1).map(|l| l.rsplit('\t').next().unwrap()).collect();
    assert_eq!(values.len(), 1440);
    assert_eq!(data_values(&svg), values);
    // the plotted strings are the ones in the source tables
    let source = std::fs::read_to_string(dir.join("features.csv")).unwrap();
    let nose: Vec<&str> = source.lines().filter(|l| l.contains(",nose,skin_temperature_C,")).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(&values[..720], &nose[..]);
    let trend = std::fs::read_to_string(dir.join("report_features/nose_skin_temperature_C_trend.svg")).unwrap();
    assert_eq!(data_values(&trend).len(), 1440);
}

fn error_line(out: &Output) -> String {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    lines[0].to_string()
}

#[test]
fn exit_codes_are_fixed() {
    let out = tcomfort(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(error_line(&out).starts_with("error code=64 kind=usage message="));

    let out = tcomfort(&["eval", "--dataset", "x.csv", "--model", "knn", "--out", "y"]);
    assert_eq!(out.status.code(), Some(64), "missing --seed is a usage error");

    let dir = scratch("errors");
    let missing = s(&dir.join("missing.csv"));
    let out = tcomfort(&["condition", "--features", &missing, "--out", &s(&dir.join("o")), "--report", &s(&dir.join("r"))]);
    assert_eq!(out.status.code(), Some(65));
    assert!(error_line(&out).contains("kind=io"));

    // a truncated frame names its byte offset
    let session = dir.join("session");
    ok(&["simulate", "--protocol", "exp1", "--seed", "0", "--out", &s(&session)]);
    let frame = session.join("thermal/00003.pgm");
    let bytes = std::fs::read(&frame).unwrap();
    std::fs::write(&frame, &bytes[..bytes.len() - 10]).unwrap();
    let out = tcomfort(&["extract", "--session", &s(&session.join("manifest.txt")), "--seed", "1", "--out", &s(&dir.join("f.csv"))]);
    assert_eq!(out.status.code(), Some(65));
    let line = error_line(&out);
    assert!(line.contains("kind=parse") && line.contains(&format!("byte {}", bytes.len() - 10)), "{line}");

    // every label identical: training is a pipeline failure
    let votes = std::fs::read_to_string(session.join("votes.csv")).unwrap();
    let flat: String = votes.lines().map(|l| if l.starts_with('1') { format!("{},Neutral,NoChange\n", l.split(',').next().unwrap()) } else { format!("{l}\n") }).collect();
    std::fs::write(session.join("flat_votes.csv"), flat).unwrap();
    std::fs::write(&frame, &bytes).unwrap();
    ok(&["extract", "--session", &s(&session.join("manifest.txt")), "--seed", "1", "--kind", "skin_temperature_C", "--out", &s(&dir.join("f.csv"))]);
    ok(&["dataset", "--features", &s(&dir.join("f.csv")), "--votes", &s(&session.join("flat_votes.csv")), "--out", &s(&dir.join("flat.csv"))]);
    let out = tcomfort(&["train", "--dataset", &s(&dir.join("flat.csv")), "--model", "knn", "--seed", "1", "--out", &s(&dir.join("m.bin"))]);
    assert_eq!(out.status.code(), Some(70));
    assert!(error_line(&out).contains("kind=pipeline"));

    // manifests that reference orphan frames are bad input
    let manifest = std::fs::read_to_string(session.join("manifest.txt")).unwrap();
    let broken = manifest.replacen("visual 1610000005000 ", "visual 1610000009000 ", 1);
    std::fs::write(session.join("broken.txt"), broken).unwrap();
    let out = tcomfort(&["register", "--session", &s(&session.join("broken.txt")), "--seed", "1", "--out", &s(&dir.join("r.txt"))]);
    assert_eq!(out.status.code(), Some(65));
    assert!(error_line(&out).contains("kind=session"));
}
