//! End-to-end checks of the command-line surface: exit codes, file errors,
//! CSV replay and checkpoint round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypermsg"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hypermsg-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn codes_list_shows_bundled_codes() {
    let out = run(&["codes", "list"], &std::env::temp_dir());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in ["BCH(63,51)", "POLAR(64,48)", "LDPC-ARRAY(121,80)", "HAMMING(7,4)"] {
        assert!(stdout.contains(name), "missing {name} in:\n{stdout}");
    }
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let out = run(&["--definitely-not-a-flag"], &std::env::temp_dir());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_names_the_path() {
    let out = run(&["sweep", "--config", "missing.toml"], &std::env::temp_dir());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("missing.toml"), "{stderr}");
}

#[test]
fn gradcheck_passes_and_reports() {
    let out = run(&["gradcheck", "--cases", "12", "--seed", "7"], &std::env::temp_dir());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("12/12 passed"), "{stdout}");
}

#[test]
fn sweep_csv_replays_identically() {
    let dir = tempdir("sweep");
    std::fs::write(
        dir.join("sweep.toml"),
        r#"
code = "REP(3)"
snr_points_db = [2.0, 4.0]
variants = ["uncoded", "plain"]
max_frames = 1500
min_bit_errors = 40
seed = 9
iterations = 3
"#,
    )
    .unwrap();
    let out = run(
        &["sweep", "--config", "sweep.toml", "--out", "first.csv"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // Replaying the CSV reproduces every number.
    let out = run(
        &["sweep", "--config", "first.csv", "--out", "second.csv"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read_to_string(dir.join("first.csv")).unwrap();
    let b = std::fs::read_to_string(dir.join("second.csv")).unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("# hypermsg sweep v1"));
    assert!(a.contains("snr_db,variant,frames"));
}

#[test]
fn weighted_training_checkpoint_feeds_sweep_and_compare() {
    let dir = tempdir("train");
    std::fs::write(
        dir.join("train.toml"),
        r#"
code = "REP(3)"
variant = "weighted"
lr = 5e-3
batch_size = 6
steps = 30
snr_range_db = [1.0, 4.0]
iterations = 2
"#,
    )
    .unwrap();
    let out = run(
        &["train", "--config", "train.toml", "--seed", "4", "--out", "w.ckpt"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("\"diverged\": false"), "{stdout}");
    assert!(dir.join("w.ckpt").exists());
    assert!(dir.join("w.loss.csv").exists());

    std::fs::write(
        dir.join("sweep.toml"),
        r#"
code = "REP(3)"
snr_points_db = [3.0]
variants = ["plain", "weighted"]
max_frames = 600
min_bit_errors = 20
seed = 2
iterations = 2
checkpoint = "w.ckpt"
"#,
    )
    .unwrap();
    let out = run(&["sweep", "--config", "sweep.toml", "--out", "s.csv"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("s.csv")).unwrap();
    assert!(csv.contains(",weighted,"), "{csv}");

    std::fs::write(
        dir.join("cmp.toml"),
        r#"
code = "REP(3)"
snr_points_db = [3.0]
variant_a = "weighted"
variant_b = "plain"
frames_per_point = 300
iterations = 2
checkpoint_a = "w.ckpt"
"#,
    )
    .unwrap();
    let out = run(&["compare", "--config", "cmp.toml"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("# pairing = common-random-numbers"), "{csv}");
}

#[test]
fn gin_train_and_eval_round_trip() {
    let dir = tempdir("gin");
    std::fs::write(
        dir.join("gin.toml"),
        r#"
family = "cycle-vs-path"
sizes = [6, 7, 8]
data_seed = 1
variant = "plain"
hidden = 8
k_iters = 2
lr = 1e-2
epochs = 200
budget_secs = 60
"#,
    )
    .unwrap();
    let out = run(
        &["gin-train", "--config", "gin.toml", "--out", "g.ckpt"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("g.ckpt").exists());
    let out = run(
        &["gin-eval", "--config", "gin.toml", "--checkpoint", "g.ckpt"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("test_accuracy"), "{stdout}");
}

#[test]
fn unknown_code_is_a_clean_error() {
    let dir = tempdir("badcode");
    std::fs::write(
        dir.join("sweep.toml"),
        "code = \"GOLAY(23,12)\"\nsnr_points_db = [2.0]\nvariants = [\"plain\"]\n",
    )
    .unwrap();
    let out = run(&["sweep", "--config", "sweep.toml"], &dir);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("GOLAY(23,12)"), "{stderr}");
}
