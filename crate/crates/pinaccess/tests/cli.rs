//! End-to-end checks of the command-line binary: exit codes, seed
//! sources, config file precedence, and incremental reruns.

use pinaccess::fixtures;
use pinaccess::techlib::serialize_library;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pinaccess"))
}

fn write_library(dir: &Path, name: &str, which: &str) -> std::path::PathBuf {
    let (rules, cells) = match which {
        "toy" => fixtures::toy_clean_library(),
        "planted" => fixtures::planted_defect_library(),
        other => panic!("unknown library {other}"),
    };
    let path = dir.join(name);
    std::fs::write(&path, serialize_library(&rules, &cells)).unwrap();
    path
}

#[test]
fn clean_library_exits_zero_in_every_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = write_library(tmp.path(), "toy.lib", "toy");
    for mode in ["single_cell_only", "cell_by_cell_only", "all_combo_in_one_cell_only", "all"] {
        let out = tmp.path().join(format!("out_{mode}"));
        let status = bin()
            .args(["--lib", lib.to_str().unwrap(), "--mode", mode, "--out", out.to_str().unwrap()])
            .args(["--seed", "7"])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0), "mode {mode}");
        let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
        assert!(summary.contains("cells without DRC errors"));
        assert!(summary.contains("##### 0 cells with DRC errors #####"));
    }
}

#[test]
fn planted_library_exits_two_and_names_the_master() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = write_library(tmp.path(), "planted.lib", "planted");
    let out = tmp.path().join("out");
    let status = bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["--method", "proposed", "--connectivity", "random", "--straps", "on", "--seed", "7"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("WEDGE"), "defective master missing from summary:\n{summary}");
}

#[test]
fn bad_configuration_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = write_library(tmp.path(), "toy.lib", "toy");
    // missing --lib
    let status = bin().args(["--out", tmp.path().join("o1").to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(1));
    // unreadable library path
    let status = bin()
        .args(["--lib", "no/such/file.lib", "--out", tmp.path().join("o2").to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // unknown ignore rule
    let status = bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", tmp.path().join("o3").to_str().unwrap()])
        .args(["--ignore-rule", "No such rule"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // malformed margin
    let status = bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", tmp.path().join("o4").to_str().unwrap()])
        .args(["--margin-scale", "zero.five"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn env_seed_matches_explicit_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = write_library(tmp.path(), "planted.lib", "planted");
    let out_flag = tmp.path().join("flag");
    let out_env = tmp.path().join("env");
    bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", out_flag.to_str().unwrap(), "--seed", "23"])
        .args(["--connectivity", "random", "--straps", "on"])
        .status()
        .unwrap();
    bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", out_env.to_str().unwrap()])
        .args(["--connectivity", "random", "--straps", "on"])
        .env("PINACCESS_SEED", "23")
        .status()
        .unwrap();
    let a = std::fs::read_to_string(out_flag.join("summary.csv")).unwrap();
    let b = std::fs::read_to_string(out_env.join("summary.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = write_library(tmp.path(), "planted.lib", "planted");
    let config = tmp.path().join("run.conf");
    std::fs::write(
        &config,
        format!(
            "# defaults for this library\nlib = {}\nconnectivity = random\nstraps = on\nseed = 3\n",
            lib.display()
        ),
    )
    .unwrap();

    // config alone
    let out_cfg = tmp.path().join("cfg");
    bin()
        .args(["--config", config.to_str().unwrap(), "--out", out_cfg.to_str().unwrap()])
        .status()
        .unwrap();
    // same but CLI seed wins
    let out_cli = tmp.path().join("cli");
    bin()
        .args(["--config", config.to_str().unwrap(), "--out", out_cli.to_str().unwrap(), "--seed", "5"])
        .status()
        .unwrap();
    // reference runs with explicit seeds
    let out_s3 = tmp.path().join("s3");
    bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", out_s3.to_str().unwrap()])
        .args(["--connectivity", "random", "--straps", "on", "--seed", "3"])
        .status()
        .unwrap();
    let out_s5 = tmp.path().join("s5");
    bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", out_s5.to_str().unwrap()])
        .args(["--connectivity", "random", "--straps", "on", "--seed", "5"])
        .status()
        .unwrap();

    let read = |p: &Path| std::fs::read_to_string(p.join("summary.csv")).unwrap();
    assert_eq!(read(&out_cfg), read(&out_s3));
    assert_eq!(read(&out_cli), read(&out_s5));
}

#[test]
fn second_run_carries_artifacts_forward() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = write_library(tmp.path(), "planted.lib", "planted");
    let out = tmp.path().join("incr");
    let run = || {
        bin()
            .args(["--lib", lib.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .args(["--connectivity", "random", "--straps", "on", "--seed", "7"])
            .status()
            .unwrap()
    };
    assert_eq!(run().code(), Some(2));
    let probe = out.join("scell_WEDGE.v");
    let first = std::fs::metadata(&probe).unwrap().modified().unwrap();
    let summary_first = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    std::thread::sleep(std::time::Duration::from_millis(20));
    assert_eq!(run().code(), Some(2));
    let second = std::fs::metadata(&probe).unwrap().modified().unwrap();
    assert_eq!(first, second, "unchanged testcell artifacts must not be rewritten");
    let summary_second = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert_eq!(summary_first, summary_second);
}

#[test]
fn corrupt_manifest_warns_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let lib = write_library(tmp.path(), "toy.lib", "toy");
    let out = tmp.path().join("corrupt");
    bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"])
        .status()
        .unwrap();
    std::fs::write(out.join("manifest.csv"), "not,a,manifest\nat all\n").unwrap();
    let output = bin()
        .args(["--lib", lib.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("manifest"), "expected a manifest warning, got: {stderr}");
    // manifest is rebuilt
    let manifest = std::fs::read_to_string(out.join("manifest.csv")).unwrap();
    assert!(manifest.starts_with("testcell_id,input_hash"));
}
