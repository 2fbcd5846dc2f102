use std::path::Path;
use std::process::{Command, Output};

fn mixscale(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixscale"))
        .args(args)
        .env("MIXSCALE_OUT", out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn dyadic_estimates_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mixscale(tmp.path(), &["run", "dyadic-estimates", "--J", "8", "--trials", "50", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("dyadic-estimates.csv")).unwrap();
    assert!(csv.starts_with("j,max_lower,max_full,max_upper,violations\n"));
    assert_eq!(csv.lines().count(), 1 + 9);
    let manifest = std::fs::read_to_string(tmp.path().join("dyadic-estimates.manifest.txt")).unwrap();
    assert!(manifest.contains("rng=ChaCha8Rng (rand_chacha)"));
    assert!(manifest.contains("J=8\n") && manifest.contains("seed=7\n"));
    assert!(manifest.ends_with("status=pass\n"));
}

#[test]
fn usage_errors_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mixscale(tmp.path(), &["no-such-experiment"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown experiment"));

    let o = mixscale(tmp.path(), &["dyadic", "--colour", "blue"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`colour`"));

    let o = mixscale(tmp.path(), &["transport-decay", "--s", "abc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`s`"));

    let o = mixscale(tmp.path(), &["cost-curve", "--flow", "vortex"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`flow`"));

    let o = mixscale(tmp.path(), &["transport-decay", "--tmax"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`tmax`"));
}

#[test]
fn failed_check_sets_exit_status() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mixscale(
        tmp.path(),
        &["transport", "--samples", "10", "--constant", "0.001"],
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(tmp.path().join("transport-decay.manifest.txt")).unwrap();
    assert!(manifest.contains("check FAIL"));
    assert!(manifest.ends_with("status=fail\n"));
}

#[test]
fn config_file_then_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# decay run\ns = 0.25\nsamples=12\nseed=3\n").unwrap();
    let out = tmp.path().join("out");
    let cfg_arg = cfg.to_string_lossy().into_owned();
    let o = mixscale(&out, &["transport-decay", "--config", &cfg_arg, "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(out.join("transport-decay.manifest.txt")).unwrap();
    assert!(manifest.contains("s=0.25\n"));
    assert!(manifest.contains("samples=12\n"));
    assert!(manifest.contains("seed=4\n"));

    let bad = tmp.path().join("bad.cfg");
    std::fs::write(&bad, "s = 0.25\nwhatever\n").unwrap();
    let bad_arg = bad.to_string_lossy().into_owned();
    let o = mixscale(&out, &["transport-decay", "--config", &bad_arg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`whatever`"));
}

#[test]
fn manifest_config_reproduces_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let o = mixscale(&first, &["scales-compare", "--family", "random", "--seed", "9", "--points", "2048"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(first.join("scales-compare.manifest.txt")).unwrap();
    let config: String = manifest
        .split("[config]\n")
        .nth(1)
        .unwrap()
        .lines()
        .take_while(|l| !l.is_empty())
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = tmp.path().join("replay.cfg");
    std::fs::write(&cfg, config).unwrap();
    let second = tmp.path().join("second");
    let cfg_arg = cfg.to_string_lossy().into_owned();
    let o = mixscale(&second, &["scales-compare", "--config", &cfg_arg]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["compare-scales.csv", "upper-estimate.csv", "scales-compare.manifest.txt"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn out_flag_overrides_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("env");
    let flag_dir = tmp.path().join("flag");
    let flag = flag_dir.to_string_lossy().into_owned();
    let o = mixscale(&env_dir, &["dyadic-estimates", "--J", "6", "--trials", "10", "--out", &flag]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(flag_dir.join("dyadic-estimates.csv").exists());
    assert!(!env_dir.exists());
}
