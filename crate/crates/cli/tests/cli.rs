use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_feynhopf"));
    cmd.current_dir(root()).args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("FEYNHOPF_")) {
        cmd.env_remove(k);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn symmetry_factor() {
    let o = run(&["sym", "graphs/qed-photon-se-unoriented-loop"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2");
    let o = run(&["sym", "graphs/qed-electron-se"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn coproduct_of_two_loop_self_energy() {
    let o = run(&["coproduct", "graphs/qed-2loop-photon-se"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("2 * [vc1] (x) [bubble]"), "{text}");
    assert!(text.contains("1 * [] (x) [pse2]"), "{text}");
}

#[test]
fn axioms_exit_zero() {
    let o = run(&["axioms", "--theory", "theories/phi3", "--loops", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn check_commands_pass() {
    for args in [
        vec!["prop-check", "--theory", "qed", "--loops", "2"],
        vec!["ideal-check", "--theory", "phi34", "--loops", "2"],
        vec!["closed-coproduct", "--theory", "qcd", "--loops", "1"],
        vec!["birkhoff", "--theory", "qed", "--loops", "2"],
        vec!["dyson", "--theory", "phi3", "--loops", "2"],
        vec!["generate", "--theory", "phi3", "--loops", "3"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
    }
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(run(&["sym"]).status.code(), Some(2));
    assert_eq!(run(&["nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["axioms", "--loops", "0"]).status.code(), Some(2));
    assert_eq!(run(&["sym", "graphs/does-not-exist"]).status.code(), Some(2));
    assert_eq!(run(&["dyson", "--theory", "phi34", "--loops", "1"]).status.code(), Some(2));
}

#[test]
fn structured_output() {
    let o = run(&["--format", "json", "sym", "graphs/qed-electron-se"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "sym");
    assert_eq!(v["result"], 1);

    let o = run(&["--format", "json", "dyson", "--theory", "phi3", "--loops", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["result"]["records"].as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["generate", "--theory", "qed", "--loops", "2"],
        vec!["--format", "json", "green", "photon", "--theory", "qed", "--loops", "2"],
        vec!["birkhoff", "--theory", "qed", "--loops", "2", "--jobs", "2"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn environment_overrides() {
    let flag = run(&["generate", "--theory", "phi3", "--loops", "1"]);
    let env = run_env(&["generate"], &[("FEYNHOPF_THEORY", "phi3"), ("FEYNHOPF_LOOPS", "1")]);
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(flag.stdout, env.stdout);
}
