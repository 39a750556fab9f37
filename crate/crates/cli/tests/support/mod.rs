#![allow(dead_code)]

//! Runs the `aic` binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use aic_core::{fixture, Mutation};

pub fn aic(args: &[&str]) -> Output {
    aic_with(args, None, &[])
}

pub fn aic_with(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aic"));
    cmd.args(args)
        .env_remove("AIC_RED_FLAG_THRESHOLD")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().expect("spawn aic");
    let mut pipe = child.stdin.take().unwrap();
    if let Some(input) = stdin {
        pipe.write_all(input.as_bytes()).unwrap();
    }
    drop(pipe);
    child.wait_with_output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Arguments for the CLI command equivalent to `m`.
pub fn command_for(path: &str, m: &Mutation) -> Vec<String> {
    let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match m {
        Mutation::SubmitAssertion {
            step,
            text,
            referenced_entities,
        } => {
            let mut args = own(&["step-submit", path, &step.to_string(), "--text", text]);
            for r in referenced_entities {
                args.extend(own(&["--ref", r.as_str()]));
            }
            args
        }
        Mutation::CompleteStep { step } => own(&["step-complete", path, &step.to_string()]),
        Mutation::ReconfirmStep { step } => own(&["step-reconfirm", path, &step.to_string()]),
        Mutation::ReviseAssertion {
            step,
            assertion,
            text,
            rationale,
        } => own(&[
            "step-revise",
            path,
            &step.to_string(),
            assertion.as_str(),
            "--rationale",
            rationale,
            "--text",
            text,
        ]),
        other => own(&[
            "apply",
            path,
            "--mutation",
            &serde_json::to_string(other).unwrap(),
        ]),
    }
}

/// Builds the case-study session in `dir` one CLI command at a time.
pub fn walkthrough(dir: &Path) -> PathBuf {
    let path = dir.join("collision.aic.json");
    let p = path.to_str().unwrap();
    let o = aic(&["init", p, "--name", fixture::SESSION_NAME]);
    assert_eq!(code(&o), 0, "init: {}", String::from_utf8_lossy(&o.stderr));
    for m in fixture::collision_avoidance_script() {
        let args = command_for(p, &m);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = aic(&refs);
        assert_eq!(
            code(&o),
            0,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    path
}
