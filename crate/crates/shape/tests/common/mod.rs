#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shape::format::write_dataset;
use shape_core::toybench::{generate, RegimeSpec};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_shape")
}

pub fn shape(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("SHAPE_WORKERS")
        .output()
        .expect("run shape")
}

pub fn shape_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args).env_remove("SHAPE_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("run shape")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn write_regime(dir: &Path, spec: &RegimeSpec) -> PathBuf {
    let path = dir.join(format!("{}.jsonl", spec.dataset_id()));
    write_dataset(&generate(spec).unwrap(), &path).unwrap();
    path
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Quotes `s` for `sh -c`.
pub fn sh_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}
