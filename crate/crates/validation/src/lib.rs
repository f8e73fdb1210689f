//! Helpers for driving the command line in-process and reading its CSV output.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

/// Runs one command in-process and panics unless it succeeds.
pub fn rankgm(args: &[&str]) -> Duration {
    let start = Instant::now();
    let code = rankgm_cli::main_with_args(std::iter::once("rankgm").chain(args.iter().copied()));
    assert!(code == 0, "rankgm {args:?} exited with {code}");
    start.elapsed()
}

/// Path as `&str` for argument lists.
pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub fn read_matrix(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

/// Column of `name` in a CSV with a header row, as strings.
pub fn column(path: &Path, name: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(at).unwrap().to_owned())
        .collect()
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

pub fn same_bytes(a: &Path, b: &Path) -> bool {
    fs::read(a).unwrap() == fs::read(b).unwrap()
}
