//! Fixture loading shared by the benchmarks.

use std::path::PathBuf;

use apxsym::parse::{parse_problem, ProblemSpec};

/// Path of a file in the repository `fixtures/` directory.
pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Parses a fixture, panicking with the parse error on failure.
pub fn load_fixture(name: &str) -> ProblemSpec {
    let path = fixture_path(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_problem(&text).unwrap_or_else(|e| panic!("{}:{e}", path.display()))
}
