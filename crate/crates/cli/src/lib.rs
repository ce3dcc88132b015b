//! Scenario runner for the `cantor-k` command-line tool.

mod report;
mod run;
mod scenario;

pub use report::{emit_report, CommandResult, Format, Report};
pub use run::{run_scenario, run_text, Options};
pub use scenario::{locate, Command, Scenario, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Validation { line: usize, column: usize, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Scenarios shipped with the binary, by file name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("denjoy_pair.scn", include_str!("../scenarios/denjoy_pair.scn")),
    ("empty.scn", include_str!("../scenarios/empty.scn")),
    ("reversing_triadic.scn", include_str!("../scenarios/reversing_triadic.scn")),
    ("rotation_numbers.scn", include_str!("../scenarios/rotation_numbers.scn")),
    ("triadic_rotation.scn", include_str!("../scenarios/triadic_rotation.scn")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name || n.trim_end_matches(".scn") == name).map(|(_, t)| *t)
}
