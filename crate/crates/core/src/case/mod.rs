//! MATPOWER case files, the per-unit network model and AC feasibility checks.

mod feasibility;
mod network;
mod parse;

pub use feasibility::{evaluate_ac_feasibility, AcPoint, FeasibilityReport};
pub use network::{
    build_network, Branch, BranchAdmittance, Bus, Edge, FlowRow, Generator, PowerNetwork,
};
pub use parse::{parse_matpower_case, RawCase};

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("cannot read case file")]
    Io(#[from] std::io::Error),
    #[error("missing `mpc.{0}`")]
    MissingMatrix(&'static str),
    #[error("empty {0} matrix")]
    EmptyMatrix(&'static str),
    #[error("{matrix} row {row} has {found} columns but row 1 has {expected}")]
    RaggedRow { matrix: &'static str, row: usize, found: usize, expected: usize },
    #[error("{matrix} rows have {found} columns, at least {min} required")]
    TooFewColumns { matrix: &'static str, found: usize, min: usize },
    #[error("cannot parse `{token}` as a number in {context}")]
    BadNumber { token: String, context: String },
    #[error("bus {bus} referenced by {what} does not exist")]
    UnknownBus { bus: i64, what: String },
    #[error("duplicate bus id {0}")]
    DuplicateBus(i64),
    #[error("network is not connected; components by bus id: {0:?}")]
    Disconnected(Vec<Vec<i64>>),
    #[error("unsupported generator cost: {0}")]
    UnsupportedCost(String),
    #[error("invalid data: {0}")]
    Invalid(String),
}

/// Reads, parses and converts a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<PowerNetwork, CaseError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut raw = parse_matpower_case(&text)?;
    if raw.name.is_none() {
        raw.name = path.as_ref().file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    build_network(&raw)
}
