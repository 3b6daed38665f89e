use std::fmt;

use thiserror::Error;

use crate::model::PacketId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PacketFault {
    ReleaseAfterDeadline { release: u64, deadline: u64 },
    StepOutOfRange { field: &'static str, value: i64 },
    NegativeWeight(String),
    BadWeight(String),
    DuplicateId,
}

impl fmt::Display for PacketFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PacketFault::ReleaseAfterDeadline { release, deadline } => {
                write!(f, "release {release} > deadline {deadline}")
            }
            PacketFault::StepOutOfRange { field, value } => {
                write!(f, "{field} {value} is not a positive time step")
            }
            PacketFault::NegativeWeight(w) => write!(f, "negative weight {w:?}"),
            PacketFault::BadWeight(msg) => write!(f, "{msg}"),
            PacketFault::DuplicateId => f.write_str("duplicate packet id"),
        }
    }
}

fn line_suffix(line: &Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("capacity must be at least 1 (got {0})")]
    Capacity(i64),
    #[error("packet {id}{}: {fault}", line_suffix(line))]
    Packet { id: PacketId, line: Option<usize>, fault: PacketFault },
    #[error("reference_opt_weight: {0}")]
    ReferenceWeight(String),
    #[error("reference schedule does not verify: {0}")]
    ReferenceSchedule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{what}: {size} items exceeds the enumeration budget of {limit}")]
pub struct BudgetExceeded {
    pub what: &'static str,
    pub size: usize,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid generator parameters: {0}")]
pub struct GeneratorError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing header {expected:?}")]
    Header { expected: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid scheduler parameters: {0}")]
pub struct ParamError(pub String);
