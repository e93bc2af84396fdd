//! Dataflow-graph front end for the processor.
//!
//! Applications are written as small dataflow graphs: arithmetic nodes
//! (`add`, `sub`, `shl`, `mulc`), word registers (`reg`, the algorithmic
//! delays), constants, and external ports.  This module parses the
//! textual form, reports structure (operation / register / feedback-cycle
//! counts), rewrites graphs for cheaper hardware (the repeated-addend
//! optimization and constant-multiply decomposition), and schedules the
//! result onto an operator inventory, emitting a [`ProcessorConfig`]
//! ready for [`validate`](crate::processor::validate) and simulation.
//!
//! The compilation pipeline is
//!
//! ```text
//! parse_dfg -> optimize_repeated_add -> decompose_mul_const -> schedule_and_emit
//! ```
//!
//! with every rewrite checked against the reference interpreter in
//! [`interp`]: a graph's meaning is its Kahn-network fixpoint, so two
//! graphs are interchangeable exactly when they map equal input streams
//! to equal output streams.
//!
//! [`ProcessorConfig`]: crate::processor::ProcessorConfig

mod ast;
mod emit;
mod interp;
mod parse;
mod rewrite;
mod structure;

pub use ast::{Dfg, Node, NodeId, NodeKind};
pub use emit::{schedule_and_emit, Inventory};
pub use interp::evaluate;
pub use parse::parse_dfg;
pub use rewrite::{decompose_mul_const, optimize_repeated_add};
pub use structure::{count_structure, StructureCounts};

use thiserror::Error;

/// Everything that can go wrong between a `.dfg` source text and an
/// emitted processor configuration.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DfgError {
    /// Malformed line (bad keyword, arity, or literal).
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    /// A node name is used that no line declares.
    #[error("line {line}: unknown node `{name}`")]
    UnknownNodeRef { line: usize, name: String },
    /// A cycle that passes through no register: the graph has no fixed
    /// point and the hardware would wedge on its own feedback.
    #[error("combinational loop through `{through}`")]
    CombinationalLoop { through: String },
    /// A `mulc` constant that does not fit the graph's word width.
    #[error("constant {value} does not fit {width}-bit two's complement")]
    ConstantOverflow { value: i64, width: usize },
    /// The operator inventory cannot seat the graph and sharing is off.
    #[error("inventory exhausted for `{kind}`: need {needed}, have {available}")]
    InsufficientOperators {
        kind: String,
        needed: usize,
        available: usize,
    },
}
