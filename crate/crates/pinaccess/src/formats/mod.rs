//! Netlist and placement file formats.
//!
//! Each testcell is written as a structural Verilog module plus a DEF 5.6
//! placement. Both writers are deterministic; both readers accept exactly
//! the emitted subset and report errors with line numbers.

pub mod def;
pub mod verilog;

pub use def::{emit_def, emit_def_with_nets, parse_def, DefComponent, DefDocument, PlacementIssue};
pub use verilog::{emit_verilog, parse_verilog, VerilogInstance, VerilogModule, VerilogNetlist};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

impl FormatError {
    pub(crate) fn at(line: usize, msg: impl Into<String>) -> Self {
        FormatError::Syntax { line, msg: msg.into() }
    }
}
