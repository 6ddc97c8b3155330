//! Pin-accessibility stress testing for standard-cell libraries.
//!
//! The toolkit builds minimal abutment testcells from a cell library,
//! wires their pins under deliberately hostile constraints (random
//! connectivity, two routing layers, random power-strap blockage),
//! routes them, and attributes the resulting design-rule violations back
//! to individual library cells. Everything downstream of the library
//! file is deterministic in (library, configuration, seed).

pub mod drc;
pub mod fixtures;
pub mod formats;
pub mod geom;
pub mod pipeline;
pub mod report;
pub mod router;
pub mod seed;
pub mod techlib;
pub mod testgen;
