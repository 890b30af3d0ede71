//! Library half of the command-line front end: matrix ingestion and the
//! machine-readable run record. The binary in `main.rs` wires these to the
//! solver.

pub mod mtx;
pub mod record;
