//! File formats, benchmark harness and reporting for And-Or belief states.
//!
//! The graph itself lives in [`aobs_core`]; this crate reads and writes it
//! as JSON and DOT, runs the randomized exploration benchmark and the
//! equivalence suite, and backs the `aobs` command.

pub mod analysis;
pub mod bench;
pub mod dot;
pub mod format;
pub mod report;
pub mod verify;
