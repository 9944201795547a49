//! Text formats and command plumbing around `gapunsat-core`.

pub mod formats;
pub mod netlist;
