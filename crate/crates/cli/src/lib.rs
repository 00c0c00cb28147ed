//! Command implementations and report types behind the `oligo` binary.

pub mod caps;
pub mod commands;
pub mod render;
pub mod report;
