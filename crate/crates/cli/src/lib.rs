//! File formats, reports and the `curvlab` command line.

pub mod cli;
pub mod commands;
pub mod config;
pub mod format;
pub mod report;
pub mod threads;
