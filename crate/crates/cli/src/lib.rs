//! File format, catalog persistence, and report rendering behind the
//! `fibercalc` command-line interface.

pub mod catalog;
pub mod format;
pub mod report;
