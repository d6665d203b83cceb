//! Command line front end for `cselfdual-core`: JSON instance formats,
//! seeded instance generators, run reports and the acceptance suite.

pub mod commands;
pub mod formats;
pub mod generators;
pub mod report;
pub mod selftest;
