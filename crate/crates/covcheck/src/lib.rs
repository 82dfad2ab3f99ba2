//! File handling, solver subprocesses and the command-line front end for
//! the `covcore` coverage type checker.

pub mod commands;
pub mod solver;
pub mod source;
