//! Coverage types: must-reach refinement types for a small call-by-value
//! language with nondeterministic generators, `assume`/`assert`, and an
//! error monad encoded as `(flag, payload)` pairs.
//!
//! A coverage type `[b | φ]` says a term *must* be able to reduce to every
//! value satisfying `φ`; the ordinary refinement type `{b | φ}` says it *may
//! only* reduce to such values. This crate contains the whole pipeline:
//!
//! * [`parser`], [`desugar`], [`anf`] and [`pretty`] take surface programs
//!   to A-normal-form [`core_term::CoreTerm`]s and back.
//! * [`qualifier`] and [`vc`] hold the qualifier logic and decide
//!   verification conditions by bounded enumeration; [`smt`] renders the
//!   same conditions as SMT-LIB2 text for an external solver.
//! * [`interp`] enumerates every outcome a closed program can reach inside
//!   an integer window.
//! * [`typing`] is the algorithmic checker.
//! * [`oracle`] decides type membership by execution and compares it with
//!   the checker.
//!
//! The crate is `no_std` and only needs `alloc`. File handling, solver
//! subprocesses and the command line live in the `covcheck` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod anf;
pub mod builtins;
pub mod core_term;
pub mod desugar;
pub mod erasure;
pub mod interp;
pub mod lexer;
pub mod oracle;
pub mod parser;
pub mod pretty;
pub mod qualifier;
pub mod rtype;
pub mod smt;
pub mod syntax;
pub mod typing;
pub mod vc;

pub use core_term::{Const, CoreTerm, Lambda, Value};
pub use qualifier::{Qualifier, SemanticValue};
pub use rtype::RType;
pub use syntax::BaseType;

/// Default integer window `[-W, W]` used by generators, the bounded VC
/// backend and the oracle.
pub const DEFAULT_WINDOW: i64 = 8;
