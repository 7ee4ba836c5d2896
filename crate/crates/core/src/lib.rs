//! Execution control for MiniScript programs.
//!
//! `stopkit` compiles MiniScript source into instrumented MiniScript that
//! supports first-class continuations, cooperative yielding, pause and
//! resume, deep stacks, breakpoints and single-stepping, and runs the result
//! on a deterministic interpreter with a simulated event loop.
//!
//! The pipeline is:
//!
//! 1. [`frontend::parse`] source text into a located AST;
//! 2. [`normalize::normalize`] it into labeled A-normal form with boxed
//!    captured-assignable variables;
//! 3. [`instrument::instrument`] each function to run in normal, capture and
//!    restore modes;
//! 4. execute it with a [`runtime::Session`], which drives the event loop.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod bench;
pub mod cli;
pub mod debug;
pub mod frontend;
pub mod instrument;
pub mod interp;
pub mod normalize;
pub mod runtime;

pub use frontend::{parse, print, Program, SourceLoc};
pub use instrument::{compile, CompileOptions};
pub use interp::{InterpConfig, Outcome, Value};
pub use runtime::Session;
