//! Execution control: the three-mode protocol, the control operator, time
//! estimation and the event loop that drives an instrumented program.
//!
//! Instrumented code talks to the runtime through the `$rt` intrinsics.
//! A [`Session`] owns an interpreter, loads an instrumented program and runs
//! it one turn at a time, applying control receivers, deferring yields,
//! pausing at breakpoints and restoring saved continuations.

mod estimator;
mod intrinsics;
mod session;
mod state;

pub use estimator::{Estimator, TimerKind, DEFAULT_COUNTDOWN};
pub use session::{Command, Event, Session, SessionHandle, Status, Stop};
pub use state::{BreakReason, Entry, Mode, Receiver, RtOptions, RtState, Strategy};
