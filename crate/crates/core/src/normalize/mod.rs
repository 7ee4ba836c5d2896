//! Lowering to labeled A-normal form with boxed variables.

mod anf;
mod boxing;
mod check;
mod label;

pub use anf::anf;
pub use boxing::{box_assignables, BoxedVar, BOX_FIELD};
pub use check::check_anf;
pub use label::{label_call_sites, label_count};

use crate::frontend::Program;

/// A program in labeled A-normal form, ready for instrumentation.
#[derive(Clone, Debug, PartialEq)]
pub struct AnfProgram {
    pub program: Program,
    pub boxed: Vec<BoxedVar>,
}

/// Run ANF conversion, boxing and labeling in order.
pub fn normalize(p: &Program) -> AnfProgram {
    let (mut program, boxed) = box_assignables(&anf(p));
    label_call_sites(&mut program);
    debug_assert_eq!(check_anf(&program, true), Ok(()));
    AnfProgram { program, boxed }
}
