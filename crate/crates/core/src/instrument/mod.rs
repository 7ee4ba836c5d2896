//! Source-to-source instrumentation.
//!
//! [`compile`] parses a program, wraps its top level in a `$main`
//! function, normalizes it and hands it to [`instrument`], which exposes
//! implicit conversions, inserts suspend points and rewrites every function
//! to run in the three modes of the continuation protocol. The output is a
//! MiniScript program whose top level configures the runtime and evaluates
//! to `$main`; a [`crate::runtime::Session`] runs it.

mod build;
mod checks;
mod implicits;
mod options;
mod suspend;
mod transform;

pub use checks::check_strict_args;
pub use implicits::desugar_implicits;
pub use options::{
    value_name, ArgsMode, CompileError, CompileOptions, CtorMode, Granularity, Implicits, Stacks,
};
pub use suspend::insert_suspend_points;
pub use transform::{instrument_function, transform};

use crate::frontend::ast::*;
use crate::frontend::{parse, print};
use crate::normalize::{normalize, AnfProgram};
use build::*;

/// The name of the function holding the program's top level.
pub const MAIN: &str = "$main";

/// An instrumented program together with its normalized form.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub program: Program,
    pub anf: AnfProgram,
    pub options: CompileOptions,
}

impl Compiled {
    pub fn text(&self) -> String {
        print(&self.program)
    }

    pub fn anf_text(&self) -> String {
        print(&self.anf.program)
    }
}

pub fn compile(src: &str, opts: &CompileOptions) -> Result<Compiled, CompileError> {
    opts.validate()?;
    let source = parse(src)?;
    if opts.args == ArgsMode::False {
        check_strict_args(&source)?;
    }
    let anf = normalize(&wrap_main(&source));
    let program = instrument(&anf, opts);
    Ok(Compiled {
        program,
        anf,
        options: opts.clone(),
    })
}

/// Move the top level into `let $main = function() { ... };`. The value of
/// the last top-level expression statement becomes `$main`'s result, as in
/// a plain run.
pub fn wrap_main(p: &Program) -> Program {
    let loc = p.body.first().map_or(SourceLoc::new(1, 0), |s| s.loc);
    let mut body = vec![let_("$r", Some(Expr::null(loc)), loc)];
    let mut user = p.body.clone();
    result_assignments(&mut user);
    body.extend(user);
    body.push(ret(Some(var("$r", loc)), loc));
    Program {
        body: vec![let_(MAIN, Some(func(vec![], body, loc)), loc)],
        source: p.source.clone(),
    }
}

fn result_assignments(stmts: &mut [Stmt]) {
    for s in stmts {
        match &mut s.kind {
            StmtKind::Expr(e) => {
                let e = std::mem::replace(e, Expr::null(s.loc));
                s.kind = StmtKind::Assign("$r".into(), e);
            }
            StmtKind::If(_, a, b) => {
                result_assignments(a);
                result_assignments(b);
            }
            StmtKind::While(_, b) | StmtKind::Block(b) => result_assignments(b),
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                result_assignments(body);
                if let Some((_, c)) = catch {
                    result_assignments(c);
                }
                if let Some(f) = finally {
                    result_assignments(f);
                }
            }
            _ => {}
        }
    }
}

/// Instrument a normalized program whose top level binds `$main`.
pub fn instrument(anf: &AnfProgram, opts: &CompileOptions) -> Program {
    let mut p = anf.program.clone();
    desugar_implicits(&mut p, opts.implicits);
    insert_suspend_points(&mut p, opts.suspend_granularity);
    let mut out = transform(&p, opts);
    let loc = SourceLoc::new(1, 0);
    let config = record(
        vec![
            ("cont", string(opts.cont.name(), loc)),
            ("timer", string(&value_name(opts.timer), loc)),
            ("yieldInterval", num(opts.yield_interval_ms, loc)),
            ("resample", num(opts.resample_target, loc)),
            ("countdown", num(opts.countdown_n as f64, loc)),
            ("stacks", string(&value_name(opts.stacks), loc)),
            ("depthLimit", num(opts.stack_depth_limit as f64, loc)),
        ],
        loc,
    );
    let mut body = vec![expr(rt("configure", vec![config], loc))];
    if opts.args == ArgsMode::False {
        body.push(expr(rt("strictArity", vec![], loc)));
    }
    body.append(&mut out.body);
    body.push(expr(var(MAIN, loc)));
    out.body = body;
    out
}
