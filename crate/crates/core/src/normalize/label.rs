//! Per-function call-site labels.
//!
//! Every application that is not a tail call gets a label, numbered from 0
//! in statement order within its enclosing function. Nested functions start
//! their own numbering.

use crate::frontend::ast::*;

pub fn label_call_sites(p: &mut Program) {
    let mut next = 0;
    label_stmts(&mut p.body, &mut next);
}

/// Number of labels assigned in a function body.
pub fn label_count(body: &[Stmt]) -> u32 {
    let mut n = 0;
    visit::exprs_shallow(body, &mut |e| {
        if let ExprKind::Call { label: Some(_), .. } | ExprKind::New { label: Some(_), .. } =
            &e.kind
        {
            n += 1;
        }
    });
    n
}

fn label_stmts(stmts: &mut [Stmt], next: &mut u32) {
    for s in stmts {
        match &mut s.kind {
            StmtKind::Let(_, Some(e))
            | StmtKind::Assign(_, e)
            | StmtKind::Expr(e)
            | StmtKind::Throw(e) => label_expr(e, next),
            StmtKind::SetField(o, _, v) => {
                label_expr(o, next);
                label_expr(v, next);
            }
            StmtKind::SetIndex(o, i, v) => {
                label_expr(o, next);
                label_expr(i, next);
                label_expr(v, next);
            }
            StmtKind::Return(Some(e)) => {
                // A call directly under `return` is a tail call.
                match &mut e.kind {
                    ExprKind::Call { callee, args, .. } => {
                        label_expr(callee, next);
                        for a in args {
                            label_expr(a, next);
                        }
                    }
                    _ => label_expr(e, next),
                }
            }
            StmtKind::If(c, a, b) => {
                label_expr(c, next);
                label_stmts(a, next);
                label_stmts(b, next);
            }
            StmtKind::While(c, b) => {
                label_expr(c, next);
                label_stmts(b, next);
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                label_stmts(body, next);
                if let Some((_, c)) = catch {
                    label_stmts(c, next);
                }
                if let Some(f) = finally {
                    label_stmts(f, next);
                }
            }
            StmtKind::Function(f) => label_function(f),
            StmtKind::Block(b) => label_stmts(b, next),
            StmtKind::Let(_, None) | StmtKind::Return(None) => {}
        }
    }
}

fn label_function(f: &mut Function) {
    let mut next = 0;
    label_stmts(&mut f.body, &mut next);
}

/// Arguments are labeled before the application itself, matching
/// evaluation order.
fn label_expr(e: &mut Expr, next: &mut u32) {
    match &mut e.kind {
        ExprKind::Call {
            callee,
            args,
            label,
        }
        | ExprKind::New {
            callee,
            args,
            label,
        } => {
            label_expr(callee, next);
            for a in args {
                label_expr(a, next);
            }
            *label = Some(*next);
            *next += 1;
        }
        ExprKind::Function(f) => label_function(f),
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
            label_expr(a, next);
            label_expr(b, next);
        }
        ExprKind::Record(fs) => fs.iter_mut().for_each(|(_, v)| label_expr(v, next)),
        ExprKind::Array(items) => items.iter_mut().for_each(|v| label_expr(v, next)),
        ExprKind::Field(o, _) => label_expr(o, next),
        _ => {}
    }
}
