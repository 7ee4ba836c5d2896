//! Shape checker for labeled A-normal form.

use std::collections::BTreeSet;

use crate::frontend::ast::*;

/// Check that every application names its result or is a tail call, that
/// nothing nests an application or a function, and (when `labeled`) that
/// each function's labels are exactly 0..n-1 on its non-tail calls.
pub fn check_anf(p: &Program, labeled: bool) -> Result<(), String> {
    check_body(&p.body, labeled)
}

fn check_body(body: &[Stmt], labeled: bool) -> Result<(), String> {
    let mut labels = Vec::new();
    check_stmts(body, labeled, &mut labels)?;
    if labeled {
        let set: BTreeSet<u32> = labels.iter().copied().collect();
        if set.len() != labels.len() {
            return Err(format!("duplicate labels {labels:?}"));
        }
        if let Some(max) = set.iter().next_back() {
            if *max as usize + 1 != set.len() {
                return Err(format!("labels are not 0..n-1: {labels:?}"));
            }
        }
    }
    Ok(())
}

fn check_stmts(stmts: &[Stmt], labeled: bool, labels: &mut Vec<u32>) -> Result<(), String> {
    for s in stmts {
        let at = s.loc;
        match &s.kind {
            StmtKind::Let(_, Some(e)) | StmtKind::Assign(_, e) | StmtKind::Expr(e) => {
                named(e, labeled, labels).map_err(|m| format!("{at}: {m}"))?
            }
            StmtKind::Let(_, None) | StmtKind::Return(None) => {}
            StmtKind::Return(Some(e)) => match &e.kind {
                ExprKind::Call { callee, args, label } => {
                    if label.is_some() {
                        return Err(format!("{at}: tail call carries a label"));
                    }
                    flat(callee).map_err(|m| format!("{at}: {m}"))?;
                    for a in args {
                        flat(a).map_err(|m| format!("{at}: {m}"))?;
                    }
                }
                _ => flat(e).map_err(|m| format!("{at}: {m}"))?,
            },
            StmtKind::Throw(e) => flat(e).map_err(|m| format!("{at}: {m}"))?,
            StmtKind::SetField(o, _, v) => {
                flat(o).map_err(|m| format!("{at}: {m}"))?;
                flat(v).map_err(|m| format!("{at}: {m}"))?;
            }
            StmtKind::SetIndex(o, i, v) => {
                for e in [o, i, v] {
                    flat(e).map_err(|m| format!("{at}: {m}"))?;
                }
            }
            StmtKind::If(c, a, b) => {
                flat(c).map_err(|m| format!("{at}: {m}"))?;
                check_stmts(a, labeled, labels)?;
                check_stmts(b, labeled, labels)?;
            }
            StmtKind::While(c, b) => {
                flat(c).map_err(|m| format!("{at}: {m}"))?;
                check_stmts(b, labeled, labels)?;
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                check_stmts(body, labeled, labels)?;
                if let Some((_, c)) = catch {
                    check_stmts(c, labeled, labels)?;
                }
                if let Some(f) = finally {
                    check_stmts(f, labeled, labels)?;
                }
            }
            StmtKind::Function(f) => check_body(&f.body, labeled)?,
            StmtKind::Block(b) => check_stmts(b, labeled, labels)?,
        }
    }
    Ok(())
}

fn named(e: &Expr, labeled: bool, labels: &mut Vec<u32>) -> Result<(), String> {
    match &e.kind {
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
            match (labeled, label) {
                (true, Some(l)) => labels.push(*l),
                (true, None) => return Err("non-tail call without a label".into()),
                (false, Some(_)) => return Err("label before labeling".into()),
                (false, None) => {}
            }
            flat(callee)?;
            for a in args {
                flat(a)?;
            }
            Ok(())
        }
        ExprKind::Function(f) => check_body(&f.body, labeled),
        _ => flat(e),
    }
}

fn flat(e: &Expr) -> Result<(), String> {
    let mut err = None;
    visit::expr_shallow(e, &mut |x| {
        if err.is_none() {
            if x.is_application() {
                err = Some(format!("nested application `{}`", crate::frontend::print_expr(x)));
            } else if matches!(x.kind, ExprKind::Function(_)) {
                err = Some("nested function expression".to_string());
            }
        }
    });
    err.map_or(Ok(()), Err)
}
