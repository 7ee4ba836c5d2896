//! Static checks for the `args: false` sub-language.

use std::cell::RefCell;
use std::collections::HashMap;

use super::options::CompileError;
use crate::frontend::ast::*;

/// Reject `arguments` and calls whose arity visibly disagrees with the
/// callee's declaration.
pub fn check_strict_args(p: &Program) -> Result<(), CompileError> {
    let mut arguments = None;
    let bindings: RefCell<HashMap<String, Binding>> = RefCell::new(HashMap::new());
    let mut p = p.clone();
    visit::walk_stmts_mut(
        &mut p.body,
        &mut |s| match &s.kind {
            StmtKind::Function(f) => {
                if let Some(n) = &f.name {
                    bindings.borrow_mut().entry(n.clone()).or_default().declare(Some(f.params.len()));
                }
                note_params(&f.params, &mut bindings.borrow_mut());
            }
            StmtKind::Let(x, Some(Expr {
                kind: ExprKind::Function(f),
                ..
            })) => {
                bindings.borrow_mut().entry(x.clone()).or_default().declare(Some(f.params.len()));
            }
            StmtKind::Let(x, _) => bindings.borrow_mut().entry(x.clone()).or_default().declare(None),
            StmtKind::Assign(x, _) => bindings.borrow_mut().entry(x.clone()).or_default().declare(None),
            StmtKind::Try {
                catch: Some((x, _)),
                ..
            } => bindings.borrow_mut().entry(x.clone()).or_default().declare(None),
            _ => {}
        },
        &mut |e| match &e.kind {
            ExprKind::Arguments => {
                arguments.get_or_insert(e.loc);
            }
            ExprKind::Function(f) => note_params(&f.params, &mut bindings.borrow_mut()),
            _ => {}
        },
    );
    if let Some(loc) = arguments {
        return Err(CompileError::Unsupported {
            loc,
            message: "`arguments` is not available with args=false".into(),
        });
    }
    let mut err = None;
    visit::walk_stmts_mut(&mut p.body, &mut |_| {}, &mut |e| {
        let (ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args, .. }) = &e.kind
        else {
            return;
        };
        let ExprKind::Var(name) = &callee.kind else {
            return;
        };
        if let Some(Binding {
            count: 1,
            arity: Some(n),
        }) = bindings.borrow().get(name)
        {
            if *n != args.len() && err.is_none() {
                err = Some(CompileError::Arity {
                    loc: e.loc,
                    message: format!("`{name}` expects {n} argument(s), got {}", args.len()),
                });
            }
        }
    });
    err.map_or(Ok(()), Err)
}

/// How a name is bound across the whole program. Only a name bound exactly
/// once, to a function, has a statically known arity.
#[derive(Default)]
struct Binding {
    count: usize,
    arity: Option<usize>,
}

impl Binding {
    fn declare(&mut self, arity: Option<usize>) {
        self.count += 1;
        self.arity = if self.count == 1 { arity } else { None };
    }
}

fn note_params(params: &[String], bindings: &mut HashMap<String, Binding>) {
    for x in params {
        bindings.entry(x.clone()).or_default().declare(None);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn arguments_is_rejected() {
        let p = parse("function f() { return arguments; }").unwrap();
        assert!(matches!(
            check_strict_args(&p),
            Err(CompileError::Unsupported { .. })
        ));
    }

    #[test]
    fn visible_arity_mismatch_is_reported() {
        let p = parse("function f(a, b) { return a; }\nf(1);").unwrap();
        match check_strict_args(&p) {
            Err(CompileError::Arity { loc, .. }) => assert_eq!(loc.line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reassigned_names_are_not_checked() {
        let p = parse("function f(a) { return a; }\nf = function() { return 1; };\nf();").unwrap();
        assert!(check_strict_args(&p).is_ok());
    }
}
