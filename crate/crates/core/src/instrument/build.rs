//! Small constructors for generated code. Every node takes the location of
//! the source construct it was generated for.

use crate::frontend::ast::*;

pub const RT: &str = "$rt";

pub fn var(x: &str, loc: SourceLoc) -> Expr {
    Expr::var(x, loc)
}

pub fn num(n: f64, loc: SourceLoc) -> Expr {
    Expr::num(n, loc)
}

pub fn string(s: &str, loc: SourceLoc) -> Expr {
    Expr::str(s, loc)
}

pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
    Expr::binary(op, l, r)
}

pub fn and(l: Expr, r: Expr) -> Expr {
    bin(BinOp::And, l, r)
}

pub fn or(l: Expr, r: Expr) -> Expr {
    bin(BinOp::Or, l, r)
}

pub fn eq(l: Expr, r: Expr) -> Expr {
    bin(BinOp::Eq, l, r)
}

/// `$rt.name(args)`, unlabeled.
pub fn rt(name: &str, args: Vec<Expr>, loc: SourceLoc) -> Expr {
    Expr::call(Expr::field(var(RT, loc), name), args, loc)
}

/// `$rt.name(args)` carrying a call-site label.
pub fn rt_labeled(name: &str, args: Vec<Expr>, label: u32, loc: SourceLoc) -> Expr {
    let mut e = rt(name, args, loc);
    if let ExprKind::Call { label: l, .. } = &mut e.kind {
        *l = Some(label);
    }
    e
}

pub fn mode_is(m: &str, loc: SourceLoc) -> Expr {
    eq(rt("mode", vec![], loc), string(m, loc))
}

pub fn normal(loc: SourceLoc) -> Expr {
    mode_is("normal", loc)
}

pub fn restore(loc: SourceLoc) -> Expr {
    mode_is("restore", loc)
}

pub fn capture(loc: SourceLoc) -> Expr {
    mode_is("capture", loc)
}

pub fn record(fields: Vec<(&str, Expr)>, loc: SourceLoc) -> Expr {
    Expr::new(
        ExprKind::Record(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect()),
        loc,
    )
}

pub fn array(items: Vec<Expr>, loc: SourceLoc) -> Expr {
    Expr::new(ExprKind::Array(items), loc)
}

pub fn field(o: Expr, name: &str) -> Expr {
    Expr::field(o, name)
}

pub fn index(o: Expr, i: Expr) -> Expr {
    let loc = o.loc;
    Expr::new(ExprKind::Index(Box::new(o), Box::new(i)), loc)
}

pub fn func(params: Vec<String>, body: Vec<Stmt>, loc: SourceLoc) -> Expr {
    Expr::new(
        ExprKind::Function(Box::new(Function {
            name: None,
            params,
            body,
            loc,
        })),
        loc,
    )
}

pub fn s(kind: StmtKind, loc: SourceLoc) -> Stmt {
    Stmt::synth(kind, loc)
}

pub fn let_(x: &str, e: Option<Expr>, loc: SourceLoc) -> Stmt {
    s(StmtKind::Let(x.to_string(), e), loc)
}

pub fn assign(x: &str, e: Expr, loc: SourceLoc) -> Stmt {
    s(StmtKind::Assign(x.to_string(), e), loc)
}

pub fn expr(e: Expr) -> Stmt {
    let loc = e.loc;
    s(StmtKind::Expr(e), loc)
}

pub fn if_(c: Expr, a: Vec<Stmt>, b: Vec<Stmt>) -> Stmt {
    let loc = c.loc;
    s(StmtKind::If(c, a, b), loc)
}

pub fn ret(e: Option<Expr>, loc: SourceLoc) -> Stmt {
    s(StmtKind::Return(e), loc)
}

pub fn throw(e: Expr) -> Stmt {
    let loc = e.loc;
    s(StmtKind::Throw(e), loc)
}

/// Calls and `new` expressions, with their label.
pub fn application_label(e: &Expr) -> Option<u32> {
    match &e.kind {
        ExprKind::Call { label, .. } | ExprKind::New { label, .. } => *label,
        _ => None,
    }
}

/// Labels of the call sites syntactically inside `stmts`, excluding
/// nested functions.
pub fn labels_in(stmts: &[Stmt]) -> Vec<u32> {
    let mut out = Vec::new();
    visit::exprs_shallow(stmts, &mut |e| {
        if let Some(l) = application_label(e) {
            out.push(l);
        }
    });
    out.sort_unstable();
    out.dedup();
    out
}

/// `$l` is one of `labels`, as a disjunction of ranges. `None` when empty.
pub fn label_test(labels: &[u32], loc: SourceLoc) -> Option<Expr> {
    let mut ranges: Vec<(u32, u32)> = Vec::new();
    for &l in labels {
        match ranges.last_mut() {
            Some((_, hi)) if *hi + 1 == l => *hi = l,
            _ => ranges.push((l, l)),
        }
    }
    let l = || var("$l", loc);
    ranges
        .into_iter()
        .map(|(lo, hi)| {
            if lo == hi {
                eq(l(), num(lo as f64, loc))
            } else {
                and(
                    bin(BinOp::Ge, l(), num(lo as f64, loc)),
                    bin(BinOp::Le, l(), num(hi as f64, loc)),
                )
            }
        })
        .reduce(or)
}
