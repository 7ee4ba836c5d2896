//! Suspend-point insertion.
//!
//! `$rt.maySuspend(kind, line, column)` goes at every function entry and
//! loop back edge (kind 0) and, at statement granularity, before every
//! source statement: kind 2 for the first statement on its line, which is
//! where breakpoints stop, and kind 1 otherwise. Each point is a labeled
//! call site so a yield inside it is captured like any other call.

use std::collections::HashMap;

use super::build::*;
use super::options::Granularity;
use crate::frontend::ast::*;
use crate::normalize::label_count;

pub const ENTRY: u32 = 0;
pub const STATEMENT: u32 = 1;
pub const LINE_START: u32 = 2;

pub fn insert_suspend_points(p: &mut Program, g: Granularity) {
    let mut first_on_line: HashMap<u32, u32> = HashMap::new();
    let mut body = std::mem::take(&mut p.body);
    visit::walk_stmts_mut(
        &mut body,
        &mut |s| {
            if is_step_point(s) {
                let c = first_on_line.entry(s.loc.line).or_insert(s.loc.column);
                *c = (*c).min(s.loc.column);
            }
        },
        &mut |_| {},
    );
    let mut pass = Pass {
        statements: g == Granularity::Statements,
        first_on_line,
        next_label: label_count(&body),
    };
    p.body = pass.stmts(body);
}

/// Statements the plain interpreter reports in its statement trace.
fn is_step_point(s: &Stmt) -> bool {
    !s.synthetic && !matches!(s.kind, StmtKind::Block(_))
}

struct Pass {
    statements: bool,
    first_on_line: HashMap<u32, u32>,
    next_label: u32,
}

impl Pass {
    fn point(&mut self, kind: u32, loc: SourceLoc) -> Stmt {
        let args = vec![
            num(kind as f64, loc),
            num(loc.line as f64, loc),
            num(loc.column as f64, loc),
        ];
        let call = rt_labeled("maySuspend", args, self.next_label, loc);
        self.next_label += 1;
        expr(call)
    }

    fn function(&mut self, f: &mut Function) {
        let outer = std::mem::replace(&mut self.next_label, label_count(&f.body));
        let mut body = vec![self.point(ENTRY, f.loc)];
        body.extend(self.stmts(std::mem::take(&mut f.body)));
        f.body = body;
        self.next_label = outer;
    }

    fn stmts(&mut self, stmts: Vec<Stmt>) -> Vec<Stmt> {
        let mut out = Vec::with_capacity(stmts.len() * 2);
        for mut s in stmts {
            if self.statements && is_step_point(&s) {
                let kind = if self.first_on_line.get(&s.loc.line) == Some(&s.loc.column) {
                    LINE_START
                } else {
                    STATEMENT
                };
                out.push(self.point(kind, s.loc));
            }
            self.stmt(&mut s);
            out.push(s);
        }
        out
    }

    fn stmt(&mut self, s: &mut Stmt) {
        match &mut s.kind {
            StmtKind::Let(_, Some(e))
            | StmtKind::Assign(_, e)
            | StmtKind::Expr(e)
            | StmtKind::Throw(e)
            | StmtKind::Return(Some(e)) => self.expr(e),
            StmtKind::SetField(o, _, v) => {
                self.expr(o);
                self.expr(v);
            }
            StmtKind::SetIndex(o, i, v) => {
                self.expr(o);
                self.expr(i);
                self.expr(v);
            }
            StmtKind::If(_, a, b) => {
                *a = self.stmts(std::mem::take(a));
                *b = self.stmts(std::mem::take(b));
            }
            StmtKind::While(_, body) => {
                let mut b = self.stmts(std::mem::take(body));
                b.push(self.point(ENTRY, s.loc));
                *body = b;
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                *body = self.stmts(std::mem::take(body));
                if let Some((_, c)) = catch {
                    *c = self.stmts(std::mem::take(c));
                }
                if let Some(f) = finally {
                    *f = self.stmts(std::mem::take(f));
                }
            }
            StmtKind::Function(f) => self.function(f),
            StmtKind::Block(b) => *b = self.stmts(std::mem::take(b)),
            StmtKind::Let(_, None) | StmtKind::Return(None) => {}
        }
    }

    /// Function expressions only occur as whole initialisers after ANF, but
    /// look everywhere to be safe.
    fn expr(&mut self, e: &mut Expr) {
        match &mut e.kind {
            ExprKind::Function(f) => self.function(f),
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                self.expr(a);
                self.expr(b);
            }
            ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args, .. } => {
                self.expr(callee);
                args.iter_mut().for_each(|a| self.expr(a));
            }
            ExprKind::Record(fs) => fs.iter_mut().for_each(|(_, v)| self.expr(v)),
            ExprKind::Array(items) => items.iter_mut().for_each(|v| self.expr(v)),
            ExprKind::Field(o, _) => self.expr(o),
            _ => {}
        }
    }
}
