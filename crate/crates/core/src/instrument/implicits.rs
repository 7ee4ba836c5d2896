//! Exposing implicit conversions as labeled calls.
//!
//! With `implicits: true`, an operand of an arithmetic or comparison
//! operator is first bound to a `$i` temporary and then passed through
//! `$rt.toPrimNum` (or `$rt.toPrimPlus` for `+`). Those are ordinary
//! labeled call sites, so a `valueOf` or `toString` method that captures a
//! continuation is reified like any other call. `plus` does this for `+`
//! only; `false` leaves the operators to convert records internally.

use super::build::*;
use super::options::Implicits;
use crate::frontend::ast::*;
use crate::normalize::label_count;

pub fn desugar_implicits(p: &mut Program, mode: Implicits) {
    if mode == Implicits::False {
        return;
    }
    let mut top = Pass {
        mode,
        next_label: label_count(&p.body),
        temps: 0,
    };
    p.body = top.stmts(std::mem::take(&mut p.body));
}

struct Pass {
    mode: Implicits,
    next_label: u32,
    temps: u32,
}

impl Pass {
    fn affects(&self, op: BinOp) -> bool {
        match self.mode {
            Implicits::True => op.coerces(),
            Implicits::Plus => op == BinOp::Add,
            Implicits::False => false,
        }
    }

    fn function(&self, f: &mut Function) {
        let mut inner = Pass {
            mode: self.mode,
            next_label: label_count(&f.body),
            temps: 0,
        };
        f.body = inner.stmts(std::mem::take(&mut f.body));
    }

    fn stmts(&mut self, stmts: Vec<Stmt>) -> Vec<Stmt> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            let (synthetic, loc) = (s.synthetic, s.loc);
            let mut lowered = self.stmt(s);
            if lowered.len() > 1 {
                // The statement's own stepping point moves to the first
                // conversion so it precedes any conversion method's body.
                for l in lowered.iter_mut() {
                    l.synthetic = true;
                    l.loc = loc;
                }
                lowered[0].synthetic = synthetic;
            }
            out.extend(lowered);
        }
        out
    }

    fn stmt(&mut self, mut s: Stmt) -> Vec<Stmt> {
        let mut pre = Vec::new();
        match &mut s.kind {
            StmtKind::Let(_, Some(e))
            | StmtKind::Assign(_, e)
            | StmtKind::Expr(e)
            | StmtKind::Throw(e)
            | StmtKind::Return(Some(e)) => self.expr(e, &mut pre),
            StmtKind::SetField(o, _, v) => {
                self.expr(o, &mut pre);
                self.expr(v, &mut pre);
            }
            StmtKind::SetIndex(o, i, v) => {
                self.expr(o, &mut pre);
                self.expr(i, &mut pre);
                self.expr(v, &mut pre);
            }
            StmtKind::If(c, a, b) => {
                self.expr(c, &mut pre);
                *a = self.stmts(std::mem::take(a));
                *b = self.stmts(std::mem::take(b));
            }
            StmtKind::While(c, body) => {
                self.expr(c, &mut pre);
                *body = self.stmts(std::mem::take(body));
                // The condition's conversions run again before each test.
                for st in &pre {
                    let mut st = st.clone();
                    if let StmtKind::Let(x, Some(e)) = st.kind {
                        st.kind = StmtKind::Assign(x, e);
                    }
                    self.relabel(&mut st);
                    st.loc = s.loc;
                    body.push(st);
                }
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
        pre.push(s);
        pre
    }

    fn fresh(&mut self) -> String {
        self.temps += 1;
        format!("$i{}", self.temps - 1)
    }

    fn relabel(&mut self, s: &mut Stmt) {
        if let StmtKind::Assign(_, e) = &mut s.kind {
            if let ExprKind::Call { label: Some(l), .. } = &mut e.kind {
                *l = self.next_label;
                self.next_label += 1;
            }
        }
    }

    fn expr(&mut self, e: &mut Expr, pre: &mut Vec<Stmt>) {
        match &mut e.kind {
            ExprKind::Binary(op, l, r) => {
                let op = *op;
                self.expr(l, pre);
                let mark = pre.len();
                self.expr(r, pre);
                if pre.len() > mark && !l.is_primitive_literal() {
                    // Read the left operand before the right one's conversions run.
                    let t = self.fresh();
                    let loc = l.loc;
                    let value = std::mem::replace(l.as_mut(), var(&t, loc));
                    pre.insert(mark, let_(&t, Some(value), loc));
                }
                if !self.affects(op) {
                    return;
                }
                let conv = if op == BinOp::Add {
                    "toPrimPlus"
                } else {
                    "toPrimNum"
                };
                let mut bound = Vec::new();
                for side in [l, r] {
                    if side.is_primitive_literal() {
                        continue;
                    }
                    let loc = side.loc;
                    if let ExprKind::Var(x) = &side.kind {
                        if x.starts_with("$i") {
                            bound.push((x.clone(), loc));
                            continue;
                        }
                    }
                    let t = self.fresh();
                    let value = std::mem::replace(side.as_mut(), var(&t, loc));
                    pre.push(let_(&t, Some(value), loc));
                    bound.push((t, loc));
                }
                for (t, loc) in bound {
                    let call = rt_labeled(conv, vec![var(&t, loc)], self.next_label, loc);
                    self.next_label += 1;
                    pre.push(assign(&t, call, loc));
                }
            }
            ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args, .. } => {
                self.expr(callee, pre);
                for a in args {
                    self.expr(a, pre);
                }
            }
            ExprKind::Function(f) => self.function(f),
            ExprKind::Record(fields) => {
                for (_, v) in fields {
                    self.expr(v, pre);
                }
            }
            ExprKind::Array(items) => {
                for v in items {
                    self.expr(v, pre);
                }
            }
            ExprKind::Field(o, _) => self.expr(o, pre),
            ExprKind::Index(o, i) => {
                self.expr(o, pre);
                self.expr(i, pre);
            }
            _ => {}
        }
    }
}
