//! Conversion to A-normal form.
//!
//! After this pass every application is either the whole right-hand side of
//! a `let`/assignment, a whole expression statement, or the value of a
//! `return` in tail position. Function expressions only appear as whole
//! initialisers. `try`/`catch`/`finally` is split into a `try`/`finally`
//! around a `try`/`catch`.

use crate::frontend::ast::*;

pub fn anf(p: &Program) -> Program {
    let mut cx = Anf {
        temps: vec![0],
        cur: SourceLoc::default(),
    };
    let body = cx.stmts(&p.body, false);
    Program {
        body,
        source: p.source.clone(),
    }
}

struct Anf {
    /// Temp counters, one per enclosing function.
    temps: Vec<u32>,
    /// Location of the source statement being lowered.
    cur: SourceLoc,
}

fn contains_call(e: &Expr) -> bool {
    let mut found = false;
    visit::expr_shallow(e, &mut |x| {
        if x.is_application() || matches!(x.kind, ExprKind::Function(_)) {
            found = true;
        }
        if let ExprKind::Binary(op, _, r) = &x.kind {
            if op.is_short_circuit() && !r.is_atomic() {
                found = true;
            }
        }
    });
    found
}

/// Reading this expression later gives the same value as reading it now.
fn is_stable(e: &Expr) -> bool {
    e.is_primitive_literal() || matches!(e.kind, ExprKind::This)
}

impl Anf {
    fn fresh(&mut self) -> String {
        let n = self.temps.last_mut().expect("temp counter");
        let name = format!("$t{n}");
        *n += 1;
        name
    }

    fn stmts(&mut self, stmts: &[Stmt], in_try: bool) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            let saved = std::mem::replace(&mut self.cur, s.loc);
            let mut lowered = self.stmt(s, in_try);
            self.cur = saved;
            for (i, l) in lowered.iter_mut().enumerate() {
                // Errors raised by any part report the source statement.
                l.loc = s.loc;
                l.synthetic = i > 0 || s.synthetic;
            }
            out.extend(lowered);
        }
        out
    }

    fn function(&mut self, f: &Function) -> Function {
        self.temps.push(0);
        let body = self.stmts(&f.body, false);
        self.temps.pop();
        Function {
            name: f.name.clone(),
            params: f.params.clone(),
            body,
            loc: f.loc,
        }
    }

    fn stmt(&mut self, s: &Stmt, in_try: bool) -> Vec<Stmt> {
        let loc = s.loc;
        let mut pre = Vec::new();
        let kind = match &s.kind {
            StmtKind::Let(x, None) => StmtKind::Let(x.clone(), None),
            StmtKind::Let(x, Some(e)) => StmtKind::Let(x.clone(), Some(self.named(e, &mut pre))),
            StmtKind::Assign(x, e) => StmtKind::Assign(x.clone(), self.named(e, &mut pre)),
            StmtKind::SetField(o, f, v) => {
                let mut parts = self.operands(&[o, v], &mut pre);
                let v = parts.pop().unwrap();
                let o = parts.pop().unwrap();
                StmtKind::SetField(o, f.clone(), v)
            }
            StmtKind::SetIndex(o, i, v) => {
                let mut parts = self.operands(&[o, i, v], &mut pre);
                let v = parts.pop().unwrap();
                let i = parts.pop().unwrap();
                let o = parts.pop().unwrap();
                StmtKind::SetIndex(o, i, v)
            }
            StmtKind::Expr(e) => StmtKind::Expr(self.named(e, &mut pre)),
            StmtKind::Return(None) => StmtKind::Return(None),
            StmtKind::Return(Some(e)) => {
                if let ExprKind::Call { .. } = e.kind {
                    if !in_try {
                        let call = self.call(e, &mut pre);
                        pre.push(Stmt::synth(StmtKind::Return(Some(call)), loc));
                        return pre;
                    }
                }
                StmtKind::Return(Some(self.simple(e, &mut pre)))
            }
            StmtKind::Throw(e) => StmtKind::Throw(self.simple(e, &mut pre)),
            StmtKind::If(c, a, b) => {
                let c = self.simple(c, &mut pre);
                StmtKind::If(c, self.stmts(a, in_try), self.stmts(b, in_try))
            }
            StmtKind::While(c, body) => {
                let mut cond_pre = Vec::new();
                let c2 = self.simple(c, &mut cond_pre);
                let mut body = self.stmts(body, in_try);
                if !cond_pre.is_empty() {
                    // Re-evaluate the hoisted condition at the end of each iteration.
                    body.extend(cond_pre.iter().map(|st| {
                        let mut st = st.clone();
                        if let StmtKind::Let(x, Some(e)) = st.kind {
                            st.kind = StmtKind::Assign(x, e);
                        }
                        st.synthetic = true;
                        st.loc = loc;
                        st
                    }));
                    pre.extend(cond_pre);
                }
                StmtKind::While(c2, body)
            }
            StmtKind::Try {
                body,
                catch: Some(c),
                finally: Some(f),
            } => {
                let inner = Stmt::synth(
                    StmtKind::Try {
                        body: body.clone(),
                        catch: Some(c.clone()),
                        finally: None,
                    },
                    loc,
                );
                StmtKind::Try {
                    body: self.stmts(&[inner], true),
                    catch: None,
                    finally: Some(self.stmts(f, true)),
                }
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => StmtKind::Try {
                body: self.stmts(body, true),
                catch: catch
                    .as_ref()
                    .map(|(x, c)| (x.clone(), self.stmts(c, true))),
                finally: finally.as_ref().map(|f| self.stmts(f, true)),
            },
            StmtKind::Function(f) => StmtKind::Function(self.function(f)),
            StmtKind::Block(b) => StmtKind::Block(self.stmts(b, in_try)),
        };
        pre.push(Stmt::synth(kind, loc));
        pre
    }

    /// Normalise an expression that will be named by its context: a call or
    /// function expression is kept whole.
    fn named(&mut self, e: &Expr, pre: &mut Vec<Stmt>) -> Expr {
        match &e.kind {
            ExprKind::Call { .. } | ExprKind::New { .. } => self.call(e, pre),
            ExprKind::Function(f) => {
                Expr::new(ExprKind::Function(Box::new(self.function(f))), e.loc)
            }
            _ => self.simple(e, pre),
        }
    }

    /// Normalise an application's callee and arguments, keeping the
    /// application itself.
    fn call(&mut self, e: &Expr, pre: &mut Vec<Stmt>) -> Expr {
        let (callee, args, is_new) = match &e.kind {
            ExprKind::Call { callee, args, .. } => (callee, args, false),
            ExprKind::New { callee, args, .. } => (callee, args, true),
            _ => unreachable!("call() on a non-application"),
        };
        let mut items: Vec<&Expr> = Vec::with_capacity(args.len() + 1);
        // A method callee keeps its field access so `this` is bound.
        let method = match &callee.kind {
            ExprKind::Field(obj, name) if !is_new => Some((obj.as_ref(), name.clone())),
            _ => None,
        };
        match &method {
            Some((obj, _)) => items.push(obj),
            None => items.push(callee),
        }
        items.extend(args.iter());
        let mut parts = self.operands(&items, pre);
        let args: Vec<Expr> = parts.split_off(1);
        let head = parts.pop().unwrap();
        let callee = match method {
            Some((_, name)) => {
                let obj = self.atomize(head, pre);
                Expr::field(obj, name)
            }
            None => self.atomize_callee(head, pre),
        };
        let kind = if is_new {
            ExprKind::New {
                callee: Box::new(callee),
                args,
                label: None,
            }
        } else {
            ExprKind::Call {
                callee: Box::new(callee),
                args,
                label: None,
            }
        };
        Expr::new(kind, e.loc)
    }

    fn atomize(&mut self, e: Expr, pre: &mut Vec<Stmt>) -> Expr {
        if e.is_atomic() {
            e
        } else {
            self.bind(e, pre)
        }
    }

    fn atomize_callee(&mut self, e: Expr, pre: &mut Vec<Stmt>) -> Expr {
        match e.kind {
            ExprKind::Field(..) | ExprKind::Index(..) => e,
            _ => self.atomize(e, pre),
        }
    }

    fn bind(&mut self, e: Expr, pre: &mut Vec<Stmt>) -> Expr {
        let t = self.fresh();
        let loc = e.loc;
        pre.push(Stmt::synth(StmtKind::Let(t.clone(), Some(e)), loc));
        Expr::var(t, loc)
    }

    /// Normalise a left-to-right sequence of operands. An operand whose
    /// value could be changed by a later operand's calls is bound first.
    fn operands(&mut self, items: &[&Expr], pre: &mut Vec<Stmt>) -> Vec<Expr> {
        let mut out: Vec<Expr> = Vec::with_capacity(items.len());
        for item in items {
            let mut local = Vec::new();
            let v = self.simple(item, &mut local);
            if !local.is_empty() {
                for prev in out.iter_mut() {
                    if !is_stable(prev) {
                        let taken = std::mem::replace(prev, Expr::null(prev.loc));
                        *prev = self.bind(taken, pre);
                    }
                }
                pre.extend(local);
            }
            out.push(v);
        }
        out
    }

    /// Normalise to an expression free of applications and functions.
    fn simple(&mut self, e: &Expr, pre: &mut Vec<Stmt>) -> Expr {
        if !contains_call(e) {
            return e.clone();
        }
        let loc = e.loc;
        match &e.kind {
            ExprKind::Call { .. } | ExprKind::New { .. } => {
                let call = self.call(e, pre);
                self.bind(call, pre)
            }
            ExprKind::Function(f) => {
                let f = Expr::new(ExprKind::Function(Box::new(self.function(f))), loc);
                self.bind(f, pre)
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                // `t = l; if (t) { t = r; }` for &&, the else branch for ||.
                let l = self.simple(l, pre);
                let t = self.fresh();
                pre.push(Stmt::synth(StmtKind::Let(t.clone(), Some(l)), loc));
                let mut branch = Vec::new();
                let r = self.named(r, &mut branch);
                branch.push(Stmt::synth(StmtKind::Assign(t.clone(), r), loc));
                relocate(&mut branch, self.cur);
                let (then, els) = if *op == BinOp::And {
                    (branch, Vec::new())
                } else {
                    (Vec::new(), branch)
                };
                pre.push(Stmt::synth(
                    StmtKind::If(Expr::var(t.clone(), loc), then, els),
                    loc,
                ));
                Expr::var(t, loc)
            }
            ExprKind::Binary(op, l, r) => {
                let mut parts = self.operands(&[l, r], pre);
                let r = parts.pop().unwrap();
                let l = parts.pop().unwrap();
                Expr::new(ExprKind::Binary(*op, Box::new(l), Box::new(r)), loc)
            }
            ExprKind::Record(fields) => {
                let vals: Vec<&Expr> = fields.iter().map(|(_, v)| v).collect();
                let parts = self.operands(&vals, pre);
                let fields = fields
                    .iter()
                    .map(|(k, _)| k.clone())
                    .zip(parts)
                    .collect();
                Expr::new(ExprKind::Record(fields), loc)
            }
            ExprKind::Array(items) => {
                let refs: Vec<&Expr> = items.iter().collect();
                Expr::new(ExprKind::Array(self.operands(&refs, pre)), loc)
            }
            ExprKind::Field(o, name) => {
                let o = self.simple(o, pre);
                Expr::new(ExprKind::Field(Box::new(o), name.clone()), loc)
            }
            ExprKind::Index(o, i) => {
                let mut parts = self.operands(&[o, i], pre);
                let i = parts.pop().unwrap();
                let o = parts.pop().unwrap();
                Expr::new(ExprKind::Index(Box::new(o), Box::new(i)), loc)
            }
            _ => e.clone(),
        }
    }
}

/// Move statements made while lowering an operand to the statement being
/// lowered, including those of nested short-circuit branches.
fn relocate(stmts: &mut [Stmt], loc: SourceLoc) {
    for s in stmts {
        s.loc = loc;
        if let StmtKind::If(_, a, b) = &mut s.kind {
            relocate(a, loc);
            relocate(b, loc);
        }
    }
}
