//! Boxing of variables that are both assignable and captured by a nested
//! function.
//!
//! Restoring a frame re-creates its function's environment, while closures
//! made before the capture still point at the old one. Sharing a one-field
//! record `{box: v}` between both keeps their writes visible to each other.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::frontend::ast::*;

#[derive(Clone, Debug, PartialEq)]
pub struct BoxedVar {
    pub name: String,
    /// Location of the function (or program) whose scope declares it.
    pub loc: SourceLoc,
}

pub const BOX_FIELD: &str = "box";

pub fn box_assignables(p: &Program) -> (Program, Vec<BoxedVar>) {
    let mut found = Vec::new();
    let body = rewrite_function(&[], &p.body, &HashSet::new(), SourceLoc::new(1, 0), &mut found);
    (
        Program {
            body,
            source: p.source.clone(),
        },
        found,
    )
}

/// Names declared directly in a function body (not in nested functions).
#[derive(Default)]
struct Decls {
    names: HashSet<String>,
    /// Names that the rule treats as assignable on declaration grounds alone.
    assignable: HashSet<String>,
    lets: HashMap<String, usize>,
}

fn collect_decls(params: &[String], body: &[Stmt]) -> Decls {
    let mut d = Decls::default();
    for x in params {
        d.names.insert(x.clone());
    }
    fn go(stmts: &[Stmt], in_loop: bool, d: &mut Decls) {
        for s in stmts {
            match &s.kind {
                StmtKind::Let(x, _) => {
                    d.names.insert(x.clone());
                    *d.lets.entry(x.clone()).or_default() += 1;
                    if in_loop {
                        d.assignable.insert(x.clone());
                    }
                }
                StmtKind::Function(f) => {
                    let x = f.name.clone().expect("declared function has a name");
                    d.names.insert(x.clone());
                    *d.lets.entry(x.clone()).or_default() += 1;
                    if in_loop {
                        d.assignable.insert(x);
                    }
                }
                StmtKind::If(_, a, b) => {
                    go(a, in_loop, d);
                    go(b, in_loop, d);
                }
                StmtKind::While(_, b) => go(b, true, d),
                StmtKind::Try {
                    body,
                    catch,
                    finally,
                } => {
                    go(body, in_loop, d);
                    if let Some((x, c)) = catch {
                        d.names.insert(x.clone());
                        d.assignable.insert(x.clone());
                        go(c, in_loop, d);
                    }
                    if let Some(f) = finally {
                        go(f, in_loop, d);
                    }
                }
                StmtKind::Block(b) => go(b, in_loop, d),
                _ => {}
            }
        }
    }
    go(body, false, &mut d);
    for (x, n) in &d.lets {
        if *n >= 2 {
            d.assignable.insert(x.clone());
        }
    }
    d
}

/// Variables a function reads or writes without declaring them, and the
/// subset it assigns.
struct Free {
    refs: HashSet<String>,
    assigned: HashSet<String>,
}

fn free_vars(f: &Function) -> Free {
    let decls = collect_decls(&f.params, &f.body);
    let mut refs = HashSet::new();
    let mut assigned = HashSet::new();
    let mut inner = Vec::new();
    for_each_own(&f.body, &mut |ev| match ev {
        Event::Read(x) => {
            refs.insert(x.to_string());
        }
        Event::Assign(x) => {
            refs.insert(x.to_string());
            assigned.insert(x.to_string());
        }
        Event::Let(_) => {}
        Event::Closure(g) => inner.push(free_vars(g)),
    });
    for g in inner {
        refs.extend(g.refs);
        assigned.extend(g.assigned);
    }
    refs.retain(|x| !decls.names.contains(x));
    assigned.retain(|x| !decls.names.contains(x));
    Free { refs, assigned }
}

enum Event<'a> {
    Read(&'a str),
    Assign(&'a str),
    Let(&'a str),
    Closure(&'a Function),
}

/// Walk a function's own body in textual order, reporting variable events.
fn for_each_own<'a>(stmts: &'a [Stmt], out: &mut dyn FnMut(Event<'a>)) {
    fn expr<'a>(e: &'a Expr, out: &mut dyn FnMut(Event<'a>)) {
        match &e.kind {
            ExprKind::Var(x) => out(Event::Read(x)),
            ExprKind::Function(f) => out(Event::Closure(f)),
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                expr(a, out);
                expr(b, out);
            }
            ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args, .. } => {
                expr(callee, out);
                for a in args {
                    expr(a, out);
                }
            }
            ExprKind::Record(fs) => fs.iter().for_each(|(_, v)| expr(v, out)),
            ExprKind::Array(items) => items.iter().for_each(|v| expr(v, out)),
            ExprKind::Field(o, _) => expr(o, out),
            _ => {}
        }
    }
    for s in stmts {
        match &s.kind {
            StmtKind::Let(x, init) => {
                out(Event::Let(x));
                if let Some(e) = init {
                    expr(e, out);
                }
            }
            StmtKind::Assign(x, e) => {
                expr(e, out);
                out(Event::Assign(x));
            }
            StmtKind::SetField(o, _, v) => {
                expr(o, out);
                expr(v, out);
            }
            StmtKind::SetIndex(o, i, v) => {
                expr(o, out);
                expr(i, out);
                expr(v, out);
            }
            StmtKind::Expr(e) | StmtKind::Throw(e) | StmtKind::Return(Some(e)) => expr(e, out),
            StmtKind::Return(None) => {}
            StmtKind::If(c, a, b) => {
                expr(c, out);
                for_each_own(a, out);
                for_each_own(b, out);
            }
            StmtKind::While(c, b) => {
                expr(c, out);
                for_each_own(b, out);
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                for_each_own(body, out);
                if let Some((x, c)) = catch {
                    out(Event::Let(x));
                    for_each_own(c, out);
                }
                if let Some(f) = finally {
                    for_each_own(f, out);
                }
            }
            StmtKind::Function(f) => {
                out(Event::Let(f.name.as_deref().expect("declared function has a name")));
                out(Event::Closure(f));
            }
            StmtKind::Block(b) => for_each_own(b, out),
        }
    }
}

/// Decide which of a function's own variables to box.
fn boxed_here(params: &[String], body: &[Stmt]) -> BTreeSet<String> {
    let decls = collect_decls(params, body);
    let mut assignable = decls.assignable.clone();
    let mut captured = HashSet::new();
    let mut declared_so_far: HashSet<&str> = params.iter().map(|s| s.as_str()).collect();
    for_each_own(body, &mut |ev| match ev {
        Event::Assign(x) => {
            assignable.insert(x.to_string());
        }
        Event::Let(x) => {
            declared_so_far.insert(x);
        }
        Event::Read(_) => {}
        Event::Closure(g) => {
            let free = free_vars(g);
            for x in free.refs {
                if decls.names.contains(&x) {
                    if !declared_so_far.contains(x.as_str()) {
                        assignable.insert(x.clone());
                    }
                    captured.insert(x);
                }
            }
            for x in free.assigned {
                if decls.names.contains(&x) {
                    assignable.insert(x);
                }
            }
        }
    });
    captured
        .into_iter()
        .filter(|x| assignable.contains(x))
        .collect()
}

fn max_temp(stmts: &[Stmt]) -> u32 {
    let mut next = 0;
    for_each_own(stmts, &mut |ev| {
        if let Event::Let(x) | Event::Assign(x) = ev {
            if let Some(n) = x.strip_prefix("$t").and_then(|n| n.parse::<u32>().ok()) {
                next = next.max(n + 1);
            }
        }
    });
    next
}

struct Rewriter<'a> {
    visible: &'a HashSet<String>,
    next_temp: u32,
    found: &'a mut Vec<BoxedVar>,
}

fn rewrite_function(
    params: &[String],
    body: &[Stmt],
    outer: &HashSet<String>,
    loc: SourceLoc,
    found: &mut Vec<BoxedVar>,
) -> Vec<Stmt> {
    let decls = collect_decls(params, body);
    let here = boxed_here(params, body);
    let mut visible: HashSet<String> = outer
        .iter()
        .filter(|x| !decls.names.contains(*x))
        .cloned()
        .collect();
    visible.extend(here.iter().cloned());
    for x in &here {
        found.push(BoxedVar {
            name: x.clone(),
            loc,
        });
    }
    let mut rw = Rewriter {
        visible: &visible,
        next_temp: max_temp(body),
        found,
    };
    let mut out = Vec::new();
    for x in &here {
        let init = if params.contains(x) {
            Expr::var(x.clone(), loc)
        } else {
            Expr::null(loc)
        };
        let rec = Expr::new(ExprKind::Record(vec![(BOX_FIELD.to_string(), init)]), loc);
        let kind = if params.contains(x) {
            StmtKind::Assign(x.clone(), rec)
        } else {
            StmtKind::Let(x.clone(), Some(rec))
        };
        out.push(Stmt::synth(kind, loc));
    }
    out.extend(rw.stmts(body));
    out
}

impl Rewriter<'_> {
    fn fresh(&mut self) -> String {
        let t = format!("$t{}", self.next_temp);
        self.next_temp += 1;
        t
    }

    fn boxed(&self, x: &str) -> bool {
        self.visible.contains(x)
    }

    fn stmts(&mut self, stmts: &[Stmt]) -> Vec<Stmt> {
        let mut out = Vec::new();
        for s in stmts {
            let mut lowered = self.stmt(s);
            for (i, l) in lowered.iter_mut().enumerate() {
                // Errors raised by any part report the source statement.
                l.loc = s.loc;
                l.synthetic = i > 0 || s.synthetic;
            }
            out.extend(lowered);
        }
        out
    }

    fn store(&mut self, x: &str, e: Expr, loc: SourceLoc, pre: &mut Vec<Stmt>) -> StmtKind {
        let e = if e.is_application() || matches!(e.kind, ExprKind::Function(_)) {
            let t = self.fresh();
            pre.push(Stmt::synth(StmtKind::Let(t.clone(), Some(e)), loc));
            Expr::var(t, loc)
        } else {
            e
        };
        StmtKind::SetField(Expr::var(x, loc), BOX_FIELD.to_string(), e)
    }

    fn stmt(&mut self, s: &Stmt) -> Vec<Stmt> {
        let loc = s.loc;
        let mut pre = Vec::new();
        let kind = match &s.kind {
            StmtKind::Let(x, init) => {
                let e = init.as_ref().map(|e| self.top(e, &mut pre));
                if self.boxed(x) {
                    let e = e.unwrap_or_else(|| Expr::null(loc));
                    self.store(x, e, loc, &mut pre)
                } else {
                    StmtKind::Let(x.clone(), e)
                }
            }
            StmtKind::Assign(x, e) => {
                let e = self.top(e, &mut pre);
                if self.boxed(x) {
                    self.store(x, e, loc, &mut pre)
                } else {
                    StmtKind::Assign(x.clone(), e)
                }
            }
            StmtKind::SetField(o, f, v) => StmtKind::SetField(self.expr(o), f.clone(), self.expr(v)),
            StmtKind::SetIndex(o, i, v) => {
                StmtKind::SetIndex(self.expr(o), self.expr(i), self.expr(v))
            }
            StmtKind::Expr(e) => StmtKind::Expr(self.top(e, &mut pre)),
            StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(|e| self.top(e, &mut pre))),
            StmtKind::Throw(e) => StmtKind::Throw(self.expr(e)),
            StmtKind::If(c, a, b) => StmtKind::If(self.expr(c), self.stmts(a), self.stmts(b)),
            StmtKind::While(c, b) => StmtKind::While(self.expr(c), self.stmts(b)),
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                let catch = catch.as_ref().map(|(x, c)| {
                    let mut c = self.stmts(c);
                    if self.boxed(x) {
                        let t = self.fresh();
                        c.insert(
                            0,
                            Stmt::synth(
                                StmtKind::SetField(
                                    Expr::var(x.clone(), loc),
                                    BOX_FIELD.to_string(),
                                    Expr::var(t.clone(), loc),
                                ),
                                loc,
                            ),
                        );
                        (t, c)
                    } else {
                        (x.clone(), c)
                    }
                });
                StmtKind::Try {
                    body: self.stmts(body),
                    catch,
                    finally: finally.as_ref().map(|f| self.stmts(f)),
                }
            }
            StmtKind::Function(f) => {
                let g = self.function(f);
                let name = f.name.clone().expect("declared function has a name");
                if self.boxed(&name) {
                    let e = Expr::new(ExprKind::Function(Box::new(g)), loc);
                    self.store(&name, e, loc, &mut pre)
                } else {
                    StmtKind::Function(g)
                }
            }
            StmtKind::Block(b) => StmtKind::Block(self.stmts(b)),
        };
        pre.push(Stmt::synth(kind, loc));
        pre
    }

    fn function(&mut self, f: &Function) -> Function {
        Function {
            name: f.name.clone(),
            params: f.params.clone(),
            body: rewrite_function(&f.params, &f.body, self.visible, f.loc, self.found),
            loc: f.loc,
        }
    }

    /// A statement-level expression: an application's callee must stay a
    /// plain variable so that `this` is not bound to the box.
    fn top(&mut self, e: &Expr, pre: &mut Vec<Stmt>) -> Expr {
        match &e.kind {
            ExprKind::Call {
                callee,
                args,
                label,
            } => {
                let callee = match &callee.kind {
                    ExprKind::Var(x) if self.boxed(x) => {
                        let t = self.fresh();
                        pre.push(Stmt::synth(
                            StmtKind::Let(t.clone(), Some(self.expr(callee))),
                            callee.loc,
                        ));
                        Expr::var(t, callee.loc)
                    }
                    _ => self.expr(callee),
                };
                Expr::new(
                    ExprKind::Call {
                        callee: Box::new(callee),
                        args: args.iter().map(|a| self.expr(a)).collect(),
                        label: *label,
                    },
                    e.loc,
                )
            }
            _ => self.expr(e),
        }
    }

    fn expr(&mut self, e: &Expr) -> Expr {
        let loc = e.loc;
        let kind = match &e.kind {
            ExprKind::Var(x) if self.boxed(x) => {
                return Expr::field(Expr::var(x.clone(), loc), BOX_FIELD);
            }
            ExprKind::Function(f) => ExprKind::Function(Box::new(self.function(f))),
            ExprKind::Binary(op, a, b) => {
                ExprKind::Binary(*op, Box::new(self.expr(a)), Box::new(self.expr(b)))
            }
            ExprKind::Index(a, b) => ExprKind::Index(Box::new(self.expr(a)), Box::new(self.expr(b))),
            ExprKind::Call {
                callee,
                args,
                label,
            } => ExprKind::Call {
                callee: Box::new(self.expr(callee)),
                args: args.iter().map(|a| self.expr(a)).collect(),
                label: *label,
            },
            ExprKind::New {
                callee,
                args,
                label,
            } => ExprKind::New {
                callee: Box::new(self.expr(callee)),
                args: args.iter().map(|a| self.expr(a)).collect(),
                label: *label,
            },
            ExprKind::Record(fs) => {
                ExprKind::Record(fs.iter().map(|(k, v)| (k.clone(), self.expr(v))).collect())
            }
            ExprKind::Array(items) => ExprKind::Array(items.iter().map(|v| self.expr(v)).collect()),
            ExprKind::Field(o, f) => ExprKind::Field(Box::new(self.expr(o)), f.clone()),
            k => k.clone(),
        };
        Expr::new(kind, loc)
    }
}
