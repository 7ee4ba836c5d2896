//! The per-function transformation into code that runs in normal, capture
//! and restore modes.
//!
//! Every instrumented function starts with a prologue binding its callee,
//! `this` and `new.target`. A pushed frame holds the current values of the
//! locals and a thunk that re-applies the function to its arguments. In restore mode
//! the prologue pops the function's frame, restores its locals and reads
//! the label `$l` of the call site to resume at. Statements are guarded so
//! that restore mode skips straight to that call site, where the callee is
//! re-entered instead of called. How a call site records its frame depends
//! on the continuation strategy.

use std::collections::HashSet;

use super::build::*;
use super::options::{ArgsMode, CompileOptions, CtorMode, Stacks};
use crate::frontend::ast::*;
use crate::runtime::Strategy;

/// Names the prologue binds that are not part of a frame's locals.
const HIDDEN: &[&str] = &[
    "$l", "$k", "$d", "$fn", "$this", "$nt", "$args", "$locals", "$reenter", "$e", "$fe", "$fr",
    "$rv",
];

fn hidden(x: &str) -> bool {
    HIDDEN.contains(&x) || x.starts_with("$h")
}

/// Instrument every function of a program. Top-level statements themselves
/// are left alone; they only configure the runtime and bind `$main`.
pub fn transform(p: &Program, o: &CompileOptions) -> Program {
    let body = p
        .body
        .iter()
        .map(|s| {
            let mut s = s.clone();
            instrument_functions_in(&mut s, o);
            s
        })
        .collect();
    Program {
        body,
        source: p.source.clone(),
    }
}

fn instrument_functions_in(s: &mut Stmt, o: &CompileOptions) {
    match &mut s.kind {
        StmtKind::Function(f) => *f = instrument_function(f, o),
        StmtKind::Let(_, Some(e)) | StmtKind::Assign(_, e) | StmtKind::Expr(e) => {
            if let ExprKind::Function(f) = &mut e.kind {
                **f = instrument_function(f, o);
            }
        }
        _ => {}
    }
}

pub fn instrument_function(f: &Function, o: &CompileOptions) -> Function {
    let uses_arguments = {
        let mut found = false;
        visit::exprs_shallow(&f.body, &mut |e| {
            found |= matches!(e.kind, ExprKind::Arguments);
        });
        found
    };
    let mut cx = Fx {
        o,
        extra: Vec::new(),
        hidden_decls: Vec::new(),
        fin: Vec::new(),
        counter: 0,
        args_var: o.args == ArgsMode::Mixed && uses_arguments,
    };
    let body = cx.block(&f.body);

    let mut locals: Vec<String> = Vec::new();
    let mut seen = HashSet::new();
    let mut declared = Vec::new();
    declared_names(&f.body, &mut declared);
    for x in f.params.iter().chain(&declared).chain(&cx.extra) {
        if !hidden(x) && seen.insert(x.clone()) {
            locals.push(x.clone());
        }
    }

    let loc = f.loc;
    let mut out = Vec::new();
    if o.args == ArgsMode::Varargs || cx.args_var {
        out.push(let_("$args", Some(Expr::new(ExprKind::Arguments, loc)), loc));
    }
    out.push(let_("$fn", Some(rt("callee", vec![], loc)), loc));
    out.push(let_("$this", Some(Expr::new(ExprKind::This, loc)), loc));
    let construct = if o.ctor == CtorMode::Direct {
        out.push(let_("$nt", Some(rt("newTarget", vec![], loc)), loc));
        var("$nt", loc)
    } else {
        Expr::new(ExprKind::Bool(false), loc)
    };
    if o.stacks == Stacks::Deep {
        out.push(let_("$d", Some(rt("enterCall", vec![], loc)), loc));
    }
    out.push(let_("$l", Some(num(-1.0, loc)), loc));
    out.push(let_("$k", Some(Expr::null(loc)), loc));
    for x in cx.extra.iter().chain(&cx.hidden_decls) {
        out.push(let_(x, None, loc));
    }
    // Both are built only when a frame is pushed: as prologue bindings they
    // would form a reference cycle with the activation on every call.
    let snapshot = array(locals.iter().map(|x| var(x, loc)).collect(), loc);
    let reenter_args = if o.args == ArgsMode::Varargs {
        var("$args", loc)
    } else {
        array(f.params.iter().map(|x| var(x, loc)).collect(), loc)
    };
    let reapply = rt(
        "reapply",
        vec![var("$fn", loc), var("$this", loc), reenter_args, construct],
        loc,
    );
    let reenter = func(vec![], vec![ret(Some(reapply), loc)], loc);
    // Nested functions were instrumented first, so the placeholders left
    // here all belong to this function.
    let mut body = body;
    visit::walk_stmts_mut(&mut body, &mut |_| {}, &mut |e| {
        if let ExprKind::Var(x) = &e.kind {
            match x.as_str() {
                "$locals" => *e = snapshot.clone(),
                "$reenter" => *e = reenter.clone(),
                _ => {}
            }
        }
    });
    let mut restore_block = vec![let_("$fr", Some(rt("popFrame", vec![], loc)), loc)];
    for (i, x) in locals.iter().enumerate() {
        let v = index(field(var("$fr", loc), "locals"), num(i as f64, loc));
        restore_block.push(assign(x, v, loc));
    }
    if cx.args_var {
        restore_block.push(assign("$args", field(var("$fr", loc), "args"), loc));
    }
    restore_block.push(assign("$l", field(var("$fr", loc), "label"), loc));
    restore_block.push(assign("$k", rt("topFrame", vec![], loc), loc));
    out.push(if_(restore(loc), restore_block, vec![]));
    out.extend(body);

    Function {
        name: f.name.clone(),
        params: f.params.clone(),
        body: out,
        loc: f.loc,
    }
}

/// Names bound by `let`, function declarations and catch clauses, in order.
fn declared_names(stmts: &[Stmt], out: &mut Vec<String>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Let(x, _) => out.push(x.clone()),
            StmtKind::Function(f) => out.extend(f.name.clone()),
            StmtKind::If(_, a, b) => {
                declared_names(a, out);
                declared_names(b, out);
            }
            StmtKind::While(_, b) | StmtKind::Block(b) => declared_names(b, out),
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                declared_names(body, out);
                if let Some((x, c)) = catch {
                    out.push(x.clone());
                    declared_names(c, out);
                }
                if let Some(f) = finally {
                    declared_names(f, out);
                }
            }
            _ => {}
        }
    }
}

/// Per-function transformation state.
struct Fx<'a> {
    o: &'a CompileOptions,
    /// Locals introduced by the transformation itself.
    extra: Vec<String>,
    /// Temporaries introduced here that frames need not record.
    hidden_decls: Vec<String>,
    /// Enclosing `try`/`finally` blocks whose protected part we are in.
    fin: Vec<usize>,
    counter: usize,
    /// `arguments` reads go through `$args`, which frames carry.
    args_var: bool,
}

enum Target<'a> {
    None,
    Let(&'a str),
    Assign(&'a str),
}

impl Target<'_> {
    fn name(&self) -> Option<&str> {
        match self {
            Target::None => None,
            Target::Let(x) | Target::Assign(x) => Some(x),
        }
    }

    fn bind(&self, e: Expr) -> Stmt {
        let loc = e.loc;
        match self {
            Target::None => expr(e),
            Target::Let(x) => let_(x, Some(e), loc),
            Target::Assign(x) => assign(x, e, loc),
        }
    }
}

impl Fx<'_> {
    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter - 1)
    }

    fn block(&mut self, stmts: &[Stmt]) -> Vec<Stmt> {
        let mut out: Vec<Stmt> = Vec::new();
        // Runs of plain statements share one guard.
        let mut run: Vec<Stmt> = Vec::new();
        for s in stmts {
            match self.plain(s) {
                Some(p) => run.push(p),
                None => {
                    flush(&mut run, &mut out);
                    out.extend(self.stmt(s));
                }
            }
        }
        flush(&mut run, &mut out);
        out
    }

    /// A statement without calls that only runs in normal mode.
    fn plain(&mut self, s: &Stmt) -> Option<Stmt> {
        let mut s2 = s.clone();
        match &mut s2.kind {
            StmtKind::Let(_, None) => {}
            StmtKind::Let(_, Some(e)) | StmtKind::Assign(_, e) | StmtKind::Expr(e)
                if !e.is_application() =>
            {
                self.fix(e)
            }
            StmtKind::SetField(o, _, v) => {
                self.fix(o);
                self.fix(v);
            }
            StmtKind::SetIndex(o, i, v) => {
                self.fix(o);
                self.fix(i);
                self.fix(v);
            }
            StmtKind::Throw(e) => self.fix(e),
            StmtKind::Function(f) => *f = instrument_function(f, self.o),
            _ => return None,
        }
        Some(s2)
    }

    /// Instrument nested functions and route `arguments` through `$args`.
    fn fix(&mut self, e: &mut Expr) {
        match &mut e.kind {
            ExprKind::Arguments if self.args_var => e.kind = ExprKind::Var("$args".into()),
            ExprKind::Function(f) => **f = instrument_function(f, self.o),
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                self.fix(a);
                self.fix(b);
            }
            ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args, .. } => {
                self.fix(callee);
                args.iter_mut().for_each(|a| self.fix(a));
            }
            ExprKind::Record(fs) => fs.iter_mut().for_each(|(_, v)| self.fix(v)),
            ExprKind::Array(items) => items.iter_mut().for_each(|v| self.fix(v)),
            ExprKind::Field(o, _) => self.fix(o),
            _ => {}
        }
    }

    fn stmt(&mut self, s: &Stmt) -> Vec<Stmt> {
        let loc = s.loc;
        match &s.kind {
            StmtKind::Let(x, Some(e)) if e.is_application() => {
                at(loc, self.site(Target::Let(x), e))
            }
            StmtKind::Assign(x, e) if e.is_application() => {
                at(loc, self.site(Target::Assign(x), e))
            }
            StmtKind::Expr(e) if e.is_application() => at(loc, self.site(Target::None, e)),
            StmtKind::Return(Some(e)) if matches!(e.kind, ExprKind::Call { label: None, .. }) => {
                at(loc, self.tail_call(e))
            }
            StmtKind::Return(e) => {
                let mut e = e.clone().unwrap_or_else(|| Expr::null(loc));
                self.fix(&mut e);
                if self.fin.is_empty() {
                    return vec![ret(Some(e), loc)];
                }
                let ids = self.fin.clone();
                let inner = format!("$fv{}", ids[ids.len() - 1]);
                let mut out = vec![assign(&inner, e, loc)];
                for id in ids.iter().rev() {
                    let fv = format!("$fv{id}");
                    if fv != inner {
                        out.push(assign(&fv, var(&inner, loc), loc));
                    }
                    out.push(assign(&format!("$fk{id}"), string("return", loc), loc));
                }
                out.push(ret(Some(var(&inner, loc)), loc));
                out
            }
            StmtKind::If(c, a, b) => {
                let mut c = c.clone();
                self.fix(&mut c);
                let test = match label_test(&labels_in(a), loc) {
                    Some(t) => or(and(normal(loc), c), and(restore(loc), t)),
                    None => and(normal(loc), c),
                };
                let then = self.block(a);
                let els = if b.is_empty() {
                    Vec::new()
                } else {
                    let guard = match label_test(&labels_in(b), loc) {
                        Some(t) => or(normal(loc), and(restore(loc), t)),
                        None => normal(loc),
                    };
                    vec![if_(guard, self.block(b), vec![])]
                };
                vec![s_at(StmtKind::If(test, then, els), loc)]
            }
            StmtKind::While(c, body) => {
                let mut c = c.clone();
                self.fix(&mut c);
                let test = match label_test(&labels_in(body), loc) {
                    Some(t) => or(and(normal(loc), c), and(restore(loc), t)),
                    None => and(normal(loc), c),
                };
                vec![s_at(StmtKind::While(test, self.block(body)), loc)]
            }
            StmtKind::Try {
                body,
                catch: Some((x, c)),
                finally: None,
            } => self.try_catch(body, x, c, loc),
            StmtKind::Try {
                body,
                catch: None,
                finally: Some(f),
            } => self.try_finally(body, f, loc),
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                // Normalization splits catch-and-finally; handle it anyway.
                let inner = Stmt::synth(
                    StmtKind::Try {
                        body: body.clone(),
                        catch: catch.clone(),
                        finally: None,
                    },
                    loc,
                );
                match (catch, finally) {
                    (Some(_), Some(f)) => self.try_finally(&[inner], f, loc),
                    _ => self.block(body),
                }
            }
            StmtKind::Block(b) => vec![s_at(StmtKind::Block(self.block(b)), loc)],
            _ => {
                let p = self.plain(s).expect("plain statement");
                vec![if_(normal(loc), vec![p], vec![])]
            }
        }
    }

    fn frame(&self, label: u32, loc: SourceLoc) -> Expr {
        let mut fields = vec![
            ("label", num(label as f64, loc)),
            ("locals", var("$locals", loc)),
            ("reenter", var("$reenter", loc)),
        ];
        if self.args_var {
            fields.push(("args", var("$args", loc)));
        }
        record(fields, loc)
    }

    /// A labeled, non-tail application.
    fn site(&mut self, target: Target, app: &Expr) -> Vec<Stmt> {
        let loc = app.loc;
        let label = application_label(app).expect("labeled call site");
        let mut app = app.clone();
        self.fix(&mut app);
        let mut before = Vec::new();
        let mut after = Vec::new();
        if let (ExprKind::New { callee, args, .. }, CtorMode::Wrapped) = (&app.kind, self.o.ctor) {
            let obj = self.fresh("$oj");
            self.extra.push(obj.clone());
            before.push(if_(
                normal(loc),
                vec![assign(&obj, record(vec![], loc), loc)],
                vec![],
            ));
            let mut call_args = vec![(**callee).clone(), var(&obj, loc)];
            call_args.extend(args.iter().cloned());
            if let Some(x) = target.name() {
                let fixed = rt("ctorResult", vec![var(x, loc), var(&obj, loc)], loc);
                after.push(if_(normal(loc), vec![assign(x, fixed, loc)], vec![]));
            }
            app = rt_labeled("call", call_args, label, loc);
        }
        let is_suspend = matches!(&app.kind,
            ExprKind::Call { callee, .. }
                if matches!(&callee.kind, ExprKind::Field(o, m)
                    if m == "maySuspend" && matches!(&o.kind, ExprKind::Var(r) if r == RT)));

        let reenter = rt("reenter", vec![var("$k", loc)], loc);
        let frame = self.frame(label, loc);
        let mut body = Vec::new();
        match self.o.cont {
            Strategy::Checked => {
                // A capture leaves the call's value undefined, so a user
                // variable only receives it once the call has really returned.
                let staged = target.name().is_some_and(|x| !x.starts_with('$'));
                let t = if staged { Target::Let("$rv") } else { target_ref(&target) };
                body.push(if_(normal(loc), vec![t.bind(app)], vec![t_assign(&t).bind(reenter)]));
                body.push(if_(
                    capture(loc),
                    vec![expr(rt("pushFrame", vec![frame], loc)), ret(None, loc)],
                    vec![],
                ));
                if staged {
                    body.push(target.bind(var("$rv", loc)));
                }
            }
            Strategy::Exceptional => {
                let call = if_(
                    normal(loc),
                    vec![target.bind(app)],
                    vec![t_assign(&target).bind(reenter)],
                );
                body.push(s_at(
                    StmtKind::Try {
                        body: vec![call],
                        catch: Some((
                            "$e".into(),
                            vec![
                                if_(
                                    capture(loc),
                                    vec![expr(rt("pushFrame", vec![frame], loc))],
                                    vec![],
                                ),
                                throw(var("$e", loc)),
                            ],
                        )),
                        finally: None,
                    },
                    loc,
                ));
            }
            Strategy::Eager => {
                body.push(expr(rt("pushFrame", vec![frame], loc)));
                body.push(if_(
                    normal(loc),
                    vec![target.bind(app)],
                    vec![t_assign(&target).bind(reenter)],
                ));
                body.push(expr(rt("dropFrame", vec![], loc)));
            }
        }
        if self.o.stacks == Stacks::Deep && !is_suspend {
            body.push(expr(rt("setDepth", vec![var("$d", loc)], loc)));
        }
        let guard = or(
            normal(loc),
            and(restore(loc), eq(var("$l", loc), num(label as f64, loc))),
        );
        let mut out = before;
        out.push(if_(guard, body, vec![]));
        out.extend(after);
        out
    }

    fn tail_call(&mut self, e: &Expr) -> Vec<Stmt> {
        let loc = e.loc;
        let mut e = e.clone();
        self.fix(&mut e);
        let mut out = Vec::new();
        if self.o.stacks == Stacks::Deep {
            let d = bin(BinOp::Sub, var("$d", loc), num(1.0, loc));
            out.push(expr(rt("setDepth", vec![d], loc)));
        }
        if self.o.trampoline {
            let ExprKind::Call { callee, args, .. } = e.kind else {
                unreachable!("tail call")
            };
            let this = match &callee.kind {
                ExprKind::Field(o, _) => (**o).clone(),
                _ => Expr::null(loc),
            };
            let mut bargs = vec![*callee, this];
            bargs.extend(args);
            e = rt("bounce", bargs, loc);
        }
        out.push(ret(Some(e), loc));
        out
    }

    fn try_catch(&mut self, body: &[Stmt], x: &str, c: &[Stmt], loc: SourceLoc) -> Vec<Stmt> {
        let mut out = Vec::new();
        let height = self.eager_height(&mut out, loc);
        let mut b = Vec::new();
        if let Some(t) = label_test(&labels_in(c), loc) {
            // Re-enter the handler by throwing the saved exception again.
            b.push(if_(and(restore(loc), t), vec![throw(var(x, loc))], vec![]));
        }
        b.extend(self.block(body));
        let mut h = Vec::new();
        if self.o.cont != Strategy::Checked {
            h.push(if_(capture(loc), vec![throw(var(x, loc))], vec![]));
        }
        h.extend(self.handler_entry(height.as_deref(), loc));
        h.extend(self.block(c));
        out.push(s_at(
            StmtKind::Try {
                body: b,
                catch: Some((x.to_string(), h)),
                finally: None,
            },
            loc,
        ));
        out
    }

    fn try_finally(&mut self, body: &[Stmt], f: &[Stmt], loc: SourceLoc) -> Vec<Stmt> {
        let id = self.counter;
        self.counter += 1;
        let (fk, fv) = (format!("$fk{id}"), format!("$fv{id}"));
        self.extra.push(fk.clone());
        self.extra.push(fv.clone());
        let mut out = vec![if_(
            normal(loc),
            vec![assign(&fk, string("normal", loc), loc)],
            vec![],
        )];
        let height = self.eager_height(&mut out, loc);
        let mut outer = Vec::new();
        if let Some(t) = label_test(&labels_in(f), loc) {
            // Re-enter the finalizer the way it was first reached.
            let kind_is = |k: &str| eq(var(&fk, loc), string(k, loc));
            outer.push(if_(
                and(restore(loc), t),
                vec![
                    if_(kind_is("throw"), vec![throw(var(&fv, loc))], vec![]),
                    if_(kind_is("return"), vec![ret(Some(var(&fv, loc)), loc)], vec![]),
                ],
                vec![],
            ));
        }
        self.fin.push(id);
        let protected = self.block(body);
        self.fin.pop();
        let mut record_throw = Vec::new();
        if self.o.cont != Strategy::Checked {
            record_throw.push(if_(capture(loc), vec![throw(var("$fe", loc))], vec![]));
        }
        record_throw.push(assign(&fk, string("throw", loc), loc));
        record_throw.push(assign(&fv, var("$fe", loc), loc));
        record_throw.push(throw(var("$fe", loc)));
        outer.push(s_at(
            StmtKind::Try {
                body: protected,
                catch: Some(("$fe".into(), record_throw)),
                finally: None,
            },
            loc,
        ));
        let mut fin = self.handler_entry(height.as_deref(), loc);
        fin.extend(self.block(f));
        let not_capturing = bin(BinOp::Ne, rt("mode", vec![], loc), string("capture", loc));
        out.push(s_at(
            StmtKind::Try {
                body: outer,
                catch: None,
                finally: Some(vec![if_(not_capturing, fin, vec![])]),
            },
            loc,
        ));
        out
    }

    /// With eager frames, remember the shadow stack height before a `try`.
    fn eager_height(&mut self, out: &mut Vec<Stmt>, loc: SourceLoc) -> Option<String> {
        if self.o.cont != Strategy::Eager {
            return None;
        }
        let h = self.fresh("$h");
        self.hidden_decls.push(h.clone());
        out.push(assign(&h, rt("stackHeight", vec![], loc), loc));
        Some(h)
    }

    /// Bookkeeping at the start of a handler or finalizer: frames and depth
    /// left behind by an exception are discarded.
    fn handler_entry(&self, height: Option<&str>, loc: SourceLoc) -> Vec<Stmt> {
        let mut out = Vec::new();
        if let Some(h) = height {
            out.push(if_(
                normal(loc),
                vec![expr(rt("truncate", vec![var(h, loc)], loc))],
                vec![],
            ));
        }
        if self.o.stacks == Stacks::Deep {
            out.push(expr(rt("setDepth", vec![var("$d", loc)], loc)));
        }
        out
    }
}

fn target_ref<'a>(t: &Target<'a>) -> Target<'a> {
    match t {
        Target::None => Target::None,
        Target::Let(x) => Target::Let(x),
        Target::Assign(x) => Target::Assign(x),
    }
}

/// The restore branch assigns; the declaration stays in the normal branch.
fn t_assign<'a>(t: &Target<'a>) -> Target<'a> {
    match t {
        Target::None => Target::None,
        Target::Let(x) | Target::Assign(x) => Target::Assign(x),
    }
}

fn s_at(kind: StmtKind, loc: SourceLoc) -> Stmt {
    Stmt::synth(kind, loc)
}

fn flush(run: &mut Vec<Stmt>, out: &mut Vec<Stmt>) {
    if run.is_empty() {
        return;
    }
    let loc = run[0].loc;
    out.push(if_(normal(loc), std::mem::take(run), vec![]));
}

/// Give generated statements the location of the statement they implement,
/// so runtime errors point where a plain run would.
fn at(loc: SourceLoc, mut stmts: Vec<Stmt>) -> Vec<Stmt> {
    visit::walk_stmts_mut(&mut stmts, &mut |s| s.loc = loc, &mut |_| {});
    stmts
}
