//! Resolved intermediate form: variables become slot references.

use std::collections::HashMap;
use std::rc::Rc;

use super::value::{Native, RtFn, Value};
use crate::runtime::Mode;
use crate::frontend::ast::*;

pub struct FnCode {
    pub name: Option<String>,
    pub nparams: usize,
    pub nslots: usize,
    pub this_slot: Option<usize>,
    pub args_slot: Option<usize>,
    pub body: Vec<IStmt>,
    pub loc: SourceLoc,
}

pub struct IStmt {
    pub kind: IStmtKind,
    pub loc: SourceLoc,
    /// Counts as a statement for tracing.
    pub trace: bool,
}

pub enum IStmtKind {
    Set(Place, IExpr),
    SetField(IExpr, Rc<str>, IExpr),
    SetIndex(IExpr, IExpr, IExpr),
    Expr(IExpr),
    /// An expression statement at the top level of a program; its value
    /// becomes the program result.
    TopExpr(IExpr),
    If(IExpr, Vec<IStmt>, Vec<IStmt>),
    While(IExpr, Vec<IStmt>),
    Return(Option<IExpr>),
    TailCall(IExpr),
    Throw(IExpr),
    Try {
        body: Vec<IStmt>,
        catch: Option<(Place, Vec<IStmt>)>,
        finally: Option<Vec<IStmt>>,
    },
    Block(Vec<IStmt>),
}

#[derive(Clone)]
pub enum Place {
    Local(u32),
    Outer(u32, u32),
    Unbound(Rc<str>),
}

pub enum IExpr {
    Const(Value),
    Var(Place),
    This,
    Arguments,
    RtRecord,
    /// `$rt.mode() == "m"` (or `!=`), costed like the expression it replaces.
    ModeIs(Mode, bool),
    Binary(BinOp, Box<IExpr>, Box<IExpr>),
    Call {
        callee: Box<IExpr>,
        args: Vec<IExpr>,
    },
    /// `o.m(args)`: `this` is bound to `o`.
    MethodCall {
        obj: Box<IExpr>,
        name: Rc<str>,
        args: Vec<IExpr>,
    },
    New {
        callee: Box<IExpr>,
        args: Vec<IExpr>,
    },
    Func(Rc<FnCode>),
    Record(Vec<(Rc<str>, IExpr)>),
    Array(Vec<IExpr>),
    Field(Box<IExpr>, Rc<str>),
    Index(Box<IExpr>, Box<IExpr>),
}

/// Compile a program body. The top level is treated as a function with no
/// parameters.
pub fn compile_program(p: &Program) -> Rc<FnCode> {
    let mut r = Resolver { scopes: Vec::new() };
    r.function(None, &[], &p.body, SourceLoc::new(1, 0), true)
}

struct Scope {
    slots: HashMap<String, u32>,
    this_slot: Option<usize>,
    args_slot: Option<usize>,
    next: u32,
    try_depth: u32,
    top: bool,
}

struct Resolver {
    scopes: Vec<Scope>,
}

fn declare_all(stmts: &[Stmt], out: &mut Vec<String>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Let(x, _) => out.push(x.clone()),
            StmtKind::Function(f) => out.push(f.name.clone().unwrap_or_default()),
            StmtKind::If(_, a, b) => {
                declare_all(a, out);
                declare_all(b, out);
            }
            StmtKind::While(_, b) | StmtKind::Block(b) => declare_all(b, out),
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                declare_all(body, out);
                if let Some((x, c)) = catch {
                    out.push(x.clone());
                    declare_all(c, out);
                }
                if let Some(f) = finally {
                    declare_all(f, out);
                }
            }
            _ => {}
        }
    }
}

impl Resolver {
    fn function(
        &mut self,
        name: Option<String>,
        params: &[String],
        body: &[Stmt],
        loc: SourceLoc,
        top: bool,
    ) -> Rc<FnCode> {
        let mut scope = Scope {
            slots: HashMap::new(),
            this_slot: None,
            args_slot: None,
            next: 0,
            try_depth: 0,
            top,
        };
        // Parameters occupy the first slots; a repeated name takes the last.
        for (i, p) in params.iter().enumerate() {
            scope.slots.insert(p.clone(), i as u32);
        }
        scope.next = params.len() as u32;
        let mut names = Vec::new();
        declare_all(body, &mut names);
        for n in names {
            if !scope.slots.contains_key(&n) {
                scope.slots.insert(n, scope.next);
                scope.next += 1;
            }
        }
        self.scopes.push(scope);
        let body = self.stmts(body);
        let scope = self.scopes.pop().unwrap();
        Rc::new(FnCode {
            name,
            nparams: params.len(),
            nslots: scope.next as usize,
            this_slot: scope.this_slot,
            args_slot: scope.args_slot,
            body,
            loc,
        })
    }

    fn scope(&mut self) -> &mut Scope {
        self.scopes.last_mut().unwrap()
    }

    fn extra_slot(&mut self) -> usize {
        let s = self.scope();
        s.next += 1;
        (s.next - 1) as usize
    }

    fn place(&self, x: &str) -> Option<Place> {
        for (depth, s) in self.scopes.iter().rev().enumerate() {
            if let Some(slot) = s.slots.get(x) {
                return Some(if depth == 0 {
                    Place::Local(*slot)
                } else {
                    Place::Outer(depth as u32, *slot)
                });
            }
        }
        None
    }

    fn place_or_unbound(&self, x: &str) -> Place {
        self.place(x).unwrap_or_else(|| Place::Unbound(x.into()))
    }

    fn stmts(&mut self, stmts: &[Stmt]) -> Vec<IStmt> {
        stmts.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, s: &Stmt) -> IStmt {
        let kind = match &s.kind {
            StmtKind::Let(x, e) => {
                let e = match e {
                    Some(e) => self.expr(e),
                    None => IExpr::Const(Value::Null),
                };
                IStmtKind::Set(self.place_or_unbound(x), e)
            }
            StmtKind::Assign(x, e) => {
                let e = self.expr(e);
                IStmtKind::Set(self.place_or_unbound(x), e)
            }
            StmtKind::SetField(o, f, v) => {
                IStmtKind::SetField(self.expr(o), f.as_str().into(), self.expr(v))
            }
            StmtKind::SetIndex(o, i, v) => {
                IStmtKind::SetIndex(self.expr(o), self.expr(i), self.expr(v))
            }
            StmtKind::Expr(e) => {
                let top = self.scope().top;
                let e = self.expr(e);
                if top {
                    IStmtKind::TopExpr(e)
                } else {
                    IStmtKind::Expr(e)
                }
            }
            StmtKind::If(c, a, b) => IStmtKind::If(self.expr(c), self.stmts(a), self.stmts(b)),
            StmtKind::While(c, b) => IStmtKind::While(self.expr(c), self.stmts(b)),
            StmtKind::Return(None) => IStmtKind::Return(None),
            StmtKind::Return(Some(e)) => {
                let tail = self.scope().try_depth == 0
                    && matches!(e.kind, ExprKind::Call { .. });
                let e = self.expr(e);
                if tail {
                    IStmtKind::TailCall(e)
                } else {
                    IStmtKind::Return(Some(e))
                }
            }
            StmtKind::Throw(e) => IStmtKind::Throw(self.expr(e)),
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                self.scope().try_depth += 1;
                let body = self.stmts(body);
                let catch = catch
                    .as_ref()
                    .map(|(x, c)| (self.place_or_unbound(x), self.stmts(c)));
                let finally = finally.as_ref().map(|f| self.stmts(f));
                self.scope().try_depth -= 1;
                IStmtKind::Try {
                    body,
                    catch,
                    finally,
                }
            }
            StmtKind::Function(f) => {
                let name = f.name.clone().unwrap_or_default();
                let code = self.function(f.name.clone(), &f.params, &f.body, f.loc, false);
                IStmtKind::Set(self.place_or_unbound(&name), IExpr::Func(code))
            }
            StmtKind::Block(b) => IStmtKind::Block(self.stmts(b)),
        };
        IStmt {
            kind,
            loc: s.loc,
            trace: !s.synthetic && !matches!(s.kind, StmtKind::Block(_)),
        }
    }

    fn builtin(&self, x: &str) -> Option<IExpr> {
        match x {
            "print" => Some(IExpr::Const(Value::Native(Native::Print))),
            "control" => Some(IExpr::Const(Value::Native(Native::Control))),
            "$rt" => Some(IExpr::RtRecord),
            _ => None,
        }
    }

    fn expr(&mut self, e: &Expr) -> IExpr {
        match &e.kind {
            ExprKind::Num(n) => IExpr::Const(Value::Num(*n)),
            ExprKind::Str(s) => IExpr::Const(Value::Str(s.as_str().into())),
            ExprKind::Bool(b) => IExpr::Const(Value::Bool(*b)),
            ExprKind::Null => IExpr::Const(Value::Null),
            ExprKind::Var(x) => match self.place(x) {
                Some(p) => IExpr::Var(p),
                None => self
                    .builtin(x)
                    .unwrap_or_else(|| IExpr::Var(Place::Unbound(x.as_str().into()))),
            },
            ExprKind::This => {
                if self.scope().this_slot.is_none() {
                    let slot = self.extra_slot();
                    self.scope().this_slot = Some(slot);
                }
                IExpr::This
            }
            ExprKind::Arguments => {
                if self.scope().args_slot.is_none() {
                    let slot = self.extra_slot();
                    self.scope().args_slot = Some(slot);
                }
                IExpr::Arguments
            }
            ExprKind::Binary(op @ (BinOp::Eq | BinOp::Ne), l, r) if self.mode_test(l, r).is_some() => {
                IExpr::ModeIs(self.mode_test(l, r).unwrap(), *op == BinOp::Eq)
            }
            ExprKind::Binary(op, l, r) => {
                IExpr::Binary(*op, Box::new(self.expr(l)), Box::new(self.expr(r)))
            }
            ExprKind::Call { callee, args, .. } => {
                let args = args.iter().map(|a| self.expr(a)).collect();
                match &callee.kind {
                    ExprKind::Field(obj, name) => {
                        if let Some(f) = self.rt_field(obj, name) {
                            return IExpr::Call {
                                callee: Box::new(f),
                                args,
                            };
                        }
                        IExpr::MethodCall {
                            obj: Box::new(self.expr(obj)),
                            name: name.as_str().into(),
                            args,
                        }
                    }
                    _ => IExpr::Call {
                        callee: Box::new(self.expr(callee)),
                        args,
                    },
                }
            }
            ExprKind::New { callee, args, .. } => IExpr::New {
                callee: Box::new(self.expr(callee)),
                args: args.iter().map(|a| self.expr(a)).collect(),
            },
            ExprKind::Function(f) => {
                IExpr::Func(self.function(f.name.clone(), &f.params, &f.body, f.loc, false))
            }
            ExprKind::Record(fields) => IExpr::Record(
                fields
                    .iter()
                    .map(|(k, v)| (k.as_str().into(), self.expr(v)))
                    .collect(),
            ),
            ExprKind::Array(items) => IExpr::Array(items.iter().map(|v| self.expr(v)).collect()),
            ExprKind::Field(obj, name) => match self.rt_field(obj, name) {
                Some(f) => f,
                None => IExpr::Field(Box::new(self.expr(obj)), name.as_str().into()),
            },
            ExprKind::Index(o, i) => IExpr::Index(Box::new(self.expr(o)), Box::new(self.expr(i))),
        }
    }

    fn mode_test(&self, l: &Expr, r: &Expr) -> Option<Mode> {
        let ExprKind::Call { callee, args, .. } = &l.kind else {
            return None;
        };
        let ExprKind::Field(obj, name) = &callee.kind else {
            return None;
        };
        match (self.rt_field(obj, name)?, &r.kind) {
            (IExpr::Const(Value::Native(Native::Rt(RtFn::Mode))), ExprKind::Str(m)) if args.is_empty() => {
                [Mode::Normal, Mode::Capture, Mode::Restore]
                    .into_iter()
                    .find(|x| x.name() == m)
            }
            _ => None,
        }
    }

    /// `$rt.name` resolves statically to the intrinsic.
    fn rt_field(&self, obj: &Expr, name: &str) -> Option<IExpr> {
        match &obj.kind {
            ExprKind::Var(x) if x == "$rt" && self.place(x).is_none() => {
                RtFn::by_name(name).map(|f| IExpr::Const(Value::Native(Native::Rt(f))))
            }
            _ => None,
        }
    }
}
