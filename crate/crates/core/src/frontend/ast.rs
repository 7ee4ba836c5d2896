//! Located abstract syntax for MiniScript.

use std::fmt;

/// A position in the original source text. Lines are 1-based, columns 0-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceLoc {
    pub line: u32,
    pub column: u32,
}

impl SourceLoc {
    pub fn new(line: u32, column: u32) -> Self {
        SourceLoc { line, column }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }

    pub fn is_short_circuit(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    /// Operators that may implicitly coerce a record operand.
    pub fn coerces(self) -> bool {
        !matches!(self, BinOp::And | BinOp::Or | BinOp::Eq | BinOp::Ne)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Str(String),
    Bool(bool),
    Null,
    Var(String),
    This,
    Arguments,
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Ordinary application. `label` is filled in by call-site labeling.
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
        label: Option<u32>,
    },
    New {
        callee: Box<Expr>,
        args: Vec<Expr>,
        label: Option<u32>,
    },
    Function(Box<Function>),
    Record(Vec<(String, Expr)>),
    Array(Vec<Expr>),
    Field(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, loc: SourceLoc) -> Self {
        Expr { kind, loc }
    }

    pub fn var(name: impl Into<String>, loc: SourceLoc) -> Self {
        Expr::new(ExprKind::Var(name.into()), loc)
    }

    pub fn num(n: f64, loc: SourceLoc) -> Self {
        Expr::new(ExprKind::Num(n), loc)
    }

    pub fn str(s: impl Into<String>, loc: SourceLoc) -> Self {
        Expr::new(ExprKind::Str(s.into()), loc)
    }

    pub fn null(loc: SourceLoc) -> Self {
        Expr::new(ExprKind::Null, loc)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        let loc = lhs.loc;
        Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), loc)
    }

    pub fn call(callee: Expr, args: Vec<Expr>, loc: SourceLoc) -> Self {
        Expr::new(
            ExprKind::Call {
                callee: Box::new(callee),
                args,
                label: None,
            },
            loc,
        )
    }

    pub fn field(obj: Expr, name: impl Into<String>) -> Self {
        let loc = obj.loc;
        Expr::new(ExprKind::Field(Box::new(obj), name.into()), loc)
    }

    /// Literals, variables, `this` and `arguments`.
    pub fn is_atomic(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Num(_)
                | ExprKind::Str(_)
                | ExprKind::Bool(_)
                | ExprKind::Null
                | ExprKind::Var(_)
                | ExprKind::This
                | ExprKind::Arguments
        )
    }

    pub fn is_primitive_literal(&self) -> bool {
        matches!(
            self.kind,
            ExprKind::Num(_) | ExprKind::Str(_) | ExprKind::Bool(_) | ExprKind::Null
        )
    }

    pub fn is_application(&self) -> bool {
        matches!(self.kind, ExprKind::Call { .. } | ExprKind::New { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: Option<String>,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: SourceLoc,
    /// True for statements introduced by a compiler pass rather than written
    /// by the user. Only non-synthetic statements count as stepping points.
    pub synthetic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Let(String, Option<Expr>),
    Assign(String, Expr),
    SetField(Expr, String, Expr),
    SetIndex(Expr, Expr, Expr),
    Expr(Expr),
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While(Expr, Vec<Stmt>),
    Return(Option<Expr>),
    Throw(Expr),
    Try {
        body: Vec<Stmt>,
        catch: Option<(String, Vec<Stmt>)>,
        finally: Option<Vec<Stmt>>,
    },
    Function(Function),
    Block(Vec<Stmt>),
}

impl Stmt {
    pub fn new(kind: StmtKind, loc: SourceLoc) -> Self {
        Stmt {
            kind,
            loc,
            synthetic: false,
        }
    }

    pub fn synth(kind: StmtKind, loc: SourceLoc) -> Self {
        Stmt {
            kind,
            loc,
            synthetic: true,
        }
    }
}

/// A whole MiniScript program.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub body: Vec<Stmt>,
    pub source: String,
}

impl Program {
    pub fn new(body: Vec<Stmt>) -> Self {
        Program {
            body,
            source: String::new(),
        }
    }

    /// Copy with every location zeroed and every synthetic flag cleared, for
    /// structural comparison.
    pub fn erased(&self) -> Program {
        let mut p = Program::new(self.body.clone());
        visit::walk_stmts_mut(
            &mut p.body,
            &mut |s| {
                s.loc = SourceLoc::default();
                s.synthetic = false;
                if let StmtKind::Function(f) = &mut s.kind {
                    f.loc = SourceLoc::default();
                }
            },
            &mut |e| {
                e.loc = SourceLoc::default();
                match &mut e.kind {
                    ExprKind::Call { label, .. } | ExprKind::New { label, .. } => *label = None,
                    ExprKind::Function(f) => f.loc = SourceLoc::default(),
                    _ => {}
                }
            },
        );
        p
    }
}

/// Generic mutable traversals.
pub mod visit {
    use super::*;

    /// Visit every statement and expression, including those nested inside
    /// function bodies. Statements are visited before their children;
    /// expressions after theirs.
    pub fn walk_stmts_mut(
        stmts: &mut [Stmt],
        on_stmt: &mut dyn FnMut(&mut Stmt),
        on_expr: &mut dyn FnMut(&mut Expr),
    ) {
        for s in stmts {
            walk_stmt_mut(s, on_stmt, on_expr);
        }
    }

    pub fn walk_stmt_mut(
        s: &mut Stmt,
        on_stmt: &mut dyn FnMut(&mut Stmt),
        on_expr: &mut dyn FnMut(&mut Expr),
    ) {
        on_stmt(s);
        match &mut s.kind {
            StmtKind::Let(_, e) => {
                if let Some(e) = e {
                    walk_expr_mut(e, on_stmt, on_expr);
                }
            }
            StmtKind::Assign(_, e) | StmtKind::Expr(e) | StmtKind::Throw(e) => {
                walk_expr_mut(e, on_stmt, on_expr)
            }
            StmtKind::SetField(o, _, v) => {
                walk_expr_mut(o, on_stmt, on_expr);
                walk_expr_mut(v, on_stmt, on_expr);
            }
            StmtKind::SetIndex(o, i, v) => {
                walk_expr_mut(o, on_stmt, on_expr);
                walk_expr_mut(i, on_stmt, on_expr);
                walk_expr_mut(v, on_stmt, on_expr);
            }
            StmtKind::If(c, a, b) => {
                walk_expr_mut(c, on_stmt, on_expr);
                walk_stmts_mut(a, on_stmt, on_expr);
                walk_stmts_mut(b, on_stmt, on_expr);
            }
            StmtKind::While(c, b) => {
                walk_expr_mut(c, on_stmt, on_expr);
                walk_stmts_mut(b, on_stmt, on_expr);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    walk_expr_mut(e, on_stmt, on_expr);
                }
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                walk_stmts_mut(body, on_stmt, on_expr);
                if let Some((_, c)) = catch {
                    walk_stmts_mut(c, on_stmt, on_expr);
                }
                if let Some(f) = finally {
                    walk_stmts_mut(f, on_stmt, on_expr);
                }
            }
            StmtKind::Function(f) => walk_stmts_mut(&mut f.body, on_stmt, on_expr),
            StmtKind::Block(b) => walk_stmts_mut(b, on_stmt, on_expr),
        }
    }

    pub fn walk_expr_mut(
        e: &mut Expr,
        on_stmt: &mut dyn FnMut(&mut Stmt),
        on_expr: &mut dyn FnMut(&mut Expr),
    ) {
        match &mut e.kind {
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                walk_expr_mut(a, on_stmt, on_expr);
                walk_expr_mut(b, on_stmt, on_expr);
            }
            ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args, .. } => {
                walk_expr_mut(callee, on_stmt, on_expr);
                for a in args {
                    walk_expr_mut(a, on_stmt, on_expr);
                }
            }
            ExprKind::Function(f) => walk_stmts_mut(&mut f.body, on_stmt, on_expr),
            ExprKind::Record(fields) => {
                for (_, v) in fields {
                    walk_expr_mut(v, on_stmt, on_expr);
                }
            }
            ExprKind::Array(items) => {
                for v in items {
                    walk_expr_mut(v, on_stmt, on_expr);
                }
            }
            ExprKind::Field(o, _) => walk_expr_mut(o, on_stmt, on_expr),
            _ => {}
        }
        on_expr(e);
    }

    /// Visit expressions without descending into nested function bodies.
    pub fn exprs_shallow<'a>(stmts: &'a [Stmt], out: &mut dyn FnMut(&'a Expr)) {
        for s in stmts {
            stmt_exprs_shallow(s, out);
        }
    }

    fn stmt_exprs_shallow<'a>(s: &'a Stmt, out: &mut dyn FnMut(&'a Expr)) {
        match &s.kind {
            StmtKind::Let(_, Some(e))
            | StmtKind::Assign(_, e)
            | StmtKind::Expr(e)
            | StmtKind::Throw(e)
            | StmtKind::Return(Some(e)) => expr_shallow(e, out),
            StmtKind::SetField(o, _, v) => {
                expr_shallow(o, out);
                expr_shallow(v, out);
            }
            StmtKind::SetIndex(o, i, v) => {
                expr_shallow(o, out);
                expr_shallow(i, out);
                expr_shallow(v, out);
            }
            StmtKind::If(c, a, b) => {
                expr_shallow(c, out);
                exprs_shallow(a, out);
                exprs_shallow(b, out);
            }
            StmtKind::While(c, b) => {
                expr_shallow(c, out);
                exprs_shallow(b, out);
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                exprs_shallow(body, out);
                if let Some((_, c)) = catch {
                    exprs_shallow(c, out);
                }
                if let Some(f) = finally {
                    exprs_shallow(f, out);
                }
            }
            StmtKind::Block(b) => exprs_shallow(b, out),
            _ => {}
        }
    }

    pub fn expr_shallow<'a>(e: &'a Expr, out: &mut dyn FnMut(&'a Expr)) {
        out(e);
        match &e.kind {
            ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) => {
                expr_shallow(a, out);
                expr_shallow(b, out);
            }
            ExprKind::Call { callee, args, .. } | ExprKind::New { callee, args, .. } => {
                expr_shallow(callee, out);
                for a in args {
                    expr_shallow(a, out);
                }
            }
            ExprKind::Record(fields) => {
                for (_, v) in fields {
                    expr_shallow(v, out);
                }
            }
            ExprKind::Array(items) => {
                for v in items {
                    expr_shallow(v, out);
                }
            }
            ExprKind::Field(o, _) => expr_shallow(o, out),
            _ => {}
        }
    }
}
