use super::ast::*;

/// Render a program as MiniScript source text.
pub fn print(p: &Program) -> String {
    let mut out = Printer::default();
    for s in &p.body {
        out.stmt(s);
    }
    out.buf
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = Printer::default();
    out.expr(e, 0);
    out.buf
}

pub fn format_number(n: f64) -> String {
    if n.is_nan() {
        "NaN".to_string()
    } else if n.is_infinite() {
        if n > 0.0 { "Infinity" } else { "-Infinity" }.to_string()
    } else if n == n.trunc() && n.abs() < 1e15 {
        format!("{}", n as i64)
    } else {
        format!("{n}")
    }
}

pub fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            '\r' => q.push_str("\\r"),
            '\0' => q.push_str("\\0"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

#[derive(Default)]
struct Printer {
    buf: String,
    indent: usize,
}

impl Printer {
    fn line_start(&mut self) {
        for _ in 0..self.indent {
            self.buf.push_str("  ");
        }
    }

    fn block(&mut self, stmts: &[Stmt]) {
        self.buf.push_str("{\n");
        self.indent += 1;
        for s in stmts {
            self.stmt(s);
        }
        self.indent -= 1;
        self.line_start();
        self.buf.push('}');
    }

    fn stmt(&mut self, s: &Stmt) {
        self.line_start();
        self.stmt_inline(s);
        self.buf.push('\n');
    }

    fn stmt_inline(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Let(name, init) => {
                self.buf.push_str("let ");
                self.buf.push_str(name);
                if let Some(e) = init {
                    self.buf.push_str(" = ");
                    self.expr(e, 0);
                }
                self.buf.push(';');
            }
            StmtKind::Assign(name, e) => {
                self.buf.push_str(name);
                self.buf.push_str(" = ");
                self.expr(e, 0);
                self.buf.push(';');
            }
            StmtKind::SetField(o, name, v) => {
                self.expr(o, POSTFIX);
                self.buf.push('.');
                self.buf.push_str(name);
                self.buf.push_str(" = ");
                self.expr(v, 0);
                self.buf.push(';');
            }
            StmtKind::SetIndex(o, i, v) => {
                self.expr(o, POSTFIX);
                self.buf.push('[');
                self.expr(i, 0);
                self.buf.push_str("] = ");
                self.expr(v, 0);
                self.buf.push(';');
            }
            StmtKind::Expr(e) => {
                if needs_stmt_parens(e) {
                    self.buf.push('(');
                    self.expr(e, 0);
                    self.buf.push(')');
                } else {
                    self.expr(e, 0);
                }
                self.buf.push(';');
            }
            StmtKind::If(c, then, els) => {
                self.buf.push_str("if (");
                self.expr(c, 0);
                self.buf.push_str(") ");
                self.block(then);
                if !els.is_empty() {
                    self.buf.push_str(" else ");
                    if let [single] = els.as_slice() {
                        if matches!(single.kind, StmtKind::If(..)) {
                            self.stmt_inline(single);
                            return;
                        }
                    }
                    self.block(els);
                }
            }
            StmtKind::While(c, body) => {
                self.buf.push_str("while (");
                self.expr(c, 0);
                self.buf.push_str(") ");
                self.block(body);
            }
            StmtKind::Return(e) => {
                self.buf.push_str("return");
                if let Some(e) = e {
                    self.buf.push(' ');
                    self.expr(e, 0);
                }
                self.buf.push(';');
            }
            StmtKind::Throw(e) => {
                self.buf.push_str("throw ");
                self.expr(e, 0);
                self.buf.push(';');
            }
            StmtKind::Try {
                body,
                catch,
                finally,
            } => {
                self.buf.push_str("try ");
                self.block(body);
                if let Some((name, c)) = catch {
                    self.buf.push_str(" catch (");
                    self.buf.push_str(name);
                    self.buf.push_str(") ");
                    self.block(c);
                }
                if let Some(f) = finally {
                    self.buf.push_str(" finally ");
                    self.block(f);
                }
            }
            StmtKind::Function(f) => self.function(f),
            StmtKind::Block(b) => self.block(b),
        }
    }

    fn function(&mut self, f: &Function) {
        self.buf.push_str("function");
        if let Some(n) = &f.name {
            self.buf.push(' ');
            self.buf.push_str(n);
        }
        self.buf.push('(');
        self.buf.push_str(&f.params.join(", "));
        self.buf.push_str(") ");
        self.block(&f.body);
    }

    fn list(&mut self, items: &[Expr]) {
        for (i, a) in items.iter().enumerate() {
            if i > 0 {
                self.buf.push_str(", ");
            }
            self.expr(a, 0);
        }
    }

    /// Print `e`, parenthesised if its precedence is below `ctx`.
    fn expr(&mut self, e: &Expr, ctx: u8) {
        let prec = expr_precedence(e);
        let paren = prec < ctx;
        if paren {
            self.buf.push('(');
        }
        match &e.kind {
            ExprKind::Num(n) => {
                if *n < 0.0 || (*n == 0.0 && n.is_sign_negative()) || !n.is_finite() {
                    self.buf.push_str(&number_expr(*n));
                } else {
                    self.buf.push_str(&format_number(*n));
                }
            }
            ExprKind::Str(s) => self.buf.push_str(&quote(s)),
            ExprKind::Bool(b) => self.buf.push_str(if *b { "true" } else { "false" }),
            ExprKind::Null => self.buf.push_str("null"),
            ExprKind::Var(n) => self.buf.push_str(n),
            ExprKind::This => self.buf.push_str("this"),
            ExprKind::Arguments => self.buf.push_str("arguments"),
            ExprKind::Binary(op, l, r) => {
                let p = op.precedence();
                self.expr(l, p);
                self.buf.push(' ');
                self.buf.push_str(op.symbol());
                self.buf.push(' ');
                self.expr(r, p + 1);
            }
            ExprKind::Call { callee, args, .. } => {
                self.expr(callee, POSTFIX);
                self.buf.push('(');
                self.list(args);
                self.buf.push(')');
            }
            ExprKind::New { callee, args, .. } => {
                self.buf.push_str("new ");
                if matches!(callee.kind, ExprKind::Field(..) | ExprKind::Index(..))
                    || callee.is_atomic()
                {
                    self.expr(callee, POSTFIX);
                } else {
                    self.buf.push('(');
                    self.expr(callee, 0);
                    self.buf.push(')');
                }
                self.buf.push('(');
                self.list(args);
                self.buf.push(')');
            }
            ExprKind::Function(f) => self.function(f),
            ExprKind::Record(fields) => {
                self.buf.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        self.buf.push_str(", ");
                    }
                    if is_plain_ident(k) {
                        self.buf.push_str(k);
                    } else {
                        self.buf.push_str(&quote(k));
                    }
                    self.buf.push_str(": ");
                    self.expr(v, 0);
                }
                self.buf.push('}');
            }
            ExprKind::Array(items) => {
                self.buf.push('[');
                self.list(items);
                self.buf.push(']');
            }
            ExprKind::Field(o, name) => {
                self.expr(o, POSTFIX);
                self.buf.push('.');
                self.buf.push_str(name);
            }
            ExprKind::Index(o, i) => {
                self.expr(o, POSTFIX);
                self.buf.push('[');
                self.expr(i, 0);
                self.buf.push(']');
            }
        }
        if paren {
            self.buf.push(')');
        }
    }
}

const POSTFIX: u8 = 10;
const ATOM: u8 = 11;

fn expr_precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Function(_) => 0,
        ExprKind::Num(n) if *n < 0.0 || !n.is_finite() || (*n == 0.0 && n.is_sign_negative()) => {
            5
        }
        ExprKind::Call { .. } | ExprKind::Field(..) | ExprKind::Index(..) => POSTFIX,
        ExprKind::New { .. } => POSTFIX - 1,
        _ => ATOM,
    }
}

/// Negative and non-finite numbers have no atomic literal form.
fn number_expr(n: f64) -> String {
    if n.is_nan() {
        "0 / 0".to_string()
    } else if n.is_infinite() {
        if n > 0.0 { "1 / 0" } else { "-1 / 0" }.to_string()
    } else if n == 0.0 {
        "0 - 0".to_string()
    } else {
        format!("-{}", format_number(-n))
    }
}

fn is_plain_ident(k: &str) -> bool {
    let mut chars = k.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_' || c == '$')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

fn leftmost(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Binary(_, l, _) => leftmost(l),
        ExprKind::Call { callee, .. } => leftmost(callee),
        ExprKind::Field(o, _) | ExprKind::Index(o, _) => leftmost(o),
        _ => e,
    }
}

fn needs_stmt_parens(e: &Expr) -> bool {
    matches!(
        &leftmost(e).kind,
        ExprKind::Record(_) | ExprKind::Function(_)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_generated};

    fn round_trip(src: &str) {
        let p = parse(src).unwrap();
        let text = print(&p);
        let q = parse_generated(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(p.erased(), q.erased(), "{text}");
    }

    #[test]
    fn empty_program_prints_empty() {
        assert_eq!(print(&parse("").unwrap()), "");
    }

    #[test]
    fn let_round_trips() {
        round_trip("let x = 1;");
    }

    #[test]
    fn assorted_round_trips() {
        round_trip("let f = function(a, b) { return a - (b - 1) * 2; };");
        round_trip("({a: 1, \"b c\": [1, -2, \"q\\n\"]}).a;");
        round_trip("if (a) { b = 1; } else if (c) { d = 2; } else { e = 3; }");
        round_trip("(function() { return 1; })();");
        round_trip("let o = new (f(1))(2); let p = new a.b.C();");
        round_trip("try { x = 1; } catch (e) { throw e; } finally { y = 2; }");
        round_trip("while (i < 10) { i = i + 1; a[i] = i % 3; o.f = a[i]; }");
        round_trip("x = a - (b + c); y = (a || b) && c;");
    }
}
