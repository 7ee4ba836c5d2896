use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;

const KEYWORDS: &[&str] = &[
    "let", "function", "return", "if", "else", "while", "throw", "try", "catch", "finally",
    "new", "true", "false", "null", "this", "arguments",
];

/// Parse user source. Identifiers starting with `$` are rejected.
pub fn parse(text: &str) -> Result<Program, SyntaxError> {
    parse_with(text, false)
}

/// Parse text that may contain compiler-reserved `$` names (ANF and
/// instrumented output).
pub fn parse_generated(text: &str) -> Result<Program, SyntaxError> {
    parse_with(text, true)
}

fn parse_with(text: &str, allow_reserved: bool) -> Result<Program, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        allow_reserved,
        fn_depth: 0,
    };
    let mut body = Vec::new();
    while !p.at_eof() {
        body.push(p.statement()?);
    }
    Ok(Program {
        body,
        source: text.to_string(),
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    allow_reserved: bool,
    fn_depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn loc(&self) -> SourceLoc {
        self.tokens[self.pos].loc
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Num(n) => format!("number {n}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expected(&self, what: &str) -> SyntaxError {
        SyntaxError::new(
            self.loc(),
            format!("expected {what}, found {}", self.describe()),
        )
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{p}`")))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                if name.starts_with('$') && !self.allow_reserved {
                    return Err(SyntaxError::new(
                        self.loc(),
                        format!("identifier `{name}` uses the reserved `$` prefix"),
                    ));
                }
                self.advance();
                Ok(name)
            }
            _ => Err(self.expected("identifier")),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if self.at_eof() {
                return Err(self.expected("`}`"));
            }
            out.push(self.statement()?);
        }
        self.advance();
        Ok(out)
    }

    /// A braced block or a single statement.
    fn body(&mut self) -> Result<Vec<Stmt>, SyntaxError> {
        if self.is_punct("{") {
            self.block()
        } else {
            Ok(vec![self.statement()?])
        }
    }

    fn statement(&mut self) -> Result<Stmt, SyntaxError> {
        let loc = self.loc();
        if self.eat_kw("let") {
            let name = self.ident()?;
            let init = if self.eat_punct("=") {
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_punct(";")?;
            return Ok(Stmt::new(StmtKind::Let(name, init), loc));
        }
        if self.is_kw("function") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.advance();
            let f = self.function_rest(loc, true)?;
            return Ok(Stmt::new(StmtKind::Function(f), loc));
        }
        if self.eat_kw("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then = self.body()?;
            let els = if self.eat_kw("else") {
                self.body()?
            } else {
                Vec::new()
            };
            return Ok(Stmt::new(StmtKind::If(cond, then, els), loc));
        }
        if self.eat_kw("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.body()?;
            return Ok(Stmt::new(StmtKind::While(cond, body), loc));
        }
        if self.eat_kw("return") {
            if self.fn_depth == 0 {
                return Err(SyntaxError::new(loc, "`return` outside of a function"));
            }
            let value = if self.is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_punct(";")?;
            return Ok(Stmt::new(StmtKind::Return(value), loc));
        }
        if self.eat_kw("throw") {
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Stmt::new(StmtKind::Throw(value), loc));
        }
        if self.eat_kw("try") {
            let body = self.block()?;
            let catch = if self.eat_kw("catch") {
                self.expect_punct("(")?;
                let name = self.ident()?;
                self.expect_punct(")")?;
                Some((name, self.block()?))
            } else {
                None
            };
            let finally = if self.eat_kw("finally") {
                Some(self.block()?)
            } else {
                None
            };
            if catch.is_none() && finally.is_none() {
                return Err(self.expected("`catch` or `finally`"));
            }
            return Ok(Stmt::new(
                StmtKind::Try {
                    body,
                    catch,
                    finally,
                },
                loc,
            ));
        }
        if self.is_punct("{") {
            let body = self.block()?;
            return Ok(Stmt::new(StmtKind::Block(body), loc));
        }

        let target = self.expr()?;
        if self.eat_punct("=") {
            let value = self.expr()?;
            self.expect_punct(";")?;
            let kind = match target.kind {
                ExprKind::Var(name) => StmtKind::Assign(name, value),
                ExprKind::Field(obj, name) => StmtKind::SetField(*obj, name, value),
                ExprKind::Index(obj, idx) => StmtKind::SetIndex(*obj, *idx, value),
                _ => return Err(SyntaxError::new(loc, "invalid assignment target")),
            };
            return Ok(Stmt::new(kind, loc));
        }
        self.expect_punct(";")?;
        Ok(Stmt::new(StmtKind::Expr(target), loc))
    }

    /// After `function`: optional name, parameters and body.
    fn function_rest(&mut self, loc: SourceLoc, named: bool) -> Result<Function, SyntaxError> {
        let name = if named || matches!(self.peek(), Tok::Ident(_)) {
            Some(self.ident()?)
        } else {
            None
        };
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            loop {
                params.push(self.ident()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        self.fn_depth += 1;
        let body = self.block();
        self.fn_depth -= 1;
        let body = body?;
        Ok(Function {
            name,
            params,
            body,
            loc,
        })
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(1)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        Some(match *p {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Mod,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "&&" => BinOp::And,
            "||" => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.postfix()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect_punct("(")?;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        Ok(args)
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.primary()?;
        loop {
            let loc = self.loc();
            if self.is_punct("(") {
                let args = self.args()?;
                e = Expr::new(
                    ExprKind::Call {
                        callee: Box::new(e),
                        args,
                        label: None,
                    },
                    loc,
                );
            } else if !self.member_suffix(&mut e)? {
                break;
            }
        }
        Ok(e)
    }

    /// Parses one `.name` or `[index]` suffix if present.
    fn member_suffix(&mut self, e: &mut Expr) -> Result<bool, SyntaxError> {
        let loc = self.loc();
        if self.eat_punct(".") {
            let name = match self.peek().clone() {
                Tok::Ident(n) => {
                    self.advance();
                    n
                }
                _ => return Err(self.expected("field name")),
            };
            let obj = std::mem::replace(e, Expr::null(loc));
            *e = Expr::new(ExprKind::Field(Box::new(obj), name), loc);
            return Ok(true);
        }
        if self.eat_punct("[") {
            let idx = self.expr()?;
            self.expect_punct("]")?;
            let obj = std::mem::replace(e, Expr::null(loc));
            *e = Expr::new(ExprKind::Index(Box::new(obj), Box::new(idx)), loc);
            return Ok(true);
        }
        Ok(false)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.advance();
                Ok(Expr::num(n, loc))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::str(s, loc))
            }
            Tok::Punct("-") => {
                self.advance();
                match self.peek().clone() {
                    Tok::Num(n) => {
                        self.advance();
                        Ok(Expr::num(-n, loc))
                    }
                    _ => Err(self.expected("number after `-`")),
                }
            }
            Tok::Punct("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("[") => {
                self.advance();
                let mut items = Vec::new();
                if !self.is_punct("]") {
                    loop {
                        items.push(self.expr()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct("]")?;
                Ok(Expr::new(ExprKind::Array(items), loc))
            }
            Tok::Punct("{") => {
                self.advance();
                let mut fields = Vec::new();
                if !self.is_punct("}") {
                    loop {
                        let key = match self.peek().clone() {
                            Tok::Ident(k) => k,
                            Tok::Str(k) => k,
                            _ => return Err(self.expected("field name")),
                        };
                        self.advance();
                        self.expect_punct(":")?;
                        let value = self.expr()?;
                        fields.push((key, value));
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                }
                self.expect_punct("}")?;
                Ok(Expr::new(ExprKind::Record(fields), loc))
            }
            Tok::Ident(word) => match word.as_str() {
                "true" | "false" => {
                    self.advance();
                    Ok(Expr::new(ExprKind::Bool(word == "true"), loc))
                }
                "null" => {
                    self.advance();
                    Ok(Expr::null(loc))
                }
                "this" => {
                    self.advance();
                    Ok(Expr::new(ExprKind::This, loc))
                }
                "arguments" => {
                    self.advance();
                    Ok(Expr::new(ExprKind::Arguments, loc))
                }
                "function" => {
                    self.advance();
                    let f = self.function_rest(loc, false)?;
                    Ok(Expr::new(ExprKind::Function(Box::new(f)), loc))
                }
                "new" => {
                    self.advance();
                    let mut callee = self.primary()?;
                    while self.member_suffix(&mut callee)? {}
                    let args = self.args()?;
                    Ok(Expr::new(
                        ExprKind::New {
                            callee: Box::new(callee),
                            args,
                            label: None,
                        },
                        loc,
                    ))
                }
                _ => {
                    let name = self.ident()?;
                    Ok(Expr::var(name, loc))
                }
            },
            _ => Err(self.expected("expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_let() {
        let p = parse("let x = 1;").unwrap();
        assert_eq!(p.body.len(), 1);
        match &p.body[0].kind {
            StmtKind::Let(name, Some(e)) => {
                assert_eq!(name, "x");
                assert_eq!(e.kind, ExprKind::Num(1.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn control_example_shape() {
        let p = parse("10 + control(function(k){ return 0; });").unwrap();
        let StmtKind::Expr(e) = &p.body[0].kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::Add, lhs, rhs) = &e.kind else {
            panic!("expected +")
        };
        assert_eq!(lhs.kind, ExprKind::Num(10.0));
        let ExprKind::Call { callee, args, label } = &rhs.kind else {
            panic!("expected call")
        };
        assert_eq!(callee.kind, ExprKind::Var("control".into()));
        assert_eq!(*label, None);
        assert_eq!(args.len(), 1);
        assert!(matches!(args[0].kind, ExprKind::Function(_)));
    }

    #[test]
    fn malformed_let_reports_line() {
        let err = parse("let = ;").unwrap_err();
        assert_eq!(err.loc.line, 1);
        assert!(err.message.contains("expected identifier"), "{}", err.message);
    }

    #[test]
    fn precedence_and_postfix() {
        let p = parse("a.b[c](1) * 2 + 3 < 4 && x || y;").unwrap();
        let StmtKind::Expr(e) = &p.body[0].kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::Or, l, _) = &e.kind else {
            panic!()
        };
        let ExprKind::Binary(BinOp::And, l, _) = &l.kind else {
            panic!()
        };
        assert!(matches!(l.kind, ExprKind::Binary(BinOp::Lt, _, _)));
    }

    #[test]
    fn top_level_return_rejected() {
        assert!(parse("return 1;").is_err());
        assert!(parse("function f() { return 1; }").is_ok());
    }

    #[test]
    fn reserved_prefix_rejected_in_user_code() {
        assert!(parse("let $t0 = 1;").is_err());
        assert!(parse_generated("let $t0 = 1;").is_ok());
    }

    #[test]
    fn new_and_try_forms() {
        let p = parse("let o = new a.B(1, 2); try { f(); } catch (e) { g(e); } finally { h(); }")
            .unwrap();
        assert!(matches!(
            &p.body[0].kind,
            StmtKind::Let(_, Some(Expr { kind: ExprKind::New { .. }, .. }))
        ));
        assert!(matches!(&p.body[1].kind, StmtKind::Try { catch: Some(_), finally: Some(_), .. }));
        assert!(parse("try { f(); }").is_err());
    }

    #[test]
    fn statement_locations() {
        let p = parse("let a = 1;\n\nif (a) {\n  a = 2;\n}").unwrap();
        assert_eq!(p.body[0].loc, SourceLoc::new(1, 0));
        assert_eq!(p.body[1].loc, SourceLoc::new(3, 0));
        let StmtKind::If(_, then, _) = &p.body[1].kind else {
            panic!()
        };
        assert_eq!(then[0].loc, SourceLoc::new(4, 2));
    }
}
