//! Random terminating MiniScript programs.
//!
//! Functions may only call functions declared before them, loops are
//! bounded by private counters, and `throw` only appears lexically inside a
//! `try` body, so every generated program terminates without an uncaught
//! exception.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
pub struct Features {
    pub functions: bool,
    pub closures: bool,
    pub exceptions: bool,
    pub objects: bool,
    pub arguments: bool,
    /// Records with `valueOf` used as operands.
    pub coercions: bool,
    /// `control(function(k) { return k(x); })` leaves, which behave like
    /// `x`, and a dump of the locals at the end of every function.
    pub captures: bool,
}

impl Features {
    pub fn all() -> Self {
        Features {
            functions: true,
            closures: true,
            exceptions: true,
            objects: true,
            arguments: true,
            coercions: true,
            captures: false,
        }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
    f: Features,
    out: Vec<String>,
    indent: usize,
    vars: Vec<Vec<String>>,
    /// Functions callable from the current point, with their arity.
    funcs: Vec<(String, usize)>,
    next: usize,
    in_try: usize,
    in_fn: bool,
    /// Render capture leaves as `control` calls rather than their value.
    render_control: bool,
}

impl Gen {
    pub fn new(seed: u64, f: Features) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            f,
            out: Vec::new(),
            indent: 0,
            vars: vec![Vec::new()],
            funcs: Vec::new(),
            next: 0,
            in_try: 0,
            in_fn: false,
            render_control: true,
        }
    }

    fn fresh(&mut self, p: &str) -> String {
        self.next += 1;
        format!("{p}{}", self.next)
    }

    fn line(&mut self, s: String) {
        self.out.push(format!("{}{}", "  ".repeat(self.indent), s));
    }

    fn var(&mut self) -> Option<String> {
        let all: Vec<&String> = self.vars.iter().flatten().collect();
        if all.is_empty() {
            None
        } else {
            Some(all[self.rng.random_range(0..all.len())].clone())
        }
    }

    fn num(&mut self) -> String {
        self.rng.random_range(0..20).to_string()
    }

    /// A numeric expression.
    pub fn expr(&mut self, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.random_bool(0.35);
        if leaf && self.f.captures && self.rng.random_bool(0.15) {
            let x = self.var().unwrap_or_else(|| self.num());
            return if self.render_control {
                format!("control(function(k) {{ return k({x}); }})")
            } else {
                x
            };
        }
        if leaf {
            return match self.rng.random_range(0..10) {
                0..=3 => self.num(),
                4 if self.f.coercions => format!(
                    "{{ valueOf: function() {{ return {}; }} }}",
                    self.num()
                ),
                _ => self.var().unwrap_or_else(|| self.num()),
            };
        }
        match self.rng.random_range(0..10) {
            0..=4 => {
                const OPS: [&str; 5] = ["+", "-", "*", "%", "+"];
                let op = OPS[self.rng.random_range(0..OPS.len())];
                let a = self.expr(depth - 1);
                let b = self.expr(depth - 1);
                format!("({a} {op} {b})")
            }
            5 | 6 if !self.funcs.is_empty() => {
                let (name, arity) = self.funcs[self.rng.random_range(0..self.funcs.len())].clone();
                // Surplus arguments are only visible through `arguments`.
                let n = if self.f.arguments && self.rng.random_bool(0.2) {
                    arity + self.rng.random_range(1..3)
                } else {
                    arity
                };
                let args: Vec<String> = (0..n).map(|_| self.expr(depth - 1)).collect();
                format!("{name}({})", args.join(", "))
            }
            7 if self.f.objects => {
                let a = self.expr(depth - 1);
                format!("new Box1({a}).get()")
            }
            8 => {
                let a = self.expr(depth - 1);
                let b = self.expr(depth - 1);
                format!("[{a}, {b}][{}]", self.rng.random_range(0..2))
            }
            _ => {
                let a = self.expr(depth - 1);
                let b = self.expr(depth - 1);
                let op = if self.rng.random_bool(0.5) { "&&" } else { "||" };
                format!("({a} {op} {b})")
            }
        }
    }

    /// A boolean expression.
    pub fn cond(&mut self, depth: u32) -> String {
        if depth > 0 && self.rng.random_bool(0.2) {
            let a = self.cond(depth - 1);
            let b = self.cond(depth - 1);
            let op = if self.rng.random_bool(0.5) { "&&" } else { "||" };
            return format!("({a} {op} {b})");
        }
        const OPS: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];
        let op = OPS[self.rng.random_range(0..OPS.len())];
        let a = self.expr(depth);
        let b = self.expr(depth);
        format!("({a} {op} {b})")
    }

    fn block(&mut self, n: usize, depth: u32) {
        self.indent += 1;
        self.vars.push(Vec::new());
        for _ in 0..n {
            self.stmt(depth);
        }
        self.vars.pop();
        self.indent -= 1;
    }

    fn stmt(&mut self, depth: u32) {
        let choice = if depth == 0 {
            self.rng.random_range(0..4)
        } else {
            self.rng.random_range(0..12)
        };
        match choice {
            0 | 1 => {
                let x = self.fresh("v");
                let e = self.expr(2);
                self.line(format!("let {x} = {e};"));
                self.vars.last_mut().unwrap().push(x);
            }
            2 => match self.var() {
                Some(x) => {
                    let e = self.expr(2);
                    self.line(format!("{x} = {e};"));
                }
                None => self.stmt(0),
            },
            3 if self.rng.random_bool(0.3) => {
                let e = self.cond(1);
                self.line(format!("print({e});"));
            }
            3 => {
                let e = self.expr(2);
                self.line(format!("print(\"n\" + {e});"));
            }
            4 | 5 => {
                let c = self.cond(1);
                self.line(format!("if ({c}) {{"));
                let n = self.rng.random_range(1..3);
                self.block(n, depth - 1);
                if self.rng.random_bool(0.5) {
                    self.line("} else {".into());
                    self.block(1, depth - 1);
                }
                self.line("}".into());
            }
            6 | 7 => {
                let c = self.fresh("c");
                let bound = self.rng.random_range(1..6);
                self.line(format!("let {c} = 0;"));
                self.line(format!("while ({c} < {bound}) {{"));
                self.indent += 1;
                self.line(format!("{c} = {c} + 1;"));
                self.indent -= 1;
                let n = self.rng.random_range(1..3);
                self.block(n, depth - 1);
                self.line("}".into());
            }
            8 if self.f.exceptions => {
                let e = self.fresh("e");
                self.line("try {".into());
                self.in_try += 1;
                self.block(1, depth - 1);
                self.in_try -= 1;
                self.line(format!("}} catch ({e}) {{"));
                self.indent += 1;
                self.line(format!("print(\"caught \" + {e});"));
                self.indent -= 1;
                self.block(1, depth - 1);
                if self.rng.random_bool(0.4) {
                    self.line("} finally {".into());
                    self.block(1, depth - 1);
                }
                self.line("}".into());
            }
            9 if self.in_try > 0 => {
                let e = self.expr(1);
                let c = self.cond(1);
                self.line(format!("if ({c}) {{"));
                self.indent += 1;
                self.line(format!("throw {e};"));
                self.indent -= 1;
                self.line("}".into());
            }
            10 if self.in_fn && self.rng.random_bool(0.3) => {
                let e = self.cond(1);
                self.line(format!("if ({e}) {{"));
                self.indent += 1;
                let r = self.expr(1);
                self.line(format!("return {r};"));
                self.indent -= 1;
                self.line("}".into());
            }
            _ => {
                let e = self.expr(2);
                self.line(format!("print({e});"));
            }
        }
    }

    fn function(&mut self) {
        let name = self.fresh("f");
        let arity = self.rng.random_range(0..3);
        let params: Vec<String> = (0..arity).map(|i| format!("p{i}")).collect();
        self.line(format!("function {name}({}) {{", params.join(", ")));
        self.indent += 1;
        let outer = std::mem::replace(&mut self.vars, vec![params.clone()]);
        let was = std::mem::replace(&mut self.in_fn, true);
        if self.f.arguments && self.rng.random_bool(0.3) {
            self.line("let n = arguments.length;".into());
            self.vars.last_mut().unwrap().push("n".into());
        }
        if self.f.exceptions && self.rng.random_bool(0.25) {
            // Return through a finally block.
            let r = self.expr(1);
            self.line("try {".into());
            self.line(format!("  return {r};"));
            self.line("} finally {".into());
            self.line(format!("  print(\"finally {name}\");"));
            self.line("}".into());
        } else {
            for _ in 0..self.rng.random_range(1..4) {
                self.stmt(2);
            }
            self.dump_locals();
            let r = self.expr(2);
            self.line(format!("return {r};"));
        }
        self.in_fn = was;
        self.vars = outer;
        self.indent -= 1;
        self.line("}".into());
        self.funcs.push((name, arity));
    }

    fn prelude(&mut self) {
        if self.f.objects {
            self.line("function Box1(v) {".into());
            self.line("  this.v = v;".into());
            self.line("  this.get = function() { return this.v; };".into());
            self.line("}".into());
        }
        if self.f.closures {
            self.line("function counter(start) {".into());
            self.line("  let c = start;".into());
            self.line("  return function(d) {".into());
            self.line("    c = c + d;".into());
            self.line("    return c;".into());
            self.line("  };".into());
            self.line("}".into());
            self.line("let tick = counter(0);".into());
            self.funcs.push(("tick".into(), 1));
        }
    }

    pub fn program(mut self) -> String {
        self.prelude();
        if self.f.functions {
            for _ in 0..self.rng.random_range(1..4) {
                self.function();
            }
        }
        for _ in 0..self.rng.random_range(3..8) {
            self.stmt(3);
        }
        self.dump_locals();
        let e = self.expr(2);
        self.line(format!("({e});"));
        let mut src = self.out.join("\n");
        src.push('\n');
        src
    }

    fn dump_locals(&mut self) {
        if self.f.captures {
            let all: Vec<String> = self.vars.iter().flatten().cloned().collect();
            self.line(format!("print(\"locals\", [{}]);", all.join(", ")));
        }
    }
}

pub fn program(seed: u64, f: Features) -> String {
    Gen::new(seed, f).program()
}

/// A program that captures and immediately resumes continuations, and the
/// same program with every capture replaced by the value it resumes with.
pub fn capture_pair(seed: u64) -> (String, String) {
    let f = Features {
        captures: true,
        ..Features::all()
    };
    let with = Gen::new(seed, f).program();
    let mut g = Gen::new(seed, f);
    g.render_control = false;
    (with, g.program())
}
