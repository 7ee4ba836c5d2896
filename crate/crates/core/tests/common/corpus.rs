//! Hand-written control-free programs, one language area each.

pub const CORPUS: &[(&str, &str)] = &[
    ("arith", "let x = 7; let y = 3; print(x * y - x % y); x / y;"),
    ("strings", r#"let s = "a" + 1 + 2; print(s); s + (1 + 2);"#),
    ("compare", "print(1 < 2); print(2 <= 2); print(\"b\" > \"a\"); 3 == 3;"),
    ("logic", "let a = 0 || 5; let b = 1 && null; print(a); b;"),
    (
        "while-sum",
        "let i = 0; let s = 0; while (i < 50) { s = s + i; i = i + 1; } s;",
    ),
    (
        "nested-loops",
        "let t = 0; let i = 0; while (i < 6) { let j = 0; while (j < i) { t = t + j; j = j + 1; } i = i + 1; } t;",
    ),
    (
        "recursion",
        "function fact(n) { if (n <= 1) { return 1; } return n * fact(n - 1); } fact(12);",
    ),
    (
        "mutual",
        "function ev(n) { if (n == 0) { return true; } return od(n - 1); } function od(n) { if (n == 0) { return false; } return ev(n - 1); } print(ev(10)); od(7);",
    ),
    (
        "closure-counter",
        "function mk() { let c = 0; return function() { c = c + 1; return c; }; } let a = mk(); let b = mk(); a(); a(); b(); a() * 10 + b();",
    ),
    (
        "closure-shared",
        "let get = null; let set = null; function init() { let v = 1; get = function() { return v; }; set = function(x) { v = x; }; } init(); set(41); get() + 1;",
    ),
    (
        "boxed-param",
        "function f(x) { let g = function() { x = x + 1; return x; }; g(); g(); return x; } f(5);",
    ),
    (
        "boxed-loop",
        "let fs = []; let i = 0; while (i < 3) { let j = i; fs[i] = function() { return j; }; i = i + 1; } fs[0]() + fs[1]() + fs[2]();",
    ),
    (
        "higher-order",
        "function map(a, f) { let r = []; let i = 0; while (i < a.length) { r[i] = f(a[i]); i = i + 1; } return r; } let r = map([1, 2, 3], function(x) { return x * x; }); r[0] + r[1] + r[2];",
    ),
    (
        "try-catch",
        "let r = 0; try { throw 5; } catch (e) { r = e * 2; } r;",
    ),
    (
        "throw-through-calls",
        "function g(x) { if (x > 2) { throw \"big\"; } return x; } function f(x) { return g(x) + 1; } let out = \"\"; try { out = f(1); out = f(3); } catch (e) { out = out + e; } out;",
    ),
    (
        "rethrow",
        "let log = \"\"; try { try { throw 1; } catch (e) { log = log + \"i\" + e; throw e + 1; } } catch (e) { log = log + \"o\" + e; } log;",
    ),
    (
        "finally-order",
        "let log = \"\"; try { log = log + \"t\"; } finally { log = log + \"f\"; } try { try { throw 1; } finally { log = log + \"g\"; } } catch (e) { log = log + \"c\"; } log;",
    ),
    (
        "finally-return",
        "function f() { try { return 1; } finally { print(\"fin\"); } } f();",
    ),
    (
        "finally-overrides",
        "function f() { try { return 1; } finally { return 2; } } f();",
    ),
    (
        "finally-nested-return",
        "function f(x) { try { try { if (x) { return \"a\"; } } finally { print(\"in\"); } return \"b\"; } finally { print(\"out\"); } } f(true) + f(false);",
    ),
    (
        "finally-in-loop",
        "let n = 0; function f() { let i = 0; while (i < 10) { try { if (i == 3) { return i; } } finally { n = n + 1; } i = i + 1; } return -1; } f() * 100 + n;",
    ),
    (
        "catch-in-callee-loop",
        "function g(i) { if (i % 2 == 0) { throw i; } return i; } let s = 0; let i = 0; while (i < 6) { try { s = s + g(i); } catch (e) { s = s - e; } i = i + 1; } s;",
    ),
    (
        "ctor",
        "function P(x, y) { this.x = x; this.y = y; } let p = new P(3, 4); p.x * p.y;",
    ),
    (
        "ctor-returns-object",
        "function Q() { this.a = 1; return { a: 2 }; } function R() { this.a = 3; return 7; } new Q().a * 10 + new R().a;",
    ),
    (
        "ctor-methods",
        "function Acc() { this.t = 0; this.add = function(n) { this.t = this.t + n; return this; }; } let a = new Acc(); a.add(2).add(3).t;",
    ),
    (
        "ctor-nested",
        "function In(v) { this.v = v; } function Out(v) { this.inner = new In(v + 1); } new Out(1).inner.v;",
    ),
    (
        "varargs",
        "function sum() { let s = 0; let i = 0; while (i < arguments.length) { s = s + arguments[i]; i = i + 1; } return s; } sum(1, 2, 3) + sum() + sum(10);",
    ),
    (
        "mixed-args",
        "function f(a, b) { if (arguments.length < 2) { return a; } return a + b + arguments.length; } f(1) * 100 + f(1, 2) + f(1, 2, 3);",
    ),
    (
        "missing-args",
        "function f(a, b, c) { return c; } print(f(1)); f(1, 2, 3, 4);",
    ),
    (
        "valueof-arith",
        "let o = { valueOf: function() { return 6; } }; o * 7;",
    ),
    (
        "valueof-plus",
        "let o = { valueOf: function() { return 1; } }; let s = \"x\" + o; print(s); o + o;",
    ),
    (
        "tostring-plus",
        "let o = { toString: function() { return \"T\"; } }; \"<\" + o + \">\";",
    ),
    (
        "valueof-compare",
        "let a = { valueOf: function() { return 2; } }; let b = { valueOf: function() { return 3; } }; print(a < b); b - a;",
    ),
    (
        "valueof-side-effects",
        "let n = 0; let o = { valueOf: function() { n = n + 1; return n; } }; let r = o * 10 + o; print(n); r;",
    ),
    (
        "null-coercion",
        "let x = null; print(x + 1); print(\"a\" + x); x == null;",
    ),
    (
        "arrays",
        "let a = [1, [2, 3]]; a[2] = 4; print(a.length); a[1][0] + a[2];",
    ),
    (
        "records",
        "let r = { a: 1, b: { c: 2 } }; r.b.c = r.a + 10; r.b.c;",
    ),
    (
        "method-this",
        "let o = { v: 4, m: function(x) { return this.v * x; } }; o.m(5);",
    ),
    (
        "tail-loop",
        "function go(n, acc) { if (n == 0) { return acc; } return go(n - 1, acc + n); } go(3000, 0);",
    ),
    (
        "tail-method",
        "let o = { n: 0, step: function(k) { if (k == 0) { return this.n; } this.n = this.n + 1; return this.step(k - 1); } }; o.step(2000);",
    ),
    (
        "print-many",
        "let i = 0; while (i < 5) { print(i * i); i = i + 1; } null;",
    ),
    (
        "if-chain",
        "function cls(n) { if (n < 0) { return \"neg\"; } else { if (n == 0) { return \"zero\"; } } return \"pos\"; } cls(-1) + cls(0) + cls(2);",
    ),
    (
        "fib",
        "function fib(n) { if (n < 2) { return n; } return fib(n - 1) + fib(n - 2); } fib(15);",
    ),
    (
        "type-error",
        "let x = 1; x();",
    ),
    (
        "uncaught",
        "function f() { throw \"boom\"; } print(1); f();",
    ),
    (
        "reference-error",
        "let a = 1; a + nope;",
    ),
    (
        "loop-closure-sum",
        "let t = 0; let add = function(x) { t = t + x; }; let i = 0; while (i < 100) { add(i); i = i + 1; } t;",
    ),
    (
        "string-length",
        "let s = \"hello\"; s.length + \"!\".length;",
    ),
    (
        "nested-functions",
        "function a(x) { function b(y) { function c(z) { return x + y + z; } return c(3); } return b(2); } a(1);",
    ),
    (
        "func-in-record",
        "let ops = { add: function(a, b) { return a + b; }, mul: function(a, b) { return a * b; } }; ops.mul(ops.add(1, 2), 4);",
    ),
    (
        "exception-value-object",
        "let r = null; try { throw { code: 7 }; } catch (e) { r = e.code; } r;",
    ),
    (
        "while-break-by-flag",
        "let go = true; let n = 0; while (go) { n = n + 1; if (n >= 9) { go = false; } } n;",
    ),
];

/// Corpus entries that read `arguments` and so fail to compile in strict
/// arity mode.
pub fn uses_arguments(src: &str) -> bool {
    src.contains("arguments")
}
