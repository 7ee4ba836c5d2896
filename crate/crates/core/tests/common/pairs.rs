//! Hand-written programs that capture and resume continuations.

/// (capturing program, straight-line twin). Locals are printed right after
/// each capture, in several frames.
pub const PAIRS: &[(&str, &str)] = &[
    (
        "function f(a) { let b = a * 2; let c = control(function(k) { return k(b + 1); }); print(a, b, c); return c; } f(4);",
        "function f(a) { let b = a * 2; let c = b + 1; print(a, b, c); return c; } f(4);",
    ),
    (
        "function g(x) { let y = x + 1; let z = control(function(k) { return k(y * 3); }); print(x, y, z); return z; } function f(a) { let b = a; let r = g(b + 1); print(a, b, r); return r + b; } f(2);",
        "function g(x) { let y = x + 1; let z = y * 3; print(x, y, z); return z; } function f(a) { let b = a; let r = g(b + 1); print(a, b, r); return r + b; } f(2);",
    ),
    (
        "let s = 0; let i = 0; while (i < 10) { s = s + control(function(k) { return k(i); }); print(i, s); i = i + 1; } s;",
        "let s = 0; let i = 0; while (i < 10) { s = s + i; print(i, s); i = i + 1; } s;",
    ),
    (
        "function f() { let log = \"\"; try { log = log + \"a\" + control(function(k) { return k(\"b\"); }); } finally { log = log + \"c\"; } print(log); return log; } f();",
        "function f() { let log = \"\"; try { log = log + \"a\" + \"b\"; } finally { log = log + \"c\"; } print(log); return log; } f();",
    ),
    (
        "function f() { try { return control(function(k) { return k(7); }); } finally { print(\"fin\"); } } f() + 1;",
        "function f() { try { return 7; } finally { print(\"fin\"); } } f() + 1;",
    ),
    (
        "let r = 0; try { r = control(function(k) { return k(3); }); throw r + 1; } catch (e) { r = e * 10; } r;",
        "let r = 0; try { r = 3; throw r + 1; } catch (e) { r = e * 10; } r;",
    ),
    (
        "function h(n) { if (n == 0) { return control(function(k) { return k(100); }); } let here = n; let v = h(n - 1); print(here, v); return v + here; } h(6);",
        "function h(n) { if (n == 0) { return 100; } let here = n; let v = h(n - 1); print(here, v); return v + here; } h(6);",
    ),
    (
        "function mk() { let c = 0; return function() { c = c + control(function(k) { return k(1); }); return c; }; } let t = mk(); t(); t(); t();",
        "function mk() { let c = 0; return function() { c = c + 1; return c; }; } let t = mk(); t(); t(); t();",
    ),
    (
        "function P(x) { this.x = x; this.y = control(function(k) { return k(x * x); }); } let p = new P(5); print(p.x, p.y); p.x + p.y;",
        "function P(x) { this.x = x; this.y = x * x; } let p = new P(5); print(p.x, p.y); p.x + p.y;",
    ),
    (
        "function P(x) { this.x = x; } let p = new P(control(function(k) { return k(9); })); p.x;",
        "function P(x) { this.x = x; } let p = new P(9); p.x;",
    ),
    (
        "let o = { n: 2, m: function(d) { let before = this.n; this.n = this.n + control(function(k) { return k(d); }); print(before, this.n); return this.n; } }; o.m(3) + o.m(4);",
        "let o = { n: 2, m: function(d) { let before = this.n; this.n = this.n + d; print(before, this.n); return this.n; } }; o.m(3) + o.m(4);",
    ),
    (
        "let o = { valueOf: function() { return control(function(k) { return k(6); }); } }; o * 7;",
        "let o = { valueOf: function() { return 6; } }; o * 7;",
    ),
    (
        "function sum() { let s = 0; let i = 0; while (i < arguments.length) { let a = arguments[i]; s = s + control(function(k) { return k(a); }); i = i + 1; } return s; } sum(1, 2, 3, 4);",
        "function sum() { let s = 0; let i = 0; while (i < arguments.length) { let a = arguments[i]; s = s + a; i = i + 1; } return s; } sum(1, 2, 3, 4);",
    ),
    (
        "function f(x) { let fs = []; let i = 0; while (i < 3) { let j = i + x; fs[i] = function() { return j; }; i = i + control(function(k) { return k(1); }); } return fs[0]() + fs[1]() + fs[2](); } f(10);",
        "function f(x) { let fs = []; let i = 0; while (i < 3) { let j = i + x; fs[i] = function() { return j; }; i = i + 1; } return fs[0]() + fs[1]() + fs[2](); } f(10);",
    ),
    (
        "function loop(n, acc) { if (n == 0) { return acc; } return loop(n - 1, acc + control(function(k) { return k(n); })); } loop(50, 0);",
        "function loop(n, acc) { if (n == 0) { return acc; } return loop(n - 1, acc + n); } loop(50, 0);",
    ),
    (
        "function f(a) { try { throw a; } catch (e) { let v = control(function(k) { return k(e + 1); }); print(e, v); return v; } } f(41);",
        "function f(a) { try { throw a; } catch (e) { let v = e + 1; print(e, v); return v; } } f(41);",
    ),
    (
        "function f() { let out = []; let i = 0; while (i < 4) { try { if (i == 2) { throw control(function(k) { return k(i * 10); }); } out[i] = i; } catch (e) { out[i] = e; } finally { out[i] = out[i] + 1; } i = i + 1; } return out[0] + out[1] + out[2] + out[3]; } f();",
        "function f() { let out = []; let i = 0; while (i < 4) { try { if (i == 2) { throw i * 10; } out[i] = i; } catch (e) { out[i] = e; } finally { out[i] = out[i] + 1; } i = i + 1; } return out[0] + out[1] + out[2] + out[3]; } f();",
    ),
    (
        "let a = control(function(k) { return k(1); }); let b = control(function(k) { return k(a + 1); }); let c = control(function(k) { return k(a + b); }); print(a, b, c); a * 100 + b * 10 + c;",
        "let a = 1; let b = a + 1; let c = a + b; print(a, b, c); a * 100 + b * 10 + c;",
    ),
];
