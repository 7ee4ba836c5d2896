//! First-class continuations through `control`. Applying `k` abandons the
//! handler and resumes the captured computation with the given value.

use stopkit::{CompileOptions, InterpConfig, Session};

fn run(src: &str) -> String {
    let mut s = Session::from_source(src, &CompileOptions::default(), InterpConfig::default())
        .expect("compiles");
    s.run_to_end(1_000_000);
    let o = s.outcome();
    format!("{:?} {:?}", o.outputs, o.result.map(|v| v.to_string()))
}

fn main() {
    // The continuation is dropped: the pending `1 + _` never happens.
    println!("abort:  {}", run("1 + control(function(k) { return 0; });"));
    // The inner k(2) already finishes the program: neither the outer k nor
    // the `+ 5` runs.
    println!("resume: {}", run("1 + control(function(k) { return k(k(2)) + 5; });"));
    // A generator-like producer that hands values to its consumer.
    let src = r#"
let sum = 0;
function each(n, f) { let i = 0; while (i < n) { f(i); i = i + 1; } }
each(4, function(x) {
  sum = sum + control(function(k) { print("yield", x); return k(x * x); });
});
sum;
"#;
    println!("yields: {}", run(src));
}
