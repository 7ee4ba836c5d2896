//! Show what the compiler produces for a small function: its A-normal form
//! and the instrumented program for two continuation strategies.

use stopkit::instrument::{compile, CompileOptions};
use stopkit::runtime::Strategy;

const SRC: &str = "function sq(x) { return x * x; }\nprint(sq(3) + 1);\n";

fn main() {
    let c = compile(SRC, &CompileOptions::default()).unwrap();
    println!("--- A-normal form ---\n{}", c.anf_text());
    println!("--- checked ---\n{}", c.text());
    let eager = CompileOptions {
        cont: Strategy::Eager,
        ..CompileOptions::default()
    };
    println!("--- eager ---\n{}", compile(SRC, &eager).unwrap().text());
}
