//! Slowdown of instrumented code over plain code, in evaluation steps, for
//! the sample programs under a few strategy combinations.

use std::path::Path;

use stopkit::bench::{load_dir, run_bench, Sweep};
use stopkit::instrument::Implicits;
use stopkit::runtime::Strategy;
use stopkit::InterpConfig;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("programs");
    let programs: Vec<_> = load_dir(&dir)
        .unwrap()
        .into_iter()
        .filter(|(n, _)| ["arith", "fib", "objects", "nested-calls"].contains(&n.as_str()))
        .collect();
    let sweep = Sweep {
        conts: vec![Strategy::Checked, Strategy::Exceptional, Strategy::Eager],
        implicits: vec![Implicits::True, Implicits::False],
        ..Sweep::default()
    };
    let report = run_bench(&programs, &sweep, &InterpConfig::default(), 1_000_000);
    print!("{}", report.to_csv());
}
