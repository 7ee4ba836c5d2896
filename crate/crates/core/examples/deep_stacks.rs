//! Recursion far deeper than the host stack allows. With deep stacks the
//! runtime captures the stack every few hundred frames and continues on a
//! fresh host stack.

use stopkit::instrument::Stacks;
use stopkit::{CompileOptions, InterpConfig, Session};

const SRC: &str = "function depth(n) { if (n == 0) { return 0; } return 1 + depth(n - 1); }\ndepth(50000);\n";

fn main() {
    let cfg = InterpConfig::default().with_stack_limit(1000);
    for stacks in [Stacks::Normal, Stacks::Deep] {
        let opts = CompileOptions {
            stacks,
            stack_depth_limit: 500,
            ..CompileOptions::default()
        };
        let mut s = Session::from_source(SRC, &opts, cfg.clone()).unwrap();
        s.run_to_end(10_000_000);
        let o = s.outcome();
        println!(
            "{stacks:?}: {:?}, host depth {}, {} stack captures",
            o.result.map(|v| v.to_string()).map_err(|e| e.to_string()),
            o.metrics.max_host_depth,
            s.deep_captures()
        );
    }
}
