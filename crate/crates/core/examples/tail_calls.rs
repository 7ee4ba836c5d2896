//! A million tail calls in constant host stack, with and without proper
//! tail calls in the host. Without them, instrumented code bounces each tail
//! call back to its caller.

use stopkit::interp::eval_program;
use stopkit::{parse, CompileOptions, InterpConfig, Session};

const SRC: &str = "function loop(n, acc) { if (n == 0) { return acc; } return loop(n - 1, acc + 1); }\nloop(1000000, 0);\n";

fn main() {
    let no_ptc = InterpConfig {
        proper_tail_calls: false,
        ..InterpConfig::default()
    };
    let plain = eval_program(&parse(SRC).unwrap(), &no_ptc);
    println!("plain, no host tail calls: {:?}", plain.result.map_err(|e| e.to_string()));

    for (label, trampoline, cfg) in [
        ("instrumented", false, InterpConfig::default()),
        ("trampolined, no host tail calls", true, no_ptc),
    ] {
        let opts = CompileOptions {
            trampoline,
            ..CompileOptions::default()
        };
        let mut s = Session::from_source(SRC, &opts, cfg).unwrap();
        s.run_to_end(10_000_000);
        let o = s.outcome();
        println!(
            "{label}: {} at host depth {}",
            o.result.unwrap(),
            o.metrics.max_host_depth
        );
    }
}
