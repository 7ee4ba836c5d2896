//! The three ways of deciding when to yield, on two loops whose iterations
//! differ in cost. Time is virtual: one microsecond per evaluation step.

use stopkit::runtime::TimerKind;
use stopkit::{CompileOptions, InterpConfig, Session};

fn main() {
    let cheap = "let i = 0; while (i < 60000) { i = i + 1; } i;".to_string();
    let body = "s = (s * 31 + i * 7 - i % 13) % 1000003; ".repeat(8);
    let dear = format!("let i = 0; let s = 0; while (i < 12000) {{ {body} i = i + 1; }} s;");
    for timer in [TimerKind::Exact, TimerKind::Approx, TimerKind::Countdown] {
        for (name, src) in [("cheap", &cheap), ("dear", &dear)] {
            let opts = CompileOptions {
                timer,
                yield_interval_ms: 100.0,
                ..CompileOptions::default()
            };
            let mut s = Session::from_source(src, &opts, InterpConfig::default()).unwrap();
            s.run_to_end(10_000_000);
            let m = s.metrics();
            println!(
                "{timer:?} {name:5} yields {:4}  mean {:8.1} ms  std {:6.1} ms",
                m.yield_count,
                m.interval_mean(),
                m.interval_std()
            );
        }
    }
}
