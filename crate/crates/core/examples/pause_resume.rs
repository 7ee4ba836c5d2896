//! Pause an infinite loop from another thread, look around, and resume it.
//! The loop yields to the event loop every few milliseconds of wall time, so
//! the pause request is noticed promptly.

use std::time::Duration;

use stopkit::interp::Clock;
use stopkit::runtime::{Command, Status, Stop};
use stopkit::{CompileOptions, InterpConfig, Session};

const SRC: &str = "let i = 0;\nwhile (true) {\n  i = i + 1;\n  if (i % 200000 == 0) {\n    print(i);\n  }\n}\n";

fn main() {
    let opts = CompileOptions {
        yield_interval_ms: 5.0,
        ..CompileOptions::default()
    };
    let cfg = InterpConfig {
        clock: Clock::Real,
        ..InterpConfig::default()
    };
    let mut s = Session::from_source(SRC, &opts, cfg).unwrap();
    let h = s.handle();
    std::thread::spawn(move || {
        for _ in 0..3 {
            std::thread::sleep(Duration::from_millis(150));
            h.send(Command::Pause);
        }
    });
    s.run();
    for _ in 0..3 {
        // Each turn runs until the next yield; stop once the pause lands.
        while s.run_until_idle(s.turns() + 1) != Stop::Idle {}
        assert_eq!(s.status(), Status::Paused);
        let (loc, reason) = s.paused_at().unwrap();
        println!(
            "paused ({reason:?}) at {}:{} after {} lines of output",
            loc.line,
            loc.column,
            s.outputs().len()
        );
        s.resume();
    }
    s.pause();
    s.run_until_idle(s.turns() + 1_000_000);
    println!("final status {:?}, last output {:?}", s.status(), s.outputs().last());
}
