//! Line breakpoints and single-stepping.

use stopkit::runtime::Status;
use stopkit::{CompileOptions, InterpConfig, Session};

const SRC: &str = "function fact(n) {
  if (n <= 1) {
    return 1;
  }
  return n * fact(n - 1);
}
let r = fact(4);
print(r);
r;
";

fn session() -> Session {
    Session::from_source(SRC, &CompileOptions::for_debugging(), InterpConfig::default()).unwrap()
}

fn main() {
    // Stop before every execution of line 5.
    let mut s = session();
    s.set_breakpoints(vec![5]);
    s.run();
    loop {
        s.run_until_idle(s.turns() + 10_000);
        if s.status() != Status::Paused {
            break;
        }
        let (loc, reason) = s.paused_at().unwrap();
        println!("{reason:?} at {}:{}", loc.line, loc.column);
        s.resume();
    }
    println!("{:?}, printed {:?}\n", s.status(), s.outputs());

    // Step through the first few statements, then let it finish.
    let mut s = session();
    s.step();
    for _ in 0..6 {
        s.run_until_idle(s.turns() + 10_000);
        let (loc, reason) = s.paused_at().unwrap();
        println!("{reason:?} at {}:{}", loc.line, loc.column);
        s.step();
    }
    s.resume();
    s.run_until_idle(s.turns() + 10_000);
    println!("{:?}, printed {:?}", s.status(), s.outputs());
}
