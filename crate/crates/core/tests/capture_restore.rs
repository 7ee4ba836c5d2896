//! Capturing a continuation and resuming it must not disturb the
//! computation: every program here behaves like its straight-line twin.

mod common;

use common::gen::capture_pair;
use common::pairs::PAIRS;
use common::*;
use stopkit::instrument::{CompileOptions, Stacks};
use stopkit::interp::InterpConfig;
use stopkit::runtime::{Status, Stop};

fn check(name: &str, with: &str, without: &str, opts: &CompileOptions) {
    let want = plain(without, &InterpConfig::default()).observable();
    assert!(want.0.is_ok(), "{name}: reference failed: {:?}\n{without}", want.0);
    let got = instrumented(with, opts, &InterpConfig::default()).observable();
    assert_eq!(got, want, "{name} under {}\n{with}", opts.fingerprint());
}

fn generated() -> Vec<(String, String, String)> {
    (0..25)
        .map(|i| {
            let (w, wo) = capture_pair(seed() + 1000 + i);
            (format!("gen-{i}"), w, wo)
        })
        .collect()
}

#[test]
fn handwritten_pairs() {
    for (i, (with, without)) in PAIRS.iter().enumerate() {
        for opts in six_configs() {
            check(&format!("pair-{i}"), with, without, &opts);
        }
    }
}

#[test]
fn generated_pairs() {
    for (name, with, without) in generated() {
        assert!(with.contains("control("), "{name} never captures");
        for opts in six_configs() {
            check(&name, &with, &without, &opts);
        }
    }
}

#[test]
fn pairs_with_deep_stacks_and_frequent_yields() {
    for (i, (with, without)) in PAIRS.iter().enumerate() {
        for base in six_configs() {
            let opts = CompileOptions {
                stacks: Stacks::Deep,
                stack_depth_limit: 3,
                yield_interval_ms: 0.03,
                ..base
            };
            check(&format!("pair-{i}"), with, without, &opts);
        }
    }
}

#[test]
fn captures_record_every_frame() {
    // h(0) captures in tail position, so its own activation is gone: six
    // activations of h, the top level and the receiver marker remain.
    let src = PAIRS[6].0;
    for opts in six_configs() {
        let mut s = session(src, &opts, &InterpConfig::default());
        s.run_to_end(1000);
        assert_eq!(s.last_capture_frames(), 6 + 1 + 1, "{}", opts.fingerprint());
    }
}

#[test]
fn pause_and_resume_mid_computation() {
    let src = "function fib(n) { if (n < 2) { return n; } return fib(n - 1) + fib(n - 2); } let i = 0; let acc = 0; while (i < 15) { acc = acc + fib(i); print(acc); i = i + 1; } acc;";
    let want = plain(src, &InterpConfig::default()).observable();
    for base in six_configs() {
        let opts = CompileOptions {
            yield_interval_ms: 1.0,
            ..base
        };
        let mut s = session(src, &opts, &InterpConfig::default());
        s.run();
        let mut pauses = 0;
        let mut t = 1.5;
        loop {
            s.pause_at(t);
            assert_eq!(s.run_until_idle(1_000_000), Stop::Idle);
            if s.status() != Status::Paused {
                break;
            }
            pauses += 1;
            t = s.now_ms() + 1.5;
            s.resume();
        }
        assert!(pauses >= 5, "only {pauses} pauses");
        let o = s.outcome();
        let got = (o.result.map(|v| v.to_string()).map_err(|e| e.to_string()), o.outputs);
        assert_eq!(got, want, "{}", opts.fingerprint());
    }
}
