//! Single-stepping visits exactly the statements a plain run executes, and
//! line breakpoints stop before every execution of their line.

mod common;

use std::collections::BTreeSet;

use common::corpus::CORPUS;
use common::gen::{program, Features};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stopkit::instrument::CompileOptions;
use stopkit::interp::InterpConfig;
use stopkit::runtime::{BreakReason, Status};
use stopkit::SourceLoc;

fn debug_opts() -> Vec<CompileOptions> {
    six_configs()
        .into_iter()
        .map(|o| CompileOptions {
            suspend_granularity: stopkit::instrument::Granularity::Statements,
            ..o
        })
        .collect()
}

fn random_programs() -> Vec<String> {
    (0..25).map(|i| program(seed() + 2000 + i, Features::all())).collect()
}

#[test]
fn stepping_follows_the_statement_trace() {
    let mut progs = random_programs();
    progs.extend(CORPUS.iter().map(|(_, s)| s.to_string()));
    for src in &progs {
        let trace = plain_trace(src);
        for opts in debug_opts() {
            let (steps, status) = step_sequence(src, &opts);
            assert_eq!(steps, trace, "{}\n{src}", opts.fingerprint());
            let expected = if plain(src, &InterpConfig::default()).result.is_ok() {
                Status::Done
            } else {
                Status::Failed
            };
            assert_eq!(status, expected);
        }
    }
}

#[test]
fn breakpoints_stop_before_each_execution_of_their_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    for src in random_programs() {
        let trace = plain_trace(&src);
        let first = first_columns(&src);
        let lines: Vec<u32> = first.keys().copied().collect();
        let chosen: BTreeSet<u32> = lines
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.3))
            .collect();
        let expected: Vec<SourceLoc> = trace
            .iter()
            .copied()
            .filter(|l| chosen.contains(&l.line) && first.get(&l.line) == Some(&l.column))
            .collect();
        for opts in debug_opts() {
            let mut s = session(&src, &opts, &InterpConfig::default());
            s.set_breakpoints(chosen.iter().copied().collect());
            s.run();
            let (seen, status) = drive(&mut s, |s| s.resume());
            assert!(seen.iter().all(|(_, r)| *r == BreakReason::Breakpoint));
            let seen: Vec<SourceLoc> = seen.into_iter().map(|(l, _)| l).collect();
            assert_eq!(seen, expected, "lines {chosen:?} under {}\n{src}", opts.fingerprint());
            assert_eq!(status, Status::Done);
            // Pausing changes nothing observable.
            assert_eq!(s.outputs(), plain(&src, &InterpConfig::default()).outputs);
        }
    }
}

#[test]
fn breakpoint_in_a_loop_hits_every_iteration() {
    let src = "let i = 0;\nlet s = 0;\nwhile (i < 5) {\n  s = s + i;\n  i = i + 1;\n}\ns;\n";
    for opts in debug_opts() {
        let mut s = session(src, &opts, &InterpConfig::default());
        s.set_breakpoints(vec![4]);
        s.run();
        let (seen, _) = drive(&mut s, |s| s.resume());
        assert_eq!(seen.len(), 5);
        assert!(seen.iter().all(|(l, _)| *l == SourceLoc::new(4, 2)));
        assert_eq!(s.outcome().result.unwrap().to_string(), "10");
    }
}

#[test]
fn breakpoints_can_change_while_paused() {
    let src = "let a = 1;\nlet b = 2;\nlet c = 3;\nlet d = 4;\na + b + c + d;\n";
    let opts = CompileOptions::for_debugging();
    let mut s = session(src, &opts, &InterpConfig::default());
    s.set_breakpoints(vec![2]);
    s.run();
    s.run_until_idle(1000);
    assert_eq!(s.paused_at().unwrap().0.line, 2);
    s.set_breakpoints(vec![4]);
    s.resume();
    s.run_until_idle(1000);
    assert_eq!(s.paused_at().unwrap().0.line, 4);
    s.resume();
    s.run_until_idle(1000);
    assert_eq!(s.status(), Status::Done);
}

#[test]
fn step_then_continue() {
    let src = "let a = 1;\nlet b = a + 1;\nprint(b);\nb * 10;\n";
    let opts = CompileOptions::for_debugging();
    let mut s = session(src, &opts, &InterpConfig::default());
    s.step();
    s.run_until_idle(1000);
    assert_eq!(s.paused_at().unwrap().0, SourceLoc::new(1, 0));
    s.step();
    s.run_until_idle(1000);
    assert_eq!(s.paused_at().unwrap().0, SourceLoc::new(2, 0));
    s.resume();
    s.run_until_idle(1000);
    assert_eq!(s.status(), Status::Done);
    assert_eq!(s.outputs(), ["2"]);
    assert_eq!(s.outcome().result.unwrap().to_string(), "20");
}
