#![allow(dead_code)]

pub mod corpus;
pub mod gen;
pub mod pairs;

use stopkit::instrument::{compile, CompileOptions, CtorMode, Implicits};
use stopkit::interp::{eval_program, statement_trace, InterpConfig, Metrics};
use stopkit::runtime::{BreakReason, Session, Status, Stop, Strategy};
use std::collections::BTreeMap;

use stopkit::frontend::ast::{visit, StmtKind};
use stopkit::{parse, SourceLoc};

pub const STRATEGIES: [Strategy; 3] = [Strategy::Checked, Strategy::Exceptional, Strategy::Eager];
pub const CTORS: [CtorMode; 2] = [CtorMode::Direct, CtorMode::Wrapped];
pub const IMPLICITS: [Implicits; 3] = [Implicits::True, Implicits::False, Implicits::Plus];

/// The continuation strategy × constructor strategy grid.
pub fn six_configs() -> Vec<CompileOptions> {
    let mut v = Vec::new();
    for cont in STRATEGIES {
        for ctor in CTORS {
            v.push(CompileOptions {
                cont,
                ctor,
                ..CompileOptions::default()
            });
        }
    }
    v
}

/// Seed for generated programs; `STOPKIT_SEED` overrides it.
pub fn seed() -> u64 {
    std::env::var("STOPKIT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5709_4b17)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Run {
    /// The final value, or the error message.
    pub result: Result<String, String>,
    pub outputs: Vec<String>,
    pub metrics: Metrics,
}

impl Run {
    /// Result and outputs, the observable behaviour.
    pub fn observable(&self) -> (Result<String, String>, Vec<String>) {
        (self.result.clone(), self.outputs.clone())
    }
}

pub fn plain(src: &str, cfg: &InterpConfig) -> Run {
    let p = parse(src).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let o = eval_program(&p, cfg);
    Run {
        result: o.result.map(|v| v.to_string()).map_err(|e| e.to_string()),
        outputs: o.outputs,
        metrics: o.metrics,
    }
}

pub fn session(src: &str, opts: &CompileOptions, cfg: &InterpConfig) -> Session {
    let c = compile(src, opts).unwrap_or_else(|e| panic!("{e}\n{src}"));
    Session::new(&c.program, cfg.clone()).unwrap_or_else(|e| panic!("{e}\n{}", c.text()))
}

pub fn instrumented(src: &str, opts: &CompileOptions, cfg: &InterpConfig) -> Run {
    let mut s = session(src, opts, cfg);
    let stop = s.run_to_end(10_000_000);
    assert_eq!(stop, Stop::Idle, "turn budget exhausted");
    let o = s.outcome();
    Run {
        result: o.result.map(|v| v.to_string()).map_err(|e| e.to_string()),
        outputs: o.outputs,
        metrics: o.metrics,
    }
}

/// Lines and columns the plain interpreter executes, in order.
pub fn plain_trace(src: &str) -> Vec<SourceLoc> {
    let p = parse(src).unwrap();
    statement_trace(&p, &InterpConfig::default()).0
}

/// Every pause until the program ends, calling `next` at each, and the
/// final status.
pub fn drive(s: &mut Session, mut next: impl FnMut(&Session)) -> (Vec<(SourceLoc, BreakReason)>, Status) {
    let mut seen = Vec::new();
    loop {
        assert_eq!(s.run_until_idle(s.turns() + 1_000_000), Stop::Idle);
        match s.paused_at() {
            Some(p) if s.status() == Status::Paused => {
                seen.push(p);
                next(s);
            }
            _ => return (seen, s.status()),
        }
    }
}

/// Pause locations when single-stepping from the first statement.
pub fn step_sequence(src: &str, opts: &CompileOptions) -> (Vec<SourceLoc>, Status) {
    let mut s = session(src, opts, &InterpConfig::default());
    s.step();
    let (seen, status) = drive(&mut s, |s| s.step());
    assert!(seen.iter().all(|(_, r)| *r == BreakReason::Step));
    (seen.into_iter().map(|(l, _)| l).collect(), status)
}

/// The smallest statement column on each line, over the whole program.
pub fn first_columns(src: &str) -> BTreeMap<u32, u32> {
    let mut p = parse(src).unwrap();
    let mut first: BTreeMap<u32, u32> = BTreeMap::new();
    visit::walk_stmts_mut(
        &mut p.body,
        &mut |s| {
            if !matches!(s.kind, StmtKind::Block(_)) {
                let c = first.entry(s.loc.line).or_insert(s.loc.column);
                *c = (*c).min(s.loc.column);
            }
        },
        &mut |_| {},
    );
    first
}

