//! Option sweeps over a directory of benchmark programs.
//!
//! Slowdown is the ratio of interpreter steps with and without
//! instrumentation, which keeps reports deterministic.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::frontend::parse;
use crate::instrument::{value_name, ArgsMode, CompileOptions, CtorMode, Implicits, Stacks};
use crate::interp::{eval_program, InterpConfig, Metrics};
use crate::runtime::{Session, Stop, Strategy, TimerKind};

pub const CSV_HEADER: &str =
    "benchmark,cont,ctor,timer,implicits,args,stacks,steps,slowdown,intervalMeanMs,intervalStdMs";

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub benchmark: String,
    pub cont: String,
    pub ctor: String,
    pub timer: String,
    pub implicits: String,
    pub args: String,
    pub stacks: String,
    pub steps: u64,
    /// Instrumented steps over plain steps; absent when the plain run fails
    /// (for instance because the program uses `control`).
    pub slowdown: Option<f64>,
    pub interval_mean_ms: Option<f64>,
    pub interval_std_ms: Option<f64>,
    pub yield_count: usize,
    /// Set when the program failed or ran out of turns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub metrics: Metrics,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let fields = [
                r.benchmark.clone(),
                r.cont.clone(),
                r.ctor.clone(),
                r.timer.clone(),
                r.implicits.clone(),
                r.args.clone(),
                r.stacks.clone(),
                r.steps.to_string(),
                cell(r.slowdown),
                cell(r.interval_mean_ms),
                cell(r.interval_std_ms),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Which option values to sweep; the report has one row per benchmark and
/// combination.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub conts: Vec<Strategy>,
    pub ctors: Vec<CtorMode>,
    pub timers: Vec<TimerKind>,
    pub implicits: Vec<Implicits>,
    pub args: Vec<ArgsMode>,
    pub stacks: Vec<Stacks>,
    /// Every other option comes from here.
    pub base: CompileOptions,
}

impl Default for Sweep {
    fn default() -> Self {
        let base = CompileOptions::default();
        Sweep {
            conts: vec![base.cont],
            ctors: vec![base.ctor],
            timers: vec![base.timer],
            implicits: vec![base.implicits],
            args: vec![base.args],
            stacks: vec![base.stacks],
            base,
        }
    }
}

impl Sweep {
    pub fn options(&self) -> Vec<CompileOptions> {
        let mut out = Vec::new();
        for &cont in &self.conts {
            for &ctor in &self.ctors {
                for &timer in &self.timers {
                    for &implicits in &self.implicits {
                        for &args in &self.args {
                            for &stacks in &self.stacks {
                                out.push(CompileOptions {
                                    cont,
                                    ctor,
                                    timer,
                                    implicits,
                                    args,
                                    stacks,
                                    ..self.base.clone()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// `.ms` files of a directory, sorted by name, as (name, source) pairs.
pub fn load_dir(dir: &Path) -> io::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "ms") {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            out.push((name, fs::read_to_string(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

/// Plain-interpreter step count, if the program runs without
/// instrumentation.
pub fn plain_steps(src: &str, cfg: &InterpConfig) -> Option<u64> {
    let p = parse(src).ok()?;
    let o = eval_program(&p, cfg);
    o.result.ok().map(|_| o.metrics.steps)
}

/// Run one benchmark under one option set.
pub fn run_one(
    name: &str,
    src: &str,
    opts: &CompileOptions,
    cfg: &InterpConfig,
    max_turns: u64,
    plain: Option<u64>,
) -> BenchRow {
    let mut error = None;
    let metrics = match Session::from_source(src, opts, cfg.clone()) {
        Ok(mut s) => {
            if s.run_to_end(max_turns) == Stop::TurnBudgetExhausted {
                error = Some(format!("turn budget of {max_turns} exhausted"));
            } else if let Err(e) = s.outcome().result {
                error = Some(e.to_string());
            }
            s.metrics()
        }
        Err(e) => {
            error = Some(e.to_string());
            Metrics::default()
        }
    };
    let stats = |f: fn(&Metrics) -> f64| (!metrics.inter_yield_intervals.is_empty()).then(|| f(&metrics));
    BenchRow {
        benchmark: name.to_string(),
        cont: opts.cont.name().to_string(),
        ctor: value_name(opts.ctor),
        timer: value_name(opts.timer),
        implicits: value_name(opts.implicits),
        args: value_name(opts.args),
        stacks: value_name(opts.stacks),
        steps: metrics.steps,
        slowdown: plain
            .filter(|p| *p > 0 && error.is_none())
            .map(|p| metrics.steps as f64 / p as f64),
        interval_mean_ms: stats(Metrics::interval_mean),
        interval_std_ms: stats(Metrics::interval_std),
        yield_count: metrics.yield_count,
        error,
        metrics,
    }
}

/// Run every benchmark under every option set of the sweep. Failures are
/// recorded in their rows and the sweep continues.
pub fn run_bench(
    programs: &[(String, String)],
    sweep: &Sweep,
    cfg: &InterpConfig,
    max_turns: u64,
) -> BenchReport {
    let options = sweep.options();
    let mut rows = Vec::new();
    for (name, src) in programs {
        let plain = plain_steps(src, cfg);
        for o in &options {
            rows.push(run_one(name, src, o, cfg, max_turns, plain));
        }
    }
    BenchReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_gives_header_only() {
        let r = run_bench(&[], &Sweep::default(), &InterpConfig::default(), 10);
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn instrumented_runs_take_more_steps() {
        let progs = vec![(
            "sum".to_string(),
            "let s = 0; let i = 0; while (i < 100) { s = s + i; i = i + 1; } s;".to_string(),
        )];
        let r = run_bench(&progs, &Sweep::default(), &InterpConfig::default(), 1000);
        assert_eq!(r.rows.len(), 1);
        assert!(r.rows[0].error.is_none());
        assert!(r.rows[0].slowdown.unwrap() >= 1.0);
    }
}
