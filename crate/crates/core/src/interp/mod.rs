//! Deterministic tree-walking evaluator for MiniScript.
//!
//! Programs are resolved to slot-addressed code ([`ir`]) and evaluated with
//! proper tail calls, a bounded simulated host stack and a virtual clock that
//! advances a fixed amount per evaluation step (one step per statement and
//! per expression node).
//!
//! Runtime type errors, unbound variables and stack overflow are fatal: only
//! values raised by `throw` can be caught.

mod eval;
pub mod ir;
mod value;

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;
use std::time::Instant;

use serde::Serialize;

pub use value::{Bounce, Closure, Continuation, Native, Record, RtFn, Value};

use crate::frontend::{Program, SourceLoc};
use crate::runtime::RtState;

pub type Env = Rc<Scope>;

pub struct Scope {
    pub slots: RefCell<Vec<Value>>,
    pub parent: Option<Env>,
}

/// Long chains of scopes (a captured stack, a parent chain) would otherwise
/// be freed recursively and can exhaust the native stack.
impl Drop for Scope {
    fn drop(&mut self) {
        let mut values = std::mem::take(self.slots.get_mut());
        let mut env = self.parent.take();
        let mut envs: Vec<Env> = Vec::new();
        loop {
            if let Some(e) = env.take().or_else(|| envs.pop()) {
                if let Ok(mut sc) = Rc::try_unwrap(e) {
                    values.append(sc.slots.get_mut());
                    env = sc.parent.take();
                }
            } else if let Some(v) = values.pop() {
                match v {
                    Value::Closure(c) => {
                        if let Ok(c) = Rc::try_unwrap(c) {
                            envs.push(c.env);
                        }
                    }
                    Value::Record(r) => {
                        if let Ok(r) = Rc::try_unwrap(r) {
                            values.extend(r.into_inner().into_values());
                        }
                    }
                    Value::Array(a) => {
                        if let Ok(a) = Rc::try_unwrap(a) {
                            values.extend(a.into_inner());
                        }
                    }
                    Value::Cont(k) => {
                        if let Ok(k) = Rc::try_unwrap(k) {
                            values.extend(k.frames);
                        }
                    }
                    Value::Bounce(b) => {
                        if let Ok(b) = Rc::try_unwrap(b) {
                            values.push(b.callee);
                            values.push(b.this);
                            values.extend(b.args);
                        }
                    }
                    _ => {}
                }
            } else {
                break;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Clock {
    /// Virtual time: every evaluation step costs this many microseconds.
    Virtual { step_cost_micros: f64 },
    Real,
}

#[derive(Clone, Debug)]
pub struct InterpConfig {
    /// Maximum number of live MiniScript activations.
    pub host_stack_limit: usize,
    pub clock: Clock,
    pub proper_tail_calls: bool,
    pub metrics_enabled: bool,
}

pub const MIN_HOST_STACK: usize = 16;

impl Default for InterpConfig {
    fn default() -> Self {
        InterpConfig {
            host_stack_limit: 1000,
            clock: Clock::Virtual {
                step_cost_micros: 1.0,
            },
            proper_tail_calls: true,
            metrics_enabled: true,
        }
    }
}

impl InterpConfig {
    pub fn with_stack_limit(mut self, n: usize) -> Self {
        self.host_stack_limit = n.max(MIN_HOST_STACK);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorKind {
    Type,
    Reference,
    StackOverflow,
    Uncaught,
    Arity,
    CaptureInUninstrumentedCode,
    Runtime,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuntimeError {
    pub kind: ErrorKind,
    pub message: String,
    pub loc: Option<SourceLoc>,
}

impl RuntimeError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        RuntimeError {
            kind,
            message: message.into(),
            loc: None,
        }
    }
}

impl fmt::Display for RuntimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ErrorKind::Type => "type error",
            ErrorKind::Reference => "reference error",
            ErrorKind::StackOverflow => "stack overflow",
            ErrorKind::Uncaught => "uncaught exception",
            ErrorKind::Arity => "arity mismatch",
            ErrorKind::CaptureInUninstrumentedCode => "capture in uninstrumented code",
            ErrorKind::Runtime => "runtime error",
        };
        write!(f, "{what}: {}", self.message)?;
        if let Some(loc) = self.loc {
            write!(f, " (at {loc})")?;
        }
        Ok(())
    }
}

impl std::error::Error for RuntimeError {}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    pub steps: u64,
    pub max_host_depth: usize,
    pub yield_count: usize,
    #[serde(rename = "intervals")]
    pub inter_yield_intervals: Vec<f64>,
    #[serde(rename = "pauseLatencyMs")]
    pub pause_latency: Option<f64>,
}

impl Metrics {
    pub fn interval_mean(&self) -> f64 {
        let v = &self.inter_yield_intervals;
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    }

    pub fn interval_std(&self) -> f64 {
        let v = &self.inter_yield_intervals;
        if v.len() < 2 {
            return 0.0;
        }
        let m = self.interval_mean();
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    }

    /// Nearest-rank percentile of the inter-yield intervals.
    pub fn interval_percentile(&self, p: f64) -> f64 {
        let mut v = self.inter_yield_intervals.clone();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(|a, b| a.total_cmp(b));
        let rank = ((p / 100.0) * v.len() as f64).ceil().max(1.0) as usize;
        v[rank.min(v.len()) - 1]
    }
}

pub struct Outcome {
    pub result: Result<Value, RuntimeError>,
    pub outputs: Vec<String>,
    pub metrics: Metrics,
}

impl Outcome {
    /// The result as text: the value's debug form or the error message.
    pub fn summary(&self) -> String {
        match &self.result {
            Ok(v) => format!("{v:?}"),
            Err(e) => format!("error: {e}"),
        }
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Outcome")
            .field("result", &self.summary())
            .field("outputs", &self.outputs)
            .field("metrics", &self.metrics)
            .finish()
    }
}

/// Non-local exits during evaluation.
pub(crate) enum Ctrl {
    Return(Value),
    /// Proper tail call: the caller's call loop invokes this in place.
    Tail(Value, Value, Vec<Value>),
    Throw(Value),
    Fatal(Box<RuntimeError>),
    /// A continuation was applied: unwind everything, skipping handlers.
    Abort,
}

pub(crate) fn fatal<T>(kind: ErrorKind, message: impl Into<String>) -> Result<T, Ctrl> {
    Err(Ctrl::Fatal(Box::new(RuntimeError::new(kind, message))))
}

struct Act {
    closure: Rc<Closure>,
    new_target: bool,
}

pub struct Interp {
    pub cfg: InterpConfig,
    pub steps: u64,
    pub depth: usize,
    pub max_depth: usize,
    pub outputs: Vec<String>,
    pub trace: Option<Vec<SourceLoc>>,
    pub(crate) rt: RtState,
    pub(crate) rt_record: Value,
    acts: Vec<Act>,
    pub(crate) cur_loc: SourceLoc,
    pub(crate) last_top: Value,
    pub(crate) strict_arity: bool,
    pub(crate) on_output: Option<Box<dyn FnMut(&str)>>,
    started: Instant,
}

impl Interp {
    pub fn new(cfg: InterpConfig) -> Self {
        let rt_record = Value::record(
            RtFn::ALL
                .iter()
                .map(|f| (f.name(), Value::Native(Native::Rt(*f))))
                .collect(),
        );
        Interp {
            cfg,
            steps: 0,
            depth: 0,
            max_depth: 0,
            outputs: Vec::new(),
            trace: None,
            rt: RtState::default(),
            rt_record,
            acts: Vec::new(),
            cur_loc: SourceLoc::default(),
            last_top: Value::Null,
            strict_arity: false,
            on_output: None,
            started: Instant::now(),
        }
    }

    /// Current time in milliseconds.
    pub fn now_ms(&self) -> f64 {
        match self.cfg.clock {
            Clock::Virtual { step_cost_micros } => self.steps as f64 * step_cost_micros / 1000.0,
            Clock::Real => self.started.elapsed().as_secs_f64() * 1000.0,
        }
    }

    /// Run a program's top level. Returns the value of its last top-level
    /// expression statement, with the environment it ran in.
    pub(crate) fn run_top(&mut self, p: &Program) -> (Result<Value, Ctrl>, Env) {
        let code = ir::compile_program(p);
        let env = Rc::new(Scope {
            slots: RefCell::new(vec![Value::Null; code.nslots]),
            parent: None,
        });
        self.last_top = Value::Null;
        let r = self.exec_block(&code.body, &env);
        let r = match r {
            Ok(()) => Ok(std::mem::take(&mut self.last_top)),
            Err(e) => Err(e),
        };
        (r, env)
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            steps: self.steps,
            max_host_depth: self.max_depth,
            ..Metrics::default()
        }
    }
}

/// Convert an escaped control signal into a final result.
pub(crate) fn finish(r: Result<Value, Ctrl>, loc: SourceLoc) -> Result<Value, RuntimeError> {
    match r {
        Ok(v) | Err(Ctrl::Return(v)) => Ok(v),
        Err(Ctrl::Throw(v)) => Err(RuntimeError {
            kind: ErrorKind::Uncaught,
            message: format!("{v:?}"),
            // Handlers may rethrow, so where it was last thrown says little.
            loc: None,
        }),
        Err(Ctrl::Fatal(e)) => {
            let mut e = *e;
            e.loc.get_or_insert(loc);
            Err(e)
        }
        Err(Ctrl::Tail(..)) => Err(RuntimeError::new(ErrorKind::Runtime, "tail call at top level")),
        Err(Ctrl::Abort) => Err(RuntimeError::new(
            ErrorKind::Runtime,
            "continuation applied outside the driver",
        )),
    }
}

/// Evaluate an uninstrumented program.
pub fn eval_program(p: &Program, cfg: &InterpConfig) -> Outcome {
    let mut it = Interp::new(cfg.clone());
    let (r, _) = it.run_top(p);
    let result = finish(r, it.cur_loc);
    Outcome {
        result,
        outputs: std::mem::take(&mut it.outputs),
        metrics: it.metrics(),
    }
}

/// The locations of user statements in the order an uninstrumented run
/// executes them.
pub fn statement_trace(p: &Program, cfg: &InterpConfig) -> (Vec<SourceLoc>, Outcome) {
    let mut it = Interp::new(cfg.clone());
    it.trace = Some(Vec::new());
    let (r, _) = it.run_top(p);
    let result = finish(r, it.cur_loc);
    let trace = it.trace.take().unwrap_or_default();
    (
        trace,
        Outcome {
            result,
            outputs: std::mem::take(&mut it.outputs),
            metrics: it.metrics(),
        },
    )
}
