//! The driver loop and the event loop around it.

use std::cell::RefCell;
use std::collections::{BTreeSet, VecDeque};
use std::rc::Rc;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::state::{BreakReason, Entry, Mode, Receiver, Strategy};
use crate::frontend::{Program, SourceLoc};
use crate::instrument::{compile, CompileError, CompileOptions};
use crate::interp::{
    finish, Continuation, Ctrl, ErrorKind, Interp, InterpConfig, Metrics, Outcome, RuntimeError,
    Value,
};

/// Notifications from a running program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Event {
    Output { value: String },
    Paused {
        line: u32,
        column: u32,
        reason: BreakReason,
    },
    Done { result: String },
    Error { message: String },
    Breakpoints { lines: Vec<u32> },
}

/// Requests that may arrive from another thread.
#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Run,
    Pause,
    Resume,
    Step,
    SetBreakpoints(Vec<u32>),
}

/// A thread-safe way to steer a session.
#[derive(Clone)]
pub struct SessionHandle {
    tx: mpsc::Sender<Command>,
    must_pause: Arc<AtomicBool>,
}

impl SessionHandle {
    pub fn send(&self, c: Command) {
        if c == Command::Pause {
            self.must_pause.store(true, Ordering::SeqCst);
        }
        // The session may already be gone; nothing to do then.
        let _ = self.tx.send(c);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Idle,
    Running,
    Paused,
    Done,
    Failed,
}

/// Why [`Session::run_until_idle`] returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// Nothing left to do: not started, paused, done or failed.
    Idle,
    TurnBudgetExhausted,
}

enum Task {
    Start,
    /// A deferred resumption after a yield.
    Resume(Rc<Continuation>, SourceLoc),
    Restore(Rc<Continuation>, Result<Value, Value>),
}

enum Thunk {
    Call(Value, Vec<Value>),
    Restore(Rc<Continuation>, Result<Value, Value>),
    Segment(Result<Value, Value>),
}

enum Ended {
    Returned(Value),
    Threw(Value),
    Captured,
    Applied(Rc<Continuation>, Value),
    Fatal(RuntimeError),
}

/// A loaded instrumented program with its event loop.
pub struct Session {
    it: Interp,
    main: Value,
    queue: VecDeque<Task>,
    status: Status,
    paused: Option<(Rc<Continuation>, SourceLoc, BreakReason)>,
    /// Outer frames still to be restored, innermost first (deep stacks).
    pending: VecDeque<Value>,
    events: Rc<RefCell<Vec<Event>>>,
    result: Option<Result<Value, RuntimeError>>,
    must_pause: Arc<AtomicBool>,
    tx: mpsc::Sender<Command>,
    rx: mpsc::Receiver<Command>,
    pause_at: Option<f64>,
    pause_requested: Option<f64>,
    pause_latency: Option<f64>,
    turns: u64,
}

impl Session {
    /// Load an instrumented program: run its top level, which configures the
    /// runtime and evaluates to the entry function.
    pub fn new(program: &Program, cfg: InterpConfig) -> Result<Session, RuntimeError> {
        let mut it = Interp::new(cfg);
        let events = Rc::new(RefCell::new(Vec::new()));
        let sink = events.clone();
        it.on_output = Some(Box::new(move |s: &str| {
            sink.borrow_mut().push(Event::Output {
                value: s.to_string(),
            })
        }));
        let (r, _) = it.run_top(program);
        let main = finish(r, it.cur_loc)?;
        if !matches!(main, Value::Closure(_)) || !it.rt.configured {
            return Err(RuntimeError::new(
                ErrorKind::Runtime,
                "not an instrumented program",
            ));
        }
        let (tx, rx) = mpsc::channel();
        Ok(Session {
            it,
            main,
            queue: VecDeque::new(),
            status: Status::Idle,
            paused: None,
            pending: VecDeque::new(),
            events,
            result: None,
            must_pause: Arc::new(AtomicBool::new(false)),
            tx,
            rx,
            pause_at: None,
            pause_requested: None,
            pause_latency: None,
            turns: 0,
        })
    }

    /// Compile MiniScript source and load it.
    pub fn from_source(
        src: &str,
        opts: &CompileOptions,
        cfg: InterpConfig,
    ) -> Result<Session, CompileError> {
        let compiled = compile(src, opts)?;
        Session::new(&compiled.program, cfg).map_err(CompileError::Load)
    }

    pub fn handle(&self) -> SessionHandle {
        SessionHandle {
            tx: self.tx.clone(),
            must_pause: self.must_pause.clone(),
        }
    }

    pub fn run(&self) {
        self.handle().send(Command::Run);
    }

    pub fn pause(&self) {
        self.handle().send(Command::Pause);
    }

    pub fn resume(&self) {
        self.handle().send(Command::Resume);
    }

    pub fn step(&self) {
        self.handle().send(Command::Step);
    }

    pub fn set_breakpoints(&self, lines: Vec<u32>) {
        self.handle().send(Command::SetBreakpoints(lines));
    }

    /// Request a pause once the virtual clock reaches `ms`, as if a user
    /// pressed pause at that moment.
    pub fn pause_at(&mut self, ms: f64) {
        self.pause_at = Some(ms);
    }

    pub fn status(&self) -> Status {
        self.status.clone()
    }

    pub fn paused_at(&self) -> Option<(SourceLoc, BreakReason)> {
        self.paused.as_ref().map(|(_, l, r)| (*l, *r))
    }

    pub fn now_ms(&self) -> f64 {
        self.it.now_ms()
    }

    pub fn turns(&self) -> u64 {
        self.turns
    }

    pub fn events(&self) -> Vec<Event> {
        self.events.borrow().clone()
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut *self.events.borrow_mut())
    }

    pub fn outputs(&self) -> &[String] {
        &self.it.outputs
    }

    /// Frames in the most recent capture, the receiver frame included.
    pub fn last_capture_frames(&self) -> usize {
        self.it.rt.last_capture_frames
    }

    pub fn deep_captures(&self) -> usize {
        self.it.rt.deep_captures
    }

    pub fn record_modes(&mut self) {
        self.it.rt.mode_trace = Some(vec![Mode::Normal]);
    }

    pub fn mode_trace(&self) -> Option<&[Mode]> {
        self.it.rt.mode_trace.as_deref()
    }

    pub fn metrics(&self) -> Metrics {
        let times = &self.it.rt.yield_times;
        Metrics {
            steps: self.it.steps,
            max_host_depth: self.it.max_depth,
            yield_count: times.len(),
            inter_yield_intervals: times.windows(2).map(|w| w[1] - w[0]).collect(),
            pause_latency: self.pause_latency,
        }
    }

    pub fn outcome(&self) -> Outcome {
        Outcome {
            result: self.result.clone().unwrap_or_else(|| {
                Err(RuntimeError::new(ErrorKind::Runtime, "program has not finished"))
            }),
            outputs: self.it.outputs.clone(),
            metrics: self.metrics(),
        }
    }

    /// Block until a command arrives or the timeout passes. Returns whether
    /// one was queued back for processing.
    pub fn wait_command(&mut self, timeout: Duration) -> bool {
        match self.rx.recv_timeout(timeout) {
            Ok(c) => {
                self.apply(c);
                true
            }
            Err(_) => false,
        }
    }

    /// Process turns until nothing is runnable or `max_turns` turns have run
    /// in total.
    pub fn run_until_idle(&mut self, max_turns: u64) -> Stop {
        loop {
            self.drain_commands();
            if self.queue.is_empty() {
                return Stop::Idle;
            }
            if self.turns >= max_turns {
                return Stop::TurnBudgetExhausted;
            }
            let task = self.queue.pop_front().unwrap();
            self.turns += 1;
            self.turn(task);
        }
    }

    /// Start the program and run it to completion (or until it pauses).
    pub fn run_to_end(&mut self, max_turns: u64) -> Stop {
        self.run();
        self.run_until_idle(max_turns)
    }

    fn emit(&self, e: Event) {
        self.events.borrow_mut().push(e);
    }

    fn drain_commands(&mut self) {
        while let Ok(c) = self.rx.try_recv() {
            self.apply(c);
        }
        if let Some(t) = self.pause_at {
            if self.it.now_ms() >= t && self.status == Status::Running {
                self.pause_at = None;
                self.must_pause.store(true, Ordering::SeqCst);
                self.pause_requested = Some(t);
            }
        }
    }

    fn apply(&mut self, c: Command) {
        match c {
            Command::Run => {
                if self.status == Status::Idle {
                    self.status = Status::Running;
                    self.queue.push_back(Task::Start);
                } else {
                    self.emit(Event::Error {
                        message: "program already started".into(),
                    });
                }
            }
            Command::Pause => match self.status {
                Status::Paused => {
                    // Pause wins over a breakpoint stop; the continuation is kept.
                    self.must_pause.store(false, Ordering::SeqCst);
                    if let Some((_, loc, reason)) = &mut self.paused {
                        *reason = BreakReason::Pause;
                        let loc = *loc;
                        self.emit(Event::Paused {
                            line: loc.line,
                            column: loc.column,
                            reason: BreakReason::Pause,
                        });
                    }
                }
                Status::Running => {
                    self.pause_requested.get_or_insert(self.it.now_ms());
                }
                _ => {
                    self.must_pause.store(false, Ordering::SeqCst);
                    self.emit(Event::Error {
                        message: "nothing is running".into(),
                    });
                }
            },
            Command::Resume => self.resume_paused(false),
            Command::Step => {
                if self.status == Status::Idle {
                    self.it.rt.stepping = true;
                    self.apply(Command::Run);
                } else {
                    self.resume_paused(true);
                }
            }
            Command::SetBreakpoints(lines) => {
                self.it.rt.breakpoints = lines.iter().copied().collect::<BTreeSet<_>>();
                self.emit(Event::Breakpoints {
                    lines: self.it.rt.breakpoints.iter().copied().collect(),
                });
            }
        }
    }

    fn resume_paused(&mut self, step: bool) {
        match self.paused.take() {
            Some((k, _, _)) if self.status == Status::Paused => {
                self.it.rt.stepping = step;
                self.status = Status::Running;
                self.queue.push_back(Task::Restore(k, Ok(Value::Null)));
            }
            _ => self.emit(Event::Error {
                message: "resume without a prior pause".into(),
            }),
        }
    }

    fn turn(&mut self, task: Task) {
        match task {
            Task::Start => self.drive(Thunk::Call(self.main.clone(), Vec::new())),
            Task::Resume(k, loc) => {
                if self.must_pause.swap(false, Ordering::SeqCst) {
                    let now = self.it.now_ms();
                    let requested = self.pause_requested.take().unwrap_or(now);
                    if self.pause_latency.is_none() {
                        self.pause_latency = Some(now - requested);
                    }
                    self.enter_paused(k, loc, BreakReason::Pause);
                } else {
                    self.drive(Thunk::Restore(k, Ok(Value::Null)));
                }
            }
            Task::Restore(k, d) => self.drive(Thunk::Restore(k, d)),
        }
    }

    fn enter_paused(&mut self, k: Rc<Continuation>, loc: SourceLoc, reason: BreakReason) {
        self.status = Status::Paused;
        self.paused = Some((k, loc, reason));
        self.emit(Event::Paused {
            line: loc.line,
            column: loc.column,
            reason,
        });
    }

    fn finish(&mut self, r: Result<Value, RuntimeError>) {
        self.queue.clear();
        self.pending.clear();
        self.must_pause.store(false, Ordering::SeqCst);
        match &r {
            Ok(v) => {
                self.status = Status::Done;
                self.emit(Event::Done {
                    result: v.to_string(),
                });
            }
            Err(e) => {
                self.status = Status::Failed;
                self.emit(Event::Error {
                    message: e.to_string(),
                });
            }
        }
        self.result = Some(r);
    }

    /// Run thunks until the turn ends: the program finishes, yields, pauses
    /// or hands a deep-stack segment to the event queue.
    fn drive(&mut self, mut thunk: Thunk) {
        loop {
            let ended = self.run_thunk(thunk);
            thunk = match ended {
                Ended::Returned(v) => {
                    if self.pending.is_empty() {
                        return self.finish(Ok(v));
                    }
                    Thunk::Segment(Ok(v))
                }
                Ended::Threw(e) => {
                    if self.pending.is_empty() {
                        return self.finish(finish(Err(Ctrl::Throw(e)), self.it.cur_loc));
                    }
                    Thunk::Segment(Err(e))
                }
                Ended::Applied(k, v) => {
                    self.pending.clear();
                    Thunk::Restore(k, Ok(v))
                }
                Ended::Fatal(e) => {
                    self.reset_runtime();
                    return self.finish(Err(e));
                }
                Ended::Captured => {
                    let rt = &mut self.it.rt;
                    let mut frames = std::mem::take(&mut rt.stack);
                    if rt.opts.strategy == Strategy::Eager {
                        frames.reverse();
                    }
                    rt.last_capture_frames = frames.len();
                    let receiver = rt.receiver.take();
                    rt.set_mode(Mode::Normal);
                    let mut rest: Vec<Value> = frames.into_iter().skip(1).collect();
                    rest.extend(self.pending.drain(..));
                    let k = Rc::new(Continuation { frames: rest });
                    match receiver {
                        Some(Receiver::User(f)) => Thunk::Call(f, vec![Value::Cont(k)]),
                        Some(Receiver::Suspend(loc)) => {
                            self.queue.push_back(Task::Resume(k, loc));
                            return;
                        }
                        Some(Receiver::Break(loc, reason)) => return self.enter_paused(k, loc, reason),
                        Some(Receiver::Deep) => {
                            self.queue.push_back(Task::Restore(k, Ok(Value::Null)));
                            return;
                        }
                        None => {
                            return self.finish(Err(RuntimeError::new(
                                ErrorKind::Runtime,
                                "capture without a receiver",
                            )))
                        }
                    }
                }
            };
        }
    }

    fn reset_runtime(&mut self) {
        let rt = &mut self.it.rt;
        rt.stack.clear();
        rt.restoring.clear();
        rt.receiver = None;
        rt.set_mode(Mode::Normal);
        self.pending.clear();
    }

    fn run_thunk(&mut self, thunk: Thunk) -> Ended {
        self.it.rt.depth = 0;
        let r = match thunk {
            Thunk::Call(f, args) => {
                self.it.rt.stack.clear();
                self.it.call(f, Value::Null, args, false)
            }
            Thunk::Restore(k, d) => {
                self.pending = k.frames.iter().cloned().collect();
                return self.run_thunk(Thunk::Segment(d));
            }
            Thunk::Segment(d) => {
                let rt = &mut self.it.rt;
                rt.stack.clear();
                rt.restoring.clear();
                if self.pending.is_empty() {
                    return match d {
                        Ok(v) => Ended::Returned(v),
                        Err(e) => Ended::Threw(e),
                    };
                }
                rt.restoring.push(Entry::Deliver(d));
                if rt.opts.deep {
                    let f = self.pending.pop_front().unwrap();
                    rt.restoring.push(Entry::Frame(f));
                } else {
                    for f in self.pending.drain(..) {
                        rt.restoring.push(Entry::Frame(f));
                    }
                }
                let Some(Entry::Frame(outer)) = rt.restoring.last() else {
                    unreachable!()
                };
                let reenter = match outer {
                    Value::Record(r) => r.borrow().get("reenter").cloned().unwrap_or_default(),
                    _ => Value::Null,
                };
                rt.set_mode(Mode::Restore);
                self.it.call(reenter, Value::Null, Vec::new(), false)
            }
        };
        self.classify(r)
    }

    fn classify(&mut self, r: Result<Value, Ctrl>) -> Ended {
        if let Err(Ctrl::Fatal(e)) = r {
            let mut e = *e;
            e.loc.get_or_insert(self.it.cur_loc);
            return Ended::Fatal(e);
        }
        if self.it.rt.capturing() {
            return match r {
                Ok(_) | Err(Ctrl::Throw(Value::Signal)) => Ended::Captured,
                _ => Ended::Fatal(RuntimeError::new(
                    ErrorKind::Runtime,
                    "capture interrupted by an abrupt exit",
                )),
            };
        }
        match r {
            Err(Ctrl::Abort) => match self.it.rt.applied.take() {
                Some((k, v)) => Ended::Applied(k, v),
                None => Ended::Fatal(RuntimeError::new(ErrorKind::Runtime, "stray abort")),
            },
            Err(Ctrl::Throw(Value::Signal)) => Ended::Fatal(RuntimeError::new(
                ErrorKind::Runtime,
                "capture signal escaped",
            )),
            Err(Ctrl::Throw(v)) => Ended::Threw(v),
            Ok(v) if self.it.rt.mode == Mode::Restore => {
                let _ = v;
                self.reset_runtime();
                Ended::Fatal(RuntimeError::new(
                    ErrorKind::Runtime,
                    "restoration did not reach the captured call site",
                ))
            }
            Ok(v) => Ended::Returned(v),
            Err(Ctrl::Return(v)) => Ended::Returned(v),
            Err(Ctrl::Tail(..)) | Err(Ctrl::Fatal(_)) => unreachable!("handled above"),
        }
    }
}
