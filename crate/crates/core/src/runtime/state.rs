use std::collections::BTreeSet;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::estimator::{Estimator, TimerKind, DEFAULT_COUNTDOWN};
use crate::frontend::SourceLoc;
use crate::interp::{Continuation, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Normal,
    Capture,
    Restore,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Normal => "normal",
            Mode::Capture => "capture",
            Mode::Restore => "restore",
        }
    }
}

/// How frames are reified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Check the mode after every call.
    #[default]
    Checked,
    /// Unwind with a thrown signal caught at every call site.
    Exceptional,
    /// Keep a shadow stack of frames at all times.
    Eager,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Checked => "checked",
            Strategy::Exceptional => "exceptional",
            Strategy::Eager => "eager",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "checked" => Ok(Strategy::Checked),
            "exceptional" => Ok(Strategy::Exceptional),
            "eager" => Ok(Strategy::Eager),
            _ => Err(format!("unknown continuation strategy `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreakReason {
    Breakpoint,
    Step,
    Pause,
}

/// What the driver does once a capture has unwound the stack.
#[derive(Clone, Debug)]
pub enum Receiver {
    /// A `control` receiver, applied to the continuation.
    User(Value),
    /// A yield to the event loop at a suspend point.
    Suspend(SourceLoc),
    Break(SourceLoc, BreakReason),
    /// The depth limit was reached.
    Deep,
}

/// An entry of the stack being restored.
pub enum Entry {
    Frame(Value),
    /// The value (or exception) the innermost restored call site receives.
    Deliver(Result<Value, Value>),
}

/// Settings fixed by the compiler through `$rt.configure`.
#[derive(Clone, Debug)]
pub struct RtOptions {
    pub strategy: Strategy,
    pub timer: TimerKind,
    pub delta: f64,
    pub resample: f64,
    pub countdown_n: u64,
    pub deep: bool,
    pub depth_limit: i64,
}

impl Default for RtOptions {
    fn default() -> Self {
        RtOptions {
            strategy: Strategy::Checked,
            timer: TimerKind::Approx,
            delta: 100.0,
            resample: 100.0,
            countdown_n: DEFAULT_COUNTDOWN,
            deep: false,
            depth_limit: 500,
        }
    }
}

pub struct RtState {
    pub configured: bool,
    pub opts: RtOptions,
    pub mode: Mode,
    /// Frames pushed while capturing, or the shadow stack when eager.
    pub stack: Vec<Value>,
    pub restoring: Vec<Entry>,
    pub receiver: Option<Receiver>,
    pub depth: i64,
    pub estimator: Estimator,
    pub breakpoints: BTreeSet<u32>,
    pub stepping: bool,
    /// Interpreter-internal calls in progress, such as `valueOf` run by an
    /// operator. Nothing can be captured inside them.
    pub native_depth: u32,
    /// Set when a continuation is applied; consumed by the driver.
    pub applied: Option<(Rc<Continuation>, Value)>,
    pub mode_trace: Option<Vec<Mode>>,
    pub yield_times: Vec<f64>,
    pub deep_captures: usize,
    /// Number of frames (receiver frame included) in the last capture.
    pub last_capture_frames: usize,
}

impl Default for RtState {
    fn default() -> Self {
        let opts = RtOptions::default();
        RtState {
            configured: false,
            estimator: Estimator::new(opts.timer, opts.delta, opts.resample, opts.countdown_n),
            opts,
            mode: Mode::Normal,
            stack: Vec::new(),
            restoring: Vec::new(),
            receiver: None,
            depth: 0,
            breakpoints: BTreeSet::new(),
            stepping: false,
            native_depth: 0,
            applied: None,
            mode_trace: None,
            yield_times: Vec::new(),
            deep_captures: 0,
            last_capture_frames: 0,
        }
    }
}

impl RtState {
    pub fn set_mode(&mut self, m: Mode) {
        if m != self.mode {
            self.mode = m;
            if let Some(t) = &mut self.mode_trace {
                t.push(m);
            }
        }
    }

    pub fn is_normal(&self) -> bool {
        self.mode == Mode::Normal
    }

    pub fn capturing(&self) -> bool {
        self.mode == Mode::Capture
    }

    /// Drop a capture that cannot complete.
    pub fn abandon_capture(&mut self) {
        self.stack.clear();
        self.receiver = None;
        self.set_mode(Mode::Normal);
    }

    pub fn configure(&mut self, opts: RtOptions) {
        self.estimator = Estimator::new(opts.timer, opts.delta, opts.resample, opts.countdown_n);
        self.opts = opts;
        self.configured = true;
    }
}
