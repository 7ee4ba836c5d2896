use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{SourceLoc, SyntaxError};
use crate::interp::RuntimeError;
use crate::runtime::{Strategy, TimerKind, DEFAULT_COUNTDOWN};

/// How `new` expressions are compiled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CtorMode {
    /// Keep `new`; functions record their call kind for re-entry.
    #[default]
    Direct,
    /// Allocate the object explicitly and call the constructor as a method.
    Wrapped,
}

/// Which binary operators expose their implicit conversions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Implicits {
    #[default]
    #[serde(rename = "true")]
    #[value(name = "true")]
    True,
    #[serde(rename = "false")]
    #[value(name = "false")]
    False,
    #[serde(rename = "plus")]
    #[value(name = "plus")]
    Plus,
}

/// What programs may do with arity mismatches and `arguments`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum ArgsMode {
    /// Calls must match the declared arity; `arguments` is not available.
    #[serde(rename = "false")]
    #[value(name = "false")]
    False,
    /// Re-entry re-applies the function to its saved argument list.
    #[serde(rename = "varargs")]
    #[value(name = "varargs")]
    Varargs,
    /// Re-entry passes the formals; the argument list lives on the frame.
    #[default]
    #[serde(rename = "mixed")]
    #[value(name = "mixed")]
    Mixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stacks {
    #[default]
    Normal,
    Deep,
}

/// Where suspend points go.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Granularity {
    /// Function entries and loop back edges.
    #[default]
    #[serde(rename = "loops", alias = "loops-and-functions")]
    #[value(name = "loops", alias = "loops-and-functions")]
    Loops,
    /// Also before every statement; needed for breakpoints and stepping.
    #[serde(rename = "statements", alias = "every-statement")]
    #[value(name = "statements", alias = "every-statement")]
    Statements,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct CompileOptions {
    pub cont: Strategy,
    pub ctor: CtorMode,
    pub timer: TimerKind,
    pub yield_interval_ms: f64,
    pub stacks: Stacks,
    pub stack_depth_limit: u32,
    pub implicits: Implicits,
    pub args: ArgsMode,
    #[serde(alias = "granularity")]
    pub suspend_granularity: Granularity,
    pub resample_target: f64,
    pub countdown_n: u64,
    /// Bounce tail calls through the caller instead of relying on the
    /// interpreter's proper tail calls.
    pub trampoline: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            cont: Strategy::Checked,
            ctor: CtorMode::Direct,
            timer: TimerKind::Approx,
            yield_interval_ms: 100.0,
            stacks: Stacks::Normal,
            stack_depth_limit: 500,
            implicits: Implicits::True,
            args: ArgsMode::Mixed,
            suspend_granularity: Granularity::Loops,
            resample_target: 100.0,
            countdown_n: DEFAULT_COUNTDOWN,
            trampoline: false,
        }
    }
}

impl CompileOptions {
    /// Options suitable for a debugger: suspend points before every statement.
    pub fn for_debugging() -> Self {
        CompileOptions {
            suspend_granularity: Granularity::Statements,
            ..CompileOptions::default()
        }
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        if !(self.yield_interval_ms > 0.0 && self.yield_interval_ms.is_finite()) {
            return Err(CompileError::Options("yield interval must be positive".into()));
        }
        if !(self.resample_target > 0.0 && self.resample_target.is_finite()) {
            return Err(CompileError::Options("resample target must be positive".into()));
        }
        if self.stack_depth_limit == 0 {
            return Err(CompileError::Options("stack depth limit must be positive".into()));
        }
        if self.countdown_n == 0 {
            return Err(CompileError::Options("countdown must be positive".into()));
        }
        Ok(())
    }

    /// Short description of the settings that affect instrumentation.
    pub fn fingerprint(&self) -> String {
        format!(
            "cont={} ctor={} timer={} implicits={} args={} stacks={}",
            self.cont.name(),
            value_name(self.ctor),
            value_name(self.timer),
            value_name(self.implicits),
            value_name(self.args),
            value_name(self.stacks),
        )
    }
}

/// The command-line spelling of an option value.
pub fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

macro_rules! from_str_via_value_enum {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, false)
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&value_name(*self))
            }
        }
    )*};
}

from_str_via_value_enum!(CtorMode, Implicits, ArgsMode, Stacks, Granularity);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CompileError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unsupported at {loc}: {message}")]
    Unsupported { loc: SourceLoc, message: String },
    #[error("arity mismatch at {loc}: {message}")]
    Arity { loc: SourceLoc, message: String },
    #[error("invalid options: {0}")]
    Options(String),
    #[error("{0}")]
    Load(RuntimeError),
}
