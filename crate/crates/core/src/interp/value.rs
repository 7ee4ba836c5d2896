use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use super::ir::FnCode;
use super::Env;
use crate::frontend::format_number;

#[derive(Clone, Default)]
pub enum Value {
    #[default]
    Null,
    Bool(bool),
    Num(f64),
    Str(Rc<str>),
    Record(Rc<RefCell<Record>>),
    Array(Rc<RefCell<Vec<Value>>>),
    Closure(Rc<Closure>),
    Native(Native),
    Cont(Rc<Continuation>),
    /// A pending tail call produced by `$rt.bounce`.
    Bounce(Rc<Bounce>),
    /// Thrown to unwind the stack while capturing a continuation with the
    /// exceptional and eager strategies.
    Signal,
}

#[derive(Default, Debug)]
pub struct Record {
    fields: Vec<(Rc<str>, Value)>,
}

impl Record {
    pub fn get(&self, k: &str) -> Option<&Value> {
        self.fields.iter().find(|(n, _)| &**n == k).map(|(_, v)| v)
    }

    pub fn set(&mut self, k: &str, v: Value) {
        match self.fields.iter_mut().find(|(n, _)| &**n == k) {
            Some(slot) => slot.1 = v,
            None => self.fields.push((k.into(), v)),
        }
    }

    pub fn into_values(self) -> impl Iterator<Item = Value> {
        self.fields.into_iter().map(|(_, v)| v)
    }

    pub fn fields(&self) -> &[(Rc<str>, Value)] {
        &self.fields
    }
}

pub struct Closure {
    pub code: Rc<FnCode>,
    pub env: Env,
}

/// Builtin procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Native {
    Print,
    Control,
    Rt(RtFn),
}

/// The `$rt` intrinsics available to instrumented code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RtFn {
    Configure,
    Mode,
    PushFrame,
    PopFrame,
    TopFrame,
    DropFrame,
    StackHeight,
    Truncate,
    Control,
    Reenter,
    Reapply,
    Callee,
    NewTarget,
    MaySuspend,
    EnterCall,
    SetDepth,
    Call,
    CtorResult,
    ToPrimNum,
    ToPrimPlus,
    Bounce,
    StrictArity,
}

impl RtFn {
    pub const ALL: [RtFn; 22] = [
        RtFn::Configure,
        RtFn::Mode,
        RtFn::PushFrame,
        RtFn::PopFrame,
        RtFn::TopFrame,
        RtFn::DropFrame,
        RtFn::StackHeight,
        RtFn::Truncate,
        RtFn::Control,
        RtFn::Reenter,
        RtFn::Reapply,
        RtFn::Callee,
        RtFn::NewTarget,
        RtFn::MaySuspend,
        RtFn::EnterCall,
        RtFn::SetDepth,
        RtFn::Call,
        RtFn::CtorResult,
        RtFn::ToPrimNum,
        RtFn::ToPrimPlus,
        RtFn::Bounce,
        RtFn::StrictArity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RtFn::Configure => "configure",
            RtFn::Mode => "mode",
            RtFn::PushFrame => "pushFrame",
            RtFn::PopFrame => "popFrame",
            RtFn::TopFrame => "topFrame",
            RtFn::DropFrame => "dropFrame",
            RtFn::StackHeight => "stackHeight",
            RtFn::Truncate => "truncate",
            RtFn::Control => "control",
            RtFn::Reenter => "reenter",
            RtFn::Reapply => "reapply",
            RtFn::Callee => "callee",
            RtFn::NewTarget => "newTarget",
            RtFn::MaySuspend => "maySuspend",
            RtFn::EnterCall => "enterCall",
            RtFn::SetDepth => "setDepth",
            RtFn::Call => "call",
            RtFn::CtorResult => "ctorResult",
            RtFn::ToPrimNum => "toPrimNum",
            RtFn::ToPrimPlus => "toPrimPlus",
            RtFn::Bounce => "bounce",
            RtFn::StrictArity => "strictArity",
        }
    }

    pub fn by_name(name: &str) -> Option<RtFn> {
        RtFn::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// A captured continuation: frame records ordered innermost first.
#[derive(Debug)]
pub struct Continuation {
    pub frames: Vec<Value>,
}

pub struct Bounce {
    pub callee: Value,
    pub this: Value,
    pub args: Vec<Value>,
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(s.into())
    }

    pub fn record(fields: Vec<(&str, Value)>) -> Value {
        let mut r = Record::default();
        for (k, v) in fields {
            r.set(k, v);
        }
        Value::Record(Rc::new(RefCell::new(r)))
    }

    pub fn array(items: Vec<Value>) -> Value {
        Value::Array(Rc::new(RefCell::new(items)))
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Null => false,
            Value::Bool(b) => *b,
            Value::Num(n) => *n != 0.0 && !n.is_nan(),
            Value::Str(s) => !s.is_empty(),
            _ => true,
        }
    }

    pub fn is_primitive(&self) -> bool {
        matches!(
            self,
            Value::Null | Value::Bool(_) | Value::Num(_) | Value::Str(_)
        )
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Num(_) => "number",
            Value::Str(_) => "string",
            Value::Record(_) => "record",
            Value::Array(_) => "array",
            Value::Closure(_) | Value::Native(_) => "function",
            Value::Cont(_) => "continuation",
            Value::Bounce(_) => "bounce",
            Value::Signal => "capture signal",
        }
    }

    /// `==`: primitives by value, everything else by identity.
    pub fn loose_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Null, Value::Null) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Num(a), Value::Num(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Record(a), Value::Record(b)) => Rc::ptr_eq(a, b),
            (Value::Array(a), Value::Array(b)) => Rc::ptr_eq(a, b),
            (Value::Closure(a), Value::Closure(b)) => Rc::ptr_eq(a, b),
            (Value::Native(a), Value::Native(b)) => a == b,
            (Value::Cont(a), Value::Cont(b)) => Rc::ptr_eq(a, b),
            (Value::Bounce(a), Value::Bounce(b)) => Rc::ptr_eq(a, b),
            (Value::Signal, Value::Signal) => true,
            _ => false,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }
}

/// The text `print` writes and string `+` appends.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = Vec::new();
        write_value(self, f, &mut seen, true)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = Vec::new();
        write_value(self, f, &mut seen, false)
    }
}

fn write_value(
    v: &Value,
    f: &mut fmt::Formatter<'_>,
    seen: &mut Vec<*const ()>,
    top: bool,
) -> fmt::Result {
    match v {
        Value::Null => write!(f, "null"),
        Value::Bool(b) => write!(f, "{b}"),
        Value::Num(n) => write!(f, "{}", format_number(*n)),
        Value::Str(s) if top => write!(f, "{s}"),
        Value::Str(s) => write!(f, "{}", crate::frontend::quote(s)),
        Value::Record(r) => {
            let p = Rc::as_ptr(r) as *const ();
            if seen.contains(&p) {
                return write!(f, "{{...}}");
            }
            seen.push(p);
            write!(f, "{{")?;
            for (i, (k, x)) in r.borrow().fields().iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{k}: ")?;
                write_value(x, f, seen, false)?;
            }
            seen.pop();
            write!(f, "}}")
        }
        Value::Array(a) => {
            let p = Rc::as_ptr(a) as *const ();
            if seen.contains(&p) {
                return write!(f, "[...]");
            }
            seen.push(p);
            write!(f, "[")?;
            for (i, x) in a.borrow().iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_value(x, f, seen, false)?;
            }
            seen.pop();
            write!(f, "]")
        }
        Value::Closure(c) => match &c.code.name {
            Some(n) => write!(f, "<function {n}>"),
            None => write!(f, "<function>"),
        },
        Value::Native(Native::Print) => write!(f, "<native print>"),
        Value::Native(Native::Control) => write!(f, "<native control>"),
        Value::Native(Native::Rt(r)) => write!(f, "<native $rt.{}>", r.name()),
        Value::Cont(_) => write!(f, "<continuation>"),
        Value::Bounce(_) => write!(f, "<bounce>"),
        Value::Signal => write!(f, "<capture signal>"),
    }
}
