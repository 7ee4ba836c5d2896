//! The `$rt` intrinsics called by instrumented code.

use std::rc::Rc;

use super::estimator::TimerKind;
use super::state::{BreakReason, Entry, Mode, Receiver, RtOptions, Strategy};
use crate::frontend::SourceLoc;
use crate::interp::{fatal, Continuation, Ctrl, ErrorKind, Interp, RtFn, Value};

fn arg(args: &[Value], i: usize) -> Value {
    args.get(i).cloned().unwrap_or(Value::Null)
}

fn field(rec: &Value, name: &str) -> Value {
    match rec {
        Value::Record(r) => r.borrow().get(name).cloned().unwrap_or(Value::Null),
        _ => Value::Null,
    }
}

fn num(v: &Value) -> f64 {
    v.as_num().unwrap_or(0.0)
}

impl Interp {
    pub(crate) fn rt_call(&mut self, f: RtFn, _this: Value, args: Vec<Value>) -> Result<Value, Ctrl> {
        match f {
            RtFn::Configure => {
                let c = arg(&args, 0);
                let mut o = RtOptions::default();
                if let Value::Str(s) = field(&c, "cont") {
                    o.strategy = s.parse::<Strategy>().unwrap_or_default();
                }
                if let Value::Str(s) = field(&c, "timer") {
                    o.timer = s.parse::<TimerKind>().unwrap_or_default();
                }
                if let Value::Num(n) = field(&c, "yieldInterval") {
                    o.delta = n;
                }
                if let Value::Num(n) = field(&c, "resample") {
                    o.resample = n;
                }
                if let Value::Num(n) = field(&c, "countdown") {
                    o.countdown_n = n.max(1.0) as u64;
                }
                if let Value::Str(s) = field(&c, "stacks") {
                    o.deep = &*s == "deep";
                }
                if let Value::Num(n) = field(&c, "depthLimit") {
                    o.depth_limit = n.max(1.0) as i64;
                }
                self.rt.configure(o);
                Ok(Value::Null)
            }
            RtFn::Mode => Ok(Value::str(self.rt.mode.name())),
            RtFn::PushFrame => {
                self.rt.stack.push(arg(&args, 0));
                Ok(Value::Null)
            }
            RtFn::DropFrame => {
                self.rt.stack.pop();
                Ok(Value::Null)
            }
            RtFn::StackHeight => Ok(Value::Num(self.rt.stack.len() as f64)),
            RtFn::Truncate => {
                let h = num(&arg(&args, 0)) as usize;
                self.rt.stack.truncate(h);
                Ok(Value::Null)
            }
            RtFn::PopFrame => match self.rt.restoring.pop() {
                Some(Entry::Frame(f)) => Ok(f),
                _ => fatal(ErrorKind::Runtime, "no frame to restore"),
            },
            RtFn::TopFrame => match self.rt.restoring.last() {
                Some(Entry::Frame(f)) => Ok(f.clone()),
                _ => Ok(Value::Null),
            },
            RtFn::Reenter => match self.rt.restoring.last() {
                Some(Entry::Deliver(_)) => {
                    let Some(Entry::Deliver(d)) = self.rt.restoring.pop() else {
                        unreachable!()
                    };
                    self.rt.set_mode(Mode::Normal);
                    d.map_err(Ctrl::Throw)
                }
                Some(Entry::Frame(f)) => {
                    let reenter = field(f, "reenter");
                    self.call(reenter, Value::Null, Vec::new(), false)
                }
                None => fatal(ErrorKind::Runtime, "nothing to restore"),
            },
            RtFn::Reapply => {
                let f = arg(&args, 0);
                let this = arg(&args, 1);
                let list = match arg(&args, 2) {
                    Value::Array(a) => a.borrow().clone(),
                    _ => Vec::new(),
                };
                let construct = arg(&args, 3).truthy();
                self.reapply(f, this, list, construct)
            }
            RtFn::Callee => Ok(self.current_closure()),
            RtFn::NewTarget => Ok(Value::Bool(self.current_new_target())),
            RtFn::Control => self.control(arg(&args, 0)),
            RtFn::MaySuspend => {
                let kind = num(&arg(&args, 0)) as u32;
                let loc = SourceLoc::new(num(&arg(&args, 1)) as u32, num(&arg(&args, 2)) as u32);
                self.may_suspend(kind, loc)
            }
            RtFn::EnterCall => {
                self.rt.depth += 1;
                Ok(Value::Num(self.rt.depth as f64))
            }
            RtFn::SetDepth => {
                self.rt.depth = num(&arg(&args, 0)) as i64;
                Ok(Value::Null)
            }
            RtFn::Call => {
                let mut it = args.into_iter();
                let f = it.next().unwrap_or(Value::Null);
                let this = it.next().unwrap_or(Value::Null);
                self.call(f, this, it.collect(), false)
            }
            RtFn::CtorResult => {
                let r = arg(&args, 0);
                Ok(if r.is_primitive() { arg(&args, 1) } else { r })
            }
            RtFn::ToPrimNum => self.to_primitive_exposed(arg(&args, 0), false),
            RtFn::ToPrimPlus => self.to_primitive_exposed(arg(&args, 0), true),
            RtFn::Bounce => {
                let mut it = args.into_iter();
                let callee = it.next().unwrap_or(Value::Null);
                let this = it.next().unwrap_or(Value::Null);
                Ok(Value::Bounce(Rc::new(crate::interp::Bounce {
                    callee,
                    this,
                    args: it.collect(),
                })))
            }
            RtFn::StrictArity => {
                self.strict_arity = true;
                Ok(Value::Null)
            }
        }
    }

    /// Like the interpreter's own conversion, but the method call may
    /// capture: it is a labeled call site in the instrumented caller.
    fn to_primitive_exposed(&mut self, v: Value, plus: bool) -> Result<Value, Ctrl> {
        let Value::Record(r) = &v else {
            return Ok(v);
        };
        let order = if plus {
            ["toString", "valueOf"]
        } else {
            ["valueOf", "toString"]
        };
        for m in order {
            let f = r.borrow().get(m).cloned();
            if let Some(f @ (Value::Closure(_) | Value::Native(_))) = f {
                let res = self.call(f, v.clone(), Vec::new(), false)?;
                if !self.rt.is_normal() || res.is_primitive() {
                    return Ok(res);
                }
            }
        }
        fatal(ErrorKind::Type, "cannot convert record to a primitive")
    }

    fn begin_capture(&mut self, receiver: Receiver, frame: Value) -> Result<Value, Ctrl> {
        if !self.rt.is_normal() {
            return fatal(ErrorKind::Runtime, "capture outside normal mode");
        }
        self.rt.receiver = Some(receiver);
        self.rt.stack.push(frame);
        self.rt.set_mode(Mode::Capture);
        match self.rt.opts.strategy {
            Strategy::Checked => Ok(Value::Null),
            Strategy::Exceptional | Strategy::Eager => Err(Ctrl::Throw(Value::Signal)),
        }
    }

    pub(crate) fn control(&mut self, f: Value) -> Result<Value, Ctrl> {
        if !self.rt.configured {
            return fatal(ErrorKind::Runtime, "`control` requires an instrumented program");
        }
        let frame = Value::record(vec![("reenter", f.clone())]);
        self.begin_capture(Receiver::User(f), frame)
    }

    pub(crate) fn apply_continuation(
        &mut self,
        k: &Rc<Continuation>,
        args: Vec<Value>,
    ) -> Result<Value, Ctrl> {
        self.rt.applied = Some((k.clone(), arg(&args, 0)));
        Err(Ctrl::Abort)
    }

    /// Suspend point. `kind` is 0 at function entries and loop back edges,
    /// 1 before a statement and 2 before the first statement on a line.
    fn may_suspend(&mut self, kind: u32, loc: SourceLoc) -> Result<Value, Ctrl> {
        let marker = |what: &str| Value::record(vec![("receiver", Value::str(what))]);
        if self.rt.native_depth > 0 {
            // Inside a conversion the interpreter runs itself; defer to the
            // next suspend point.
            return Ok(Value::Null);
        }
        if self.rt.opts.deep && self.rt.depth >= self.rt.opts.depth_limit {
            self.rt.deep_captures += 1;
            return self.begin_capture(Receiver::Deep, marker("deep"));
        }
        if kind >= 1 && self.rt.stepping {
            self.rt.stepping = false;
            return self.begin_capture(Receiver::Break(loc, BreakReason::Step), marker("break"));
        }
        if kind == 2 && self.rt.breakpoints.contains(&loc.line) {
            return self.begin_capture(
                Receiver::Break(loc, BreakReason::Breakpoint),
                marker("break"),
            );
        }
        let t = self.now_ms();
        let now = move || t;
        if self.rt.estimator.estimate_elapsed(now) >= self.rt.opts.delta {
            self.rt.estimator.reset_time(now);
            self.rt.yield_times.push(t);
            return self.begin_capture(Receiver::Suspend(loc), marker("suspend"));
        }
        Ok(Value::Null)
    }
}
