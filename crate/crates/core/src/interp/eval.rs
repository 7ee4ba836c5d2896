use std::rc::Rc;

use super::ir::{IExpr, IStmt, IStmtKind, Place};
use super::*;
use crate::frontend::ast::BinOp;

const RED_ZONE: usize = 128 * 1024;
const STACK_GROWTH: usize = 2 * 1024 * 1024;

impl Interp {
    pub(crate) fn exec_block(&mut self, stmts: &[IStmt], env: &Env) -> Result<(), Ctrl> {
        for s in stmts {
            self.exec(s, env)?;
        }
        Ok(())
    }

    fn exec(&mut self, s: &IStmt, env: &Env) -> Result<(), Ctrl> {
        let r = self.exec_inner(s, env);
        if let Err(Ctrl::Fatal(e)) = &r {
            if e.loc.is_none() {
                let mut e = e.clone();
                e.loc = Some(s.loc);
                return Err(Ctrl::Fatal(e));
            }
        }
        r
    }

    fn exec_inner(&mut self, s: &IStmt, env: &Env) -> Result<(), Ctrl> {
        self.steps += 1;
        self.cur_loc = s.loc;
        if s.trace {
            if let Some(t) = &mut self.trace {
                t.push(s.loc);
            }
        }
        match &s.kind {
            IStmtKind::Set(place, e) => {
                let v = self.eval(e, env)?;
                self.assign(place, v, env)
            }
            IStmtKind::SetField(o, name, v) => {
                let o = self.eval(o, env)?;
                let v = self.eval(v, env)?;
                match &o {
                    Value::Record(r) => {
                        r.borrow_mut().set(name, v);
                        Ok(())
                    }
                    _ => fatal(
                        ErrorKind::Type,
                        format!("cannot set field `{name}` of {}", o.type_name()),
                    ),
                }
            }
            IStmtKind::SetIndex(o, i, v) => {
                let o = self.eval(o, env)?;
                let i = self.eval(i, env)?;
                let v = self.eval(v, env)?;
                set_index(&o, &i, v)
            }
            IStmtKind::Expr(e) => {
                self.eval(e, env)?;
                Ok(())
            }
            IStmtKind::TopExpr(e) => {
                self.last_top = self.eval(e, env)?;
                Ok(())
            }
            IStmtKind::If(c, a, b) => {
                if self.eval(c, env)?.truthy() {
                    self.exec_block(a, env)
                } else {
                    self.exec_block(b, env)
                }
            }
            IStmtKind::While(c, body) => {
                while self.eval(c, env)?.truthy() {
                    self.exec_block(body, env)?;
                }
                Ok(())
            }
            IStmtKind::Return(None) => Err(Ctrl::Return(Value::Null)),
            IStmtKind::Return(Some(e)) => Err(Ctrl::Return(self.eval(e, env)?)),
            IStmtKind::TailCall(e) => {
                if !self.cfg.proper_tail_calls {
                    return Err(Ctrl::Return(self.eval(e, env)?));
                }
                self.steps += 1;
                let (f, this, args) = match e {
                    IExpr::Call { callee, args } => {
                        let f = self.eval(callee, env)?;
                        (f, Value::Null, self.eval_args(args, env)?)
                    }
                    IExpr::MethodCall { obj, name, args } => {
                        let o = self.eval(obj, env)?;
                        let f = get_field(&o, name)?;
                        (f, o, self.eval_args(args, env)?)
                    }
                    other => return Err(Ctrl::Return(self.eval(other, env)?)),
                };
                Err(Ctrl::Tail(f, this, args))
            }
            IStmtKind::Throw(e) => Err(Ctrl::Throw(self.eval(e, env)?)),
            IStmtKind::Try {
                body,
                catch,
                finally,
            } => {
                let mut r = self.exec_block(body, env);
                if let (Err(Ctrl::Throw(_)), Some((place, c))) = (&r, catch) {
                    let Err(Ctrl::Throw(v)) = r else { unreachable!() };
                    r = self.assign(place, v, env).and_then(|_| self.exec_block(c, env));
                }
                if let Some(f) = finally {
                    if matches!(r, Err(Ctrl::Fatal(_)) | Err(Ctrl::Abort)) {
                        return r;
                    }
                    self.exec_block(f, env)?;
                }
                r
            }
            IStmtKind::Block(b) => self.exec_block(b, env),
        }
    }

    fn assign(&mut self, place: &Place, v: Value, env: &Env) -> Result<(), Ctrl> {
        match place {
            Place::Local(i) => {
                env.slots.borrow_mut()[*i as usize] = v;
                Ok(())
            }
            Place::Outer(d, i) => {
                let scope = ancestor(env, *d);
                scope.slots.borrow_mut()[*i as usize] = v;
                Ok(())
            }
            Place::Unbound(x) => fatal(ErrorKind::Reference, format!("`{x}` is not declared")),
        }
    }

    fn eval_args(&mut self, args: &[IExpr], env: &Env) -> Result<Vec<Value>, Ctrl> {
        let mut out = Vec::with_capacity(args.len());
        for a in args {
            out.push(self.eval(a, env)?);
        }
        Ok(out)
    }

    pub(crate) fn eval(&mut self, e: &IExpr, env: &Env) -> Result<Value, Ctrl> {
        self.steps += 1;
        match e {
            IExpr::Const(v) => Ok(v.clone()),
            IExpr::Var(Place::Local(i)) => Ok(env.slots.borrow()[*i as usize].clone()),
            IExpr::Var(Place::Outer(d, i)) => {
                Ok(ancestor(env, *d).slots.borrow()[*i as usize].clone())
            }
            IExpr::Var(Place::Unbound(x)) => {
                fatal(ErrorKind::Reference, format!("`{x}` is not declared"))
            }
            IExpr::This => Ok(self.special_slot(env, |c| c.this_slot)),
            IExpr::Arguments => Ok(self.special_slot(env, |c| c.args_slot)),
            IExpr::RtRecord => Ok(self.rt_record.clone()),
            IExpr::ModeIs(m, eq) => {
                self.steps += 3;
                Ok(Value::Bool((self.rt.mode == *m) == *eq))
            }
            IExpr::Binary(BinOp::And, l, r) => {
                let l = self.eval(l, env)?;
                if l.truthy() {
                    self.eval(r, env)
                } else {
                    Ok(l)
                }
            }
            IExpr::Binary(BinOp::Or, l, r) => {
                let l = self.eval(l, env)?;
                if l.truthy() {
                    Ok(l)
                } else {
                    self.eval(r, env)
                }
            }
            IExpr::Binary(op, l, r) => {
                let l = self.eval(l, env)?;
                let r = self.eval(r, env)?;
                self.binary(*op, l, r)
            }
            IExpr::Call { callee, args } => {
                let f = self.eval(callee, env)?;
                let args = self.eval_args(args, env)?;
                self.call(f, Value::Null, args, false)
            }
            IExpr::MethodCall { obj, name, args } => {
                let o = self.eval(obj, env)?;
                let f = get_field(&o, name)?;
                let args = self.eval_args(args, env)?;
                self.call(f, o, args, false)
            }
            IExpr::New { callee, args } => {
                let f = self.eval(callee, env)?;
                let args = self.eval_args(args, env)?;
                if !matches!(f, Value::Closure(_)) {
                    return fatal(
                        ErrorKind::Type,
                        format!("{} is not a constructor", f.type_name()),
                    );
                }
                self.call(f, Value::record(vec![]), args, true)
            }
            IExpr::Func(code) => Ok(Value::Closure(Rc::new(Closure {
                code: code.clone(),
                env: env.clone(),
            }))),
            IExpr::Record(fields) => {
                let mut r = Record::default();
                for (k, v) in fields {
                    let v = self.eval(v, env)?;
                    r.set(k, v);
                }
                Ok(Value::Record(Rc::new(std::cell::RefCell::new(r))))
            }
            IExpr::Array(items) => Ok(Value::array(self.eval_args(items, env)?)),
            IExpr::Field(o, name) => {
                let o = self.eval(o, env)?;
                get_field(&o, name)
            }
            IExpr::Index(o, i) => {
                let o = self.eval(o, env)?;
                let i = self.eval(i, env)?;
                get_index(&o, &i)
            }
        }
    }

    /// `this` and `arguments` live in slots reserved by the resolver; the
    /// top level has neither bound.
    fn special_slot(&self, env: &Env, pick: impl Fn(&ir::FnCode) -> Option<usize>) -> Value {
        match self.acts.last() {
            Some(act) if env.parent.is_some() => match pick(&act.closure.code) {
                Some(i) => env.slots.borrow()[i].clone(),
                None => Value::Null,
            },
            _ => Value::Null,
        }
    }

    pub(crate) fn binary(&mut self, op: BinOp, l: Value, r: Value) -> Result<Value, Ctrl> {
        match op {
            BinOp::Eq => return Ok(Value::Bool(l.loose_eq(&r))),
            BinOp::Ne => return Ok(Value::Bool(!l.loose_eq(&r))),
            _ => {}
        }
        let plus = op == BinOp::Add;
        let l = self.to_primitive(l, plus)?;
        let r = self.to_primitive(r, plus)?;
        let num = |v: &Value| v.as_num();
        let result = match (op, &l, &r) {
            (BinOp::Add, Value::Num(a), Value::Num(b)) => Value::Num(a + b),
            (BinOp::Add, Value::Str(_), _) | (BinOp::Add, _, Value::Str(_)) => {
                Value::Str(format!("{l}{r}").into())
            }
            (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge, Value::Str(a), Value::Str(b)) => {
                Value::Bool(match op {
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    _ => a >= b,
                })
            }
            _ => match (num(&l), num(&r)) {
                (Some(a), Some(b)) => match op {
                    BinOp::Sub => Value::Num(a - b),
                    BinOp::Mul => Value::Num(a * b),
                    BinOp::Div => Value::Num(a / b),
                    BinOp::Mod => Value::Num(a % b),
                    BinOp::Lt => Value::Bool(a < b),
                    BinOp::Le => Value::Bool(a <= b),
                    BinOp::Gt => Value::Bool(a > b),
                    BinOp::Ge => Value::Bool(a >= b),
                    _ => unreachable!("non-arithmetic operator {op:?}"),
                },
                _ => {
                    return fatal(
                        ErrorKind::Type,
                        format!(
                            "cannot apply `{}` to {} and {}",
                            op.symbol(),
                            l.type_name(),
                            r.type_name()
                        ),
                    )
                }
            },
        };
        Ok(result)
    }

    /// Implicit conversion of a record operand through its `toString` (for
    /// `+`) or `valueOf` method.
    pub(crate) fn to_primitive(&mut self, v: Value, plus: bool) -> Result<Value, Ctrl> {
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
                let res = self.call_uninstrumented(f, v.clone(), Vec::new())?;
                if res.is_primitive() {
                    return Ok(res);
                }
            }
        }
        fatal(ErrorKind::Type, "cannot convert record to a primitive")
    }

    /// Call from inside the interpreter itself, where a capture cannot be
    /// reified.
    pub(crate) fn call_uninstrumented(
        &mut self,
        f: Value,
        this: Value,
        args: Vec<Value>,
    ) -> Result<Value, Ctrl> {
        self.rt.native_depth += 1;
        let r = self.call(f, this, args, false);
        self.rt.native_depth -= 1;
        let capturing = self.rt.capturing() || matches!(r, Err(Ctrl::Throw(Value::Signal)));
        if capturing {
            self.rt.abandon_capture();
            return fatal(
                ErrorKind::CaptureInUninstrumentedCode,
                "a continuation was captured inside an implicit conversion",
            );
        }
        r
    }

    /// Apply `f`. With `construct`, `this` is the freshly allocated object
    /// and a primitive result is replaced by it.
    pub(crate) fn call(
        &mut self,
        mut f: Value,
        mut this: Value,
        mut args: Vec<Value>,
        construct: bool,
    ) -> Result<Value, Ctrl> {
        let ctor_this = construct.then(|| this.clone());
        let mut new_target = construct;
        let v = loop {
            let v = match f {
                Value::Closure(c) => {
                    if self.depth >= self.cfg.host_stack_limit {
                        return fatal(
                            ErrorKind::StackOverflow,
                            format!(
                                "maximum call stack size ({}) exceeded",
                                self.cfg.host_stack_limit
                            ),
                        );
                    }
                    self.depth += 1;
                    self.max_depth = self.max_depth.max(self.depth);
                    let r = stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || {
                        self.invoke(&c, this, args, new_target)
                    });
                    self.depth -= 1;
                    match r {
                        Ok(()) => Value::Null,
                        // Trampolined tail calls run here, at the caller's depth.
                        Err(Ctrl::Return(Value::Bounce(b))) if self.rt.is_normal() => {
                            f = b.callee.clone();
                            this = b.this.clone();
                            args = b.args.clone();
                            new_target = false;
                            continue;
                        }
                        Err(Ctrl::Return(v)) => v,
                        Err(Ctrl::Tail(g, t, a)) => {
                            f = g;
                            this = t;
                            args = a;
                            new_target = false;
                            continue;
                        }
                        Err(e) => return Err(e),
                    }
                }
                Value::Native(n) => self.call_native(n, this, args)?,
                Value::Cont(k) => return self.apply_continuation(&k, args),
                other => {
                    return fatal(
                        ErrorKind::Type,
                        format!("{} is not a function", other.type_name()),
                    )
                }
            };
            break v;
        };
        match ctor_this {
            Some(t) if v.is_primitive() => Ok(t),
            _ => Ok(v),
        }
    }

    /// Re-apply a closure with a given call kind, without allocating a new
    /// receiver for constructor calls.
    pub(crate) fn reapply(
        &mut self,
        f: Value,
        this: Value,
        args: Vec<Value>,
        construct: bool,
    ) -> Result<Value, Ctrl> {
        self.call(f, this, args, construct)
    }

    fn invoke(
        &mut self,
        c: &Rc<Closure>,
        this: Value,
        args: Vec<Value>,
        new_target: bool,
    ) -> Result<(), Ctrl> {
        let code = &c.code;
        if self.strict_arity && args.len() != code.nparams {
            return fatal(
                ErrorKind::Arity,
                format!(
                    "{} expects {} argument(s), got {}",
                    code.name.as_deref().unwrap_or("function"),
                    code.nparams,
                    args.len()
                ),
            );
        }
        let mut slots = vec![Value::Null; code.nslots];
        if let Some(i) = code.args_slot {
            slots[i] = Value::array(args.clone());
        }
        if let Some(i) = code.this_slot {
            slots[i] = this;
        }
        for (i, a) in args.into_iter().take(code.nparams).enumerate() {
            slots[i] = a;
        }
        let env = Rc::new(Scope {
            slots: std::cell::RefCell::new(slots),
            parent: Some(c.env.clone()),
        });
        self.acts.push(Act {
            closure: c.clone(),
            new_target,
        });
        let r = self.exec_block(&code.body, &env);
        self.acts.pop();
        r
    }

    pub(crate) fn current_closure(&self) -> Value {
        self.acts
            .last()
            .map_or(Value::Null, |a| Value::Closure(a.closure.clone()))
    }

    pub(crate) fn current_new_target(&self) -> bool {
        self.acts.last().is_some_and(|a| a.new_target)
    }

    fn call_native(&mut self, n: Native, this: Value, args: Vec<Value>) -> Result<Value, Ctrl> {
        match n {
            Native::Print => {
                let line = args
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                if let Some(sink) = &mut self.on_output {
                    sink(&line);
                }
                self.outputs.push(line);
                Ok(Value::Null)
            }
            Native::Control => {
                if !self.rt.configured {
                    return fatal(
                        ErrorKind::Runtime,
                        "`control` requires an instrumented program",
                    );
                }
                let f = args.into_iter().next().unwrap_or(Value::Null);
                self.control(f)
            }
            Native::Rt(f) => self.rt_call(f, this, args),
        }
    }
}

fn ancestor(env: &Env, depth: u32) -> &Env {
    let mut e = env;
    for _ in 0..depth {
        e = e.parent.as_ref().expect("resolved scope depth");
    }
    e
}

pub(crate) fn get_field(o: &Value, name: &str) -> Result<Value, Ctrl> {
    match o {
        Value::Record(r) => Ok(r.borrow().get(name).cloned().unwrap_or(Value::Null)),
        Value::Array(a) if name == "length" => Ok(Value::Num(a.borrow().len() as f64)),
        Value::Str(s) if name == "length" => Ok(Value::Num(s.chars().count() as f64)),
        Value::Array(_) | Value::Str(_) => Ok(Value::Null),
        _ => fatal(
            ErrorKind::Type,
            format!("cannot read field `{name}` of {}", o.type_name()),
        ),
    }
}

fn as_index(i: &Value) -> Option<usize> {
    match i {
        Value::Num(n) if *n >= 0.0 && n.fract() == 0.0 && *n < 1e9 => Some(*n as usize),
        _ => None,
    }
}

pub(crate) fn get_index(o: &Value, i: &Value) -> Result<Value, Ctrl> {
    match (o, i) {
        (Value::Array(a), Value::Num(_)) => {
            Ok(as_index(i).and_then(|k| a.borrow().get(k).cloned()).unwrap_or(Value::Null))
        }
        (Value::Str(s), Value::Num(_)) => Ok(as_index(i)
            .and_then(|k| s.chars().nth(k))
            .map_or(Value::Null, |c| Value::Str(c.to_string().into()))),
        (Value::Record(r), Value::Str(k)) => Ok(r.borrow().get(k).cloned().unwrap_or(Value::Null)),
        (_, Value::Str(k)) => get_field(o, k),
        _ => fatal(
            ErrorKind::Type,
            format!("cannot index {} with {}", o.type_name(), i.type_name()),
        ),
    }
}

fn set_index(o: &Value, i: &Value, v: Value) -> Result<(), Ctrl> {
    match (o, i) {
        (Value::Array(a), Value::Num(_)) => match as_index(i) {
            Some(k) => {
                let mut a = a.borrow_mut();
                if k >= a.len() {
                    a.resize(k + 1, Value::Null);
                }
                a[k] = v;
                Ok(())
            }
            None => fatal(ErrorKind::Type, "array index must be a non-negative integer"),
        },
        (Value::Record(r), Value::Str(k)) => {
            r.borrow_mut().set(k, v);
            Ok(())
        }
        _ => fatal(
            ErrorKind::Type,
            format!("cannot index {} with {}", o.type_name(), i.type_name()),
        ),
    }
}
