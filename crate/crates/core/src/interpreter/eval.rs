use std::cell::RefCell;
use std::rc::Rc;

use crate::frontend::ast::BinOp;

use super::lower::{Ir, IrStmt, Runtime};

/// Nested call limit; deeper recursion is a runtime error.
pub(crate) const MAX_CALL_DEPTH: u32 = 1000;

#[derive(Debug)]
pub(crate) struct Obj {
    class: u32,
    fields: RefCell<Vec<Value>>,
}

#[derive(Debug, Clone)]
pub(crate) enum Value {
    Int(i32),
    Bool(bool),
    Null,
    Obj(Rc<Obj>),
    Void,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Halt {
    AssertFail,
    Runtime(String),
    Timeout,
}

enum Flow {
    Normal,
    Return(Value),
}

pub(crate) struct Machine<'r> {
    rt: &'r Runtime,
    statics: Vec<Value>,
    pub steps: u64,
    budget: u64,
    depth: u32,
}

struct Frame {
    this: Option<Rc<Obj>>,
    locals: Vec<Value>,
}

type R<T> = Result<T, Halt>;

fn rt_err<T>(msg: impl Into<String>) -> R<T> {
    Err(Halt::Runtime(msg.into()))
}

impl<'r> Machine<'r> {
    pub fn new(rt: &'r Runtime, budget: u64) -> Self {
        Machine {
            rt,
            statics: vec![Value::Null; rt.statics.len()],
            steps: 0,
            budget,
            depth: 0,
        }
    }

    #[inline]
    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps >= self.budget {
            Err(Halt::Timeout)
        } else {
            Ok(())
        }
    }

    /// Runs static initializers in program order.
    pub fn init_statics(&mut self) -> R<()> {
        let mut frame = Frame {
            this: None,
            locals: Vec::new(),
        };
        for i in 0..self.rt.statics.len() {
            let v = self.eval(&self.rt.statics[i].init, &mut frame)?;
            self.statics[i] = v;
        }
        Ok(())
    }

    pub fn instantiate(&mut self, class: u32) -> R<Rc<Obj>> {
        let rc = &self.rt.classes[class as usize];
        let obj = Rc::new(Obj {
            class,
            fields: RefCell::new(vec![Value::Null; rc.field_count as usize]),
        });
        let mut frame = Frame {
            this: Some(obj.clone()),
            locals: Vec::new(),
        };
        for (slot, init) in &rc.inits {
            let v = self.eval(init, &mut frame)?;
            obj.fields.borrow_mut()[*slot as usize] = v;
        }
        Ok(obj)
    }

    pub fn invoke(&mut self, method: u32, this: Option<Rc<Obj>>, args: Vec<Value>) -> R<Value> {
        if self.depth >= MAX_CALL_DEPTH {
            return rt_err("call depth limit exceeded");
        }
        let m = &self.rt.methods[method as usize];
        let mut locals = args;
        locals.resize(m.frame_size as usize, Value::Null);
        let mut frame = Frame { this, locals };
        self.depth += 1;
        let flow = self.exec_block(&m.body, &mut frame);
        self.depth -= 1;
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal if m.returns_value => {
                rt_err(format!("`{}` finished without a value", m.name))
            }
            Flow::Normal => Ok(Value::Void),
        }
    }

    fn exec_block(&mut self, stmts: &[IrStmt], frame: &mut Frame) -> R<Flow> {
        for s in stmts {
            if let Flow::Return(v) = self.exec(s, frame)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn exec(&mut self, s: &IrStmt, frame: &mut Frame) -> R<Flow> {
        self.tick()?;
        match s {
            IrStmt::SetLocal(slot, e) => {
                let v = self.eval(e, frame)?;
                frame.locals[*slot as usize] = v;
            }
            IrStmt::SetField(obj, slot, e) => {
                let o = self.eval_obj(obj, frame)?;
                let v = self.eval(e, frame)?;
                o.fields.borrow_mut()[*slot as usize] = v;
            }
            IrStmt::SetStatic(idx, e) => {
                let v = self.eval(e, frame)?;
                self.statics[*idx as usize] = v;
            }
            IrStmt::If(c, t, e) => {
                let branch = if self.eval_bool(c, frame)? { t } else { e };
                return self.exec_block(branch, frame);
            }
            IrStmt::While(c, body) => {
                while self.eval_bool(c, frame)? {
                    if let Flow::Return(v) = self.exec_block(body, frame)? {
                        return Ok(Flow::Return(v));
                    }
                    self.tick()?;
                }
            }
            IrStmt::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, frame)?,
                    None => Value::Void,
                };
                return Ok(Flow::Return(v));
            }
            IrStmt::Assert(e) => {
                if !self.eval_bool(e, frame)? {
                    return Err(Halt::AssertFail);
                }
            }
            IrStmt::Expr(e) => {
                self.eval(e, frame)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn eval_int(&mut self, e: &Ir, frame: &mut Frame) -> R<i32> {
        match self.eval(e, frame)? {
            Value::Int(v) => Ok(v),
            other => rt_err(format!("expected int, found {other:?}")),
        }
    }

    fn eval_bool(&mut self, e: &Ir, frame: &mut Frame) -> R<bool> {
        match self.eval(e, frame)? {
            Value::Bool(b) => Ok(b),
            other => rt_err(format!("expected bool, found {other:?}")),
        }
    }

    fn eval_obj(&mut self, e: &Ir, frame: &mut Frame) -> R<Rc<Obj>> {
        match self.eval(e, frame)? {
            Value::Obj(o) => Ok(o),
            Value::Null => rt_err("null receiver"),
            other => rt_err(format!("expected object, found {other:?}")),
        }
    }

    fn eval_args(&mut self, args: &[Ir], frame: &mut Frame) -> R<Vec<Value>> {
        let mut out = Vec::with_capacity(args.len());
        for a in args {
            out.push(self.eval(a, frame)?);
        }
        Ok(out)
    }

    fn eval(&mut self, e: &Ir, frame: &mut Frame) -> R<Value> {
        self.tick()?;
        Ok(match e {
            Ir::Int(v) => Value::Int(*v),
            Ir::Bool(b) => Value::Bool(*b),
            Ir::Null => Value::Null,
            Ir::This => match &frame.this {
                Some(o) => Value::Obj(o.clone()),
                None => return rt_err("`this` in static context"),
            },
            Ir::Local(slot) => frame.locals[*slot as usize].clone(),
            Ir::Field(obj, slot) => {
                let o = self.eval_obj(obj, frame)?;
                let v = o.fields.borrow()[*slot as usize].clone();
                v
            }
            Ir::Static(idx) => self.statics[*idx as usize].clone(),
            Ir::Virtual {
                recv,
                selector,
                args,
            } => {
                let o = self.eval_obj(recv, frame)?;
                let args = self.eval_args(args, frame)?;
                let class = &self.rt.classes[o.class as usize];
                let Some(method) = class.vtable[*selector as usize] else {
                    return rt_err("no method for selector");
                };
                self.invoke(method, Some(o), args)?
            }
            Ir::StaticCall { method, args } => {
                let args = self.eval_args(args, frame)?;
                self.invoke(*method, None, args)?
            }
            Ir::New(class) => Value::Obj(self.instantiate(*class)?),
            Ir::Bin(op, l, r) => return self.binary(*op, l, r, frame),
            Ir::Neg(inner) => Value::Int(self.eval_int(inner, frame)?.wrapping_neg()),
            Ir::Not(inner) => Value::Bool(!self.eval_bool(inner, frame)?),
            Ir::Abs(inner) => Value::Int(self.eval_int(inner, frame)?.wrapping_abs()),
            Ir::Reflect(target, name) => {
                let o = self.eval_obj(target, frame)?;
                let method = self
                    .rt
                    .selectors
                    .get(name)
                    .and_then(|sel| self.rt.classes[o.class as usize].vtable[*sel as usize]);
                let Some(method) = method else {
                    return rt_err(format!("reflect_call: no method named `{name}`"));
                };
                let m = &self.rt.methods[method as usize];
                if m.param_count != 0 {
                    return rt_err(format!("reflect_call: `{}` takes parameters", m.name));
                }
                let (returns_value, returns_int) = (m.returns_value, m.returns_int);
                match self.invoke(method, Some(o), Vec::new())? {
                    Value::Int(v) if returns_int => Value::Int(v),
                    Value::Void if !returns_value => Value::Int(0),
                    _ => return rt_err(format!("reflect_call: `{name}` does not return int")),
                }
            }
        })
    }

    fn binary(&mut self, op: BinOp, l: &Ir, r: &Ir, frame: &mut Frame) -> R<Value> {
        match op {
            BinOp::And => {
                return Ok(Value::Bool(
                    self.eval_bool(l, frame)? && self.eval_bool(r, frame)?,
                ));
            }
            BinOp::Or => {
                return Ok(Value::Bool(
                    self.eval_bool(l, frame)? || self.eval_bool(r, frame)?,
                ));
            }
            _ => {}
        }
        let lv = self.eval(l, frame)?;
        let rv = self.eval(r, frame)?;
        let v = match (op, lv, rv) {
            (BinOp::Eq, a, b) => Value::Bool(values_equal(&a, &b)),
            (BinOp::Ne, a, b) => Value::Bool(!values_equal(&a, &b)),
            (op, Value::Int(a), Value::Int(b)) => match op {
                BinOp::Add => Value::Int(a.wrapping_add(b)),
                BinOp::Sub => Value::Int(a.wrapping_sub(b)),
                BinOp::Mul => Value::Int(a.wrapping_mul(b)),
                BinOp::Div if b == 0 => return rt_err("division by zero"),
                BinOp::Div => Value::Int(a.wrapping_div(b)),
                BinOp::Rem if b == 0 => return rt_err("modulo by zero"),
                BinOp::Rem => Value::Int(a.wrapping_rem(b)),
                BinOp::Lt => Value::Bool(a < b),
                BinOp::Le => Value::Bool(a <= b),
                BinOp::Gt => Value::Bool(a > b),
                BinOp::Ge => Value::Bool(a >= b),
                _ => unreachable!("handled above"),
            },
            (op, a, b) => return rt_err(format!("operator {} on {a:?} and {b:?}", op.symbol())),
        };
        Ok(v)
    }
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x == y,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Null, Value::Null) => true,
        (Value::Obj(x), Value::Obj(y)) => Rc::ptr_eq(x, y),
        _ => false,
    }
}
