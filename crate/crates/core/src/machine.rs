// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! The small-step stack machine.
//!
//! A configuration is a stack of frames, the contract state, the current
//! variable environment, and the remaining gas. The machine always rewrites
//! the top frame:
//!
//! - statements execute (one unit of gas each, except `;` and `throw`, which
//!   only reshape the stack but still require gas to keep the semantics
//!   deterministic);
//! - a saved variable environment restores itself when a call's body is done
//!   (`ss-return`), and a scope-end marker drops the newest local
//!   (`ss-delv`) — both free and possible even at zero gas;
//! - a statement on top with zero gas left raises `oog`;
//! - a failed side condition raises `neg` (the balance check of a call) or
//!   `rte` (everything else), leaving the offending statement on the stack
//!   and the gas untouched.
//!
//! An exception frame on top has no successor: execution halts.
//!
//! Expressions evaluate in a separate, pure, gas-free relation
//! ([`eval_expr`]); expression failures surface as `rte` at the statement
//! that triggered them.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::env::{MethodTable, State, VarEnv, balance_of, state_update_field};
use crate::syntax::{Addr, BALANCE, BaseType, Expr, LVal, OpKind, Stm, TOP_IFACE, Value};
use crate::typesys::{TypeEnv, VarTypes, type_expr};

/// Exception labels. `rte` is ill-formed code at runtime, `neg` a failed
/// balance check, `oog` gas exhaustion, `pge` a user `throw`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExcLabel {
    Rte,
    Neg,
    Oog,
    Pge,
}

impl ExcLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ExcLabel::Rte => "rte",
            ExcLabel::Neg => "neg",
            ExcLabel::Oog => "oog",
            ExcLabel::Pge => "pge",
        }
    }
}

impl std::fmt::Display for ExcLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stack frames. An exception frame only ever appears at the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    Stm(Stm),
    Env(VarEnv),
    ScopeEnd(String),
    Exc(ExcLabel),
}

/// A machine configuration. The stack's top is the last element; the bottom
/// of the stack is simply the empty vector. Gas never increases along a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub stack: Vec<Frame>,
    pub state: State,
    pub vars: VarEnv,
    pub gas: BigInt,
}

impl Config {
    pub fn initial(stm: Stm, state: State, vars: VarEnv, gas: BigInt) -> Self {
        Config {
            stack: vec![Frame::Stm(stm)],
            state,
            vars,
            gas,
        }
    }

    pub fn top(&self) -> Option<&Frame> {
        self.stack.last()
    }

    /// The terminal outcome, if the configuration has no successor.
    pub fn terminal(&self) -> Option<Terminal> {
        match self.stack.last() {
            None => Some(Terminal::Done),
            Some(Frame::Exc(l)) => Some(Terminal::Exception(*l)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    Done,
    Exception(ExcLabel),
}

/// One line of a run trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub rule: &'static str,
    pub gas_before: BigInt,
    pub gas_after: BigInt,
    /// Stack depth after the step.
    pub stack_depth: usize,
    pub exception: Option<ExcLabel>,
}

impl StepRecord {
    pub fn to_json(&self) -> serde_json::Value {
        let big = |n: &BigInt| {
            serde_json::Value::Number(serde_json::Number::from_string_unchecked(n.to_string()))
        };
        let mut obj = serde_json::Map::new();
        obj.insert("rule".into(), serde_json::Value::String(self.rule.into()));
        obj.insert("gas_before".into(), big(&self.gas_before));
        obj.insert("gas_after".into(), big(&self.gas_after));
        obj.insert(
            "stack_depth".into(),
            serde_json::Value::from(self.stack_depth),
        );
        if let Some(l) = self.exception {
            obj.insert(
                "exception".into(),
                serde_json::Value::String(l.as_str().into()),
            );
        }
        serde_json::Value::Object(obj)
    }
}

pub enum StepOutcome {
    Continue { config: Config, record: StepRecord },
    Terminal { terminal: Terminal, config: Config },
}

/// The result of iterating [`Machine::step`] to a terminal configuration.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub terminal: Terminal,
    pub config: Config,
    pub trace: Vec<StepRecord>,
}

impl RunResult {
    pub fn gas_used(&self, initial: &BigInt) -> BigInt {
        initial - &self.config.gas
    }
}

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("address `{0}` does not exist")]
    UnknownAddress(Addr),
    #[error("`{addr}` has no field `{field}`")]
    MissingField { addr: Addr, field: String },
    #[error("expected an address, found {0}")]
    NotAnAddress(Value),
    #[error("operator `{op}` cannot be applied to ({})", values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))]
    OperatorMismatch { op: OpKind, values: Vec<Value> },
    #[error("division by zero")]
    DivisionByZero,
}

/// Applies an operator to already-evaluated operands.
pub fn apply_op(op: OpKind, values: &[Value]) -> Result<Value, EvalError> {
    use Value::*;
    let mismatch = || EvalError::OperatorMismatch {
        op,
        values: values.to_vec(),
    };
    if values.len() != op.arity() {
        return Err(mismatch());
    }
    Ok(match op {
        OpKind::Add | OpKind::Sub | OpKind::Mul | OpKind::Div => {
            let (Int(a), Int(b)) = (&values[0], &values[1]) else {
                return Err(mismatch());
            };
            match op {
                OpKind::Add => Int(a + b),
                OpKind::Sub => Int(a - b),
                OpKind::Mul => Int(a * b),
                OpKind::Div => {
                    if b.is_zero() {
                        return Err(EvalError::DivisionByZero);
                    }
                    // BigInt division truncates toward zero.
                    Int(a / b)
                }
                _ => unreachable!(),
            }
        }
        OpKind::Lt | OpKind::Le | OpKind::Gt | OpKind::Ge => {
            let (Int(a), Int(b)) = (&values[0], &values[1]) else {
                return Err(mismatch());
            };
            Bool(match op {
                OpKind::Lt => a < b,
                OpKind::Le => a <= b,
                OpKind::Gt => a > b,
                OpKind::Ge => a >= b,
                _ => unreachable!(),
            })
        }
        OpKind::Eq => match (&values[0], &values[1]) {
            (Int(a), Int(b)) => Bool(a == b),
            (Bool(a), Bool(b)) => Bool(a == b),
            (Addr(a), Addr(b)) => Bool(a == b),
            _ => return Err(mismatch()),
        },
        OpKind::And | OpKind::Or => {
            let (Bool(a), Bool(b)) = (&values[0], &values[1]) else {
                return Err(mismatch());
            };
            Bool(if op == OpKind::And {
                *a && *b
            } else {
                *a || *b
            })
        }
        OpKind::Not => {
            let Bool(a) = &values[0] else {
                return Err(mismatch());
            };
            Bool(!a)
        }
    })
}

/// Pure, gas-free expression evaluation. All operands of an operator are
/// evaluated (no short-circuiting).
pub fn eval_expr(state: &State, vars: &VarEnv, e: &Expr) -> Result<Value, EvalError> {
    match e {
        Expr::Val(v) => Ok(v.clone()),
        Expr::Var(x) => vars
            .lookup(x)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(x.clone())),
        Expr::Balance(recv) => read_field(state, vars, recv, BALANCE),
        Expr::Field(recv, p) => read_field(state, vars, recv, p),
        Expr::Op(op, args) => {
            let values = args
                .iter()
                .map(|a| eval_expr(state, vars, a))
                .collect::<Result<Vec<_>, _>>()?;
            apply_op(*op, &values)
        }
    }
}

fn read_field(state: &State, vars: &VarEnv, recv: &Expr, field: &str) -> Result<Value, EvalError> {
    let addr = match eval_expr(state, vars, recv)? {
        Value::Addr(a) => a,
        other => return Err(EvalError::NotAnAddress(other)),
    };
    let fields = state
        .get(&addr)
        .ok_or_else(|| EvalError::UnknownAddress(addr.clone()))?;
    fields
        .get(field)
        .cloned()
        .ok_or_else(|| EvalError::MissingField {
            addr,
            field: field.to_string(),
        })
}

// ---------------------------------------------------------------------------
// The machine
// ---------------------------------------------------------------------------

/// The machine executes against a constant method table and the program's
/// type environment. The latter plays no role in control flow; it only
/// supplies the type annotations a call stores for the bindings it creates
/// (`this`, `sender`, `value`, and the formal parameters), which the
/// conformance layer compares against extracted type environments.
pub struct Machine<'a> {
    table: &'a MethodTable,
    types: &'a TypeEnv,
}

impl<'a> Machine<'a> {
    pub fn new(table: &'a MethodTable, types: &'a TypeEnv) -> Self {
        Machine { table, types }
    }

    pub fn table(&self) -> &MethodTable {
        self.table
    }

    pub fn types(&self) -> &TypeEnv {
        self.types
    }

    /// Performs one transition, or reports the configuration terminal.
    pub fn step(&self, c: Config) -> StepOutcome {
        if let Some(terminal) = c.terminal() {
            return StepOutcome::Terminal {
                terminal,
                config: c,
            };
        }
        let Config {
            mut stack,
            state,
            vars,
            gas,
        } = c;
        let gas_before = gas.clone();

        macro_rules! cont {
            ($rule:expr, $stack:expr, $state:expr, $vars:expr, $gas:expr, $exc:expr) => {{
                let stack = $stack;
                let gas: BigInt = $gas;
                let record = StepRecord {
                    rule: $rule,
                    gas_before,
                    gas_after: gas.clone(),
                    stack_depth: stack.len(),
                    exception: $exc,
                };
                return StepOutcome::Continue {
                    config: Config {
                        stack,
                        state: $state,
                        vars: $vars,
                        gas,
                    },
                    record,
                };
            }};
        }
        macro_rules! raise {
            ($rule:expr, $label:expr) => {{
                stack.push(Frame::Exc($label));
                cont!($rule, stack, state, vars, gas, Some($label));
            }};
        }

        match stack.last().expect("terminal handled above") {
            Frame::Exc(_) => unreachable!("terminal handled above"),
            Frame::Env(_) => {
                // ss-return: restore the saved environment; no gas check.
                let Some(Frame::Env(saved)) = stack.pop() else {
                    unreachable!()
                };
                cont!("ss-return", stack, state, saved, gas, None);
            }
            Frame::ScopeEnd(x) => {
                // ss-delv: drop the newest local; no gas check.
                let x = x.clone();
                match vars.undeclared(&x) {
                    Ok(rest) => {
                        stack.pop();
                        cont!("ss-delv", stack, state, rest, gas, None);
                    }
                    // Unreachable for machine-built stacks.
                    Err(_) => raise!("ss-rte", ExcLabel::Rte),
                }
            }
            Frame::Stm(_) => {
                if gas.is_zero() {
                    // ss-oog: a pending command with no gas left.
                    raise!("ss-oog", ExcLabel::Oog);
                }
                let Some(Frame::Stm(s)) = stack.pop() else {
                    unreachable!()
                };
                // From here on, a failed side condition must leave the
                // statement in place under the exception frame.
                macro_rules! fail {
                    ($rule:expr, $label:expr) => {{
                        stack.push(Frame::Stm(s));
                        raise!($rule, $label);
                    }};
                }
                match s {
                    Stm::Skip => {
                        cont!("ss-skip", stack, state, vars, gas - 1, None);
                    }
                    Stm::Throw => {
                        // The throw is consumed; the exception replaces it.
                        stack.push(Frame::Exc(ExcLabel::Pge));
                        cont!("ss-throw", stack, state, vars, gas, Some(ExcLabel::Pge));
                    }
                    Stm::Seq(ref s1, ref s2) => {
                        let (s1, s2) = (s1.as_ref().clone(), s2.as_ref().clone());
                        stack.push(Frame::Stm(s2));
                        stack.push(Frame::Stm(s1));
                        cont!("ss-seq", stack, state, vars, gas, None);
                    }
                    Stm::If {
                        ref guard,
                        ref then_branch,
                        ref else_branch,
                    } => match eval_expr(&state, &vars, guard) {
                        Ok(Value::Bool(b)) => {
                            let branch = if b { then_branch } else { else_branch }.as_ref().clone();
                            stack.push(Frame::Stm(branch));
                            cont!("ss-if", stack, state, vars, gas - 1, None);
                        }
                        _ => fail!("ss-rte", ExcLabel::Rte),
                    },
                    Stm::For {
                        ref guard,
                        ref body,
                    } => match eval_expr(&state, &vars, guard) {
                        Ok(Value::Int(v)) => {
                            if v >= BigInt::from(1) {
                                // Rewrite the guard to the literal v-1: the
                                // iteration count is fixed at first entry.
                                let cont_loop = Stm::For {
                                    guard: Expr::Val(Value::Int(&v - 1)),
                                    body: body.clone(),
                                };
                                stack.push(Frame::Stm(cont_loop));
                                stack.push(Frame::Stm(body.as_ref().clone()));
                                cont!("ss-for_T", stack, state, vars, gas - 1, None);
                            } else {
                                cont!("ss-for_F", stack, state, vars, gas - 1, None);
                            }
                        }
                        _ => fail!("ss-rte", ExcLabel::Rte),
                    },
                    Stm::DeclVar {
                        ref ty,
                        ref name,
                        ref init,
                        ref body,
                    } => {
                        if vars.contains(name) {
                            // Shadowing a live binding is a runtime error.
                            fail!("ss-rte", ExcLabel::Rte);
                        }
                        match eval_expr(&state, &vars, init) {
                            Ok(v) => {
                                let inner = vars.declared(name, v, ty.clone());
                                stack.push(Frame::ScopeEnd(name.clone()));
                                stack.push(Frame::Stm(body.as_ref().clone()));
                                cont!("ss-decv", stack, state, inner, gas - 1, None);
                            }
                            Err(_) => fail!("ss-rte", ExcLabel::Rte),
                        }
                    }
                    Stm::Assign {
                        target: LVal::Var(ref x),
                        ref value,
                    } => {
                        if !vars.contains(x) {
                            fail!("ss-rte", ExcLabel::Rte);
                        }
                        match eval_expr(&state, &vars, value) {
                            Ok(v) => {
                                let updated = vars.updated(x, v).expect("checked above");
                                cont!("ss-assv", stack, state, updated, gas - 1, None);
                            }
                            Err(_) => fail!("ss-rte", ExcLabel::Rte),
                        }
                    }
                    Stm::Assign {
                        target: LVal::ThisField(ref p),
                        ref value,
                    } => {
                        let Some(Value::Addr(this)) = vars.lookup("this").cloned() else {
                            fail!("ss-rte", ExcLabel::Rte);
                        };
                        let field_exists = state.get(&this).is_some_and(|fs| fs.contains_key(p));
                        if !field_exists {
                            fail!("ss-rte", ExcLabel::Rte);
                        }
                        match eval_expr(&state, &vars, value) {
                            Ok(v) => {
                                let next =
                                    state_update_field(&state, &this, p, v).expect("checked above");
                                cont!("ss-assf", stack, next, vars, gas - 1, None);
                            }
                            Err(_) => fail!("ss-rte", ExcLabel::Rte),
                        }
                    }
                    Stm::Call {
                        ref recv,
                        ref method,
                        ref args,
                        ref amount,
                    } => {
                        let Ok(Value::Addr(callee)) = eval_expr(&state, &vars, recv) else {
                            fail!("ss-rte", ExcLabel::Rte);
                        };
                        let Ok(Value::Int(transfer)) = eval_expr(&state, &vars, amount) else {
                            fail!("ss-rte", ExcLabel::Rte);
                        };
                        let mut arg_values = Vec::with_capacity(args.len());
                        let mut arg_failed = false;
                        for a in args {
                            match eval_expr(&state, &vars, a) {
                                Ok(v) => arg_values.push(v),
                                Err(_) => {
                                    arg_failed = true;
                                    break;
                                }
                            }
                        }
                        if arg_failed {
                            fail!("ss-rte", ExcLabel::Rte);
                        }
                        let Some(Value::Addr(caller)) = vars.lookup("this").cloned() else {
                            fail!("ss-rte", ExcLabel::Rte);
                        };
                        let Some(caller_balance) = balance_of(&state, &caller).cloned() else {
                            fail!("ss-rte", ExcLabel::Rte);
                        };
                        // The balance check comes before method resolution;
                        // its failure is the dedicated `neg` exception.
                        if transfer > caller_balance {
                            fail!("ss-neg", ExcLabel::Neg);
                        }
                        let Some((param_names, body)) =
                            self.table.get(&callee).and_then(|m| m.get(method)).cloned()
                        else {
                            fail!("ss-rte", ExcLabel::Rte);
                        };
                        if param_names.len() != arg_values.len() {
                            fail!("ss-rte", ExcLabel::Rte);
                        }
                        let Some(callee_balance) = balance_of(&state, &callee).cloned() else {
                            fail!("ss-rte", ExcLabel::Rte);
                        };

                        let (this_ty, value_ty, param_tys) =
                            self.call_annotations(&vars, recv, &callee, method, param_names.len());

                        // Move the transferred amount; with callee == caller
                        // the two updates cancel.
                        let after_debit = state_update_field(
                            &state,
                            &caller,
                            BALANCE,
                            Value::Int(&caller_balance - &transfer),
                        )
                        .expect("caller balance present");
                        let credit_base = balance_of(&after_debit, &callee)
                            .cloned()
                            .unwrap_or(callee_balance);
                        let next_state = state_update_field(
                            &after_debit,
                            &callee,
                            BALANCE,
                            Value::Int(&credit_base + &transfer),
                        )
                        .expect("callee balance present");

                        let mut bindings = vec![
                            ("this".to_string(), Value::Addr(callee.clone()), this_ty),
                            (
                                "sender".to_string(),
                                Value::Addr(caller.clone()),
                                BaseType::iface(TOP_IFACE),
                            ),
                            ("value".to_string(), Value::Int(transfer.clone()), value_ty),
                        ];
                        for ((name, value), ty) in param_names.iter().zip(arg_values).zip(param_tys)
                        {
                            bindings.push((name.clone(), value, ty));
                        }
                        let callee_vars: VarEnv = bindings.into_iter().collect();

                        stack.push(Frame::Env(vars));
                        stack.push(Frame::Stm(body));
                        cont!("ss-call", stack, next_state, callee_vars, gas - 1, None);
                    }
                }
            }
        }
    }

    /// The annotations a call stores for its new bindings: `this` gets the
    /// static minimal interface of the receiver expression (computed under
    /// the annotations already in the environment, which agree with the
    /// extracted type environment along well-typed runs), and `value` and the
    /// parameters get the signature's types. Untypeable receivers fall back
    /// to the callee's declared binding; annotations are semantically inert,
    /// so the fallback only affects agreement reports of unchecked programs.
    fn call_annotations(
        &self,
        vars: &VarEnv,
        recv: &Expr,
        callee: &Addr,
        method: &str,
        arity: usize,
    ) -> (BaseType, BaseType, Vec<BaseType>) {
        let delta = VarTypes::from_var_env(vars);
        let static_iface = match type_expr(self.types, &delta, recv) {
            Ok(BaseType::Iface(i)) => Some(i),
            _ => None,
        };
        let iface = static_iface
            .or_else(|| self.types.binding(callee).ok().map(str::to_string))
            .unwrap_or_else(|| TOP_IFACE.to_string());
        if let Ok(sig) = self.types.method_sig(&iface, method)
            && sig.params.len() == arity
        {
            return (
                BaseType::iface(&iface),
                BaseType::IntRange(sig.amount_lo.clone(), sig.amount_hi.clone()),
                sig.params.clone(),
            );
        }
        (
            BaseType::iface(&iface),
            BaseType::Int,
            vec![BaseType::Int; arity],
        )
    }

    /// Iterates [`Machine::step`] to a terminal configuration, collecting the
    /// trace. Termination is guaranteed: gas strictly decreases on every
    /// gas-consuming step, and the number of non-consuming steps between two
    /// consuming ones is bounded by the stack depth.
    pub fn run(&self, mut c: Config) -> RunResult {
        let mut trace = Vec::new();
        loop {
            match self.step(c) {
                StepOutcome::Continue { config, record } => {
                    trace.push(record);
                    c = config;
                }
                StepOutcome::Terminal { terminal, config } => {
                    return RunResult {
                        terminal,
                        config,
                        trace,
                    };
                }
            }
        }
    }
}
