// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! The gas-bound type system.
//!
//! Typing has two halves: a global environment [`TypeEnv`] mapping contract
//! addresses to interface names and interface names to member tables, and a
//! local environment [`VarTypes`] for variables (including the magic
//! `this`/`sender`/`value`).
//!
//! Statement typing assigns each statement an upper bound on the number of
//! machine steps it can take; a configuration whose stack types at `n` is
//! well-supplied with any gas `g > n`. Expression typing is minimal-type
//! inference: literals get singleton interval types and subsumption is applied
//! only where a value meets a requirement (assignment targets, call arguments,
//! transfer amounts).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::env::{MethodTable, State, VarEnv};
use crate::parser::{SpanTable, default_int_max};
use crate::syntax::{
    Addr, BALANCE, BaseType, ContractDecl, Expr, InterfaceDecl, LVal, MemberType, MethodType,
    OpKind, Stm, TOP_IFACE, Value,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound name `{0}`")]
    UnboundName(String),
    #[error("interface `{iface}` has no member `{member}`")]
    NoSuchMember { iface: String, member: String },
    #[error("operator `{op}` cannot be applied to ({})", args.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", "))]
    OperatorTypeError { op: OpKind, args: Vec<BaseType> },
    #[error("unknown interface `{0}`")]
    UnknownInterface(String),
    #[error("interface `{iface}` has no method `{method}`")]
    UnknownMethod { iface: String, method: String },
    #[error("for-loop guard has unbounded type `{guard}`; a bounded int[l..u] is required")]
    UnboundedLoopGuard { guard: BaseType },
    #[error("{context}: expected a subtype of `{expected}`, found `{found}`")]
    TypeMismatch {
        expected: BaseType,
        found: BaseType,
        context: String,
    },
    #[error("transfer amount of type `{found}` does not fit the declared range [{lo}..{hi}]")]
    AmountOutOfDeclaredRange {
        lo: BigInt,
        hi: BigInt,
        found: BaseType,
    },
    #[error("field `{field}` declared `{declared}` cannot hold `{value}`")]
    FieldTypeMismatch {
        field: String,
        declared: BaseType,
        value: Value,
    },
    #[error(
        "method body needs at most {computed} steps but its declared bound is {declared}; a declaration must cover its body"
    )]
    BodyExceedsDeclaredBound { declared: BigInt, computed: BigInt },
    #[error("interface `{iface}` does not declare member `{member}`")]
    MissingInterfaceMember { iface: String, member: String },
    #[error("{what} expects {expected} argument(s), found {found}")]
    ArityMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("expected an interface type, found `{found}`")]
    InterfaceExpected { found: BaseType },
    #[error("ill-formed type `{0}`")]
    IllFormedType(BaseType),
    #[error("interface `{iface}` is ill-formed: {reason}")]
    MalformedInterface { iface: String, reason: String },
}

impl TypeError {
    /// Stable diagnostic code, printed by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            TypeError::UnboundName(_) => "UnboundName",
            TypeError::NoSuchMember { .. } => "NoSuchMember",
            TypeError::OperatorTypeError { .. } => "OperatorTypeError",
            TypeError::UnknownInterface(_) => "UnknownInterface",
            TypeError::UnknownMethod { .. } => "UnknownMethod",
            TypeError::UnboundedLoopGuard { .. } => "UnboundedLoopGuard",
            TypeError::TypeMismatch { .. } => "TypeMismatch",
            TypeError::AmountOutOfDeclaredRange { .. } => "AmountOutOfDeclaredRange",
            TypeError::FieldTypeMismatch { .. } => "FieldTypeMismatch",
            TypeError::BodyExceedsDeclaredBound { .. } => "BodyExceedsDeclaredBound",
            TypeError::MissingInterfaceMember { .. } => "MissingInterfaceMember",
            TypeError::ArityMismatch { .. } => "ArityMismatch",
            TypeError::InterfaceExpected { .. } => "InterfaceExpected",
            TypeError::IllFormedType(_) => "IllFormedType",
            TypeError::MalformedInterface { .. } => "MalformedInterface",
        }
    }
}

// ---------------------------------------------------------------------------
// Type environments
// ---------------------------------------------------------------------------

/// The global type environment: interface tables and contract bindings.
/// Every environment contains the built-in top interface, and every contract
/// without an explicit binding is bound to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeEnv {
    int_max: BigInt,
    ifaces: BTreeMap<String, InterfaceDecl>,
    bindings: BTreeMap<Addr, String>,
}

impl TypeEnv {
    /// Builds the environment from declarations, validating interface
    /// well-formedness (mandatory members, non-empty ranges, positive method
    /// bounds) and binding resolution.
    pub fn build(
        interfaces: &[InterfaceDecl],
        contracts: &[ContractDecl],
        int_max: BigInt,
    ) -> Result<TypeEnv, TypeError> {
        let mut ifaces = BTreeMap::new();
        ifaces.insert(TOP_IFACE.to_string(), InterfaceDecl::top(&int_max));
        for decl in interfaces {
            if decl.name == TOP_IFACE {
                return Err(TypeError::MalformedInterface {
                    iface: decl.name.clone(),
                    reason: "the top interface is built in".into(),
                });
            }
            validate_interface(decl, &int_max)?;
            if ifaces.insert(decl.name.clone(), decl.clone()).is_some() {
                return Err(TypeError::MalformedInterface {
                    iface: decl.name.clone(),
                    reason: "declared twice".into(),
                });
            }
        }
        let mut bindings = BTreeMap::new();
        for c in contracts {
            let iface = c.interface.clone().unwrap_or_else(|| TOP_IFACE.to_string());
            if !ifaces.contains_key(&iface) {
                return Err(TypeError::UnknownInterface(iface));
            }
            bindings.insert(c.name.clone(), iface);
        }
        Ok(TypeEnv {
            int_max,
            ifaces,
            bindings,
        })
    }

    pub fn empty() -> TypeEnv {
        TypeEnv::build(&[], &[], default_int_max()).expect("empty environment")
    }

    pub fn int_max(&self) -> &BigInt {
        &self.int_max
    }

    pub fn interface(&self, name: &str) -> Result<&InterfaceDecl, TypeError> {
        self.ifaces
            .get(name)
            .ok_or_else(|| TypeError::UnknownInterface(name.to_string()))
    }

    pub fn interfaces(&self) -> impl Iterator<Item = &InterfaceDecl> {
        self.ifaces.values()
    }

    /// The interface name a contract address is bound to.
    pub fn binding(&self, addr: &Addr) -> Result<&str, TypeError> {
        self.bindings
            .get(addr)
            .map(String::as_str)
            .ok_or_else(|| TypeError::UnboundName(addr.to_string()))
    }

    pub fn bound_addresses(&self) -> impl Iterator<Item = (&Addr, &str)> {
        self.bindings.iter().map(|(a, i)| (a, i.as_str()))
    }

    pub fn method_sig(&self, iface: &str, method: &str) -> Result<&MethodType, TypeError> {
        self.interface(iface)?
            .method(method)
            .ok_or_else(|| TypeError::UnknownMethod {
                iface: iface.to_string(),
                method: method.to_string(),
            })
    }

    pub fn field_type(&self, iface: &str, field: &str) -> Result<&BaseType, TypeError> {
        self.interface(iface)?
            .field(field)
            .ok_or_else(|| TypeError::NoSuchMember {
                iface: iface.to_string(),
                member: field.to_string(),
            })
    }
}

fn validate_interface(decl: &InterfaceDecl, int_max: &BigInt) -> Result<(), TypeError> {
    let bad = |reason: String| TypeError::MalformedInterface {
        iface: decl.name.clone(),
        reason,
    };
    match decl.members.get(BALANCE) {
        Some(MemberType::Field(BaseType::Int)) => {}
        _ => return Err(bad("must declare `balance: int`".into())),
    }
    let send_ok = decl.method("send").is_some_and(|m| {
        m.params.is_empty()
            && m.amount_lo == BigInt::from(0)
            && m.amount_hi == *int_max
            && m.bound == BigInt::from(1)
    });
    if !send_ok {
        return Err(bad("must declare `send()^INT_MAX_0 : 1`".into()));
    }
    for (name, member) in &decl.members {
        match member {
            MemberType::Field(b) => {
                if !b.is_well_formed() {
                    return Err(bad(format!("field `{name}` has an empty range")));
                }
            }
            MemberType::Method(m) => {
                if m.amount_lo > m.amount_hi {
                    return Err(bad(format!("method `{name}` has an empty transfer range")));
                }
                if m.bound < BigInt::from(1) {
                    return Err(bad(format!(
                        "method `{name}` has a non-positive step bound"
                    )));
                }
                for p in &m.params {
                    if !p.is_well_formed() {
                        return Err(bad(format!(
                            "method `{name}` has an ill-formed parameter type"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The local type environment: an ordered list of bindings, newest first,
/// mirroring the runtime variable environment.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VarTypes(Vec<(String, BaseType)>);

impl VarTypes {
    pub fn new() -> Self {
        VarTypes(Vec::new())
    }

    pub fn bindings(&self) -> &[(String, BaseType)] {
        &self.0
    }

    /// Newest binding wins (shadowing is legal in the type layer even though
    /// the machine rejects it at runtime).
    pub fn lookup(&self, name: &str) -> Option<&BaseType> {
        self.0.iter().find(|(x, _)| x == name).map(|(_, t)| t)
    }

    pub fn extended(&self, name: &str, ty: BaseType) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push((name.to_string(), ty));
        v.extend(self.0.iter().cloned());
        VarTypes(v)
    }

    /// Drops the newest binding, which must be for `name`.
    pub fn removed_newest(&self, name: &str) -> Result<Self, TypeError> {
        match self.0.first() {
            Some((x, _)) if x == name => Ok(VarTypes(self.0[1..].to_vec())),
            _ => Err(TypeError::UnboundName(name.to_string())),
        }
    }

    /// The annotations stored in a runtime variable environment.
    pub fn from_var_env(env: &VarEnv) -> Self {
        VarTypes(
            env.bindings()
                .iter()
                .map(|b| (b.name.clone(), b.ty.clone()))
                .collect(),
        )
    }
}

impl FromIterator<(String, BaseType)> for VarTypes {
    fn from_iter<T: IntoIterator<Item = (String, BaseType)>>(iter: T) -> Self {
        VarTypes(iter.into_iter().collect())
    }
}

// ---------------------------------------------------------------------------
// Subtyping
// ---------------------------------------------------------------------------

/// Decides `a` subtype-of `b`. Interval types widen; any interval coerces to
/// the unbounded integer type; interfaces compare member-wise (the subtype
/// declares at least the supertype's members, each at a subtype); method
/// types widen their step bound and transfer range.
pub fn subtype(env: &TypeEnv, a: &BaseType, b: &BaseType) -> Result<bool, TypeError> {
    let mut seen = BTreeSet::new();
    subtype_base(env, a, b, &mut seen)
}

fn subtype_base(
    env: &TypeEnv,
    a: &BaseType,
    b: &BaseType,
    seen: &mut BTreeSet<(String, String)>,
) -> Result<bool, TypeError> {
    Ok(match (a, b) {
        (BaseType::Bool, BaseType::Bool) => true,
        (BaseType::Int, BaseType::Int) => true,
        (BaseType::IntRange(l1, u1), BaseType::IntRange(l2, u2)) => u1 <= u2 && l1 >= l2,
        (BaseType::IntRange(_, _), BaseType::Int) => true,
        (BaseType::Iface(i1), BaseType::Iface(i2)) => {
            if i1 == i2 {
                return Ok(true);
            }
            let key = (i1.clone(), i2.clone());
            if !seen.insert(key) {
                // Already assumed while deciding an enclosing pair.
                return Ok(true);
            }
            let sup = env.interface(i2)?.members.clone();
            let sub = env.interface(i1)?;
            for (name, m2) in &sup {
                match sub.members.get(name) {
                    None => return Ok(false),
                    Some(m1) => {
                        if !member_subtype(env, m1, m2, seen)? {
                            return Ok(false);
                        }
                    }
                }
            }
            true
        }
        _ => false,
    })
}

fn member_subtype(
    env: &TypeEnv,
    a: &MemberType,
    b: &MemberType,
    seen: &mut BTreeSet<(String, String)>,
) -> Result<bool, TypeError> {
    Ok(match (a, b) {
        (MemberType::Field(a), MemberType::Field(b)) => subtype_base(env, a, b, seen)?,
        (MemberType::Method(a), MemberType::Method(b)) => method_subtype_inner(env, a, b, seen)?,
        _ => false,
    })
}

/// Method-type widening: `a` may be used where `b` is expected when its step
/// bound and transfer upper bound are no larger, its transfer lower bound no
/// smaller, and its parameters are pointwise subtypes.
pub fn method_subtype(env: &TypeEnv, a: &MethodType, b: &MethodType) -> Result<bool, TypeError> {
    let mut seen = BTreeSet::new();
    method_subtype_inner(env, a, b, &mut seen)
}

fn method_subtype_inner(
    env: &TypeEnv,
    a: &MethodType,
    b: &MethodType,
    seen: &mut BTreeSet<(String, String)>,
) -> Result<bool, TypeError> {
    if a.params.len() != b.params.len() {
        return Ok(false);
    }
    if !(a.bound <= b.bound && a.amount_hi <= b.amount_hi && a.amount_lo >= b.amount_lo) {
        return Ok(false);
    }
    for (p1, p2) in a.params.iter().zip(&b.params) {
        if !subtype_base(env, p1, p2, seen)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Expression typing
// ---------------------------------------------------------------------------

/// The minimal type of a value: integer literals get singleton intervals,
/// addresses their declared interface.
pub fn minimal_value_type(env: &TypeEnv, v: &Value) -> Result<BaseType, TypeError> {
    Ok(match v {
        Value::Int(n) => BaseType::IntRange(n.clone(), n.clone()),
        Value::Bool(_) => BaseType::Bool,
        Value::Addr(a) => BaseType::Iface(env.binding(a)?.to_string()),
    })
}

/// Does the value inhabit the type (up to subtyping)?
pub fn value_has_type(env: &TypeEnv, v: &Value, ty: &BaseType) -> bool {
    match minimal_value_type(env, v) {
        Ok(min) => subtype(env, &min, ty).unwrap_or(false),
        Err(_) => false,
    }
}

/// Interval signatures for the operator set. Addition and subtraction
/// propagate bounds directly; multiplication takes the extrema of the four
/// corner products; division always yields the unbounded integer type.
pub fn op_signature(op: OpKind, args: &[BaseType]) -> Result<BaseType, TypeError> {
    let mismatch = || TypeError::OperatorTypeError {
        op,
        args: args.to_vec(),
    };
    if args.len() != op.arity() {
        return Err(mismatch());
    }
    enum IntShape<'a> {
        Bounded(&'a BigInt, &'a BigInt),
        Unbounded,
    }
    fn int_shape(t: &BaseType) -> Option<IntShape<'_>> {
        match t {
            BaseType::Int => Some(IntShape::Unbounded),
            BaseType::IntRange(l, u) => Some(IntShape::Bounded(l, u)),
            _ => None,
        }
    }
    use IntShape::*;
    match op {
        OpKind::Add | OpKind::Sub | OpKind::Mul => {
            let (a, b) = (
                int_shape(&args[0]).ok_or_else(mismatch)?,
                int_shape(&args[1]).ok_or_else(mismatch)?,
            );
            Ok(match (a, b) {
                (Bounded(l1, u1), Bounded(l2, u2)) => match op {
                    OpKind::Add => BaseType::IntRange(l1 + l2, u1 + u2),
                    OpKind::Sub => BaseType::IntRange(l1 - u2, u1 - l2),
                    OpKind::Mul => {
                        let corners = [l1 * l2, l1 * u2, u1 * l2, u1 * u2];
                        let lo = corners.iter().min().unwrap().clone();
                        let hi = corners.iter().max().unwrap().clone();
                        BaseType::IntRange(lo, hi)
                    }
                    _ => unreachable!(),
                },
                // A bounded argument degrades to the unbounded type.
                _ => BaseType::Int,
            })
        }
        OpKind::Div => {
            int_shape(&args[0]).ok_or_else(mismatch)?;
            int_shape(&args[1]).ok_or_else(mismatch)?;
            Ok(BaseType::Int)
        }
        OpKind::Lt | OpKind::Le | OpKind::Gt | OpKind::Ge => {
            int_shape(&args[0]).ok_or_else(mismatch)?;
            int_shape(&args[1]).ok_or_else(mismatch)?;
            Ok(BaseType::Bool)
        }
        OpKind::Eq => match (&args[0], &args[1]) {
            (BaseType::Bool, BaseType::Bool) => Ok(BaseType::Bool),
            (BaseType::Iface(_), BaseType::Iface(_)) => Ok(BaseType::Bool),
            (a, b) if int_shape(a).is_some() && int_shape(b).is_some() => Ok(BaseType::Bool),
            _ => Err(mismatch()),
        },
        OpKind::And | OpKind::Or => match (&args[0], &args[1]) {
            (BaseType::Bool, BaseType::Bool) => Ok(BaseType::Bool),
            _ => Err(mismatch()),
        },
        OpKind::Not => match &args[0] {
            BaseType::Bool => Ok(BaseType::Bool),
            _ => Err(mismatch()),
        },
    }
}

/// Minimal-type inference for expressions.
pub fn type_expr(env: &TypeEnv, delta: &VarTypes, e: &Expr) -> Result<BaseType, TypeError> {
    match e {
        Expr::Val(v) => minimal_value_type(env, v),
        Expr::Var(x) => delta
            .lookup(x)
            .cloned()
            .ok_or_else(|| TypeError::UnboundName(x.clone())),
        Expr::Balance(recv) => {
            expect_iface(env, delta, recv)?;
            Ok(BaseType::Int)
        }
        Expr::Field(recv, p) => {
            let iface = expect_iface(env, delta, recv)?;
            env.field_type(&iface, p).cloned()
        }
        Expr::Op(op, args) => {
            let tys = args
                .iter()
                .map(|a| type_expr(env, delta, a))
                .collect::<Result<Vec<_>, _>>()?;
            op_signature(*op, &tys)
        }
    }
}

fn expect_iface(env: &TypeEnv, delta: &VarTypes, e: &Expr) -> Result<String, TypeError> {
    match type_expr(env, delta, e)? {
        BaseType::Iface(i) => Ok(i),
        other => Err(TypeError::InterfaceExpected { found: other }),
    }
}

fn require_subtype(
    env: &TypeEnv,
    found: &BaseType,
    expected: &BaseType,
    context: &str,
) -> Result<(), TypeError> {
    if subtype(env, found, expected)? {
        Ok(())
    } else {
        Err(TypeError::TypeMismatch {
            expected: expected.clone(),
            found: found.clone(),
            context: context.to_string(),
        })
    }
}

// ---------------------------------------------------------------------------
// Statement typing
// ---------------------------------------------------------------------------

/// Computes the minimal step bound of a statement, or fails where the type
/// system rejects it. The interesting cases:
///
/// - declarations and calls cost their body plus 2 (the scope-end marker and
///   the saved environment each take one extra machine step);
/// - a for loop with guard type int[l..u] and body bound n costs
///   max(1, u*(n+1)+1), so guards must have a bounded type;
/// - a call costs the callee's declared bound plus 2, and its transfer amount
///   must fit the declared range.
pub fn type_stmt(env: &TypeEnv, delta: &VarTypes, s: &Stm) -> Result<BigInt, TypeError> {
    let one = BigInt::from(1);
    match s {
        Stm::Skip | Stm::Throw => Ok(one),
        Stm::Assign { target, value } => {
            let expected = match target {
                LVal::Var(x) => delta
                    .lookup(x)
                    .cloned()
                    .ok_or_else(|| TypeError::UnboundName(x.clone()))?,
                LVal::ThisField(p) => {
                    let iface = expect_iface(env, delta, &Expr::Var("this".into()))?;
                    env.field_type(&iface, p).cloned()?
                }
            };
            let found = type_expr(env, delta, value)?;
            require_subtype(env, &found, &expected, &format!("assignment to `{target}`"))?;
            Ok(one)
        }
        Stm::DeclVar {
            ty,
            name,
            init,
            body,
        } => {
            if !ty.is_well_formed() {
                return Err(TypeError::IllFormedType(ty.clone()));
            }
            let found = type_expr(env, delta, init)?;
            require_subtype(env, &found, ty, &format!("declaration of `{name}`"))?;
            let inner = delta.extended(name, ty.clone());
            let n = type_stmt(env, &inner, body)?;
            Ok(n + 2)
        }
        Stm::Seq(s1, s2) => {
            let n1 = type_stmt(env, delta, s1)?;
            let n2 = type_stmt(env, delta, s2)?;
            Ok(n1 + n2 + 1)
        }
        Stm::If {
            guard,
            then_branch,
            else_branch,
        } => {
            let g = type_expr(env, delta, guard)?;
            require_subtype(env, &g, &BaseType::Bool, "if guard")?;
            let n1 = type_stmt(env, delta, then_branch)?;
            let n2 = type_stmt(env, delta, else_branch)?;
            Ok(n1.max(n2) + 1)
        }
        Stm::For { guard, body } => {
            let g = type_expr(env, delta, guard)?;
            let (_, hi) = match g {
                BaseType::IntRange(lo, hi) => (lo, hi),
                BaseType::Int => {
                    return Err(TypeError::UnboundedLoopGuard {
                        guard: BaseType::Int,
                    });
                }
                other => {
                    return Err(TypeError::TypeMismatch {
                        expected: BaseType::Int,
                        found: other,
                        context: "for guard".into(),
                    });
                }
            };
            let n = type_stmt(env, delta, body)?;
            let unit = BigInt::from(1);
            let total = hi * (&n + &unit) + &unit;
            Ok(total.max(unit))
        }
        Stm::Call {
            recv,
            method,
            args,
            amount,
        } => {
            let iface = expect_iface(env, delta, recv)?;
            let sig = env.method_sig(&iface, method)?.clone();
            if args.len() != sig.params.len() {
                return Err(TypeError::ArityMismatch {
                    what: format!("method `{method}`"),
                    expected: sig.params.len(),
                    found: args.len(),
                });
            }
            for (arg, param) in args.iter().zip(&sig.params) {
                let found = type_expr(env, delta, arg)?;
                require_subtype(env, &found, param, &format!("argument of `{method}`"))?;
            }
            let amount_ty = type_expr(env, delta, amount)?;
            let range = BaseType::IntRange(sig.amount_lo.clone(), sig.amount_hi.clone());
            if !subtype(env, &amount_ty, &range)? {
                return Err(TypeError::AmountOutOfDeclaredRange {
                    lo: sig.amount_lo,
                    hi: sig.amount_hi,
                    found: amount_ty,
                });
            }
            Ok(sig.bound + 2)
        }
    }
}

/// The least gas that makes the initial configuration for `s` well-typed:
/// the step bound plus one.
pub fn min_gas(env: &TypeEnv, delta: &VarTypes, s: &Stm) -> Result<BigInt, TypeError> {
    Ok(type_stmt(env, delta, s)? + 1)
}

/// The local environment a method body is typed (and runs) under:
/// `this`, `sender`, `value`, then the parameters; newest first.
pub fn method_delta(iface: &str, sig: &MethodType, param_names: &[String]) -> VarTypes {
    let mut v = Vec::with_capacity(3 + param_names.len());
    v.push(("this".to_string(), BaseType::iface(iface)));
    v.push(("sender".to_string(), BaseType::iface(TOP_IFACE)));
    v.push((
        "value".to_string(),
        BaseType::IntRange(sig.amount_lo.clone(), sig.amount_hi.clone()),
    ));
    for (name, ty) in param_names.iter().zip(&sig.params) {
        v.push((name.clone(), ty.clone()));
    }
    v.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Declaration checking
// ---------------------------------------------------------------------------

/// Per-method results of a check run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodReport {
    pub declared_bound: BigInt,
    /// Minimal bound computed for the body; absent when the body failed to
    /// type.
    pub computed_bound: Option<BigInt>,
    /// Least transaction gas for a call to this method: declared bound + 3
    /// (the call statement types at declared+2, and gas must strictly exceed).
    pub min_gas: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Name path, e.g. `C` or `C.f`.
    pub path: String,
    pub location: Option<(u32, u32)>,
    pub error: TypeError,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((line, col)) = self.location {
            write!(f, "{line}:{col}: ")?;
        }
        write!(f, "{}: {}: {}", self.path, self.error.code(), self.error)
    }
}

/// The result of checking a program's declarations against its interfaces.
#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    /// contract name -> method name -> report.
    pub methods: BTreeMap<String, BTreeMap<String, MethodReport>>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// `{contract: {method: {declared_n, computed_n, min_gas}}}` plus a
    /// diagnostics array; keys sorted.
    pub fn to_json(&self) -> serde_json::Value {
        let big = |n: &BigInt| {
            serde_json::Value::Number(serde_json::Number::from_string_unchecked(n.to_string()))
        };
        let mut contracts = serde_json::Map::new();
        for (c, methods) in &self.methods {
            let mut per_method = serde_json::Map::new();
            for (m, r) in methods {
                let mut obj = serde_json::Map::new();
                obj.insert("declared_n".into(), big(&r.declared_bound));
                obj.insert(
                    "computed_n".into(),
                    r.computed_bound
                        .as_ref()
                        .map(&big)
                        .unwrap_or(serde_json::Value::Null),
                );
                obj.insert("min_gas".into(), big(&r.min_gas));
                per_method.insert(m.clone(), serde_json::Value::Object(obj));
            }
            contracts.insert(c.clone(), serde_json::Value::Object(per_method));
        }
        let diagnostics: Vec<serde_json::Value> = self
            .diagnostics
            .iter()
            .map(|d| {
                let mut obj = serde_json::Map::new();
                obj.insert("path".into(), serde_json::Value::String(d.path.clone()));
                if let Some((line, col)) = d.location {
                    obj.insert("line".into(), serde_json::Value::from(line));
                    obj.insert("col".into(), serde_json::Value::from(col));
                }
                obj.insert(
                    "code".into(),
                    serde_json::Value::String(d.error.code().into()),
                );
                obj.insert(
                    "message".into(),
                    serde_json::Value::String(d.error.to_string()),
                );
                serde_json::Value::Object(obj)
            })
            .collect();
        let mut top = serde_json::Map::new();
        top.insert("contracts".into(), serde_json::Value::Object(contracts));
        top.insert("diagnostics".into(), serde_json::Value::Array(diagnostics));
        top.insert("ok".into(), serde_json::Value::Bool(self.ok()));
        serde_json::Value::Object(top)
    }
}

/// Checks every contract against its interface: field initializers must
/// inhabit their declared member types and each method body must type within
/// its declared step bound. Recursion (direct or mutual) is rejected
/// automatically: a call contributes its callee's declared bound plus 2, so
/// no finite declaration covers a cycle.
pub fn check_declarations(
    env: &TypeEnv,
    contracts: &[ContractDecl],
    spans: Option<&SpanTable>,
) -> CheckReport {
    let mut report = CheckReport::default();
    let locate = |path: &str| spans.and_then(|s| s.get(path).copied());
    for c in contracts {
        let cname = c.name.to_string();
        let iface = match env.binding(&c.name) {
            Ok(i) => i.to_string(),
            Err(e) => {
                report.diagnostics.push(Diagnostic {
                    path: cname.clone(),
                    location: locate(&cname),
                    error: e,
                });
                continue;
            }
        };
        for (p, v) in &c.fields {
            let path = format!("{cname}.{p}");
            match env.field_type(&iface, p) {
                Err(_) => report.diagnostics.push(Diagnostic {
                    path: path.clone(),
                    location: locate(&path),
                    error: TypeError::MissingInterfaceMember {
                        iface: iface.clone(),
                        member: p.clone(),
                    },
                }),
                Ok(declared) => {
                    if !value_has_type(env, v, declared) {
                        report.diagnostics.push(Diagnostic {
                            path: path.clone(),
                            location: locate(&path),
                            error: TypeError::FieldTypeMismatch {
                                field: p.clone(),
                                declared: declared.clone(),
                                value: v.clone(),
                            },
                        });
                    }
                }
            }
        }
        let mut methods = BTreeMap::new();
        for m in &c.methods {
            let path = format!("{cname}.{}", m.name);
            let sig = match env.method_sig(&iface, &m.name) {
                Ok(sig) => sig.clone(),
                Err(_) => {
                    report.diagnostics.push(Diagnostic {
                        path: path.clone(),
                        location: locate(&path),
                        error: TypeError::MissingInterfaceMember {
                            iface: iface.clone(),
                            member: m.name.clone(),
                        },
                    });
                    continue;
                }
            };
            if m.params.len() != sig.params.len() {
                report.diagnostics.push(Diagnostic {
                    path: path.clone(),
                    location: locate(&path),
                    error: TypeError::ArityMismatch {
                        what: format!("method `{}`", m.name),
                        expected: sig.params.len(),
                        found: m.params.len(),
                    },
                });
                continue;
            }
            let delta = method_delta(&iface, &sig, &m.params);
            let entry = match type_stmt(env, &delta, &m.body) {
                Err(e) => {
                    report.diagnostics.push(Diagnostic {
                        path: path.clone(),
                        location: locate(&path),
                        error: e,
                    });
                    MethodReport {
                        declared_bound: sig.bound.clone(),
                        computed_bound: None,
                        min_gas: &sig.bound + 3,
                    }
                }
                Ok(computed) => {
                    if computed > sig.bound {
                        report.diagnostics.push(Diagnostic {
                            path: path.clone(),
                            location: locate(&path),
                            error: TypeError::BodyExceedsDeclaredBound {
                                declared: sig.bound.clone(),
                                computed: computed.clone(),
                            },
                        });
                    }
                    MethodReport {
                        declared_bound: sig.bound.clone(),
                        computed_bound: Some(computed),
                        min_gas: &sig.bound + 3,
                    }
                }
            };
            methods.insert(m.name.clone(), entry);
        }
        report.methods.insert(cname, methods);
    }
    report
}

// ---------------------------------------------------------------------------
// Environment agreement
// ---------------------------------------------------------------------------

/// The outcome of an agreement check; failures are human-readable.
#[derive(Clone, Debug, Default)]
pub struct Agreement {
    pub failures: Vec<String>,
}

impl Agreement {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Does every stored field value inhabit its declared member type?
pub fn state_agrees(env: &TypeEnv, state: &State) -> Agreement {
    let mut out = Agreement::default();
    for (addr, fields) in state {
        let iface = match env.binding(addr) {
            Ok(i) => i.to_string(),
            Err(_) => {
                out.failures
                    .push(format!("address `{addr}` has no interface binding"));
                continue;
            }
        };
        for (p, v) in fields {
            match env.field_type(&iface, p) {
                Err(_) => out
                    .failures
                    .push(format!("`{addr}.{p}`: not declared by interface `{iface}`")),
                Ok(ty) => {
                    if !value_has_type(env, v, ty) {
                        out.failures.push(format!(
                            "`{addr}.{p}` holds {v}, which does not inhabit `{ty}`"
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Does every method body meet its declared bound?
pub fn table_agrees(env: &TypeEnv, table: &MethodTable) -> Agreement {
    let mut out = Agreement::default();
    for (addr, methods) in table {
        let iface = match env.binding(addr) {
            Ok(i) => i.to_string(),
            Err(_) => {
                out.failures
                    .push(format!("address `{addr}` has no interface binding"));
                continue;
            }
        };
        for (f, (params, body)) in methods {
            let sig = match env.method_sig(&iface, f) {
                Ok(sig) => sig.clone(),
                Err(_) => {
                    out.failures
                        .push(format!("`{addr}.{f}`: not declared by interface `{iface}`"));
                    continue;
                }
            };
            if params.len() != sig.params.len() {
                out.failures
                    .push(format!("`{addr}.{f}`: parameter arity mismatch"));
                continue;
            }
            let delta = method_delta(&iface, &sig, params);
            match type_stmt(env, &delta, body) {
                Err(e) => out.failures.push(format!("`{addr}.{f}`: {e}")),
                Ok(n) => {
                    if n > sig.bound {
                        out.failures.push(format!(
                            "`{addr}.{f}`: body needs {n} steps, declared {}",
                            sig.bound
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Strict variable-environment agreement against an explicit local type
/// environment: each stored annotation must equal the environment's binding
/// and each stored value must inhabit it.
pub fn var_env_agrees(env: &TypeEnv, delta: &VarTypes, vars: &VarEnv) -> Agreement {
    let mut out = Agreement::default();
    for b in vars.bindings() {
        match delta.lookup(&b.name) {
            None => out
                .failures
                .push(format!("variable `{}` not in the type environment", b.name)),
            Some(ty) if *ty != b.ty => out.failures.push(format!(
                "variable `{}` annotated `{}` but typed `{ty}`",
                b.name, b.ty
            )),
            Some(_) => {}
        }
        if !value_has_type(env, &b.value, &b.ty) {
            out.failures.push(format!(
                "variable `{}` holds {}, which does not inhabit `{}`",
                b.name, b.value, b.ty
            ));
        }
    }
    out
}

/// Whole-world agreement: state, method table, and a variable environment
/// judged against its own annotations.
pub fn check_env_agreement(
    env: &TypeEnv,
    state: &State,
    table: &MethodTable,
    vars: &VarEnv,
) -> Agreement {
    let mut out = state_agrees(env, state);
    out.failures.extend(table_agrees(env, table).failures);
    let delta = VarTypes::from_var_env(vars);
    out.failures
        .extend(var_env_agrees(env, &delta, vars).failures);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_interface, parse_program, parse_statement};

    fn env_with(ifaces: &str, contracts: &str) -> TypeEnv {
        let file = parse_program(&format!("{ifaces}\n{contracts}")).unwrap();
        TypeEnv::build(&file.interfaces, &file.contracts, default_int_max()).unwrap()
    }

    fn worked_example_env() -> (TypeEnv, VarTypes) {
        let env = env_with(
            "interface I { f(int)^10_1 : 20 }",
            "contract A : I { f(x) { skip } }",
        );
        let delta: VarTypes = vec![
            ("x".to_string(), BaseType::range(1, 5)),
            ("y".to_string(), BaseType::iface("I")),
        ]
        .into_iter()
        .collect();
        (env, delta)
    }

    #[test]
    fn subtype_goldens() {
        let env = TypeEnv::empty();
        assert!(subtype(&env, &BaseType::range(1, 1), &BaseType::range(1, 10)).unwrap());
        assert!(subtype(&env, &BaseType::range(1, 5), &BaseType::Int).unwrap());
        assert!(!subtype(&env, &BaseType::Int, &BaseType::range(1, 5)).unwrap());
        assert!(!subtype(&env, &BaseType::range(0, 10), &BaseType::range(1, 10)).unwrap());
    }

    #[test]
    fn method_subtype_goldens() {
        let env = TypeEnv::empty();
        let narrow = MethodType {
            params: vec![],
            amount_lo: BigInt::from(2),
            amount_hi: BigInt::from(5),
            bound: BigInt::from(3),
        };
        let wide = MethodType {
            params: vec![],
            amount_lo: BigInt::from(1),
            amount_hi: BigInt::from(10),
            bound: BigInt::from(7),
        };
        assert!(method_subtype(&env, &narrow, &wide).unwrap());
        assert!(!method_subtype(&env, &wide, &narrow).unwrap());
    }

    #[test]
    fn interface_subtyping_member_wise() {
        let env = env_with(
            "interface I { f(int)^10_1 : 20 } interface J { f(int)^10_1 : 25 p: int }",
            "",
        );
        // J's f has a larger bound, so J is not usable as I; and I lacks p,
        // so not the other way around either.
        assert!(subtype(&env, &BaseType::iface("J"), &BaseType::iface("I")).is_ok_and(|b| !b));
        assert!(subtype(&env, &BaseType::iface("I"), &BaseType::iface("J")).is_ok_and(|b| !b));
        // Every interface is a subtype of Top.
        assert!(subtype(&env, &BaseType::iface("I"), &BaseType::iface(TOP_IFACE)).unwrap());
        assert!(subtype(&env, &BaseType::iface("J"), &BaseType::iface(TOP_IFACE)).unwrap());
    }

    #[test]
    fn op_signature_goldens() {
        let plus = op_signature(OpKind::Add, &[BaseType::range(2, 5), BaseType::range(1, 3)]);
        assert_eq!(plus.unwrap(), BaseType::range(3, 8));
        let minus = op_signature(OpKind::Sub, &[BaseType::range(2, 5), BaseType::range(1, 3)]);
        assert_eq!(minus.unwrap(), BaseType::range(-1, 4));
        let div = op_signature(OpKind::Div, &[BaseType::range(2, 5), BaseType::range(1, 3)]);
        assert_eq!(div.unwrap(), BaseType::Int);
        let degraded = op_signature(OpKind::Add, &[BaseType::range(2, 5), BaseType::Int]);
        assert_eq!(degraded.unwrap(), BaseType::Int);
        assert!(op_signature(OpKind::And, &[BaseType::Int, BaseType::Bool]).is_err());
    }

    #[test]
    fn mul_interval_matches_brute_force() {
        // Oracle: enumerate all integer pairs in the operand ranges.
        let cases = [
            ((-1i64, 2i64), (2i64, 3i64)),
            ((-3, -1), (-2, 4)),
            ((0, 0), (-5, 5)),
        ];
        for ((l1, u1), (l2, u2)) in cases {
            let mut products = Vec::new();
            for a in l1..=u1 {
                for b in l2..=u2 {
                    products.push(a * b);
                }
            }
            let lo = *products.iter().min().unwrap();
            let hi = *products.iter().max().unwrap();
            let got = op_signature(
                OpKind::Mul,
                &[BaseType::range(l1, u1), BaseType::range(l2, u2)],
            )
            .unwrap();
            assert_eq!(
                got,
                BaseType::range(lo, hi),
                "range [{l1}..{u1}] * [{l2}..{u2}]"
            );
        }
        // Frozen expected value for the headline case.
        assert_eq!(
            op_signature(
                OpKind::Mul,
                &[BaseType::range(-1, 2), BaseType::range(2, 3)]
            )
            .unwrap(),
            BaseType::range(-3, 6)
        );
    }

    #[test]
    fn type_expr_examples() {
        let (env, delta) = worked_example_env();
        let delta = delta.extended("z", BaseType::range(2, 5));
        let sub = crate::parser::parse_expression("10 - z").unwrap();
        assert_eq!(
            type_expr(&env, &delta, &sub).unwrap(),
            BaseType::range(5, 8)
        );
        let lit = crate::parser::parse_expression("1").unwrap();
        assert_eq!(
            type_expr(&env, &delta, &lit).unwrap(),
            BaseType::range(1, 1)
        );
        let bal = crate::parser::parse_expression("y.balance").unwrap();
        assert_eq!(type_expr(&env, &delta, &bal).unwrap(), BaseType::Int);
    }

    #[test]
    fn worked_example_bounds() {
        let (env, delta) = worked_example_env();
        let call = parse_statement("y.f(x):1").unwrap();
        assert_eq!(type_stmt(&env, &delta, &call).unwrap(), BigInt::from(22));
        let lp = parse_statement("for x do y.f(x):1").unwrap();
        assert_eq!(type_stmt(&env, &delta, &lp).unwrap(), BigInt::from(116));
        assert_eq!(min_gas(&env, &delta, &lp).unwrap(), BigInt::from(117));
    }

    #[test]
    fn stmt_bound_basics() {
        let env = TypeEnv::empty();
        let delta = VarTypes::new();
        assert_eq!(
            type_stmt(&env, &delta, &Stm::Skip).unwrap(),
            BigInt::from(1)
        );
        assert_eq!(
            type_stmt(&env, &delta, &parse_statement("skip; skip").unwrap()).unwrap(),
            BigInt::from(3)
        );
        assert_eq!(min_gas(&env, &delta, &Stm::Skip).unwrap(), BigInt::from(2));
        // Non-positive guard upper bound: only the exit step.
        let delta = delta.extended("e", BaseType::range(-5, 0));
        assert_eq!(
            type_stmt(&env, &delta, &parse_statement("for e do skip").unwrap()).unwrap(),
            BigInt::from(1)
        );
    }

    #[test]
    fn unbounded_guard_rejected() {
        let env = TypeEnv::empty();
        let delta = VarTypes::new().extended("x", BaseType::Int);
        let err = type_stmt(&env, &delta, &parse_statement("for x do skip").unwrap()).unwrap_err();
        assert_eq!(err.code(), "UnboundedLoopGuard");
    }

    #[test]
    fn bounded_increment_rejected() {
        let env = TypeEnv::empty();
        let delta = VarTypes::new().extended("x", BaseType::range(1, 5));
        let err = type_stmt(&env, &delta, &parse_statement("x := x + 1").unwrap()).unwrap_err();
        assert_eq!(err.code(), "TypeMismatch");
        // On an unbounded variable the same assignment is fine.
        let delta = VarTypes::new().extended("x", BaseType::Int);
        assert!(type_stmt(&env, &delta, &parse_statement("x := x + 1").unwrap()).is_ok());
    }

    #[test]
    fn call_amount_must_fit() {
        let (env, delta) = worked_example_env();
        let call = parse_statement("y.f(x):11").unwrap();
        let err = type_stmt(&env, &delta, &call).unwrap_err();
        assert_eq!(err.code(), "AmountOutOfDeclaredRange");
    }

    #[test]
    fn loop_bound_monotone_in_guard_width() {
        let env = TypeEnv::empty();
        let mut last = BigInt::from(0);
        for hi in 0..20 {
            let delta = VarTypes::new().extended("x", BaseType::range(0, hi));
            let n = type_stmt(&env, &delta, &parse_statement("for x do skip").unwrap()).unwrap();
            assert!(
                n >= last,
                "bound decreased when widening guard to [0..{hi}]"
            );
            last = n;
        }
    }

    #[test]
    fn check_declarations_accepts_fitting_bound() {
        let file =
            parse_program("interface I { f()^5_0 : 1 } contract C : I { f() { skip } }").unwrap();
        let env = TypeEnv::build(&file.interfaces, &file.contracts, default_int_max()).unwrap();
        let report = check_declarations(&env, &file.contracts, Some(&file.spans));
        assert!(report.ok(), "{:?}", report.diagnostics);
        let r = &report.methods["C"]["f"];
        assert_eq!(r.computed_bound, Some(BigInt::from(1)));
        assert_eq!(r.min_gas, BigInt::from(4));
    }

    #[test]
    fn recursion_rejected() {
        let file =
            parse_program("interface I { f()^5_0 : 100 } contract C : I { f() { this.f():0 } }")
                .unwrap();
        let env = TypeEnv::build(&file.interfaces, &file.contracts, default_int_max()).unwrap();
        let report = check_declarations(&env, &file.contracts, None);
        assert!(!report.ok());
        assert_eq!(
            report.diagnostics[0].error.code(),
            "BodyExceedsDeclaredBound"
        );
    }

    #[test]
    fn mutual_recursion_rejected() {
        let file = parse_program(
            "interface I { f()^5_0 : 100 g()^5_0 : 100 }
             contract C : I { f() { this.g():0 } g() { this.f():0 } }",
        )
        .unwrap();
        let env = TypeEnv::build(&file.interfaces, &file.contracts, default_int_max()).unwrap();
        let report = check_declarations(&env, &file.contracts, None);
        assert!(!report.ok());
        assert!(
            report
                .diagnostics
                .iter()
                .any(|d| d.error.code() == "BodyExceedsDeclaredBound")
        );
    }

    #[test]
    fn field_type_mismatch() {
        let file =
            parse_program("interface I { p: bool } contract C : I { field p := 3; }").unwrap();
        let env = TypeEnv::build(&file.interfaces, &file.contracts, default_int_max()).unwrap();
        let report = check_declarations(&env, &file.contracts, None);
        assert_eq!(report.diagnostics[0].error.code(), "FieldTypeMismatch");
    }

    #[test]
    fn agreement_at_genesis_and_after_corruption() {
        let file = parse_program(
            "interface I { p: int[1..5] f()^5_0 : 1 }
             contract C : I { field p := 3; f() { skip } }",
        )
        .unwrap();
        let env = TypeEnv::build(&file.interfaces, &file.contracts, default_int_max()).unwrap();
        assert!(check_declarations(&env, &file.contracts, None).ok());
        let (state, table) = crate::env::elaborate(&file.contracts).unwrap();
        let vars = VarEnv::new();
        assert!(check_env_agreement(&env, &state, &table, &vars).ok());
        // A bounded field holding 9 breaks agreement.
        let bad =
            crate::env::state_update_field(&state, &Addr::new("C"), "p", Value::int(9)).unwrap();
        assert!(!state_agrees(&env, &bad).ok());
        // A body over its declared bound breaks table agreement.
        let mut bad_table = table.clone();
        bad_table
            .get_mut(&Addr::new("C"))
            .unwrap()
            .insert("f".into(), (vec![], Stm::seq(Stm::Skip, Stm::Skip)));
        assert!(!table_agrees(&env, &bad_table).ok());
    }

    #[test]
    fn interface_validation() {
        let int_max = default_int_max();
        // Hand-built interface missing balance.
        let mut decl = InterfaceDecl::with_mandatory("I", &int_max);
        decl.members.remove(BALANCE);
        assert!(TypeEnv::build(&[decl], &[], int_max.clone()).is_err());
        // Parsed interfaces are always well-formed.
        let ok = parse_interface("interface I { q: int[0..3] }").unwrap();
        assert!(TypeEnv::build(&[ok], &[], int_max).is_ok());
    }
}
