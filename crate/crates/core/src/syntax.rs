// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Abstract syntax for the typed TinySol language: values, expressions,
//! statements, declarations, transactions, and the interface (type) layer.
//!
//! All trees are immutable after construction. The `Display` impls form the
//! pretty printer; its output reparses to a structurally equal tree (the
//! round-trip property exercised in the parser tests).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

/// Names reserved by the language: writable by the system, never declared by
/// users as fields, methods, variables, or parameters.
pub const BALANCE: &str = "balance";
/// Name of the mandatory no-op transfer method every contract carries.
pub const SEND: &str = "send";
/// The built-in top interface (every well-formed interface is a subtype).
pub const TOP_IFACE: &str = "Top";

/// The three magic variables implicitly bound inside method bodies.
pub const MAGIC_VARS: [&str; 3] = ["this", "sender", "value"];

/// A contract/account address name. Addresses start with an uppercase letter
/// in concrete syntax, distinguishing them from variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Addr(pub String);

impl Addr {
    pub fn new(name: impl Into<String>) -> Self {
        Addr(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Addr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Addr {
    fn from(s: &str) -> Self {
        Addr(s.to_string())
    }
}

/// Runtime values: unbounded integers, booleans, and address names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Addr(Addr),
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Value::Int(n.into())
    }

    pub fn addr(name: &str) -> Self {
        Value::Addr(Addr::new(name))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::Addr(_) => "address",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{}", if *b { "true" } else { "false" }),
            Value::Addr(a) => write!(f, "{a}"),
        }
    }
}

/// Operators. The language leaves the operator set open; this is the one the
/// whole artifact agrees on. Division truncates toward zero and is a runtime
/// error on a zero divisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    And,
    Or,
    Not,
}

impl OpKind {
    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Add => "+",
            OpKind::Sub => "-",
            OpKind::Mul => "*",
            OpKind::Div => "/",
            OpKind::Lt => "<",
            OpKind::Le => "<=",
            OpKind::Gt => ">",
            OpKind::Ge => ">=",
            OpKind::Eq => "==",
            OpKind::And => "and",
            OpKind::Or => "or",
            OpKind::Not => "not",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            OpKind::Not => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Expressions. `Var` covers both ordinary variables and the magic names
/// `this`/`sender`/`value`; `Balance` is the dedicated `e.balance` read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Val(Value),
    Var(String),
    Balance(Box<Expr>),
    Field(Box<Expr>, String),
    Op(OpKind, Vec<Expr>),
}

impl Expr {
    pub fn int(n: impl Into<BigInt>) -> Self {
        Expr::Val(Value::Int(n.into()))
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn addr(name: &str) -> Self {
        Expr::Val(Value::addr(name))
    }

    pub fn op(kind: OpKind, args: Vec<Expr>) -> Self {
        Expr::Op(kind, args)
    }
}

/// Assignment targets: a local variable or a field of the current contract.
/// `balance` can never appear here; the grammar excludes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LVal {
    Var(String),
    ThisField(String),
}

impl fmt::Display for LVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LVal::Var(x) => f.write_str(x),
            LVal::ThisField(p) => write!(f, "this.{p}"),
        }
    }
}

/// Statements of the typed language: local declarations carry their type
/// annotation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stm {
    Skip,
    Throw,
    DeclVar {
        ty: BaseType,
        name: String,
        init: Expr,
        body: Box<Stm>,
    },
    Assign {
        target: LVal,
        value: Expr,
    },
    Seq(Box<Stm>, Box<Stm>),
    If {
        guard: Expr,
        then_branch: Box<Stm>,
        else_branch: Box<Stm>,
    },
    For {
        guard: Expr,
        body: Box<Stm>,
    },
    Call {
        recv: Expr,
        method: String,
        args: Vec<Expr>,
        amount: Expr,
    },
}

impl Stm {
    pub fn seq(first: Stm, second: Stm) -> Stm {
        Stm::Seq(Box::new(first), Box::new(second))
    }
}

/// Base types: booleans, unbounded integers, bounded integers over an
/// inclusive interval, and interface names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseType {
    Bool,
    Int,
    IntRange(BigInt, BigInt),
    Iface(String),
}

impl BaseType {
    pub fn range(lo: impl Into<BigInt>, hi: impl Into<BigInt>) -> Self {
        BaseType::IntRange(lo.into(), hi.into())
    }

    pub fn iface(name: &str) -> Self {
        BaseType::Iface(name.to_string())
    }

    /// A bounded range must satisfy lo <= hi.
    pub fn is_well_formed(&self) -> bool {
        match self {
            BaseType::IntRange(lo, hi) => lo <= hi,
            _ => true,
        }
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Bool => f.write_str("bool"),
            BaseType::Int => f.write_str("int"),
            BaseType::IntRange(lo, hi) => write!(f, "int[{lo}..{hi}]"),
            BaseType::Iface(i) => f.write_str(i),
        }
    }
}

/// A method signature: parameter types, the accepted transfer interval
/// [amount_lo..amount_hi] for the `value` variable, and the step bound for
/// the body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodType {
    pub params: Vec<BaseType>,
    pub amount_lo: BigInt,
    pub amount_hi: BigInt,
    pub bound: BigInt,
}

impl fmt::Display for MethodType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(
            f,
            ")^{}_{} : {}",
            self.amount_hi, self.amount_lo, self.bound
        )
    }
}

/// An interface member: a field type or a method signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MemberType {
    Field(BaseType),
    Method(MethodType),
}

/// An interface declaration. Well-formed interfaces always contain the
/// mandatory members `balance: int` and `send()^INT_MAX_0 : 1`; the parser
/// inserts them automatically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterfaceDecl {
    pub name: String,
    pub members: BTreeMap<String, MemberType>,
}

impl InterfaceDecl {
    /// The minimal interface: just `balance` and `send`. Every well-formed
    /// interface is a subtype of this one; it is also the type of `sender`.
    pub fn top(int_max: &BigInt) -> Self {
        InterfaceDecl::with_mandatory(TOP_IFACE, int_max)
    }

    /// An empty interface of the given name plus the mandatory members.
    pub fn with_mandatory(name: &str, int_max: &BigInt) -> Self {
        let mut members = BTreeMap::new();
        members.insert(BALANCE.to_string(), MemberType::Field(BaseType::Int));
        members.insert(
            SEND.to_string(),
            MemberType::Method(MethodType {
                params: vec![],
                amount_lo: BigInt::from(0),
                amount_hi: int_max.clone(),
                bound: BigInt::from(1),
            }),
        );
        InterfaceDecl {
            name: name.to_string(),
            members,
        }
    }

    pub fn method(&self, name: &str) -> Option<&MethodType> {
        match self.members.get(name) {
            Some(MemberType::Method(m)) => Some(m),
            _ => None,
        }
    }

    pub fn field(&self, name: &str) -> Option<&BaseType> {
        match self.members.get(name) {
            Some(MemberType::Field(b)) => Some(b),
            _ => None,
        }
    }
}

/// A user method declaration inside a contract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: Stm,
}

/// A contract declaration. `initial_balance` is the mandatory balance member
/// of the production; `fields`/`methods` are the user-declared ones (never
/// `balance`/`send`, which the runtime synthesizes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractDecl {
    pub name: Addr,
    /// Explicit interface binding (`contract X : I`). Contracts without one
    /// are bound to the top interface.
    pub interface: Option<String>,
    pub initial_balance: BigInt,
    pub fields: Vec<(String, Value)>,
    pub methods: Vec<MethodDecl>,
}

impl ContractDecl {
    pub fn new(name: &str) -> Self {
        ContractDecl {
            name: Addr::new(name),
            interface: None,
            initial_balance: BigInt::from(0),
            fields: vec![],
            methods: vec![],
        }
    }

    /// An account is a contract with no user members: it only holds currency.
    pub fn is_account(&self) -> bool {
        self.fields.is_empty() && self.methods.is_empty()
    }
}

/// A transaction `A->X.f(args):(amount, gas)`, with gas > 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transaction {
    pub caller: Addr,
    pub target: Addr,
    pub method: String,
    pub args: Vec<Value>,
    pub amount: BigInt,
    pub gas: BigInt,
}

/// A blockchain: declarations (interfaces and contracts) followed by the
/// scheduled transactions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Blockchain {
    pub interfaces: Vec<InterfaceDecl>,
    pub contracts: Vec<ContractDecl>,
    pub txs: Vec<Transaction>,
}

/// Structural well-formedness errors for declarations.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("reserved name `{name}` cannot be declared by users")]
    ReservedName { name: String },
}

fn check_distinct(
    kind: &'static str,
    names: impl Iterator<Item = String>,
) -> Result<(), ShapeError> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if !seen.insert(n.clone()) {
            return Err(ShapeError::DuplicateName { kind, name: n });
        }
    }
    Ok(())
}

fn is_reserved_member(name: &str) -> bool {
    name == BALANCE || name == SEND || MAGIC_VARS.contains(&name)
}

/// Checks the ContractDecl invariants: distinct field/method/parameter names
/// and no user-declared `balance`/`send` (or magic-variable) members.
pub fn validate_contract_shape(c: &ContractDecl) -> Result<(), ShapeError> {
    for (p, _) in &c.fields {
        if is_reserved_member(p) {
            return Err(ShapeError::ReservedName { name: p.clone() });
        }
    }
    for m in &c.methods {
        if is_reserved_member(&m.name) {
            return Err(ShapeError::ReservedName {
                name: m.name.clone(),
            });
        }
        for x in &m.params {
            if is_reserved_member(x) {
                return Err(ShapeError::ReservedName { name: x.clone() });
            }
        }
    }
    check_distinct("field", c.fields.iter().map(|(p, _)| p.clone()))?;
    check_distinct("method", c.methods.iter().map(|m| m.name.clone()))?;
    for m in &c.methods {
        check_distinct("parameter", m.params.iter().cloned())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Pretty printing
// ---------------------------------------------------------------------------

// Precedence levels, loosest first. A child at a level strictly below its
// context gets parenthesized.
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_CMP: u8 = 3;
const PREC_ADD: u8 = 4;
const PREC_MUL: u8 = 5;
const PREC_UNARY: u8 = 6;
const PREC_POSTFIX: u8 = 7;
const PREC_ATOM: u8 = 8;

fn op_prec(op: OpKind) -> u8 {
    match op {
        OpKind::Or => PREC_OR,
        OpKind::And => PREC_AND,
        OpKind::Lt | OpKind::Le | OpKind::Gt | OpKind::Ge | OpKind::Eq => PREC_CMP,
        OpKind::Add | OpKind::Sub => PREC_ADD,
        OpKind::Mul | OpKind::Div => PREC_MUL,
        OpKind::Not => PREC_UNARY,
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Val(Value::Int(n)) if n.sign() == num_bigint::Sign::Minus => PREC_UNARY,
        Expr::Val(_) | Expr::Var(_) => PREC_ATOM,
        Expr::Balance(_) | Expr::Field(_, _) => PREC_POSTFIX,
        Expr::Op(op, _) => op_prec(*op),
    }
}

fn fmt_expr(e: &Expr, min_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = expr_prec(e);
    let parens = prec < min_prec;
    if parens {
        f.write_str("(")?;
    }
    match e {
        Expr::Val(v) => write!(f, "{v}")?,
        Expr::Var(x) => f.write_str(x)?,
        Expr::Balance(recv) => {
            fmt_expr(recv, PREC_POSTFIX, f)?;
            f.write_str(".balance")?;
        }
        Expr::Field(recv, p) => {
            fmt_expr(recv, PREC_POSTFIX, f)?;
            write!(f, ".{p}")?;
        }
        Expr::Op(OpKind::Not, args) => {
            f.write_str("not ")?;
            fmt_expr(
                args.first().unwrap_or(&Expr::Val(Value::Bool(false))),
                PREC_UNARY,
                f,
            )?;
        }
        Expr::Op(op, args) if args.len() == 2 => {
            // Binary operators associate to the left; the right operand is
            // printed one level tighter.
            fmt_expr(&args[0], prec, f)?;
            write!(f, " {op} ")?;
            fmt_expr(&args[1], prec + 1, f)?;
        }
        Expr::Op(op, args) => {
            // Malformed arity; print a call-like form for debuggability.
            write!(f, "{op}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                fmt_expr(a, 0, f)?;
            }
            f.write_str(")")?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, f)
    }
}

/// Bodies of `if`/`for`/`var` print unbraced when they are a single
/// statement; sequences get braces so the printed form reparses unchanged.
fn fmt_body(s: &Stm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if matches!(s, Stm::Seq(_, _)) {
        write!(f, "{{ {s} }}")
    } else {
        write!(f, "{s}")
    }
}

impl fmt::Display for Stm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stm::Skip => f.write_str("skip"),
            Stm::Throw => f.write_str("throw"),
            Stm::DeclVar {
                ty,
                name,
                init,
                body,
            } => {
                write!(f, "var {ty} {name} := {init} in ")?;
                fmt_body(body, f)
            }
            Stm::Assign { target, value } => write!(f, "{target} := {value}"),
            Stm::Seq(s1, s2) => {
                // `;` associates to the right; a nested sequence on the left
                // keeps its braces.
                fmt_body(s1, f)?;
                write!(f, "; {s2}")
            }
            Stm::If {
                guard,
                then_branch,
                else_branch,
            } => {
                write!(f, "if {guard} then ")?;
                fmt_body(then_branch, f)?;
                f.write_str(" else ")?;
                fmt_body(else_branch, f)
            }
            Stm::For { guard, body } => {
                write!(f, "for {guard} do ")?;
                fmt_body(body, f)
            }
            Stm::Call {
                recv,
                method,
                args,
                amount,
            } => {
                fmt_expr(recv, PREC_POSTFIX, f)?;
                write!(f, ".{method}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "):{amount}")
            }
        }
    }
}

impl fmt::Display for ContractDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "contract {}", self.name)?;
        if let Some(i) = &self.interface {
            write!(f, " : {i}")?;
        }
        f.write_str(" {\n")?;
        writeln!(f, "  field balance := {};", self.initial_balance)?;
        for (p, v) in &self.fields {
            writeln!(f, "  field {p} := {v};")?;
        }
        for m in &self.methods {
            write!(f, "  {}(", m.name)?;
            for (i, x) in m.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                f.write_str(x)?;
            }
            writeln!(f, ") {{ {} }}", m.body)?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Transaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}.{}(", self.caller, self.target, self.method)?;
        for (i, v) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "):({},{})", self.amount, self.gas)
    }
}

impl fmt::Display for InterfaceDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "interface {} {{", self.name)?;
        for (name, member) in &self.members {
            // The mandatory members are reinserted on parse.
            if name == BALANCE || name == SEND {
                continue;
            }
            match member {
                MemberType::Field(b) => writeln!(f, "  {name}: {b}")?,
                MemberType::Method(m) => writeln!(f, "  {name}{m}")?,
            }
        }
        f.write_str("}")
    }
}
