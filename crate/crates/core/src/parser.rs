// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Concrete syntax for `.tsol` files: interface declarations, contract
//! declarations, and a transaction sequence, interleaved freely.
//!
//! Conventions the grammar relies on:
//!
//! - address and interface names begin with an uppercase letter; variable,
//!   field, and method names with a lowercase letter (this disambiguates the
//!   two kinds of bare identifier in expression position);
//! - identifiers are alphanumeric without underscores, leaving `_` free for
//!   the method-type syntax `f(B,...)^u_l : n`;
//! - `//` starts a line comment;
//! - `;` separates statements and associates to the right; braces group;
//! - every contract implicitly carries `balance` and `send()`; the only
//!   balance-related text users may write is the optional leading
//!   `field balance := n;` that funds the contract.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::syntax::{
    Addr, BALANCE, BaseType, Blockchain, ContractDecl, Expr, InterfaceDecl, LVal, MAGIC_VARS,
    MemberType, MethodDecl, MethodType, OpKind, SEND, Stm, Transaction, Value,
    validate_contract_shape,
};

/// The default upper bound used in types (`send`'s accepted transfer range
/// and omitted method-type bounds): 2^63 - 1.
pub fn default_int_max() -> BigInt {
    BigInt::from(i64::MAX)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("{line}:{col}: duplicate member `{name}`")]
    DuplicateMember { line: u32, col: u32, name: String },
}

impl ParseError {
    pub fn line_col(&self) -> (u32, u32) {
        match self {
            ParseError::Syntax { line, col, .. } => (*line, *col),
            ParseError::DuplicateMember { line, col, .. } => (*line, *col),
        }
    }
}

type PResult<T> = Result<T, ParseError>;

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    UIdent(String),
    Int(BigInt),
    // keywords
    Contract,
    Interface,
    Field,
    Var,
    If,
    Then,
    Else,
    For,
    Do,
    Skip,
    Throw,
    In,
    TyInt,
    TyBool,
    True,
    False,
    And,
    Or,
    Not,
    This,
    Sender,
    ValueKw,
    // symbols
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Dot,
    DotDot,
    Assign,
    Arrow,
    Caret,
    Underscore,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(x) | Tok::UIdent(x) => return write!(f, "`{x}`"),
            Tok::Int(n) => return write!(f, "`{n}`"),
            Tok::Contract => "contract",
            Tok::Interface => "interface",
            Tok::Field => "field",
            Tok::Var => "var",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::For => "for",
            Tok::Do => "do",
            Tok::Skip => "skip",
            Tok::Throw => "throw",
            Tok::In => "in",
            Tok::TyInt => "int",
            Tok::TyBool => "bool",
            Tok::True => "true",
            Tok::False => "false",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::This => "this",
            Tok::Sender => "sender",
            Tok::ValueKw => "value",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Assign => ":=",
            Tok::Arrow => "->",
            Tok::Caret => "^",
            Tok::Underscore => "_",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Eof => "end of input",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "contract" => Tok::Contract,
        "interface" => Tok::Interface,
        "field" => Tok::Field,
        "var" => Tok::Var,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "for" => Tok::For,
        "do" => Tok::Do,
        "skip" => Tok::Skip,
        "throw" => Tok::Throw,
        "in" => Tok::In,
        "int" => Tok::TyInt,
        "bool" => Tok::TyBool,
        "true" => Tok::True,
        "false" => Tok::False,
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        "this" => Tok::This,
        "sender" => Tok::Sender,
        "value" => Tok::ValueKw,
        _ => return None,
    })
}

fn lex(text: &str) -> PResult<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    macro_rules! err {
        ($l:expr, $c:expr, $($msg:tt)*) => {
            return Err(ParseError::Syntax { line: $l, col: $c, msg: format!($($msg)*) })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '/' {
            // Either a comment or division; decide after the second char.
            bump(&mut chars);
            if chars.peek() == Some(&'/') {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            out.push(Spanned {
                tok: Tok::Slash,
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&c2) = chars.peek() {
                if c2.is_ascii_digit() {
                    digits.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            if chars.peek().is_some_and(|c2| c2.is_ascii_alphabetic()) {
                err!(tl, tc, "malformed number");
            }
            let n: BigInt = digits.parse().expect("digits parse");
            out.push(Spanned {
                tok: Tok::Int(n),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut word = String::new();
            while let Some(&c2) = chars.peek() {
                if c2.is_ascii_alphanumeric() {
                    word.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            let tok = keyword(&word).unwrap_or_else(|| {
                if word.chars().next().unwrap().is_ascii_uppercase() {
                    Tok::UIdent(word)
                } else {
                    Tok::Ident(word)
                }
            });
            out.push(Spanned {
                tok,
                line: tl,
                col: tc,
            });
            continue;
        }
        let first = bump(&mut chars);
        let tok = match first {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '^' => Tok::Caret,
            '_' => Tok::Underscore,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '.' => {
                if chars.peek() == Some(&'.') {
                    bump(&mut chars);
                    Tok::DotDot
                } else {
                    Tok::Dot
                }
            }
            ':' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Assign
                } else {
                    Tok::Colon
                }
            }
            '-' => {
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    Tok::Minus
                }
            }
            '<' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '=' => {
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::EqEq
                } else {
                    err!(
                        tl,
                        tc,
                        "unexpected `=` (use `:=` for assignment, `==` for equality)"
                    );
                }
            }
            other => err!(tl, tc, "unexpected character `{other}`"),
        };
        out.push(Spanned {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Name-path to (line, col) of the declaration site, e.g. `"C"`, `"C.f"`,
/// `"I"`. Kept outside the trees so parsed and hand-built trees compare equal.
pub type SpanTable = BTreeMap<String, (u32, u32)>;

/// A parsed program file: declarations plus the transaction sequence.
#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub interfaces: Vec<InterfaceDecl>,
    pub contracts: Vec<ContractDecl>,
    pub txs: Vec<Transaction>,
    pub spans: SpanTable,
}

impl SourceFile {
    pub fn into_blockchain(self) -> Blockchain {
        Blockchain {
            interfaces: self.interfaces,
            contracts: self.contracts,
            txs: self.txs,
        }
    }

    pub fn to_blockchain(&self) -> Blockchain {
        self.clone().into_blockchain()
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    int_max: BigInt,
}

impl Parser {
    fn new(text: &str, int_max: BigInt) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            int_max,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        let i = (self.pos + 1).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (u32, u32) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, col) = self.here();
        Err(ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn lower_ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(x)
            }
            Tok::UIdent(x) => {
                self.error(format!("{what} `{x}` must start with a lowercase letter"))
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    fn upper_ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::UIdent(x) => {
                self.advance();
                Ok(x)
            }
            Tok::Ident(x) => {
                self.error(format!("{what} `{x}` must start with an uppercase letter"))
            }
            other => self.error(format!("expected {what}, found {other}")),
        }
    }

    fn check_declarable(&self, what: &str, name: &str) -> PResult<()> {
        if name == BALANCE || name == SEND || MAGIC_VARS.contains(&name) {
            let (line, col) = self.here();
            return Err(ParseError::Syntax {
                line,
                col,
                msg: format!("reserved name `{name}` cannot be declared as a {what}"),
            });
        }
        Ok(())
    }

    fn signed_int(&mut self) -> PResult<BigInt> {
        let negative = if *self.peek() == Tok::Minus {
            self.advance();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(if negative { -n } else { n })
            }
            other => self.error(format!("expected integer literal, found {other}")),
        }
    }

    // -- types ------------------------------------------------------------

    fn base_type(&mut self) -> PResult<BaseType> {
        match self.peek().clone() {
            Tok::TyBool => {
                self.advance();
                Ok(BaseType::Bool)
            }
            Tok::TyInt => {
                self.advance();
                if *self.peek() == Tok::LBracket {
                    self.advance();
                    let lo = self.signed_int()?;
                    self.expect(Tok::DotDot)?;
                    let hi = self.signed_int()?;
                    if lo > hi {
                        return self.error(format!(
                            "empty integer range [{lo}..{hi}]: lower bound exceeds upper bound"
                        ));
                    }
                    self.expect(Tok::RBracket)?;
                    Ok(BaseType::IntRange(lo, hi))
                } else {
                    Ok(BaseType::Int)
                }
            }
            Tok::UIdent(i) => {
                self.advance();
                Ok(BaseType::Iface(i))
            }
            other => self.error(format!("expected a type, found {other}")),
        }
    }

    // -- expressions --------------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut e = self.and_expr()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.and_expr()?;
            e = Expr::Op(OpKind::Or, vec![e, rhs]);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut e = self.cmp_expr()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.cmp_expr()?;
            e = Expr::Op(OpKind::And, vec![e, rhs]);
        }
        Ok(e)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let mut e = self.add_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => OpKind::Lt,
                Tok::Le => OpKind::Le,
                Tok::Gt => OpKind::Gt,
                Tok::Ge => OpKind::Ge,
                Tok::EqEq => OpKind::Eq,
                _ => break,
            };
            self.advance();
            let rhs = self.add_expr()?;
            e = Expr::Op(op, vec![e, rhs]);
        }
        Ok(e)
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut e = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => OpKind::Add,
                Tok::Minus => OpKind::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.mul_expr()?;
            e = Expr::Op(op, vec![e, rhs]);
        }
        Ok(e)
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut e = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => OpKind::Mul,
                Tok::Slash => OpKind::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.unary_expr()?;
            e = Expr::Op(op, vec![e, rhs]);
        }
        Ok(e)
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                let e = self.unary_expr()?;
                Ok(Expr::Op(OpKind::Not, vec![e]))
            }
            Tok::Minus => {
                self.advance();
                // A minus directly in front of a literal is a negative
                // literal; anywhere else it desugars to `0 - e`.
                if let Tok::Int(n) = self.peek().clone() {
                    self.advance();
                    Ok(Expr::Val(Value::Int(-n)))
                } else {
                    let e = self.unary_expr()?;
                    Ok(Expr::Op(OpKind::Sub, vec![Expr::int(0), e]))
                }
            }
            _ => self.postfix_expr(),
        }
    }

    fn postfix_expr(&mut self) -> PResult<Expr> {
        let mut e = self.primary_expr()?;
        while *self.peek() == Tok::Dot {
            self.advance();
            e = self.postfix_member(e, false)?.expect("expression member");
        }
        Ok(e)
    }

    /// Parses the member after a `.`: `balance` or a field name. In statement
    /// position (`stmt_ok`), a field name followed by `(` instead begins a
    /// method call and `None` is returned after the full call is consumed by
    /// the caller via `pending_call`.
    fn postfix_member(&mut self, recv: Expr, stmt_ok: bool) -> PResult<Option<Expr>> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                if name == BALANCE {
                    self.advance();
                    return Ok(Some(Expr::Balance(Box::new(recv))));
                }
                if *self.peek2() == Tok::LParen {
                    if stmt_ok {
                        return Ok(None);
                    }
                    return self.error("method calls cannot appear inside expressions");
                }
                self.advance();
                Ok(Some(Expr::Field(Box::new(recv), name)))
            }
            other => self.error(format!("expected field name or `balance`, found {other}")),
        }
    }

    fn primary_expr(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Val(Value::Int(n)))
            }
            Tok::True => {
                self.advance();
                Ok(Expr::Val(Value::Bool(true)))
            }
            Tok::False => {
                self.advance();
                Ok(Expr::Val(Value::Bool(false)))
            }
            Tok::Ident(x) => {
                self.advance();
                Ok(Expr::Var(x))
            }
            Tok::UIdent(a) => {
                self.advance();
                Ok(Expr::Val(Value::Addr(Addr(a))))
            }
            Tok::This => {
                self.advance();
                Ok(Expr::Var("this".into()))
            }
            Tok::Sender => {
                self.advance();
                Ok(Expr::Var("sender".into()))
            }
            Tok::ValueKw => {
                self.advance();
                Ok(Expr::Var("value".into()))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => self.error(format!("expected expression, found {other}")),
        }
    }

    // -- statements ---------------------------------------------------------

    fn stmt(&mut self) -> PResult<Stm> {
        let first = self.simple_stmt()?;
        if *self.peek() == Tok::Semi {
            self.advance();
            let rest = self.stmt()?;
            Ok(Stm::seq(first, rest))
        } else {
            Ok(first)
        }
    }

    fn simple_stmt(&mut self) -> PResult<Stm> {
        match self.peek().clone() {
            Tok::Skip => {
                self.advance();
                Ok(Stm::Skip)
            }
            Tok::Throw => {
                self.advance();
                Ok(Stm::Throw)
            }
            Tok::LBrace => {
                self.advance();
                let s = self.stmt()?;
                self.expect(Tok::RBrace)?;
                Ok(s)
            }
            Tok::Var => {
                self.advance();
                let ty = self.base_type()?;
                self.check_declarable(
                    "variable",
                    match self.peek() {
                        Tok::Ident(x) => x,
                        _ => "",
                    },
                )?;
                let name = self.lower_ident("variable name")?;
                self.expect(Tok::Assign)?;
                let init = self.expr()?;
                self.expect(Tok::In)?;
                let body = self.simple_stmt()?;
                Ok(Stm::DeclVar {
                    ty,
                    name,
                    init,
                    body: Box::new(body),
                })
            }
            Tok::If => {
                self.advance();
                let guard = self.expr()?;
                self.expect(Tok::Then)?;
                let then_branch = self.simple_stmt()?;
                self.expect(Tok::Else)?;
                let else_branch = self.simple_stmt()?;
                Ok(Stm::If {
                    guard,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                })
            }
            Tok::For => {
                self.advance();
                let guard = self.expr()?;
                self.expect(Tok::Do)?;
                let body = self.simple_stmt()?;
                Ok(Stm::For {
                    guard,
                    body: Box::new(body),
                })
            }
            _ => self.expr_stmt(),
        }
    }

    /// Statements that begin with an expression: assignments and calls.
    fn expr_stmt(&mut self) -> PResult<Stm> {
        let mut e = self.unary_expr_no_postfix()?;
        loop {
            if *self.peek() != Tok::Dot {
                break;
            }
            self.advance();
            match self.postfix_member(e.clone(), true)? {
                Some(next) => e = next,
                None => {
                    // `.f(` — the rest is a method call.
                    let method = self.lower_ident("method name")?;
                    self.expect(Tok::LParen)?;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if *self.peek() == Tok::Comma {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Colon)?;
                    let amount = self.expr()?;
                    return Ok(Stm::Call {
                        recv: e,
                        method,
                        args,
                        amount,
                    });
                }
            }
        }
        // Not a call, so this must be an assignment.
        let (line, col) = self.here();
        self.expect(Tok::Assign)?;
        let target = match e {
            Expr::Var(x) if !MAGIC_VARS.contains(&x.as_str()) => LVal::Var(x),
            Expr::Var(x) => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    msg: format!("cannot assign to the magic variable `{x}`"),
                });
            }
            Expr::Balance(_) => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    msg: "the balance field can never be assigned to directly".into(),
                });
            }
            Expr::Field(recv, p) if *recv == Expr::Var("this".into()) => LVal::ThisField(p),
            _ => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    msg: "assignment target must be a variable or `this.p`".into(),
                });
            }
        };
        let value = self.expr()?;
        Ok(Stm::Assign { target, value })
    }

    /// Like `unary_expr` but keeps postfix chains to `expr_stmt`, which must
    /// intercept method calls.
    fn unary_expr_no_postfix(&mut self) -> PResult<Expr> {
        self.primary_expr()
    }

    // -- values ---------------------------------------------------------------

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Minus | Tok::Int(_) => Ok(Value::Int(self.signed_int()?)),
            Tok::True => {
                self.advance();
                Ok(Value::Bool(true))
            }
            Tok::False => {
                self.advance();
                Ok(Value::Bool(false))
            }
            Tok::UIdent(a) => {
                self.advance();
                Ok(Value::Addr(Addr(a)))
            }
            other => self.error(format!("expected a value, found {other}")),
        }
    }

    // -- declarations -----------------------------------------------------------

    fn interface_decl(&mut self, spans: &mut SpanTable) -> PResult<InterfaceDecl> {
        let (line, col) = self.here();
        self.expect(Tok::Interface)?;
        let name = self.upper_ident("interface name")?;
        spans.insert(name.clone(), (line, col));
        self.expect(Tok::LBrace)?;
        let mut decl = InterfaceDecl::with_mandatory(&name, &self.int_max.clone());
        while *self.peek() != Tok::RBrace {
            let (mline, mcol) = self.here();
            let member_name = self.lower_ident("member name")?;
            if member_name == BALANCE || member_name == SEND {
                // Auto-inserted; an explicit declaration collides with it.
                return Err(ParseError::DuplicateMember {
                    line: mline,
                    col: mcol,
                    name: member_name,
                });
            }
            let member = if *self.peek() == Tok::LParen {
                self.advance();
                let mut params = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        params.push(self.base_type()?);
                        if *self.peek() == Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                let (amount_hi, amount_lo) = if *self.peek() == Tok::Caret {
                    self.advance();
                    let hi = self.signed_int()?;
                    self.expect(Tok::Underscore)?;
                    let lo = self.signed_int()?;
                    if lo > hi {
                        return self.error(format!(
                            "empty transfer range ^{hi}_{lo}: lower bound exceeds upper bound"
                        ));
                    }
                    (hi, lo)
                } else {
                    (self.int_max.clone(), BigInt::from(0))
                };
                self.expect(Tok::Colon)?;
                let bound = self.signed_int()?;
                if bound < BigInt::from(1) {
                    return self.error("method step bound must be at least 1");
                }
                MemberType::Method(MethodType {
                    params,
                    amount_lo,
                    amount_hi,
                    bound,
                })
            } else {
                self.expect(Tok::Colon)?;
                MemberType::Field(self.base_type()?)
            };
            if decl.members.contains_key(&member_name) {
                return Err(ParseError::DuplicateMember {
                    line: mline,
                    col: mcol,
                    name: member_name,
                });
            }
            spans.insert(format!("{name}.{member_name}"), (mline, mcol));
            decl.members.insert(member_name, member);
        }
        self.expect(Tok::RBrace)?;
        Ok(decl)
    }

    fn contract_decl(&mut self, spans: &mut SpanTable) -> PResult<ContractDecl> {
        let (line, col) = self.here();
        self.expect(Tok::Contract)?;
        let name = self.upper_ident("contract name")?;
        spans.insert(name.clone(), (line, col));
        let interface = if *self.peek() == Tok::Colon {
            self.advance();
            Some(self.upper_ident("interface name")?)
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        let mut decl = ContractDecl::new(&name);
        decl.interface = interface;

        let mut first_field = true;
        while *self.peek() == Tok::Field {
            let (fline, fcol) = self.here();
            self.advance();
            let fname = self.lower_ident("field name")?;
            if fname == BALANCE {
                if !first_field {
                    return Err(ParseError::Syntax {
                        line: fline,
                        col: fcol,
                        msg: "the balance field may only appear first in a contract".into(),
                    });
                }
                self.expect(Tok::Assign)?;
                decl.initial_balance = self.signed_int()?;
                self.expect(Tok::Semi)?;
                first_field = false;
                continue;
            }
            self.check_declarable("field", &fname)?;
            self.expect(Tok::Assign)?;
            let v = self.value()?;
            self.expect(Tok::Semi)?;
            spans.insert(format!("{name}.{fname}"), (fline, fcol));
            decl.fields.push((fname, v));
            first_field = false;
        }

        while let Tok::Ident(_) = self.peek() {
            let (mline, mcol) = self.here();
            let mname = self.lower_ident("method name")?;
            self.check_declarable("method", &mname)?;
            self.expect(Tok::LParen)?;
            let mut params = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    self.check_declarable(
                        "parameter",
                        match self.peek() {
                            Tok::Ident(x) => x,
                            _ => "",
                        },
                    )?;
                    params.push(self.lower_ident("parameter name")?);
                    if *self.peek() == Tok::Comma {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::LBrace)?;
            let body = self.stmt()?;
            self.expect(Tok::RBrace)?;
            spans.insert(format!("{name}.{mname}"), (mline, mcol));
            decl.methods.push(MethodDecl {
                name: mname,
                params,
                body,
            });
        }

        if *self.peek() == Tok::Field {
            return self.error("field declarations must precede methods");
        }
        self.expect(Tok::RBrace)?;

        if let Err(e) = validate_contract_shape(&decl) {
            return Err(ParseError::Syntax {
                line,
                col,
                msg: e.to_string(),
            });
        }
        Ok(decl)
    }

    fn transaction(&mut self) -> PResult<Transaction> {
        let caller = Addr(self.upper_ident("caller address")?);
        self.expect(Tok::Arrow)?;
        let target = Addr(self.upper_ident("target address")?);
        self.expect(Tok::Dot)?;
        let method = self.lower_ident("method name")?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.value()?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Colon)?;
        self.expect(Tok::LParen)?;
        let amount = self.signed_int()?;
        self.expect(Tok::Comma)?;
        let (gline, gcol) = self.here();
        let gas = self.signed_int()?;
        if gas <= BigInt::from(0) {
            return Err(ParseError::Syntax {
                line: gline,
                col: gcol,
                msg: "gas limit must be positive".into(),
            });
        }
        self.expect(Tok::RParen)?;
        Ok(Transaction {
            caller,
            target,
            method,
            args,
            amount,
            gas,
        })
    }

    fn source_file(&mut self) -> PResult<SourceFile> {
        let mut file = SourceFile::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Interface => {
                    let decl = self.interface_decl(&mut file.spans)?;
                    if file.interfaces.iter().any(|i| i.name == decl.name) {
                        return self.error(format!("duplicate interface `{}`", decl.name));
                    }
                    file.interfaces.push(decl);
                }
                Tok::Contract => {
                    let decl = self.contract_decl(&mut file.spans)?;
                    if file.contracts.iter().any(|c| c.name == decl.name) {
                        return self.error(format!("duplicate contract `{}`", decl.name));
                    }
                    file.contracts.push(decl);
                }
                Tok::UIdent(_) => {
                    let tx = self.transaction()?;
                    file.txs.push(tx);
                }
                other => {
                    let msg =
                        format!("expected interface, contract, or transaction, found {other}");
                    return self.error(msg);
                }
            }
        }
        Ok(file)
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Parses a whole program file (interfaces, contracts, transactions).
pub fn parse_program(text: &str) -> PResult<SourceFile> {
    parse_program_with(text, &default_int_max())
}

/// Like [`parse_program`] with an explicit INT_MAX for omitted method-type
/// bounds and the auto-inserted `send` signature.
pub fn parse_program_with(text: &str, int_max: &BigInt) -> PResult<SourceFile> {
    let mut p = Parser::new(text, int_max.clone())?;
    p.source_file()
}

/// Parses a single interface declaration.
pub fn parse_interface(text: &str) -> PResult<InterfaceDecl> {
    parse_interface_with(text, &default_int_max())
}

pub fn parse_interface_with(text: &str, int_max: &BigInt) -> PResult<InterfaceDecl> {
    let mut p = Parser::new(text, int_max.clone())?;
    let mut spans = SpanTable::new();
    let decl = p.interface_decl(&mut spans)?;
    p.expect(Tok::Eof)?;
    Ok(decl)
}

/// Parses a single expression.
pub fn parse_expression(text: &str) -> PResult<Expr> {
    let mut p = Parser::new(text, default_int_max())?;
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

/// Parses a single statement.
pub fn parse_statement(text: &str) -> PResult<Stm> {
    let mut p = Parser::new(text, default_int_max())?;
    let s = p.stmt()?;
    p.expect(Tok::Eof)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_contract_example() {
        let file = parse_program("contract C { field p := 0; f(x) { skip } }").unwrap();
        assert_eq!(file.contracts.len(), 1);
        let c = &file.contracts[0];
        assert_eq!(c.name, Addr::new("C"));
        assert_eq!(c.initial_balance, BigInt::from(0));
        assert_eq!(c.fields, vec![("p".to_string(), Value::int(0))]);
        assert_eq!(c.methods.len(), 1);
        assert_eq!(c.methods[0].name, "f");
        assert_eq!(c.methods[0].params, vec!["x".to_string()]);
        assert_eq!(c.methods[0].body, Stm::Skip);
    }

    #[test]
    fn parse_transaction_example() {
        let file = parse_program("A->C.f(3):(1,10)").unwrap();
        assert_eq!(file.txs.len(), 1);
        let tx = &file.txs[0];
        assert_eq!(tx.caller, Addr::new("A"));
        assert_eq!(tx.target, Addr::new("C"));
        assert_eq!(tx.method, "f");
        assert_eq!(tx.args, vec![Value::int(3)]);
        assert_eq!(tx.amount, BigInt::from(1));
        assert_eq!(tx.gas, BigInt::from(10));
    }

    #[test]
    fn balance_assignment_rejected() {
        let err = parse_statement("this.balance := 5").unwrap_err();
        match err {
            ParseError::Syntax { msg, .. } => assert!(msg.contains("balance")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gas_must_be_positive() {
        assert!(parse_program("A->C.f():(0,0)").is_err());
        assert!(parse_program("A->C.f():(0,-3)").is_err());
    }

    #[test]
    fn parse_interface_example() {
        let i = parse_interface("interface I { f(int)^10_1 : 20 }").unwrap();
        assert_eq!(i.name, "I");
        let f = i.method("f").unwrap();
        assert_eq!(f.params, vec![BaseType::Int]);
        assert_eq!(f.amount_lo, BigInt::from(1));
        assert_eq!(f.amount_hi, BigInt::from(10));
        assert_eq!(f.bound, BigInt::from(20));
    }

    #[test]
    fn empty_interface_has_mandatory_members() {
        let j = parse_interface("interface J { }").unwrap();
        assert_eq!(j.members.len(), 2);
        assert_eq!(j.field("balance"), Some(&BaseType::Int));
        let send = j.method("send").unwrap();
        assert!(send.params.is_empty());
        assert_eq!(send.amount_lo, BigInt::from(0));
        assert_eq!(send.amount_hi, default_int_max());
        assert_eq!(send.bound, BigInt::from(1));
    }

    #[test]
    fn duplicate_interface_member() {
        let err = parse_interface("interface K { f(int):20 f(bool):1 }").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateMember { ref name, .. } if name == "f"));
    }

    #[test]
    fn omitted_bounds_default_to_int_max() {
        let k = parse_interface("interface K { f(int):20 }").unwrap();
        let f = k.method("f").unwrap();
        assert_eq!(f.amount_lo, BigInt::from(0));
        assert_eq!(f.amount_hi, default_int_max());
    }

    #[test]
    fn parse_expression_examples() {
        assert_eq!(
            parse_expression("10 - x").unwrap(),
            Expr::Op(OpKind::Sub, vec![Expr::int(10), Expr::var("x")])
        );
        assert_eq!(
            parse_expression("y.balance").unwrap(),
            Expr::Balance(Box::new(Expr::var("y")))
        );
        assert_eq!(
            parse_expression("1 + 2 * 3").unwrap(),
            Expr::Op(
                OpKind::Add,
                vec![
                    Expr::int(1),
                    Expr::Op(OpKind::Mul, vec![Expr::int(2), Expr::int(3)])
                ]
            )
        );
    }

    #[test]
    fn uppercase_ident_is_address_literal() {
        assert_eq!(parse_expression("C").unwrap(), Expr::addr("C"));
        assert_eq!(parse_expression("x").unwrap(), Expr::var("x"));
        assert_eq!(
            parse_expression("C.p").unwrap(),
            Expr::Field(Box::new(Expr::addr("C")), "p".into())
        );
    }

    #[test]
    fn negative_literals_fold() {
        assert_eq!(parse_expression("-5").unwrap(), Expr::int(-5));
        assert_eq!(
            parse_expression("-x").unwrap(),
            Expr::Op(OpKind::Sub, vec![Expr::int(0), Expr::var("x")])
        );
        assert_eq!(
            parse_expression("-(5)").unwrap(),
            Expr::Op(OpKind::Sub, vec![Expr::int(0), Expr::int(5)])
        );
        assert_eq!(
            parse_expression("3 - -5").unwrap(),
            Expr::Op(OpKind::Sub, vec![Expr::int(3), Expr::int(-5)])
        );
    }

    #[test]
    fn statement_forms() {
        assert_eq!(
            parse_statement("skip; skip").unwrap(),
            Stm::seq(Stm::Skip, Stm::Skip)
        );
        let s = parse_statement("var int[1..5] x := 3 in x := x").unwrap();
        match s {
            Stm::DeclVar { ty, name, .. } => {
                assert_eq!(ty, BaseType::range(1, 5));
                assert_eq!(name, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
        let call = parse_statement("y.f(x):1").unwrap();
        assert_eq!(
            call,
            Stm::Call {
                recv: Expr::var("y"),
                method: "f".into(),
                args: vec![Expr::var("x")],
                amount: Expr::int(1),
            }
        );
        assert_eq!(
            parse_statement("for x do y.f(x):1").unwrap(),
            Stm::For {
                guard: Expr::var("x"),
                body: Box::new(Stm::Call {
                    recv: Expr::var("y"),
                    method: "f".into(),
                    args: vec![Expr::var("x")],
                    amount: Expr::int(1),
                })
            }
        );
    }

    #[test]
    fn seq_binds_to_the_right_of_bodies() {
        // `; skip` attaches after the loop, not inside its body.
        let s = parse_statement("for x do skip; skip").unwrap();
        assert_eq!(
            s,
            Stm::seq(
                Stm::For {
                    guard: Expr::var("x"),
                    body: Box::new(Stm::Skip)
                },
                Stm::Skip
            )
        );
    }

    #[test]
    fn assignment_targets() {
        assert_eq!(
            parse_statement("x := 1").unwrap(),
            Stm::Assign {
                target: LVal::Var("x".into()),
                value: Expr::int(1)
            }
        );
        assert_eq!(
            parse_statement("this.p := 1").unwrap(),
            Stm::Assign {
                target: LVal::ThisField("p".into()),
                value: Expr::int(1)
            }
        );
        assert!(parse_statement("this := 1").is_err());
        assert!(parse_statement("y.p := 1").is_err());
    }

    #[test]
    fn balance_field_funds_contract() {
        let file = parse_program("contract A { field balance := 1000; }").unwrap();
        assert_eq!(file.contracts[0].initial_balance, BigInt::from(1000));
        assert!(file.contracts[0].is_account());
        // Only in first position.
        assert!(parse_program("contract A { field p := 1; field balance := 2; }").is_err());
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(parse_program("contract C { f(sender) { skip } }").is_err());
        assert!(parse_program("contract C { send() { skip } }").is_err());
        assert!(parse_statement("var int balance := 0 in skip").is_err());
        assert!(parse_interface("interface I { balance: int }").is_err());
    }

    #[test]
    fn interface_binding_and_comments() {
        let text = "
            // a commented program
            interface I { f(int)^10_1 : 20 }
            contract C : I { f(x) { skip } } // trailing
        ";
        let file = parse_program(text).unwrap();
        assert_eq!(file.contracts[0].interface.as_deref(), Some("I"));
    }

    #[test]
    fn parser_is_deterministic() {
        let text =
            "contract C { field p := 0; f(x) { if x < 3 then skip else throw } } A->C.f(1):(0,9)";
        let a = parse_program(text).unwrap();
        let b = parse_program(text).unwrap();
        assert_eq!(a.contracts, b.contracts);
        assert_eq!(a.txs, b.txs);
    }

    #[test]
    fn spans_recorded() {
        let file = parse_program("contract C { f() { skip } }").unwrap();
        assert_eq!(file.spans.get("C"), Some(&(1, 1)));
        assert!(file.spans.contains_key("C.f"));
    }
}
