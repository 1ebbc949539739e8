// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! TinySol: a minimal Solidity-like smart-contract language with gas metering.
//!
//! The crate provides, in layers:
//!
//! - [`syntax`]: abstract syntax trees and structural well-formedness;
//! - [`parser`]: the concrete `.tsol` syntax (programs, interfaces, expressions);
//! - [`mod@env`]: the binding model and elaboration of declarations into
//!   runtime environments;
//! - [`machine`]: expression evaluation and the deterministic small-step stack
//!   machine with gas and exceptions;
//! - [`chain`]: blockchain-level transaction semantics with gas billing and
//!   exception rollback, plus canonical state snapshots;
//! - [`typesys`]: the gas-bound type system — subtyping, interval-typed
//!   integers, statement step bounds, declaration checking, and minimal-gas
//!   computation;
//! - [`conformance`]: executable metatheory — stack/configuration typing, the
//!   type-environment extraction function, a subject-reduction checker, a
//!   type-directed random program generator, and the lemma property suites.

// Error enums carry the offending types and values for diagnostics.
#![allow(clippy::result_large_err)]

pub mod chain;
pub mod conformance;
pub mod env;
pub mod machine;
pub mod parser;
pub mod syntax;
pub mod typesys;

pub use chain::{ChainState, TxOutcome, TxReceipt, genesis, run_blockchain};
pub use env::{FieldEnv, MethodEnv, MethodTable, State, VarEnv};
pub use machine::{Config, ExcLabel, Frame, Machine, Terminal};
pub use parser::{SourceFile, parse_expression, parse_interface, parse_program};
pub use syntax::{
    Addr, BaseType, Blockchain, ContractDecl, Expr, InterfaceDecl, LVal, MemberType, MethodDecl,
    MethodType, OpKind, Stm, Transaction, Value,
};
pub use typesys::{TypeEnv, VarTypes};
