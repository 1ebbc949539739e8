// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Blockchain semantics: genesis elaboration, transaction execution with gas
//! billing and exception rollback, and canonical state snapshots.
//!
//! A transaction `A->X.f(args):(n,g)` runs the machine from the call
//! statement on an empty stack with `this` bound to the caller. The guard
//! `g <= balance(A) - n` must hold first; transactions failing it are marked
//! skipped (the underlying relation would simply be stuck) so whole-chain
//! runs are total. On success the final state is kept and the consumed gas
//! `g - g'` is deducted from the caller; on an exception every effect is
//! rolled back except that same deduction. Gas is burned: there are no
//! miners, so the currency total decreases by exactly the gas used.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use thiserror::Error;

use crate::env::{
    EnvError, MethodTable, State, VarEnv, balance_of, elaborate, state_from_json, state_to_json,
    state_update_field,
};
use crate::machine::{Config, ExcLabel, Machine, RunResult, StepRecord, Terminal};
use crate::parser::default_int_max;
use crate::syntax::{Addr, BALANCE, BaseType, Blockchain, Expr, Stm, Transaction, Value};
use crate::typesys::{TypeEnv, TypeError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GenesisError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Why a transaction was skipped rather than executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    /// The caller address does not exist in the state.
    UnknownCaller,
    /// The gas limit exceeds the caller's balance minus the transfer.
    GasExceedsFunds,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::UnknownCaller => "unknown caller",
            SkipReason::GasExceedsFunds => "gas limit exceeds caller funds",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TxOutcome {
    Done,
    Exception(ExcLabel),
    Skipped(SkipReason),
}

/// The observable result of one transaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxReceipt {
    pub tx: Transaction,
    pub outcome: TxOutcome,
    pub gas_used: BigInt,
    /// Net balance change per address, nonzero entries only (gas deduction
    /// included).
    pub balance_delta: BTreeMap<Addr, BigInt>,
}

impl TxReceipt {
    pub fn to_json(&self) -> serde_json::Value {
        let big = |n: &BigInt| {
            serde_json::Value::Number(serde_json::Number::from_string_unchecked(n.to_string()))
        };
        let mut obj = serde_json::Map::new();
        obj.insert("tx".into(), serde_json::Value::String(self.tx.to_string()));
        let outcome = match self.outcome {
            TxOutcome::Done => serde_json::Value::String("done".into()),
            TxOutcome::Exception(l) => {
                serde_json::Value::String(format!("exception:{}", l.as_str()))
            }
            TxOutcome::Skipped(r) => serde_json::Value::String(format!("skipped:{}", r.as_str())),
        };
        obj.insert("outcome".into(), outcome);
        obj.insert("gas_used".into(), big(&self.gas_used));
        let mut delta = serde_json::Map::new();
        for (addr, d) in &self.balance_delta {
            delta.insert(addr.to_string(), big(d));
        }
        obj.insert("balance_delta".into(), serde_json::Value::Object(delta));
        serde_json::Value::Object(obj)
    }
}

/// The chain: mutable state, the constant method table and type environment,
/// the pending transactions, and the receipt log.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub state: State,
    pub table: MethodTable,
    pub types: TypeEnv,
    pub pending: VecDeque<Transaction>,
    pub log: Vec<TxReceipt>,
}

/// Elaborates the declarations and schedules the transactions.
pub fn genesis(b: &Blockchain) -> Result<ChainState, GenesisError> {
    genesis_with(b, &default_int_max())
}

pub fn genesis_with(b: &Blockchain, int_max: &BigInt) -> Result<ChainState, GenesisError> {
    let (state, table) = elaborate(&b.contracts)?;
    let types = TypeEnv::build(&b.interfaces, &b.contracts, int_max.clone())?;
    Ok(ChainState {
        state,
        table,
        types,
        pending: b.txs.iter().cloned().collect(),
        log: Vec::new(),
    })
}

/// The call statement a transaction executes: receiver, arguments, and
/// amount are value literals.
pub fn tx_call_stm(tx: &Transaction) -> Stm {
    Stm::Call {
        recv: Expr::Val(Value::Addr(tx.target.clone())),
        method: tx.method.clone(),
        args: tx.args.iter().map(|v| Expr::Val(v.clone())).collect(),
        amount: Expr::Val(Value::Int(tx.amount.clone())),
    }
}

/// The initial variable environment of a transaction: just `this`, bound to
/// the caller and annotated with its declared interface.
pub fn tx_initial_vars(types: &TypeEnv, caller: &Addr) -> VarEnv {
    let iface = types.binding(caller).unwrap_or(crate::syntax::TOP_IFACE);
    [(
        "this".to_string(),
        Value::Addr(caller.clone()),
        BaseType::iface(iface),
    )]
    .into_iter()
    .collect()
}

impl ChainState {
    /// The initial machine configuration for a transaction against the
    /// current state.
    pub fn tx_config(&self, tx: &Transaction) -> Config {
        Config::initial(
            tx_call_stm(tx),
            self.state.clone(),
            tx_initial_vars(&self.types, &tx.caller),
            tx.gas.clone(),
        )
    }

    /// Executes the next pending transaction. Returns the receipt, or `None`
    /// when nothing is pending.
    pub fn exec_transaction(&mut self) -> Option<&TxReceipt> {
        let tx = self.pending.pop_front()?;
        let receipt = self.execute(tx);
        self.log.push(receipt);
        self.log.last()
    }

    /// Like [`ChainState::exec_transaction`], also returning the machine
    /// trace of the run (empty for skipped transactions).
    pub fn exec_transaction_traced(&mut self) -> Option<(&TxReceipt, Vec<StepRecord>)> {
        let tx = self.pending.pop_front()?;
        let (receipt, trace) = self.execute_traced(tx);
        self.log.push(receipt);
        Some((self.log.last().unwrap(), trace))
    }

    fn execute(&mut self, tx: Transaction) -> TxReceipt {
        self.execute_traced(tx).0
    }

    fn execute_traced(&mut self, tx: Transaction) -> (TxReceipt, Vec<StepRecord>) {
        let pre = self.state.clone();
        let skip = |reason: SkipReason| TxReceipt {
            tx: tx.clone(),
            outcome: TxOutcome::Skipped(reason),
            gas_used: BigInt::from(0),
            balance_delta: BTreeMap::new(),
        };
        let Some(caller_balance) = balance_of(&pre, &tx.caller).cloned() else {
            return (skip(SkipReason::UnknownCaller), Vec::new());
        };
        // Guard of both transaction rules: the gas limit must fit what is
        // left after the transfer.
        if tx.gas > &caller_balance - &tx.amount {
            return (skip(SkipReason::GasExceedsFunds), Vec::new());
        }

        let machine = Machine::new(&self.table, &self.types);
        let RunResult {
            terminal,
            config,
            trace,
        } = machine.run(self.tx_config(&tx));
        let gas_used = &tx.gas - &config.gas;

        let (outcome, base_state) = match terminal {
            Terminal::Done => (TxOutcome::Done, config.state),
            // Rollback: every effect is discarded; only the gas burn below
            // survives, applied to the pre-transaction state.
            Terminal::Exception(l) => (TxOutcome::Exception(l), pre.clone()),
        };
        let billed_balance = match balance_of(&base_state, &tx.caller) {
            Some(b) => b - &gas_used,
            None => -&gas_used,
        };
        let next = state_update_field(&base_state, &tx.caller, BALANCE, Value::Int(billed_balance))
            .expect("caller existed at guard time");

        let mut balance_delta = BTreeMap::new();
        for addr in pre.keys().chain(next.keys()) {
            if balance_delta.contains_key(addr) {
                continue;
            }
            let before = balance_of(&pre, addr).cloned().unwrap_or_default();
            let after = balance_of(&next, addr).cloned().unwrap_or_default();
            if before != after {
                balance_delta.insert(addr.clone(), after - before);
            }
        }

        self.state = next;
        (
            TxReceipt {
                tx,
                outcome,
                gas_used,
                balance_delta,
            },
            trace,
        )
    }

    /// Executes all pending transactions.
    pub fn run_to_end(&mut self) {
        while self.exec_transaction().is_some() {}
    }
}

/// Runs a whole blockchain: genesis, then every transaction in order,
/// revealing the final state and the receipts.
pub fn run_blockchain(b: &Blockchain) -> Result<(State, Vec<TxReceipt>), GenesisError> {
    let mut cs = genesis(b)?;
    cs.run_to_end();
    Ok((cs.state, cs.log))
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("malformed snapshot: {0}")]
pub struct SnapshotError(String);

/// Canonical snapshot bytes: minified JSON with sorted keys, stable for
/// byte-wise diffing.
pub fn snapshot(state: &State) -> String {
    state_to_json(state).to_string()
}

pub fn restore(text: &str) -> Result<State, SnapshotError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SnapshotError(e.to_string()))?;
    state_from_json(&value).ok_or_else(|| {
        SnapshotError("expected {address: {field: value}} with integer balances".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn chain(text: &str) -> ChainState {
        genesis(&parse_program(text).unwrap().into_blockchain()).unwrap()
    }

    #[test]
    fn genesis_examples() {
        let cs = chain("");
        assert!(cs.state.is_empty());
        assert!(cs.pending.is_empty());

        let cs = chain("contract C { } A->C.send():(0,5) A->C.send():(0,5)");
        assert_eq!(cs.state.len(), 1);
        assert_eq!(cs.pending.len(), 2);

        let mut b = parse_program("contract C { }").unwrap().into_blockchain();
        b.contracts.push(b.contracts[0].clone());
        assert!(matches!(
            genesis(&b),
            Err(GenesisError::Env(EnvError::DuplicateContract(_)))
        ));
    }

    #[test]
    fn successful_transaction_bills_gas() {
        let mut cs = chain(
            "contract A { field balance := 100; }
             contract C { f() { skip } }
             A->C.f():(0,10)",
        );
        let receipt = cs.exec_transaction().unwrap().clone();
        assert_eq!(receipt.outcome, TxOutcome::Done);
        assert_eq!(receipt.gas_used, BigInt::from(2));
        assert_eq!(cs.state[&Addr::new("A")]["balance"], Value::int(98));
        assert_eq!(cs.state[&Addr::new("C")]["balance"], Value::int(0));
        assert_eq!(receipt.balance_delta[&Addr::new("A")], BigInt::from(-2));
    }

    #[test]
    fn out_of_gas_rolls_back_but_burns_gas() {
        let mut cs = chain(
            "contract A { field balance := 100; }
             contract C { f() { skip } }
             A->C.f():(0,1)",
        );
        let receipt = cs.exec_transaction().unwrap().clone();
        assert_eq!(receipt.outcome, TxOutcome::Exception(ExcLabel::Oog));
        assert_eq!(receipt.gas_used, BigInt::from(1));
        assert_eq!(cs.state[&Addr::new("A")]["balance"], Value::int(99));
    }

    #[test]
    fn exception_restores_transferred_funds() {
        let mut cs = chain(
            "contract A { field balance := 100; }
             contract C { field p := 0; f() { this.p := 1; throw } }
             A->C.f(): (5,20)",
        );
        let receipt = cs.exec_transaction().unwrap().clone();
        assert_eq!(receipt.outcome, TxOutcome::Exception(ExcLabel::Pge));
        // The transfer of 5 and the field write are rolled back; only the
        // gas burn (call + assf; seq and throw are free) remains.
        assert_eq!(receipt.gas_used, BigInt::from(2));
        assert_eq!(cs.state[&Addr::new("A")]["balance"], Value::int(98));
        assert_eq!(cs.state[&Addr::new("C")]["balance"], Value::int(0));
        assert_eq!(cs.state[&Addr::new("C")]["p"], Value::int(0));
    }

    #[test]
    fn guard_failure_skips_without_effects() {
        let mut cs = chain(
            "contract A { field balance := 10; }
             contract C { f() { skip } }
             A->C.f():(8,3)",
        );
        let before = cs.state.clone();
        let receipt = cs.exec_transaction().unwrap().clone();
        assert_eq!(
            receipt.outcome,
            TxOutcome::Skipped(SkipReason::GasExceedsFunds)
        );
        assert_eq!(receipt.gas_used, BigInt::from(0));
        assert_eq!(cs.state, before);
        // Unknown caller is also a skip.
        let mut cs = chain("contract C { f() { skip } } B->C.f():(0,3)");
        let receipt = cs.exec_transaction().unwrap().clone();
        assert_eq!(
            receipt.outcome,
            TxOutcome::Skipped(SkipReason::UnknownCaller)
        );
    }

    #[test]
    fn chain_continues_after_failed_transaction() {
        let mut cs = chain(
            "contract A { field balance := 100; }
             contract C { field p := 0; f() { throw } g() { this.p := 7 } }
             A->C.f():(0,10)
             A->C.g():(0,10)",
        );
        cs.run_to_end();
        assert_eq!(cs.log.len(), 2);
        assert!(matches!(
            cs.log[0].outcome,
            TxOutcome::Exception(ExcLabel::Pge)
        ));
        assert_eq!(cs.log[1].outcome, TxOutcome::Done);
        assert_eq!(cs.state[&Addr::new("C")]["p"], Value::int(7));
    }

    #[test]
    fn run_blockchain_reveals_final_state() {
        let b = parse_program("contract C { field p := 1; }")
            .unwrap()
            .into_blockchain();
        let (state, receipts) = run_blockchain(&b).unwrap();
        assert!(receipts.is_empty());
        assert_eq!(state[&Addr::new("C")]["p"], Value::int(1));
    }

    #[test]
    fn currency_decreases_by_exactly_gas_used() {
        let mut cs = chain(
            "contract A { field balance := 100; }
             contract C { field balance := 7; f() { C.send():3 } }
             A->C.f():(2,10)",
        );
        let total =
            |s: &State| -> BigInt { s.keys().map(|a| balance_of(s, a).cloned().unwrap()).sum() };
        let before = total(&cs.state);
        let receipt = cs.exec_transaction().unwrap().clone();
        let after = total(&cs.state);
        assert_eq!(before - after, receipt.gas_used);
    }

    #[test]
    fn snapshot_round_trips() {
        let cs = chain(
            "contract C { field balance := 5; field p := 7; field q := true; field r := C; }",
        );
        let bytes = snapshot(&cs.state);
        assert_eq!(restore(&bytes).unwrap(), cs.state);
        let empty = snapshot(&State::new());
        assert_eq!(restore(&empty).unwrap(), State::new());
        assert!(restore("not json").is_err());
        assert!(
            restore("{\"C\": {\"p\": 1}}").is_err(),
            "missing balance must be rejected"
        );
        assert!(restore("{\"C\": []}").is_err());
    }

    #[test]
    fn receipt_json_is_sorted_and_stable() {
        let mut cs = chain(
            "contract A { field balance := 100; }
             contract C { f() { skip } }
             A->C.f():(0,10)",
        );
        let receipt = cs.exec_transaction().unwrap().clone();
        let json = receipt.to_json().to_string();
        assert_eq!(
            json,
            "{\"balance_delta\":{\"A\":-2},\"gas_used\":2,\"outcome\":\"done\",\"tx\":\"A->C.f():(0,10)\"}"
        );
    }
}
