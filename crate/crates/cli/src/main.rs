// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! The `tinysol` command: type-check, run, trace, and bound `.tsol` programs,
//! and drive the conformance suites.
//!
//! Exit codes: 0 for success (including runs whose transactions raise
//! exceptions — rollback is defined semantics, not tool failure), 1 for
//! check/conformance failures, 2 for parse or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;

use tinysol::chain::{genesis_with, restore, snapshot};
use tinysol::conformance::generator::GenConfig;
use tinysol::conformance::{lemma_suites, run_conformance};
use tinysol::parser::{SourceFile, default_int_max, parse_program_with};
use tinysol::typesys::{TypeEnv, VarTypes, check_declarations, type_stmt};
use tinysol::{BaseType, chain};

#[derive(Parser)]
#[command(name = "tinysol", version, about = "TinySol language tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check a program: every method body must fit its declared step
    /// bound.
    Check {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Execute a program's transactions, printing receipts and the final
    /// state.
    Run {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Start from a state snapshot instead of the genesis state.
        #[arg(long, value_name = "PATH")]
        snapshot_in: Option<PathBuf>,
        /// Write the final state as a canonical snapshot.
        #[arg(long, value_name = "PATH")]
        snapshot_out: Option<PathBuf>,
    },
    /// Print the machine trace of one transaction as JSON lines.
    Trace {
        file: PathBuf,
        /// Transaction index (earlier transactions are applied first).
        #[arg(long)]
        tx: usize,
    },
    /// Print the static step bound and minimal gas for a method (`C.f`) or a
    /// scheduled transaction (`--tx N`).
    Bound {
        file: PathBuf,
        /// Method path of the form `Contract.method`.
        target: Option<String>,
        #[arg(long)]
        tx: Option<usize>,
    },
    /// Run the randomized conformance suites (subject reduction, gas-bound
    /// soundness, agreement lemmas).
    Conformance {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let int_max = match int_max_from_env() {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let code = match cli.command {
        Command::Check { file, json } => cmd_check(&file, json, &int_max),
        Command::Run {
            file,
            json,
            snapshot_in,
            snapshot_out,
        } => cmd_run(
            &file,
            json,
            snapshot_in.as_deref(),
            snapshot_out.as_deref(),
            &int_max,
        ),
        Command::Trace { file, tx } => cmd_trace(&file, tx, &int_max),
        Command::Bound { file, target, tx } => cmd_bound(&file, target.as_deref(), tx, &int_max),
        Command::Conformance { cases, seed, json } => cmd_conformance(cases, seed, json),
    };
    ExitCode::from(code)
}

/// `TINYSOL_INT_MAX` overrides the default upper bound used in types.
fn int_max_from_env() -> Result<BigInt, String> {
    match std::env::var("TINYSOL_INT_MAX") {
        Err(_) => Ok(default_int_max()),
        Ok(raw) => raw
            .trim()
            .parse::<BigInt>()
            .map_err(|_| format!("TINYSOL_INT_MAX is not an integer: `{raw}`")),
    }
}

fn load(path: &Path, int_max: &BigInt) -> Result<SourceFile, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
    parse_program_with(&text, int_max).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_check(path: &Path, json: bool, int_max: &BigInt) -> u8 {
    let file = match load(path, int_max) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let env = match TypeEnv::build(&file.interfaces, &file.contracts, int_max.clone()) {
        Ok(env) => env,
        Err(e) => {
            // A malformed interface or unresolved binding is a type error.
            if json {
                println!(
                    "{}",
                    serde_json::json!({ "ok": false, "error": { "code": e.code(), "message": e.to_string() } })
                );
            } else {
                eprintln!("{}: {e}", e.code());
            }
            return 1;
        }
    };
    let report = check_declarations(&env, &file.contracts, Some(&file.spans));
    if json {
        println!("{}", report.to_json());
    } else {
        for (contract, methods) in &report.methods {
            for (method, r) in methods {
                let computed = r
                    .computed_bound
                    .as_ref()
                    .map(|n| n.to_string())
                    .unwrap_or_else(|| "-".into());
                println!(
                    "{contract}.{method}: declared_n={} computed_n={computed} min_gas={}",
                    r.declared_bound, r.min_gas
                );
            }
        }
        for d in &report.diagnostics {
            eprintln!("{d}");
        }
        if report.ok() {
            println!("ok");
        } else {
            eprintln!("{} error(s)", report.diagnostics.len());
        }
    }
    if report.ok() { 0 } else { 1 }
}

fn cmd_run(
    path: &Path,
    json: bool,
    snapshot_in: Option<&Path>,
    snapshot_out: Option<&Path>,
    int_max: &BigInt,
) -> u8 {
    let file = match load(path, int_max) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let blockchain = file.into_blockchain();
    let mut cs = match genesis_with(&blockchain, int_max) {
        Ok(cs) => cs,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(snap_path) = snapshot_in {
        let text = match std::fs::read_to_string(snap_path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read `{}`: {e}", snap_path.display());
                return 2;
            }
        };
        let restored = match restore(&text) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        };
        for addr in cs.state.keys() {
            if !restored.contains_key(addr) {
                eprintln!("error: snapshot is missing declared contract `{addr}`");
                return 2;
            }
        }
        cs.state = restored;
    }
    cs.run_to_end();
    if json {
        let receipts: Vec<serde_json::Value> = cs.log.iter().map(|r| r.to_json()).collect();
        let out = serde_json::json!({
            "receipts": receipts,
            "state": tinysol::env::state_to_json(&cs.state),
        });
        println!("{out}");
    } else {
        for (i, r) in cs.log.iter().enumerate() {
            let outcome = match r.outcome {
                chain::TxOutcome::Done => "done".to_string(),
                chain::TxOutcome::Exception(l) => format!("exception:{l}"),
                chain::TxOutcome::Skipped(reason) => format!("skipped:{}", reason.as_str()),
            };
            println!("tx {i}: {} -> {outcome} gas_used={}", r.tx, r.gas_used);
        }
        println!("final state: {}", snapshot(&cs.state));
    }
    if let Some(out_path) = snapshot_out
        && let Err(e) = std::fs::write(out_path, snapshot(&cs.state))
    {
        eprintln!("error: cannot write `{}`: {e}", out_path.display());
        return 2;
    }
    0
}

fn cmd_trace(path: &Path, tx_index: usize, int_max: &BigInt) -> u8 {
    let file = match load(path, int_max) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let blockchain = file.into_blockchain();
    if tx_index >= blockchain.txs.len() {
        eprintln!(
            "error: transaction index {tx_index} out of range ({} scheduled)",
            blockchain.txs.len()
        );
        return 2;
    }
    let mut cs = match genesis_with(&blockchain, int_max) {
        Ok(cs) => cs,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    for _ in 0..tx_index {
        cs.exec_transaction();
    }
    let Some((receipt, trace)) = cs.exec_transaction_traced() else {
        eprintln!("error: no transaction to trace");
        return 2;
    };
    if let chain::TxOutcome::Skipped(reason) = receipt.outcome {
        eprintln!("transaction skipped: {}", reason.as_str());
    }
    for record in trace {
        println!("{}", record.to_json());
    }
    0
}

fn cmd_bound(path: &Path, target: Option<&str>, tx: Option<usize>, int_max: &BigInt) -> u8 {
    let file = match load(path, int_max) {
        Ok(f) => f,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let env = match TypeEnv::build(&file.interfaces, &file.contracts, int_max.clone()) {
        Ok(env) => env,
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            return 1;
        }
    };
    let big = |n: &BigInt| {
        serde_json::Value::Number(serde_json::Number::from_string_unchecked(n.to_string()))
    };
    match (target, tx) {
        (Some(path_str), None) => {
            let Some((contract, method)) = path_str.split_once('.') else {
                eprintln!("error: target must look like `Contract.method`");
                return 2;
            };
            let iface = match env.binding(&tinysol::Addr::new(contract)) {
                Ok(i) => i.to_string(),
                Err(e) => {
                    eprintln!("{}: {e}", e.code());
                    return 1;
                }
            };
            let sig = match env.method_sig(&iface, method) {
                Ok(s) => s.clone(),
                Err(e) => {
                    eprintln!("{}: {e}", e.code());
                    return 1;
                }
            };
            let call_bound = &sig.bound + 2;
            let out = serde_json::json!({
                "target": path_str,
                "declared_n": big(&sig.bound),
                "call_bound": big(&call_bound),
                "min_gas": big(&(&call_bound + 1)),
            });
            println!("{out}");
            0
        }
        (None, Some(index)) => {
            if index >= file.txs.len() {
                eprintln!("error: transaction index {index} out of range");
                return 2;
            }
            let tx = &file.txs[index];
            let iface = env
                .binding(&tx.caller)
                .unwrap_or(tinysol::syntax::TOP_IFACE)
                .to_string();
            let delta: VarTypes = vec![("this".to_string(), BaseType::iface(&iface))]
                .into_iter()
                .collect();
            match type_stmt(&env, &delta, &chain::tx_call_stm(tx)) {
                Ok(bound) => {
                    let out = serde_json::json!({
                        "target": format!("tx {index}"),
                        "call_bound": big(&bound),
                        "min_gas": big(&(&bound + 1)),
                    });
                    println!("{out}");
                    0
                }
                Err(e) => {
                    eprintln!("{}: {e}", e.code());
                    1
                }
            }
        }
        _ => {
            eprintln!("error: pass exactly one of a `Contract.method` target or `--tx N`");
            2
        }
    }
}

fn cmd_conformance(cases: usize, seed: u64, json: bool) -> u8 {
    let base = GenConfig {
        seed,
        ..GenConfig::default()
    };
    let programs = run_conformance(&base, cases);
    let lemmas = lemma_suites(cases, seed.wrapping_add(0x9E37_79B9));
    let ok = programs.ok() && lemmas.ok();
    if json {
        let out = serde_json::json!({
            "programs": programs.to_json(),
            "lemmas": lemmas.to_json(),
            "ok": ok,
        });
        println!("{out}");
    } else {
        println!(
            "programs: {}/{} passed ({} machine steps checked)",
            programs.passed, programs.cases, programs.total_steps
        );
        println!(
            "lemmas: strengthening {}/{c}, update-vars {}/{c}, update-fields {}/{c}, expr-safety {}/{c}",
            lemmas.strengthening,
            lemmas.update_vars,
            lemmas.update_fields,
            lemmas.expr_safety,
            c = lemmas.cases
        );
        for f in &programs.failures {
            eprintln!("seed {}: {}: {}", f.seed, f.kind, f.detail);
        }
        for f in &lemmas.failures {
            eprintln!("{f}");
        }
        println!("{}", if ok { "ok" } else { "FAILED" });
    }
    if ok { 0 } else { 1 }
}
