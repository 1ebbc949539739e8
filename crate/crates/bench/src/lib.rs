// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Shared fixtures for the benchmark targets.

use num_bigint::BigInt;
use tinysol::chain::genesis;
use tinysol::machine::Config;
use tinysol::parser::parse_program;
use tinysol::{ChainState, Transaction};

/// A busy but well-typed program: nested loops, arithmetic, field writes,
/// and a two-level call chain.
pub const BUSY_PROGRAM: &str = "
interface Itally { total: int bump(int[0..9])^5_0 : 8 }
interface Idriver { run(int[1..6])^5_0 : 600 }

contract Tally : Itally {
  field total := 0;
  bump(k) { this.total := this.total + k + value }
}

contract Driver : Idriver {
  field balance := 1000;
  run(n) {
    for n do {
      Tally.bump(3):1;
      for 2 do Tally.bump(1):0
    }
  }
}

contract Fund { field balance := 100000; }

Fund->Driver.run(5):(0,4000)
";

/// Genesis state for [`BUSY_PROGRAM`].
pub fn busy_chain() -> ChainState {
    let file = parse_program(BUSY_PROGRAM).expect("benchmark program parses");
    genesis(&file.into_blockchain()).expect("benchmark program elaborates")
}

/// The initial machine configuration of the scheduled transaction.
pub fn busy_config(cs: &ChainState) -> (Config, Transaction) {
    let tx = cs.pending.front().expect("one transaction").clone();
    (cs.tx_config(&tx), tx)
}

/// Gas that comfortably covers the run.
pub fn ample_gas() -> BigInt {
    BigInt::from(4000)
}
