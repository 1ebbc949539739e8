// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Randomized suites for the agreement lemmas behind subject reduction:
//!
//! - strengthening: dropping a binding unused by the variable environment
//!   preserves agreement;
//! - update (variables / fields): replacing a stored value with another
//!   inhabitant of its declared type preserves agreement;
//! - expression safety: a well-typed expression evaluates to an inhabitant
//!   of its type — in particular, an interval-typed expression lands inside
//!   its interval.

use num_bigint::BigInt;
use rand::Rng;

use crate::env::{State, VarEnv, elaborate, state_update_field};
use crate::machine::eval_expr;
use crate::parser::parse_program;
use crate::syntax::{Addr, BaseType, TOP_IFACE, Value};
use crate::typesys::{
    TypeEnv, VarTypes, state_agrees, subtype, type_expr, value_has_type, var_env_agrees,
};

use super::generator::{ExprCtx, Gen};

/// Per-lemma pass counts; any discrepancy lands in `failures`.
#[derive(Clone, Debug, Default)]
pub struct LemmaReport {
    pub cases: usize,
    pub strengthening: usize,
    pub update_vars: usize,
    pub update_fields: usize,
    pub expr_safety: usize,
    pub failures: Vec<String>,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("cases".into(), serde_json::Value::from(self.cases));
        obj.insert(
            "strengthening".into(),
            serde_json::Value::from(self.strengthening),
        );
        obj.insert(
            "update_vars".into(),
            serde_json::Value::from(self.update_vars),
        );
        obj.insert(
            "update_fields".into(),
            serde_json::Value::from(self.update_fields),
        );
        obj.insert(
            "expr_safety".into(),
            serde_json::Value::from(self.expr_safety),
        );
        obj.insert(
            "failures".into(),
            serde_json::Value::Array(
                self.failures
                    .iter()
                    .map(|f| serde_json::Value::String(f.clone()))
                    .collect(),
            ),
        );
        obj.insert("ok".into(), serde_json::Value::Bool(self.ok()));
        serde_json::Value::Object(obj)
    }
}

/// The fixture world the lemma instances run against.
struct World {
    env: TypeEnv,
    state: State,
    contracts: Vec<(Addr, String)>,
    int_fields: Vec<(Addr, String)>,
}

fn world() -> World {
    let file = parse_program(
        "interface I0 { p: int q: bool r: int[0..9] }
         contract D0 : I0 { field p := 3; field q := true; field r := 5; }
         contract D1 { }",
    )
    .expect("fixture parses");
    let env = TypeEnv::build(
        &file.interfaces,
        &file.contracts,
        crate::parser::default_int_max(),
    )
    .expect("fixture types");
    let (state, _) = elaborate(&file.contracts).expect("fixture elaborates");
    World {
        env,
        state,
        contracts: vec![
            (Addr::new("D0"), "I0".to_string()),
            (Addr::new("D1"), TOP_IFACE.to_string()),
        ],
        int_fields: vec![
            (Addr::new("D0"), "p".to_string()),
            (Addr::new("D0"), "r".to_string()),
        ],
    }
}

/// A random type together with a random inhabiting value.
fn random_typed_value(g: &mut Gen, w: &World) -> (BaseType, Value) {
    match g.rng.random_range(0..100) {
        0..=29 => {
            let lo = BigInt::from(g.rng.random_range(-5i64..=5));
            let hi = &lo + BigInt::from(g.rng.random_range(0i64..=6));
            let v = g.rand_in(&lo, &hi);
            (BaseType::IntRange(lo, hi), Value::Int(v))
        }
        30..=54 => (
            BaseType::Int,
            Value::Int(BigInt::from(g.rng.random_range(-99i64..=99))),
        ),
        55..=74 => (BaseType::Bool, Value::Bool(g.rng.random_bool(0.5))),
        75..=89 => (BaseType::iface("I0"), Value::Addr(Addr::new("D0"))),
        _ => {
            // Anything inhabits the top interface.
            let pick = g.rng.random_range(0..w.contracts.len());
            (
                BaseType::iface(TOP_IFACE),
                Value::Addr(w.contracts[pick].0.clone()),
            )
        }
    }
}

/// A random agreeing pair of a variable environment and its exact local type
/// environment.
fn random_agreeing_env(g: &mut Gen, w: &World) -> (VarEnv, VarTypes) {
    let k = g.rng.random_range(0..=4usize);
    let mut bindings = Vec::new();
    for i in 0..k {
        let (ty, v) = random_typed_value(g, w);
        bindings.push((format!("x{i}"), v, ty));
    }
    let vars: VarEnv = bindings.into_iter().collect();
    let delta = VarTypes::from_var_env(&vars);
    (vars, delta)
}

/// A fresh value inhabiting the given type, for the update lemmas.
fn random_inhabitant(g: &mut Gen, w: &World, ty: &BaseType) -> Option<Value> {
    Some(match ty {
        BaseType::Int => Value::Int(BigInt::from(g.rng.random_range(-99i64..=99))),
        BaseType::IntRange(lo, hi) => Value::Int(g.rand_in(lo, hi)),
        BaseType::Bool => Value::Bool(g.rng.random_bool(0.5)),
        BaseType::Iface(_) => {
            let candidates: Vec<&Addr> = w
                .contracts
                .iter()
                .filter(|(a, _)| {
                    let min = BaseType::iface(w.env.binding(a).unwrap_or(TOP_IFACE));
                    subtype(&w.env, &min, ty).unwrap_or(false)
                })
                .map(|(a, _)| a)
                .collect();
            if candidates.is_empty() {
                return None;
            }
            Value::Addr(candidates[g.rng.random_range(0..candidates.len())].clone())
        }
    })
}

/// Runs all four lemma suites for `cases` instances each.
pub fn lemma_suites(cases: usize, seed: u64) -> LemmaReport {
    let w = world();
    let mut g = Gen::new(seed);
    let mut report = LemmaReport {
        cases,
        ..Default::default()
    };

    for i in 0..cases {
        // Strengthening: agreement under (delta, x:B) with x unused implies
        // agreement under delta.
        {
            let (vars, delta) = random_agreeing_env(&mut g, &w);
            let (ty, _) = random_typed_value(&mut g, &w);
            let extended = delta.extended("fresh", ty);
            if !var_env_agrees(&w.env, &extended, &vars).ok() {
                report
                    .failures
                    .push(format!("strengthening premise failed at case {i}"));
            } else if !var_env_agrees(&w.env, &delta, &vars).ok() {
                report
                    .failures
                    .push(format!("strengthening conclusion failed at case {i}"));
            } else {
                report.strengthening += 1;
            }
        }

        // Update for variables: a well-typed point update preserves
        // agreement.
        {
            let (vars, delta) = random_agreeing_env(&mut g, &w);
            if vars.bindings().is_empty() {
                report.update_vars += 1;
            } else {
                let pick = g.rng.random_range(0..vars.bindings().len());
                let name = vars.bindings()[pick].name.clone();
                let ty = delta.lookup(&name).cloned().expect("bound");
                match random_inhabitant(&mut g, &w, &ty) {
                    None => report.update_vars += 1,
                    Some(v) => {
                        let updated = vars.updated(&name, v).expect("bound");
                        if var_env_agrees(&w.env, &delta, &updated).ok() {
                            report.update_vars += 1;
                        } else {
                            report.failures.push(format!(
                                "variable update broke agreement at case {i} (`{name}`)"
                            ));
                        }
                    }
                }
            }
        }

        // Update for fields: same, through the state.
        {
            let (addr, field) = (Addr::new("D0"), ["p", "q", "r"][g.rng.random_range(0..3)]);
            let iface = w.env.binding(&addr).unwrap().to_string();
            let ty = w.env.field_type(&iface, field).unwrap().clone();
            match random_inhabitant(&mut g, &w, &ty) {
                None => report.update_fields += 1,
                Some(v) => {
                    let updated = state_update_field(&w.state, &addr, field, v).expect("present");
                    if state_agrees(&w.env, &updated).ok() {
                        report.update_fields += 1;
                    } else {
                        report.failures.push(format!(
                            "field update broke agreement at case {i} (`{field}`)"
                        ));
                    }
                }
            }
        }

        // Safety for expressions: evaluation lands inside the static type.
        {
            let (vars, delta) = random_agreeing_env(&mut g, &w);
            let scope: Vec<(String, BaseType)> = delta.bindings().to_vec();
            let ctx = ExprCtx {
                contracts: &w.contracts,
                int_fields: &w.int_fields,
                scope: &scope,
                this_iface: None,
            };
            let target = match g.rng.random_range(0..3) {
                0 => BaseType::Int,
                1 => BaseType::Bool,
                _ => {
                    let lo = BigInt::from(g.rng.random_range(-4i64..=4));
                    let hi = &lo + BigInt::from(g.rng.random_range(0i64..=5));
                    BaseType::IntRange(lo, hi)
                }
            };
            let Some(e) = g.expr_of(&ctx, &target, 3) else {
                report.expr_safety += 1;
                continue;
            };
            match (
                type_expr(&w.env, &delta, &e),
                eval_expr(&w.state, &vars, &e),
            ) {
                (Ok(ty), Ok(v)) => {
                    if value_has_type(&w.env, &v, &ty) {
                        report.expr_safety += 1;
                    } else {
                        report.failures.push(format!(
                            "expression safety failed at case {i}: `{e}` : {ty} evaluated to {v}"
                        ));
                    }
                }
                (Err(te), _) => {
                    report.failures.push(format!(
                        "generated expression failed to type at case {i}: {te}"
                    ));
                }
                (_, Err(ee)) => {
                    report.failures.push(format!(
                        "generated expression failed to evaluate at case {i}: {ee}"
                    ));
                }
            }
        }
    }
    report
}
