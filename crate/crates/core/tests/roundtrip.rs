// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Printer/parser round trips and algebraic invariants, over randomized
//! trees.

use num_bigint::BigInt;
use proptest::prelude::*;

use tinysol::env::{VarEnv, elaborate, var_update};
use tinysol::parser::{
    default_int_max, parse_expression, parse_interface, parse_program, parse_statement,
};
use tinysol::syntax::{
    Addr, BaseType, ContractDecl, Expr, InterfaceDecl, LVal, MemberType, MethodDecl, MethodType,
    OpKind, Stm, Transaction, Value,
};
use tinysol::typesys::{TypeEnv, subtype};

const VARS: &[&str] = &["x", "y", "zz", "foo", "bar", "acc", "tmp", "w1"];
const MAGIC: &[&str] = &["this", "sender", "value"];
const ADDRS: &[&str] = &["A", "B", "C", "X", "Y", "K2"];
const FIELDS: &[&str] = &["p", "q", "r2", "data"];
const METHODS: &[&str] = &["f", "g", "run", "tick"];

fn lident() -> impl Strategy<Value = String> {
    prop::sample::select(VARS).prop_map(str::to_string)
}

fn expr_var() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => prop::sample::select(VARS).prop_map(str::to_string),
        1 => prop::sample::select(MAGIC).prop_map(str::to_string),
    ]
}

fn uident() -> impl Strategy<Value = String> {
    prop::sample::select(ADDRS).prop_map(str::to_string)
}

fn field_name() -> impl Strategy<Value = String> {
    prop::sample::select(FIELDS).prop_map(str::to_string)
}

fn method_name() -> impl Strategy<Value = String> {
    prop::sample::select(METHODS).prop_map(str::to_string)
}

fn value_strategy() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-1_000_000i64..=1_000_000).prop_map(Value::int),
        any::<bool>().prop_map(Value::Bool),
        uident().prop_map(|a| Value::Addr(Addr::new(&a))),
    ]
}

fn base_type_strategy() -> impl Strategy<Value = BaseType> {
    prop_oneof![
        Just(BaseType::Bool),
        Just(BaseType::Int),
        (-50i64..=50, 0i64..=40).prop_map(|(lo, w)| BaseType::range(lo, lo + w)),
        uident().prop_map(BaseType::Iface),
    ]
}

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        value_strategy().prop_map(Expr::Val),
        expr_var().prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let binary = prop::sample::select(
            &[
                OpKind::Add,
                OpKind::Sub,
                OpKind::Mul,
                OpKind::Div,
                OpKind::Lt,
                OpKind::Le,
                OpKind::Gt,
                OpKind::Ge,
                OpKind::Eq,
                OpKind::And,
                OpKind::Or,
            ][..],
        );
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Balance(Box::new(e))),
            (inner.clone(), field_name()).prop_map(|(e, p)| Expr::Field(Box::new(e), p)),
            (binary, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Op(op, vec![a, b])),
            inner.prop_map(|e| Expr::Op(OpKind::Not, vec![e])),
        ]
    })
}

fn lval_strategy() -> impl Strategy<Value = LVal> {
    prop_oneof![
        lident().prop_map(LVal::Var),
        field_name().prop_map(LVal::ThisField),
    ]
}

fn stm_strategy() -> impl Strategy<Value = Stm> {
    let leaf = prop_oneof![
        Just(Stm::Skip),
        Just(Stm::Throw),
        (lval_strategy(), expr_strategy())
            .prop_map(|(target, value)| Stm::Assign { target, value }),
        (
            expr_strategy(),
            method_name(),
            prop::collection::vec(expr_strategy(), 0..3),
            expr_strategy()
        )
            .prop_map(|(recv, method, args, amount)| Stm::Call {
                recv,
                method,
                args,
                amount
            }),
    ];
    leaf.prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            (
                base_type_strategy(),
                lident(),
                expr_strategy(),
                inner.clone()
            )
                .prop_map(|(ty, name, init, body)| Stm::DeclVar {
                    ty,
                    name,
                    init,
                    body: Box::new(body)
                }),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Stm::seq(a, b)),
            (expr_strategy(), inner.clone(), inner.clone()).prop_map(|(guard, t, e)| Stm::If {
                guard,
                then_branch: Box::new(t),
                else_branch: Box::new(e)
            }),
            (expr_strategy(), inner).prop_map(|(guard, body)| Stm::For {
                guard,
                body: Box::new(body)
            }),
        ]
    })
}

fn contract_strategy() -> impl Strategy<Value = ContractDecl> {
    (
        uident(),
        prop::option::of(uident()),
        -1000i64..=1000,
        prop::collection::btree_map(field_name(), value_strategy(), 0..3),
        prop::collection::btree_map(
            method_name(),
            (prop::collection::btree_set(lident(), 0..3), stm_strategy()),
            0..3,
        ),
    )
        .prop_map(|(name, interface, balance, fields, methods)| ContractDecl {
            name: Addr::new(&name),
            interface,
            initial_balance: BigInt::from(balance),
            fields: fields.into_iter().collect(),
            methods: methods
                .into_iter()
                .map(|(name, (params, body))| MethodDecl {
                    name,
                    params: params.into_iter().collect(),
                    body,
                })
                .collect(),
        })
}

fn interface_strategy() -> impl Strategy<Value = InterfaceDecl> {
    let member = prop_oneof![
        base_type_strategy().prop_map(MemberType::Field),
        (
            prop::collection::vec(base_type_strategy(), 0..3),
            -20i64..=20,
            0i64..=30,
            1i64..=500
        )
            .prop_map(|(params, lo, w, bound)| {
                MemberType::Method(MethodType {
                    params,
                    amount_lo: BigInt::from(lo),
                    amount_hi: BigInt::from(lo + w),
                    bound: BigInt::from(bound),
                })
            }),
    ];
    (
        uident(),
        prop::collection::btree_map(field_name(), member, 0..4),
    )
        .prop_map(|(name, extra)| {
            let mut decl = InterfaceDecl::with_mandatory(&name, &default_int_max());
            decl.members.extend(extra);
            decl
        })
}

fn tx_strategy() -> impl Strategy<Value = Transaction> {
    (
        uident(),
        uident(),
        method_name(),
        prop::collection::vec(value_strategy(), 0..3),
        -100i64..=100,
        1i64..=1_000_000,
    )
        .prop_map(|(caller, target, method, args, amount, gas)| Transaction {
            caller: Addr::new(&caller),
            target: Addr::new(&target),
            method,
            args,
            amount: BigInt::from(amount),
            gas: BigInt::from(gas),
        })
}

proptest! {
    #[test]
    fn expr_round_trip(e in expr_strategy()) {
        let printed = e.to_string();
        let reparsed = parse_expression(&printed);
        prop_assert_eq!(reparsed.as_ref(), Ok(&e), "printed as `{}`", printed);
    }

    #[test]
    fn stm_round_trip(s in stm_strategy()) {
        let printed = s.to_string();
        let reparsed = parse_statement(&printed);
        prop_assert_eq!(reparsed.as_ref(), Ok(&s), "printed as `{}`", printed);
    }

    #[test]
    fn contract_round_trip(c in contract_strategy()) {
        let printed = c.to_string();
        let file = parse_program(&printed).unwrap();
        prop_assert_eq!(&file.contracts[0], &c, "printed as `{}`", printed);
    }

    #[test]
    fn interface_round_trip(i in interface_strategy()) {
        let printed = i.to_string();
        let reparsed = parse_interface(&printed).unwrap();
        prop_assert_eq!(&reparsed, &i, "printed as `{}`", printed);
    }

    #[test]
    fn transaction_round_trip(tx in tx_strategy()) {
        let printed = tx.to_string();
        let file = parse_program(&printed).unwrap();
        prop_assert_eq!(&file.txs[0], &tx, "printed as `{}`", printed);
    }

    #[test]
    fn parsing_is_deterministic(s in stm_strategy()) {
        let printed = s.to_string();
        prop_assert_eq!(parse_statement(&printed), parse_statement(&printed));
    }

    #[test]
    fn parser_total_on_arbitrary_text(s in "\\PC{0,60}") {
        // Any input yields a value or a positioned error, never a panic.
        let _ = parse_program(&s);
        let _ = parse_expression(&s);
        let _ = parse_statement(&s);
        let _ = parse_interface(&s);
    }
}

// ---------------------------------------------------------------------------
// Subtyping is a preorder
// ---------------------------------------------------------------------------

fn preorder_env() -> TypeEnv {
    // Wide, wider, widest: R <= Q <= P (= Top's members).
    let file = parse_program(
        "interface P { }
         interface Q { p: int }
         interface R { p: int[0..5] }",
    )
    .unwrap();
    TypeEnv::build(&file.interfaces, &[], default_int_max()).unwrap()
}

fn preorder_type() -> impl Strategy<Value = BaseType> {
    prop_oneof![
        Just(BaseType::Bool),
        Just(BaseType::Int),
        (-20i64..=20, 0i64..=15).prop_map(|(lo, w)| BaseType::range(lo, lo + w)),
        prop::sample::select(&["P", "Q", "R", "Top"][..]).prop_map(BaseType::iface),
    ]
}

proptest! {
    #[test]
    fn subtype_is_reflexive(t in preorder_type()) {
        let env = preorder_env();
        prop_assert!(subtype(&env, &t, &t).unwrap());
    }

    #[test]
    fn subtype_is_transitive(
        a in preorder_type(),
        b in preorder_type(),
        c in preorder_type(),
    ) {
        let env = preorder_env();
        if subtype(&env, &a, &b).unwrap() && subtype(&env, &b, &c).unwrap() {
            prop_assert!(
                subtype(&env, &a, &c).unwrap(),
                "{a} <= {b} <= {c} but not {a} <= {c}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Environment invariants
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn elaborate_is_order_independent(
        contracts in prop::collection::btree_map(uident(), contract_strategy(), 1..4),
        flip in any::<bool>(),
    ) {
        // Distinct names, two orders.
        let mut list: Vec<ContractDecl> = contracts
            .into_iter()
            .map(|(name, mut c)| {
                c.name = Addr::new(&name);
                c
            })
            .collect();
        let forward = elaborate(&list);
        if flip {
            list.reverse();
        }
        let backward = elaborate(&list);
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn var_update_preserves_shape(
        names in prop::collection::btree_set(lident(), 1..6),
        values in prop::collection::vec(value_strategy(), 6),
        replacement in value_strategy(),
        pick in any::<prop::sample::Index>(),
    ) {
        let names: Vec<String> = names.into_iter().collect();
        let env: VarEnv = names
            .iter()
            .zip(values)
            .map(|(n, v)| (n.clone(), v, BaseType::Int))
            .collect();
        let target = &names[pick.index(names.len())];
        let updated = var_update(&env, target, replacement.clone()).unwrap();
        // Same domain, same order, same annotations; only the value changed.
        prop_assert_eq!(env.bindings().len(), updated.bindings().len());
        for (before, after) in env.bindings().iter().zip(updated.bindings()) {
            prop_assert_eq!(&before.name, &after.name);
            prop_assert_eq!(&before.ty, &after.ty);
            if &before.name == target {
                prop_assert_eq!(&after.value, &replacement);
            } else {
                prop_assert_eq!(&before.value, &after.value);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Full-file round trip
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn program_file_round_trip(
        interfaces in prop::collection::btree_map(uident(), interface_strategy(), 0..3),
        contracts in prop::collection::btree_map(uident(), contract_strategy(), 0..3),
        txs in prop::collection::vec(tx_strategy(), 0..3),
    ) {
        let mut text = String::new();
        let interfaces: Vec<InterfaceDecl> = interfaces
            .into_iter()
            .map(|(name, mut i)| {
                i.name = name;
                i
            })
            .collect();
        let contracts: Vec<ContractDecl> = contracts
            .into_iter()
            .map(|(name, mut c)| {
                c.name = Addr::new(&name);
                c
            })
            .collect();
        for i in &interfaces {
            text.push_str(&i.to_string());
            text.push('\n');
        }
        for c in &contracts {
            text.push_str(&c.to_string());
            text.push('\n');
        }
        for tx in &txs {
            text.push_str(&tx.to_string());
            text.push('\n');
        }
        let file = parse_program(&text).unwrap();
        prop_assert_eq!(file.interfaces, interfaces);
        prop_assert_eq!(file.contracts, contracts);
        prop_assert_eq!(file.txs, txs);
    }
}

// ---------------------------------------------------------------------------
// Snapshot canonicality
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn snapshot_round_trips_any_state(
        state in prop::collection::btree_map(
            uident(),
            (
                -1_000_000_000i64..=1_000_000_000,
                prop::collection::btree_map(field_name(), value_strategy(), 0..4),
            ),
            0..4,
        )
    ) {
        let state: tinysol::State = state
            .into_iter()
            .map(|(addr, (balance, fields))| {
                let mut env = fields;
                env.insert("balance".to_string(), Value::int(balance));
                (Addr::new(&addr), env)
            })
            .collect();
        let bytes = tinysol::chain::snapshot(&state);
        prop_assert_eq!(tinysol::chain::restore(&bytes).unwrap(), state.clone());
        // Canonical: serializing twice yields identical bytes.
        prop_assert_eq!(tinysol::chain::snapshot(&state), bytes);
    }
}

// A couple of fixed"nasty" shapes that once mattered.
#[test]
fn nested_sequences_round_trip() {
    let s = Stm::seq(Stm::seq(Stm::Skip, Stm::Throw), Stm::Skip);
    assert_eq!(s.to_string(), "{ skip; throw }; skip");
    assert_eq!(parse_statement(&s.to_string()).unwrap(), s);
}

#[test]
fn negative_literal_forms_round_trip() {
    for e in [
        Expr::int(-5),
        Expr::Op(OpKind::Sub, vec![Expr::int(0), Expr::int(5)]),
        Expr::Op(OpKind::Sub, vec![Expr::int(3), Expr::int(-5)]),
        Expr::Balance(Box::new(Expr::int(-5))),
        Expr::Op(OpKind::Mul, vec![Expr::int(-5), Expr::var("x")]),
    ] {
        assert_eq!(parse_expression(&e.to_string()).unwrap(), e, "via `{e}`");
    }
}

#[test]
fn dangling_else_binds_inner() {
    let s = Stm::If {
        guard: Expr::var("a"),
        then_branch: Box::new(Stm::If {
            guard: Expr::var("b"),
            then_branch: Box::new(Stm::Skip),
            else_branch: Box::new(Stm::Throw),
        }),
        else_branch: Box::new(Stm::Skip),
    };
    assert_eq!(parse_statement(&s.to_string()).unwrap(), s);
}

#[test]
fn minimal_interface_round_trips() {
    let i = InterfaceDecl::with_mandatory("Z", &default_int_max());
    assert_eq!(parse_interface(&i.to_string()).unwrap(), i);
}
