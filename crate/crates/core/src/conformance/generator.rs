// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Type-directed random program generation.
//!
//! Every generated program passes declaration checking by construction: loop
//! guards get bounded types, methods only call methods generated before them
//! (so call graphs are acyclic), variable names are fresh (the machine
//! rejects shadowing), receivers are exactly-typed, divisors are nonzero
//! literals, and every expression is built for the type its context demands.
//! The suites therefore probe soundness of the type system, not its
//! (deliberately incomplete) coverage.

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::parser::default_int_max;
use crate::syntax::{
    Addr, BaseType, Blockchain, ContractDecl, Expr, InterfaceDecl, LVal, MemberType, MethodDecl,
    MethodType, OpKind, Stm, TOP_IFACE, Transaction, Value,
};
use crate::typesys::{TypeEnv, VarTypes, method_delta, type_stmt};

/// Shape parameters for generated programs.
#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Statement nesting depth of method bodies.
    pub max_depth: u32,
    /// Largest upper bound of a loop-guard type.
    pub max_loop: u32,
    /// Total method count across all contracts.
    pub max_methods: u32,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 4,
            max_loop: 3,
            max_methods: 5,
            seed: 0,
        }
    }
}

/// A generated blockchain (interfaces, contracts, one funded account, one
/// transaction) plus the static bound of that transaction's call statement
/// and the least gas that makes it well-typed.
#[derive(Clone, Debug)]
pub struct GeneratedProgram {
    pub blockchain: Blockchain,
    pub call_bound: BigInt,
    pub min_gas: BigInt,
}

/// What expressions may mention: declared contracts (with their interface),
/// readable integer-valued fields, the variables in scope, and what `this`
/// is bound to.
pub(crate) struct ExprCtx<'a> {
    pub contracts: &'a [(Addr, String)],
    pub int_fields: &'a [(Addr, String)],
    pub scope: &'a [(String, BaseType)],
    pub this_iface: Option<&'a str>,
}

pub(crate) struct Gen {
    pub rng: StdRng,
    fresh: u32,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: StdRng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    fn fresh_var(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn small_int(&mut self) -> BigInt {
        BigInt::from(self.rng.random_range(-9i64..=9))
    }

    fn int_vars<'a>(&self, ctx: &'a ExprCtx<'_>) -> Vec<&'a str> {
        ctx.scope
            .iter()
            .filter(|(_, t)| matches!(t, BaseType::Int | BaseType::IntRange(_, _)))
            .map(|(x, _)| x.as_str())
            .collect()
    }

    /// An expression of some integer shape (bounded or not).
    pub(crate) fn int_expr(&mut self, ctx: &ExprCtx<'_>, depth: u32) -> Expr {
        let vars = self.int_vars(ctx);
        let leaf = depth == 0 || self.rng.random_range(0..100) < 40;
        if leaf {
            if !vars.is_empty() && self.rng.random_bool(0.5) {
                let x = vars[self.rng.random_range(0..vars.len())];
                return Expr::var(x);
            }
            return Expr::Val(Value::Int(self.small_int()));
        }
        match self.rng.random_range(0..100) {
            0..=24 => {
                let (a, b) = (self.int_expr(ctx, depth - 1), self.int_expr(ctx, depth - 1));
                Expr::op(OpKind::Add, vec![a, b])
            }
            25..=44 => {
                let (a, b) = (self.int_expr(ctx, depth - 1), self.int_expr(ctx, depth - 1));
                Expr::op(OpKind::Sub, vec![a, b])
            }
            45..=59 => {
                let (a, b) = (self.int_expr(ctx, depth - 1), self.int_expr(ctx, depth - 1));
                Expr::op(OpKind::Mul, vec![a, b])
            }
            60..=69 => {
                // Nonzero literal divisor: division is never a runtime error.
                let a = self.int_expr(ctx, depth - 1);
                let mut d = self.rng.random_range(1i64..=9);
                if self.rng.random_bool(0.3) {
                    d = -d;
                }
                Expr::op(OpKind::Div, vec![a, Expr::int(d)])
            }
            70..=84 if !ctx.int_fields.is_empty() => {
                let (addr, field) = &ctx.int_fields[self.rng.random_range(0..ctx.int_fields.len())];
                Expr::Field(
                    Box::new(Expr::Val(Value::Addr(addr.clone()))),
                    field.clone(),
                )
            }
            _ if !ctx.contracts.is_empty() => {
                let (addr, _) = &ctx.contracts[self.rng.random_range(0..ctx.contracts.len())];
                Expr::Balance(Box::new(Expr::Val(Value::Addr(addr.clone()))))
            }
            _ => Expr::Val(Value::Int(self.small_int())),
        }
    }

    pub(crate) fn bool_expr(&mut self, ctx: &ExprCtx<'_>, depth: u32) -> Expr {
        let vars: Vec<&str> = ctx
            .scope
            .iter()
            .filter(|(_, t)| matches!(t, BaseType::Bool))
            .map(|(x, _)| x.as_str())
            .collect();
        let leaf = depth == 0 || self.rng.random_range(0..100) < 35;
        if leaf {
            if !vars.is_empty() && self.rng.random_bool(0.5) {
                let x = vars[self.rng.random_range(0..vars.len())];
                return Expr::var(x);
            }
            return Expr::Val(Value::Bool(self.rng.random_bool(0.5)));
        }
        match self.rng.random_range(0..100) {
            0..=49 => {
                let op = [OpKind::Lt, OpKind::Le, OpKind::Gt, OpKind::Ge, OpKind::Eq]
                    [self.rng.random_range(0..5)];
                let (a, b) = (self.int_expr(ctx, depth - 1), self.int_expr(ctx, depth - 1));
                Expr::op(op, vec![a, b])
            }
            50..=74 => {
                let op = if self.rng.random_bool(0.5) {
                    OpKind::And
                } else {
                    OpKind::Or
                };
                let (a, b) = (
                    self.bool_expr(ctx, depth - 1),
                    self.bool_expr(ctx, depth - 1),
                );
                Expr::op(op, vec![a, b])
            }
            _ => {
                let a = self.bool_expr(ctx, depth - 1);
                Expr::op(OpKind::Not, vec![a])
            }
        }
    }

    /// An expression whose minimal type fits inside [lo..hi].
    pub(crate) fn range_expr(
        &mut self,
        ctx: &ExprCtx<'_>,
        lo: &BigInt,
        hi: &BigInt,
        depth: u32,
    ) -> Expr {
        // Variables whose declared range is contained in the target.
        let fitting: Vec<&str> = ctx
            .scope
            .iter()
            .filter(|(_, t)| match t {
                BaseType::IntRange(l, u) => l >= lo && u <= hi,
                _ => false,
            })
            .map(|(x, _)| x.as_str())
            .collect();
        if !fitting.is_empty() && self.rng.random_bool(0.4) {
            let x = fitting[self.rng.random_range(0..fitting.len())];
            return Expr::var(x);
        }
        let v = self.rand_in(lo, hi);
        if depth > 0 && self.rng.random_bool(0.3) {
            // A sum of two literals has a singleton minimal type.
            let shift = BigInt::from(self.rng.random_range(-3i64..=3));
            return Expr::op(
                OpKind::Add,
                vec![
                    Expr::Val(Value::Int(&v - &shift)),
                    Expr::Val(Value::Int(shift)),
                ],
            );
        }
        Expr::Val(Value::Int(v))
    }

    pub(crate) fn rand_in(&mut self, lo: &BigInt, hi: &BigInt) -> BigInt {
        // Generated ranges are tiny; walking from the lower bound is fine.
        let width: BigInt = hi - lo;
        let width: u64 = width.try_into().unwrap_or(8);
        lo + BigInt::from(self.rng.random_range(0..=width))
    }

    /// An expression of exactly the given interface type that evaluates to a
    /// contract implementing it.
    pub(crate) fn iface_expr(&mut self, ctx: &ExprCtx<'_>, iface: &str) -> Option<Expr> {
        let mut options: Vec<Expr> = Vec::new();
        if ctx.this_iface == Some(iface) {
            options.push(Expr::var("this"));
        }
        for (addr, i) in ctx.contracts {
            if i == iface {
                options.push(Expr::Val(Value::Addr(addr.clone())));
            }
        }
        for (x, t) in ctx.scope {
            if matches!(t, BaseType::Iface(i) if i == iface) {
                options.push(Expr::var(x));
            }
        }
        if options.is_empty() {
            None
        } else {
            Some(options.swap_remove(self.rng.random_range(0..options.len())))
        }
    }

    /// Any expression of the requested type.
    pub(crate) fn expr_of(&mut self, ctx: &ExprCtx<'_>, ty: &BaseType, depth: u32) -> Option<Expr> {
        match ty {
            BaseType::Int => Some(self.int_expr(ctx, depth)),
            BaseType::Bool => Some(self.bool_expr(ctx, depth)),
            BaseType::IntRange(lo, hi) => Some(self.range_expr(ctx, lo, hi, depth)),
            BaseType::Iface(i) => self.iface_expr(ctx, i),
        }
    }
}

// ---------------------------------------------------------------------------
// Whole-program generation
// ---------------------------------------------------------------------------

struct ContractSketch {
    addr: Addr,
    iface: String,
    fields: Vec<(String, BaseType, Value)>,
}

struct Callee {
    contract_idx: usize,
    method: String,
    sig: MethodType,
}

struct Builder<'a> {
    g: Gen,
    cfg: &'a GenConfig,
    sketches: Vec<ContractSketch>,
    contracts_view: Vec<(Addr, String)>,
    int_fields: Vec<(Addr, String)>,
    callees: Vec<Callee>,
    iface_methods: Vec<Vec<(String, MethodType)>>,
}

impl Builder<'_> {
    fn interfaces(&self) -> Vec<InterfaceDecl> {
        let int_max = default_int_max();
        self.sketches
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut decl = InterfaceDecl::with_mandatory(&s.iface, &int_max);
                for (p, t, _) in &s.fields {
                    decl.members.insert(p.clone(), MemberType::Field(t.clone()));
                }
                for (m, sig) in &self.iface_methods[i] {
                    decl.members
                        .insert(m.clone(), MemberType::Method(sig.clone()));
                }
                decl
            })
            .collect()
    }

    fn type_env(&self) -> TypeEnv {
        let contracts: Vec<ContractDecl> = self
            .sketches
            .iter()
            .map(|s| {
                let mut c = ContractDecl::new(s.addr.as_str());
                c.interface = Some(s.iface.clone());
                c
            })
            .collect();
        TypeEnv::build(&self.interfaces(), &contracts, default_int_max())
            .expect("generated interfaces are well-formed")
    }

    fn random_var_type(&mut self) -> BaseType {
        match self.g.rng.random_range(0..100) {
            0..=34 => {
                let lo = self.g.rng.random_range(-2i64..=2);
                let hi = lo + self.g.rng.random_range(0..=self.cfg.max_loop as i64);
                BaseType::range(lo, hi)
            }
            35..=59 => BaseType::Int,
            60..=79 => BaseType::Bool,
            _ => {
                let pick = self.g.rng.random_range(0..self.sketches.len());
                BaseType::iface(&self.sketches[pick].iface)
            }
        }
    }

    /// An expression of the given type against the current scope. Split
    /// field borrows keep the context (shared views of the world) apart from
    /// the generator state.
    fn expr(
        &mut self,
        owner_iface: &str,
        scope: &[(String, BaseType)],
        ty: &BaseType,
        depth: u32,
    ) -> Option<Expr> {
        let ctx = ExprCtx {
            contracts: &self.contracts_view,
            int_fields: &self.int_fields,
            scope,
            this_iface: Some(owner_iface),
        };
        self.g.expr_of(&ctx, ty, depth)
    }

    fn gen_stmt(&mut self, owner: usize, scope: &mut Vec<(String, BaseType)>, depth: u32) -> Stm {
        let owner_iface = self.sketches[owner].iface.clone();
        if depth > 0 {
            match self.g.rng.random_range(0..100u32) {
                0..=24 => {
                    let first = self.gen_stmt(owner, scope, depth - 1);
                    let second = self.gen_stmt(owner, scope, depth - 1);
                    return Stm::seq(first, second);
                }
                25..=38 => {
                    let guard = self
                        .expr(&owner_iface, scope, &BaseType::Bool, 2)
                        .expect("bool expressions always exist");
                    let then_branch = self.gen_stmt(owner, scope, depth - 1);
                    let else_branch = self.gen_stmt(owner, scope, depth - 1);
                    return Stm::If {
                        guard,
                        then_branch: Box::new(then_branch),
                        else_branch: Box::new(else_branch),
                    };
                }
                39..=53 => {
                    // Loop guard: a bounded variable or a small literal.
                    let bounded: Vec<String> = scope
                        .iter()
                        .filter(|(_, t)| matches!(t, BaseType::IntRange(_, _)))
                        .map(|(x, _)| x.clone())
                        .collect();
                    let guard = if !bounded.is_empty() && self.g.rng.random_bool(0.6) {
                        Expr::var(&bounded[self.g.rng.random_range(0..bounded.len())])
                    } else {
                        Expr::int(self.g.rng.random_range(0..=self.cfg.max_loop as i64))
                    };
                    let body = self.gen_stmt(owner, scope, depth - 1);
                    return Stm::For {
                        guard,
                        body: Box::new(body),
                    };
                }
                54..=74 => {
                    let ty = self.random_var_type();
                    if let Some(init) = self.expr(&owner_iface, scope, &ty, 2) {
                        let name = self.g.fresh_var();
                        scope.push((name.clone(), ty.clone()));
                        let body = self.gen_stmt(owner, scope, depth - 1);
                        scope.pop();
                        return Stm::DeclVar {
                            ty,
                            name,
                            init,
                            body: Box::new(body),
                        };
                    }
                }
                _ => {}
            }
        }
        // Leaf statements.
        let assignables: Vec<(String, BaseType)> = scope
            .iter()
            .filter(|(x, _)| !crate::syntax::MAGIC_VARS.contains(&x.as_str()))
            .cloned()
            .collect();
        let own_fields = self.sketches[owner].fields.clone();
        match self.g.rng.random_range(0..100u32) {
            0..=17 => {
                if let Some(call) = self.gen_call(&owner_iface, scope) {
                    return call;
                }
                Stm::Skip
            }
            18..=39 if !assignables.is_empty() => {
                let (x, ty) = assignables[self.g.rng.random_range(0..assignables.len())].clone();
                match self.expr(&owner_iface, scope, &ty, 2) {
                    Some(value) => Stm::Assign {
                        target: LVal::Var(x),
                        value,
                    },
                    None => Stm::Skip,
                }
            }
            40..=56 if !own_fields.is_empty() => {
                let (p, ty, _) = own_fields[self.g.rng.random_range(0..own_fields.len())].clone();
                match self.expr(&owner_iface, scope, &ty, 2) {
                    Some(value) => Stm::Assign {
                        target: LVal::ThisField(p),
                        value,
                    },
                    None => Stm::Skip,
                }
            }
            57..=60 => Stm::Throw,
            _ => Stm::Skip,
        }
    }

    fn gen_call(&mut self, owner_iface: &str, scope: &[(String, BaseType)]) -> Option<Stm> {
        // `send` on any contract, or a previously generated method.
        let use_send = self.callees.is_empty() || self.g.rng.random_bool(0.25);
        if use_send {
            let pick = self.g.rng.random_range(0..self.contracts_view.len());
            let iface = self.contracts_view[pick].1.clone();
            let recv = self.expr(owner_iface, scope, &BaseType::iface(&iface), 0)?;
            let amount = self.expr(owner_iface, scope, &BaseType::range(0, 5), 1)?;
            return Some(Stm::Call {
                recv,
                method: "send".into(),
                args: vec![],
                amount,
            });
        }
        let pick = self.g.rng.random_range(0..self.callees.len());
        let (contract_idx, method, sig) = {
            let c = &self.callees[pick];
            (c.contract_idx, c.method.clone(), c.sig.clone())
        };
        let iface = self.sketches[contract_idx].iface.clone();
        let recv = self.expr(owner_iface, scope, &BaseType::iface(&iface), 0)?;
        let mut args = Vec::with_capacity(sig.params.len());
        for p in &sig.params {
            args.push(self.expr(owner_iface, scope, p, 1)?);
        }
        // Keep the transferred amount small; the range may reach up to the
        // declared maximum, but contracts hold plenty.
        let hi = sig.amount_hi.clone().min(&sig.amount_lo + 5);
        let amount = self.expr(
            owner_iface,
            scope,
            &BaseType::IntRange(sig.amount_lo.clone(), hi),
            1,
        )?;
        Some(Stm::Call {
            recv,
            method,
            args,
            amount,
        })
    }
}

/// Generates a well-typed blockchain with one scheduled transaction.
pub fn generate_program(cfg: &GenConfig) -> GeneratedProgram {
    let mut g = Gen::new(cfg.seed);

    let n_contracts = g.rng.random_range(1..=2usize);
    let mut sketches = Vec::new();
    for ci in 0..n_contracts {
        let addr = Addr::new(format!("C{ci}"));
        let iface = format!("I{ci}");
        let mut fields = Vec::new();
        for fi in 0..g.rng.random_range(0..=2usize) {
            let name = format!("p{ci}{fi}");
            let (ty, init) = match g.rng.random_range(0..100) {
                0..=49 => (BaseType::Int, Value::Int(g.small_int())),
                50..=74 => (BaseType::Bool, Value::Bool(g.rng.random_bool(0.5))),
                _ => {
                    let lo = BigInt::from(g.rng.random_range(-2i64..=2));
                    let hi = &lo + BigInt::from(g.rng.random_range(0i64..=4));
                    let init = g.rand_in(&lo, &hi);
                    (BaseType::IntRange(lo, hi), Value::Int(init))
                }
            };
            fields.push((name, ty, init));
        }
        sketches.push(ContractSketch {
            addr,
            iface,
            fields,
        });
    }

    let contracts_view: Vec<(Addr, String)> = sketches
        .iter()
        .map(|s| (s.addr.clone(), s.iface.clone()))
        .collect();
    let int_fields: Vec<(Addr, String)> = sketches
        .iter()
        .flat_map(|s| {
            s.fields
                .iter()
                .filter(|(_, t, _)| matches!(t, BaseType::Int | BaseType::IntRange(_, _)))
                .map(|(p, _, _)| (s.addr.clone(), p.clone()))
        })
        .collect();

    let mut builder = Builder {
        g,
        cfg,
        sketches,
        contracts_view,
        int_fields,
        callees: Vec::new(),
        iface_methods: vec![Vec::new(); n_contracts],
    };

    // Methods in a global order; bodies may only call earlier methods, so
    // the call graph is acyclic by construction.
    let n_methods = builder
        .g
        .rng
        .random_range(1..=cfg.max_methods.max(1) as usize);
    let mut method_decls: Vec<Vec<MethodDecl>> = vec![Vec::new(); n_contracts];
    for mi in 0..n_methods {
        let owner = builder.g.rng.random_range(0..n_contracts);
        let name = format!("m{mi}");
        let mut params = Vec::new();
        for pi in 0..builder.g.rng.random_range(0..=2usize) {
            let ty = builder.random_var_type();
            params.push((format!("a{mi}{pi}"), ty));
        }
        let amount_lo = BigInt::from(builder.g.rng.random_range(0i64..=1));
        let amount_hi = &amount_lo + BigInt::from(builder.g.rng.random_range(0i64..=4));

        let mut scope: Vec<(String, BaseType)> = vec![
            (
                "this".into(),
                BaseType::iface(&builder.sketches[owner].iface),
            ),
            ("sender".into(), BaseType::iface(TOP_IFACE)),
            (
                "value".into(),
                BaseType::IntRange(amount_lo.clone(), amount_hi.clone()),
            ),
        ];
        scope.extend(params.iter().cloned());
        let body = builder.gen_stmt(owner, &mut scope, cfg.max_depth);

        // Fix the declared bound from the computed one, occasionally with
        // slack (any declaration covering the body is acceptable).
        let env = builder.type_env();
        let sig_before_bound = MethodType {
            params: params.iter().map(|(_, t)| t.clone()).collect(),
            amount_lo: amount_lo.clone(),
            amount_hi: amount_hi.clone(),
            bound: BigInt::from(1),
        };
        let param_names: Vec<String> = params.iter().map(|(x, _)| x.clone()).collect();
        let delta = method_delta(
            &builder.sketches[owner].iface,
            &sig_before_bound,
            &param_names,
        );
        let computed = type_stmt(&env, &delta, &body).expect("generated body must type");
        let slack = match builder.g.rng.random_range(0..100) {
            0..=69 => BigInt::from(0),
            70..=89 => BigInt::from(1),
            _ => BigInt::from(builder.g.rng.random_range(2i64..=7)),
        };
        let sig = MethodType {
            bound: &computed + &slack,
            ..sig_before_bound
        };

        builder.iface_methods[owner].push((name.clone(), sig.clone()));
        builder.callees.push(Callee {
            contract_idx: owner,
            method: name.clone(),
            sig,
        });
        method_decls[owner].push(MethodDecl {
            name,
            params: param_names,
            body,
        });
    }

    // Assemble the blockchain.
    let interfaces = builder.interfaces();
    let mut contracts: Vec<ContractDecl> = Vec::new();
    for (ci, s) in builder.sketches.iter().enumerate() {
        let mut c = ContractDecl::new(s.addr.as_str());
        c.interface = Some(s.iface.clone());
        c.initial_balance = BigInt::from(1_000_000);
        c.fields = s
            .fields
            .iter()
            .map(|(p, _, v)| (p.clone(), v.clone()))
            .collect();
        c.methods = method_decls[ci].clone();
        contracts.push(c);
    }

    // The transaction: call one of the later methods (they have the most
    // callees available) with inhabiting value arguments.
    let lo = builder.callees.len().saturating_sub(3);
    let pick = builder.g.rng.random_range(lo..builder.callees.len());
    let Callee {
        contract_idx,
        method,
        sig,
    } = &builder.callees[pick];
    let target = builder.sketches[*contract_idx].addr.clone();
    let method = method.clone();
    let mut args = Vec::new();
    for p in &sig.params {
        let v = match p {
            BaseType::Int => Value::Int(builder.g.small_int()),
            BaseType::Bool => Value::Bool(builder.g.rng.random_bool(0.5)),
            BaseType::IntRange(lo, hi) => Value::Int(builder.g.rand_in(lo, hi)),
            BaseType::Iface(i) => {
                let (addr, _) = builder
                    .contracts_view
                    .iter()
                    .find(|(_, ci)| ci == i)
                    .expect("interfaces are one per contract")
                    .clone();
                Value::Addr(addr)
            }
        };
        args.push(v);
    }
    let amount_hi = sig.amount_hi.clone().min(&sig.amount_lo + 5);
    let amount = builder.g.rand_in(&sig.amount_lo, &amount_hi);

    let caller = Addr::new("Acct");
    let mut tx = Transaction {
        caller: caller.clone(),
        target,
        method,
        args,
        amount: amount.clone(),
        gas: BigInt::from(1), // placeholder until the bound is known
    };

    // Account contract: no user members, bound to the top interface.
    let mut account = ContractDecl::new(caller.as_str());
    account.initial_balance = BigInt::from(0); // funded below
    contracts.push(account);

    let env = TypeEnv::build(&interfaces, &contracts, default_int_max())
        .expect("generated program builds a type environment");
    let delta: VarTypes = vec![("this".to_string(), BaseType::iface(TOP_IFACE))]
        .into_iter()
        .collect();
    let call_bound = type_stmt(&env, &delta, &crate::chain::tx_call_stm(&tx))
        .expect("generated transaction must type");
    let min_gas = &call_bound + 1;
    let slack = BigInt::from(builder.g.rng.random_range(0i64..=10));
    tx.gas = &min_gas + &slack;

    let funding = &tx.gas + &amount + 1000;
    contracts.last_mut().unwrap().initial_balance = funding;

    GeneratedProgram {
        blockchain: Blockchain {
            interfaces,
            contracts,
            txs: vec![tx],
        },
        call_bound,
        min_gas,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::genesis;
    use crate::machine::{Machine, Terminal};

    #[test]
    fn smallest_config_produces_a_program() {
        let cfg = GenConfig {
            max_depth: 1,
            max_loop: 1,
            max_methods: 1,
            seed: 1,
        };
        let p = generate_program(&cfg);
        assert!(!p.blockchain.contracts.is_empty());
        assert_eq!(p.blockchain.txs.len(), 1);
        assert!(
            p.min_gas >= BigInt::from(4),
            "a call needs at least bound 3 + 1"
        );
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let cfg = GenConfig {
            seed: 42,
            ..GenConfig::default()
        };
        let a = generate_program(&cfg);
        let b = generate_program(&cfg);
        assert_eq!(a.blockchain, b.blockchain);
        assert_eq!(a.min_gas, b.min_gas);
    }

    #[test]
    fn generated_runs_at_min_gas_never_raise_oog() {
        for seed in 0..40 {
            let cfg = GenConfig {
                seed,
                ..GenConfig::default()
            };
            let p = generate_program(&cfg);
            let cs = genesis(&p.blockchain).unwrap();
            let mut tx = p.blockchain.txs[0].clone();
            tx.gas = p.min_gas.clone();
            let machine = Machine::new(&cs.table, &cs.types);
            let res = machine.run(cs.tx_config(&tx));
            match res.terminal {
                Terminal::Done => {}
                Terminal::Exception(l) => {
                    assert_ne!(l.as_str(), "oog", "seed {seed} ran out of gas at min_gas");
                    assert_ne!(l.as_str(), "rte", "seed {seed} raised rte");
                }
            }
            let consumed = &p.min_gas - &res.config.gas;
            assert!(
                consumed <= p.call_bound,
                "seed {seed} consumed beyond the bound"
            );
        }
    }
}
