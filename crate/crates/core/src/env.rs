// Copyright 2026 the TinySol Authors
// SPDX-License-Identifier: Apache-2.0 OR MIT

//! The binding model: variable environments, per-contract field and method
//! environments, the global state, and the constant method table, together
//! with elaboration of contract declarations into state and table.
//!
//! Environments are immutable values; every update returns a new environment.
//! The variable environment is an ordered sequence (newest binding first)
//! because declaration pushes a binding and scope exit removes the head; the
//! others are plain finite maps.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::syntax::{
    Addr, BALANCE, BaseType, ContractDecl, SEND, Stm, Value, validate_contract_shape,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("duplicate contract `{0}`")]
    DuplicateContract(Addr),
    #[error("ill-formed contract `{name}`: {source}")]
    BadShape {
        name: Addr,
        source: crate::syntax::ShapeError,
    },
}

/// A typed local-variable binding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub value: Value,
    pub ty: BaseType,
}

/// The local variable environment: ordered, newest binding first. Names are
/// distinct (declaration of a bound name is a runtime error), so lookup finds
/// the unique binding.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VarEnv(Vec<Binding>);

impl VarEnv {
    pub fn new() -> Self {
        VarEnv(Vec::new())
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.0
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|b| b.name == name)
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.0.iter().find(|b| b.name == name).map(|b| &b.value)
    }

    pub fn lookup_type(&self, name: &str) -> Option<&BaseType> {
        self.0.iter().find(|b| b.name == name).map(|b| &b.ty)
    }

    /// Pushes a new binding in front (the newest position).
    pub fn declared(&self, name: &str, value: Value, ty: BaseType) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(Binding {
            name: name.to_string(),
            value,
            ty,
        });
        v.extend(self.0.iter().cloned());
        VarEnv(v)
    }

    /// Removes the newest binding, which must be for `name`.
    pub fn undeclared(&self, name: &str) -> Result<Self, EnvError> {
        match self.0.first() {
            Some(b) if b.name == name => Ok(VarEnv(self.0[1..].to_vec())),
            _ => Err(EnvError::Unbound(name.to_string())),
        }
    }

    /// Replaces the value bound to `name`, keeping its position and type
    /// annotation.
    pub fn updated(&self, name: &str, value: Value) -> Result<Self, EnvError> {
        if !self.contains(name) {
            return Err(EnvError::Unbound(name.to_string()));
        }
        let mut v = self.0.clone();
        for b in &mut v {
            if b.name == name {
                b.value = value;
                break;
            }
        }
        Ok(VarEnv(v))
    }
}

impl FromIterator<(String, Value, BaseType)> for VarEnv {
    fn from_iter<T: IntoIterator<Item = (String, Value, BaseType)>>(iter: T) -> Self {
        VarEnv(
            iter.into_iter()
                .map(|(name, value, ty)| Binding { name, value, ty })
                .collect(),
        )
    }
}

/// Per-contract fields; always contains an integer-valued `balance`.
pub type FieldEnv = BTreeMap<String, Value>;

/// Per-contract methods: name to (parameters, body); always contains
/// `send` -> ([], skip).
pub type MethodEnv = BTreeMap<String, (Vec<String>, Stm)>;

/// The mutable half of the world: address to fields.
pub type State = BTreeMap<Addr, FieldEnv>;

/// The constant half: address to methods.
pub type MethodTable = BTreeMap<Addr, MethodEnv>;

/// Spec-named convenience for [`VarEnv::updated`].
pub fn var_update(env: &VarEnv, name: &str, value: Value) -> Result<VarEnv, EnvError> {
    env.updated(name, value)
}

/// Returns a copy of `state` with only field `p` of address `addr` changed.
pub fn state_update_field(
    state: &State,
    addr: &Addr,
    field: &str,
    value: Value,
) -> Result<State, EnvError> {
    let fields = state
        .get(addr)
        .ok_or_else(|| EnvError::Unbound(addr.to_string()))?;
    if !fields.contains_key(field) {
        return Err(EnvError::Unbound(format!("{addr}.{field}")));
    }
    let mut next = state.clone();
    next.get_mut(addr)
        .expect("address present")
        .insert(field.to_string(), value);
    Ok(next)
}

/// Reads the integer balance of `addr`. The FieldEnv invariant guarantees the
/// field is present and integer-valued for elaborated states.
pub fn balance_of<'a>(state: &'a State, addr: &Addr) -> Option<&'a BigInt> {
    match state.get(addr)?.get(BALANCE) {
        Some(Value::Int(n)) => Some(n),
        _ => None,
    }
}

/// Elaborates contract declarations into the initial state and the (constant)
/// method table. Each contract contributes its fields (including the balance)
/// and its methods (including the synthesized `send`).
pub fn elaborate(decls: &[ContractDecl]) -> Result<(State, MethodTable), EnvError> {
    let mut state = State::new();
    let mut table = MethodTable::new();
    for c in decls {
        validate_contract_shape(c).map_err(|source| EnvError::BadShape {
            name: c.name.clone(),
            source,
        })?;
        if state.contains_key(&c.name) {
            return Err(EnvError::DuplicateContract(c.name.clone()));
        }
        let mut fields = FieldEnv::new();
        fields.insert(BALANCE.to_string(), Value::Int(c.initial_balance.clone()));
        for (p, v) in &c.fields {
            fields.insert(p.clone(), v.clone());
        }
        let mut methods = MethodEnv::new();
        methods.insert(SEND.to_string(), (vec![], Stm::Skip));
        for m in &c.methods {
            methods.insert(m.name.clone(), (m.params.clone(), m.body.clone()));
        }
        state.insert(c.name.clone(), fields);
        table.insert(c.name.clone(), methods);
    }
    Ok((state, table))
}

// ---------------------------------------------------------------------------
// Canonical JSON for states
// ---------------------------------------------------------------------------

/// Serializes a state to the canonical JSON object `{address: {field: value}}`
/// with sorted keys. Integers appear as (arbitrary-precision) JSON numbers,
/// booleans as JSON booleans, addresses as JSON strings.
pub fn state_to_json(state: &State) -> serde_json::Value {
    let mut top = serde_json::Map::new();
    for (addr, fields) in state {
        let mut obj = serde_json::Map::new();
        for (p, v) in fields {
            obj.insert(p.clone(), value_to_json(v));
        }
        top.insert(addr.to_string(), serde_json::Value::Object(obj));
    }
    serde_json::Value::Object(top)
}

pub fn value_to_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Int(n) => {
            serde_json::Value::Number(serde_json::Number::from_string_unchecked(n.to_string()))
        }
        Value::Bool(b) => serde_json::Value::Bool(*b),
        Value::Addr(a) => serde_json::Value::String(a.to_string()),
    }
}

pub fn value_from_json(v: &serde_json::Value) -> Option<Value> {
    match v {
        serde_json::Value::Number(n) => Some(Value::Int(n.to_string().parse().ok()?)),
        serde_json::Value::Bool(b) => Some(Value::Bool(*b)),
        serde_json::Value::String(s) => Some(Value::Addr(Addr::new(s.as_str()))),
        _ => None,
    }
}

pub fn state_from_json(v: &serde_json::Value) -> Option<State> {
    let top = v.as_object()?;
    let mut state = State::new();
    for (addr, fields) in top {
        let obj = fields.as_object()?;
        let mut env = FieldEnv::new();
        for (p, fv) in obj {
            env.insert(p.clone(), value_from_json(fv)?);
        }
        // The FieldEnv invariant: balance present and integer-valued.
        match env.get(BALANCE) {
            Some(Value::Int(_)) => {}
            _ => return None,
        }
        state.insert(Addr::new(addr.as_str()), env);
    }
    Some(state)
}
