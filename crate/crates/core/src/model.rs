//! Finite recursive structural causal models: signatures, equations,
//! interventions and the unique solution in a context.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;

pub type Value = i64;

/// Index of a variable in its [`Signature`] (declaration order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        Var(i as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Exogenous,
    Endogenous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub range: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("variable `{0}` declared twice")]
    DuplicateName(String),
    #[error("variable `{0}` has an empty range")]
    EmptyRange(String),
    #[error("variable `{name}` lists value {value} twice in its range")]
    DuplicateValue { name: String, value: Value },
}

/// Exogenous and endogenous variables with their finite ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    decls: Vec<VarDecl>,
    by_name: HashMap<String, Var>,
}

#[derive(Debug, Default)]
pub struct SignatureBuilder {
    decls: Vec<VarDecl>,
}

impl SignatureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        range: impl IntoIterator<Item = Value>,
    ) -> &mut Self {
        self.decls.push(VarDecl {
            name: name.into(),
            kind,
            range: range.into_iter().collect(),
        });
        self
    }

    pub fn build(self) -> Result<Signature, SignatureError> {
        Signature::new(self.decls)
    }
}

impl Signature {
    pub fn new(decls: Vec<VarDecl>) -> Result<Self, SignatureError> {
        let mut by_name = HashMap::with_capacity(decls.len());
        for (i, d) in decls.iter().enumerate() {
            if by_name.insert(d.name.clone(), Var::from_index(i)).is_some() {
                return Err(SignatureError::DuplicateName(d.name.clone()));
            }
            if d.range.is_empty() {
                return Err(SignatureError::EmptyRange(d.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for &v in &d.range {
                if !seen.insert(v) {
                    return Err(SignatureError::DuplicateValue {
                        name: d.name.clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(Self { decls, by_name })
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.decls[v.index()].name
    }

    pub fn kind(&self, v: Var) -> VarKind {
        self.decls[v.index()].kind
    }

    pub fn range(&self, v: Var) -> &[Value] {
        &self.decls[v.index()].range
    }

    pub fn decls(&self) -> &[VarDecl] {
        &self.decls
    }

    pub fn is_endogenous(&self, v: Var) -> bool {
        self.kind(v) == VarKind::Endogenous
    }

    pub fn in_range(&self, v: Var, value: Value) -> bool {
        self.range(v).contains(&value)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.decls.len()).map(Var::from_index)
    }

    pub fn exogenous(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars().filter(|&v| !self.is_endogenous(v))
    }

    pub fn endogenous(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars().filter(|&v| self.is_endogenous(v))
    }

    /// Every range, exogenous ones included, has exactly two values.
    pub fn is_binary(&self) -> bool {
        self.decls.iter().all(|d| d.range.len() == 2)
    }

    /// Look up an endogenous variable by name.
    pub fn endogenous_var(&self, name: &str) -> Result<Var, ModelError> {
        let v = self
            .var(name)
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
        if !self.is_endogenous(v) {
            return Err(ModelError::NotEndogenous(name.to_string()));
        }
        Ok(v)
    }
}

/// A partial assignment of values to variables, ordered by declaration.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<Var, Value>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(name, value)` pairs; later pairs overwrite earlier ones.
    pub fn from_pairs<'a>(
        sig: &Signature,
        pairs: impl IntoIterator<Item = (&'a str, Value)>,
    ) -> Result<Self, ModelError> {
        let mut a = Assignment::new();
        for (name, value) in pairs {
            let v = sig
                .var(name)
                .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
            a.insert(v, value);
        }
        Ok(a)
    }

    pub fn insert(&mut self, v: Var, value: Value) -> Option<Value> {
        self.0.insert(v, value)
    }

    pub fn get(&self, v: Var) -> Option<Value> {
        self.0.get(&v).copied()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Value)> + '_ {
        self.0.iter().map(|(&v, &x)| (v, x))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }

    /// `X=1, Y=0` form.
    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayAssignment {
            a: self,
            sig,
            sep: "=",
        }
    }

    /// `X<-1, Y<-0` form.
    pub fn display_intervention<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayAssignment {
            a: self,
            sig,
            sep: "<-",
        }
    }

    /// Name-keyed view, used for serialized reports.
    pub fn to_named(&self, sig: &Signature) -> BTreeMap<String, Value> {
        self.iter().map(|(v, x)| (sig.name(v).to_string(), x)).collect()
    }
}

impl FromIterator<(Var, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, Value)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

struct DisplayAssignment<'a> {
    a: &'a Assignment,
    sig: &'a Signature,
    sep: &'static str,
}

impl fmt::Display for DisplayAssignment<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, x)) in self.a.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}{}{}", self.sig.name(v), self.sep, x)?;
        }
        Ok(())
    }
}

/// A setting of every exogenous variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context(Assignment);

impl Context {
    /// Checks totality over the exogenous variables and range membership.
    pub fn new(sig: &Signature, values: Assignment) -> Result<Self, ModelError> {
        for (v, x) in values.iter() {
            if sig.is_endogenous(v) {
                return Err(ModelError::NotExogenous(sig.name(v).to_string()));
            }
            if !sig.in_range(v, x) {
                return Err(ModelError::OutOfRange {
                    var: sig.name(v).to_string(),
                    value: x,
                });
            }
        }
        if let Some(missing) = sig.exogenous().find(|&u| !values.contains(u)) {
            return Err(ModelError::PartialContext(sig.name(missing).to_string()));
        }
        Ok(Context(values))
    }

    pub fn from_pairs<'a>(
        sig: &Signature,
        pairs: impl IntoIterator<Item = (&'a str, Value)>,
    ) -> Result<Self, ModelError> {
        Context::new(sig, Assignment::from_pairs(sig, pairs)?)
    }

    pub fn values(&self) -> &Assignment {
        &self.0
    }

    pub fn get(&self, v: Var) -> Option<Value> {
        self.0.get(v)
    }
}

/// Values of every variable in the unique solution of a model in a context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TotalState {
    values: Vec<Value>,
}

impl TotalState {
    pub(crate) fn from_values(values: Vec<Value>) -> Self {
        Self { values }
    }

    pub fn get(&self, v: Var) -> Value {
        self.values[v.index()]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn satisfies(&self, a: &Assignment) -> bool {
        a.iter().all(|(v, x)| self.get(v) == x)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        let a: Assignment = sig.vars().map(|v| (v, self.get(v))).collect();
        let s = a.display(sig).to_string();
        DisplayOwned(s)
    }
}

struct DisplayOwned(String);

impl fmt::Display for DisplayOwned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// How an endogenous variable gets its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mechanism {
    Equation(Arc<Expr>),
    /// Overridden by an intervention.
    Fixed(Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{0}` is not an endogenous variable")]
    NotEndogenous(String),
    #[error("`{0}` is not an exogenous variable")]
    NotExogenous(String),
    #[error("value {value} is outside the range of `{var}`")]
    OutOfRange { var: String, value: Value },
    #[error("context does not set exogenous variable `{0}`")]
    PartialContext(String),
    #[error("equation references unknown variable index {0}")]
    DanglingReference(usize),
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),
}

/// A single reason a model is not a valid finite recursive model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The syntactic dependency graph has a cycle through these variables.
    Cycle { vars: Vec<String> },
    SelfReference { var: String },
    MissingEquation { var: String },
    /// Some assignment to the referenced variables drives the equation outside its range.
    RangeViolation {
        var: String,
        assignment: BTreeMap<String, Value>,
        produced: Value,
    },
    /// Too many referenced assignments to sweep and the interval bound is not conclusive.
    RangeUnverified { var: String },
    DanglingReference { var: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { vars } => write!(f, "cyclic dependency through {}", vars.join(" -> ")),
            Violation::SelfReference { var } => write!(f, "equation for `{var}` references itself"),
            Violation::MissingEquation { var } => write!(f, "`{var}` has no equation"),
            Violation::RangeViolation {
                var,
                assignment,
                produced,
            } => {
                let a: Vec<String> = assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, "equation for `{var}` yields {produced} at {}", a.join(", "))
            }
            Violation::RangeUnverified { var } => {
                write!(f, "range of the equation for `{var}` could not be verified")
            }
            Violation::DanglingReference { var } => {
                write!(f, "equation for `{var}` references an undeclared variable")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub binary: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A dependency edge `(parent, child)`.
pub type Edge = (Var, Var);

/// Dependency edges between endogenous variables plus a topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub edges: Vec<Edge>,
    pub order: Vec<Var>,
}

/// Above this many assignments the range sweep gives up and relies on interval bounds.
const RANGE_SWEEP_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalModel {
    signature: Arc<Signature>,
    mechanisms: Vec<Option<Mechanism>>,
}

impl CausalModel {
    /// A model with no equations yet.
    pub fn new(signature: Signature) -> Self {
        let n = signature.len();
        Self {
            signature: Arc::new(signature),
            mechanisms: vec![None; n],
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn set_equation(&mut self, var: Var, body: Expr) -> Result<(), ModelError> {
        if var.index() >= self.signature.len() {
            return Err(ModelError::DanglingReference(var.index()));
        }
        if !self.signature.is_endogenous(var) {
            return Err(ModelError::NotEndogenous(self.signature.name(var).to_string()));
        }
        self.mechanisms[var.index()] = Some(Mechanism::Equation(Arc::new(body)));
        Ok(())
    }

    pub fn mechanism(&self, var: Var) -> Option<&Mechanism> {
        self.mechanisms.get(var.index()).and_then(Option::as_ref)
    }

    pub fn equation(&self, var: Var) -> Option<&Expr> {
        match self.mechanism(var) {
            Some(Mechanism::Equation(e)) => Some(e),
            _ => None,
        }
    }

    /// Variables overridden by intervention, with their values.
    pub fn fixed(&self) -> Assignment {
        self.signature
            .vars()
            .filter_map(|v| match self.mechanism(v) {
                Some(Mechanism::Fixed(x)) => Some((v, *x)),
                _ => None,
            })
            .collect()
    }

    /// Endogenous variables referenced by each equation, excluding self-references.
    fn parents(&self, var: Var) -> Vec<Var> {
        match self.equation(var) {
            Some(e) => e
                .references()
                .into_iter()
                .filter(|&p| {
                    p != var && p.index() < self.signature.len() && self.signature.is_endogenous(p)
                })
                .collect(),
            None => Vec::new(),
        }
    }

    fn structural_violations(&self) -> Vec<Violation> {
        let sig = &*self.signature;
        let mut out = Vec::new();
        for v in sig.endogenous() {
            match self.mechanism(v) {
                None => out.push(Violation::MissingEquation {
                    var: sig.name(v).to_string(),
                }),
                Some(Mechanism::Equation(e)) => {
                    let refs = e.references();
                    if refs.iter().any(|r| r.index() >= sig.len()) {
                        out.push(Violation::DanglingReference {
                            var: sig.name(v).to_string(),
                        });
                    }
                    if refs.contains(&v) {
                        out.push(Violation::SelfReference {
                            var: sig.name(v).to_string(),
                        });
                    }
                }
                Some(Mechanism::Fixed(_)) => {}
            }
        }
        if let Err(cycle) = self.topological_order() {
            out.push(Violation::Cycle {
                vars: cycle.iter().map(|&v| sig.name(v).to_string()).collect(),
            });
        }
        out
    }

    /// Kahn's algorithm, always releasing the lowest-index ready variable.
    /// On failure returns one cycle.
    fn topological_order(&self) -> Result<(Vec<Edge>, Vec<Var>), Vec<Var>> {
        let sig = &*self.signature;
        let n = sig.len();
        let mut edges = Vec::new();
        let mut indeg = vec![0usize; n];
        let mut children: Vec<Vec<Var>> = vec![Vec::new(); n];
        for v in sig.endogenous() {
            for p in self.parents(v) {
                edges.push((p, v));
                indeg[v.index()] += 1;
                children[p.index()].push(v);
            }
        }
        edges.sort();
        let mut ready: BTreeSet<Var> = sig.endogenous().filter(|v| indeg[v.index()] == 0).collect();
        let mut order = Vec::new();
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &children[v.index()] {
                indeg[c.index()] -= 1;
                if indeg[c.index()] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == sig.endogenous().count() {
            return Ok((edges, order));
        }
        // Walk parents inside the unresolved set until a variable repeats.
        let stuck: BTreeSet<Var> = sig.endogenous().filter(|v| indeg[v.index()] > 0).collect();
        let mut path = Vec::new();
        let mut seen = HashMap::new();
        let mut cur = *stuck.iter().next().expect("unresolved set nonempty");
        loop {
            if let Some(&pos) = seen.get(&cur) {
                let mut cycle: Vec<Var> = path[pos..].to_vec();
                cycle.reverse();
                return Err(cycle);
            }
            seen.insert(cur, path.len());
            path.push(cur);
            cur = self
                .parents(cur)
                .into_iter()
                .find(|p| stuck.contains(p))
                .expect("every unresolved variable has an unresolved parent");
        }
    }

    pub fn dependency_graph(&self) -> Result<DependencyGraph, ModelError> {
        let violations = self.structural_violations();
        if !violations.is_empty() {
            return Err(ModelError::Invalid(ValidationReport {
                violations,
                binary: self.signature.is_binary(),
            }));
        }
        let (edges, order) = self
            .topological_order()
            .expect("structural check rules out cycles");
        Ok(DependencyGraph { edges, order })
    }

    /// Full validation, including the exhaustive range sweep of every equation.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = self.structural_violations();
        let sig = &*self.signature;
        for v in sig.endogenous() {
            let Some(e) = self.equation(v) else { continue };
            let refs = e.references();
            if refs.iter().any(|r| r.index() >= sig.len()) {
                continue;
            }
            if let Some(violation) = self.range_check(v, e, &refs) {
                violations.push(violation);
            }
        }
        ValidationReport {
            violations,
            binary: sig.is_binary(),
        }
    }

    fn range_check(&self, target: Var, body: &Expr, refs: &[Var]) -> Option<Violation> {
        let sig = &*self.signature;
        let range = sig.range(target);
        let (lo, hi) = body.bounds(sig);
        if hi.saturating_sub(lo) < range.len() as Value && (lo..=hi).all(|x| range.contains(&x)) {
            return None;
        }
        let total = refs
            .iter()
            .try_fold(1u64, |acc, r| acc.checked_mul(sig.range(*r).len() as u64));
        match total {
            Some(t) if t <= RANGE_SWEEP_LIMIT => {}
            _ => {
                return Some(Violation::RangeUnverified {
                    var: sig.name(target).to_string(),
                })
            }
        }
        let mut values = vec![0; sig.len()];
        let mut digits = vec![0usize; refs.len()];
        loop {
            for (r, &d) in refs.iter().zip(&digits) {
                values[r.index()] = sig.range(*r)[d];
            }
            let produced = body.eval(&values);
            if !range.contains(&produced) {
                return Some(Violation::RangeViolation {
                    var: sig.name(target).to_string(),
                    assignment: refs
                        .iter()
                        .map(|r| (sig.name(*r).to_string(), values[r.index()]))
                        .collect(),
                    produced,
                });
            }
            // odometer, last reference varies fastest
            let mut i = refs.len();
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < sig.range(refs[i]).len() {
                    break;
                }
                digits[i] = 0;
            }
        }
    }

    /// `M_{X<-x}`: the assigned variables become fixed; the input is untouched.
    pub fn intervene(&self, assignment: &Assignment) -> Result<CausalModel, ModelError> {
        let sig = &*self.signature;
        let mut out = self.clone();
        for (v, x) in assignment.iter() {
            if v.index() >= sig.len() {
                return Err(ModelError::DanglingReference(v.index()));
            }
            if !sig.is_endogenous(v) {
                return Err(ModelError::NotEndogenous(sig.name(v).to_string()));
            }
            if !sig.in_range(v, x) {
                return Err(ModelError::OutOfRange {
                    var: sig.name(v).to_string(),
                    value: x,
                });
            }
            out.mechanisms[v.index()] = Some(Mechanism::Fixed(x));
        }
        Ok(out)
    }

    /// The unique solution in `context`, evaluating equations in dependency order.
    pub fn solve(&self, context: &Context) -> Result<TotalState, ModelError> {
        let eval = Evaluator::new(self)?;
        let base = eval.base_values(context);
        let values = eval.solve(&base, &[]);
        let sig = &*self.signature;
        for v in sig.endogenous() {
            let x = values[v.index()];
            if !sig.in_range(v, x) {
                return Err(ModelError::OutOfRange {
                    var: sig.name(v).to_string(),
                    value: x,
                });
            }
        }
        Ok(TotalState::from_values(values))
    }
}

/// A model compiled for repeated solving under varying interventions.
#[derive(Debug, Clone)]
pub(crate) struct Evaluator {
    order: Vec<Var>,
    mechanisms: Vec<Option<Mechanism>>,
    n: usize,
}

impl Evaluator {
    pub(crate) fn new(model: &CausalModel) -> Result<Self, ModelError> {
        let graph = model.dependency_graph()?;
        Ok(Self {
            order: graph.order,
            mechanisms: model.mechanisms.clone(),
            n: model.signature.len(),
        })
    }

    pub(crate) fn order(&self) -> &[Var] {
        &self.order
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    /// Valuation with the context filled in and endogenous slots zeroed.
    pub(crate) fn base_values(&self, context: &Context) -> Vec<Value> {
        let mut values = vec![0; self.n];
        for (v, x) in context.values().iter() {
            values[v.index()] = x;
        }
        values
    }

    /// Value of `v` computed from its mechanism under the current valuation.
    #[inline]
    pub(crate) fn natural(&self, v: Var, values: &[Value]) -> Value {
        match &self.mechanisms[v.index()] {
            Some(Mechanism::Equation(e)) => e.eval(values),
            Some(Mechanism::Fixed(x)) => *x,
            None => unreachable!("evaluator built from a model with every mechanism present"),
        }
    }

    /// Solve with `overrides` (indexed by variable; empty slice for none).
    pub(crate) fn solve(&self, base: &[Value], overrides: &[Option<Value>]) -> Vec<Value> {
        let mut values = base.to_vec();
        self.solve_into(&mut values, overrides);
        values
    }

    pub(crate) fn solve_into(&self, values: &mut [Value], overrides: &[Option<Value>]) {
        for &v in &self.order {
            values[v.index()] = match overrides.get(v.index()).copied().flatten() {
                Some(x) => x,
                None => self.natural(v, values),
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::files::parse_model;

    const ROCK2: &str = "
variables
  U  : exo  : {0,1}
  ST : endo : {0,1}
  BT : endo : {0,1}
  SH : endo : {0,1}
  BH : endo : {0,1}
  BS : endo : {0,1}
equations
  ST := U
  BT := U
  SH := ST
  BH := (BT & !SH)
  BS := (SH | BH)
";

    fn names(sig: &Signature, edges: &[(Var, Var)]) -> Vec<(String, String)> {
        edges
            .iter()
            .map(|&(a, b)| (sig.name(a).to_string(), sig.name(b).to_string()))
            .collect()
    }

    #[test]
    fn sophisticated_rock_model_solves_and_graphs() {
        let m = parse_model(ROCK2).unwrap();
        assert!(m.validate().is_valid());
        let sig = m.signature();
        let s = m.solve(&Context::from_pairs(sig, [("U", 1)]).unwrap()).unwrap();
        let get = |n: &str| s.get(sig.var(n).unwrap());
        assert_eq!(
            [get("ST"), get("BT"), get("SH"), get("BH"), get("BS")],
            [1, 1, 1, 0, 1]
        );
        let g = m.dependency_graph().unwrap();
        let mut e = names(sig, &g.edges);
        e.sort();
        let mut expected: Vec<(String, String)> = [("ST", "SH"), ("SH", "BH"), ("BT", "BH"), ("SH", "BS"), ("BH", "BS")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        expected.sort();
        assert_eq!(e, expected);
    }

    #[test]
    fn intervention_is_pure_and_local() {
        let m = parse_model(ROCK2).unwrap();
        let sig = m.signature();
        let ctx = Context::from_pairs(sig, [("U", 1)]).unwrap();
        let before = m.solve(&ctx).unwrap();
        let st0 = Assignment::from_pairs(sig, [("ST", 0)]).unwrap();
        let m2 = m.intervene(&st0).unwrap();
        let s2 = m2.solve(&ctx).unwrap();
        assert_eq!(s2.get(sig.var("BH").unwrap()), 1);
        assert_eq!(s2.get(sig.var("BS").unwrap()), 1);
        assert_eq!(m.solve(&ctx).unwrap(), before);
    }

    #[test]
    fn repeated_intervention_last_wins() {
        let m = parse_model(ROCK2).unwrap();
        let sig = m.signature();
        let ctx = Context::from_pairs(sig, [("U", 1)]).unwrap();
        let a = Assignment::from_pairs(sig, [("ST", 0)]).unwrap();
        let b = Assignment::from_pairs(sig, [("ST", 1)]).unwrap();
        let m2 = m.intervene(&a).unwrap().intervene(&b).unwrap();
        assert_eq!(m2.solve(&ctx).unwrap().get(sig.var("ST").unwrap()), 1);
        assert_eq!(m2.fixed().len(), 1);
    }

    #[test]
    fn empty_intervention_changes_nothing() {
        let m = parse_model(ROCK2).unwrap();
        let m2 = m.intervene(&Assignment::new()).unwrap();
        for u in [0, 1] {
            let ctx = Context::from_pairs(m.signature(), [("U", u)]).unwrap();
            assert_eq!(m.solve(&ctx).unwrap(), m2.solve(&ctx).unwrap());
        }
    }

    #[test]
    fn two_node_cycle_is_reported() {
        let m = parse_model(
            "variables\n U : exo : {0,1}\n X : endo : {0,1}\n Y : endo : {0,1}\nequations\n X := Y\n Y := X\n",
        )
        .unwrap();
        let r = m.validate();
        assert!(!r.is_valid());
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Cycle { vars } if vars.len() == 2)));
        assert!(matches!(
            m.solve(&Context::from_pairs(m.signature(), [("U", 0)]).unwrap()),
            Err(ModelError::Invalid(_))
        ));
    }

    #[test]
    fn sum_outside_range_is_found_by_sweep() {
        let m = parse_model(
            "variables\n A : exo : {0,1}\n B : exo : {0,1}\n X : endo : {0,1}\nequations\n X := (A + B)\n",
        )
        .unwrap();
        let r = m.validate();
        let expected: BTreeMap<String, Value> = [("A".to_string(), 1), ("B".to_string(), 1)].into();
        assert_eq!(
            r.violations,
            vec![Violation::RangeViolation {
                var: "X".into(),
                assignment: expected,
                produced: 2
            }]
        );
    }

    #[test]
    fn self_reference_and_missing_equation() {
        let mut b = SignatureBuilder::new();
        b.add("U", VarKind::Exogenous, [0, 1]);
        b.add("X", VarKind::Endogenous, [0, 1]);
        b.add("Y", VarKind::Endogenous, [0, 1]);
        let sig = b.build().unwrap();
        let x = sig.var("X").unwrap();
        let mut m = CausalModel::new(sig);
        m.set_equation(x, Expr::not(Expr::var(x))).unwrap();
        let r = m.validate();
        assert!(r.violations.contains(&Violation::SelfReference { var: "X".into() }));
        assert!(r.violations.contains(&Violation::MissingEquation { var: "Y".into() }));
    }

    #[test]
    fn signature_invariants() {
        let mut b = SignatureBuilder::new();
        b.add("U", VarKind::Exogenous, [0, 1]);
        b.add("U", VarKind::Endogenous, [0, 1]);
        assert_eq!(b.build(), Err(SignatureError::DuplicateName("U".into())));
        let mut b = SignatureBuilder::new();
        b.add("U", VarKind::Exogenous, []);
        assert_eq!(b.build(), Err(SignatureError::EmptyRange("U".into())));
        let mut b = SignatureBuilder::new();
        b.add("U", VarKind::Exogenous, [1, 1]);
        assert!(matches!(b.build(), Err(SignatureError::DuplicateValue { .. })));
    }

    #[test]
    fn partial_context_rejected() {
        let m = parse_model(ROCK2).unwrap();
        assert_eq!(
            Context::new(m.signature(), Assignment::new()),
            Err(ModelError::PartialContext("U".into()))
        );
    }
}
