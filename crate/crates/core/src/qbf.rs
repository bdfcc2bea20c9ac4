//! Two-block closed quantified Boolean formulas and their reductions to
//! causality queries.
//!
//! `exists X forall Y phi` becomes a query asking whether the singleton `A=0`
//! satisfies AC1 and AC2; `forall Y exists X phi` becomes a query asking
//! whether `A1=0 & A2=0` satisfies AC1 and AC3. In both the label is the
//! truth value of the formula, computed here by exhaustive evaluation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{CauseQuery, EngineError, Variant};
use crate::expr::Expr;
use crate::formula::{parse_propositional, EventFormula};
use crate::model::{Assignment, CausalModel, Context, Signature, SignatureBuilder, VarKind};
use crate::syntax::{is_identifier, ParseError};

/// Default cap on `|X| + |Y|` for exhaustive evaluation.
pub const DEFAULT_VAR_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantifierShape {
    /// `exists X forall Y phi`
    ExistsForall,
    /// `forall Y exists X phi`
    ForallExists,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error("quantifier block `{0}` is empty")]
    EmptyBlock(&'static str),
    #[error("variable `{0}` is quantified twice")]
    DuplicateVariable(String),
    #[error("`{0}` is not a valid variable name")]
    BadName(String),
    #[error("matrix mentions unquantified variable `{0}`")]
    FreeVariable(String),
    #[error("matrix compares `{var}` with non-Boolean value {value}")]
    NonBoolean { var: String, value: i64 },
    #[error("{vars} variables exceed the evaluation limit of {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("expected a formula of shape {expected:?}")]
    WrongShape { expected: QuantifierShape },
}

/// A closed QBF with one existential and one universal block. The two
/// blocks are named by quantifier, not by position, so both shapes share the
/// convention that `exists_vars` play the role of `X` and `forall_vars` of `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cqbf2 {
    shape: QuantifierShape,
    exists_vars: Vec<String>,
    forall_vars: Vec<String>,
    matrix: EventFormula,
}

impl Cqbf2 {
    pub fn new(
        shape: QuantifierShape,
        exists_vars: Vec<String>,
        forall_vars: Vec<String>,
        matrix: EventFormula,
    ) -> Result<Self, QbfError> {
        if exists_vars.is_empty() {
            return Err(QbfError::EmptyBlock("exists"));
        }
        if forall_vars.is_empty() {
            return Err(QbfError::EmptyBlock("forall"));
        }
        let mut seen = BTreeSet::new();
        for v in exists_vars.iter().chain(&forall_vars) {
            if !is_identifier(v) {
                return Err(QbfError::BadName(v.clone()));
            }
            if !seen.insert(v.as_str()) {
                return Err(QbfError::DuplicateVariable(v.clone()));
            }
        }
        check_matrix(&matrix, &seen)?;
        Ok(Self {
            shape,
            exists_vars,
            forall_vars,
            matrix,
        })
    }

    pub fn shape(&self) -> QuantifierShape {
        self.shape
    }

    pub fn exists_vars(&self) -> &[String] {
        &self.exists_vars
    }

    pub fn forall_vars(&self) -> &[String] {
        &self.forall_vars
    }

    pub fn matrix(&self) -> &EventFormula {
        &self.matrix
    }
}

fn check_matrix(f: &EventFormula, vars: &BTreeSet<&str>) -> Result<(), QbfError> {
    match f {
        EventFormula::Prim { var, value } => {
            if !vars.contains(var.as_str()) {
                return Err(QbfError::FreeVariable(var.clone()));
            }
            if *value != 0 && *value != 1 {
                return Err(QbfError::NonBoolean {
                    var: var.clone(),
                    value: *value,
                });
            }
            Ok(())
        }
        EventFormula::Not(g) => check_matrix(g, vars),
        EventFormula::And(gs) | EventFormula::Or(gs) => gs.iter().try_for_each(|g| check_matrix(g, vars)),
    }
}

impl fmt::Display for Cqbf2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ex = self.exists_vars.join(" ");
        let fa = self.forall_vars.join(" ");
        match self.shape {
            QuantifierShape::ExistsForall => writeln!(f, "exists {ex} forall {fa}")?,
            QuantifierShape::ForallExists => writeln!(f, "forall {fa} exists {ex}")?,
        }
        writeln!(f, "{}", self.matrix)
    }
}

/// First non-blank line is the prefix (`exists x1 x2 forall y1` or
/// `forall y1 exists x1 x2`); the rest is the matrix, in which a bare name
/// stands for `name=1`. `#` starts a comment.
pub fn parse_cqbf(text: &str) -> Result<Cqbf2, ParseError> {
    let mut cleaned = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        match line.find('#') {
            Some(i) => {
                cleaned.push_str(&line[..i]);
                cleaned.extend(line[i..].chars().map(|c| if c == '\n' { '\n' } else { ' ' }));
            }
            None => cleaned.push_str(line),
        }
    }
    let start = cleaned.len() - cleaned.trim_start().len();
    let prefix_end = cleaned[start..].find('\n').map_or(cleaned.len(), |i| start + i);
    let prefix = &cleaned[start..prefix_end];
    let words: Vec<(usize, &str)> = prefix
        .split_whitespace()
        .map(|w| (start + (w.as_ptr() as usize - prefix.as_ptr() as usize), w))
        .collect();
    let Some(&(first_at, first)) = words.first() else {
        return Err(ParseError::new(start, "expected a quantifier prefix"));
    };
    let shape = match first {
        "exists" => QuantifierShape::ExistsForall,
        "forall" => QuantifierShape::ForallExists,
        other => return Err(ParseError::new(first_at, format!("expected `exists` or `forall`, found `{other}`"))),
    };
    let second_kw = if shape == QuantifierShape::ExistsForall { "forall" } else { "exists" };
    let split = words
        .iter()
        .position(|&(_, w)| w == second_kw)
        .ok_or_else(|| ParseError::new(prefix_end, format!("expected `{second_kw}` block")))?;
    let block = |ws: &[(usize, &str)]| -> Result<Vec<String>, ParseError> {
        ws.iter()
            .map(|&(at, w)| {
                if is_identifier(w) && w != "exists" && w != "forall" {
                    Ok(w.to_string())
                } else {
                    Err(ParseError::new(at, format!("invalid variable name `{w}`")))
                }
            })
            .collect()
    };
    let first_block = block(&words[1..split])?;
    let second_block = block(&words[split + 1..])?;
    let (exists_vars, forall_vars) = match shape {
        QuantifierShape::ExistsForall => (first_block, second_block),
        QuantifierShape::ForallExists => (second_block, first_block),
    };
    let matrix_text = &cleaned[prefix_end..];
    let matrix = parse_propositional(matrix_text).map_err(|e| e.shifted(prefix_end))?;
    Cqbf2::new(shape, exists_vars, forall_vars, matrix).map_err(|e| ParseError::new(prefix_end, e.to_string()))
}

/// Truth value of the formula, by exhaustive evaluation.
pub fn eval_cqbf(f: &Cqbf2) -> Result<bool, QbfError> {
    eval_cqbf_with_limit(f, DEFAULT_VAR_LIMIT)
}

pub fn eval_cqbf_with_limit(f: &Cqbf2, limit: usize) -> Result<bool, QbfError> {
    let n = f.exists_vars.len() + f.forall_vars.len();
    if n > limit {
        return Err(QbfError::TooLarge { vars: n, limit });
    }
    // Variables laid out as [exists..., forall...] in a throwaway signature.
    let mut b = SignatureBuilder::new();
    for v in f.exists_vars.iter().chain(&f.forall_vars) {
        b.add(v.as_str(), VarKind::Endogenous, [0, 1]);
    }
    let sig = b.build().expect("names were checked distinct");
    let matrix = f.matrix.compile(&sig).expect("matrix was checked closed and Boolean");
    let ne = f.exists_vars.len();
    let nf = f.forall_vars.len();
    let mut values = vec![0i64; n];
    let mut holds = |xs: u64, ys: u64| {
        let (ex, fa) = values.split_at_mut(ne);
        for (i, x) in ex.iter_mut().enumerate() {
            *x = ((xs >> i) & 1) as i64;
        }
        for (j, y) in fa.iter_mut().enumerate() {
            *y = ((ys >> j) & 1) as i64;
        }
        matrix.eval(&values)
    };
    Ok(match f.shape {
        QuantifierShape::ExistsForall => {
            (0..1u64 << ne).any(|xs| (0..1u64 << nf).all(|ys| holds(xs, ys)))
        }
        QuantifierShape::ForallExists => {
            (0..1u64 << nf).all(|ys| (0..1u64 << ne).any(|xs| holds(xs, ys)))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Language {
    /// Singleton candidates satisfying AC1 and AC2.
    #[serde(rename = "L_AC2_singleton")]
    Ac2Singleton,
    /// Candidates satisfying AC1 and AC3.
    #[serde(rename = "L_AC3")]
    Ac3,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::Ac2Singleton => "L_AC2_singleton",
            Language::Ac3 => "L_AC3",
        })
    }
}

/// A causality query with the membership answer it must receive.
#[derive(Debug, Clone)]
pub struct LabeledInstance {
    pub query: CauseQuery,
    pub expected_in_language: bool,
    pub language: Language,
}

impl LabeledInstance {
    /// Decide membership with the cause engine.
    pub fn engine_membership(&self) -> Result<bool, EngineError> {
        let checker = self.query.checker()?;
        let effect = self.query.effect.compile(self.query.signature())?;
        let cand = &self.query.candidate;
        if !checker.ac1(cand, &effect) {
            return Ok(false);
        }
        Ok(match self.language {
            Language::Ac2Singleton => checker.find_witness(cand, &effect, None)?.is_some(),
            Language::Ac3 => checker.ac3_violator(cand, &effect)?.is_none(),
        })
    }
}

/// Deterministic fresh names: `base`, then `base_`, `base__`, ... until unused.
struct Names {
    taken: BTreeSet<String>,
}

impl Names {
    fn new<'a>(reserved: impl IntoIterator<Item = &'a String>) -> Self {
        Self {
            taken: reserved.into_iter().cloned().collect(),
        }
    }

    fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        while self.taken.contains(&name) {
            name.push('_');
        }
        self.taken.insert(name.clone());
        name
    }
}

fn rename(f: &EventFormula, map: &dyn Fn(&str) -> String) -> EventFormula {
    match f {
        EventFormula::Prim { var, value } => EventFormula::prim(map(var), *value),
        EventFormula::Not(g) => EventFormula::not(rename(g, map)),
        EventFormula::And(gs) => EventFormula::And(gs.iter().map(|g| rename(g, map)).collect()),
        EventFormula::Or(gs) => EventFormula::Or(gs.iter().map(|g| rename(g, map)).collect()),
    }
}

/// Binary model over the given endogenous names plus `U`; every equation is
/// `V := U` except those listed in `copies` (`V := source`).
fn build_model(endogenous: &[String], copies: &[(&str, &str)], u_name: &str) -> CausalModel {
    let mut b = SignatureBuilder::new();
    b.add(u_name, VarKind::Exogenous, [0, 1]);
    for v in endogenous {
        b.add(v.as_str(), VarKind::Endogenous, [0, 1]);
    }
    let sig: Signature = b.build().expect("generated names are distinct");
    let u = sig.var(u_name).expect("declared");
    let mut model = CausalModel::new(sig.clone());
    for v in endogenous {
        let var = sig.var(v).expect("declared");
        let source = copies
            .iter()
            .find(|(target, _)| target == v)
            .map_or(u, |(_, s)| sig.var(s).expect("declared"));
        model.set_equation(var, Expr::var(source)).expect("endogenous");
    }
    model
}

fn zero_query(model: CausalModel, u_name: &str, candidate: &[&String], psi: EventFormula) -> CauseQuery {
    let sig = model.signature();
    let ctx = Context::from_pairs(sig, [(u_name, 0)]).expect("U is the only exogenous variable");
    let cand = Assignment::from_pairs(sig, candidate.iter().map(|n| (n.as_str(), 0))).expect("declared");
    CauseQuery::new(model, ctx, cand, psi, Variant::Updated).expect("generated query is well formed")
}

/// `exists X forall Y phi` is true iff `A=0` satisfies AC1 and AC2 for
/// `psi = psi1 | (psi2 & psi3)` in the all-zero world of the built model.
pub fn build_sigma2_instance(f: &Cqbf2) -> Result<LabeledInstance, QbfError> {
    if f.shape != QuantifierShape::ExistsForall {
        return Err(QbfError::WrongShape {
            expected: QuantifierShape::ExistsForall,
        });
    }
    let expected = eval_cqbf(f)?;
    let mut names = Names::new(f.exists_vars.iter().chain(&f.forall_vars));
    let mut x0 = Vec::new();
    let mut x1 = Vec::new();
    for x in &f.exists_vars {
        x0.push(names.fresh(&format!("X0_{x}")));
        x1.push(names.fresh(&format!("X1_{x}")));
    }
    let a = names.fresh("A");
    let u = names.fresh("U");

    let mut endogenous = Vec::new();
    for (n0, n1) in x0.iter().zip(&x1) {
        endogenous.push(n0.clone());
        endogenous.push(n1.clone());
    }
    endogenous.extend(f.forall_vars.iter().cloned());
    endogenous.push(a.clone());
    let model = build_model(&endogenous, &[], &u);

    let psi1 = EventFormula::not(EventFormula::and(
        x0.iter().zip(&x1).map(|(n0, n1)| EventFormula::differ_binary(n0, n1)).collect(),
    ));
    let mut all_y = vec![EventFormula::prim(a.as_str(), 1)];
    all_y.extend(f.forall_vars.iter().map(|y| EventFormula::prim(y.as_str(), 1)));
    let psi2 = EventFormula::not(EventFormula::and(all_y));
    let to_x1 = |v: &str| match f.exists_vars.iter().position(|x| x == v) {
        Some(i) => x1[i].clone(),
        None => v.to_string(),
    };
    let psi3 = EventFormula::or(vec![EventFormula::prim(a.as_str(), 1), rename(&f.matrix, &to_x1)]);
    let psi = EventFormula::or(vec![psi1, EventFormula::and(vec![psi2, psi3])]);

    Ok(LabeledInstance {
        query: zero_query(model, &u, &[&a], psi),
        expected_in_language: expected,
        language: Language::Ac2Singleton,
    })
}

/// `forall Y exists X phi` is true iff `A1=0 & A2=0` satisfies AC1 and AC3
/// for `psi = psi1 | (psi2 & psi3) | S=0` in the all-zero world of the built
/// model, where `A1 := S` and `A2 := S`.
pub fn build_pi2_instance(f: &Cqbf2) -> Result<LabeledInstance, QbfError> {
    if f.shape != QuantifierShape::ForallExists {
        return Err(QbfError::WrongShape {
            expected: QuantifierShape::ForallExists,
        });
    }
    let expected = eval_cqbf(f)?;
    let mut names = Names::new(f.exists_vars.iter().chain(&f.forall_vars));
    let mut y0 = Vec::new();
    let mut y1 = Vec::new();
    for y in &f.forall_vars {
        y0.push(names.fresh(&format!("Y0_{y}")));
        y1.push(names.fresh(&format!("Y1_{y}")));
    }
    let a1 = names.fresh("A1");
    let a2 = names.fresh("A2");
    let s = names.fresh("S");
    let u = names.fresh("U");

    let mut endogenous: Vec<String> = f.exists_vars.clone();
    for (n0, n1) in y0.iter().zip(&y1) {
        endogenous.push(n0.clone());
        endogenous.push(n1.clone());
    }
    endogenous.push(s.clone());
    endogenous.push(a1.clone());
    endogenous.push(a2.clone());
    let model = build_model(&endogenous, &[(&a1, &s), (&a2, &s)], &u);

    let psi1 = EventFormula::not(EventFormula::and(
        y0.iter().zip(&y1).map(|(n0, n1)| EventFormula::differ_binary(n0, n1)).collect(),
    ));
    let mut all_ax = vec![EventFormula::prim(a1.as_str(), 1), EventFormula::prim(a2.as_str(), 1)];
    all_ax.extend(f.exists_vars.iter().map(|x| EventFormula::prim(x.as_str(), 1)));
    let psi2 = EventFormula::not(EventFormula::and(all_ax));
    let a_equal = EventFormula::or(vec![
        EventFormula::and(vec![EventFormula::prim(a1.as_str(), 0), EventFormula::prim(a2.as_str(), 0)]),
        EventFormula::and(vec![EventFormula::prim(a1.as_str(), 1), EventFormula::prim(a2.as_str(), 1)]),
    ]);
    let to_y1 = |v: &str| match f.forall_vars.iter().position(|y| y == v) {
        Some(i) => y1[i].clone(),
        None => v.to_string(),
    };
    let psi3 = EventFormula::or(vec![a_equal, EventFormula::not(rename(&f.matrix, &to_y1))]);
    let psi = EventFormula::or(vec![
        psi1,
        EventFormula::and(vec![psi2, psi3]),
        EventFormula::prim(s.as_str(), 0),
    ]);

    Ok(LabeledInstance {
        query: zero_query(model, &u, &[&a1, &a2], psi),
        expected_in_language: expected,
        language: Language::Ac3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(text: &str) -> Cqbf2 {
        parse_cqbf(text).unwrap()
    }

    #[test]
    fn evaluates_small_formulas() {
        assert!(eval_cqbf(&q("exists x forall y\n(x | y)")).unwrap());
        assert!(!eval_cqbf(&q("forall x exists y\n(x & y)")).unwrap());
        assert!(!eval_cqbf(&q("exists x forall y\n((x & y) | (!x & !y))")).unwrap());
        assert!(eval_cqbf(&q("forall y exists x\n((x & y) | (!x & !y))")).unwrap());
    }

    #[test]
    fn roles_follow_quantifiers() {
        let f = q("forall y1 y2 exists x1\n(x1 | (y1 & y2))");
        assert_eq!(f.shape(), QuantifierShape::ForallExists);
        assert_eq!(f.exists_vars(), ["x1"]);
        assert_eq!(f.forall_vars(), ["y1", "y2"]);
        assert_eq!(q(&f.to_string()), f);
    }

    #[test]
    fn rejects_open_or_malformed_formulas() {
        assert!(parse_cqbf("exists x forall y\n(x | z)").is_err());
        assert!(parse_cqbf("exists x forall x\nx").is_err());
        assert!(parse_cqbf("exists forall y\ny").is_err());
        let err = parse_cqbf("exists x forall y\n(x | )").unwrap_err();
        assert_eq!(err.offset, 23);
        let err = parse_cqbf("exist x forall y\nx").unwrap_err();
        assert_eq!(err.offset, 0);
    }

    #[test]
    fn size_limit() {
        let f = q("exists a b c forall d e\n(a | d)");
        assert!(matches!(eval_cqbf_with_limit(&f, 4), Err(QbfError::TooLarge { vars: 5, limit: 4 })));
    }

    #[test]
    fn sigma2_instance_shape() {
        let inst = build_sigma2_instance(&q("exists x forall y\n(x | y)")).unwrap();
        let sig = inst.query.signature();
        let names: Vec<&str> = sig.decls().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["U", "X0_x", "X1_x", "y", "A"]);
        assert!(inst.query.model.validate().binary);
        let actual = inst.query.model.solve(&inst.query.context).unwrap();
        assert!(actual.values().iter().all(|&v| v == 0));
        assert!(inst.expected_in_language);
        assert!(inst.engine_membership().unwrap());

        let inst = build_sigma2_instance(&q("exists x forall y\n(x & y)")).unwrap();
        assert!(!inst.expected_in_language);
        assert!(!inst.engine_membership().unwrap());
    }

    #[test]
    fn pi2_instance_shape() {
        let inst = build_pi2_instance(&q("forall y exists x\n(x | y)")).unwrap();
        let sig = inst.query.signature();
        let s = sig.var("S").unwrap();
        let graph = inst.query.model.dependency_graph().unwrap();
        for a in ["A1", "A2"] {
            assert!(graph.edges.contains(&(s, sig.var(a).unwrap())));
        }
        assert!(inst.expected_in_language);
        assert!(inst.engine_membership().unwrap());

        let inst = build_pi2_instance(&q("forall y exists x\n(x & !x)")).unwrap();
        assert!(!inst.expected_in_language);
        assert!(!inst.engine_membership().unwrap());
    }

    #[test]
    fn fresh_names_avoid_collisions() {
        let inst = build_sigma2_instance(&q("exists x forall A X0_x\n(x | A | X0_x)")).unwrap();
        let sig = inst.query.signature();
        let names: Vec<&str> = sig.decls().iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["U", "X0_x_", "X1_x", "A", "X0_x", "A_"]);
        assert_eq!(inst.query.candidate.display(sig).to_string(), "A_=0");
    }

    #[test]
    fn shapes_are_checked() {
        let f = q("exists x forall y\n(x | y)");
        assert!(matches!(build_pi2_instance(&f), Err(QbfError::WrongShape { .. })));
    }
}
