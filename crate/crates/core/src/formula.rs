//! Event formulas (Boolean combinations of primitive events `X=x`) and causal
//! formulas (Boolean combinations of `[Y1<-y1, ..] phi`).
//!
//! Textual grammar:
//!
//! ```text
//! f    := atom | '!' f | '(' f ')' | '(' f '&' f { '&' f } ')' | '(' f '|' f { '|' f } ')'
//! atom := IDENT '=' INT | IDENT '!=' INT
//! cf   := '[' IDENT '<-' INT { ',' IDENT '<-' INT } ']' f | f
//!       | '!' cf | '(' cf '&' cf .. ')' | '(' cf '|' cf .. ')'
//! ```
//!
//! `X!=v` is read as `!(X=v)`. With a signature at hand ([`parse_event_formula_in`])
//! the atoms `X=Y`, `X!=Y`, `X>=v` and `X<=v` are also accepted and expanded
//! into primitive events over the declared ranges.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{Assignment, CausalModel, Context, ModelError, Signature, TotalState, Value};
use crate::syntax::{Cursor, ParseError, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventFormula {
    Prim { var: String, value: Value },
    Not(Box<EventFormula>),
    And(Vec<EventFormula>),
    Or(Vec<EventFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CausalFormula {
    Event(EventFormula),
    Intervened {
        assignment: Vec<(String, Value)>,
        body: EventFormula,
    },
    Not(Box<CausalFormula>),
    And(Vec<CausalFormula>),
    Or(Vec<CausalFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{0}` is not an endogenous variable")]
    NotEndogenous(String),
    #[error("value {value} is outside the range of `{var}`")]
    OutOfRange { var: String, value: Value },
    #[error("variable `{0}` is intervened on twice")]
    DuplicateIntervention(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl EventFormula {
    pub fn prim(var: impl Into<String>, value: Value) -> Self {
        EventFormula::Prim {
            var: var.into(),
            value,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: EventFormula) -> Self {
        EventFormula::Not(Box::new(f))
    }

    /// Conjunction; a single operand is returned unchanged.
    pub fn and(mut fs: Vec<EventFormula>) -> Self {
        debug_assert!(!fs.is_empty(), "empty conjunction has no textual form");
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            EventFormula::And(fs)
        }
    }

    /// Disjunction; a single operand is returned unchanged.
    pub fn or(mut fs: Vec<EventFormula>) -> Self {
        debug_assert!(!fs.is_empty(), "empty disjunction has no textual form");
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            EventFormula::Or(fs)
        }
    }

    /// `a != b` over binary variables: `(a=1 & b=0) | (a=0 & b=1)`.
    pub fn differ_binary(a: &str, b: &str) -> Self {
        EventFormula::Or(vec![
            EventFormula::And(vec![Self::prim(a, 1), Self::prim(b, 0)]),
            EventFormula::And(vec![Self::prim(a, 0), Self::prim(b, 1)]),
        ])
    }

    /// Names of all variables mentioned, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit_prims(&mut |var, _| {
            if seen.insert(var.to_string()) {
                out.push(var.to_string());
            }
        });
        out
    }

    fn visit_prims(&self, f: &mut impl FnMut(&str, Value)) {
        match self {
            EventFormula::Prim { var, value } => f(var, *value),
            EventFormula::Not(g) => g.visit_prims(f),
            EventFormula::And(gs) | EventFormula::Or(gs) => gs.iter().for_each(|g| g.visit_prims(f)),
        }
    }

    /// Resolve names against a signature; every primitive must be an
    /// endogenous variable with an in-range value.
    pub fn compile(&self, sig: &Signature) -> Result<CompiledEvent, FormulaError> {
        Ok(match self {
            EventFormula::Prim { var, value } => {
                let v = sig
                    .var(var)
                    .ok_or_else(|| FormulaError::UnknownVariable(var.clone()))?;
                if !sig.is_endogenous(v) {
                    return Err(FormulaError::NotEndogenous(var.clone()));
                }
                if !sig.in_range(v, *value) {
                    return Err(FormulaError::OutOfRange {
                        var: var.clone(),
                        value: *value,
                    });
                }
                CompiledEvent::Prim(v.index(), *value)
            }
            EventFormula::Not(g) => CompiledEvent::Not(Box::new(g.compile(sig)?)),
            EventFormula::And(gs) => {
                CompiledEvent::And(gs.iter().map(|g| g.compile(sig)).collect::<Result<_, _>>()?)
            }
            EventFormula::Or(gs) => {
                CompiledEvent::Or(gs.iter().map(|g| g.compile(sig)).collect::<Result<_, _>>()?)
            }
        })
    }

    pub fn holds_in(&self, sig: &Signature, state: &TotalState) -> Result<bool, FormulaError> {
        Ok(self.compile(sig)?.eval(state.values()))
    }
}

/// An event formula resolved to variable indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledEvent {
    Prim(usize, Value),
    Not(Box<CompiledEvent>),
    And(Vec<CompiledEvent>),
    Or(Vec<CompiledEvent>),
}

impl CompiledEvent {
    #[inline]
    pub fn eval(&self, values: &[Value]) -> bool {
        match self {
            CompiledEvent::Prim(i, x) => values[*i] == *x,
            CompiledEvent::Not(g) => !g.eval(values),
            CompiledEvent::And(gs) => gs.iter().all(|g| g.eval(values)),
            CompiledEvent::Or(gs) => gs.iter().any(|g| g.eval(values)),
        }
    }
}

impl CausalFormula {
    pub fn intervened(assignment: Vec<(String, Value)>, body: EventFormula) -> Self {
        CausalFormula::Intervened { assignment, body }
    }

    /// The event formula, if this causal formula contains no intervention.
    pub fn as_event(&self) -> Option<EventFormula> {
        match self {
            CausalFormula::Event(e) => Some(e.clone()),
            CausalFormula::Intervened { .. } => None,
            CausalFormula::Not(g) => Some(EventFormula::not(g.as_event()?)),
            CausalFormula::And(gs) => Some(EventFormula::And(
                gs.iter().map(|g| g.as_event()).collect::<Option<_>>()?,
            )),
            CausalFormula::Or(gs) => Some(EventFormula::Or(
                gs.iter().map(|g| g.as_event()).collect::<Option<_>>()?,
            )),
        }
    }
}

/// `(M, u) |= f`.
pub fn satisfies(model: &CausalModel, context: &Context, f: &CausalFormula) -> Result<bool, FormulaError> {
    let sig = model.signature();
    Ok(match f {
        CausalFormula::Event(e) => e.holds_in(sig, &model.solve(context)?)?,
        CausalFormula::Intervened { assignment, body } => {
            let mut a = Assignment::new();
            for (name, value) in assignment {
                let v = sig
                    .var(name)
                    .ok_or_else(|| FormulaError::UnknownVariable(name.clone()))?;
                if !sig.is_endogenous(v) {
                    return Err(FormulaError::NotEndogenous(name.clone()));
                }
                if !sig.in_range(v, *value) {
                    return Err(FormulaError::OutOfRange {
                        var: name.clone(),
                        value: *value,
                    });
                }
                if a.insert(v, *value).is_some() {
                    return Err(FormulaError::DuplicateIntervention(name.clone()));
                }
            }
            let m = model.intervene(&a)?;
            body.holds_in(sig, &m.solve(context)?)?
        }
        CausalFormula::Not(g) => !satisfies(model, context, g)?,
        CausalFormula::And(gs) => {
            let mut all = true;
            for g in gs {
                all &= satisfies(model, context, g)?;
            }
            all
        }
        CausalFormula::Or(gs) => {
            let mut any = false;
            for g in gs {
                any |= satisfies(model, context, g)?;
            }
            any
        }
    })
}

#[derive(Clone, Copy)]
struct Mode<'a> {
    interventions: bool,
    bare_atoms: bool,
    sig: Option<&'a Signature>,
}

pub fn parse_event_formula(text: &str) -> Result<EventFormula, ParseError> {
    parse_event_with(text, Mode { interventions: false, bare_atoms: false, sig: None })
}

/// Like [`parse_event_formula`], additionally expanding the signature-dependent
/// abbreviations `X=Y`, `X!=Y`, `X>=v`, `X<=v`.
pub fn parse_event_formula_in(text: &str, sig: &Signature) -> Result<EventFormula, ParseError> {
    parse_event_with(text, Mode { interventions: false, bare_atoms: false, sig: Some(sig) })
}

/// Propositional formulas: a bare name `x` stands for `x=1`.
pub fn parse_propositional(text: &str) -> Result<EventFormula, ParseError> {
    parse_event_with(text, Mode { interventions: false, bare_atoms: true, sig: None })
}

pub fn parse_causal_formula(text: &str) -> Result<CausalFormula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_cf(&mut cur, Mode { interventions: true, bare_atoms: false, sig: None })?;
    cur.finish()?;
    Ok(f)
}

fn parse_event_with(text: &str, mode: Mode<'_>) -> Result<EventFormula, ParseError> {
    let mut cur = Cursor::new(text)?;
    let f = parse_cf(&mut cur, mode)?;
    cur.finish()?;
    Ok(f.as_event().expect("interventions rejected in event mode"))
}

fn parse_cf(cur: &mut Cursor, mode: Mode<'_>) -> Result<CausalFormula, ParseError> {
    let off = cur.offset();
    match cur.peek() {
        Some(Tok::Bang) => {
            cur.next();
            Ok(CausalFormula::Not(Box::new(parse_cf(cur, mode)?)))
        }
        Some(Tok::LBracket) => {
            if !mode.interventions {
                return Err(ParseError::new(off, "interventions are not allowed in an event formula"));
            }
            cur.next();
            let mut assignment = Vec::new();
            loop {
                let (_, name) = cur.ident()?;
                cur.expect(&Tok::Arrow)?;
                let (_, v) = cur.int()?;
                assignment.push((name, v));
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&Tok::RBracket)?;
            let body_mode = Mode { interventions: false, ..mode };
            let body = parse_cf(cur, body_mode)?
                .as_event()
                .expect("interventions rejected in body");
            Ok(CausalFormula::Intervened { assignment, body })
        }
        Some(Tok::LParen) => {
            cur.next();
            let first = parse_cf(cur, mode)?;
            let op_off = cur.offset();
            match cur.next() {
                Some((_, Tok::RParen)) => Ok(first),
                Some((_, op @ (Tok::Amp | Tok::Pipe))) => {
                    let mut items = vec![first, parse_cf(cur, mode)?];
                    while cur.eat(&op) {
                        items.push(parse_cf(cur, mode)?);
                    }
                    cur.expect(&Tok::RParen)?;
                    Ok(if op == Tok::Amp {
                        CausalFormula::And(items)
                    } else {
                        CausalFormula::Or(items)
                    })
                }
                Some((o, t)) => Err(ParseError::new(o, format!("expected `&`, `|` or `)`, found {t}"))),
                None => Err(ParseError::new(op_off, "expected `&`, `|` or `)`, found end of input")),
            }
        }
        Some(Tok::Ident(_)) => parse_atom(cur, mode).map(CausalFormula::Event),
        Some(t) => Err(ParseError::new(off, format!("expected formula, found {t}"))),
        None => Err(ParseError::new(off, "expected formula, found end of input")),
    }
}

fn parse_atom(cur: &mut Cursor, mode: Mode<'_>) -> Result<EventFormula, ParseError> {
    let (name_off, name) = cur.ident()?;
    let op_off = cur.offset();
    let op = match cur.peek() {
        Some(Tok::Eq | Tok::NotEq | Tok::Ge | Tok::Le) => cur.next().map(|(_, t)| t).unwrap(),
        _ if mode.bare_atoms => return Ok(EventFormula::prim(name, 1)),
        Some(t) => return Err(ParseError::new(op_off, format!("expected `=`, found {t}"))),
        None => return Err(ParseError::new(op_off, "expected `=`, found end of input")),
    };
    let rhs_off = cur.offset();
    match (op, cur.peek().cloned()) {
        (Tok::Eq, Some(Tok::Int(v))) => {
            cur.next();
            Ok(EventFormula::prim(name, v))
        }
        (Tok::NotEq, Some(Tok::Int(v))) => {
            cur.next();
            Ok(EventFormula::not(EventFormula::prim(name, v)))
        }
        (op @ (Tok::Eq | Tok::NotEq), Some(Tok::Ident(other))) => {
            let sig = mode
                .sig
                .ok_or_else(|| ParseError::new(rhs_off, "comparing two variables needs a signature"))?;
            cur.next();
            let lhs = lookup(sig, &name, name_off)?;
            let rhs = lookup(sig, &other, rhs_off)?;
            let common: Vec<Value> = sig
                .range(lhs)
                .iter()
                .copied()
                .filter(|x| sig.in_range(rhs, *x))
                .collect();
            let equal = if common.is_empty() {
                // never equal: X=x & !(X=x) for some x
                let x = sig.range(lhs)[0];
                EventFormula::And(vec![
                    EventFormula::prim(name.clone(), x),
                    EventFormula::not(EventFormula::prim(name.clone(), x)),
                ])
            } else {
                EventFormula::or(
                    common
                        .iter()
                        .map(|&x| {
                            EventFormula::And(vec![
                                EventFormula::prim(name.clone(), x),
                                EventFormula::prim(other.clone(), x),
                            ])
                        })
                        .collect(),
                )
            };
            Ok(if op == Tok::Eq { equal } else { EventFormula::not(equal) })
        }
        (op @ (Tok::Ge | Tok::Le), Some(Tok::Int(k))) => {
            let sig = mode
                .sig
                .ok_or_else(|| ParseError::new(op_off, "range comparisons need a signature"))?;
            cur.next();
            let v = lookup(sig, &name, name_off)?;
            let matching: Vec<EventFormula> = sig
                .range(v)
                .iter()
                .copied()
                .filter(|&x| if op == Tok::Ge { x >= k } else { x <= k })
                .map(|x| EventFormula::prim(name.clone(), x))
                .collect();
            Ok(if matching.is_empty() {
                let x = sig.range(v)[0];
                EventFormula::And(vec![
                    EventFormula::prim(name.clone(), x),
                    EventFormula::not(EventFormula::prim(name.clone(), x)),
                ])
            } else {
                EventFormula::or(matching)
            })
        }
        (_, Some(t)) => Err(ParseError::new(rhs_off, format!("expected value, found {t}"))),
        (_, None) => Err(ParseError::new(rhs_off, "expected value, found end of input")),
    }
}

fn lookup(sig: &Signature, name: &str, off: usize) -> Result<crate::model::Var, ParseError> {
    sig.var(name)
        .ok_or_else(|| ParseError::new(off, format!("unknown variable `{name}`")))
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], op: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            write!(f, " {op} ")?;
        }
        write!(f, "{item}")?;
    }
    f.write_str(")")
}

impl fmt::Display for EventFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventFormula::Prim { var, value } => write!(f, "{var}={value}"),
            EventFormula::Not(g) => write!(f, "!{g}"),
            EventFormula::And(gs) => write_joined(f, gs, "&"),
            EventFormula::Or(gs) => write_joined(f, gs, "|"),
        }
    }
}

impl fmt::Display for CausalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CausalFormula::Event(e) => write!(f, "{e}"),
            CausalFormula::Intervened { assignment, body } => {
                f.write_str("[")?;
                for (i, (name, v)) in assignment.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}<-{v}")?;
                }
                write!(f, "] {body}")
            }
            CausalFormula::Not(g) => write!(f, "!{g}"),
            CausalFormula::And(gs) => write_joined(f, gs, "&"),
            CausalFormula::Or(gs) => write_joined(f, gs, "|"),
        }
    }
}
