//! Structural-equation bodies.
//!
//! Grammar accepted by [`Expr::parse`] (whitespace-insensitive):
//!
//! ```text
//! e := INT | IDENT | '!' e | ite '(' e ',' e ',' e ')'
//!    | '(' e ')'
//!    | '(' e '=' e ')'
//!    | '(' e '&' e { '&' e } ')'
//!    | '(' e '|' e { '|' e } ')'
//!    | '(' e '+' e { '+' e } ')'
//!    | '(' e '>=' INT ')'
//! ```
//!
//! Boolean operators read nonzero as true and always produce 0 or 1.

use std::fmt;

use crate::model::{Signature, Value, Var};
use crate::syntax::{Cursor, ParseError, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(Value),
    Var(Var),
    Eq(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Sum(Vec<Expr>),
    AtLeast(Box<Expr>, Value),
}

fn truth(b: bool) -> Value {
    Value::from(b)
}

impl Expr {
    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn eq(a: Expr, b: Expr) -> Self {
        Expr::Eq(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn ite(c: Expr, t: Expr, e: Expr) -> Self {
        Expr::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn at_least(e: Expr, threshold: Value) -> Self {
        Expr::AtLeast(Box::new(e), threshold)
    }

    /// Evaluate against a full valuation indexed by [`Var::index`].
    pub fn eval(&self, values: &[Value]) -> Value {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => values[v.index()],
            Expr::Eq(a, b) => truth(a.eval(values) == b.eval(values)),
            Expr::Not(e) => truth(e.eval(values) == 0),
            Expr::And(es) => truth(es.iter().all(|e| e.eval(values) != 0)),
            Expr::Or(es) => truth(es.iter().any(|e| e.eval(values) != 0)),
            Expr::Ite(c, t, e) => {
                if c.eval(values) != 0 {
                    t.eval(values)
                } else {
                    e.eval(values)
                }
            }
            Expr::Sum(es) => es.iter().map(|e| e.eval(values)).sum(),
            Expr::AtLeast(e, k) => truth(e.eval(values) >= *k),
        }
    }

    /// Variables syntactically referenced by the expression, sorted and deduplicated.
    pub fn references(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_refs(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Eq(a, b) => {
                a.collect_refs(out);
                b.collect_refs(out);
            }
            Expr::Not(e) | Expr::AtLeast(e, _) => e.collect_refs(out),
            Expr::And(es) | Expr::Or(es) | Expr::Sum(es) => {
                es.iter().for_each(|e| e.collect_refs(out));
            }
            Expr::Ite(c, t, e) => {
                c.collect_refs(out);
                t.collect_refs(out);
                e.collect_refs(out);
            }
        }
    }

    /// Conservative interval enclosing every value the expression can take when
    /// each variable ranges over its declared range.
    pub fn bounds(&self, sig: &Signature) -> (Value, Value) {
        match self {
            Expr::Const(c) => (*c, *c),
            Expr::Var(v) => {
                let r = sig.range(*v);
                (
                    r.iter().copied().min().unwrap_or(0),
                    r.iter().copied().max().unwrap_or(0),
                )
            }
            Expr::Eq(..) | Expr::Not(_) | Expr::And(_) | Expr::Or(_) | Expr::AtLeast(..) => (0, 1),
            Expr::Ite(_, t, e) => {
                let (a, b) = t.bounds(sig);
                let (c, d) = e.bounds(sig);
                (a.min(c), b.max(d))
            }
            Expr::Sum(es) => es.iter().fold((0, 0), |(lo, hi), e| {
                let (a, b) = e.bounds(sig);
                (lo.saturating_add(a), hi.saturating_add(b))
            }),
        }
    }

    pub fn parse(text: &str, sig: &Signature) -> Result<Expr, ParseError> {
        let mut cur = Cursor::new(text)?;
        let e = parse_expr(&mut cur, sig)?;
        cur.finish()?;
        Ok(e)
    }

    /// Render in the textual grammar, using the signature for variable names.
    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        DisplayExpr { expr: self, sig }
    }
}

fn parse_expr(cur: &mut Cursor, sig: &Signature) -> Result<Expr, ParseError> {
    let off = cur.offset();
    match cur.next() {
        Some((_, Tok::Int(v))) => Ok(Expr::Const(v)),
        Some((_, Tok::Bang)) => Ok(Expr::not(parse_expr(cur, sig)?)),
        Some((o, Tok::Ident(name))) => {
            if name == "ite" && cur.peek() == Some(&Tok::LParen) {
                cur.expect(&Tok::LParen)?;
                let c = parse_expr(cur, sig)?;
                cur.expect(&Tok::Comma)?;
                let t = parse_expr(cur, sig)?;
                cur.expect(&Tok::Comma)?;
                let e = parse_expr(cur, sig)?;
                cur.expect(&Tok::RParen)?;
                return Ok(Expr::ite(c, t, e));
            }
            sig.var(&name)
                .map(Expr::Var)
                .ok_or_else(|| ParseError::new(o, format!("unknown variable `{name}`")))
        }
        Some((_, Tok::LParen)) => {
            let first = parse_expr(cur, sig)?;
            let op_off = cur.offset();
            match cur.next() {
                Some((_, Tok::RParen)) => Ok(first),
                Some((_, Tok::Eq)) => {
                    let second = parse_expr(cur, sig)?;
                    cur.expect(&Tok::RParen)?;
                    Ok(Expr::eq(first, second))
                }
                Some((_, Tok::Ge)) => {
                    let (_, k) = cur.int()?;
                    cur.expect(&Tok::RParen)?;
                    Ok(Expr::at_least(first, k))
                }
                Some((_, op @ (Tok::Amp | Tok::Pipe | Tok::Plus))) => {
                    let mut items = vec![first, parse_expr(cur, sig)?];
                    while cur.eat(&op) {
                        items.push(parse_expr(cur, sig)?);
                    }
                    cur.expect(&Tok::RParen)?;
                    Ok(match op {
                        Tok::Amp => Expr::And(items),
                        Tok::Pipe => Expr::Or(items),
                        _ => Expr::Sum(items),
                    })
                }
                Some((o, t)) => Err(ParseError::new(o, format!("expected operator or `)`, found {t}"))),
                None => Err(ParseError::new(op_off, "expected operator or `)`, found end of input")),
            }
        }
        Some((o, t)) => Err(ParseError::new(o, format!("expected expression, found {t}"))),
        None => Err(ParseError::new(off, "expected expression, found end of input")),
    }
}

struct DisplayExpr<'a> {
    expr: &'a Expr,
    sig: &'a Signature,
}

impl fmt::Display for DisplayExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = self.sig;
        let sub = |e: &'_ Expr| -> String { DisplayExpr { expr: e, sig }.to_string() };
        let join = |f: &mut fmt::Formatter<'_>, es: &[Expr], op: &str| -> fmt::Result {
            if es.is_empty() {
                // unreachable from the parser; keep output parseable
                return f.write_str(if op == "&" { "1" } else { "0" });
            }
            f.write_str("(")?;
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{}", DisplayExpr { expr: e, sig })?;
            }
            f.write_str(")")
        };
        match self.expr {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(sig.name(*v)),
            Expr::Eq(a, b) => write!(f, "({} = {})", sub(a), sub(b)),
            Expr::Not(e) => write!(f, "!{}", sub(e)),
            Expr::And(es) => join(f, es, "&"),
            Expr::Or(es) => join(f, es, "|"),
            Expr::Sum(es) => join(f, es, "+"),
            Expr::Ite(c, t, e) => write!(f, "ite({}, {}, {})", sub(c), sub(t), sub(e)),
            Expr::AtLeast(e, k) => write!(f, "({} >= {k})", sub(e)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SignatureBuilder, VarKind};

    fn sig() -> Signature {
        let mut b = SignatureBuilder::new();
        b.add("U", VarKind::Exogenous, [0, 1]);
        b.add("A", VarKind::Endogenous, [0, 1]);
        b.add("B", VarKind::Endogenous, [0, 1, 2]);
        b.build().unwrap()
    }

    #[test]
    fn parse_and_eval() {
        let s = sig();
        let e = Expr::parse("ite((A = 1), (B + U + 1), !(B >= 2))", &s).unwrap();
        // values indexed U, A, B
        assert_eq!(e.eval(&[1, 1, 2]), 4);
        assert_eq!(e.eval(&[0, 0, 2]), 0);
        assert_eq!(e.eval(&[0, 0, 1]), 1);
        assert_eq!(e.references().len(), 3);
    }

    #[test]
    fn boolean_nodes_are_zero_one() {
        let s = sig();
        let e = Expr::parse("(B | A)", &s).unwrap();
        assert_eq!(e.eval(&[0, 0, 2]), 1);
        let e = Expr::parse("(B & 5)", &s).unwrap();
        assert_eq!(e.eval(&[0, 0, 2]), 1);
    }

    #[test]
    fn unknown_identifier_is_rejected_with_offset() {
        let err = Expr::parse("(A & Q)", &sig()).unwrap_err();
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn display_round_trips() {
        let s = sig();
        for text in ["(A | (B = 2))", "ite(U, 1, 0)", "!(A & U & B)", "((A + B + U) >= 2)", "-3"] {
            let e = Expr::parse(text, &s).unwrap();
            let printed = e.display(&s).to_string();
            assert_eq!(printed, text);
            assert_eq!(Expr::parse(&printed, &s).unwrap(), e);
        }
    }

    #[test]
    fn bounds_cover_sum() {
        let s = sig();
        let e = Expr::parse("(A + B)", &s).unwrap();
        assert_eq!(e.bounds(&s), (0, 3));
    }
}
