//! Text formats for models, queries and epistemic states.
//!
//! Model file:
//!
//! ```text
//! # comment
//! variables
//!   U  : exo  : {0,1}
//!   ST : endo : {0,1}
//! equations
//!   ST := U
//! ```
//!
//! Query file (`model:` and `variant:` are optional):
//!
//! ```text
//! model: rock.model
//! context: U=1
//! cause: ST=1
//! effect: BS=1
//! variant: updated
//! ```
//!
//! Epistemic-state file, one situation per line:
//!
//! ```text
//! <model path> | <context> | <num>/<den>
//! ```
//!
//! Errors carry the byte offset into the whole file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::engine::{CauseQuery, EngineError, Variant};
use crate::expr::Expr;
use crate::formula::{parse_event_formula_in, EventFormula};
use crate::model::{Assignment, CausalModel, Context, Mechanism, Signature, Value, VarDecl, VarKind};
use crate::responsibility::{BlameError, EpistemicState};
use crate::syntax::{is_identifier, Cursor, ParseError, Tok};

/// Split text into `(byte offset, line without comment)` pairs.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').map(move |raw| {
        let start = offset;
        offset += raw.len();
        let line = raw.trim_end_matches(['\n', '\r']);
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        (start, line)
    })
}

/// Offset of the first non-whitespace byte of `part` inside `line` (which starts at `base`).
fn offset_of(base: usize, line: &str, part: &str) -> usize {
    let rel = part.as_ptr() as usize - line.as_ptr() as usize;
    base + rel + (part.len() - part.trim_start().len())
}

/// `(line, column)`, both 1-based, of a byte offset.
pub fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn parse_range(text: &str, base: usize) -> Result<Vec<Value>, ParseError> {
    let mut out = Vec::new();
    let t = text.trim();
    let inner = t
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| ParseError::new(base + (text.len() - text.trim_start().len()), "expected `{v1, .., vk}`"))?;
    let inner_base = base + (text.len() - text.trim_start().len()) + 1;
    let mut pos = 0;
    for item in inner.split(',') {
        let trimmed = item.trim();
        let at = inner_base + pos + (item.len() - item.trim_start().len());
        let v: Value = trimmed
            .parse()
            .map_err(|_| ParseError::new(at, format!("expected integer, found `{trimmed}`")))?;
        out.push(v);
        pos += item.len() + 1;
    }
    Ok(out)
}

pub fn parse_model(text: &str) -> Result<CausalModel, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Variables,
        Equations,
    }
    let mut section = Section::None;
    let mut decls: Vec<VarDecl> = Vec::new();
    let mut equations: Vec<(usize, String, usize, &str)> = Vec::new();
    for (base, line) in lines(text) {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "variables" => {
                section = Section::Variables;
                continue;
            }
            "equations" => {
                section = Section::Equations;
                continue;
            }
            _ => {}
        }
        let at = offset_of(base, line, line);
        match section {
            Section::None => {
                return Err(ParseError::new(at, "expected `variables` section header"));
            }
            Section::Variables => {
                let mut parts = line.splitn(3, ':');
                let (Some(name), Some(kind), Some(range)) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(ParseError::new(at, "expected `name : exo|endo : {values}`"));
                };
                let name_t = name.trim();
                if !is_identifier(name_t) {
                    return Err(ParseError::new(at, format!("invalid variable name `{name_t}`")));
                }
                let kind = match kind.trim() {
                    "exo" => VarKind::Exogenous,
                    "endo" => VarKind::Endogenous,
                    other => {
                        return Err(ParseError::new(
                            offset_of(base, line, kind),
                            format!("expected `exo` or `endo`, found `{other}`"),
                        ))
                    }
                };
                let range_base = range.as_ptr() as usize - line.as_ptr() as usize + base;
                let values = parse_range(range, range_base)?;
                if decls.iter().any(|d| d.name == name_t) {
                    return Err(ParseError::new(at, format!("variable `{name_t}` declared twice")));
                }
                decls.push(VarDecl {
                    name: name_t.to_string(),
                    kind,
                    range: values,
                });
            }
            Section::Equations => {
                let Some(split) = line.find(":=") else {
                    return Err(ParseError::new(at, "expected `name := expression`"));
                };
                let name = line[..split].trim().to_string();
                let body = &line[split + 2..];
                let body_base = base + split + 2;
                equations.push((at, name, body_base, body));
            }
        }
    }
    let sig = Signature::new(decls).map_err(|e| ParseError::new(0, e.to_string()))?;
    let mut model = CausalModel::new(sig.clone());
    for (at, name, body_base, body) in equations {
        let var = sig
            .var(&name)
            .ok_or_else(|| ParseError::new(at, format!("equation for unknown variable `{name}`")))?;
        if !sig.is_endogenous(var) {
            return Err(ParseError::new(at, format!("`{name}` is exogenous and cannot have an equation")));
        }
        if model.equation(var).is_some() {
            return Err(ParseError::new(at, format!("second equation for `{name}`")));
        }
        let expr = Expr::parse(body, &sig).map_err(|e| e.shifted(body_base))?;
        model
            .set_equation(var, expr)
            .map_err(|e| ParseError::new(at, e.to_string()))?;
    }
    Ok(model)
}

fn format_range(range: &[Value]) -> String {
    let items: Vec<String> = range.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Render a model in the model-file format. Variables fixed by intervention
/// are written as constant equations.
pub fn write_model(model: &CausalModel) -> String {
    let sig = model.signature();
    let width = sig.decls().iter().map(|d| d.name.len()).max().unwrap_or(0);
    let mut out = String::from("variables\n");
    for d in sig.decls() {
        let kind = match d.kind {
            VarKind::Exogenous => "exo ",
            VarKind::Endogenous => "endo",
        };
        let _ = writeln!(out, "  {:width$} : {kind} : {}", d.name, format_range(&d.range));
    }
    out.push_str("equations\n");
    for v in sig.endogenous() {
        match model.mechanism(v) {
            Some(Mechanism::Equation(e)) => {
                let _ = writeln!(out, "  {:width$} := {}", sig.name(v), e.display(sig));
            }
            Some(Mechanism::Fixed(x)) => {
                let _ = writeln!(out, "  {:width$} := {x}", sig.name(v));
            }
            None => {}
        }
    }
    out
}

/// `X=1, Y=0` (or `X<-1`); an empty text is the empty list.
pub fn parse_assignment_list(text: &str) -> Result<Vec<(String, Value)>, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    if cur.at_end() {
        return Ok(out);
    }
    loop {
        let (_, name) = cur.ident()?;
        let off = cur.offset();
        match cur.next() {
            Some((_, Tok::Eq | Tok::Arrow)) => {}
            Some((o, t)) => return Err(ParseError::new(o, format!("expected `=` or `<-`, found {t}"))),
            None => return Err(ParseError::new(off, "expected `=` or `<-`, found end of input")),
        }
        let (_, v) = cur.int()?;
        out.push((name, v));
        if cur.at_end() {
            return Ok(out);
        }
        cur.expect(&Tok::Comma)?;
    }
}

/// Query file contents before binding to a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryFile {
    pub model: Option<String>,
    pub context: Vec<(String, Value)>,
    pub cause: Vec<(String, Value)>,
    pub effect_text: String,
    effect_offset: usize,
    pub variant: Option<Variant>,
}

impl QueryFile {
    /// Parse the effect against the model's signature (so abbreviations such
    /// as `X!=Y` expand); offsets refer to the query file.
    pub fn effect(&self, sig: &Signature) -> Result<EventFormula, ParseError> {
        parse_event_formula_in(&self.effect_text, sig).map_err(|e| e.shifted(self.effect_offset))
    }
}

pub fn parse_query(text: &str) -> Result<QueryFile, ParseError> {
    let mut model = None;
    let mut context = None;
    let mut cause = None;
    let mut effect = None;
    let mut variant = None;
    for (base, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        let at = offset_of(base, line, line);
        let Some(colon) = line.find(':') else {
            return Err(ParseError::new(at, "expected `key: value`"));
        };
        let key = line[..colon].trim();
        let value = &line[colon + 1..];
        let value_base = base + colon + 1;
        match key {
            "model" => model = Some(value.trim().to_string()),
            "context" => context = Some(parse_assignment_list(value).map_err(|e| e.shifted(value_base))?),
            "cause" => cause = Some(parse_assignment_list(value).map_err(|e| e.shifted(value_base))?),
            "effect" => {
                crate::formula::parse_event_formula(value).map_err(|e| e.shifted(value_base))?;
                effect = Some((value.to_string(), value_base));
            }
            "variant" => {
                variant = Some(
                    value
                        .parse::<Variant>()
                        .map_err(|e| ParseError::new(offset_of(base, line, value), e))?,
                )
            }
            other => return Err(ParseError::new(at, format!("unknown key `{other}`"))),
        }
    }
    let end = text.len();
    let (effect_text, effect_offset) = effect.ok_or_else(|| ParseError::new(end, "missing `effect:` line"))?;
    Ok(QueryFile {
        model,
        context: context.ok_or_else(|| ParseError::new(end, "missing `context:` line"))?,
        cause: cause.ok_or_else(|| ParseError::new(end, "missing `cause:` line"))?,
        effect_text,
        effect_offset,
        variant,
    })
}

pub fn write_query(
    model_path: Option<&str>,
    context: &str,
    cause: &str,
    effect: &EventFormula,
    variant: Variant,
) -> String {
    let mut out = String::new();
    if let Some(p) = model_path {
        let _ = writeln!(out, "model: {p}");
    }
    let _ = writeln!(out, "context: {context}");
    let _ = writeln!(out, "cause: {cause}");
    let _ = writeln!(out, "effect: {effect}");
    let _ = writeln!(out, "variant: {variant}");
    out
}

/// Parse `num/den` (or a bare integer) into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = n.parse().map_err(|_| format!("invalid numerator `{n}`"))?;
    let den: BigInt = d.parse().map_err(|_| format!("invalid denominator `{d}`"))?;
    if den == BigInt::from(0) {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(num, den))
}

/// `num/den`, always with an explicit denominator.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SituationLine {
    pub model: String,
    pub context: Vec<(String, Value)>,
    pub probability: BigRational,
}

pub fn parse_state(text: &str) -> Result<Vec<SituationLine>, ParseError> {
    let mut out = Vec::new();
    for (base, line) in lines(text) {
        if line.trim().is_empty() {
            continue;
        }
        let at = offset_of(base, line, line);
        let parts: Vec<&str> = line.split('|').collect();
        if parts.len() != 3 {
            return Err(ParseError::new(at, "expected `model | context | probability`"));
        }
        let ctx_base = parts[1].as_ptr() as usize - line.as_ptr() as usize + base;
        let context = parse_assignment_list(parts[1]).map_err(|e| e.shifted(ctx_base))?;
        let probability =
            parse_rational(parts[2]).map_err(|e| ParseError::new(offset_of(base, line, parts[2]), e))?;
        out.push(SituationLine {
            model: parts[0].trim().to_string(),
            context,
            probability,
        });
    }
    if out.is_empty() {
        return Err(ParseError::new(text.len(), "epistemic state lists no situations"));
    }
    Ok(out)
}

/// Failure to read or interpret an input file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{col}: {message} (byte {offset})")]
    Parse {
        path: String,
        offset: usize,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Engine {
        path: String,
        #[source]
        source: EngineError,
    },
    #[error("{path}: {source}")]
    Blame {
        path: String,
        #[source]
        source: BlameError,
    },
    #[error("{0}: no `model:` line and no model file given")]
    NoModel(String),
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_error(path: &Path, text: &str, e: ParseError) -> LoadError {
    let (line, col) = line_col(text, e.offset);
    LoadError::Parse {
        path: path.display().to_string(),
        offset: e.offset,
        line,
        col,
        message: e.message,
    }
}

pub fn load_model(path: &Path) -> Result<CausalModel, LoadError> {
    let text = read(path)?;
    parse_model(&text).map_err(|e| parse_error(path, &text, e))
}

fn engine_error(path: &Path, source: impl Into<EngineError>) -> LoadError {
    LoadError::Engine {
        path: path.display().to_string(),
        source: source.into(),
    }
}

fn named(pairs: &[(String, Value)]) -> impl Iterator<Item = (&str, Value)> {
    pairs.iter().map(|(n, v)| (n.as_str(), *v))
}

/// Load a query file and its model. An explicit `model` path takes
/// precedence over the file's `model:` line, which is resolved relative to
/// the query file's directory.
pub fn load_query(path: &Path, model: Option<&Path>) -> Result<CauseQuery, LoadError> {
    let text = read(path)?;
    let q = parse_query(&text).map_err(|e| parse_error(path, &text, e))?;
    let model_path: PathBuf = match (model, &q.model) {
        (Some(m), _) => m.to_path_buf(),
        (None, Some(m)) => path.parent().unwrap_or(Path::new(".")).join(m),
        (None, None) => return Err(LoadError::NoModel(path.display().to_string())),
    };
    let model = load_model(&model_path)?;
    let sig = model.signature();
    let effect = q.effect(sig).map_err(|e| parse_error(path, &text, e))?;
    let context = Context::from_pairs(sig, named(&q.context)).map_err(|e| engine_error(path, e))?;
    let candidate = Assignment::from_pairs(sig, named(&q.cause)).map_err(|e| engine_error(path, e))?;
    CauseQuery::new(model, context, candidate, effect, q.variant.unwrap_or_default())
        .map_err(|e| engine_error(path, e))
}

/// Load an epistemic-state file; model paths are relative to its directory.
pub fn load_state(path: &Path) -> Result<EpistemicState, LoadError> {
    let text = read(path)?;
    let lines = parse_state(&text).map_err(|e| parse_error(path, &text, e))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut cache: BTreeMap<String, CausalModel> = BTreeMap::new();
    let mut situations = Vec::new();
    let mut probabilities = Vec::new();
    for line in lines {
        let model = match cache.get(&line.model) {
            Some(m) => m.clone(),
            None => {
                let m = load_model(&dir.join(&line.model))?;
                cache.insert(line.model.clone(), m.clone());
                m
            }
        };
        let ctx = Context::from_pairs(model.signature(), line.context.iter().map(|(n, v)| (n.as_str(), *v)))
            .map_err(|e| engine_error(path, e))?;
        situations.push((model, ctx));
        probabilities.push(line.probability);
    }
    EpistemicState::new(situations, probabilities).map_err(|source| LoadError::Blame {
        path: path.display().to_string(),
        source,
    })
}
