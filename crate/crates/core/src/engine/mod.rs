//! Decision procedures for actual causality.
//!
//! A candidate `X=x` is a cause of an event formula `phi` in `(M, u)` when
//!
//! * AC1: `X=x` and `phi` hold in the actual world;
//! * AC2: some witness `(W, w, x')` with `W` disjoint from `X` makes
//!   `[X<-x', W<-w] !phi` true while `phi` survives every restoration
//!   `[X<-x, W'<-w, Z'<-z*]` (updated variant: all `W' ⊆ W`, all `Z' ⊆ Z \ X`;
//!   original variant: `W' = W` only);
//! * AC3: no nonempty strict subset of `X` satisfies AC1 and AC2.
//!
//! Witnesses are searched in a fixed order (smallest `W` first, then `W`
//! lexicographic by declaration order, then `w` and `x'` lexicographic by range
//! order) so reported witnesses are canonical.

mod budget;
mod search;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{EventFormula, FormulaError};
use crate::model::{Assignment, CausalModel, Context, ModelError, Signature, ValidationReport};

pub use budget::{Budget, DEFAULT_BUDGET};
pub use search::Checker;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// AC2(b) quantifies over every subset of the contingency set.
    #[default]
    Updated,
    /// AC2(b') only restores the full contingency set.
    Original,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "updated" => Ok(Variant::Updated),
            "original" => Ok(Variant::Original),
            other => Err(format!("unknown variant `{other}` (expected updated|original)")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Updated => "updated",
            Variant::Original => "original",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Maximum solver calls for one top-level operation.
    pub budget: u64,
    /// Split witness search across the rayon pool.
    pub parallel: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("invalid model: {0}")]
    InvalidModel(ValidationReport),
    #[error("the candidate cause is empty")]
    EmptyCandidate,
    #[error("candidate variable `{0}` is not endogenous")]
    CandidateNotEndogenous(String),
    #[error("candidate value {value} is outside the range of `{var}`")]
    CandidateOutOfRange { var: String, value: i64 },
    #[error("witness does not fit the query: {0}")]
    WitnessMismatch(String),
    #[error("search budget of {limit} solver calls exceeded")]
    BudgetExceeded { limit: u64 },
}

/// `(W, w, x')`: the contingency `W<-w` and the alternative setting `X<-x'`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Witness {
    pub contingency: Assignment,
    pub alternative: Assignment,
}

impl Witness {
    pub fn new(contingency: Assignment, alternative: Assignment) -> Self {
        Self {
            contingency,
            alternative,
        }
    }

    /// The contingency set `W`.
    pub fn w_set(&self) -> Vec<crate::model::Var> {
        self.contingency.vars().collect()
    }

    /// Number of contingency variables set away from their actual values.
    pub fn changes(&self, actual: &crate::model::TotalState) -> usize {
        self.contingency
            .iter()
            .filter(|&(v, x)| actual.get(v) != x)
            .count()
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl std::fmt::Display + 'a {
        WitnessDisplay { w: self, sig }
    }
}

struct WitnessDisplay<'a> {
    w: &'a Witness,
    sig: &'a Signature,
}

impl std::fmt::Display for WitnessDisplay<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: Vec<&str> = self.w.contingency.vars().map(|v| self.sig.name(v)).collect();
        write!(
            f,
            "W={{{}}}, w=({}), x'=({})",
            names.join(", "),
            self.w.contingency.display(self.sig),
            self.w.alternative.display(self.sig)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseVerdict {
    pub is_cause: bool,
    pub ac1: bool,
    /// First witness in canonical order; only searched when AC1 holds.
    pub ac2_witness: Option<Witness>,
    /// First strict subset satisfying AC1 and AC2; only searched when AC1 holds.
    pub ac3_violator: Option<Assignment>,
}

/// A fully validated causality query `<M, u, phi, X, x>` under one variant.
#[derive(Debug, Clone)]
pub struct CauseQuery {
    pub model: CausalModel,
    pub context: Context,
    pub candidate: Assignment,
    pub effect: EventFormula,
    pub variant: Variant,
    pub config: EngineConfig,
}

impl CauseQuery {
    pub fn new(
        model: CausalModel,
        context: Context,
        candidate: Assignment,
        effect: EventFormula,
        variant: Variant,
    ) -> Result<Self, EngineError> {
        let report = model.validate();
        if !report.is_valid() {
            return Err(EngineError::InvalidModel(report));
        }
        let q = Self {
            model,
            context,
            candidate,
            effect,
            variant,
            config: EngineConfig::default(),
        };
        validate_candidate(q.model.signature(), &q.candidate)?;
        q.effect.compile(q.model.signature())?;
        Ok(q)
    }

    /// Convenience constructor from names, as used by tests and tools.
    pub fn from_names<'a>(
        model: CausalModel,
        context: impl IntoIterator<Item = (&'a str, i64)>,
        candidate: impl IntoIterator<Item = (&'a str, i64)>,
        effect: EventFormula,
        variant: Variant,
    ) -> Result<Self, EngineError> {
        let ctx = Context::from_pairs(model.signature(), context)?;
        let cand = Assignment::from_pairs(model.signature(), candidate)?;
        Self::new(model, ctx, cand, effect, variant)
    }

    pub fn with_config(mut self, config: EngineConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn signature(&self) -> &Signature {
        self.model.signature()
    }

    /// Prepare the search state; the checker owns the solver-call budget.
    pub fn checker(&self) -> Result<Checker, EngineError> {
        Checker::new(&self.model, &self.context, self.variant, self.config)
    }

    pub fn check_ac1(&self) -> Result<bool, EngineError> {
        let c = self.checker()?;
        let effect = self.effect.compile(self.signature())?;
        Ok(c.ac1(&self.candidate, &effect))
    }

    pub fn check_ac2_with_witness(&self, witness: &Witness) -> Result<bool, EngineError> {
        let c = self.checker()?;
        let effect = self.effect.compile(self.signature())?;
        c.check_witness(&self.candidate, &effect, witness)
    }

    pub fn find_ac2_witness(&self) -> Result<Option<Witness>, EngineError> {
        let c = self.checker()?;
        let effect = self.effect.compile(self.signature())?;
        c.find_witness(&self.candidate, &effect, None)
    }

    pub fn check_ac3(&self) -> Result<Option<Assignment>, EngineError> {
        let c = self.checker()?;
        let effect = self.effect.compile(self.signature())?;
        c.ac3_violator(&self.candidate, &effect)
    }

    pub fn is_cause(&self) -> Result<CauseVerdict, EngineError> {
        let c = self.checker()?;
        let effect = self.effect.compile(self.signature())?;
        c.verdict(&self.candidate, &effect)
    }
}

pub(crate) fn validate_candidate(sig: &Signature, candidate: &Assignment) -> Result<(), EngineError> {
    if candidate.is_empty() {
        return Err(EngineError::EmptyCandidate);
    }
    for (v, x) in candidate.iter() {
        if !sig.is_endogenous(v) {
            return Err(EngineError::CandidateNotEndogenous(sig.name(v).to_string()));
        }
        if !sig.in_range(v, x) {
            return Err(EngineError::CandidateOutOfRange {
                var: sig.name(v).to_string(),
                value: x,
            });
        }
    }
    Ok(())
}

/// Every actual-valued conjunction of at most `max_conjuncts` endogenous
/// variables that is a cause of `effect`, in (size, lexicographic) order,
/// each with its canonical witness.
pub fn enumerate_causes(
    model: &CausalModel,
    context: &Context,
    effect: &EventFormula,
    variant: Variant,
    max_conjuncts: usize,
    config: EngineConfig,
) -> Result<Vec<(Assignment, Witness)>, EngineError> {
    let report = model.validate();
    if !report.is_valid() {
        return Err(EngineError::InvalidModel(report));
    }
    let checker = Checker::new(model, context, variant, config)?;
    let compiled = effect.compile(model.signature())?;
    checker.enumerate_causes(&compiled, max_conjuncts)
}
