//! Degree of responsibility and degree of blame.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{validate_candidate, CauseQuery, Checker, EngineConfig, EngineError, Variant, Witness};
use crate::formula::EventFormula;
use crate::model::{Assignment, CausalModel, Context};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponsibilityResult {
    /// `1/(k+1)` for a cause, `0` otherwise.
    pub degree: BigRational,
    pub min_changes: Option<usize>,
    pub witness: Option<Witness>,
}

impl ResponsibilityResult {
    fn zero() -> Self {
        Self {
            degree: BigRational::zero(),
            min_changes: None,
            witness: None,
        }
    }

    fn with_changes(k: usize, witness: Witness) -> Self {
        Self {
            degree: BigRational::new(BigInt::one(), BigInt::from(k + 1)),
            min_changes: Some(k),
            witness: Some(witness),
        }
    }
}

/// Responsibility computed with an existing checker, so its solver-call
/// counter covers the whole computation.
pub fn responsibility_in(
    checker: &Checker,
    candidate: &Assignment,
    effect: &crate::formula::CompiledEvent,
) -> Result<ResponsibilityResult, EngineError> {
    if !checker.ac1(candidate, effect) || checker.find_witness(candidate, effect, None)?.is_none() {
        return Ok(ResponsibilityResult::zero());
    }
    if checker.ac3_violator(candidate, effect)?.is_some() {
        return Ok(ResponsibilityResult::zero());
    }
    Ok(match checker.min_change_witness(candidate, effect)? {
        Some((k, w)) => ResponsibilityResult::with_changes(k, w),
        None => ResponsibilityResult::zero(),
    })
}

/// Zero for non-causes; otherwise `1/(k+1)` where `k` is the fewest
/// contingency variables that must deviate from the actual world in a witness.
pub fn degree_of_responsibility(query: &CauseQuery) -> Result<ResponsibilityResult, EngineError> {
    let checker = query.checker()?;
    let effect = query.effect.compile(query.signature())?;
    responsibility_in(&checker, &query.candidate, &effect)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlameError {
    #[error("an epistemic state needs at least one situation")]
    Empty,
    #[error("{situations} situations but {probabilities} probabilities")]
    LengthMismatch { situations: usize, probabilities: usize },
    #[error("negative probability {0}")]
    Negative(String),
    #[error("probabilities sum to {0}, not 1")]
    MassNotOne(String),
    #[error("situation {index}: {source}")]
    Situation {
        index: usize,
        #[source]
        source: EngineError,
    },
}

/// A finite set of situations `(M, u)` with an exact probability for each.
#[derive(Debug, Clone)]
pub struct EpistemicState {
    situations: Vec<(CausalModel, Context)>,
    probabilities: Vec<BigRational>,
}

impl EpistemicState {
    pub fn new(
        situations: Vec<(CausalModel, Context)>,
        probabilities: Vec<BigRational>,
    ) -> Result<Self, BlameError> {
        if situations.is_empty() {
            return Err(BlameError::Empty);
        }
        if situations.len() != probabilities.len() {
            return Err(BlameError::LengthMismatch {
                situations: situations.len(),
                probabilities: probabilities.len(),
            });
        }
        if let Some(p) = probabilities.iter().find(|p| p.is_negative()) {
            return Err(BlameError::Negative(p.to_string()));
        }
        let total: BigRational = probabilities.iter().cloned().sum();
        if !total.is_one() {
            return Err(BlameError::MassNotOne(total.to_string()));
        }
        Ok(Self {
            situations,
            probabilities,
        })
    }

    pub fn situations(&self) -> &[(CausalModel, Context)] {
        &self.situations
    }

    pub fn probabilities(&self) -> &[BigRational] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.situations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.situations.is_empty()
    }
}

/// Responsibility of `X=x` for `effect` in `(M_{X<-x}, u)`, resolving the
/// setting by name against the situation's own signature.
pub fn intervened_responsibility(
    model: &CausalModel,
    context: &Context,
    setting: &[(String, i64)],
    effect: &EventFormula,
    variant: Variant,
    config: EngineConfig,
) -> Result<ResponsibilityResult, EngineError> {
    let sig = model.signature();
    let candidate = Assignment::from_pairs(sig, setting.iter().map(|(n, v)| (n.as_str(), *v)))?;
    validate_candidate(sig, &candidate)?;
    let report = model.validate();
    if !report.is_valid() {
        return Err(EngineError::InvalidModel(report));
    }
    let intervened = model.intervene(&candidate)?;
    let checker = Checker::new(&intervened, context, variant, config)?;
    let compiled = effect.compile(sig)?;
    responsibility_in(&checker, &candidate, &compiled)
}

/// Expected responsibility of `X=x` over the state's situations, each
/// evaluated after the intervention `X<-x`. Situations are independent and
/// may be evaluated in parallel; the sum is taken in list order.
pub fn degree_of_blame(
    state: &EpistemicState,
    setting: &[(String, i64)],
    effect: &EventFormula,
    variant: Variant,
    config: EngineConfig,
) -> Result<BigRational, BlameError> {
    let eval = |(index, (model, ctx)): (usize, &(CausalModel, Context))| {
        intervened_responsibility(model, ctx, setting, effect, variant, config)
            .map(|r| r.degree)
            .map_err(|source| BlameError::Situation { index, source })
    };
    let degrees: Vec<BigRational> = if config.parallel && rayon::current_num_threads() > 1 {
        state.situations.par_iter().enumerate().map(eval).collect::<Result<_, _>>()?
    } else {
        state.situations.iter().enumerate().map(eval).collect::<Result<_, _>>()?
    };
    let mut total = BigRational::zero();
    for (d, p) in degrees.iter().zip(&state.probabilities) {
        total += d * p;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::files::parse_model;

    fn voting(votes: &[i64]) -> (CausalModel, Vec<(String, i64)>) {
        let mut text = String::from("variables\n");
        for i in 1..=votes.len() {
            text += &format!("U{i} : exo : {{0,1}}\n");
        }
        for i in 1..=votes.len() {
            text += &format!("V{i} : endo : {{0,1}}\n");
        }
        text += "WIN : endo : {0,1}\nequations\n";
        for i in 1..=votes.len() {
            text += &format!("V{i} := U{i}\n");
        }
        let sum: Vec<String> = (1..=votes.len()).map(|i| format!("V{i}")).collect();
        text += &format!("WIN := (({}) >= 6)\n", sum.join(" + "));
        let ctx = votes.iter().enumerate().map(|(i, &v)| (format!("U{}", i + 1), v)).collect();
        (parse_model(&text).unwrap(), ctx)
    }

    fn query(model: CausalModel, ctx: &[(String, i64)], cand: (&str, i64), effect: &str) -> CauseQuery {
        let effect = crate::formula::parse_event_formula(effect).unwrap();
        CauseQuery::from_names(
            model,
            ctx.iter().map(|(n, v)| (n.as_str(), *v)),
            [cand],
            effect,
            Variant::Updated,
        )
        .unwrap()
    }

    #[test]
    fn landslide_vote_gives_one_sixth() {
        let (m, ctx) = voting(&[1; 11]);
        let r = degree_of_responsibility(&query(m, &ctx, ("V1", 1), "WIN=1")).unwrap();
        assert_eq!(r.degree, BigRational::new(1.into(), 6.into()));
        assert_eq!(r.min_changes, Some(5));
    }

    #[test]
    fn close_vote_gives_full_responsibility() {
        let (m, ctx) = voting(&[1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
        let r = degree_of_responsibility(&query(m, &ctx, ("V3", 1), "WIN=1")).unwrap();
        assert!(r.degree.is_one());
        assert_eq!(r.min_changes, Some(0));
    }

    #[test]
    fn non_cause_has_zero_degree() {
        let (m, ctx) = voting(&[1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0]);
        let r = degree_of_responsibility(&query(m, &ctx, ("V8", 0), "WIN=1")).unwrap();
        assert!(r.degree.is_zero());
        assert!(r.witness.is_none());
    }

    #[test]
    fn state_must_be_a_distribution() {
        let (m, _) = voting(&[1; 11]);
        let ctx = Context::from_pairs(m.signature(), (1..=11).map(|i| (format!("U{i}"), 1)).collect::<Vec<_>>().iter().map(|(n, v)| (n.as_str(), *v))).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert!(matches!(
            EpistemicState::new(vec![(m.clone(), ctx.clone())], vec![half.clone()]),
            Err(BlameError::MassNotOne(_))
        ));
        assert!(matches!(
            EpistemicState::new(vec![(m.clone(), ctx.clone())], vec![half.clone(), half.clone()]),
            Err(BlameError::LengthMismatch { .. })
        ));
        assert!(matches!(EpistemicState::new(vec![], vec![]), Err(BlameError::Empty)));
        let neg = BigRational::new((-1).into(), 2.into());
        let three_halves = BigRational::new(3.into(), 2.into());
        assert!(matches!(
            EpistemicState::new(vec![(m.clone(), ctx.clone()), (m, ctx)], vec![neg, three_halves]),
            Err(BlameError::Negative(_))
        ));
    }
}
