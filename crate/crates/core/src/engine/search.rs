use std::collections::HashSet;

use rayon::prelude::*;

use super::{Budget, EngineConfig, EngineError, Variant, Witness, CauseVerdict};
use crate::formula::CompiledEvent;
use crate::model::{Assignment, CausalModel, Context, Evaluator, Signature, TotalState, Value, Var};

/// How a variable is treated while enumerating the AC2(b) restoration worlds.
#[derive(Debug, Clone, Copy)]
enum Slot {
    Forced(Value),
    /// Either left to its equation or set to this value.
    Optional(Value),
}

/// Per-query inputs shared by every contingency set examined.
struct Search<'a> {
    candidate: &'a Assignment,
    cand_vars: Vec<Var>,
    effect: &'a CompiledEvent,
    alternatives: Vec<Vec<Value>>,
    changes: Option<usize>,
}

/// Buffers reused across contingency sets.
struct Scratch {
    overrides: Vec<Option<Value>>,
    values: Vec<Value>,
    slots: Vec<Slot>,
}

impl Scratch {
    fn new(n: usize, base: &[Value]) -> Self {
        Self {
            overrides: vec![None; n],
            values: base.to_vec(),
            slots: vec![Slot::Forced(0); n],
        }
    }
}

/// Search state for one `(M, u)` pair and variant: compiled equations, the
/// actual world `z*`, and the solver-call budget shared by every check made
/// through it.
pub struct Checker {
    model: CausalModel,
    eval: Evaluator,
    base: Vec<Value>,
    actual: Vec<Value>,
    endogenous: Vec<Var>,
    variant: Variant,
    config: EngineConfig,
    budget: Budget,
}

impl Checker {
    /// The model must be structurally valid (acyclic, every equation present).
    pub fn new(
        model: &CausalModel,
        context: &Context,
        variant: Variant,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let eval = Evaluator::new(model)?;
        let base = eval.base_values(context);
        let actual = eval.solve(&base, &[]);
        let budget = Budget::new(config.budget);
        budget.charge(1)?;
        Ok(Self {
            endogenous: model.signature().endogenous().collect(),
            model: model.clone(),
            eval,
            base,
            actual,
            variant,
            config,
            budget,
        })
    }

    pub fn signature(&self) -> &Signature {
        self.model.signature()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// The actual world `z*`.
    pub fn actual(&self) -> TotalState {
        TotalState::from_values(self.actual.clone())
    }

    pub fn solver_calls(&self) -> u64 {
        self.budget.used()
    }

    pub fn budget_limit(&self) -> u64 {
        self.budget.limit()
    }

    pub fn ac1(&self, candidate: &Assignment, effect: &CompiledEvent) -> bool {
        candidate.iter().all(|(v, x)| self.actual[v.index()] == x) && effect.eval(&self.actual)
    }

    fn check_witness_shape(&self, candidate: &Assignment, witness: &Witness) -> Result<(), EngineError> {
        let sig = self.signature();
        for (v, x) in witness.contingency.iter() {
            if v.index() >= sig.len() || !sig.is_endogenous(v) {
                return Err(EngineError::WitnessMismatch(format!(
                    "contingency variable #{} is not endogenous",
                    v.index()
                )));
            }
            if candidate.contains(v) {
                return Err(EngineError::WitnessMismatch(format!(
                    "`{}` is both in the candidate and the contingency set",
                    sig.name(v)
                )));
            }
            if !sig.in_range(v, x) {
                return Err(EngineError::WitnessMismatch(format!(
                    "{x} is outside the range of `{}`",
                    sig.name(v)
                )));
            }
        }
        if witness.alternative.len() != candidate.len()
            || !witness.alternative.vars().all(|v| candidate.contains(v))
        {
            return Err(EngineError::WitnessMismatch(
                "alternative setting must cover exactly the candidate variables".into(),
            ));
        }
        for (v, x) in witness.alternative.iter() {
            if !sig.in_range(v, x) {
                return Err(EngineError::WitnessMismatch(format!(
                    "{x} is outside the range of `{}`",
                    sig.name(v)
                )));
            }
        }
        Ok(())
    }

    /// AC2(a) and the variant's AC2(b) clause for one witness.
    pub fn check_witness(
        &self,
        candidate: &Assignment,
        effect: &CompiledEvent,
        witness: &Witness,
    ) -> Result<bool, EngineError> {
        self.check_witness_shape(candidate, witness)?;
        let n = self.eval.len();
        let mut overrides = vec![None; n];
        for (v, x) in witness.alternative.iter().chain(witness.contingency.iter()) {
            overrides[v.index()] = Some(x);
        }
        let mut values = self.base.clone();
        if !self.ac2a(&mut values, &overrides, effect)? {
            return Ok(false);
        }
        let mut slots = vec![Slot::Forced(0); n];
        let (w_set, w): (Vec<Var>, Vec<Value>) = witness.contingency.iter().unzip();
        self.fill_slots(&mut slots, candidate, &w_set, &w);
        self.ac2b(&mut values, &slots, effect)
    }

    fn ac2a(
        &self,
        values: &mut [Value],
        overrides: &[Option<Value>],
        effect: &CompiledEvent,
    ) -> Result<bool, EngineError> {
        self.budget.charge(1)?;
        self.eval.solve_into(values, overrides);
        Ok(!effect.eval(values))
    }

    fn fill_slots(&self, slots: &mut [Slot], candidate: &Assignment, w_set: &[Var], w: &[Value]) {
        for &v in &self.endogenous {
            let i = v.index();
            slots[i] = match candidate.get(v) {
                Some(x) => Slot::Forced(x),
                None => Slot::Optional(self.actual[i]),
            };
        }
        for (v, &x) in w_set.iter().zip(w) {
            slots[v.index()] = match self.variant {
                Variant::Updated => Slot::Optional(x),
                Variant::Original => Slot::Forced(x),
            };
        }
    }

    /// Every world `[X<-x, W'<-w, Z'<-z*]` satisfies the effect.
    ///
    /// Walks the variables in dependency order; an optional intervention whose
    /// value coincides with the value the equation already produces yields the
    /// same world, so only genuinely different branches are explored.
    fn ac2b(&self, values: &mut [Value], slots: &[Slot], effect: &CompiledEvent) -> Result<bool, EngineError> {
        values.copy_from_slice(&self.base);
        self.restorations_hold(0, values, slots, effect)
    }

    fn restorations_hold(
        &self,
        depth: usize,
        values: &mut [Value],
        slots: &[Slot],
        effect: &CompiledEvent,
    ) -> Result<bool, EngineError> {
        let order = self.eval.order();
        if depth == order.len() {
            self.budget.charge(1)?;
            return Ok(effect.eval(values));
        }
        let v = order[depth];
        match slots[v.index()] {
            Slot::Forced(x) => {
                values[v.index()] = x;
                self.restorations_hold(depth + 1, values, slots, effect)
            }
            Slot::Optional(x) => {
                let natural = self.eval.natural(v, values);
                values[v.index()] = natural;
                if !self.restorations_hold(depth + 1, values, slots, effect)? {
                    return Ok(false);
                }
                if natural != x {
                    values[v.index()] = x;
                    return self.restorations_hold(depth + 1, values, slots, effect);
                }
                Ok(true)
            }
        }
    }

    /// First witness in canonical order. With `changes = Some(k)`, only
    /// witnesses whose contingency deviates from `z*` on exactly `k` variables.
    pub fn find_witness(
        &self,
        candidate: &Assignment,
        effect: &CompiledEvent,
        changes: Option<usize>,
    ) -> Result<Option<Witness>, EngineError> {
        let free: Vec<Var> = self
            .endogenous
            .iter()
            .copied()
            .filter(|&v| !candidate.contains(v))
            .collect();
        let alternatives = self.alternatives(candidate);
        if alternatives.is_empty() {
            return Ok(None);
        }
        let search = Search {
            candidate,
            cand_vars: candidate.vars().collect(),
            effect,
            alternatives,
            changes,
        };
        let min_size = changes.unwrap_or(0);
        let mut scratch = Scratch::new(self.eval.len(), &self.base);
        let mut w_set = Vec::with_capacity(free.len());
        for size in min_size..=free.len() {
            let subsets = combinations(free.len(), size);
            let found = if self.config.parallel && rayon::current_num_threads() > 1 && subsets.len() > 1 {
                subsets
                    .par_iter()
                    .map_init(
                        || (Scratch::new(self.eval.len(), &self.base), Vec::with_capacity(size)),
                        |(scratch, w_set), subset| {
                            w_set.clear();
                            w_set.extend(subset.iter().map(|&i| free[i]));
                            self.search_subset(&search, w_set, scratch)
                        },
                    )
                    .find_map_first(|r| match r {
                        Ok(None) => None,
                        other => Some(other),
                    })
            } else {
                subsets
                    .iter()
                    .map(|subset| {
                        w_set.clear();
                        w_set.extend(subset.iter().map(|&i| free[i]));
                        self.search_subset(&search, &w_set, &mut scratch)
                    })
                    .find_map(|r| match r {
                        Ok(None) => None,
                        other => Some(other),
                    })
            };
            if let Some(result) = found {
                return result;
            }
        }
        Ok(None)
    }

    /// Every `x' != x`, lexicographic in range order.
    fn alternatives(&self, candidate: &Assignment) -> Vec<Vec<Value>> {
        let sig = self.signature();
        let vars: Vec<Var> = candidate.vars().collect();
        let actual: Vec<Value> = candidate.iter().map(|(_, x)| x).collect();
        let mut out = Vec::new();
        for_each_tuple(&vars, sig, |tuple| {
            if tuple != actual.as_slice() {
                out.push(tuple.to_vec());
            }
            true
        });
        out
    }

    fn search_subset(
        &self,
        search: &Search<'_>,
        w_set: &[Var],
        scratch: &mut Scratch,
    ) -> Result<Option<Witness>, EngineError> {
        let sig = self.signature();
        let Scratch {
            overrides,
            values,
            slots,
        } = scratch;
        let mut result = Ok(None);
        for_each_tuple(w_set, sig, |w| {
            if let Some(k) = search.changes {
                let deviations = w_set
                    .iter()
                    .zip(w)
                    .filter(|(v, x)| self.actual[v.index()] != **x)
                    .count();
                if deviations != k {
                    return true;
                }
            }
            for (v, &x) in w_set.iter().zip(w) {
                overrides[v.index()] = Some(x);
            }
            let mut slots_ready = false;
            for alt in &search.alternatives {
                for (v, &x) in search.cand_vars.iter().zip(alt) {
                    overrides[v.index()] = Some(x);
                }
                match self.ac2a(values, overrides, search.effect) {
                    Ok(true) => {}
                    Ok(false) => continue,
                    Err(e) => {
                        result = Err(e);
                        return false;
                    }
                }
                if !slots_ready {
                    self.fill_slots(slots, search.candidate, w_set, w);
                    slots_ready = true;
                }
                match self.ac2b(values, slots, search.effect) {
                    Ok(true) => {
                        result = Ok(Some(Witness::new(
                            w_set.iter().copied().zip(w.iter().copied()).collect(),
                            search.cand_vars.iter().copied().zip(alt.iter().copied()).collect(),
                        )));
                        return false;
                    }
                    Ok(false) => {}
                    Err(e) => {
                        result = Err(e);
                        return false;
                    }
                }
            }
            true
        });
        for v in w_set.iter().chain(&search.cand_vars) {
            overrides[v.index()] = None;
        }
        result
    }

    /// First nonempty strict subset of the candidate (by size, then
    /// lexicographic) that satisfies AC1 and AC2.
    pub fn ac3_violator(
        &self,
        candidate: &Assignment,
        effect: &CompiledEvent,
    ) -> Result<Option<Assignment>, EngineError> {
        let pairs: Vec<(Var, Value)> = candidate.iter().collect();
        for size in 1..pairs.len() {
            for subset in combinations(pairs.len(), size) {
                let sub: Assignment = subset.iter().map(|&i| pairs[i]).collect();
                if self.ac1(&sub, effect) && self.find_witness(&sub, effect, None)?.is_some() {
                    return Ok(Some(sub));
                }
            }
        }
        Ok(None)
    }

    pub fn verdict(&self, candidate: &Assignment, effect: &CompiledEvent) -> Result<CauseVerdict, EngineError> {
        if !self.ac1(candidate, effect) {
            return Ok(CauseVerdict {
                is_cause: false,
                ac1: false,
                ac2_witness: None,
                ac3_violator: None,
            });
        }
        let witness = self.find_witness(candidate, effect, None)?;
        let violator = self.ac3_violator(candidate, effect)?;
        Ok(CauseVerdict {
            is_cause: witness.is_some() && violator.is_none(),
            ac1: true,
            ac2_witness: witness,
            ac3_violator: violator,
        })
    }

    /// Smallest number of deviating contingency variables over all witnesses,
    /// found by iterative deepening, with the first witness attaining it.
    pub fn min_change_witness(
        &self,
        candidate: &Assignment,
        effect: &CompiledEvent,
    ) -> Result<Option<(usize, Witness)>, EngineError> {
        let free = self.endogenous.len() - candidate.len();
        for k in 0..=free {
            if let Some(w) = self.find_witness(candidate, effect, Some(k))? {
                return Ok(Some((k, w)));
            }
        }
        Ok(None)
    }

    pub fn enumerate_causes(
        &self,
        effect: &CompiledEvent,
        max_conjuncts: usize,
    ) -> Result<Vec<(Assignment, Witness)>, EngineError> {
        if !effect.eval(&self.actual) {
            return Ok(Vec::new());
        }
        let n = self.endogenous.len();
        let mut with_ac2: HashSet<Vec<usize>> = HashSet::new();
        let mut causes = Vec::new();
        for size in 1..=max_conjuncts.min(n) {
            for subset in combinations(n, size) {
                let dominated = proper_subsets(&subset).any(|s| with_ac2.contains(&s));
                if dominated {
                    continue;
                }
                let cand: Assignment = subset
                    .iter()
                    .map(|&i| {
                        let v = self.endogenous[i];
                        (v, self.actual[v.index()])
                    })
                    .collect();
                if let Some(w) = self.find_witness(&cand, effect, None)? {
                    with_ac2.insert(subset);
                    causes.push((cand, w));
                }
            }
        }
        Ok(causes)
    }
}

/// Call `f` on every tuple in the product of the variables' ranges,
/// lexicographic with the first variable most significant, until it returns false.
fn for_each_tuple(vars: &[Var], sig: &Signature, mut f: impl FnMut(&[Value]) -> bool) {
    let mut digits = vec![0usize; vars.len()];
    let mut tuple: Vec<Value> = vars.iter().map(|&v| sig.range(v)[0]).collect();
    loop {
        if !f(&tuple) {
            return;
        }
        let mut i = vars.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            let range = sig.range(vars[i]);
            if digits[i] < range.len() {
                tuple[i] = range[digits[i]];
                break;
            }
            digits[i] = 0;
            tuple[i] = range[0];
        }
    }
}

/// All `k`-element subsets of `0..n` as sorted index vectors, lexicographic.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Nonempty proper subsets of a sorted index set.
fn proper_subsets(set: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let full = (1u64 << set.len()) - 1;
    (1..full).map(move |mask| {
        set.iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &x)| x)
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
        assert_eq!(combinations(5, 3).len(), 10);
    }

    #[test]
    fn proper_subsets_exclude_empty_and_full() {
        let subs: Vec<Vec<usize>> = proper_subsets(&[2, 5]).collect();
        assert_eq!(subs, vec![vec![2], vec![5]]);
    }
}
