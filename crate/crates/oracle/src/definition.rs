use std::collections::BTreeMap;

use hpcause::model::Mechanism;
use hpcause::{CausalModel, Context, EventFormula, Value, Var, Variant};

/// Setting of some endogenous variables.
pub type Setting = BTreeMap<Var, Value>;

/// Solve by repeated substitution until nothing changes. Recursive models
/// reach the unique solution within `|V| + 1` rounds.
pub fn solve(model: &CausalModel, context: &Context, setting: &Setting) -> Vec<Value> {
    let sig = model.signature();
    let mut values: Vec<Value> = sig
        .vars()
        .map(|v| context.get(v).unwrap_or(sig.range(v)[0]))
        .collect();
    for _ in 0..=sig.len() {
        let mut changed = false;
        for v in sig.endogenous() {
            let next = match setting.get(&v) {
                Some(&x) => x,
                None => match model.mechanism(v).expect("complete model") {
                    Mechanism::Equation(e) => e.eval(&values),
                    Mechanism::Fixed(x) => *x,
                },
            };
            if values[v.index()] != next {
                values[v.index()] = next;
                changed = true;
            }
        }
        if !changed {
            return values;
        }
    }
    panic!("no fixpoint: model is not recursive");
}

pub fn holds(model: &CausalModel, f: &EventFormula, values: &[Value]) -> bool {
    match f {
        EventFormula::Prim { var, value } => {
            let v = model.signature().var(var).expect("known variable");
            values[v.index()] == *value
        }
        EventFormula::Not(g) => !holds(model, g, values),
        EventFormula::And(gs) => gs.iter().all(|g| holds(model, g, values)),
        EventFormula::Or(gs) => gs.iter().any(|g| holds(model, g, values)),
    }
}

/// All subsets of `items`, as vectors in the original order.
pub fn subsets<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    (0..1u64 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &t)| t)
                .collect()
        })
        .collect()
}

/// Every tuple of values for `vars`.
pub fn settings(model: &CausalModel, vars: &[Var]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for &v in vars {
        let mut next = Vec::new();
        for prefix in &out {
            for &x in model.signature().range(v) {
                let mut t = prefix.clone();
                t.push(x);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

pub struct Problem<'a> {
    pub model: &'a CausalModel,
    pub context: &'a Context,
    pub effect: &'a EventFormula,
    pub variant: Variant,
}

/// A witness `(W, w, x')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefWitness {
    pub contingency: Setting,
    pub alternative: Setting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Components {
    pub ac1: bool,
    pub ac2: bool,
    pub ac3: bool,
    pub is_cause: bool,
}

impl Problem<'_> {
    pub fn actual(&self) -> Vec<Value> {
        solve(self.model, self.context, &Setting::new())
    }

    pub fn ac1(&self, candidate: &Setting) -> bool {
        let z = self.actual();
        candidate.iter().all(|(v, x)| z[v.index()] == *x) && holds(self.model, self.effect, &z)
    }

    /// Does `(W, w, x')` satisfy AC2(a) and the variant's AC2(b)?
    pub fn is_witness(&self, candidate: &Setting, w: &Setting, x_alt: &Setting) -> bool {
        let mut a = w.clone();
        a.extend(x_alt.iter().map(|(&v, &x)| (v, x)));
        if holds(self.model, self.effect, &solve(self.model, self.context, &a)) {
            return false;
        }
        let z_star = self.actual();
        let w_vars: Vec<Var> = w.keys().copied().collect();
        let z_rest: Vec<Var> = self
            .model
            .signature()
            .endogenous()
            .filter(|v| !w.contains_key(v) && !candidate.contains_key(v))
            .collect();
        let w_choices = match self.variant {
            Variant::Updated => subsets(&w_vars),
            Variant::Original => vec![w_vars.clone()],
        };
        for w_prime in &w_choices {
            for z_prime in subsets(&z_rest) {
                let mut s = candidate.clone();
                for v in w_prime {
                    s.insert(*v, w[v]);
                }
                for v in z_prime {
                    s.insert(v, z_star[v.index()]);
                }
                if !holds(self.model, self.effect, &solve(self.model, self.context, &s)) {
                    return false;
                }
            }
        }
        true
    }

    /// Every witness for the candidate.
    pub fn witnesses(&self, candidate: &Setting) -> Vec<RefWitness> {
        let cand_vars: Vec<Var> = candidate.keys().copied().collect();
        let others: Vec<Var> = self
            .model
            .signature()
            .endogenous()
            .filter(|v| !candidate.contains_key(v))
            .collect();
        let mut out = Vec::new();
        for w_vars in subsets(&others) {
            for w_vals in settings(self.model, &w_vars) {
                let w: Setting = w_vars.iter().copied().zip(w_vals).collect();
                for x_vals in settings(self.model, &cand_vars) {
                    let x_alt: Setting = cand_vars.iter().copied().zip(x_vals).collect();
                    if self.is_witness(candidate, &w, &x_alt) {
                        out.push(RefWitness {
                            contingency: w.clone(),
                            alternative: x_alt,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn ac2(&self, candidate: &Setting) -> bool {
        !self.witnesses(candidate).is_empty()
    }

    /// No nonempty strict subset satisfies AC1 and AC2.
    pub fn ac3(&self, candidate: &Setting) -> bool {
        let pairs: Vec<(Var, Value)> = candidate.iter().map(|(&v, &x)| (v, x)).collect();
        subsets(&pairs)
            .into_iter()
            .filter(|s| !s.is_empty() && s.len() < pairs.len())
            .all(|s| {
                let sub: Setting = s.into_iter().collect();
                !(self.ac1(&sub) && self.ac2(&sub))
            })
    }

    pub fn components(&self, candidate: &Setting) -> Components {
        let ac1 = self.ac1(candidate);
        let ac2 = self.ac2(candidate);
        let ac3 = self.ac3(candidate);
        Components {
            ac1,
            ac2,
            ac3,
            is_cause: ac1 && ac2 && ac3,
        }
    }

    /// Fewest contingency deviations from the actual world over all
    /// witnesses, for a cause; `None` for a non-cause.
    pub fn min_changes(&self, candidate: &Setting) -> Option<usize> {
        if !self.components(candidate).is_cause {
            return None;
        }
        let z = self.actual();
        self.witnesses(candidate)
            .iter()
            .map(|w| w.contingency.iter().filter(|(v, x)| z[v.index()] != **x).count())
            .min()
    }
}
