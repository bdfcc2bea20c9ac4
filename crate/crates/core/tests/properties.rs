use hpcause::model::Var;
use hpcause::responsibility::intervened_responsibility;
use hpcause::{
    degree_of_blame, degree_of_responsibility, enumerate_causes, Assignment, CausalModel, CauseQuery, Context,
    EngineConfig, EpistemicState, EventFormula, Variant,
};
use hpcause_oracle::definition::{self, Problem, RefWitness};
use hpcause_oracle::generate::{random_candidate, random_effect, random_model};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    model: CausalModel,
    context: Context,
    effect: EventFormula,
    candidate: Assignment,
}

fn case(seed: u64, max_endogenous: usize, max_candidate: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (model, context) = random_model(&mut rng, max_endogenous, 3);
    let actual = model.solve(&context).unwrap().values().to_vec();
    let effect = random_effect(&mut rng, model.signature(), 2);
    let candidate = random_candidate(&mut rng, model.signature(), &actual, max_candidate);
    Case {
        model,
        context,
        effect,
        candidate,
    }
}

impl Case {
    fn query(&self, variant: Variant) -> CauseQuery {
        CauseQuery::new(
            self.model.clone(),
            self.context.clone(),
            self.candidate.clone(),
            self.effect.clone(),
            variant,
        )
        .unwrap()
    }

    fn problem(&self, variant: Variant) -> Problem<'_> {
        Problem {
            model: &self.model,
            context: &self.context,
            effect: &self.effect,
            variant,
        }
    }
}

fn variants() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Updated), Just(Variant::Original)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn verdict_is_conjunction_of_components(seed in any::<u64>(), variant in variants()) {
        let c = case(seed, 5, 3);
        let q = c.query(variant);
        let v = q.is_cause().unwrap();
        let ac1 = q.check_ac1().unwrap();
        let ac2 = q.find_ac2_witness().unwrap().is_some();
        let ac3 = q.check_ac3().unwrap().is_none();
        prop_assert_eq!(v.is_cause, ac1 && ac2 && ac3);
        let want = c.problem(variant).components(&c.candidate.iter().collect());
        prop_assert_eq!((ac1, ac2, ac3, v.is_cause), (want.ac1, want.ac2, want.ac3, want.is_cause));
    }

    #[test]
    fn reported_witness_is_valid_and_smallest(seed in any::<u64>(), variant in variants()) {
        let c = case(seed, 4, 2);
        let q = c.query(variant);
        let all = c.problem(variant).witnesses(&c.candidate.iter().collect());
        match q.find_ac2_witness().unwrap() {
            None => prop_assert!(all.is_empty()),
            Some(w) => {
                prop_assert!(q.check_ac2_with_witness(&w).unwrap());
                let as_ref = RefWitness {
                    contingency: w.contingency.iter().collect(),
                    alternative: w.alternative.iter().collect(),
                };
                prop_assert!(all.contains(&as_ref));
                let smallest = all.iter().map(|r| r.contingency.len()).min().unwrap();
                prop_assert_eq!(w.contingency.len(), smallest);
            }
        }
    }

    #[test]
    fn updated_witnesses_satisfy_the_original_clause(seed in any::<u64>()) {
        let c = case(seed, 5, 3);
        if let Some(w) = c.query(Variant::Updated).find_ac2_witness().unwrap() {
            prop_assert!(c.query(Variant::Original).check_ac2_with_witness(&w).unwrap());
        }
    }

    #[test]
    fn singletons_never_violate_minimality(seed in any::<u64>(), variant in variants()) {
        let c = case(seed, 5, 1);
        prop_assert!(c.query(variant).check_ac3().unwrap().is_none());
    }

    #[test]
    fn responsibility_matches_exhaustive_minimum(seed in any::<u64>(), variant in variants()) {
        let c = case(seed, 4, 2);
        let q = c.query(variant);
        let r = degree_of_responsibility(&q).unwrap();
        let is_cause = q.is_cause().unwrap().is_cause;
        prop_assert_eq!(r.degree > BigRational::zero(), is_cause);
        prop_assert_eq!(r.min_changes, c.problem(variant).min_changes(&c.candidate.iter().collect()));
        if let (Some(k), Some(w)) = (r.min_changes, &r.witness) {
            prop_assert_eq!(r.degree.clone(), BigRational::new(1.into(), (k as i64 + 1).into()));
            prop_assert_eq!(w.changes(&q.model.solve(&q.context).unwrap()), k);
            prop_assert!(q.check_ac2_with_witness(w).unwrap());
        }
    }

    #[test]
    fn interventions_agree_with_naive_fixpoint(seed in any::<u64>()) {
        let c = case(seed, 5, 3);
        let solved = c.model.intervene(&c.candidate).unwrap().solve(&c.context).unwrap();
        let naive = definition::solve(&c.model, &c.context, &c.candidate.iter().collect());
        prop_assert_eq!(solved.values(), naive.as_slice());
    }

    #[test]
    fn enumeration_lists_exactly_the_causes(seed in any::<u64>(), variant in variants()) {
        let c = case(seed, 4, 1);
        let listed = enumerate_causes(&c.model, &c.context, &c.effect, variant, 2, EngineConfig::default()).unwrap();
        let listed: Vec<Assignment> = listed.into_iter().map(|(a, _)| a).collect();
        let actual = c.model.solve(&c.context).unwrap();
        let endo: Vec<Var> = c.model.signature().endogenous().collect();
        let problem = c.problem(variant);
        let mut expected = Vec::new();
        for size in 1..=2 {
            for subset in definition::subsets(&endo).into_iter().filter(|s| s.len() == size) {
                let cand: Assignment = subset.iter().map(|&v| (v, actual.get(v))).collect();
                if problem.components(&cand.iter().collect()).is_cause {
                    expected.push(cand);
                }
            }
        }
        let mut sorted_listed = listed.clone();
        sorted_listed.sort_by_key(|a| a.iter().collect::<Vec<_>>());
        expected.sort_by_key(|a| a.iter().collect::<Vec<_>>());
        prop_assert_eq!(sorted_listed, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn results_do_not_depend_on_thread_count(seed in any::<u64>(), variant in variants()) {
        let c = case(seed, 5, 2);
        let q = c.query(variant);
        let sequential = q.clone().with_config(EngineConfig { parallel: false, ..EngineConfig::default() });
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let (par_verdict, par_resp) = pool.install(|| (q.is_cause().unwrap(), degree_of_responsibility(&q).unwrap()));
        prop_assert_eq!(par_verdict, sequential.is_cause().unwrap());
        prop_assert_eq!(par_resp, degree_of_responsibility(&sequential).unwrap());
    }

    #[test]
    fn blame_interpolates_linearly(seed in any::<u64>(), num in 0i64..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, ctx1) = random_model(&mut rng, 4, 3);
        let sig = model.signature().clone();
        let ctx2 = Context::from_pairs(
            &sig,
            sig.exogenous().map(|u| (sig.name(u), sig.range(u)[rng.gen_range(0..sig.range(u).len())])),
        )
        .unwrap();
        let effect = random_effect(&mut rng, &sig, 2);
        let v = sig.endogenous().nth(rng.gen_range(0..sig.endogenous().count())).unwrap();
        let setting = vec![(sig.name(v).to_string(), sig.range(v)[rng.gen_range(0..sig.range(v).len())])];
        let config = EngineConfig::default();
        let r1 = intervened_responsibility(&model, &ctx1, &setting, &effect, Variant::Updated, config).unwrap().degree;
        let r2 = intervened_responsibility(&model, &ctx2, &setting, &effect, Variant::Updated, config).unwrap().degree;
        let p = BigRational::new(num.into(), 12.into());
        let q = BigRational::one() - &p;
        let state = EpistemicState::new(vec![(model.clone(), ctx1), (model, ctx2)], vec![p.clone(), q.clone()]).unwrap();
        let blame = degree_of_blame(&state, &setting, &effect, Variant::Updated, config).unwrap();
        prop_assert_eq!(blame.clone(), p * r1 + q * r2);
        prop_assert!(blame >= BigRational::zero() && blame <= BigRational::one());
    }
}

#[test]
fn identical_queries_give_identical_answers() {
    for seed in 0..50 {
        let c = case(seed, 5, 3);
        let q = c.query(Variant::Updated);
        assert_eq!(q.is_cause().unwrap(), c.query(Variant::Updated).is_cause().unwrap());
    }
}
