//! The bundled example files reproduce their documented verdicts.

use std::path::PathBuf;

use hpcause::files::{load_model, load_query, load_state, parse_model, parse_state, write_model};
use hpcause::formula::parse_event_formula;
use hpcause::{
    degree_of_blame, degree_of_responsibility, enumerate_causes, Assignment, CauseQuery, EngineConfig, EngineError,
    EpistemicState, Variant,
};
use hpcause_oracle::definition::Problem;
use num_rational::BigRational;
use num_traits::Zero;

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn query(name: &str) -> CauseQuery {
    load_query(&models().join(name), None).unwrap()
}

#[test]
fn every_model_file_round_trips() {
    for entry in std::fs::read_dir(models()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "model") {
            let m = load_model(&path).unwrap();
            assert!(m.validate().is_valid(), "{}", path.display());
            assert_eq!(parse_model(&write_model(&m)).unwrap(), m, "{}", path.display());
        }
    }
}

#[test]
fn rock_throwing_verdicts() {
    assert!(query("rock-naive-suzy.query").is_cause().unwrap().is_cause);
    assert!(query("rock-naive-billy.query").is_cause().unwrap().is_cause);
    let suzy = query("rock-hits-suzy.query").is_cause().unwrap();
    assert!(suzy.is_cause);
    let sig = query("rock-hits-suzy.query").signature().clone();
    assert_eq!(suzy.ac2_witness.unwrap().display(&sig).to_string(), "W={BT}, w=(BT=0), x'=(ST=0)");
    let billy = query("rock-hits-billy.query").is_cause().unwrap();
    assert!(billy.ac1 && billy.ac2_witness.is_none() && !billy.is_cause);
}

#[test]
fn enumerate_naive_rock_singletons() {
    let q = query("rock-naive-suzy.query");
    let causes = enumerate_causes(&q.model, &q.context, &q.effect, Variant::Updated, 1, EngineConfig::default()).unwrap();
    let shown: Vec<String> = causes.iter().map(|(c, _)| c.display(q.signature()).to_string()).collect();
    assert_eq!(shown, ["ST=1", "BT=1", "BS=1"]);
}

#[test]
fn gun_a_is_original_but_not_updated_cause() {
    let q = query("gun-a-original.query");
    let v = q.is_cause().unwrap();
    assert!(v.is_cause);
    let w = v.ac2_witness.unwrap();
    let names: Vec<&str> = w.w_set().into_iter().map(|v| q.signature().name(v)).collect();
    assert_eq!(names, ["B", "C"]);
    assert!(!query("gun-a-updated.query").is_cause().unwrap().is_cause);
    let r = degree_of_responsibility(&query("gun-a-updated.query")).unwrap();
    assert!(r.degree.is_zero() && r.witness.is_none());
    for variant in [Variant::Updated, Variant::Original] {
        assert!(query("gun-c.query").with_variant(variant).is_cause().unwrap().is_cause);
    }
}

#[test]
fn conjunctive_cause_under_updated_definition() {
    let q = query("conjunctive.query");
    let v = q.is_cause().unwrap();
    assert!(v.is_cause, "{v:?}");
    assert!(v.ac3_violator.is_none());
    let sig = q.signature();
    assert_eq!(v.ac2_witness.unwrap().display(sig).to_string(), "W={A}, w=(A=0), x'=(B=0, C=1)");
    for single in ["B", "C"] {
        let mut s = q.clone();
        s.candidate = Assignment::from_pairs(sig, [(single, 0)]).unwrap();
        assert!(!s.is_cause().unwrap().is_cause, "{single}=0 alone");
    }
    let problem = Problem {
        model: &q.model,
        context: &q.context,
        effect: &q.effect,
        variant: Variant::Updated,
    };
    assert!(problem.components(&q.candidate.iter().collect()).is_cause);
    // Under the original definition each conjunct is a cause by itself.
    let original = q.clone().with_variant(Variant::Original);
    assert!(!original.is_cause().unwrap().is_cause);
    assert!(original.check_ac3().unwrap().is_some());
}

#[test]
fn voting_responsibility() {
    let r = degree_of_responsibility(&query("voting-11-0.query")).unwrap();
    assert_eq!(r.degree, BigRational::new(1.into(), 6.into()));
    assert_eq!(r.min_changes, Some(5));
    let q = query("voting-11-0.query");
    let w = r.witness.unwrap();
    assert_eq!(w.changes(&q.model.solve(&q.context).unwrap()), 5);
    assert!(q.check_ac2_with_witness(&w).unwrap());
    let r = degree_of_responsibility(&query("voting-6-5.query")).unwrap();
    assert_eq!(r.degree, BigRational::from_integer(1.into()));
}

#[test]
fn firing_squad_blame_and_edge_cases() {
    let state = load_state(&models().join("firing-squad.state")).unwrap();
    let die = parse_event_formula("DIE=1").unwrap();
    let setting = vec![("S3".to_string(), 1)];
    let b = degree_of_blame(&state, &setting, &die, Variant::Updated, EngineConfig::default()).unwrap();
    assert_eq!(b, BigRational::new(1.into(), 10.into()));

    // Point mass: blame is the responsibility in the intervened situation.
    let (m, ctx) = state.situations()[2].clone();
    let point = EpistemicState::new(vec![(m, ctx)], vec![BigRational::from_integer(1.into())]).unwrap();
    let b = degree_of_blame(&point, &setting, &die, Variant::Updated, EngineConfig::default()).unwrap();
    assert_eq!(b, BigRational::from_integer(1.into()));

    // An effect that never occurs after the intervention carries no blame.
    let survive = parse_event_formula("DIE=0").unwrap();
    let b = degree_of_blame(&state, &setting, &survive, Variant::Updated, EngineConfig::default()).unwrap();
    assert!(b.is_zero());
}

#[test]
fn state_files_must_sum_to_one() {
    let dir = models();
    let text = "firing-squad.model | L=1 | 1/2\nfiring-squad.model | L=2 | 1/3\n";
    assert_eq!(parse_state(text).unwrap().len(), 2);
    let tmp = std::env::temp_dir().join(format!("hpcause-state-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    std::fs::copy(dir.join("firing-squad.model"), tmp.join("firing-squad.model")).unwrap();
    std::fs::write(tmp.join("bad.state"), text).unwrap();
    let err = load_state(&tmp.join("bad.state")).unwrap_err();
    assert!(err.to_string().contains("sum to 5/6"), "{err}");
    std::fs::remove_dir_all(&tmp).unwrap();
}

#[test]
fn budget_exhaustion_is_an_error() {
    let q = query("voting-11-0.query").with_config(EngineConfig {
        budget: 50,
        parallel: false,
    });
    assert!(matches!(degree_of_responsibility(&q), Err(EngineError::BudgetExceeded { limit: 50 })));
    assert!(matches!(q.is_cause(), Err(EngineError::BudgetExceeded { .. })));
}

#[test]
fn malformed_inputs_are_rejected_with_positions() {
    let dir = std::env::temp_dir().join(format!("hpcause-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::copy(models().join("gun.model"), dir.join("gun.model")).unwrap();
    std::fs::write(dir.join("bad.query"), "model: gun.model\ncontext: UA=1, UB=0, UC=1\ncause: A=1\neffect: (D=1 & )\n").unwrap();
    let err = load_query(&dir.join("bad.query"), None).unwrap_err().to_string();
    assert!(err.contains(":4:"), "{err}");
    std::fs::write(dir.join("bad2.query"), "model: gun.model\ncontext: UA=1, UB=0, UC=1\ncause: Q=1\neffect: D=1\n").unwrap();
    let err = load_query(&dir.join("bad2.query"), None).unwrap_err().to_string();
    assert!(err.contains("Q"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}
