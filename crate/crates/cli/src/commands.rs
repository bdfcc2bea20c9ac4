use std::path::Path;

use hpcause::files::{
    format_rational, line_col, load_model, load_query, load_state, parse_assignment_list, write_model, write_query,
};
use hpcause::formula::parse_event_formula_in;
use hpcause::qbf::{build_pi2_instance, build_sigma2_instance, eval_cqbf, parse_cqbf, QuantifierShape};
use hpcause::responsibility::responsibility_in;
use hpcause::{degree_of_blame, Checker, Context, EngineError, ParseError, Signature, Variant};
use hpcause_oracle::corpus::random_cqbf;
use hpcause_oracle::definition::Problem;
use hpcause_oracle::generate::{random_candidate, random_effect, random_model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::failure::Failure;
use crate::report::{assignment_json, witness_json, Report};
use crate::Options;

/// A syntax error in a command-line argument.
fn arg_error(flag: &str, text: &str, e: ParseError) -> Failure {
    let (_, col) = line_col(text, e.offset);
    Failure::Parse(format!("{flag}: column {col}: {} (byte {})", e.message, e.offset))
}

fn file_error(path: &Path, text: &str, e: ParseError) -> Failure {
    let (line, col) = line_col(text, e.offset);
    Failure::Parse(format!("{}:{line}:{col}: {} (byte {})", path.display(), e.message, e.offset))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn load(query: &Path, model: Option<&Path>, opts: &Options) -> Result<hpcause::CauseQuery, Failure> {
    let mut q = load_query(query, model)?.with_config(opts.config);
    if let Some(v) = opts.variant {
        q = q.with_variant(v);
    }
    Ok(q)
}

pub fn check_cause(query: &Path, model: Option<&Path>, opts: &Options) -> Result<Report, Failure> {
    let q = load(query, model, opts)?;
    let sig = q.signature();
    let checker = q.checker()?;
    let effect = q.effect.compile(sig)?;
    let v = checker.verdict(&q.candidate, &effect)?;

    let mut r = Report::new(
        "check-cause",
        json!({
            "candidate": assignment_json(&q.candidate, sig),
            "effect": q.effect.to_string(),
            "variant": q.variant,
            "is_cause": v.is_cause,
            "ac1": v.ac1,
            "ac2": v.ac1.then_some(v.ac2_witness.is_some()),
            "ac2_witness": v.ac2_witness.as_ref().map(|w| witness_json(w, sig)),
            "ac3": v.ac1.then_some(v.ac3_violator.is_none()),
            "ac3_violator": v.ac3_violator.as_ref().map(|a| assignment_json(a, sig)),
        }),
    );
    r.line(format!(
        "{} is {} of {} ({} definition)",
        q.candidate.display(sig),
        if v.is_cause { "a cause" } else { "not a cause" },
        q.effect,
        q.variant
    ));
    r.line(format!("verdict: {}", if v.is_cause { "cause" } else { "not a cause" }));
    r.line(format!("AC1: {}", if v.ac1 { "holds" } else { "fails" }));
    if v.ac1 {
        match &v.ac2_witness {
            Some(w) => r.line(format!("AC2: holds with {}", w.display(sig))),
            None => r.line("AC2: fails (no witness)"),
        }
        match &v.ac3_violator {
            None => r.line("AC3: holds"),
            Some(a) => r.line(format!("AC3: fails ({} already satisfies AC1 and AC2)", a.display(sig))),
        }
    } else {
        r.line("AC2: not checked");
        r.line("AC3: not checked");
    }
    r.calls(checker.solver_calls(), checker.budget_limit());
    Ok(r)
}

pub fn responsibility(query: &Path, model: Option<&Path>, opts: &Options) -> Result<Report, Failure> {
    let q = load(query, model, opts)?;
    let sig = q.signature();
    let checker = q.checker()?;
    let effect = q.effect.compile(sig)?;
    let res = responsibility_in(&checker, &q.candidate, &effect)?;
    let degree = format_rational(&res.degree);

    let mut r = Report::new(
        "responsibility",
        json!({
            "candidate": assignment_json(&q.candidate, sig),
            "effect": q.effect.to_string(),
            "variant": q.variant,
            "degree": degree,
            "min_changes": res.min_changes,
            "witness": res.witness.as_ref().map(|w| witness_json(w, sig)),
        }),
    );
    r.line(format!("responsibility: {degree}"));
    match (&res.min_changes, &res.witness) {
        (Some(k), Some(w)) => {
            r.line(format!("minimal changes: {k}"));
            r.line(format!("witness: {}", w.display(sig)));
        }
        _ => r.line("not a cause"),
    }
    r.calls(checker.solver_calls(), checker.budget_limit());
    Ok(r)
}

pub fn blame(state_path: &Path, setting: &str, effect: &str, opts: &Options) -> Result<Report, Failure> {
    let state = load_state(state_path)?;
    let pairs = parse_assignment_list(setting).map_err(|e| arg_error("--setting", setting, e))?;
    let sig = state.situations()[0].0.signature();
    let effect_f = parse_event_formula_in(effect, sig).map_err(|e| arg_error("--effect", effect, e))?;
    let variant = opts.variant.unwrap_or_default();
    let b = degree_of_blame(&state, &pairs, &effect_f, variant, opts.config)?;
    let degree = format_rational(&b);
    let shown: Vec<String> = pairs.iter().map(|(n, v)| format!("{n}={v}")).collect();

    let mut r = Report::new(
        "blame",
        json!({
            "setting": pairs.iter().map(|(n, v)| (n.clone(), *v)).collect::<std::collections::BTreeMap<_, _>>(),
            "effect": effect_f.to_string(),
            "variant": variant,
            "situations": state.len(),
            "degree": degree,
        }),
    );
    r.line(format!("blame of {} for {}: {degree}", shown.join(", "), effect_f));
    r.line(format!("situations: {}", state.len()));
    Ok(r)
}

pub fn enumerate(model_path: &Path, context: &str, effect: &str, max_size: usize, opts: &Options) -> Result<Report, Failure> {
    let model = load_model(model_path)?;
    let report = model.validate();
    if !report.is_valid() {
        return Err(Failure::from(EngineError::InvalidModel(report)).context(&model_path.display().to_string()));
    }
    let sig: &Signature = model.signature();
    let pairs = parse_assignment_list(context).map_err(|e| arg_error("--context", context, e))?;
    let ctx = Context::from_pairs(sig, pairs.iter().map(|(n, v)| (n.as_str(), *v))).map_err(EngineError::from)?;
    let effect_f = parse_event_formula_in(effect, sig).map_err(|e| arg_error("--effect", effect, e))?;
    let variant = opts.variant.unwrap_or_default();
    let checker = Checker::new(&model, &ctx, variant, opts.config)?;
    let compiled = effect_f.compile(sig)?;
    let causes = checker.enumerate_causes(&compiled, max_size)?;

    let listed: Vec<_> = causes
        .iter()
        .map(|(c, w)| json!({ "cause": assignment_json(c, sig), "witness": witness_json(w, sig) }))
        .collect();
    let mut r = Report::new(
        "enumerate",
        json!({
            "effect": effect_f.to_string(),
            "variant": variant,
            "max_size": max_size,
            "causes": listed,
        }),
    );
    r.line(format!("{} cause(s) of {} with at most {max_size} conjunct(s):", causes.len(), effect_f));
    for (c, w) in &causes {
        r.line(format!("  {}    [{}]", c.display(sig), w.display(sig)));
    }
    r.calls(checker.solver_calls(), checker.budget_limit());
    Ok(r)
}

pub fn gen_instance(sigma2: bool, cqbf_path: &Path, out_dir: &Path) -> Result<Report, Failure> {
    let text = read(cqbf_path)?;
    let f = parse_cqbf(&text).map_err(|e| file_error(cqbf_path, &text, e))?;
    let inst = if sigma2 { build_sigma2_instance(&f)? } else { build_pi2_instance(&f)? };
    let stem = cqbf_path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .unwrap_or("instance");
    std::fs::create_dir_all(out_dir)?;

    let q = &inst.query;
    let sig = q.signature();
    let model_name = format!("{stem}.model");
    let model_file = out_dir.join(&model_name);
    let query_file = out_dir.join(format!("{stem}.query"));
    let expected_file = out_dir.join(format!("{stem}.expected"));
    std::fs::write(&model_file, write_model(&q.model))?;
    std::fs::write(
        &query_file,
        write_query(
            Some(&model_name),
            &q.context.values().display(sig).to_string(),
            &q.candidate.display(sig).to_string(),
            &q.effect,
            q.variant,
        ),
    )?;
    std::fs::write(
        &expected_file,
        format!("language: {}\nexpected: {}\n", inst.language, inst.expected_in_language),
    )?;

    let mut r = Report::new(
        "gen-instance",
        json!({
            "language": inst.language,
            "expected": inst.expected_in_language,
            "model": model_file.display().to_string(),
            "query": query_file.display().to_string(),
            "expected_file": expected_file.display().to_string(),
        }),
    );
    r.line(format!("language: {}", inst.language));
    r.line(format!("expected: {}", inst.expected_in_language));
    for p in [&model_file, &query_file, &expected_file] {
        r.line(format!("wrote {}", p.display()));
    }
    Ok(r)
}

#[derive(Default)]
struct Tally {
    agree: usize,
    disagree: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        if ok {
            self.agree += 1;
        } else {
            self.disagree += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }
}

pub fn selftest(scale: usize, seed: u64, opts: &Options) -> Result<Report, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suites: Vec<(&str, Tally)> = Vec::new();

    for (name, shape) in [
        ("sigma2-reduction", QuantifierShape::ExistsForall),
        ("pi2-reduction", QuantifierShape::ForallExists),
    ] {
        let mut t = Tally::default();
        for _ in 0..scale {
            let f = random_cqbf(&mut rng, shape, 3, 3);
            let inst = match shape {
                QuantifierShape::ExistsForall => build_sigma2_instance(&f)?,
                QuantifierShape::ForallExists => build_pi2_instance(&f)?,
            };
            let inst = hpcause::qbf::LabeledInstance {
                query: inst.query.with_config(opts.config),
                ..inst
            };
            let truth = eval_cqbf(&f)?;
            let engine = inst.engine_membership()?;
            t.record(truth == inst.expected_in_language && engine == truth, || {
                format!("{f}: truth {truth}, engine {engine}")
            });
        }
        suites.push((name, t));
    }

    let mut decomposition = Tally::default();
    let mut responsibility = Tally::default();
    for i in 0..scale {
        let (model, ctx) = random_model(&mut rng, 5, 3);
        let sig = model.signature();
        let actual = model.solve(&ctx)?.values().to_vec();
        let effect = random_effect(&mut rng, sig, 2);
        let cand = random_candidate(&mut rng, sig, &actual, 3);
        let variant = if i % 2 == 0 { Variant::Updated } else { Variant::Original };
        let problem = Problem {
            model: &model,
            context: &ctx,
            effect: &effect,
            variant,
        };
        let setting = cand.iter().collect();
        let compiled = effect.compile(sig)?;

        let checker = Checker::new(&model, &ctx, variant, opts.config)?;
        let v = checker.verdict(&cand, &compiled)?;
        let want = problem.components(&setting);
        let got = (v.ac1, v.ac1 && v.ac2_witness.is_some(), !v.ac1 || v.ac3_violator.is_none(), v.is_cause);
        let ok = got.0 == want.ac1 && (!want.ac1 || (got.1, got.2) == (want.ac2, want.ac3)) && got.3 == want.is_cause;
        decomposition.record(ok, || format!("{} for {effect} ({variant}): engine {got:?}, oracle {want:?}", cand.display(sig)));

        let checker = Checker::new(&model, &ctx, variant, opts.config)?;
        let res = responsibility_in(&checker, &cand, &compiled)?;
        let want = problem.min_changes(&setting);
        responsibility.record(res.min_changes == want, || {
            format!("{} for {effect} ({variant}): engine {:?}, oracle {want:?}", cand.display(sig), res.min_changes)
        });
    }
    suites.push(("cause-decomposition", decomposition));
    suites.push(("responsibility", responsibility));

    let failures: usize = suites.iter().map(|(_, t)| t.disagree).sum();
    let mut r = Report::new(
        "selftest",
        json!({
            "seed": seed,
            "scale": scale,
            "suites": suites
                .iter()
                .map(|(n, t)| (n.to_string(), json!({ "agree": t.agree, "disagree": t.disagree, "first_failure": t.first_failure })))
                .collect::<serde_json::Map<_, _>>(),
            "disagreements": failures,
        }),
    );
    for (name, t) in &suites {
        r.line(format!("{name}: {} agree, {} disagree", t.agree, t.disagree));
        if let Some(f) = &t.first_failure {
            r.line(format!("  first disagreement: {f}"));
        }
    }
    r.line(if failures == 0 { "selftest: PASS" } else { "selftest: FAIL" });
    r.success = failures == 0;
    Ok(r)
}
