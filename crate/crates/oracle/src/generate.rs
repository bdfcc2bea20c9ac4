use hpcause::model::{SignatureBuilder, VarDecl};
use hpcause::{Assignment, CausalModel, Context, EventFormula, Expr, Signature, Value, Var, VarKind};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random recursive model: 1–2 exogenous and 1–`max_endogenous` endogenous
/// variables, each with a range of 1–`max_range` values; every equation is
/// an arbitrary table over at most two parents chosen consistently with a
/// random causal order.
pub fn random_model(rng: &mut impl Rng, max_endogenous: usize, max_range: usize) -> (CausalModel, Context) {
    let n_exo = rng.gen_range(1..=2);
    let n_endo = rng.gen_range(1..=max_endogenous);
    let mut b = SignatureBuilder::new();
    for i in 1..=n_exo {
        let k = rng.gen_range(1..=max_range) as Value;
        b.add(format!("U{i}"), VarKind::Exogenous, 0..k);
    }
    for i in 1..=n_endo {
        let k = rng.gen_range(1..=max_range) as Value;
        b.add(format!("V{i}"), VarKind::Endogenous, 0..k);
    }
    let sig = b.build().expect("distinct names");
    let exo: Vec<Var> = sig.exogenous().collect();
    let endo: Vec<Var> = sig.endogenous().collect();
    let mut order = endo.clone();
    order.shuffle(rng);

    let mut model = CausalModel::new(sig.clone());
    for (pos, &v) in order.iter().enumerate() {
        let mut candidates: Vec<Var> = exo.clone();
        candidates.extend_from_slice(&order[..pos]);
        let n_parents = rng.gen_range(0..=2.min(candidates.len()));
        let parents: Vec<Var> = candidates.choose_multiple(rng, n_parents).copied().collect();
        let body = random_table(rng, &sig, &parents, sig.range(v));
        model.set_equation(v, body).expect("endogenous");
    }
    let ctx = Context::from_pairs(
        &sig,
        exo.iter()
            .map(|&u| (sig.name(u), *sig.range(u).choose(rng).expect("nonempty range"))),
    )
    .expect("total context");
    (model, ctx)
}

fn random_table(rng: &mut impl Rng, sig: &Signature, parents: &[Var], out: &[Value]) -> Expr {
    match parents.split_first() {
        None => Expr::Const(*out.choose(rng).expect("nonempty range")),
        Some((&p, rest)) => {
            let range = sig.range(p);
            let mut expr = random_table(rng, sig, rest, out);
            for &val in range[..range.len() - 1].iter().rev() {
                let branch = random_table(rng, sig, rest, out);
                expr = Expr::ite(Expr::eq(Expr::var(p), Expr::Const(val)), branch, expr);
            }
            expr
        }
    }
}

/// Random event formula over endogenous variables, nesting at most `depth`.
pub fn random_effect(rng: &mut impl Rng, sig: &Signature, depth: usize) -> EventFormula {
    let endo: Vec<Var> = sig.endogenous().collect();
    if depth == 0 || rng.gen_bool(0.4) {
        let v = *endo.choose(rng).expect("some endogenous variable");
        return EventFormula::prim(sig.name(v), *sig.range(v).choose(rng).expect("nonempty"));
    }
    match rng.gen_range(0..3) {
        0 => EventFormula::not(random_effect(rng, sig, depth - 1)),
        1 => EventFormula::And(vec![random_effect(rng, sig, depth - 1), random_effect(rng, sig, depth - 1)]),
        _ => EventFormula::Or(vec![random_effect(rng, sig, depth - 1), random_effect(rng, sig, depth - 1)]),
    }
}

/// Random nonempty candidate of at most `max_size` endogenous variables,
/// usually at their actual values.
pub fn random_candidate(rng: &mut impl Rng, sig: &Signature, actual: &[Value], max_size: usize) -> Assignment {
    let endo: Vec<Var> = sig.endogenous().collect();
    let size = rng.gen_range(1..=max_size.min(endo.len()));
    endo.choose_multiple(rng, size)
        .map(|&v| {
            let x = if rng.gen_bool(0.85) {
                actual[v.index()]
            } else {
                *sig.range(v).choose(rng).expect("nonempty")
            };
            (v, x)
        })
        .collect()
}

/// Number of distinct binary models over `V1..Vn` where each `Vi` is an
/// arbitrary function of `V1..V(i-1)`.
pub fn binary_model_count(n: usize) -> u64 {
    (0..n).map(|i| 1u64 << (1u64 << i)).product()
}

/// The `code`-th binary model in the enumeration counted by
/// [`binary_model_count`]. The only exogenous variable `U` has range `{0}`,
/// so fixing the context loses no generality: each model stands for every
/// binary model whose equations reduce to these once `U` is substituted.
pub fn binary_model(n: usize, mut code: u64) -> (CausalModel, Context) {
    let mut decls = vec![VarDecl {
        name: "U".into(),
        kind: VarKind::Exogenous,
        range: vec![0],
    }];
    for i in 1..=n {
        decls.push(VarDecl {
            name: format!("V{i}"),
            kind: VarKind::Endogenous,
            range: vec![0, 1],
        });
    }
    let sig = Signature::new(decls).expect("distinct names");
    let vars: Vec<Var> = sig.endogenous().collect();
    let mut model = CausalModel::new(sig.clone());
    for (i, &v) in vars.iter().enumerate() {
        let rows = 1u64 << i;
        let functions = 1u64 << rows;
        let table = code % functions;
        code /= functions;
        model
            .set_equation(v, binary_table(&vars[..i], table, 0))
            .expect("endogenous");
    }
    let ctx = Context::from_pairs(&sig, [("U", 0)]).expect("total");
    (model, ctx)
}

/// Row `r` of the table (bit `r`) is the output when parent `j` has value
/// bit `j` of `r`.
fn binary_table(parents: &[Var], table: u64, row_prefix: u64) -> Expr {
    let depth = parents.len();
    if depth == 0 {
        return Expr::Const((table >> row_prefix & 1) as Value);
    }
    let p = parents[depth - 1];
    let bit = 1u64 << (depth - 1);
    let hi = binary_table(&parents[..depth - 1], table, row_prefix | bit);
    let lo = binary_table(&parents[..depth - 1], table, row_prefix);
    if hi == lo {
        hi
    } else {
        Expr::ite(Expr::var(p), hi, lo)
    }
}

/// Event formula for the Boolean function whose truth table over binary
/// `names` is `table` (bit `r` is the value on the row where name `j` has
/// value bit `j` of `r`).
pub fn boolean_function(names: &[String], table: u64) -> EventFormula {
    let rows = 1u64 << names.len();
    let minterms: Vec<EventFormula> = (0..rows)
        .filter(|r| table >> r & 1 == 1)
        .map(|r| {
            EventFormula::and(
                names
                    .iter()
                    .enumerate()
                    .map(|(j, n)| EventFormula::prim(n.as_str(), (r >> j & 1) as Value))
                    .collect(),
            )
        })
        .collect();
    if minterms.is_empty() {
        let n = names[0].as_str();
        EventFormula::And(vec![EventFormula::prim(n, 0), EventFormula::prim(n, 1)])
    } else {
        EventFormula::or(minterms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_models_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (m, ctx) = random_model(&mut rng, 5, 3);
            assert!(m.validate().is_valid());
            m.solve(&ctx).unwrap();
        }
    }

    #[test]
    fn binary_enumeration_is_complete_and_distinct() {
        assert_eq!(binary_model_count(4), 2 * 4 * 16 * 256);
        let mut seen = std::collections::HashSet::new();
        for code in 0..binary_model_count(3) {
            let (m, _) = binary_model(3, code);
            assert!(m.validate().is_valid());
            // Behaviour under every intervention on V1, V2 identifies the model.
            let mut fingerprint = Vec::new();
            for a in [None, Some(0), Some(1)] {
                for b in [None, Some(0), Some(1)] {
                    let mut s = Assignment::new();
                    let sig = m.signature();
                    if let Some(a) = a {
                        s.insert(sig.var("V1").unwrap(), a);
                    }
                    if let Some(b) = b {
                        s.insert(sig.var("V2").unwrap(), b);
                    }
                    let ctx = Context::from_pairs(sig, [("U", 0)]).unwrap();
                    fingerprint.push(m.intervene(&s).unwrap().solve(&ctx).unwrap().values().to_vec());
                }
            }
            assert!(seen.insert(fingerprint));
        }
    }

    #[test]
    fn boolean_function_tables() {
        let names: Vec<String> = vec!["A".into(), "B".into()];
        assert_eq!(boolean_function(&names, 0b1000).to_string(), "(A=1 & B=1)");
        assert_eq!(boolean_function(&names, 0).to_string(), "(A=0 & A=1)");
    }
}
