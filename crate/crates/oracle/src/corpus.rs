use hpcause::qbf::{Cqbf2, QuantifierShape};
use hpcause::EventFormula;
use rand::seq::SliceRandom;
use rand::Rng;

fn literal(name: &str, positive: bool) -> EventFormula {
    EventFormula::prim(name, i64::from(positive))
}

fn combine(and: bool, a: EventFormula, b: EventFormula) -> EventFormula {
    if and {
        EventFormula::And(vec![a, b])
    } else {
        EventFormula::Or(vec![a, b])
    }
}

/// Template matrices over `x1 x2 y1 y2`: every `(l1 o l2) o (l3 o l4)` for
/// the three ways of pairing the variables, all literal polarities and every
/// choice of `&`/`|` per connective, plus every two-literal formula.
pub fn template_matrices() -> Vec<EventFormula> {
    let vars = ["x1", "x2", "y1", "y2"];
    let pairings = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
    let mut out = Vec::new();
    for p in pairings {
        for polarity in 0..16u32 {
            for ops in 0..8u32 {
                let lit = |k: usize| literal(vars[p[k]], polarity >> k & 1 == 1);
                let left = combine(ops & 1 == 1, lit(0), lit(1));
                let right = combine(ops & 2 == 2, lit(2), lit(3));
                out.push(combine(ops & 4 == 4, left, right));
            }
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            for polarity in 0..4u32 {
                for and in [true, false] {
                    out.push(combine(
                        and,
                        literal(vars[i], polarity & 1 == 1),
                        literal(vars[j], polarity & 2 == 2),
                    ));
                }
            }
        }
    }
    out
}

/// The template corpus with both blocks of size two, for one shape.
pub fn template_corpus(shape: QuantifierShape) -> Vec<Cqbf2> {
    let xs = vec!["x1".to_string(), "x2".to_string()];
    let ys = vec!["y1".to_string(), "y2".to_string()];
    template_matrices()
        .into_iter()
        .map(|m| Cqbf2::new(shape, xs.clone(), ys.clone(), m).expect("closed template"))
        .collect()
}

fn random_matrix(rng: &mut impl Rng, vars: &[String], depth: usize) -> EventFormula {
    if depth == 0 || rng.gen_bool(0.25) {
        let v = vars.choose(rng).expect("nonempty");
        return literal(v, rng.gen_bool(0.5));
    }
    match rng.gen_range(0..5) {
        0 => EventFormula::not(random_matrix(rng, vars, depth - 1)),
        1 | 2 => {
            let k = rng.gen_range(2..=3);
            EventFormula::And((0..k).map(|_| random_matrix(rng, vars, depth - 1)).collect())
        }
        _ => {
            let k = rng.gen_range(2..=3);
            EventFormula::Or((0..k).map(|_| random_matrix(rng, vars, depth - 1)).collect())
        }
    }
}

/// Random formula with `1..=max_exists` existential and `1..=max_forall`
/// universal variables and a matrix of nesting depth at most 4.
pub fn random_cqbf(rng: &mut impl Rng, shape: QuantifierShape, max_exists: usize, max_forall: usize) -> Cqbf2 {
    let nx = rng.gen_range(1..=max_exists);
    let ny = rng.gen_range(1..=max_forall);
    let xs: Vec<String> = (1..=nx).map(|i| format!("x{i}")).collect();
    let ys: Vec<String> = (1..=ny).map(|i| format!("y{i}")).collect();
    let all: Vec<String> = xs.iter().chain(&ys).cloned().collect();
    let matrix = random_matrix(rng, &all, 4);
    Cqbf2::new(shape, xs, ys, matrix).expect("closed by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_count() {
        assert_eq!(template_matrices().len(), 384 + 48);
    }
}
