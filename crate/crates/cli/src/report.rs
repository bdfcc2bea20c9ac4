use std::fmt::Write as _;

use hpcause::{Assignment, Signature, Witness};
use serde_json::{json, Value as Json};

/// Output of a successful command: text for people, JSON for tools.
pub struct Report {
    pub human: String,
    pub json: Json,
    /// False when the command ran but found a problem (exit 1), e.g. a
    /// selftest disagreement.
    pub success: bool,
}

impl Report {
    pub fn new(command: &str, result: Json) -> Self {
        Self {
            human: String::new(),
            json: json!({ "command": command, "result": result }),
            success: true,
        }
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.human, "{}", text.as_ref());
    }

    /// Attach solver-call accounting to both renderings.
    pub fn calls(&mut self, used: u64, limit: u64) {
        self.line(format!("solver calls: {used} (budget {limit})"));
        self.json["solver_calls"] = json!(used);
        self.json["budget"] = json!(limit);
    }
}

pub fn assignment_json(a: &Assignment, sig: &Signature) -> Json {
    json!(a.to_named(sig))
}

pub fn witness_json(w: &Witness, sig: &Signature) -> Json {
    let names: Vec<&str> = w.w_set().into_iter().map(|v| sig.name(v)).collect();
    json!({
        "W": names,
        "w": assignment_json(&w.contingency, sig),
        "x_prime": assignment_json(&w.alternative, sig),
    })
}
