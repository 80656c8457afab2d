use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA: &str = "tpoly/1";

/// Every JSON document written by the tool.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a RunConfig,
    pub result: T,
}

/// Pretty JSON with a trailing newline.
pub fn render<T: Serialize>(command: &str, cfg: &RunConfig, result: T) -> Result<String, CliError> {
    let env = Envelope { schema: SCHEMA, command, seed: cfg.seed, config: cfg, result };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// The check did not hold, but its standing hypotheses are not met either.
    OutOfHypothesis,
}

/// Where the expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A value or set displayed in the source text.
    Stated,
    /// Produced by an independent ground-truth computation.
    Derived,
    /// A degenerate consequence in the ordinary case `Y_0 = ∅`.
    Trivial,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub provenance: Provenance,
    pub expected: Value,
    pub computed: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn to_json<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).unwrap_or_else(|e| Value::String(format!("unserializable: {e}")))
}

impl Check {
    /// Pass when `holds`; otherwise fail, or out-of-hypothesis when `in_hypothesis` is false.
    pub fn new(
        name: impl Into<String>,
        provenance: Provenance,
        expected: impl Serialize,
        computed: impl Serialize,
        holds: bool,
        in_hypothesis: bool,
    ) -> Self {
        let status = match (holds, in_hypothesis) {
            (true, _) => Status::Pass,
            (false, true) => Status::Fail,
            (false, false) => Status::OutOfHypothesis,
        };
        Check { name: name.into(), status, provenance, expected: to_json(expected), computed: to_json(computed), note: None }
    }

    /// A check whose inputs lie outside what the battery can evaluate.
    pub fn not_applicable(name: impl Into<String>, provenance: Provenance, why: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::OutOfHypothesis,
            provenance,
            expected: Value::Null,
            computed: Value::Null,
            note: Some(why.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub out_of_hypothesis: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub summary: Summary,
    /// Sorted by name, so the report does not depend on evaluation order.
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerifyReport {
    pub fn assemble(mut checks: Vec<Check>, notes: Vec<String>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::OutOfHypothesis => summary.out_of_hypothesis += 1,
            }
        }
        VerifyReport { summary, checks, notes }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.binary_search_by(|c| c.name.as_str().cmp(name)).ok().map(|i| &self.checks[i])
    }

    pub fn has_failures(&self) -> bool {
        self.summary.fail > 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_rules() {
        assert_eq!(Check::new("a", Provenance::Derived, 1, 1, true, false).status, Status::Pass);
        assert_eq!(Check::new("a", Provenance::Derived, 1, 2, false, true).status, Status::Fail);
        assert_eq!(Check::new("a", Provenance::Derived, 1, 2, false, false).status, Status::OutOfHypothesis);
    }

    #[test]
    fn assembly_is_order_independent() {
        let a = Check::new("b.x", Provenance::Stated, 1, 1, true, true);
        let b = Check::new("a.y", Provenance::Derived, 1, 2, false, true);
        let r1 = VerifyReport::assemble(vec![a.clone(), b.clone()], vec![]);
        let r2 = VerifyReport::assemble(vec![b, a], vec![]);
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        assert_eq!((r1.summary.pass, r1.summary.fail), (1, 1));
        assert!(r1.get("a.y").is_some() && r1.get("zz").is_none());
        let s = serde_json::to_string(&r1.checks[0]).unwrap();
        assert!(s.contains("\"status\":\"fail\"") && s.contains("\"provenance\":\"derived\""));
    }
}
