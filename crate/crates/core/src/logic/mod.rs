//! Relational count features: schema, clauses, grounding counts, clause
//! search and selection.

pub mod clause;
pub mod enumerate;
pub mod facts;
pub mod ground;
pub mod schema;
pub mod select;

pub use clause::{Clause, ClauseError, Literal, Var};
pub use enumerate::enumerate_clauses;
pub use facts::{Entity, FactBase};
pub use ground::count_groundings;
pub use schema::{ArgMode, EntityType, ModeDeclaration, Pred, Schema};
pub use select::{mutual_information, select_features};

use thiserror::Error;

/// Raw grounding count per selected clause.
pub type FeatureVector = Vec<u64>;

/// Element `i` is the grounding count of `features[i]`.
pub fn featurize(facts: &FactBase, features: &[Clause]) -> FeatureVector {
    features.iter().map(|c| count_groundings(facts, c)).collect()
}

#[derive(Debug, Error)]
#[error("clause file line {line}: {source}")]
pub struct ClauseFileError {
    pub line: usize,
    #[source]
    pub source: ClauseError,
}

/// One clause per line, each preceded by a `# id: N` comment.
pub fn write_clause_file(clauses: &[Clause]) -> String {
    let mut out = String::new();
    for c in clauses {
        out.push_str(&format!("# id: {}\n{}\n", c.id, c));
    }
    out
}

/// Reads the format produced by [`write_clause_file`]. Clauses without a
/// preceding id comment are numbered after the previous one.
pub fn parse_clause_file(text: &str) -> Result<Vec<Clause>, ClauseFileError> {
    let mut clauses = Vec::new();
    let mut pending_id: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("id:") {
                pending_id = id.trim().parse().ok();
            }
            continue;
        }
        let id = pending_id
            .take()
            .unwrap_or_else(|| clauses.last().map_or(1, |c: &Clause| c.id + 1));
        let clause = Clause::parse(id, line).map_err(|source| ClauseFileError { line: i + 1, source })?;
        clauses.push(clause);
    }
    Ok(clauses)
}
