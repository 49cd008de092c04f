use std::collections::HashMap;

use super::{Method, ScoreVector};
use crate::ingest::{ContentKind, GroupActivityLog};

/// Expertise z-score treating reactions on others' content as answers and
/// authored posts as questions: `(a - q) / sqrt(a + q)`, zero for users
/// with neither.
pub fn zscore(log: &GroupActivityLog) -> ScoreVector {
    let mut answers: HashMap<&str, u64> = HashMap::new();
    let mut questions: HashMap<&str, u64> = HashMap::new();
    for r in log.foreign_reactions() {
        *answers.entry(r.reactor.as_str()).or_insert(0) += 1;
    }
    for c in log.contents().iter().filter(|c| c.kind == ContentKind::Post) {
        *questions.entry(c.author.as_str()).or_insert(0) += 1;
    }
    let users: Vec<_> = log.users().iter().cloned().collect();
    let scores = users
        .iter()
        .map(|u| {
            let a = answers.get(u.as_str()).copied().unwrap_or(0) as f64;
            let q = questions.get(u.as_str()).copied().unwrap_or(0) as f64;
            if a + q == 0.0 {
                0.0
            } else {
                (a - q) / (a + q).sqrt()
            }
        })
        .collect();
    ScoreVector::new(Method::ZScore, users, scores).expect("log users are sorted and unique")
}
