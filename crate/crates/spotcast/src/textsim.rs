//! Edit-distance primitives and candidate-identity ranking.

use crate::ingest::normalize_text_lossy;

/// Normalized string similarity in `[0, 1]`.
///
/// `1.0` means the strings are equal, `0.0` means they share nothing at
/// the edit-distance level.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SimilarityScore(pub f64);

impl SimilarityScore {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Levenshtein distance over Unicode scalar values.
///
/// Single-row dynamic programming; O(len_a * len_b) time, O(min) space.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    // keep the row along the shorter string
    let (long, short) = if a.len() >= b.len() { (&a, &b) } else { (&b, &a) };
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, &cl) in long.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = i + 1;
        for (j, &cs) in short.iter().enumerate() {
            let subst = prev_diag + usize::from(cl != cs);
            prev_diag = row[j + 1];
            row[j + 1] = subst.min(row[j] + 1).min(prev_diag + 1);
        }
    }
    row[short.len()]
}

/// Similarity `1 - d / max(len)` with `similarity("", "") == 1`.
pub fn similarity(a: &str, b: &str) -> SimilarityScore {
    let la = a.chars().count();
    let lb = b.chars().count();
    let denom = la.max(lb);
    if denom == 0 {
        return SimilarityScore(1.0);
    }
    SimilarityScore(1.0 - levenshtein(a, b) as f64 / denom as f64)
}

/// Filter candidates by a minimum similarity to `query`, rank descending
/// by score with ties broken by ascending id, and truncate to `top_k`.
///
/// Strings are text-normalized (lowercase, ASCII, collapsed whitespace)
/// before scoring so the score-1 contract holds for equal-after-normalization
/// inputs.
pub fn validate_candidates(
    query: &str,
    candidates: &[(String, String)],
    min_score: f64,
    top_k: usize,
) -> Vec<(String, SimilarityScore)> {
    debug_assert!((0.0..=1.0).contains(&min_score));
    debug_assert!(top_k >= 1);
    let nq = normalize_text_lossy(query);
    let mut scored: Vec<(String, SimilarityScore)> = candidates
        .iter()
        .map(|(id, text)| (id.clone(), similarity(&nq, &normalize_text_lossy(text))))
        .filter(|(_, s)| s.value() >= min_score)
        .collect();
    scored.sort_by(|(ia, sa), (ib, sb)| {
        sb.value()
            .partial_cmp(&sa.value())
            .unwrap()
            .then_with(|| ia.cmp(ib))
    });
    scored.truncate(top_k);
    scored
}
