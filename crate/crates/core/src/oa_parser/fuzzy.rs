//! Sliding-window fuzzy matching of examiner-cited recitations against claim
//! text.
//!
//! Both sides are normalized (whitespace collapsed, curly quotes straightened,
//! case-folded) and the claim window maximizing 1 − edit_distance/max_len is
//! selected among windows within ±20% of the recitation length. Matches map
//! back to Unicode-scalar offsets in the original claim text.

use serde::{Deserialize, Serialize};

/// A located recitation, offsets into the original (unnormalized) claim text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMatch {
    pub start: usize,
    pub end: usize,
    pub score: f64,
}

/// Plain Levenshtein distance over Unicode scalars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b, usize::MAX).unwrap_or(usize::MAX)
}

/// Banded Levenshtein with early abandon: `None` when the distance exceeds
/// `cutoff`.
fn levenshtein_chars(a: &[char], b: &[char], cutoff: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > cutoff {
        return None;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0usize; short.len() + 1];
    for (i, &lc) in long.iter().enumerate() {
        curr[0] = i + 1;
        let mut row_min = curr[0];
        for (j, &sc) in short.iter().enumerate() {
            let cost = if lc == sc { 0 } else { 1 };
            curr[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(curr[j] + 1);
            row_min = row_min.min(curr[j + 1]);
        }
        if row_min > cutoff {
            return None;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let d = prev[short.len()];
    (d <= cutoff).then_some(d)
}

/// Normalized text plus a map from each normalized char to its index in the
/// original text.
pub fn normalize_with_map(text: &str) -> (Vec<char>, Vec<usize>) {
    let mut out = Vec::new();
    let mut map = Vec::new();
    let mut pending_space: Option<usize> = None;
    for (orig_idx, c) in text.chars().enumerate() {
        let c = match c {
            '\u{2018}' | '\u{2019}' | '\u{201B}' | '`' => '\'',
            '\u{201C}' | '\u{201D}' => '"',
            other => other,
        };
        if c.is_whitespace() {
            if !out.is_empty() {
                pending_space.get_or_insert(orig_idx);
            }
            continue;
        }
        if let Some(space_idx) = pending_space.take() {
            out.push(' ');
            map.push(space_idx);
        }
        for lower in c.to_lowercase() {
            out.push(lower);
            map.push(orig_idx);
        }
    }
    (out, map)
}

/// Finds the best-scoring window for `recitation` inside `claim_text`.
/// Returns `None` when the best normalized similarity falls below
/// `threshold`. Ties break toward the earliest start, then the shortest
/// window.
pub fn fuzzy_match_recitation(
    recitation: &str,
    claim_text: &str,
    threshold: f64,
) -> Option<FuzzyMatch> {
    let (needle, _) = normalize_with_map(recitation);
    let (haystack, map) = normalize_with_map(claim_text);
    if needle.is_empty() || haystack.is_empty() {
        return None;
    }
    let needle_len = needle.len();

    // exact-containment fast path
    if haystack.len() >= needle_len {
        for start in 0..=(haystack.len() - needle_len) {
            if haystack[start..start + needle_len] == needle[..] {
                return Some(to_original(&map, claim_text, start, needle_len, 1.0));
            }
        }
    }

    let min_len = ((needle_len as f64 * 0.8).floor() as usize).max(1);
    let max_len = ((needle_len as f64 * 1.2).ceil() as usize).min(haystack.len());
    let mut best: Option<(f64, usize, usize)> = None;
    for len in min_len..=max_len {
        if len > haystack.len() {
            break;
        }
        let denom = needle_len.max(len) as f64;
        // distance must stay under this for the window to beat the threshold
        // and the current best
        let score_floor = best.map(|(s, _, _)| s).unwrap_or(threshold);
        let cutoff = (denom * (1.0 - score_floor)).floor() as usize;
        for start in 0..=(haystack.len() - len) {
            let window = &haystack[start..start + len];
            if let Some(dist) = levenshtein_chars(&needle, window, cutoff) {
                let score = 1.0 - dist as f64 / denom;
                let better = match best {
                    None => score >= threshold,
                    Some((bs, bstart, blen)) => {
                        score > bs
                            || (score == bs && start < bstart)
                            || (score == bs && start == bstart && len < blen)
                    }
                };
                if better {
                    best = Some((score, start, len));
                }
            }
        }
    }
    best.map(|(score, start, len)| to_original(&map, claim_text, start, len, score))
}

fn to_original(
    map: &[usize],
    claim_text: &str,
    norm_start: usize,
    norm_len: usize,
    score: f64,
) -> FuzzyMatch {
    let start = map[norm_start];
    let end = map[norm_start + norm_len - 1] + 1;
    debug_assert!(end <= claim_text.chars().count());
    FuzzyMatch { start, end, score }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_substring_scores_one() {
        let claim = "A method comprising the first module and a second module.";
        let m = fuzzy_match_recitation("the first module", claim, 0.8).unwrap();
        assert_eq!(m.score, 1.0);
        let chars: Vec<char> = claim.chars().collect();
        let matched: String = chars[m.start..m.end].iter().collect();
        assert_eq!(matched, "the first module");
    }

    #[test]
    fn curly_quotes_match_straight() {
        let claim = "obtained 'right before' the first input";
        let recitation = "\u{2018}right before\u{2019}";
        let m = fuzzy_match_recitation(recitation, claim, 0.8).unwrap();
        assert!(m.score >= 0.9, "score {}", m.score);
    }

    #[test]
    fn whitespace_noise_tolerated() {
        let claim = "wherein the processing  unit\n determines a value";
        let m = fuzzy_match_recitation("the processing unit determines", claim, 0.8).unwrap();
        assert!(m.score >= 0.9);
    }

    #[test]
    fn unrelated_recitation_rejected() {
        let claim = "A method of parsing natural language text into tokens.";
        // oracle: every window of a text-processing claim stays far from this
        assert!(fuzzy_match_recitation("hydraulic actuator", claim, 0.8).is_none());
    }

    #[test]
    fn earliest_start_wins_ties() {
        let claim = "alpha beta alpha beta";
        let m = fuzzy_match_recitation("alpha beta", claim, 0.8).unwrap();
        assert_eq!(m.start, 0);
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("same", "same"), 0);
    }

    #[test]
    fn edit_distance_oracle_on_normalized_strings() {
        let claim = "a value right before the input";
        let recitation = "right befpre"; // one substitution
        let m = fuzzy_match_recitation(recitation, claim, 0.8).unwrap();
        // window "right before" has distance 1, len 12 → score 1 - 1/12
        assert!((m.score - (1.0 - 1.0 / 12.0)).abs() < 1e-9);
    }

    #[test]
    fn offsets_are_unicode_scalar_offsets() {
        let claim = "caf\u{e9} na\u{ef}ve 'term' here";
        let m = fuzzy_match_recitation("'term'", claim, 0.8).unwrap();
        let chars: Vec<char> = claim.chars().collect();
        let matched: String = chars[m.start..m.end].iter().collect();
        assert_eq!(matched, "'term'");
    }
}
