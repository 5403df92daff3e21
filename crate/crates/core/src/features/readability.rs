//! Readability metrics over claim text: Flesch Reading Ease, Flesch-Kincaid
//! Grade, Gunning Fog, Automated Readability Index, and Dale-Chall.
//!
//! Syllables are counted with a vowel-group heuristic plus a silent-e
//! correction. Sentences split on [.?;] followed by whitespace; text without a
//! terminator counts as one sentence (claims are legally single sentences).

use std::collections::HashSet;
use std::sync::OnceLock;

use super::tokenize;

const FAMILIAR_WORDS: &str = include_str!("../assets/familiar_words.txt");

fn familiar_words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| FAMILIAR_WORDS.lines().map(str::trim).collect())
}

/// Vowel-group syllable count with silent-e correction; at least 1 for any
/// word containing a letter.
pub fn count_syllables(word: &str) -> usize {
    let lower = word.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut in_group = false;
    for &c in &chars {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    if groups > 1 && lower.ends_with('e') && !lower.ends_with("le") {
        let before_e = chars.len().checked_sub(2).map(|i| chars[i]);
        if before_e.map(|c| !is_vowel(c)).unwrap_or(false) {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// Sentence count: terminators [.?;] followed by whitespace or end of text.
pub fn count_sentences(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let mut count = 0;
    for (i, &c) in chars.iter().enumerate() {
        if matches!(c, '.' | '?' | ';') {
            let next = chars.get(i + 1);
            if next.map(|n| n.is_whitespace()).unwrap_or(true) {
                count += 1;
            }
        }
    }
    count.max(1)
}

/// The text statistics feeding every readability slot.
#[derive(Debug, Clone, Copy)]
pub struct TextStats {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub complex_words: usize,
    pub difficult_words: usize,
    pub alnum_chars: usize,
}

pub fn text_stats(text: &str) -> TextStats {
    let tokens = tokenize(text);
    let sentences = count_sentences(text);
    let mut syllables = 0;
    let mut complex_words = 0;
    let mut difficult_words = 0;
    for token in &tokens {
        let s = count_syllables(token);
        syllables += s;
        if s >= 3 {
            complex_words += 1;
        }
        let numeric = token.chars().all(|c| c.is_ascii_digit());
        if !numeric && !familiar_words().contains(token.as_str()) {
            difficult_words += 1;
        }
    }
    TextStats {
        words: tokens.len(),
        sentences,
        syllables,
        complex_words,
        difficult_words,
        alnum_chars: text.chars().filter(|c| c.is_alphanumeric()).count(),
    }
}

fn guarded(n: f64, d: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        n / d
    }
}

pub fn flesch_reading_ease(s: &TextStats) -> f64 {
    206.835
        - 1.015 * guarded(s.words as f64, s.sentences as f64)
        - 84.6 * guarded(s.syllables as f64, s.words as f64)
}

pub fn flesch_kincaid_grade(s: &TextStats) -> f64 {
    0.39 * guarded(s.words as f64, s.sentences as f64)
        + 11.8 * guarded(s.syllables as f64, s.words as f64)
        - 15.59
}

pub fn gunning_fog(s: &TextStats) -> f64 {
    0.4 * (guarded(s.words as f64, s.sentences as f64)
        + 100.0 * guarded(s.complex_words as f64, s.words as f64))
}

pub fn automated_readability_index(s: &TextStats) -> f64 {
    4.71 * guarded(s.alnum_chars as f64, s.words as f64)
        + 0.5 * guarded(s.words as f64, s.sentences as f64)
        - 21.43
}

pub fn dale_chall(s: &TextStats) -> f64 {
    let pct_difficult = 100.0 * guarded(s.difficult_words as f64, s.words as f64);
    let mut score =
        0.1579 * pct_difficult + 0.0496 * guarded(s.words as f64, s.sentences as f64);
    if pct_difficult > 5.0 {
        score += 3.6365;
    }
    score
}
