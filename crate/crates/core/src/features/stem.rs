//! Porter-style suffix stripping for the "unique word stems" feature.

fn is_consonant(chars: &[char], i: usize) -> bool {
    match chars[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => false,
        'y' => i == 0 || !is_consonant(chars, i - 1),
        _ => true,
    }
}

/// The measure m of the stem: number of VC sequences.
fn measure(chars: &[char]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..chars.len() {
        let cons = is_consonant(chars, i);
        if cons && prev_vowel {
            m += 1;
        }
        prev_vowel = !cons;
    }
    m
}

fn contains_vowel(chars: &[char]) -> bool {
    (0..chars.len()).any(|i| !is_consonant(chars, i))
}

fn ends_double_consonant(chars: &[char]) -> bool {
    let n = chars.len();
    n >= 2 && chars[n - 1] == chars[n - 2] && is_consonant(chars, n - 1)
}

/// Consonant-vowel-consonant ending where the final consonant is not w, x, y.
fn ends_cvc(chars: &[char]) -> bool {
    let n = chars.len();
    n >= 3
        && is_consonant(chars, n - 3)
        && !is_consonant(chars, n - 2)
        && is_consonant(chars, n - 1)
        && !matches!(chars[n - 1], 'w' | 'x' | 'y')
}

fn replace_suffix(word: &mut Vec<char>, suffix: &str, replacement: &str, min_measure: usize) -> bool {
    let suf: Vec<char> = suffix.chars().collect();
    if word.len() < suf.len() || word[word.len() - suf.len()..] != suf[..] {
        return false;
    }
    let stem_len = word.len() - suf.len();
    if measure(&word[..stem_len]) < min_measure {
        return true; // suffix matched but rule does not fire
    }
    word.truncate(stem_len);
    word.extend(replacement.chars());
    true
}

/// Stems a lowercase word with the classic Porter steps.
pub fn porter_stem(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    if w.len() <= 2 {
        return word.to_string();
    }

    // step 1a
    if ends_with(&w, "sses") {
        w.truncate(w.len() - 2);
    } else if ends_with(&w, "ies") {
        w.truncate(w.len() - 2);
    } else if ends_with(&w, "ss") {
        // keep
    } else if ends_with(&w, "s") {
        w.truncate(w.len() - 1);
    }

    // step 1b
    let mut step1b_fired = false;
    if ends_with(&w, "eed") {
        if measure(&w[..w.len() - 3]) > 0 {
            w.truncate(w.len() - 1);
        }
    } else if ends_with(&w, "ed") && contains_vowel(&w[..w.len() - 2]) {
        w.truncate(w.len() - 2);
        step1b_fired = true;
    } else if ends_with(&w, "ing") && contains_vowel(&w[..w.len() - 3]) {
        w.truncate(w.len() - 3);
        step1b_fired = true;
    }
    if step1b_fired {
        if ends_with(&w, "at") || ends_with(&w, "bl") || ends_with(&w, "iz") {
            w.push('e');
        } else if ends_double_consonant(&w) && !matches!(w[w.len() - 1], 'l' | 's' | 'z') {
            w.truncate(w.len() - 1);
        } else if measure(&w) == 1 && ends_cvc(&w) {
            w.push('e');
        }
    }

    // step 1c
    if ends_with(&w, "y") && contains_vowel(&w[..w.len() - 1]) {
        let n = w.len();
        w[n - 1] = 'i';
    }

    // step 2
    for (suffix, replacement) in [
        ("ational", "ate"),
        ("tional", "tion"),
        ("enci", "ence"),
        ("anci", "ance"),
        ("izer", "ize"),
        ("abli", "able"),
        ("alli", "al"),
        ("entli", "ent"),
        ("eli", "e"),
        ("ousli", "ous"),
        ("ization", "ize"),
        ("ation", "ate"),
        ("ator", "ate"),
        ("alism", "al"),
        ("iveness", "ive"),
        ("fulness", "ful"),
        ("ousness", "ous"),
        ("aliti", "al"),
        ("iviti", "ive"),
        ("biliti", "ble"),
    ] {
        if replace_suffix(&mut w, suffix, replacement, 1) {
            break;
        }
    }

    // step 3
    for (suffix, replacement) in [
        ("icate", "ic"),
        ("ative", ""),
        ("alize", "al"),
        ("iciti", "ic"),
        ("ical", "ic"),
        ("ful", ""),
        ("ness", ""),
    ] {
        if replace_suffix(&mut w, suffix, replacement, 1) {
            break;
        }
    }

    // step 4
    for suffix in [
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ou",
        "ism", "ate", "iti", "ous", "ive", "ize",
    ] {
        let suf: Vec<char> = suffix.chars().collect();
        if w.len() > suf.len() && ends_with(&w, suffix) {
            let stem_len = w.len() - suf.len();
            if measure(&w[..stem_len]) > 1 {
                w.truncate(stem_len);
            }
            break;
        }
    }
    // "ion" only after s or t
    if ends_with(&w, "ion") && w.len() > 4 {
        let stem_len = w.len() - 3;
        if matches!(w[stem_len - 1], 's' | 't') && measure(&w[..stem_len]) > 1 {
            w.truncate(stem_len);
        }
    }

    // step 5a
    if ends_with(&w, "e") {
        let stem_len = w.len() - 1;
        let m = measure(&w[..stem_len]);
        if m > 1 || (m == 1 && !ends_cvc(&w[..stem_len])) {
            w.truncate(stem_len);
        }
    }
    // step 5b
    if measure(&w) > 1 && ends_double_consonant(&w) && w[w.len() - 1] == 'l' {
        w.truncate(w.len() - 1);
    }

    w.into_iter().collect()
}

fn ends_with(chars: &[char], suffix: &str) -> bool {
    let suf: Vec<char> = suffix.chars().collect();
    chars.len() >= suf.len() && chars[chars.len() - suf.len()..] == suf[..]
}
