//! Tokenization and n-gram enumeration.

/// Lowercases `text` and splits it on every non-alphanumeric character.
///
/// Empty fragments are dropped. No stemming and no stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|s| !s.is_empty()).map(str::to_lowercase).collect()
}

/// All contiguous n-grams of `tokens` with `n` in `min_n..=max_n`, joined by single spaces.
///
/// Duplicates are kept; callers that need document presence dedupe themselves.
pub fn ngrams(tokens: &[String], min_n: usize, max_n: usize) -> Vec<String> {
    let mut grams = Vec::new();
    for n in min_n.max(1)..=max_n {
        if n > tokens.len() {
            break;
        }
        for window in tokens.windows(n) {
            grams.push(window.join(" "));
        }
    }
    grams
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Bad movie, REALLY bad!"), ["bad", "movie", "really", "bad"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("it's 10/10"), ["it", "s", "10", "10"]);
        assert!(tokenize(" ,.;  !!").is_empty());
    }

    #[test]
    fn ngrams_up_to_three() {
        let toks = tokenize("a b c");
        assert_eq!(ngrams(&toks, 1, 3), ["a", "b", "c", "a b", "b c", "a b c"]);
        assert_eq!(ngrams(&toks[..1], 1, 3), ["a"]);
        assert_eq!(ngrams(&toks, 2, 2), ["a b", "b c"]);
    }
}
