//! Lowercased alphanumeric-run tokenizer shared by every stage of the pipeline.
//!
//! Offsets are measured in Unicode scalar values (`char`s), not bytes, so that they
//! line up with the character offsets used on the reader wire protocol.

use serde::{Deserialize, Serialize};

/// One token of the source text. `start..end` is a half-open char range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub term: String,
    pub start: usize,
    pub end: usize,
}

/// Splits `text` into maximal runs of alphanumeric characters and lowercases each run.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run: Option<(usize, usize)> = None; // (char start, byte start)

    for (char_pos, (byte_pos, ch)) in text.char_indices().enumerate() {
        match (ch.is_alphanumeric(), run) {
            (true, None) => run = Some((char_pos, byte_pos)),
            (false, Some((start, byte_start))) => {
                tokens.push(Token {
                    term: text[byte_start..byte_pos].to_lowercase(),
                    start,
                    end: char_pos,
                });
                run = None;
            }
            _ => {}
        }
    }
    if let Some((start, byte_start)) = run {
        tokens.push(Token {
            term: text[byte_start..].to_lowercase(),
            start,
            end: start + text[byte_start..].chars().count(),
        });
    }
    tokens
}

/// Convenience for callers that only need the terms.
pub fn terms(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.term).collect()
}

/// Returns the substring covering chars `start..end`, or `None` when the range is
/// inverted or runs past the end of `text`.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let byte_start = indices.nth(start)?;
    let byte_end = if end == start {
        byte_start
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&text[byte_start..byte_end])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Walks the text one char at a time and cuts on every non-alphanumeric char.
    fn char_walk(text: &str) -> Vec<(String, usize, usize)> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_alphanumeric() {
                let j = (i..chars.len()).find(|&j| !chars[j].is_alphanumeric()).unwrap_or(chars.len());
                let raw: String = chars[i..j].iter().collect();
                out.push((raw.to_lowercase(), i, j));
                i = j;
            } else {
                i += 1;
            }
        }
        out
    }

    fn triples(text: &str) -> Vec<(String, usize, usize)> {
        tokenize(text).into_iter().map(|t| (t.term, t.start, t.end)).collect()
    }

    #[test]
    fn keyword_phrase() {
        let expected = vec![
            ("rna".to_string(), 0, 3),
            ("virus".to_string(), 4, 9),
            ("clinical".to_string(), 11, 19),
        ];
        assert_eq!(triples("RNA virus, clinical"), expected);
        assert_eq!(char_walk("RNA virus, clinical"), expected);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" ,.-").is_empty());
    }

    #[test]
    fn hyphen_separates() {
        assert_eq!(
            triples("COVID-19"),
            vec![("covid".to_string(), 0, 5), ("19".to_string(), 6, 8)]
        );
    }

    #[test]
    fn offsets_count_chars_not_bytes() {
        let toks = triples("β-coronavirus naïve");
        assert_eq!(
            toks,
            vec![
                ("β".to_string(), 0, 1),
                ("coronavirus".to_string(), 2, 13),
                ("naïve".to_string(), 14, 19),
            ]
        );
    }

    #[test]
    fn char_slice_bounds() {
        assert_eq!(char_slice("naïve x", 1, 4), Some("aïv"));
        assert_eq!(char_slice("abc", 3, 3), Some(""));
        assert_eq!(char_slice("abc", 2, 4), None);
        assert_eq!(char_slice("abc", 2, 1), None);
    }

    proptest! {
        #[test]
        fn matches_char_walk(text in "[a-zA-Z0-9éÉßΣσ ,.\\-_()]{0,40}") {
            prop_assert_eq!(triples(&text), char_walk(&text));
        }

        #[test]
        fn round_trips_through_offsets(text in "[a-zA-Z0-9éÉßΣσ ,.\\-_()]{0,40}") {
            for tok in tokenize(&text) {
                let raw = char_slice(&text, tok.start, tok.end).unwrap();
                prop_assert_eq!(raw.to_lowercase(), tok.term);
            }
        }

        #[test]
        fn offsets_strictly_increase(text in "\\PC{0,40}") {
            let toks = tokenize(&text);
            for pair in toks.windows(2) {
                prop_assert!(pair[0].start < pair[0].end);
                prop_assert!(pair[0].end < pair[1].start);
            }
        }

        #[test]
        fn idempotent_on_terms(text in "[a-zA-Z0-9éÉßΣσ ,.\\-_()]{0,40}") {
            for tok in tokenize(&text) {
                let again = triples(&tok.term);
                prop_assert_eq!(again, vec![(tok.term.clone(), 0, tok.term.chars().count())]);
            }
        }
    }
}
