//! Deterministic overlap reader.
//!
//! Every contiguous window of at most `w` context tokens is scored by the number of
//! distinct question content terms it contains, divided by `w`. Candidates are
//! ordered by score (descending), then start offset, then length, and taken
//! greedily while skipping any that overlap an already kept span.

use std::collections::HashSet;

use super::{stopwords::is_stopword, AnswerSpan, ReaderError};
use crate::corpus::{char_slice, terms, tokenize};

pub const DEFAULT_WINDOW: usize = 15;
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Candidate {
    hits: usize,
    char_start: usize,
    char_end: usize,
}

impl Candidate {
    fn overlaps(&self, other: &Candidate) -> bool {
        self.char_start < other.char_end && other.char_start < self.char_end
    }
}

/// Question terms that count toward a window's score.
pub fn content_terms(question: &str) -> HashSet<String> {
    terms(question).into_iter().filter(|t| !is_stopword(t)).collect()
}

pub fn baseline_extract(
    question: &str,
    context: &str,
    window: usize,
    top_k: usize,
) -> Result<Vec<AnswerSpan>, ReaderError> {
    if window == 0 {
        return Err(ReaderError::InvalidArgument("window must be at least 1".into()));
    }
    let tokens = tokenize(context);
    if tokens.is_empty() {
        return Err(ReaderError::EmptyContext);
    }
    let wanted = content_terms(question);

    let mut candidates = Vec::with_capacity(tokens.len() * window);
    let mut seen: HashSet<&str> = HashSet::new();
    for start in 0..tokens.len() {
        seen.clear();
        let last = (start + window).min(tokens.len());
        for tok in &tokens[start..last] {
            if wanted.contains(&tok.term) {
                seen.insert(&tok.term);
            }
            candidates.push(Candidate {
                hits: seen.len(),
                char_start: tokens[start].start,
                char_end: tok.end,
            });
        }
    }
    candidates.sort_by(|a, b| {
        b.hits
            .cmp(&a.hits)
            .then(a.char_start.cmp(&b.char_start))
            .then(a.char_end.cmp(&b.char_end))
    });

    let mut kept: Vec<Candidate> = Vec::with_capacity(top_k);
    for cand in candidates {
        if kept.len() == top_k {
            break;
        }
        if kept.iter().all(|k| !k.overlaps(&cand)) {
            kept.push(cand);
        }
    }

    Ok(kept
        .into_iter()
        .map(|c| AnswerSpan {
            text: char_slice(context, c.char_start, c.char_end)
                .expect("token offsets lie inside the context")
                .to_string(),
            char_start: c.char_start,
            char_end: c.char_end,
            score: c.hits as f64 / window as f64,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incubation_example() {
        let context = "the incubation period is 14 days";
        let spans = baseline_extract("incubation period of the virus", context, 3, 3).unwrap();
        let top = &spans[0];
        assert_eq!(top.score, 2.0 / 3.0);
        assert!(top.text.contains("incubation period"));
        // equal-score windows "the incubation period" and "incubation period is";
        // the earlier start wins
        assert_eq!(top.text, "the incubation period");
        assert_eq!((top.char_start, top.char_end), (0, 21));
    }

    #[test]
    fn no_shared_terms_falls_back_to_earliest_window() {
        let spans = baseline_extract("masks", "the incubation period is 14 days", 3, 1).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].score, 0.0);
        assert_eq!(spans[0].text, "the");
    }

    #[test]
    fn kept_spans_do_not_overlap() {
        let context = "virus virus spread spread virus masks virus";
        let spans = baseline_extract("virus spread masks", context, 4, 5).unwrap();
        for (i, a) in spans.iter().enumerate() {
            assert_eq!(char_slice(context, a.char_start, a.char_end).unwrap(), a.text);
            for b in &spans[i + 1..] {
                assert!(a.char_end <= b.char_start || b.char_end <= a.char_start);
            }
        }
        assert!(spans.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn top_k_bounds_output() {
        let spans = baseline_extract("virus", "virus one virus two virus", 2, 1).unwrap();
        assert_eq!(spans.len(), 1);
        assert!(baseline_extract("virus", "virus", 2, 0).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(baseline_extract("q", "", 3, 1), Err(ReaderError::EmptyContext)));
        assert!(matches!(baseline_extract("q", "...", 3, 1), Err(ReaderError::EmptyContext)));
        assert!(matches!(
            baseline_extract("q", "text", 0, 1),
            Err(ReaderError::InvalidArgument(_))
        ));
    }

    #[test]
    fn stopwords_do_not_score() {
        let spans = baseline_extract("what is the", "the the is", 3, 1).unwrap();
        assert_eq!(spans[0].score, 0.0);
    }
}
