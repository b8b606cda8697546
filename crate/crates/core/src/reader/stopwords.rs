/// Version tag of [`STOPWORDS`]; bump whenever the list changes.
pub const STOPWORDS_VERSION: &str = "en-40-v1";

/// Function words ignored when matching question terms against a context.
pub const STOPWORDS: [&str; 40] = [
    "a", "an", "and", "are", "as", "at", "be", "by", "can", "do", "does", "for", "from", "has",
    "have", "how", "in", "is", "it", "its", "of", "on", "or", "that", "the", "their", "there",
    "these", "this", "to", "was", "were", "what", "when", "where", "which", "who", "why", "will",
    "with",
];

pub fn is_stopword(term: &str) -> bool {
    STOPWORDS.binary_search(&term).is_ok()
}
