use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{cosine, EmbeddingProvider, RetrievalError};
use crate::corpus::Article;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHit {
    pub article_id: String,
    pub title: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// Descending score, then ascending article id.
pub(crate) fn hit_order(a: &RankedHit, b: &RankedHit) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.article_id.cmp(&b.article_id))
}

/// Returns the `n` articles whose title embedding is most cosine-similar to the
/// query embedding.
pub fn rank_titles(
    query: &str,
    articles: &[Article],
    provider: &dyn EmbeddingProvider,
    n: usize,
) -> Result<Vec<RankedHit>, RetrievalError> {
    if n == 0 {
        return Err(RetrievalError::InvalidArgument("n must be at least 1".into()));
    }
    if articles.is_empty() {
        return Err(RetrievalError::InvalidArgument("no articles to rank".into()));
    }

    let mut texts: Vec<&str> = Vec::with_capacity(articles.len() + 1);
    texts.push(query);
    texts.extend(articles.iter().map(|a| a.title.as_str()));
    let vectors = provider.embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(RetrievalError::InvalidArgument(format!(
            "provider {} returned {} vectors for {} texts",
            provider.name(),
            vectors.len(),
            texts.len()
        )));
    }

    let (query_vec, title_vecs) = vectors.split_first().expect("query vector present");
    let mut hits = articles
        .iter()
        .zip(title_vecs)
        .map(|(article, v)| {
            Ok(RankedHit {
                article_id: article.id.clone(),
                title: article.title.clone(),
                score: cosine(query_vec, v)?,
                rank: 0,
            })
        })
        .collect::<Result<Vec<_>, RetrievalError>>()?;

    // partial selection, then sort only the head
    if hits.len() > n {
        hits.select_nth_unstable_by(n - 1, hit_order);
        hits.truncate(n);
    }
    hits.sort_by(hit_order);
    for (i, hit) in hits.iter_mut().enumerate() {
        hit.rank = i + 1;
    }
    Ok(hits)
}
