use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use litqa::corpus::{TokenizedDoc, Vocabulary};
use litqa::topicfilter::{fit_lda, infer_doc_topics, LdaParams, TopicModel};

const A: [&str; 10] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
const B: [&str; 10] = ["k", "l", "m", "n", "o", "p", "q", "r", "s", "t"];

fn draw(rng: &mut ChaCha8Rng, words: &[&str], n: usize) -> String {
    (0..n).map(|_| *words.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn synthetic() -> (Vocabulary, TopicModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut vocab = Vocabulary::new();
    let mut docs = Vec::new();
    for d in 0..40 {
        docs.push(TokenizedDoc::build(format!("a{d}"), &draw(&mut rng, &A, 50), &mut vocab));
    }
    for d in 0..40 {
        docs.push(TokenizedDoc::build(format!("b{d}"), &draw(&mut rng, &B, 50), &mut vocab));
    }
    let params = LdaParams { topics: 2, alpha: 0.1, beta: 0.01, iterations: 200, seed: 5 };
    let model = fit_lda(&docs, &vocab, params).unwrap();
    (vocab, model)
}

fn half_mass(model: &TopicModel, vocab: &Vocabulary, k: usize, words: &[&str]) -> f64 {
    words.iter().map(|w| model.phi(k, vocab.index_of(w).unwrap())).sum()
}

#[test]
fn topics_concentrate_on_their_vocabulary_half() {
    let (vocab, model) = synthetic();
    let a_topic = if half_mass(&model, &vocab, 0, &A) > 0.5 { 0 } else { 1 };
    assert!(half_mass(&model, &vocab, a_topic, &A) >= 0.95);
    assert!(half_mass(&model, &vocab, 1 - a_topic, &B) >= 0.95);
    for k in 0..2 {
        let s: f64 = model.phi_row(k).iter().sum();
        assert!((s - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn fold_in_of_a_pure_topic_document() {
    let (vocab, model) = synthetic();
    let a_topic = if half_mass(&model, &vocab, 0, &A) > 0.5 { 0 } else { 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let doc = TokenizedDoc::lookup("new", &draw(&mut rng, &A, 30), &vocab);
    let theta = infer_doc_topics(&model, &doc, 50, 1).unwrap();
    assert!((theta.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    assert!(theta[a_topic] >= 0.9, "{theta:?}");
    assert_eq!(theta, infer_doc_topics(&model, &doc, 50, 1).unwrap());
}
