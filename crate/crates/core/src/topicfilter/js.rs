use super::{check_probability, TopicError};

/// KL(p || q) in bits, with `0 log 0 = 0`. Terms where `q` is zero and `p` is not
/// give `+inf`.
pub fn kl_divergence_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi * (pi / qi).log2())
        .sum()
}

/// Jensen-Shannon distance in base 2: the square root of the JS divergence, in `[0, 1]`.
pub fn js_distance(p: &[f64], q: &[f64]) -> Result<f64, TopicError> {
    if p.len() != q.len() {
        return Err(TopicError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_probability(p)?;
    check_probability(q)?;

    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
    let divergence = (kl_divergence_bits(p, &m) + kl_divergence_bits(q, &m)) / 2.0;
    // rounding can push the divergence a hair outside [0, 1]
    Ok(divergence.clamp(0.0, 1.0).sqrt())
}
