//! Binary model file: the magic line `LDAF1\n`, a one-line JSON header terminated
//! by `\n`, then `K * V` little-endian `f64`s of phi in row-major order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{TopicError, TopicModel};

pub const MODEL_MAGIC: &[u8] = b"LDAF1\n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    #[serde(rename = "K")]
    pub topics: usize,
    #[serde(rename = "V")]
    pub vocab_size: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub rng: String,
    pub vocab_hash: String,
}

pub fn write_model<W: Write>(model: &TopicModel, mut out: W) -> Result<(), TopicError> {
    let header = ModelHeader {
        topics: model.topics,
        vocab_size: model.vocab_size,
        alpha: model.alpha,
        beta: model.beta,
        seed: model.seed,
        iterations: model.iterations,
        rng: model.rng.clone(),
        vocab_hash: model.vocab_hash.clone(),
    };
    out.write_all(MODEL_MAGIC)?;
    serde_json::to_writer(&mut out, &header).map_err(|e| TopicError::Format(e.to_string()))?;
    out.write_all(b"\n")?;
    for x in &model.phi {
        out.write_all(&x.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_model<R: BufRead>(mut input: R) -> Result<TopicModel, TopicError> {
    let mut magic = [0u8; 6];
    input
        .read_exact(&mut magic)
        .map_err(|_| TopicError::Format("truncated magic".into()))?;
    if magic != MODEL_MAGIC {
        return Err(TopicError::Format("bad magic".into()));
    }

    let mut line = Vec::new();
    input.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(TopicError::Format("unterminated header".into()));
    }
    let header: ModelHeader =
        serde_json::from_slice(&line).map_err(|e| TopicError::Format(format!("header: {e}")))?;

    let expected = header
        .topics
        .checked_mul(header.vocab_size)
        .ok_or_else(|| TopicError::Format("K * V overflows".into()))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != expected * 8 {
        return Err(TopicError::Format(format!(
            "expected {} phi bytes, found {}",
            expected * 8,
            bytes.len()
        )));
    }
    let phi: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    if phi.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(TopicError::Format("phi has negative or non-finite entries".into()));
    }

    Ok(TopicModel {
        topics: header.topics,
        vocab_size: header.vocab_size,
        alpha: header.alpha,
        beta: header.beta,
        seed: header.seed,
        iterations: header.iterations,
        rng: header.rng,
        vocab_hash: header.vocab_hash,
        phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> TopicModel {
        TopicModel {
            topics: 2,
            vocab_size: 3,
            alpha: 0.5,
            beta: 0.01,
            seed: 11,
            iterations: 40,
            rng: "chacha8".into(),
            vocab_hash: "abc".into(),
            phi: vec![0.5, 0.25, 0.25, 0.1, 0.1, 0.8],
        }
    }

    #[test]
    fn layout() {
        let mut buf = Vec::new();
        write_model(&model(), &mut buf).unwrap();
        assert!(buf.starts_with(b"LDAF1\n{\"K\":2,\"V\":3,"));
        let header_end = buf[6..].iter().position(|&b| b == b'\n').unwrap() + 7;
        assert_eq!(buf.len() - header_end, 6 * 8);
        assert_eq!(&buf[header_end..header_end + 8], &0.5f64.to_le_bytes());
        assert_eq!(read_model(&buf[..]).unwrap(), model());
    }

    #[test]
    fn rejects_corruption() {
        let mut buf = Vec::new();
        write_model(&model(), &mut buf).unwrap();
        assert!(read_model(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_model(&bad[..]).is_err());
        assert!(read_model(&b"LDAF1\n{\"K\":2"[..]).is_err());
    }
}
