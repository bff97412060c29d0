use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Hard,
    Soft,
}

/// Rate-1/2 feedforward convolutional code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    pub constraint_length: usize,
    /// Generator polynomials in octal notation read as integers, e.g. `0o133`.
    pub generators: [u32; 2],
    pub decoder: DecoderKind,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            constraint_length: 7,
            generators: [0o133, 0o171],
            decoder: DecoderKind::Soft,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.constraint_length;
        if !(2..=16).contains(&k) {
            return Err(Error::invalid(format!("constraint length {k} out of range")));
        }
        for g in self.generators {
            if g >> (k - 1) != 1 {
                return Err(Error::invalid(format!(
                    "generator {g:o} does not have degree {}",
                    k - 1
                )));
            }
        }
        Ok(())
    }

    pub fn memory(&self) -> usize {
        self.constraint_length - 1
    }

    /// Coded length for `info_bits` information bits, zero-terminated.
    pub fn coded_len(&self, info_bits: usize) -> usize {
        2 * (info_bits + self.memory())
    }

    /// Largest information block fitting in `coded_bits`.
    pub fn info_len_for(&self, coded_bits: usize) -> usize {
        (coded_bits / 2).saturating_sub(self.memory())
    }

    fn outputs(&self, reg: u32) -> [u8; 2] {
        self.generators.map(|g| ((g & reg).count_ones() & 1) as u8)
    }
}

/// Zero-terminated encoding. The newest input bit occupies the generator's
/// most significant tap.
pub fn conv_encode(bits: &[u8], codec: &CodecConfig) -> Result<Vec<u8>> {
    codec.validate()?;
    let m = codec.memory();
    let mut state = 0u32;
    let mut out = Vec::with_capacity(codec.coded_len(bits.len()));
    for &b in bits.iter().chain(std::iter::repeat_n(&0u8, m)) {
        if b > 1 {
            return Err(Error::invalid("bits must be 0 or 1"));
        }
        let reg = (u32::from(b) << m) | state;
        out.extend(codec.outputs(reg));
        state = reg >> 1;
    }
    Ok(out)
}

/// Decoder input: hard bits or LLRs (`log P(0)/P(1)`).
#[derive(Debug, Clone, Copy)]
pub enum DecoderInput<'a> {
    Hard(&'a [u8]),
    Soft(&'a [f64]),
}

impl DecoderInput<'_> {
    fn len(&self) -> usize {
        match self {
            DecoderInput::Hard(b) => b.len(),
            DecoderInput::Soft(l) => l.len(),
        }
    }

    /// Branch reward of emitting `bit` at position `i` (higher is better).
    fn reward(&self, i: usize, bit: u8) -> f64 {
        match self {
            DecoderInput::Hard(b) => {
                if b[i] == bit {
                    0.0
                } else {
                    -1.0
                }
            }
            DecoderInput::Soft(l) => {
                if bit == 0 {
                    l[i]
                } else {
                    -l[i]
                }
            }
        }
    }
}

/// Maximum-likelihood sequence decoding ending in the zero state.
pub fn viterbi_decode(input: DecoderInput<'_>, codec: &CodecConfig) -> Result<Vec<u8>> {
    codec.validate()?;
    if input.len() % 2 != 0 || input.len() < 2 * codec.memory() {
        return Err(Error::invalid(format!(
            "decoder input length {} is not a zero-terminated rate-1/2 codeword",
            input.len()
        )));
    }
    let m = codec.memory();
    let states = 1usize << m;
    let steps = input.len() / 2;
    let branch: Vec<[[u8; 2]; 2]> = (0..states)
        .map(|s| [0u32, 1].map(|b| codec.outputs((b << m) | s as u32)))
        .collect();

    let mut metric = vec![f64::NEG_INFINITY; states];
    metric[0] = 0.0;
    let mut next = vec![f64::NEG_INFINITY; states];
    // predecessor state per (step, state)
    let mut back = vec![0u32; steps * states];
    for t in 0..steps {
        next.fill(f64::NEG_INFINITY);
        let r: [[f64; 2]; 2] = [0, 1].map(|k| [0u8, 1].map(|bit| input.reward(2 * t + k, bit)));
        for (s, &pm) in metric.iter().enumerate() {
            if pm == f64::NEG_INFINITY {
                continue;
            }
            for b in 0..2u32 {
                let out = branch[s][b as usize];
                let ns = (((b << m) | s as u32) >> 1) as usize;
                let cand = pm + r[0][out[0] as usize] + r[1][out[1] as usize];
                if cand > next[ns] {
                    next[ns] = cand;
                    back[t * states + ns] = s as u32;
                }
            }
        }
        std::mem::swap(&mut metric, &mut next);
    }

    let mut state = 0usize;
    let mut decoded = vec![0u8; steps];
    for t in (0..steps).rev() {
        // the input bit that led into `state` is its most significant bit
        decoded[t] = ((state >> (m - 1)) & 1) as u8;
        state = back[t * states + state] as usize;
    }
    decoded.truncate(steps - m);
    Ok(decoded)
}

/// Bit error rate between equal-length bit vectors.
pub fn ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    check_len(tx.len(), rx.len())?;
    if tx.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(bit_errors(tx, rx) as f64 / tx.len() as f64)
}

pub(crate) fn bit_errors(tx: &[u8], rx: &[u8]) -> usize {
    tx.iter().zip(rx).filter(|(a, b)| a != b).count()
}

/// Uniform random permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(rng);
        Self { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `out[i] = x[perm[i]]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.perm.len(), x.len())?;
        Ok(self.perm.iter().map(|&p| x[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.perm.len(), x.len())?;
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_bits(n: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    #[test]
    fn all_zero_codeword() {
        let c = CodecConfig::default();
        let out = conv_encode(&[0; 50], &c).unwrap();
        assert_eq!(out.len(), 2 * 56);
        assert!(out.iter().all(|b| *b == 0));
    }

    #[test]
    fn impulse_response_matches_generators() {
        // 133 = 1 011 011, 171 = 1 111 001 read from the newest tap
        let c = CodecConfig::default();
        let out = conv_encode(&[1], &c).unwrap();
        let pairs: Vec<(u8, u8)> = out.chunks(2).map(|p| (p[0], p[1])).collect();
        assert_eq!(pairs, vec![(1, 1), (0, 1), (1, 1), (1, 1), (0, 0), (1, 0), (1, 1)]);
    }

    #[test]
    fn encoder_is_linear() {
        let c = CodecConfig::default();
        let (a, b) = (random_bits(100, 1), random_bits(100, 2));
        let x: Vec<u8> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
        let (ea, eb, ex) = (conv_encode(&a, &c).unwrap(), conv_encode(&b, &c).unwrap(), conv_encode(&x, &c).unwrap());
        assert!(ea.iter().zip(&eb).zip(&ex).all(|((p, q), r)| p ^ q == *r));
    }

    #[test]
    fn clean_round_trip_hard_and_soft() {
        let c = CodecConfig::default();
        let bits = random_bits(10_000, 3);
        let code = conv_encode(&bits, &c).unwrap();
        assert_eq!(viterbi_decode(DecoderInput::Hard(&code), &c).unwrap(), bits);
        let llr: Vec<f64> = code.iter().map(|b| if *b == 0 { 2.0 } else { -2.0 }).collect();
        assert_eq!(viterbi_decode(DecoderInput::Soft(&llr), &c).unwrap(), bits);
    }

    #[test]
    fn corrects_sparse_errors() {
        // free distance 10 corrects any 4 errors spread far apart
        let c = CodecConfig::default();
        let bits = random_bits(500, 4);
        let mut code = conv_encode(&bits, &c).unwrap();
        for i in [10, 200, 480, 900] {
            code[i] ^= 1;
        }
        assert_eq!(viterbi_decode(DecoderInput::Hard(&code), &c).unwrap(), bits);
    }

    #[test]
    fn hard_decoder_is_maximum_likelihood_on_tiny_code() {
        // exhaustive search over all 2^6 messages for the nearest codeword
        let c = CodecConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let received: Vec<u8> = (0..2 * (6 + 6)).map(|_| rng.random_range(0..2u8)).collect();
            let best = (0..64u32)
                .map(|msg| {
                    let bits: Vec<u8> = (0..6).map(|i| ((msg >> i) & 1) as u8).collect();
                    let d = bit_errors(&conv_encode(&bits, &c).unwrap(), &received);
                    (d, bits)
                })
                .min_by_key(|(d, _)| *d)
                .unwrap()
                .0;
            let dec = viterbi_decode(DecoderInput::Hard(&received), &c).unwrap();
            assert_eq!(bit_errors(&conv_encode(&dec, &c).unwrap(), &received), best);
        }
    }

    #[test]
    fn length_errors() {
        let c = CodecConfig::default();
        assert!(viterbi_decode(DecoderInput::Hard(&[0; 13]), &c).is_err());
        assert!(viterbi_decode(DecoderInput::Hard(&[0; 10]), &c).is_err());
        assert!(conv_encode(&[2], &c).is_err());
        let bad = CodecConfig {
            generators: [0o33, 0o171],
            ..c
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ber_cases() {
        let a = random_bits(1000, 6);
        let flipped: Vec<u8> = a.iter().map(|b| b ^ 1).collect();
        let half: Vec<u8> = a.iter().enumerate().map(|(i, b)| if i % 2 == 0 { b ^ 1 } else { *b }).collect();
        assert_eq!(ber(&a, &a).unwrap(), 0.0);
        assert_eq!(ber(&a, &flipped).unwrap(), 1.0);
        assert_eq!(ber(&a, &half).unwrap(), 0.5);
        assert!(ber(&a, &a[1..]).is_err());
    }

    #[test]
    fn interleaver_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let il = Interleaver::random(100, &mut rng);
        let x: Vec<f64> = (0..100).map(|v| v as f64).collect();
        let y = il.interleave(&x).unwrap();
        assert_ne!(x, y);
        assert_eq!(il.deinterleave(&y).unwrap(), x);
        assert_eq!(Interleaver::random(100, &mut ChaCha8Rng::seed_from_u64(7)), il);
    }
}
