use num_complex::Complex64;
use crate::error::{Error, Result};

/// Gray-labelled square QAM with unit average energy.
///
/// Each axis carries half of the bits: the first bit of an axis selects the
/// sign (`0` positive) and, for 16-QAM, the second selects the level (`0`
/// outer). The in-phase axis takes the leading bits.
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    points: Vec<Complex64>,
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if order != 4 && order != 16 {
            return Err(Error::invalid(format!("unsupported QAM order {order}")));
        }
        let bits = order.trailing_zeros() as usize;
        let points = (0..order)
            .map(|label| {
                let b: Vec<u8> = (0..bits).map(|i| ((label >> (bits - 1 - i)) & 1) as u8).collect();
                point_for(&b, order)
            })
            .collect();
        Ok(Self { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Points indexed by their bit label read MSB-first.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.bits_per_symbol();
        if bits.len() % k != 0 {
            return Err(Error::invalid(format!(
                "{} bits is not a multiple of {k}",
                bits.len()
            )));
        }
        Ok(bits.chunks(k).map(|c| point_for(c, self.order)).collect())
    }

    /// Index of the nearest constellation point.
    pub fn nearest(&self, y: Complex64) -> usize {
        let (i_bits, q_bits) = (axis_decide(y.re, self.order), axis_decide(y.im, self.order));
        let half = self.bits_per_symbol() / 2;
        (i_bits << half) | q_bits
    }

    pub fn decide(&self, y: Complex64) -> Complex64 {
        self.points[self.nearest(y)]
    }

    pub fn demap_hard(&self, symbols: &[Complex64]) -> Vec<u8> {
        let k = self.bits_per_symbol();
        symbols
            .iter()
            .flat_map(|y| {
                let label = self.nearest(*y);
                (0..k).map(move |i| ((label >> (k - 1 - i)) & 1) as u8)
            })
            .collect()
    }

    /// Max-log LLRs, `log P(b = 0) / P(b = 1)`; positive favours `0`.
    pub fn demap_soft(&self, symbols: &[Complex64], noise_var: f64) -> Result<Vec<f64>> {
        if !(noise_var > 0.0) {
            return Err(Error::invalid("soft demapping needs a positive noise variance"));
        }
        let k = self.bits_per_symbol();
        let mut out = Vec::with_capacity(symbols.len() * k);
        for y in symbols {
            let d: Vec<f64> = self.points.iter().map(|p| (y - p).norm_sqr()).collect();
            for i in 0..k {
                let mask = 1 << (k - 1 - i);
                let (mut d0, mut d1) = (f64::INFINITY, f64::INFINITY);
                for (label, dist) in d.iter().enumerate() {
                    if label & mask == 0 {
                        d0 = d0.min(*dist);
                    } else {
                        d1 = d1.min(*dist);
                    }
                }
                out.push((d1 - d0) / noise_var);
            }
        }
        Ok(out)
    }
}

fn axis_level(bits: &[u8]) -> f64 {
    let sign = if bits[0] == 0 { 1.0 } else { -1.0 };
    match bits.len() {
        1 => sign,
        _ => sign * if bits[1] == 0 { 3.0 } else { 1.0 },
    }
}

fn point_for(bits: &[u8], order: usize) -> Complex64 {
    let half = bits.len() / 2;
    let scale = if order == 4 {
        std::f64::consts::FRAC_1_SQRT_2
    } else {
        1.0 / 10f64.sqrt()
    };
    Complex64::new(axis_level(&bits[..half]), axis_level(&bits[half..])) * scale
}

fn axis_decide(v: f64, order: usize) -> usize {
    let sign = usize::from(v < 0.0);
    if order == 4 {
        return sign;
    }
    let inner = usize::from(v.abs() < 2.0 / 10f64.sqrt());
    (sign << 1) | inner
}
