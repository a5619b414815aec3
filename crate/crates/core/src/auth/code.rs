use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A binary codeword.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Codeword {
    pub bits: Vec<u8>,
}

impl Codeword {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Domain("codeword symbols must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Domain(format!("`{ch}` is not a bit"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self { bits })
    }
}

impl std::fmt::Display for Codeword {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Bit-wise application of `{0^ℓ 1^ℓ, 1^ℓ 0^ℓ}` to a `μ`-bit message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedRepetitionCode {
    pub ell: usize,
    pub mu: usize,
}

impl BalancedRepetitionCode {
    pub fn new(ell: usize, mu: usize) -> Result<Self> {
        if ell == 0 || mu == 0 {
            return Err(Error::config("code", "ell and mu must be positive"));
        }
        Ok(Self { ell, mu })
    }

    /// Codeword length `2ℓμ`.
    pub fn n(&self) -> usize {
        2 * self.ell * self.mu
    }

    /// The domination level guaranteed for this code, `⌈ℓ/4⌉`.
    pub fn guaranteed_lambda(&self) -> usize {
        self.ell.div_ceil(4)
    }

    pub fn encode(&self, message: &[u8]) -> Result<Codeword> {
        if message.len() != self.mu {
            return Err(Error::DimensionMismatch { expected: self.mu, got: message.len() });
        }
        let mut bits = Vec::with_capacity(self.n());
        for &m in message {
            if m > 1 {
                return Err(Error::Domain("message symbols must be 0 or 1".into()));
            }
            bits.extend(std::iter::repeat_n(m, self.ell));
            bits.extend(std::iter::repeat_n(1 - m, self.ell));
        }
        Ok(Codeword { bits })
    }

    /// All `2^μ` codewords, in message order.
    pub fn codewords(&self) -> Vec<Codeword> {
        (0..1usize << self.mu)
            .map(|v| {
                let msg: Vec<u8> = (0..self.mu).map(|i| ((v >> (self.mu - 1 - i)) & 1) as u8).collect();
                self.encode(&msg).expect("message has length mu")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_blocks() {
        let code = BalancedRepetitionCode::new(2, 2).unwrap();
        assert_eq!(code.encode(&[0, 1]).unwrap().to_string(), "00111100");
        assert_eq!(code.codewords().len(), 4);
        assert_eq!(code.guaranteed_lambda(), 1);
        assert_eq!(Codeword::parse("0110").unwrap().bits, vec![0, 1, 1, 0]);
    }
}
