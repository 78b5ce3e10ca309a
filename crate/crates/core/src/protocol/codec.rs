//! Prefix-free codes for the accepted iteration index `i ≥ 1`.
//!
//! All three codes write their unary part as zeros terminated by a one:
//!
//! * unary: `i − 1` zeros, then `1`.
//! * Elias gamma: `⌊log₂ i⌋` zeros, then `i` in binary (MSB first).
//! * Golomb(M): `q = (i−1) / M` in unary, then `r = (i−1) mod M` in
//!   truncated binary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("malformed message bits: {0}")]
    MalformedBits(String),
    #[error("iteration index must be at least 1")]
    ZeroIteration,
    #[error("unknown codec `{0}` (expected unary, elias-gamma, golomb or golomb(M))")]
    UnknownCodec(String),
}

/// Bit string as sent on the wire, MSB first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    fn push_unary(&mut self, zeros: u64) {
        self.0.extend(std::iter::repeat_n(false, zeros as usize));
        self.0.push(true);
    }

    fn push_binary(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            self.0.push((value >> k) & 1 == 1);
        }
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(CodecError::MalformedBits(format!(
                    "invalid character {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

struct Reader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl Reader<'_> {
    fn bit(&mut self) -> Result<bool, CodecError> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| CodecError::MalformedBits("truncated".into()))?;
        self.pos += 1;
        Ok(b)
    }

    fn unary(&mut self, max_zeros: u64) -> Result<u64, CodecError> {
        let mut zeros = 0u64;
        while !self.bit()? {
            zeros += 1;
            if zeros > max_zeros {
                return Err(CodecError::MalformedBits("unary run too long".into()));
            }
        }
        Ok(zeros)
    }

    fn binary(&mut self, width: u32) -> Result<u64, CodecError> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.bit()?);
        }
        Ok(v)
    }
}

/// Message code used for the iteration index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Codec {
    Unary,
    EliasGamma,
    Golomb { m: u64 },
}

impl Codec {
    /// Golomb code with `M = round(−1 / log₂(1 − p))`, at least 1.
    pub fn golomb_for<T: Real>(p: T) -> Self {
        let p = p.to_f64_lossy();
        let m = (-1.0 / (1.0 - p).log2()).round();
        let m = if m.is_finite() && m >= 1.0 {
            m as u64
        } else {
            1
        };
        Codec::Golomb { m }
    }

    /// Golomb code tuned to the acceptance probability on `S_n`.
    pub fn golomb_for_dimension(n: usize) -> Self {
        match crate::sphere::acceptance_probability::<f64>(n) {
            Ok(p) => Self::golomb_for(p),
            Err(_) => Codec::Golomb { m: 1 },
        }
    }

    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn encode(&self, i: u64) -> Result<BitString, CodecError> {
        if i == 0 {
            return Err(CodecError::ZeroIteration);
        }
        let mut out = BitString::new();
        match *self {
            Codec::Unary => out.push_unary(i - 1),
            Codec::EliasGamma => {
                let n = 63 - i.leading_zeros();
                out.push_unary(u64::from(n));
                out.push_binary(i, n);
            }
            Codec::Golomb { m } => {
                let x = i - 1;
                out.push_unary(x / m);
                let (b, cut) = truncated_params(m);
                let r = x % m;
                if m > 1 {
                    if r < cut {
                        out.push_binary(r, b - 1);
                    } else {
                        out.push_binary(r + cut, b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Length of `encode(i)` without materializing it.
    pub fn encoded_len(&self, i: u64) -> Result<usize, CodecError> {
        if i == 0 {
            return Err(CodecError::ZeroIteration);
        }
        Ok(match *self {
            Codec::Unary => i as usize,
            Codec::EliasGamma => 2 * (63 - i.leading_zeros()) as usize + 1,
            Codec::Golomb { m } => {
                let x = i - 1;
                let (b, cut) = truncated_params(m);
                let tail = if m == 1 {
                    0
                } else if x % m < cut {
                    b - 1
                } else {
                    b
                };
                (x / m) as usize + 1 + tail as usize
            }
        })
    }

    /// Decodes one codeword from the front of `bits`, returning the value
    /// and the number of bits consumed.
    pub fn decode_prefix(&self, bits: &[bool]) -> Result<(u64, usize), CodecError> {
        let mut rd = Reader { bits, pos: 0 };
        let value = match *self {
            Codec::Unary => rd.unary(u64::MAX - 1)? + 1,
            Codec::EliasGamma => {
                let n = rd.unary(63)?;
                let low = rd.binary(n as u32)?;
                (1u64 << n) | low
            }
            Codec::Golomb { m } => {
                let q = rd.unary(u64::MAX / m.max(1))?;
                let r = if m == 1 {
                    0
                } else {
                    let (b, cut) = truncated_params(m);
                    let v = rd.binary(b - 1)?;
                    if v < cut {
                        v
                    } else {
                        ((v << 1) | u64::from(rd.bit()?)) - cut
                    }
                };
                q.checked_mul(m)
                    .and_then(|x| x.checked_add(r + 1))
                    .ok_or_else(|| CodecError::MalformedBits("value overflows u64".into()))?
            }
        };
        Ok((value, rd.pos))
    }

    /// Decodes a complete message; trailing bits are an error.
    pub fn decode(&self, bits: &BitString) -> Result<u64, CodecError> {
        let (v, used) = self.decode_prefix(bits.bits())?;
        if used != bits.len() {
            return Err(CodecError::MalformedBits(format!(
                "{} trailing bits after codeword",
                bits.len() - used
            )));
        }
        Ok(v)
    }
}

/// `(b, 2^b − m)` with `b = ⌈log₂ m⌉`, for truncated binary.
fn truncated_params(m: u64) -> (u32, u64) {
    if m <= 1 {
        return (0, 0);
    }
    let b = 64 - (m - 1).leading_zeros();
    (b, (1u64 << b) - m)
}

impl fmt::Display for Codec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Codec::Unary => f.write_str("unary"),
            Codec::EliasGamma => f.write_str("elias-gamma"),
            Codec::Golomb { m } => write!(f, "golomb({m})"),
        }
    }
}

impl FromStr for Codec {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "unary" => return Ok(Codec::Unary),
            "elias-gamma" => return Ok(Codec::EliasGamma),
            _ => {}
        }
        s.strip_prefix("golomb(")
            .and_then(|rest| rest.strip_suffix(')'))
            .and_then(|m| m.parse::<u64>().ok())
            .filter(|&m| m >= 1)
            .map(|m| Codec::Golomb { m })
            .ok_or_else(|| CodecError::UnknownCodec(s.to_string()))
    }
}

impl Serialize for Codec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Codec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Codec selection before the sphere dimension is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CodecChoice {
    /// Golomb tuned to the acceptance probability of the run's dimension.
    #[default]
    GolombTuned,
    Fixed(Codec),
}

impl CodecChoice {
    pub fn resolve(&self, n: usize) -> Codec {
        match self {
            CodecChoice::GolombTuned => Codec::golomb_for_dimension(n),
            CodecChoice::Fixed(c) => *c,
        }
    }
}

impl fmt::Display for CodecChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecChoice::GolombTuned => f.write_str("golomb"),
            CodecChoice::Fixed(c) => c.fmt(f),
        }
    }
}

impl FromStr for CodecChoice {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "golomb" {
            Ok(CodecChoice::GolombTuned)
        } else {
            s.parse().map(CodecChoice::Fixed)
        }
    }
}

impl Serialize for CodecChoice {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CodecChoice {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn enc(c: Codec, i: u64) -> String {
        c.encode(i).unwrap().to_string()
    }

    #[test]
    fn elias_gamma_small_values() {
        assert_eq!(enc(Codec::EliasGamma, 1), "1");
        assert_eq!(enc(Codec::EliasGamma, 2), "010");
        assert_eq!(enc(Codec::EliasGamma, 3), "011");
        assert_eq!(enc(Codec::EliasGamma, 4), "00100");
        assert_eq!(
            Codec::EliasGamma.decode(&"011".parse().unwrap()).unwrap(),
            3
        );
    }

    #[test]
    fn unary_values() {
        assert_eq!(enc(Codec::Unary, 1), "1");
        assert_eq!(enc(Codec::Unary, 4), "0001");
    }

    #[test]
    fn golomb_values() {
        // M = 5: b = 3, cut = 3; remainders 0..2 take 2 bits, 3..4 take 3.
        let g = Codec::Golomb { m: 5 };
        assert_eq!(enc(g, 1), "100");
        assert_eq!(enc(g, 3), "110");
        assert_eq!(enc(g, 4), "1110");
        assert_eq!(enc(g, 5), "1111");
        assert_eq!(enc(g, 6), "0100");
        // M = 1 degenerates to unary.
        assert_eq!(enc(Codec::Golomb { m: 1 }, 4), "0001");
        // M = 4 is a Rice code: two remainder bits.
        assert_eq!(enc(Codec::Golomb { m: 4 }, 7), "0110");
    }

    #[test]
    fn golomb_parameter_from_acceptance() {
        // p(7) ≈ 0.2910 → −1/log₂(0.709) ≈ 2.01
        assert_eq!(Codec::golomb_for_dimension(7), Codec::Golomb { m: 2 });
        assert_eq!(Codec::golomb_for_dimension(31), Codec::Golomb { m: 5 });
        assert_eq!(Codec::golomb_for(0.9f64), Codec::Golomb { m: 1 });
    }

    #[test]
    fn malformed_inputs() {
        let g = Codec::EliasGamma;
        assert!(matches!(
            g.decode(&"00".parse().unwrap()),
            Err(CodecError::MalformedBits(_))
        ));
        assert!(matches!(
            g.decode(&"0101".parse().unwrap()),
            Err(CodecError::MalformedBits(_))
        ));
        assert!(matches!(g.encode(0), Err(CodecError::ZeroIteration)));
        assert!("01x".parse::<BitString>().is_err());
        assert!(Codec::Golomb { m: 3 }.decode(&BitString::new()).is_err());
    }

    #[test]
    fn identifiers_round_trip() {
        for c in [Codec::Unary, Codec::EliasGamma, Codec::Golomb { m: 7 }] {
            assert_eq!(c.id().parse::<Codec>().unwrap(), c);
        }
        assert!("golomb(0)".parse::<Codec>().is_err());
        assert!("huffman".parse::<Codec>().is_err());
        assert_eq!(
            "golomb".parse::<CodecChoice>().unwrap(),
            CodecChoice::GolombTuned
        );
        assert_eq!(CodecChoice::GolombTuned.resolve(7), Codec::Golomb { m: 2 });
    }

    fn any_codec() -> impl Strategy<Value = Codec> {
        prop_oneof![
            Just(Codec::EliasGamma),
            (1u64..40).prop_map(|m| Codec::Golomb { m }),
        ]
    }

    proptest! {
        #[test]
        fn round_trip_and_length(c in any_codec(), i in 1u64..1_000_000) {
            let bits = c.encode(i).unwrap();
            prop_assert_eq!(c.decode(&bits).unwrap(), i);
            prop_assert_eq!(c.encoded_len(i).unwrap(), bits.len());
            if c == Codec::EliasGamma {
                prop_assert_eq!(bits.len(), 2 * (63 - i.leading_zeros()) as usize + 1);
            }
        }

        #[test]
        fn concatenations_parse_uniquely(c in any_codec(), xs in proptest::collection::vec(1u64..5000, 1..8)) {
            let mut stream = BitString::new();
            for &x in &xs {
                stream.extend_from(&c.encode(x).unwrap());
            }
            let mut pos = 0;
            let mut out = Vec::new();
            while pos < stream.len() {
                let (v, used) = c.decode_prefix(&stream.bits()[pos..]).unwrap();
                out.push(v);
                pos += used;
            }
            prop_assert_eq!(out, xs);
        }

        #[test]
        fn unary_round_trip(i in 1u64..5000) {
            let bits = Codec::Unary.encode(i).unwrap();
            prop_assert_eq!(Codec::Unary.decode(&bits).unwrap(), i);
            prop_assert_eq!(bits.len() as u64, i);
        }
    }
}
