//! The two-party simulation protocol.
//!
//! Alice holds `a`, Bob holds `b`, both on `S_n`, and both know a shared
//! seed. Alice walks the shared candidate stream `λ_1, λ_2, …`, accepting
//! `λ_k` with probability `|a·λ_k|`, and sends Bob the accepted index in a
//! prefix-free code. Both then output `sgn(v·λ_i)` for their own vector. The
//! product of outputs has expectation `a·b` and each output has mean zero.

mod codec;
mod shared;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;
use crate::sphere::{accepts, GeometryError, RejectionSampler, UnitVector};

pub use codec::{BitString, Codec, CodecChoice, CodecError};
pub use shared::{derive_seed, AcceptStream, SharedRandomness};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("input vectors live on different spheres (S_{alice} vs S_{bob})")]
    DimensionMismatch { alice: usize, bob: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),
}

/// A ±1 measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_real<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }

    fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(deserializer)?;
        Sign::from_value(v)
            .ok_or_else(|| serde::de::Error::custom(format!("outcome {v} is not ±1")))
    }
}

/// `+1` if `v·λ ≥ 0`, else `−1`.
pub fn sign_output<T: Real>(
    v: &UnitVector<T>,
    lambda: &UnitVector<T>,
) -> Result<Sign, GeometryError> {
    Ok(if v.try_dot(lambda)? >= T::zero() {
        Sign::Plus
    } else {
        Sign::Minus
    })
}

/// Record of one protocol run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub seed: u64,
    pub n: usize,
    pub iteration: u64,
    pub message_bits: BitString,
    /// `None` for the post-selected variant, which sends nothing.
    pub codec: Option<Codec>,
    pub output_a: Sign,
    pub output_b: Sign,
}

/// One JSON line: `{"seed","n","i","bits","A","B","codec"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub seed: u64,
    pub n: usize,
    pub i: u64,
    pub bits: String,
    #[serde(rename = "A")]
    pub a: Sign,
    #[serde(rename = "B")]
    pub b: Sign,
    pub codec: String,
}

impl Transcript {
    pub fn to_record(&self) -> TranscriptRecord {
        TranscriptRecord {
            seed: self.seed,
            n: self.n,
            i: self.iteration,
            bits: self.message_bits.to_string(),
            a: self.output_a,
            b: self.output_b,
            codec: self.codec.map_or_else(|| "none".to_string(), |c| c.id()),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("transcript record serializes")
    }

    /// Parses a JSON line and checks that the bits decode to `i`.
    pub fn from_json_line(line: &str) -> Result<Self, ProtocolError> {
        let rec: TranscriptRecord = serde_json::from_str(line)
            .map_err(|e| ProtocolError::MalformedTranscript(e.to_string()))?;
        let message_bits: BitString = rec.bits.parse()?;
        let codec = match rec.codec.as_str() {
            "none" => None,
            other => Some(other.parse::<Codec>()?),
        };
        match codec {
            Some(c) => {
                let decoded = c.decode(&message_bits)?;
                if decoded != rec.i {
                    return Err(ProtocolError::MalformedTranscript(format!(
                        "bits decode to {decoded}, record says {}",
                        rec.i
                    )));
                }
            }
            None if !message_bits.is_empty() || rec.i != 1 => {
                return Err(ProtocolError::MalformedTranscript(
                    "codec-less transcript must be a single silent trial".into(),
                ));
            }
            None => {}
        }
        Ok(Self {
            seed: rec.seed,
            n: rec.n,
            iteration: rec.i,
            message_bits,
            codec,
            output_a: rec.a,
            output_b: rec.b,
        })
    }
}

/// What Alice produces: her output and the message for Bob.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceMessage {
    pub iteration: u64,
    pub bits: BitString,
    pub output: Sign,
}

/// Alice's side: her vector and the shared randomness.
#[derive(Debug, Clone, Copy)]
pub struct Alice<'a, T> {
    input: &'a UnitVector<T>,
    shared: &'a SharedRandomness,
}

impl<'a, T: Real> Alice<'a, T> {
    pub fn new(input: &'a UnitVector<T>, shared: &'a SharedRandomness) -> Self {
        Self { input, shared }
    }

    pub fn act(
        &self,
        codec: Codec,
        sampler: &RejectionSampler,
    ) -> Result<AliceMessage, ProtocolError> {
        let n = self.input.sphere_dim();
        let mut coins = self.shared.accept_stream();
        let res = sampler.sample_with(
            self.input,
            |k| self.shared.lambda_at(n, k),
            || coins.next_uniform(),
        )?;
        Ok(AliceMessage {
            iteration: res.iterations,
            bits: codec.encode(res.iterations)?,
            output: sign_output(self.input, &res.sample)?,
        })
    }
}

/// Bob's side. Sees only his vector, the shared seed and the wire bits.
pub fn bob_output<T: Real>(
    input: &UnitVector<T>,
    seed: u64,
    bits: &BitString,
    codec: Codec,
) -> Result<Sign, ProtocolError> {
    let i = codec.decode(bits)?;
    let lambda = SharedRandomness::new(seed).lambda_at(input.sphere_dim(), i)?;
    Ok(sign_output(input, &lambda)?)
}

/// Protocol parameters: message code and rejection cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Protocol {
    pub codec: Codec,
    pub sampler: RejectionSampler,
}

impl Protocol {
    pub fn new(codec: Codec) -> Self {
        Self {
            codec,
            sampler: RejectionSampler::default(),
        }
    }

    pub fn run<T: Real>(
        &self,
        a: &UnitVector<T>,
        b: &UnitVector<T>,
        shared: &SharedRandomness,
    ) -> Result<Transcript, ProtocolError> {
        check_same_sphere(a, b)?;
        let msg = Alice::new(a, shared).act(self.codec, &self.sampler)?;
        let output_b = bob_output(b, shared.seed(), &msg.bits, self.codec)?;
        Ok(Transcript {
            seed: shared.seed(),
            n: a.sphere_dim(),
            iteration: msg.iteration,
            message_bits: msg.bits,
            codec: Some(self.codec),
            output_a: msg.output,
            output_b,
        })
    }
}

fn check_same_sphere<T: Real>(a: &UnitVector<T>, b: &UnitVector<T>) -> Result<(), ProtocolError> {
    if a.sphere_dim() != b.sphere_dim() {
        return Err(ProtocolError::DimensionMismatch {
            alice: a.sphere_dim(),
            bob: b.sphere_dim(),
        });
    }
    Ok(())
}

/// Runs the communicating protocol with the default iteration cap.
pub fn run_protocol<T: Real>(
    a: &UnitVector<T>,
    b: &UnitVector<T>,
    shared: &SharedRandomness,
    codec: Codec,
) -> Result<Transcript, ProtocolError> {
    Protocol::new(codec).run(a, b, shared)
}

/// Result of the single-trial, abort-on-reject variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PostselectedOutcome {
    Accepted(Transcript),
    Aborted,
}

impl PostselectedOutcome {
    pub fn transcript(&self) -> Option<&Transcript> {
        match self {
            PostselectedOutcome::Accepted(t) => Some(t),
            PostselectedOutcome::Aborted => None,
        }
    }
}

/// One rejection trial on `λ_1`; no communication. Aborts on reject.
pub fn run_postselected<T: Real>(
    a: &UnitVector<T>,
    b: &UnitVector<T>,
    shared: &SharedRandomness,
) -> Result<PostselectedOutcome, ProtocolError> {
    check_same_sphere(a, b)?;
    let n = a.sphere_dim();
    let lambda = shared.lambda_at(n, 1)?;
    let u: T = shared.accept_stream().next_uniform();
    if !accepts(a, &lambda, u)? {
        return Ok(PostselectedOutcome::Aborted);
    }
    Ok(PostselectedOutcome::Accepted(Transcript {
        seed: shared.seed(),
        n,
        iteration: 1,
        message_bits: BitString::new(),
        codec: None,
        output_a: sign_output(a, &lambda)?,
        output_b: sign_output(b, &lambda)?,
    }))
}
