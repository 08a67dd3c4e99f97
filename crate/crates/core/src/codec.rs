// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

//! Link-word framing and real-number encoding.
//!
//! Links only carry 32-bit integers. A message travels as a frame
//! `[src, dst, payload...]`. Reals are split at the decimal point into an
//! integer word and a fractional word scaled by [`FRAC_SCALE`]; a separate
//! tag word carries the sign, which the integer part alone loses for values
//! in `(-1, 0)`.

use std::fmt;

use thiserror::Error;

use crate::topology::CoreId;

/// One 32-bit link word.
pub type Word = u32;

/// Fractional digits carried by the decimal encoding.
pub const FRAC_SCALE: u32 = 1_000_000;

/// Magnitude bound for the decimal encoding, `2^31 - 1` (exclusive).
pub const MAX_ENCODABLE: f64 = 2_147_483_647.0;

/// Words added in front of every payload.
pub const HEADER_WORDS: usize = 2;

/// Words used by one encoded real: tag word plus two value words.
pub const REAL_WORDS: usize = 3;

const NEGATIVE_FLAG: Word = 1;
const TAG_SHIFT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("value {0} is outside the encodable range |v| < 2^31 - 1")]
    Overflow(f64),
    #[error("value {0} is not finite")]
    NotFinite(f64),
    #[error("fractional word {0} exceeds {FRAC_SCALE}")]
    MalformedFraction(Word),
    #[error("frame of {0} word(s) is shorter than the {HEADER_WORDS}-word header")]
    TruncatedFrame(usize),
    #[error("payload of {0} word(s) is not a whole number of encoded reals")]
    RaggedPayload(usize),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum CodecMode {
    /// Integer part and micro-units of the fraction, as two words.
    #[default]
    Decimal,
    /// The IEEE-754 bit pattern split into high and low words.
    RawBits,
}

impl CodecMode {
    pub fn name(self) -> &'static str {
        match self {
            CodecMode::Decimal => "decimal",
            CodecMode::RawBits => "rawbits",
        }
    }
}

impl fmt::Display for CodecMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CodecMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "decimal" => Ok(CodecMode::Decimal),
            "rawbits" | "raw" => Ok(CodecMode::RawBits),
            other => Err(format!("unknown codec mode {other:?}")),
        }
    }
}

/// A real split at the decimal point.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DecimalReal {
    /// Set for every strictly negative value, including those in `(-1, 0)`.
    pub negative: bool,
    /// Two's-complement encoding of `trunc(v)`.
    pub int_word: Word,
    /// `round(|v - trunc(v)| * 10^6)`, in `[0, 10^6]`.
    pub frac_word: Word,
}

pub fn encode_real(v: f64) -> Result<DecimalReal, CodecError> {
    if !v.is_finite() {
        return Err(CodecError::NotFinite(v));
    }
    if v.abs() >= MAX_ENCODABLE {
        return Err(CodecError::Overflow(v));
    }
    let int_part = v.trunc();
    let frac = (v - int_part).abs();
    Ok(DecimalReal {
        negative: v < 0.0,
        int_word: (int_part as i32) as Word,
        frac_word: round_micro(frac),
    })
}

// Rounds frac * 10^6 to the nearest integer using the exact product, so the
// rounding direction never depends on the error of the multiplication.
fn round_micro(frac: f64) -> Word {
    let scale = FRAC_SCALE as f64;
    let p = frac * scale;
    let residual = frac.mul_add(scale, -p);
    let mut q = p.round();
    let delta = (p - q) + residual;
    if delta >= 0.5 {
        q += 1.0;
    } else if delta < -0.5 {
        q -= 1.0;
    }
    q as Word
}

pub fn decode_real(r: DecimalReal) -> Result<f64, CodecError> {
    if r.frac_word > FRAC_SCALE {
        return Err(CodecError::MalformedFraction(r.frac_word));
    }
    let int_mag = (r.int_word as i32).unsigned_abs() as f64;
    let mag = int_mag + r.frac_word as f64 / FRAC_SCALE as f64;
    Ok(if r.negative { -mag } else { mag })
}

/// A routed unit between two cores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub src: CoreId,
    pub dst: CoreId,
    pub payload: Vec<Word>,
}

impl Message {
    pub fn new(src: CoreId, dst: CoreId, payload: Vec<Word>) -> Self {
        Message { src, dst, payload }
    }

    pub fn wire_len(&self) -> usize {
        HEADER_WORDS + self.payload.len()
    }
}

pub fn frame_message(m: &Message) -> Vec<Word> {
    let mut words = Vec::with_capacity(m.wire_len());
    words.push(m.src.0);
    words.push(m.dst.0);
    words.extend_from_slice(&m.payload);
    words
}

pub fn parse_message(words: &[Word]) -> Result<Message, CodecError> {
    match words {
        [src, dst, payload @ ..] => Ok(Message {
            src: CoreId(*src),
            dst: CoreId(*dst),
            payload: payload.to_vec(),
        }),
        _ => Err(CodecError::TruncatedFrame(words.len())),
    }
}

/// A real value with a small phase tag, as carried in workload payloads.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TaggedReal {
    pub tag: u8,
    pub value: f64,
}

/// Append `[tagWord, w1, w2]` for one real.
pub fn push_real(mode: CodecMode, tag: u8, v: f64, out: &mut Vec<Word>) -> Result<(), CodecError> {
    let tag_bits = (tag as Word) << TAG_SHIFT;
    match mode {
        CodecMode::Decimal => {
            let d = encode_real(v)?;
            let flag = if d.negative { NEGATIVE_FLAG } else { 0 };
            out.extend_from_slice(&[tag_bits | flag, d.int_word, d.frac_word]);
        }
        CodecMode::RawBits => {
            let bits = v.to_bits();
            out.extend_from_slice(&[tag_bits, (bits >> 32) as Word, bits as Word]);
        }
    }
    Ok(())
}

pub fn encode_reals(mode: CodecMode, tag: u8, values: &[f64]) -> Result<Vec<Word>, CodecError> {
    let mut out = Vec::with_capacity(values.len() * REAL_WORDS);
    for &v in values {
        push_real(mode, tag, v, &mut out)?;
    }
    Ok(out)
}

pub fn decode_reals(mode: CodecMode, payload: &[Word]) -> Result<Vec<TaggedReal>, CodecError> {
    if !payload.len().is_multiple_of(REAL_WORDS) {
        return Err(CodecError::RaggedPayload(payload.len()));
    }
    payload
        .chunks_exact(REAL_WORDS)
        .map(|w| {
            let tag = (w[0] >> TAG_SHIFT) as u8;
            let value = match mode {
                CodecMode::Decimal => decode_real(DecimalReal {
                    negative: w[0] & NEGATIVE_FLAG != 0,
                    int_word: w[1],
                    frac_word: w[2],
                })?,
                CodecMode::RawBits => f64::from_bits(((w[1] as u64) << 32) | w[2] as u64),
            };
            Ok(TaggedReal { tag, value })
        })
        .collect()
}
