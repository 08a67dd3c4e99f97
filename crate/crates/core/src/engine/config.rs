// Copyright The fslnet Authors.
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::codec::{CodecMode, HEADER_WORDS, REAL_WORDS};

/// Bytes per link word.
pub const WORD_BYTES: u64 = 4;

/// Ceiling on the modelled link throughput, in bytes per second.
pub const MAX_LINK_BYTES_PER_SEC: u64 = 400_000_000;

/// How the matrix workload groups values into frames.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum Framing {
    /// One header per value.
    #[default]
    PerElement,
    /// One header per matrix row.
    Bulk,
}

impl Framing {
    pub fn name(self) -> &'static str {
        match self {
            Framing::PerElement => "element",
            Framing::Bulk => "bulk",
        }
    }
}

impl fmt::Display for Framing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Framing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "element" | "per-element" => Ok(Framing::PerElement),
            "bulk" => Ok(Framing::Bulk),
            other => Err(format!("unknown framing {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("bad value for {key}: {detail}")]
    BadValue { key: String, detail: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Timing and capacity parameters of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub clock_hz: u64,
    /// Cycles to push one 32-bit word onto a link.
    pub cycles_per_word: u64,
    /// Fixed cost of entering and leaving the receive interrupt handler.
    pub interrupt_overhead_cycles: u64,
    pub fifo_depth_words: usize,
    /// Cycles per floating multiply-accumulate in the workload.
    pub mac_cycles: u64,
    pub codec_mode: CodecMode,
    pub framing: Framing,
    /// Upper bound on pending events before the run is aborted.
    pub max_pending_events: usize,
    /// Largest square matrix the workload builder accepts.
    pub max_matrix_dim: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            clock_hz: 100_000_000,
            cycles_per_word: 2,
            interrupt_overhead_cycles: 40,
            fifo_depth_words: 16,
            mac_cycles: 10,
            codec_mode: CodecMode::Decimal,
            framing: Framing::PerElement,
            max_pending_events: 1 << 20,
            max_matrix_dim: 256,
        }
    }
}

impl SimConfig {
    /// Words on the wire for one per-element real-value frame.
    pub const REAL_FRAME_WORDS: usize = HEADER_WORDS + REAL_WORDS;

    pub fn link_bytes_per_sec(&self) -> u64 {
        WORD_BYTES * self.clock_hz / self.cycles_per_word.max(1)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("clock_hz", self.clock_hz),
            ("cycles_per_word", self.cycles_per_word),
            ("interrupt_overhead_cycles", self.interrupt_overhead_cycles),
            ("mac_cycles", self.mac_cycles),
        ];
        for (key, v) in positive {
            if v < 1 {
                return Err(ConfigError::Invalid(format!("{key} must be at least 1")));
            }
        }
        if self.fifo_depth_words < 4 {
            return Err(ConfigError::Invalid(format!(
                "fifo_depth_words must be at least 4, got {}",
                self.fifo_depth_words
            )));
        }
        if self.link_bytes_per_sec() > MAX_LINK_BYTES_PER_SEC {
            return Err(ConfigError::Invalid(format!(
                "link throughput {} B/s exceeds {} B/s",
                self.link_bytes_per_sec(),
                MAX_LINK_BYTES_PER_SEC
            )));
        }
        if self.max_pending_events == 0 {
            return Err(ConfigError::Invalid(
                "max_pending_events must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Apply one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            value.parse::<T>().map_err(|e| ConfigError::BadValue {
                key: key.to_string(),
                detail: e.to_string(),
            })
        }
        let bad = |detail: String| ConfigError::BadValue {
            key: key.to_string(),
            detail,
        };
        match key {
            "clock_hz" => self.clock_hz = num(key, value)?,
            "cycles_per_word" => self.cycles_per_word = num(key, value)?,
            "interrupt_overhead_cycles" => self.interrupt_overhead_cycles = num(key, value)?,
            "fifo_depth_words" => self.fifo_depth_words = num(key, value)?,
            "mac_cycles" => self.mac_cycles = num(key, value)?,
            "codec_mode" => self.codec_mode = value.parse().map_err(bad)?,
            "framing" => self.framing = value.parse().map_err(bad)?,
            "max_pending_events" => self.max_pending_events = num(key, value)?,
            "max_matrix_dim" => self.max_matrix_dim = num(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Parse flat `key=value` text on top of the defaults. `#` starts a
    /// comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line: i + 1, key },
                other => other,
            })?;
        }
        self.validate()
    }

    /// Render as `key=value` lines that [`SimConfig::parse`] accepts.
    pub fn to_text(&self) -> String {
        format!(
            "clock_hz={}\ncycles_per_word={}\ninterrupt_overhead_cycles={}\nfifo_depth_words={}\n\
             mac_cycles={}\ncodec_mode={}\nframing={}\nmax_pending_events={}\nmax_matrix_dim={}\n",
            self.clock_hz,
            self.cycles_per_word,
            self.interrupt_overhead_cycles,
            self.fifo_depth_words,
            self.mac_cycles,
            self.codec_mode,
            self.framing,
            self.max_pending_events,
            self.max_matrix_dim,
        )
    }
}
