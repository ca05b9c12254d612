//! Probability distributions over classical bitstrings.
//!
//! Bit-ordering convention used everywhere in this crate: classical bit 0
//! is the RIGHTMOST character of a bitstring key, so "01" means bit 0 = 1
//! and bit 1 = 0.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Tolerance on the probability sum of a reference distribution.
pub const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("distribution must have at least one entry")]
    Empty,
    #[error("bitstring keys must all have the same length ('{0}' vs '{1}')")]
    KeyWidthMismatch(String, String),
    #[error("bitstring key '{0}' may only contain '0' and '1'")]
    BadAlphabet(String),
    #[error("probability {1} for key '{0}' is outside [0, 1]")]
    OutOfRange(String, f64),
    #[error("probabilities sum to {0}, not 1")]
    SumNotOne(f64),
}

/// Normalized map from bitstring to probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    entries: BTreeMap<String, f64>,
}

impl Distribution {
    pub fn new(entries: BTreeMap<String, f64>) -> Result<Self, DistributionError> {
        let mut keys = entries.keys();
        let first = keys.next().ok_or(DistributionError::Empty)?;
        for key in entries.keys() {
            if key.len() != first.len() {
                return Err(DistributionError::KeyWidthMismatch(first.clone(), key.clone()));
            }
            if !key.chars().all(|c| c == '0' || c == '1') {
                return Err(DistributionError::BadAlphabet(key.clone()));
            }
        }
        for (key, &p) in &entries {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(DistributionError::OutOfRange(key.clone(), p));
            }
        }
        let sum: f64 = entries.values().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(DistributionError::SumNotOne(sum));
        }
        Ok(Distribution { entries })
    }

    pub fn from_pairs<I, K>(pairs: I) -> Result<Self, DistributionError>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        Self::new(pairs.into_iter().map(|(k, p)| (k.into(), p)).collect())
    }

    /// Length of every key.
    pub fn key_width(&self) -> usize {
        self.entries.keys().next().map(|k| k.len()).unwrap_or(0)
    }

    /// Probability of `key`, zero when absent.
    pub fn probability(&self, key: &str) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, &p)| (k.as_str(), p))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(k, p)| format!("\"{k}\": {p}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Render a classical value as a bitstring of the given width, bit 0 on
/// the right.
pub fn format_bits(value: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|i| if value >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Extract classical bit `bit` from a bitstring key (bit 0 is rightmost).
pub fn bit_of(key: &str, bit: usize) -> Option<u8> {
    let bytes = key.as_bytes();
    if bit >= bytes.len() {
        return None;
    }
    match bytes[bytes.len() - 1 - bit] {
        b'0' => Some(0),
        b'1' => Some(1),
        _ => None,
    }
}
