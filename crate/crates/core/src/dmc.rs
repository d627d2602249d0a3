//! Channels, input distributions and empirical types.
//!
//! Everything here is immutable after construction. Constructors enforce the
//! invariants (row-stochastic channels, normalized distributions, type
//! counts summing to the block length), so the numerical modules can assume
//! valid inputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on row sums and distribution sums.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A discrete memoryless channel given by its transition matrix `P(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    num_inputs: usize,
    num_outputs: usize,
    // row-major, P(y|x) at x * num_outputs + y
    matrix: Vec<f64>,
    input_labels: Option<Vec<String>>,
    output_labels: Option<Vec<String>>,
}

impl Channel {
    /// Builds a channel from rows `P(·|x)`; see [`validate_channel`].
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        validate_channel(rows)
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(&[vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless channel on `k` symbols.
    pub fn identity(k: usize) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(&rows)
    }

    pub fn with_labels(
        mut self,
        input_labels: Option<Vec<String>>,
        output_labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(l) = &input_labels {
            if l.len() != self.num_inputs {
                return Err(Error::LabelMismatch {
                    expected: self.num_inputs,
                    found: l.len(),
                });
            }
        }
        if let Some(l) = &output_labels {
            if l.len() != self.num_outputs {
                return Err(Error::LabelMismatch {
                    expected: self.num_outputs,
                    found: l.len(),
                });
            }
        }
        self.input_labels = input_labels;
        self.output_labels = output_labels;
        Ok(self)
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    /// `P(y|x)`.
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.num_outputs + y]
    }

    /// The row `P(·|x)`.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.num_outputs..(x + 1) * self.num_outputs]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.num_inputs).map(|x| self.row(x).to_vec()).collect()
    }

    pub fn input_labels(&self) -> Option<&[String]> {
        self.input_labels.as_deref()
    }

    pub fn output_labels(&self) -> Option<&[String]> {
        self.output_labels.as_deref()
    }
}

/// Validates a raw transition matrix and wraps it as a [`Channel`].
pub fn validate_channel(rows: &[Vec<f64>]) -> Result<Channel> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let num_outputs = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != num_outputs {
            return Err(Error::NotRectangular {
                row: i,
                expected: num_outputs,
                found: r.len(),
            });
        }
    }
    if rows.len() < 2 || num_outputs < 2 {
        return Err(Error::DegenerateAlphabet {
            inputs: rows.len(),
            outputs: num_outputs,
        });
    }
    let mut matrix = Vec::with_capacity(rows.len() * num_outputs);
    for (x, r) in rows.iter().enumerate() {
        for (y, &p) in r.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::NegativeEntry {
                    row: x,
                    col: y,
                    value: p,
                });
            }
        }
        let sum: f64 = r.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::RowNotStochastic { row: x, sum });
        }
        matrix.extend_from_slice(r);
    }
    Ok(Channel {
        num_inputs: rows.len(),
        num_outputs,
        matrix,
        input_labels: None,
        output_labels: None,
    })
}

/// On-disk channel description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_labels: Option<Vec<String>>,
}

impl From<&Channel> for ChannelSpec {
    fn from(ch: &Channel) -> Self {
        ChannelSpec {
            matrix: ch.rows(),
            input_labels: ch.input_labels.clone(),
            output_labels: ch.output_labels.clone(),
        }
    }
}

/// Parses a channel from its JSON text.
pub fn parse_channel(text: &str) -> Result<Channel> {
    let spec: ChannelSpec = serde_json::from_str(text)?;
    validate_channel(&spec.matrix)?.with_labels(spec.input_labels, spec.output_labels)
}

/// Reads and parses a channel JSON file.
pub fn load_channel(path: impl AsRef<Path>) -> Result<Channel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_channel(&text)
}

/// A probability vector on the channel input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::NotNormalized { sum: 0.0 });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbability { index: i, value: p });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Distribution { probs })
    }

    /// Normalizes non-negative weights. Fails if they are all zero.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidProbability { index: i, value: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::NotNormalized { sum });
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    /// Normalizes `exp(log_weights)` after subtracting the maximum.
    pub(crate) fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::AllZeroUpdate);
        }
        let w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
        Self::from_weights(&w).map_err(|_| Error::AllZeroUpdate)
    }

    pub fn uniform(k: usize) -> Self {
        Distribution {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn point_mass(k: usize, x: usize) -> Self {
        let mut probs = vec![0.0; k];
        probs[x] = 1.0;
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// First index with zero mass, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.probs.iter().position(|&p| p == 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.first_zero().is_none()
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Distribution, lambda: f64) -> Result<Self> {
        self.check_len(other.len())?;
        let w: Vec<f64> = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Self::from_weights(&w)
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Total variation distance, `½ Σ |p - q|`.
    pub fn total_variation(&self, other: &Distribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// Symbol counts of a length-`n` word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EmpiricalType {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalType {
    pub fn new(counts: Vec<u64>, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroBlockLength);
        }
        let sum: u64 = counts.iter().sum();
        if sum != n {
            return Err(Error::CountMismatch { sum, n });
        }
        Ok(EmpiricalType { counts, n })
    }

    /// Builds a type from counts, taking `n` as their sum.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let n = counts.iter().sum();
        Self::new(counts, n)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// The induced distribution `counts / n`.
    pub fn to_distribution(&self) -> Distribution {
        let n = self.n as f64;
        Distribution {
            probs: self.counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }
}

/// Counts symbol occurrences in `word`.
pub fn type_of(word: &[usize], alphabet_size: usize) -> Result<EmpiricalType> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut counts = vec![0u64; alphabet_size];
    for (position, &symbol) in word.iter().enumerate() {
        if symbol >= alphabet_size {
            return Err(Error::SymbolOutOfRange {
                position,
                symbol,
                alphabet_size,
            });
        }
        counts[symbol] += 1;
    }
    Ok(EmpiricalType {
        counts,
        n: word.len() as u64,
    })
}

/// The pair `(ρ, s)` parameterizing the conditional exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentParams {
    rho: f64,
    s: f64,
}

impl ExponentParams {
    /// `s = 1/(1+ρ)`.
    pub fn new(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(ExponentParams {
            rho,
            s: 1.0 / (1.0 + rho),
        })
    }

    pub fn with_s(rho: f64, s: f64) -> Result<Self> {
        check_rho(rho)?;
        if !(s > 0.0 && s * rho < 1.0) {
            return Err(Error::InvalidS { s, rho });
        }
        Ok(ExponentParams { rho, s })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn is_simplified(&self) -> bool {
        self.s == 1.0 / (1.0 + self.rho)
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidRho(rho))
    }
}
