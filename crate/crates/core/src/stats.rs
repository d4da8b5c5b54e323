//! Normalized histograms and base-2 Jensen-Shannon divergence.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistogramError {
    #[error("histogram has no mass")]
    Empty,
    #[error("negative or non-finite count {0}")]
    InvalidCount(f64),
    #[error("support sizes differ: {0} vs {1}")]
    SupportMismatch(usize, usize),
}

/// Probability vector over a fixed finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    probs: Vec<f64>,
}

impl Histogram {
    /// L1-normalizes raw counts.
    pub fn from_counts(counts: &[f64]) -> Result<Self, HistogramError> {
        if let Some(&bad) = counts.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(HistogramError::InvalidCount(bad));
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(HistogramError::Empty);
        }
        Ok(Self {
            probs: counts.iter().map(|c| c / total).collect(),
        })
    }

    pub fn from_integer_counts(counts: &[u64]) -> Result<Self, HistogramError> {
        let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        Self::from_counts(&as_f64)
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
}

/// `JSD(p, q) = ½ KL(p‖m) + ½ KL(q‖m)` with `m = (p + q) / 2`, logs base 2,
/// zero-probability terms contributing nothing. Clamped to `[0, 1]`.
pub fn jsd(p: &Histogram, q: &Histogram) -> Result<f64, HistogramError> {
    if p.len() != q.len() {
        return Err(HistogramError::SupportMismatch(p.len(), q.len()));
    }
    let mut total = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a == b {
            // both terms vanish: log2(a / a) = 0
            continue;
        }
        let m = 0.5 * (a + b);
        let term = |x: f64| if x > 0.0 { x * (x / m).log2() } else { 0.0 };
        // one commutative sum per bin keeps jsd(p, q) == jsd(q, p) exactly
        total += 0.5 * (term(a) + term(b));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// JSD between two raw count vectors.
pub fn jsd_counts(p: &[f64], q: &[f64]) -> Result<f64, HistogramError> {
    jsd(&Histogram::from_counts(p)?, &Histogram::from_counts(q)?)
}
