//! Nonnegative matrices and vectors stored in the log domain.
//!
//! Orientation is fixed across the crate: row index = child symbol, column
//! index = parent symbol. Entry `(a, b)` is the weight of a child labelled
//! `a` under a parent labelled `b`. A zero weight is stored as `-inf`.

use serde::{Deserialize, Serialize};

use crate::alphabet_graph::AdjacencyModel;
use crate::error::{Error, Result};

/// Dense `n x n` nonnegative matrix in log form, with per-parent edge lists.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    log: Vec<f64>,
    // For each parent b: (child a, log w_ab) over the support.
    cols: Vec<Vec<(usize, f64)>>,
}

impl WeightMatrix {
    /// Builds from log-weights given row-major (row = child).
    pub fn from_log(n: usize, log: Vec<f64>) -> Result<Self> {
        if log.len() != n * n {
            return Err(Error::invalid(format!(
                "weight matrix has {} entries, expected {}",
                log.len(),
                n * n
            )));
        }
        for (i, v) in log.iter().enumerate() {
            if v.is_nan() || *v == f64::INFINITY {
                return Err(Error::invalid_at("weight must be finite and nonnegative", i / n, i % n));
            }
        }
        let mut cols = vec![Vec::new(); n];
        for a in 0..n {
            for (b, col) in cols.iter_mut().enumerate() {
                let v = log[a * n + b];
                if v > f64::NEG_INFINITY {
                    col.push((a, v));
                }
            }
        }
        Ok(Self { n, log, cols })
    }

    /// Builds from plain nonnegative weights (row = child).
    pub fn from_linear(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut log = Vec::with_capacity(n * n);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation {
                    msg: format!("row has {} entries, expected {n}", row.len()),
                    row: Some(a),
                    col: None,
                });
            }
            for (b, &w) in row.iter().enumerate() {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::invalid_at("weight must be finite and nonnegative", a, b));
                }
                log.push(if w > 0.0 { w.ln() } else { f64::NEG_INFINITY });
            }
        }
        Self::from_log(n, log)
    }

    /// The 0/1 adjacency matrix itself.
    pub fn from_adjacency(model: &AdjacencyModel) -> Self {
        let n = model.size();
        let log = (0..n * n)
            .map(|i| if model.has_edge(i / n, i % n) { 0.0 } else { f64::NEG_INFINITY })
            .collect();
        Self::from_log(n, log).expect("adjacency is a valid weight matrix")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn log_at(&self, child: usize, parent: usize) -> f64 {
        self.log[child * self.n + parent]
    }

    pub fn at(&self, child: usize, parent: usize) -> f64 {
        self.log_at(child, parent).exp()
    }

    /// Support of column `parent`: `(child, log weight)` pairs.
    #[inline]
    pub fn column(&self, parent: usize) -> &[(usize, f64)] {
        &self.cols[parent]
    }

    pub fn log_entries(&self) -> &[f64] {
        &self.log
    }

    /// Plain (linear-scale) rows.
    pub fn to_linear(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.at(a, b)).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let log = (0..n * n).map(|i| self.log[(i % n) * n + i / n]).collect();
        Self::from_log(n, log).expect("transpose of a valid matrix")
    }

    /// Entrywise `log self + mu * log other` on the support of `self`.
    pub fn tilt(&self, other: &WeightMatrix, mu: f64) -> Self {
        let log = self
            .log
            .iter()
            .zip(&other.log)
            .map(|(&m, &w)| if m == f64::NEG_INFINITY { m } else { m + mu * w })
            .collect();
        Self::from_log(self.n, log).expect("tilted matrix is valid")
    }

    /// Largest absolute log-weight over the support.
    pub fn max_abs_log(&self) -> f64 {
        self.log
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let k = keep.len();
        let mut log = Vec::with_capacity(k * k);
        for &a in keep {
            for &b in keep {
                log.push(self.log_at(a, b));
            }
        }
        Self::from_log(k, log).expect("submatrix of a valid matrix")
    }
}

/// Log of a nonnegative vector; `-inf` encodes a zero coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogVector {
    #[serde(with = "crate::numeric::ext_float::vec")]
    pub values: Vec<f64>,
}

impl LogVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Indicator (log 1 = 0) of `set`, `-inf` elsewhere.
    pub fn indicator(n: usize, set: &[usize]) -> Self {
        let mut values = vec![f64::NEG_INFINITY; n];
        for &a in set {
            values[a] = 0.0;
        }
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Symbols with a positive coordinate.
    pub fn support(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.is_finite()).collect()
    }

    /// Shifted so that the log-sum-exp is zero (probability normalisation).
    pub fn normalized(&self) -> Self {
        let z = crate::numeric::logsumexp(self.values.iter().copied());
        Self {
            values: self.values.iter().map(|v| v - z).collect(),
        }
    }

    /// Linear-scale probability vector (assumes normalisation).
    pub fn to_probabilities(&self) -> Vec<f64> {
        let z = crate::numeric::logsumexp(self.values.iter().copied());
        self.values.iter().map(|v| (v - z).exp()).collect()
    }
}
