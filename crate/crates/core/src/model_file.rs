//! On-disk model description shared by the command-line front end.
//!
//! ```json
//! {"symbols": ["x", "y"], "adjacency": [[1, 1], [1, 0]], "d": 2,
//!  "M": [["1/2", 1], ["1/2", 0]], "A": [[1, 2], [1, 0]]}
//! ```
//! Rows index the child symbol and columns the parent. `M` entries may be
//! numbers or exact `"p/q"` strings. Without `A` the observable defaults to
//! `W = 1/M`, so the sample mean is the normalised negative log-likelihood.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::alphabet_graph::AdjacencyModel;
use crate::error::{Error, Result};
use crate::rate_function::WeightedChainModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Text(String),
}

impl Entry {
    fn value(&self) -> Result<(f64, Option<BigRational>)> {
        match self {
            Entry::Number(x) => {
                let exact = if *x == 0.0 {
                    Some(BigRational::zero())
                } else if *x == 1.0 {
                    Some(BigRational::one())
                } else {
                    None
                };
                Ok((*x, exact))
            }
            Entry::Text(s) => {
                let r: BigRational = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("cannot parse {s:?} as a fraction p/q")))?;
                let f = r.to_f64().ok_or_else(|| Error::invalid(format!("{s:?} is out of range")))?;
                Ok((f, Some(r)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<String>>,
    pub adjacency: Vec<Vec<u8>>,
    pub d: usize,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<Vec<Entry>>>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
}

impl ModelFile {
    pub fn adjacency_model(&self) -> Result<AdjacencyModel> {
        match &self.symbols {
            Some(s) => AdjacencyModel::new(s.clone(), &self.adjacency, self.d),
            None => AdjacencyModel::from_rows(&self.adjacency, self.d),
        }
    }

    /// The weighted chain, if `M` is present.
    pub fn chain(&self) -> Result<Option<WeightedChainModel>> {
        let Some(m) = &self.m else { return Ok(None) };
        let base = self.adjacency_model()?;
        let n = base.size();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("M must be {n}x{n}")));
        }
        let mut mf = vec![vec![0.0; n]; n];
        let mut exact = Some(vec![vec![BigRational::zero(); n]; n]);
        for a in 0..n {
            for b in 0..n {
                let (f, ex) = m[a][b].value().map_err(|e| match e {
                    Error::Validation { msg, .. } => Error::Validation {
                        msg,
                        row: Some(a),
                        col: Some(b),
                    },
                    other => other,
                })?;
                mf[a][b] = f;
                match (ex, exact.as_mut()) {
                    (Some(x), Some(e)) => e[a][b] = x,
                    _ => exact = None,
                }
            }
        }
        let w = match &self.a {
            Some(w) => w.clone(),
            None => mf
                .iter()
                .map(|r| r.iter().map(|&x| if x > 0.0 { 1.0 / x } else { 0.0 }).collect())
                .collect(),
        };
        let chain = WeightedChainModel::new(base, &mf, &w)?;
        // Exact columns must sum to one exactly; otherwise keep floats only.
        Ok(Some(match exact {
            Some(e) => chain.clone().with_exact_m(e).unwrap_or(chain),
            None => chain,
        }))
    }
}
