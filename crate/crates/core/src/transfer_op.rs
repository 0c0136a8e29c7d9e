//! Log-domain nonlinear transfer operator and its cone eigenpairs.
//!
//! `Ψ_{W,s}(x)_b = s · log Σ_a W[a, b] e^{x_a}`, indexed by parent `b`.
//! It maps vectors supported on class `j` to vectors supported on class
//! `j - 1`, so the `p`-fold composition `L` preserves each class cone.

use serde::{Deserialize, Serialize};

use crate::alphabet_graph::{AdjacencyModel, PeriodStructure};
use crate::error::{Error, Result};
use crate::numeric::logsumexp;
use crate::tree_core::lattice_size_f64;
use crate::weights::{LogVector, WeightMatrix};

/// `Ψ_{W,s}` applied to a log-vector.
pub fn psi(w: &WeightMatrix, s: f64, x: &[f64]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; w.size()];
    psi_into(w, s, x, &mut out);
    out
}

pub(crate) fn psi_into(w: &WeightMatrix, s: f64, x: &[f64], out: &mut [f64]) {
    for (b, o) in out.iter_mut().enumerate() {
        let col = w.column(b);
        let mut m = f64::NEG_INFINITY;
        for &(a, lw) in col {
            m = m.max(lw + x[a]);
        }
        if m == f64::NEG_INFINITY {
            *o = f64::NEG_INFINITY;
            continue;
        }
        let mut acc = 0.0;
        for &(a, lw) in col {
            acc += (lw + x[a] - m).exp();
        }
        *o = s * (m + acc.ln());
    }
}

/// Exponent vector `r ∈ (0, d]^p` with `Π r_i = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentVector(pub Vec<f64>);

impl ExponentVector {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::BadExponent("empty exponent vector".into()));
        }
        for (i, &r) in self.0.iter().enumerate() {
            if !(r > 0.0 && r <= d as f64 * (1.0 + 1e-12)) {
                return Err(Error::BadExponent(format!("r[{i}] = {r} is outside (0, {d}]")));
            }
        }
        let log_prod: f64 = self.0.iter().map(|r| r.ln()).sum();
        if log_prod.abs() > 1e-12 {
            return Err(Error::BadExponent(format!(
                "product of exponents is {} instead of 1",
                log_prod.exp()
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.0.len()
    }
}

/// `Ψ_{r_{j+p-1}} ∘ … ∘ Ψ_{r_{j+1}} ∘ Ψ_{r_j}` (indices mod `p`).
pub fn apply_l(w: &WeightMatrix, r: &ExponentVector, x: &[f64], rotation: usize) -> Vec<f64> {
    let p = r.period();
    let mut cur = x.to_vec();
    let mut next = vec![0.0; x.len()];
    for m in 0..p {
        psi_into(w, r.0[(rotation + m) % p], &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Checked form of [`apply_l`] on an adjacency model.
pub fn apply_l_checked(
    model: &AdjacencyModel,
    r: &ExponentVector,
    x: &LogVector,
    rotation: usize,
) -> Result<LogVector> {
    r.validate(model.arity())?;
    let w = WeightMatrix::from_adjacency(model);
    Ok(LogVector::new(apply_l(&w, r, &x.values, rotation)))
}

/// Composition order of the exponents relative to the class index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotation {
    /// Class `j` is paired with the cycle starting at `r_j`.
    Rotated,
    /// Every class uses the cycle starting at `r_0`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    #[serde(with = "crate::numeric::ext_float")]
    pub log_rho: f64,
    pub eigvec: LogVector,
    pub class_index: usize,
    pub iterations: usize,
    /// Width of the final Collatz–Wielandt bracket.
    #[serde(with = "crate::numeric::ext_float")]
    pub residual: f64,
    /// Upper end of the bracket (always a valid upper bound once the
    /// support has stabilised).
    #[serde(with = "crate::numeric::ext_float")]
    pub upper: f64,
}

/// Cone eigenpair of `L` restricted to class `j` by normalised power iteration.
///
/// Starts from the indicator of class `j`; once the support of the iterate
/// is stable the Collatz–Wielandt bracket `[min_a, max_a] (Lξ - ξ)_a` over
/// that support encloses `log ρ`. Fails with `NoConvergence` carrying the
/// last bracket if it does not close to `opts.tol`.
pub fn principal_eigenpair(
    w: &WeightMatrix,
    period: &PeriodStructure,
    r: &ExponentVector,
    j: usize,
    rotation: usize,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let n = w.size();
    let mut x = LogVector::indicator(n, period.class(j as i64)).values;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for it in 1..=opts.max_iter {
        let y = apply_l(w, r, &x, rotation);
        let z = logsumexp(y.iter().copied());
        if z == f64::NEG_INFINITY {
            return Ok(EigenPair {
                log_rho: f64::NEG_INFINITY,
                eigvec: LogVector::new(x),
                class_index: j,
                iterations: it,
                residual: 0.0,
                upper: f64::NEG_INFINITY,
            });
        }
        let stable = x.iter().zip(&y).all(|(a, b)| a.is_finite() == b.is_finite());
        if stable {
            lo = f64::INFINITY;
            hi = f64::NEG_INFINITY;
            for (a, b) in x.iter().zip(&y) {
                if a.is_finite() {
                    let q = b - a;
                    lo = lo.min(q);
                    hi = hi.max(q);
                }
            }
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi - z;
        }
        if stable && hi - lo < opts.tol {
            return Ok(EigenPair {
                log_rho: 0.5 * (lo + hi),
                eigvec: LogVector::new(x),
                class_index: j,
                iterations: it,
                residual: hi - lo,
                upper: hi,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "cone eigenpair",
        iterations: opts.max_iter,
        lo,
        hi,
    })
}

/// One term of the block-count recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyTerm {
    pub n: usize,
    /// `log |B_n| / |Λ(n)|`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySeries {
    pub terms: Vec<EntropyTerm>,
    /// Per-root log block counts at the last level.
    pub last_log_counts: Vec<f64>,
    #[serde(with = "crate::numeric::ext_float")]
    pub h_top: f64,
    pub extrapolated: bool,
}

/// Log block counts `log c_k(a)` for `k = 0..=n_max`, via
/// `log c_{k+1} = Ψ_{A,d}(log c_k)`, `c_0 = 1`.
pub fn log_block_counts(model: &AdjacencyModel, n_max: usize) -> Vec<Vec<f64>> {
    let w = WeightMatrix::from_adjacency(model);
    let mut c = vec![0.0; model.size()];
    let mut out = vec![c.clone()];
    for _ in 0..n_max {
        c = psi(&w, model.arity() as f64, &c);
        out.push(c.clone());
    }
    out
}

/// Topological entropy estimate from the block-count recursion.
///
/// Aitken extrapolation is applied to the last three terms and accepted only
/// if it moves the estimate by less than the last increment.
pub fn entropy_iterate(model: &AdjacencyModel, n_max: usize) -> EntropySeries {
    let counts = log_block_counts(model, n_max);
    let d = model.arity();
    let terms: Vec<EntropyTerm> = counts
        .iter()
        .enumerate()
        .map(|(n, c)| EntropyTerm {
            n,
            value: logsumexp(c.iter().copied()) / lattice_size_f64(d, n),
        })
        .collect();
    let last = terms.last().unwrap().value;
    let mut h = last;
    let mut extrapolated = false;
    if terms.len() >= 3 {
        let k = terms.len();
        let (x0, x1, x2) = (terms[k - 3].value, terms[k - 2].value, terms[k - 1].value);
        let d1 = x2 - x1;
        let denom = d1 - (x1 - x0);
        if denom.abs() > 1e-300 && d1 != 0.0 {
            let cand = x2 - d1 * d1 / denom;
            if cand.is_finite() && (cand - x2).abs() <= d1.abs() {
                h = cand;
                extrapolated = true;
            }
        }
    }
    EntropySeries {
        terms,
        last_log_counts: counts.last().unwrap().clone(),
        h_top: h,
        extrapolated,
    }
}
