//! Large deviations of tree sample means: tilted matrices, the pressure
//! recursion, the rate function `Λ*_j` and the law-of-large-numbers limits.
//!
//! The observable is `Σ_g log W(X_g, X_parent(g)) / |Λ(n)|` for a Markov
//! chain with column-stochastic transition matrix `M` indexed by the `d`-tree.
//! Phase `j` refers to depths `n ≡ j (mod p)` with the root in class 0, i.e.
//! trees whose deepest level lies in class `j`.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet_graph::{find_a0_and_period, AdjacencyModel, PeriodStructure};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, golden_max};
use crate::transfer_op::psi;
use crate::weights::WeightMatrix;

const COLUMN_TOL: f64 = 1e-9;

/// Markov chain on the tree together with the observable's weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedChainModel {
    base: AdjacencyModel,
    period: PeriodStructure,
    m: WeightMatrix,
    w: WeightMatrix,
    m_exact: Option<Vec<Vec<BigRational>>>,
}

impl WeightedChainModel {
    /// `m` and `w` are given row = child, column = parent. `M` must be
    /// column-stochastic with support exactly the adjacency; `W` must be
    /// positive on that support (entries off the support are ignored).
    pub fn new(base: AdjacencyModel, m: &[Vec<f64>], w: &[Vec<f64>]) -> Result<Self> {
        let n = base.size();
        for (name, mat) in [("M", m), ("W", w)] {
            if mat.len() != n || mat.iter().any(|r| r.len() != n) {
                return Err(Error::invalid(format!("{name} must be {n}x{n}")));
            }
        }
        let mut wm = vec![vec![0.0; n]; n];
        for b in 0..n {
            let mut sum = 0.0;
            for a in 0..n {
                let x = m[a][b];
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(Error::invalid_at("transition probability must lie in [0, 1]", a, b));
                }
                if (x > 0.0) != base.has_edge(a, b) {
                    return Err(Error::invalid_at("M must be positive exactly on the adjacency", a, b));
                }
                if base.has_edge(a, b) {
                    let y = w[a][b];
                    if !(y > 0.0) || !y.is_finite() {
                        return Err(Error::SupportMismatch { child: a, parent: b });
                    }
                    wm[a][b] = y;
                }
                sum += x;
            }
            if (sum - 1.0).abs() > COLUMN_TOL {
                return Err(Error::Validation {
                    msg: format!("column of M sums to {sum}"),
                    row: None,
                    col: Some(b),
                });
            }
        }
        let period = find_a0_and_period(&base)?;
        Ok(Self {
            m: WeightMatrix::from_linear(m)?,
            w: WeightMatrix::from_linear(&wm)?,
            base,
            period,
            m_exact: None,
        })
    }

    /// Attaches exact rational transition probabilities; they must agree with
    /// the float matrix and have columns summing to exactly one.
    pub fn with_exact_m(mut self, exact: Vec<Vec<BigRational>>) -> Result<Self> {
        use num_traits::{One, ToPrimitive, Zero};
        let n = self.size();
        if exact.len() != n || exact.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(format!("exact M must be {n}x{n}")));
        }
        for b in 0..n {
            let mut sum = BigRational::zero();
            for (a, row) in exact.iter().enumerate() {
                let x = &row[b];
                let f = x.to_f64().unwrap_or(f64::NAN);
                if (f - self.m.at(a, b)).abs() > 1e-15 {
                    return Err(Error::invalid_at("exact M disagrees with M", a, b));
                }
                sum += x;
            }
            if !sum.is_one() {
                return Err(Error::Validation {
                    msg: "column of exact M does not sum to 1".into(),
                    row: None,
                    col: Some(b),
                });
            }
        }
        self.m_exact = Some(exact);
        Ok(self)
    }

    pub fn base(&self) -> &AdjacencyModel {
        &self.base
    }

    pub fn period(&self) -> &PeriodStructure {
        &self.period
    }

    pub fn size(&self) -> usize {
        self.base.size()
    }

    pub fn arity(&self) -> usize {
        self.base.arity()
    }

    /// `log M`.
    pub fn log_m(&self) -> &WeightMatrix {
        &self.m
    }

    /// `log W` on the support of `M`.
    pub fn log_w(&self) -> &WeightMatrix {
        &self.w
    }

    pub fn m_exact(&self) -> Option<&[Vec<BigRational>]> {
        self.m_exact.as_deref()
    }

    /// Linear-scale `M`.
    pub fn m_linear(&self) -> Vec<Vec<f64>> {
        self.m.to_linear()
    }

    /// Constant of the pressure error bound.
    pub fn bound_constant(&self) -> f64 {
        self.w
            .max_abs_log()
            .max(self.m.max_abs_log())
            .max((self.size() as f64).ln())
    }

    /// Smallest and largest `log W` over the support.
    pub fn observable_range(&self) -> (f64, f64) {
        let vals = self.w.log_entries().iter().filter(|v| v.is_finite());
        vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// `Φ(P|W)_b = -Σ_a P_ab log(P_ab / W_ab)` with `0 log 0 = 0`.
pub fn phi(p: &[Vec<f64>], w: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    if w.len() != n || p.iter().chain(w).any(|r| r.len() != n) {
        return Err(Error::invalid("P and W must be square of equal size"));
    }
    (0..n)
        .map(|b| {
            let sum: f64 = (0..n).map(|a| p[a][b]).sum();
            if (sum - 1.0).abs() > COLUMN_TOL || (0..n).any(|a| !(p[a][b] >= 0.0)) {
                return Err(Error::Validation {
                    msg: format!("column of P sums to {sum}"),
                    row: None,
                    col: Some(b),
                });
            }
            let mut terms = Vec::with_capacity(n);
            for a in 0..n {
                let (x, y) = (p[a][b], w[a][b]);
                if x == 0.0 {
                    continue;
                }
                if !(y > 0.0) {
                    return Err(Error::SupportViolation { row: a, col: b });
                }
                terms.push(-x * (x / y).ln());
            }
            Ok(compensated_sum(terms))
        })
        .collect()
}

/// `E = M ⊙ W^μ` in log form.
pub fn tilted_matrix(model: &WeightedChainModel, mu: f64) -> WeightMatrix {
    model.m.tilt(&model.w, mu)
}

/// `λ^{(i+1)} = (1/K) log(Eᵀ e^{K λ^{(i)}})` with `K = d^{i+1}/(d-1)`,
/// evaluated after shifting by `max λ^{(i)}`.
fn pressure_step(e: &WeightMatrix, lam: &[f64], k: f64) -> Vec<f64> {
    let m = lam.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return vec![f64::NEG_INFINITY; lam.len()];
    }
    let shifted: Vec<f64> = lam.iter().map(|&l| k * (l - m)).collect();
    psi(e, 1.0, &shifted).into_iter().map(|v| m + v / k).collect()
}

/// The vectors `λ^{(0)}, …, λ^{(n)}`.
pub fn pressure_sequence(model: &WeightedChainModel, mu: f64, n: usize) -> Vec<Vec<f64>> {
    let e = tilted_matrix(model, mu);
    let d = model.arity() as f64;
    let mut out = vec![vec![0.0; model.size()]];
    let mut k = d / (d - 1.0);
    for _ in 0..n {
        let next = pressure_step(&e, out.last().unwrap(), k);
        out.push(next);
        k *= d;
    }
    out
}

fn sup_over_class(model: &WeightedChainModel, lam: &[f64], class: i64) -> f64 {
    model
        .period
        .class(class)
        .iter()
        .map(|&a| lam[a])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `sup_{a ∈ A_{(j-n) mod p}} λ^{(n)}_a(μ)`: depth-`n` pressure with the
/// deepest level in class `j`.
pub fn finite_pressure(model: &WeightedChainModel, mu: f64, j: usize, n: usize) -> f64 {
    let seq = pressure_sequence(model, mu, n);
    sup_over_class(model, &seq[n], j as i64 - n as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureResult {
    pub mu: f64,
    pub class_index: usize,
    pub value: f64,
    pub iterations: usize,
    pub error_bound: f64,
}

const MAX_PRESSURE_DEPTH: usize = 4096;

/// Limit pressure `P_j(μ)`, iterated until `C d^{-n} (|μ| + 2) < tol`.
pub fn pressure(model: &WeightedChainModel, mu: f64, j: usize, tol: f64) -> PressureResult {
    let e = tilted_matrix(model, mu);
    let d = model.arity() as f64;
    let c = model.bound_constant();
    let mut lam = vec![0.0; model.size()];
    let mut k = d / (d - 1.0);
    let mut n = 0;
    let mut bound = c * (mu.abs() + 2.0);
    while (bound >= tol || n < model.period.period) && n < MAX_PRESSURE_DEPTH {
        lam = pressure_step(&e, &lam, k);
        k *= d;
        n += 1;
        bound /= d;
    }
    PressureResult {
        mu,
        class_index: j,
        value: sup_over_class(model, &lam, j as i64 - n as i64),
        iterations: n,
        error_bound: bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateOptions {
    pub pressure_tol: f64,
    /// Relative tolerance of each golden-section search.
    pub xtol: f64,
    /// Brackets `[-2^k, 2^k]` are tried for `k = 0..=max_doublings`.
    pub max_doublings: u32,
    /// Starting tilt for the endpoint slopes.
    pub mu_big: f64,
    pub endpoint_tol: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            pressure_tol: 1e-12,
            xtol: 1e-10,
            max_doublings: 40,
            mu_big: 1e3,
            endpoint_tol: 1e-6,
        }
    }
}

/// One evaluation of the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub alpha: f64,
    #[serde(with = "crate::numeric::ext_float")]
    pub rate: f64,
    pub argmax_mu: f64,
    pub finite: bool,
}

fn pressure_slope(model: &WeightedChainModel, mu: f64, j: usize, tol: f64) -> f64 {
    (pressure(model, mu + 1.0, j, tol).value - pressure(model, mu - 1.0, j, tol).value) / 2.0
}

/// `(α₁, α₂)`: slopes of the pressure as `μ → ∓∞`, by central differences
/// at `±μ_big`, doubling `μ_big` until the slopes settle.
pub fn domain_endpoints(model: &WeightedChainModel, j: usize, opts: &RateOptions) -> (f64, f64) {
    let limit = |sign: f64| {
        let mut mu = opts.mu_big;
        let mut prev = pressure_slope(model, sign * mu, j, opts.pressure_tol);
        for _ in 0..30 {
            mu *= 2.0;
            let s = pressure_slope(model, sign * mu, j, opts.pressure_tol);
            if (s - prev).abs() < opts.endpoint_tol {
                return s;
            }
            prev = s;
        }
        prev
    };
    (limit(-1.0), limit(1.0))
}

/// `Λ*_j(α) = sup_μ (μα - P_j(μ))`.
pub fn rate(model: &WeightedChainModel, j: usize, alpha: f64, opts: &RateOptions) -> RatePoint {
    rate_inner(model, j, alpha, opts, None)
}

/// [`rate`] with precomputed domain endpoints for the slope test.
pub fn rate_with_domain(
    model: &WeightedChainModel,
    j: usize,
    alpha: f64,
    domain: (f64, f64),
    opts: &RateOptions,
) -> RatePoint {
    rate_inner(model, j, alpha, opts, Some(domain))
}

fn rate_inner(
    model: &WeightedChainModel,
    j: usize,
    alpha: f64,
    opts: &RateOptions,
    domain: Option<(f64, f64)>,
) -> RatePoint {
    let f = |mu: f64| mu * alpha - pressure(model, mu, j, opts.pressure_tol).value;
    let mut best = (0.0, f(0.0));
    let mut prev = best.1;
    for k in 0..=opts.max_doublings {
        let bound = 2f64.powi(k as i32);
        let (x, v) = golden_max(f, -bound, bound, opts.xtol);
        if v > best.1 {
            best = (x, v);
        }
        let interior = x.abs() < bound * (1.0 - 1e-6);
        if interior || (k > 0 && v - prev < 1e-12) {
            return RatePoint {
                alpha,
                rate: best.1.max(0.0),
                argmax_mu: best.0,
                finite: true,
            };
        }
        prev = v;
    }
    let (a1, a2) = domain.unwrap_or_else(|| domain_endpoints(model, j, opts));
    let slack = 10.0 * opts.endpoint_tol;
    if alpha < a1 - slack || alpha > a2 + slack {
        RatePoint {
            alpha,
            rate: f64::INFINITY,
            argmax_mu: best.0,
            finite: false,
        }
    } else {
        RatePoint {
            alpha,
            rate: best.1.max(0.0),
            argmax_mu: best.0,
            finite: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    /// Extension beyond the domain on each side; 5% of its width if unset.
    pub margin: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 200,
            margin: None,
            lo: None,
            hi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub class_index: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    /// LLN limit for this phase, where the curve vanishes.
    pub alpha_star: f64,
    pub points: Vec<RatePoint>,
}

/// Rate function over a uniform `α` grid around the finiteness domain.
pub fn rate_curve(model: &WeightedChainModel, j: usize, grid: &GridSpec, opts: &RateOptions) -> Result<RateCurve> {
    if j >= model.period.period {
        return Err(Error::invalid(format!("class {j} out of range for period {}", model.period.period)));
    }
    if grid.points < 2 {
        return Err(Error::invalid("rate grid needs at least two points"));
    }
    let (a1, a2) = domain_endpoints(model, j, opts);
    let margin = grid.margin.unwrap_or_else(|| if a2 > a1 { 0.05 * (a2 - a1) } else { 0.05 });
    let lo = grid.lo.unwrap_or(a1 - margin);
    let hi = grid.hi.unwrap_or(a2 + margin);
    let step = (hi - lo) / (grid.points - 1) as f64;
    let points = (0..grid.points)
        .into_par_iter()
        .map(|i| rate_with_domain(model, j, lo + step * i as f64, (a1, a2), opts))
        .collect();
    Ok(RateCurve {
        class_index: j,
        alpha1: a1,
        alpha2: a2,
        alpha_star: lln_limit(model, j)?,
        points,
    })
}

/// Stationary laws `D[c]` of the chain on each class: `D[0]` is the invariant
/// distribution of `M^p` on class 0 and `D[c+1] = M D[c]`.
pub fn class_stationary(model: &WeightedChainModel) -> Result<Vec<Vec<f64>>> {
    let n = model.size();
    let p = model.period.period;
    let m = model.m_linear();
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|a| compensated_sum((0..n).map(|b| m[a][b] * v[b])))
            .collect()
    };
    let class0 = model.period.class(0);
    let mut v = vec![0.0; n];
    for &a in class0 {
        v[a] = 1.0 / class0.len() as f64;
    }
    let max_iter = 1_000_000;
    let mut converged = false;
    for _ in 0..max_iter {
        let mut u = v.clone();
        for _ in 0..p {
            u = apply(&u);
        }
        // Lazy step: converges even when M^p is periodic on a subclass.
        let next: Vec<f64> = v.iter().zip(&u).map(|(a, b)| 0.5 * (a + b)).collect();
        let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if diff < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "stationary distribution of M^p",
            iterations: max_iter,
            lo: f64::NAN,
            hi: f64::NAN,
        });
    }
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    let mut out = vec![v];
    for c in 1..p {
        let next = apply(&out[c - 1]);
        out.push(next);
    }
    Ok(out)
}

/// `Σ_{a,b} D_b M_ab log W_ab`.
fn edge_expectation(model: &WeightedChainModel, dist: &[f64]) -> f64 {
    let n = model.size();
    compensated_sum((0..n).flat_map(|b| {
        model
            .m
            .column(b)
            .iter()
            .map(move |&(a, lm)| dist[b] * lm.exp() * model.w.log_at(a, b))
    }))
}

/// Almost-sure limit of the sample mean along depths `n ≡ j (mod p)` with
/// the root in class 0.
pub fn lln_limit(model: &WeightedChainModel, j: usize) -> Result<f64> {
    Ok(lln_phases(model)?[j % model.period.period])
}

/// [`lln_limit`] for every phase.
pub fn lln_phases(model: &WeightedChainModel) -> Result<Vec<f64>> {
    let p = model.period.period;
    let d = model.arity() as f64;
    let stat = class_stationary(model)?;
    let terms: Vec<f64> = stat.iter().map(|s| edge_expectation(model, s)).collect();
    let norm: f64 = (0..p).map(|l| d.powi(-(l as i32))).sum();
    Ok((0..p)
        .map(|j| {
            compensated_sum((0..p).map(|i| {
                let c = (j as i64 - 1 - i as i64).rem_euclid(p as i64) as usize;
                d.powi(-(i as i32)) / norm * terms[c]
            }))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaBounds {
    pub beta_minus: f64,
    pub beta_plus: f64,
    /// `β_i = Σ_c π(A_c) α*_{i+c}` for each phase `i`.
    pub phases: Vec<f64>,
}

/// Limits of the expected sample mean when the root is drawn from `init`
/// (the stationary law of `M` if `None`).
pub fn beta_bounds(model: &WeightedChainModel, init: Option<&[f64]>) -> Result<BetaBounds> {
    let p = model.period.period;
    let alpha = lln_phases(model)?;
    let pi: Vec<f64> = match init {
        Some(v) => {
            if v.len() != model.size() {
                return Err(Error::invalid("initial distribution has the wrong length"));
            }
            v.to_vec()
        }
        None => {
            let stat = class_stationary(model)?;
            (0..model.size())
                .map(|a| stat.iter().map(|s| s[a]).sum::<f64>() / p as f64)
                .collect()
        }
    };
    let mass: Vec<f64> = (0..p)
        .map(|c| model.period.class(c as i64).iter().map(|&a| pi[a]).sum())
        .collect();
    let phases: Vec<f64> = (0..p)
        .map(|i| compensated_sum((0..p).map(|c| mass[c] * alpha[(i + c) % p])))
        .collect();
    Ok(BetaBounds {
        beta_minus: phases.iter().cloned().fold(f64::INFINITY, f64::min),
        beta_plus: phases.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        phases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    pub(crate) fn example_one() -> WeightedChainModel {
        let base = AdjacencyModel::from_rows(&[vec![1, 1], vec![1, 0]], 2).unwrap();
        WeightedChainModel::new(base, &[vec![0.5, 1.0], vec![0.5, 0.0]], &[vec![1.0, 2.0], vec![1.0, 0.0]]).unwrap()
    }

    fn extreme() -> WeightedChainModel {
        let base = AdjacencyModel::from_rows(&[vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]], 2).unwrap();
        let m = vec![vec![0.0, 1.0, 1.0], vec![0.5, 0.0, 0.0], vec![0.5, 0.0, 0.0]];
        let w = vec![vec![0.0, 1.0, 1.0], vec![2.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
        WeightedChainModel::new(base, &m, &w).unwrap()
    }

    #[test]
    fn phi_examples() {
        let p = vec![vec![0.5, 1.0], vec![0.5, 0.0]];
        let v = phi(&p, &[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((v[0] - LN_2).abs() < 1e-15 && v[1].abs() < 1e-15);
        assert_eq!(phi(&p, &p).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            phi(&p, &[vec![1.0, 1.0], vec![0.0, 1.0]]),
            Err(Error::SupportViolation { row: 1, col: 0 })
        ));
    }

    #[test]
    fn tilt_example() {
        let e = tilted_matrix(&example_one(), 1.0);
        assert!((e.at(0, 0) - 0.5).abs() < 1e-15);
        assert!((e.at(1, 0) - 0.5).abs() < 1e-15);
        assert!((e.at(0, 1) - 2.0).abs() < 1e-15);
        assert_eq!(e.at(1, 1), 0.0);
    }

    #[test]
    fn pressure_at_zero_vanishes() {
        let r = pressure(&example_one(), 0.0, 0, 1e-12);
        assert!(r.value.abs() < 1e-10);
        assert!(r.error_bound < 1e-12);
    }

    #[test]
    fn example_one_rate() {
        let m = example_one();
        let opts = RateOptions::default();
        let (a1, a2) = domain_endpoints(&m, 0, &opts);
        assert!(a1.abs() < 1e-4 && (a2 - 2.0 * LN_2 / 3.0).abs() < 1e-4, "{a1} {a2}");
        assert!(rate(&m, 0, LN_2 / 3.0, &opts).rate.abs() < 1e-6);
        assert!(!rate(&m, 0, 0.9, &opts).finite);
        assert!(rate(&m, 0, 0.3, &opts).rate > 0.0);
    }

    #[test]
    fn lln_example_one() {
        let v = lln_limit(&example_one(), 0).unwrap();
        assert!((v - LN_2 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn extreme_phases_and_beta() {
        let m = extreme();
        let ph = lln_phases(&m).unwrap();
        assert!((ph[0] - LN_2 / 3.0).abs() < 1e-12);
        assert!((ph[1] - 2.0 * LN_2 / 3.0).abs() < 1e-12);
        let b = beta_bounds(&m, None).unwrap();
        assert!((b.beta_minus - LN_2 / 2.0).abs() < 1e-12);
        assert!((b.beta_plus - LN_2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_observable() {
        let base = AdjacencyModel::from_rows(&[vec![1, 1], vec![1, 0]], 2).unwrap();
        let m = WeightedChainModel::new(base, &[vec![0.5, 1.0], vec![0.5, 0.0]], &[vec![1.0; 2], vec![1.0; 2]]).unwrap();
        let opts = RateOptions::default();
        let (a1, a2) = domain_endpoints(&m, 0, &opts);
        assert!(a1.abs() < 1e-9 && a2.abs() < 1e-9);
        assert_eq!(rate(&m, 0, 0.0, &opts).rate, 0.0);
        assert!(!rate(&m, 0, 0.1, &opts).finite);
        assert!(!rate(&m, 0, -0.1, &opts).finite);
    }

    #[test]
    fn rejects_bad_chains() {
        let base = AdjacencyModel::from_rows(&[vec![1, 1], vec![1, 0]], 2).unwrap();
        assert!(WeightedChainModel::new(base.clone(), &[vec![0.4, 1.0], vec![0.5, 0.0]], &[vec![1.0; 2], vec![1.0; 2]]).is_err());
        assert!(WeightedChainModel::new(base.clone(), &[vec![0.5, 1.0], vec![0.5, 0.0]], &[vec![1.0, 0.0], vec![1.0, 1.0]]).is_err());
        assert!(WeightedChainModel::new(base, &[vec![1.0, 1.0], vec![0.0, 0.0]], &[vec![1.0; 2], vec![1.0; 2]]).is_err());
    }
}
