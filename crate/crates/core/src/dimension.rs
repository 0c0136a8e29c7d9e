//! Hausdorff dimension of a Markov hom tree-shift.
//!
//! For an irreducible adjacency matrix of period `p` the dimension is
//! `min_r c(r) · log ρ_{A_0}(L_{A,r})` over exponent vectors `r ∈ (0, d]^p`
//! with product one, where `c(r) = (Σ_ℓ Π_{i≤ℓ} r_i^{-1})^{-1}`. The search
//! runs over the probability simplex, which parameterises the admissible `r`
//! bijectively.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet_graph::{
    find_a0_and_period, is_irreducible, linear_spectral_radius, period_at, reachability, AdjacencyModel,
    PeriodStructure,
};
use crate::error::{Error, Result};
use crate::optimize::{composition_count, compositions, nelder_mead, project_to_simplex, NelderMeadOptions};
use crate::rate_function::{class_stationary, lln_limit, WeightedChainModel};
use crate::transfer_op::{entropy_iterate, principal_eigenpair, psi, EigenOptions, ExponentVector, Rotation};
use crate::weights::WeightMatrix;

/// Point of the probability simplex `Γ_[p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint(pub Vec<f64>);

impl SimplexPoint {
    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.0.iter().sum();
        if self.0.is_empty() || self.0.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("{:?} is not a simplex point", self.0)));
        }
        Ok(())
    }
}

/// Exponents `r`, the intermediate weights `q` and the coefficient `q_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub r: ExponentVector,
    pub q: Vec<f64>,
    pub coefficient: f64,
}

fn simplex_constant(d: f64, p: usize) -> f64 {
    (d.powi(p as i32) - d.powi(p as i32 - 1)) / (d.powi(p as i32) - 1.0)
}

/// `s ↦ r` with `q_i = c Σ_j s_{i-j} d^{-j}` and `r_i = q_i / q_{i+1}`.
pub fn simplex_to_ratios(s: &SimplexPoint, d: usize) -> Ratios {
    let p = s.0.len();
    let df = d as f64;
    let c = simplex_constant(df, p);
    let q: Vec<f64> = (0..p)
        .map(|i| {
            c * (0..p)
                .map(|j| s.0[(i + p - j) % p] * df.powi(-(j as i32)))
                .sum::<f64>()
        })
        .collect();
    let r = ExponentVector((0..p).map(|i| q[i] / q[(i + 1) % p]).collect());
    let coefficient = coefficient(&r, 0);
    Ratios { r, q, coefficient }
}

/// Inverse of [`simplex_to_ratios`].
pub fn ratios_to_simplex(r: &ExponentVector, d: usize) -> SimplexPoint {
    let p = r.period();
    let df = d as f64;
    let c = simplex_constant(df, p);
    let mut q = vec![coefficient(r, 0)];
    for i in 1..p {
        q.push(q[i - 1] / r.0[i - 1]);
    }
    let denom = c * (df - df.powi(1 - p as i32));
    let s = (0..p)
        .map(|k| {
            let prev = q[(k + p - 1) % p];
            (df * q[k] - prev) / denom
        })
        .collect();
    SimplexPoint(s)
}

/// `(Σ_{ℓ<p} Π_{i≤ℓ} r_{i+j}^{-1})^{-1}`.
pub fn coefficient(r: &ExponentVector, j: usize) -> f64 {
    let p = r.period();
    let mut prod = 1.0;
    let mut sum = 0.0;
    for i in 0..p {
        prod /= r.0[(i + j) % p];
        sum += prod;
    }
    1.0 / sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Grid denominator `N` (points have coordinates `k/N`); chosen from `p` if unset.
    pub grid_resolution: Option<usize>,
    /// Offset in `[0, 1)` shifting every grid point into the interior.
    pub grid_phase: f64,
    pub max_grid_points: usize,
    /// Number of best grid points refined by Nelder–Mead.
    pub starts: usize,
    /// Stop restarting Nelder–Mead once a restart improves by less than this.
    pub improvement_tol: f64,
    pub max_restarts: usize,
    pub eigen: EigenOptions,
    pub rotation: Rotation,
    /// Minimise every class separately and report the values.
    pub class_diagnostics: bool,
    /// Depth of the block-count recursion used for `h_top`.
    pub entropy_depth: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_resolution: None,
            grid_phase: 0.0,
            max_grid_points: 200_000,
            starts: 3,
            improvement_tol: 1e-10,
            max_restarts: 8,
            eigen: EigenOptions::default(),
            rotation: Rotation::Rotated,
            class_diagnostics: true,
            entropy_depth: 40,
        }
    }
}

/// Result of minimising the objective for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMinimum {
    pub class_index: usize,
    #[serde(with = "crate::numeric::ext_float")]
    pub value: f64,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub evaluations: usize,
    /// Evaluations whose eigen-iteration hit the budget; the upper end of
    /// the Collatz–Wielandt bracket was used for those.
    pub nonconverged: usize,
}

/// Objective evaluator bound to one model and period structure.
#[derive(Debug, Clone)]
pub struct DimensionProblem {
    period: PeriodStructure,
    w: WeightMatrix,
    arity: usize,
    eigen: EigenOptions,
    rotation: Rotation,
}

const PENALTY: f64 = 10.0;

impl DimensionProblem {
    pub fn new(model: &AdjacencyModel, period: PeriodStructure, eigen: EigenOptions, rotation: Rotation) -> Self {
        Self {
            period,
            w: WeightMatrix::from_adjacency(model),
            arity: model.arity(),
            eigen,
            rotation,
        }
    }

    pub fn period(&self) -> &PeriodStructure {
        &self.period
    }

    fn rotation_for(&self, j: usize) -> usize {
        match self.rotation {
            Rotation::Rotated => j,
            Rotation::Literal => 0,
        }
    }

    /// `coefficient(r, j) · log ρ_{A_j}(L_{A,r})` at `r = r(s)`.
    pub fn objective(&self, s: &SimplexPoint, j: usize) -> Result<f64> {
        let ratios = simplex_to_ratios(s, self.arity);
        let rot = self.rotation_for(j);
        let e = principal_eigenpair(&self.w, &self.period, &ratios.r, j, rot, &self.eigen)?;
        Ok(coefficient(&ratios.r, rot) * e.log_rho)
    }

    /// Like [`Self::objective`] but falls back to the upper bracket end when
    /// the eigen-iteration does not converge. Returns `(value, converged)`.
    fn objective_lenient(&self, s: &[f64], j: usize) -> (f64, bool) {
        let sp = SimplexPoint(s.to_vec());
        let ratios = simplex_to_ratios(&sp, self.arity);
        let rot = self.rotation_for(j);
        let c = coefficient(&ratios.r, rot);
        match principal_eigenpair(&self.w, &self.period, &ratios.r, j, rot, &self.eigen) {
            Ok(e) => (c * e.log_rho, true),
            Err(Error::NoConvergence { hi, .. }) => (c * hi, false),
            Err(_) => (f64::INFINITY, false),
        }
    }

    fn grid_resolution(&self, opts: &SearchOptions) -> Result<usize> {
        let p = self.period.period;
        let mut n = opts.grid_resolution.unwrap_or(if p <= 3 {
            50
        } else if p <= 5 {
            12
        } else {
            8
        });
        while n > 0 && composition_count(n, p) > opts.max_grid_points as u128 {
            n -= 1;
        }
        if n == 0 {
            return Err(Error::SearchFailed(format!(
                "no simplex grid for period {p} within {} points",
                opts.max_grid_points
            )));
        }
        Ok(n)
    }

    /// Grid search followed by Nelder–Mead from the best grid points.
    pub fn minimize_class(&self, j: usize, opts: &SearchOptions) -> Result<ClassMinimum> {
        let p = self.period.period;
        if p == 1 {
            let v = linear_spectral_radius(&self.w)?;
            return Ok(ClassMinimum {
                class_index: 0,
                value: v,
                s: vec![1.0],
                r: vec![1.0],
                evaluations: 0,
                nonconverged: 0,
            });
        }
        let n = self.grid_resolution(opts)?;
        let phase = opts.grid_phase;
        let denom = n as f64 + p as f64 * phase;
        let grid: Vec<Vec<f64>> = compositions(n, p)
            .into_iter()
            .map(|k| k.into_iter().map(|ki| (ki as f64 + phase) / denom).collect())
            .collect();
        let values: Vec<(f64, bool)> = grid.par_iter().map(|s| self.objective_lenient(s, j)).collect();
        let mut evaluations = grid.len();
        let mut nonconverged = values.iter().filter(|v| !v.1).count();
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| values[a].0.total_cmp(&values[b].0).then(a.cmp(&b)));

        let mut best: Option<(Vec<f64>, f64)> = None;
        for &start in order.iter().take(opts.starts.max(1)) {
            let (s, v, ev, nc) = self.refine(&grid[start], values[start].0, j, 1.0 / n as f64, opts);
            evaluations += ev;
            nonconverged += nc;
            if best.as_ref().map_or(true, |b| v < b.1) {
                best = Some((s, v));
            }
        }
        let (s, value) = best.expect("at least one start");
        let r = simplex_to_ratios(&SimplexPoint(s.clone()), self.arity).r.0;
        Ok(ClassMinimum {
            class_index: j,
            value,
            s,
            r,
            evaluations,
            nonconverged,
        })
    }

    fn refine(&self, s0: &[f64], f0: f64, j: usize, step: f64, opts: &SearchOptions) -> (Vec<f64>, f64, usize, usize) {
        let p = s0.len();
        let mut nonconverged = 0;
        let mut evaluations = 0;
        let mut penalised = |z: &[f64]| -> f64 {
            let mut s = z.to_vec();
            s.push(1.0 - z.iter().sum::<f64>());
            let proj = project_to_simplex(&s);
            let dist: f64 = s.iter().zip(&proj).map(|(a, b)| (a - b).abs()).sum();
            let (v, ok) = self.objective_lenient(&proj, j);
            if !ok {
                nonconverged += 1;
            }
            v + PENALTY * dist
        };
        let mut z: Vec<f64> = s0[..p - 1].to_vec();
        let mut fz = f0;
        let mut step = step;
        for _ in 0..=opts.max_restarts {
            let res = nelder_mead(
                &mut penalised,
                &z,
                &NelderMeadOptions {
                    initial_step: step,
                    ..Default::default()
                },
            );
            evaluations += res.evaluations;
            let improvement = fz - res.f;
            if res.f < fz {
                z = res.x;
                fz = res.f;
            }
            if improvement < opts.improvement_tol {
                break;
            }
            step = (step * 0.1).max(1e-6);
        }
        let mut s = z.clone();
        s.push(1.0 - z.iter().sum::<f64>());
        let s = project_to_simplex(&s);
        let (v, ok) = self.objective_lenient(&s, j);
        if !ok {
            nonconverged += 1;
        }
        (s, v, evaluations + 1, nonconverged)
    }
}

/// Objective of the dimension formula for class `j` (rotated pairing).
pub fn dim_objective(model: &AdjacencyModel, period: &PeriodStructure, s: &SimplexPoint, j: usize) -> Result<f64> {
    s.validate()?;
    DimensionProblem::new(model, period.clone(), EigenOptions::default(), Rotation::Rotated).objective(s, j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactIrreducible,
    UpperBoundGeneral,
}

/// Contribution of one recurrent component to the general upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub root: usize,
    pub closure: Vec<usize>,
    pub period: usize,
    #[serde(with = "crate::numeric::ext_float")]
    pub value: f64,
    pub argmin_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    #[serde(with = "crate::numeric::ext_float")]
    pub dim: f64,
    pub argmin_r: Vec<f64>,
    pub argmin_s: Vec<f64>,
    /// Minimised objective for each class (diagnostic; equal up to solver error).
    #[serde(with = "crate::numeric::ext_float::vec")]
    pub class_values: Vec<f64>,
    pub class_argmins: Vec<Vec<f64>>,
    #[serde(with = "crate::numeric::ext_float")]
    pub h_top: f64,
    #[serde(with = "crate::numeric::ext_float")]
    pub log_rho_linear: f64,
    pub method: Method,
    pub period: usize,
    pub a0: usize,
    pub evaluations: usize,
    pub nonconverged_evaluations: usize,
    pub rotation: Rotation,
    pub components: Vec<ComponentBound>,
}

/// Hausdorff dimension of an irreducible tree-shift.
pub fn hausdorff_dimension(model: &AdjacencyModel, opts: &SearchOptions) -> Result<DimensionReport> {
    if !is_irreducible(model) {
        return Err(Error::NotIrreducible);
    }
    let period = find_a0_and_period(model)?;
    let p = period.period;
    let problem = DimensionProblem::new(model, period.clone(), opts.eigen, opts.rotation);
    let m0 = problem.minimize_class(0, opts)?;
    let mut classes = vec![m0.clone()];
    if opts.class_diagnostics {
        for j in 1..p {
            classes.push(problem.minimize_class(j, opts)?);
        }
    }
    let evaluations = classes.iter().map(|c| c.evaluations).sum();
    let nonconverged_evaluations = classes.iter().map(|c| c.nonconverged).sum();
    Ok(DimensionReport {
        dim: m0.value,
        argmin_r: m0.r.clone(),
        argmin_s: m0.s.clone(),
        class_values: classes.iter().map(|c| c.value).collect(),
        class_argmins: classes.iter().map(|c| c.s.clone()).collect(),
        h_top: entropy_iterate(model, opts.entropy_depth).h_top,
        log_rho_linear: linear_spectral_radius(&WeightMatrix::from_adjacency(model))?,
        method: Method::ExactIrreducible,
        period: p,
        a0: period.a0,
        evaluations,
        nonconverged_evaluations,
        rotation: opts.rotation,
        components: vec![],
    })
}

/// Upper bound valid without irreducibility: the maximum, over recurrent
/// symbols `a`, of the minimised objective on the descendant closure of `a`
/// with `a` as the distinguished symbol.
pub fn general_upper_bound(model: &AdjacencyModel, opts: &SearchOptions) -> Result<DimensionReport> {
    let reach = reachability(model);
    if reach.recurrent.is_empty() {
        return Err(Error::EmptyRecurrentSet);
    }
    let mut components = Vec::new();
    let mut best: Option<(f64, ClassMinimum, usize, usize)> = None;
    let mut evaluations = 0;
    let mut nonconverged = 0;
    for comp in &reach.scc_list {
        let a = comp[0];
        if !reach.recurrent.contains(&a) {
            continue;
        }
        let closure = reach.closures[a].clone();
        let sub = model.submodel(&closure);
        let local = closure.iter().position(|&x| x == a).expect("a in its closure");
        let per = period_at(&sub, local)?;
        let problem = DimensionProblem::new(&sub, per.clone(), opts.eigen, opts.rotation);
        let m = problem.minimize_class(0, opts)?;
        evaluations += m.evaluations;
        nonconverged += m.nonconverged;
        components.push(ComponentBound {
            root: a,
            closure: closure.clone(),
            period: per.period,
            value: m.value,
            argmin_s: m.s.clone(),
        });
        if best.as_ref().map_or(true, |b| m.value > b.0) {
            best = Some((m.value, m, per.period, a));
        }
    }
    let (dim, m, p, a) = best.expect("recurrent set is nonempty");
    Ok(DimensionReport {
        dim,
        argmin_r: m.r.clone(),
        argmin_s: m.s.clone(),
        class_values: vec![dim],
        class_argmins: vec![m.s],
        h_top: entropy_iterate(model, opts.entropy_depth).h_top,
        log_rho_linear: linear_spectral_radius(&WeightMatrix::from_adjacency(model))?,
        method: Method::UpperBoundGeneral,
        period: p,
        a0: a,
        evaluations,
        nonconverged_evaluations: nonconverged,
        rotation: opts.rotation,
        components,
    })
}

/// Exact formula when irreducible, the general upper bound otherwise.
pub fn dimension_auto(model: &AdjacencyModel, opts: &SearchOptions) -> Result<DimensionReport> {
    if is_irreducible(model) {
        hausdorff_dimension(model, opts)
    } else {
        general_upper_bound(model, opts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBoundReport {
    #[serde(with = "crate::numeric::ext_float")]
    pub dim: f64,
    #[serde(with = "crate::numeric::ext_float")]
    pub log_rho: f64,
    #[serde(with = "crate::numeric::ext_float")]
    pub h_top: f64,
    /// `dim ≤ log ρ(A) + 1e-9`.
    pub dim_le_log_rho: bool,
    /// Every column of `A` has the same sum.
    pub constant_column_sums: bool,
    /// `|dim - log ρ| ≤ 1e-6`.
    pub dim_equals_log_rho: bool,
    /// `|h_top - log ρ| ≤ 1e-6`.
    pub h_top_equals_log_rho: bool,
    pub method: Method,
}

/// Compares the dimension with `log ρ(A)` and reports the column-sum predicate.
pub fn spectral_bound_report(model: &AdjacencyModel, opts: &SearchOptions) -> Result<SpectralBoundReport> {
    let rep = dimension_auto(model, opts)?;
    Ok(SpectralBoundReport {
        dim: rep.dim,
        log_rho: rep.log_rho_linear,
        h_top: rep.h_top,
        dim_le_log_rho: rep.dim <= rep.log_rho_linear + 1e-9,
        constant_column_sums: model.has_constant_column_sums(),
        dim_equals_log_rho: (rep.dim - rep.log_rho_linear).abs() <= 1e-6,
        h_top_equals_log_rho: (rep.h_top - rep.log_rho_linear).abs() <= 1e-6,
        method: rep.method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalMeasure {
    /// Column-stochastic transition matrix, row = child.
    pub m_star: Vec<Vec<f64>>,
    /// Stationary law of `(M*)^p` on class 0.
    pub pi_star: Vec<f64>,
    /// Law-of-large-numbers limit of `-(1/|Λ|) log P` for each depth phase.
    pub phase_values: Vec<f64>,
    /// Minimum of `phase_values`; equals the dimension at the optimum.
    pub validation: f64,
    pub dim: f64,
}

/// Markov measure attaining the dimension, built from the eigenvector chain
/// at the optimal exponents and verified through the LLN identity.
pub fn optimal_markov_measure(
    model: &AdjacencyModel,
    report: &DimensionReport,
    eigen: &EigenOptions,
    tol: f64,
) -> Result<OptimalMeasure> {
    if !is_irreducible(model) {
        return Err(Error::NotIrreducible);
    }
    let period = find_a0_and_period(model)?;
    let p = period.period;
    let n = model.size();
    let r = ExponentVector(report.argmin_r.clone());
    if r.period() != p {
        return Err(Error::invalid("report does not match the model's period"));
    }
    let w = WeightMatrix::from_adjacency(model);
    let v = principal_eigenpair(&w, &period, &r, 0, 0, eigen)?;
    // y[k] lives on class -k: y[k+1] = Ψ_{r_k}(y[k]).
    let mut chain = vec![v.eigvec.values.clone()];
    for k in 0..p.saturating_sub(1) {
        let next = psi(&w, r.0[k], &chain[k]);
        chain.push(crate::weights::LogVector::new(next).normalized().values);
    }
    let mut m_star = vec![vec![0.0; n]; n];
    for b in 0..n {
        let c = period.class_of[b].expect("irreducible: every symbol has a class");
        let k = (2 * p - c - 1) % p;
        let y = &chain[k];
        let col: Vec<(usize, f64)> = model.children(b).map(|a| (a, y[a])).collect();
        let z = crate::numeric::logsumexp(col.iter().map(|x| x.1));
        for (a, ya) in col {
            m_star[a][b] = (ya - z).exp();
        }
    }
    let inv: Vec<Vec<f64>> = m_star
        .iter()
        .map(|row| row.iter().map(|&x| if x > 0.0 { 1.0 / x } else { 0.0 }).collect())
        .collect();
    let chain_model = WeightedChainModel::new(model.clone(), &m_star, &inv)?;
    let pi_star = class_stationary(&chain_model)?.swap_remove(0);
    let phase_values = (0..p).map(|j| lln_limit(&chain_model, j)).collect::<Result<Vec<_>>>()?;
    let validation = phase_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if (validation - report.dim).abs() > tol {
        return Err(Error::ValidationFailed {
            expected: report.dim,
            got: validation,
            tol,
        });
    }
    Ok(OptimalMeasure {
        m_star,
        pi_star,
        phase_values,
        validation,
        dim: report.dim,
    })
}
