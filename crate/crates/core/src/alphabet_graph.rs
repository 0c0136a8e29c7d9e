//! Symbolic model: adjacency matrix, period structure, reachability and the
//! linear spectral radius.
//!
//! **Orientation.** `adjacency[a][b] == 1` means a node labelled `b` may have
//! a child labelled `a`: rows are children, columns are parents. The directed
//! graph used for reachability has an edge `b -> a` for every such entry.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::gcd;
use crate::weights::WeightMatrix;

/// Default cap on the alphabet size.
pub const DEFAULT_MAX_SYMBOLS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyModel {
    symbols: Vec<String>,
    n: usize,
    adj: Vec<bool>,
    arity: usize,
}

#[derive(Serialize, Deserialize)]
struct AdjacencyRepr {
    symbols: Vec<String>,
    adjacency: Vec<Vec<u8>>,
    d: usize,
}

impl Serialize for AdjacencyModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AdjacencyRepr {
            symbols: self.symbols.clone(),
            adjacency: self.rows(),
            d: self.arity,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AdjacencyModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = AdjacencyRepr::deserialize(d)?;
        AdjacencyModel::new(r.symbols, &r.adjacency, r.d).map_err(serde::de::Error::custom)
    }
}

impl AdjacencyModel {
    /// Validates and builds a model. `rows[a][b]` is the child-`a`/parent-`b` entry.
    pub fn new(symbols: Vec<String>, rows: &[Vec<u8>], arity: usize) -> Result<Self> {
        let n = symbols.len();
        if n == 0 {
            return Err(Error::invalid("alphabet is empty"));
        }
        if arity < 2 {
            return Err(Error::invalid(format!("tree arity d must be at least 2, got {arity}")));
        }
        for i in 0..n {
            for j in 0..i {
                if symbols[i] == symbols[j] {
                    return Err(Error::invalid(format!(
                        "duplicate symbol name {:?} at positions {j} and {i}",
                        symbols[i]
                    )));
                }
            }
        }
        if rows.len() != n {
            return Err(Error::invalid(format!(
                "adjacency has {} rows but there are {n} symbols",
                rows.len()
            )));
        }
        let mut adj = Vec::with_capacity(n * n);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation {
                    msg: format!("adjacency row has {} entries, expected {n}", row.len()),
                    row: Some(a),
                    col: None,
                });
            }
            for (b, &v) in row.iter().enumerate() {
                match v {
                    0 => adj.push(false),
                    1 => adj.push(true),
                    _ => return Err(Error::invalid_at(format!("adjacency entry {v} is not 0 or 1"), a, b)),
                }
            }
        }
        Ok(Self {
            symbols,
            n,
            adj,
            arity,
        })
    }

    /// Model with symbols named `0..n`.
    pub fn from_rows(rows: &[Vec<u8>], arity: usize) -> Result<Self> {
        let symbols = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(symbols, rows, arity)
    }

    /// Full shift on `k` symbols.
    pub fn full_shift(k: usize, arity: usize) -> Self {
        Self::from_rows(&vec![vec![1; k]; k], arity).expect("full shift is valid")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == name)
    }

    #[inline]
    pub fn has_edge(&self, child: usize, parent: usize) -> bool {
        self.adj[child * self.n + parent]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.has_edge(a, b) as u8).collect())
            .collect()
    }

    /// Admissible children of `parent`.
    pub fn children(&self, parent: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&a| self.has_edge(a, parent))
    }

    pub fn column_sum(&self, parent: usize) -> usize {
        self.children(parent).count()
    }

    /// True when every column sum agrees.
    pub fn has_constant_column_sums(&self) -> bool {
        let c0 = self.column_sum(0);
        (1..self.n).all(|b| self.column_sum(b) == c0)
    }

    pub fn with_arity(&self, arity: usize) -> Result<Self> {
        Self::new(self.symbols.clone(), &self.rows(), arity)
    }

    /// Principal submodel on `keep` (in the given order).
    pub fn submodel(&self, keep: &[usize]) -> Self {
        let symbols = keep.iter().map(|&i| self.symbols[i].clone()).collect();
        let rows: Vec<Vec<u8>> = keep
            .iter()
            .map(|&a| keep.iter().map(|&b| self.has_edge(a, b) as u8).collect())
            .collect();
        Self::new(symbols, &rows, self.arity).expect("submodel of a valid model")
    }

    /// Whether every parent admits at least one child.
    pub fn satisfies_a0(&self) -> bool {
        (0..self.n).all(|b| self.column_sum(b) > 0)
    }
}

/// Indices kept by [`reduce_a0`], in increasing order.
pub fn reduce_a0_indices(model: &AdjacencyModel) -> Result<Vec<usize>> {
    let n = model.size();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        for b in 0..n {
            if alive[b] && !(0..n).any(|a| alive[a] && model.has_edge(a, b)) {
                alive[b] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    if keep.is_empty() {
        Err(Error::EmptyModel)
    } else {
        Ok(keep)
    }
}

/// Largest principal submodel in which every parent admits a child.
///
/// Symbols that cannot have children never occur in an infinite tree, so the
/// tree-shift is unchanged.
pub fn reduce_a0(model: &AdjacencyModel) -> Result<AdjacencyModel> {
    let keep = reduce_a0_indices(model)?;
    Ok(model.submodel(&keep))
}

/// Distinguished symbol, period and the cyclic class partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodStructure {
    pub a0: usize,
    pub period: usize,
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<Option<usize>>,
}

impl PeriodStructure {
    /// Class index reduced modulo the period (accepts negative offsets).
    pub fn class_index(&self, j: i64) -> usize {
        j.rem_euclid(self.period as i64) as usize
    }

    pub fn class(&self, j: i64) -> &[usize] {
        &self.classes[self.class_index(j)]
    }

    /// Boolean mask of class `j`.
    pub fn mask(&self, j: i64) -> Vec<bool> {
        let j = self.class_index(j);
        self.class_of.iter().map(|c| *c == Some(j)).collect()
    }
}

fn bfs_dist(model: &AdjacencyModel, src: usize) -> Vec<Option<usize>> {
    let n = model.size();
    let mut dist = vec![None; n];
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(b) = q.pop_front() {
        let db = dist[b].unwrap();
        for a in model.children(b) {
            if dist[a].is_none() {
                dist[a] = Some(db + 1);
                q.push_back(a);
            }
        }
    }
    dist
}

/// Period structure rooted at a prescribed `a0`, which must reach every symbol.
///
/// The period is the gcd of the cycle lengths through `a0`. If `a0` lies on no
/// cycle (possible only for reducible models) the gcd is taken over every
/// cycle reachable from `a0`; classes are BFS distances modulo the period.
pub fn period_at(model: &AdjacencyModel, a0: usize) -> Result<PeriodStructure> {
    let n = model.size();
    let dist = bfs_dist(model, a0);
    if dist.iter().any(|d| d.is_none()) {
        return Err(Error::A1Violated);
    }
    let dist: Vec<i64> = dist.into_iter().map(|d| d.unwrap() as i64).collect();
    let comp = strongly_connected_components(model);
    let comp_of = component_index(n, &comp);
    let edge_gcd = |pred: &dyn Fn(usize, usize) -> bool| {
        let mut g = 0u64;
        for b in 0..n {
            for a in model.children(b) {
                if pred(a, b) {
                    g = gcd(g, (dist[b] + 1 - dist[a]).unsigned_abs());
                }
            }
        }
        g
    };
    let own = comp_of[a0];
    let mut g = edge_gcd(&|a, b| comp_of[a] == own && comp_of[b] == own);
    if g == 0 {
        g = edge_gcd(&|a, b| comp_of[a] == comp_of[b]);
    }
    let period = g.max(1) as usize;
    let mut classes = vec![Vec::new(); period];
    let mut class_of = vec![None; n];
    for a in 0..n {
        let c = (dist[a] as usize) % period;
        classes[c].push(a);
        class_of[a] = Some(c);
    }
    Ok(PeriodStructure {
        a0,
        period,
        classes,
        class_of,
    })
}

/// Smallest symbol that reaches every symbol, with its period structure.
pub fn find_a0_and_period(model: &AdjacencyModel) -> Result<PeriodStructure> {
    for a0 in 0..model.size() {
        if bfs_dist(model, a0).iter().all(|d| d.is_some()) {
            return period_at(model, a0);
        }
    }
    Err(Error::A1Violated)
}

/// Strongly connected components of the parent -> child digraph, each sorted,
/// listed in order of their smallest member.
pub fn strongly_connected_components(model: &AdjacencyModel) -> Vec<Vec<usize>> {
    let n = model.size();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|a| bfs_dist(model, a).iter().map(|d| d.is_some()).collect())
        .collect();
    let mut assigned = vec![false; n];
    let mut out = Vec::new();
    for a in 0..n {
        if assigned[a] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&b| reach[a][b] && reach[b][a]).collect();
        for &b in &comp {
            assigned[b] = true;
        }
        out.push(comp);
    }
    out
}

fn component_index(n: usize, comps: &[Vec<usize>]) -> Vec<usize> {
    let mut idx = vec![0; n];
    for (i, c) in comps.iter().enumerate() {
        for &a in c {
            idx[a] = i;
        }
    }
    idx
}

/// True iff the parent -> child digraph is strongly connected.
pub fn is_irreducible(model: &AdjacencyModel) -> bool {
    strongly_connected_components(model).len() == 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachabilityReport {
    /// `closures[a]`: `a` together with every symbol that can descend from it.
    pub closures: Vec<Vec<usize>>,
    /// Symbols lying on a directed cycle.
    pub recurrent: Vec<usize>,
    pub scc_list: Vec<Vec<usize>>,
}

pub fn reachability(model: &AdjacencyModel) -> ReachabilityReport {
    let n = model.size();
    let mut closures = Vec::with_capacity(n);
    let mut recurrent = Vec::new();
    for a in 0..n {
        let dist = bfs_dist(model, a);
        closures.push((0..n).filter(|&b| dist[b].is_some()).collect());
        // a is recurrent iff some child of a reaches a.
        let on_cycle = model
            .children(a)
            .any(|c| c == a || bfs_dist(model, c)[a].is_some());
        if on_cycle {
            recurrent.push(a);
        }
    }
    ReachabilityReport {
        closures,
        recurrent,
        scc_list: strongly_connected_components(model),
    }
}

const SPECTRAL_TOL: f64 = 1e-12;
const SPECTRAL_MAX_ITER: usize = 100_000;

/// `log rho(W)` for a nonnegative matrix.
///
/// The matrix is split into strongly connected blocks; each block `B` is
/// shifted to `B / m + I` (primitive, same Perron vector) and iterated from the
/// all-ones vector until the Collatz–Wielandt bracket is narrower than
/// `1e-12` in relative terms. Returns `-inf` for a nilpotent matrix.
pub fn linear_spectral_radius(w: &WeightMatrix) -> Result<f64> {
    let n = w.size();
    let pattern: Vec<Vec<u8>> = (0..n)
        .map(|a| (0..n).map(|b| (w.log_at(a, b) > f64::NEG_INFINITY) as u8).collect())
        .collect();
    let graph = AdjacencyModel::from_rows(&pattern, 2)?;
    let mut best = f64::NEG_INFINITY;
    for comp in strongly_connected_components(&graph) {
        let k = comp.len();
        let block: Vec<f64> = comp
            .iter()
            .flat_map(|&a| comp.iter().map(move |&b| (a, b)))
            .map(|(a, b)| w.at(a, b))
            .collect();
        let m = block.iter().cloned().fold(0.0, f64::max);
        if m == 0.0 {
            continue;
        }
        let rho = perron_block(&block, k, m)?;
        if rho > 0.0 {
            best = best.max(rho.ln());
        }
    }
    Ok(best)
}

fn perron_block(block: &[f64], k: usize, m: f64) -> Result<f64> {
    let b: Vec<f64> = (0..k * k)
        .map(|i| block[i] / m + if i / k == i % k { 1.0 } else { 0.0 })
        .collect();
    let mut x = vec![1.0; k];
    let mut y = vec![0.0; k];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for _ in 0..SPECTRAL_MAX_ITER {
        for i in 0..k {
            y[i] = (0..k).map(|j| b[i * k + j] * x[j]).sum();
        }
        lo = f64::INFINITY;
        hi = 0.0;
        for i in 0..k {
            let q = y[i] / x[i];
            lo = f64::min(lo, q);
            hi = f64::max(hi, q);
        }
        if hi - lo <= SPECTRAL_TOL * hi {
            return Ok(m * (0.5 * (lo + hi) - 1.0));
        }
        let s: f64 = y.iter().sum();
        for i in 0..k {
            x[i] = y[i] / s;
        }
    }
    Err(Error::NoConvergence {
        what: "linear spectral radius",
        iterations: SPECTRAL_MAX_ITER,
        lo: m * (lo - 1.0),
        hi: m * (hi - 1.0),
    })
}
