//! Finite rooted d-trees stored breadth-first, their labelings, empirical
//! level statistics, sample means and the tree-shift metric.
//!
//! Node `i` has children `d*i + 1 ..= d*i + d`; the root is node 0 and level
//! `k` occupies indices `(d^k - 1)/(d - 1) .. (d^{k+1} - 1)/(d - 1)`.

use serde::{Deserialize, Serialize};

use crate::alphabet_graph::AdjacencyModel;
use crate::error::{Error, Result};
use crate::weights::WeightMatrix;

/// Default cap on stored tree size.
pub const DEFAULT_MAX_NODES: u64 = 1 << 27;

/// `|Λ(n)| = (d^{n+1} - 1)/(d - 1)`, the node count of a depth-`n` tree.
pub fn lattice_size(d: usize, n: usize) -> Result<u64> {
    if d < 2 {
        return Err(Error::invalid("arity must be at least 2"));
    }
    let d = d as u64;
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for k in 0..=n {
        total = total.checked_add(level).ok_or(Error::Overflow("lattice size"))?;
        if k < n {
            level = level.checked_mul(d).ok_or(Error::Overflow("lattice size"))?;
        }
    }
    if total > i64::MAX as u64 {
        return Err(Error::Overflow("lattice size"));
    }
    Ok(total)
}

/// `|Λ(n)|` as a float, valid far beyond `u64` range.
pub fn lattice_size_f64(d: usize, n: usize) -> f64 {
    let d = d as f64;
    (d.powi(n as i32 + 1) - 1.0) / (d - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeShape {
    pub arity: usize,
    pub depth: usize,
}

impl TreeShape {
    pub fn new(arity: usize, depth: usize, max_nodes: u64) -> Result<Self> {
        let size = lattice_size(arity, depth)?;
        if size > max_nodes {
            return Err(Error::TooLarge {
                what: "tree",
                size: size as f64,
                limit: max_nodes as f64,
            });
        }
        Ok(Self { arity, depth })
    }

    pub fn node_count(&self) -> usize {
        lattice_size(self.arity, self.depth).expect("checked at construction") as usize
    }

    /// Index of the first node on level `k`.
    pub fn level_start(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            lattice_size(self.arity, k - 1).expect("within shape") as usize
        }
    }

    pub fn level_size(&self, k: usize) -> usize {
        self.arity.pow(k as u32)
    }

    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        let s = self.level_start(k);
        s..s + self.level_size(k)
    }

    #[inline]
    pub fn parent(&self, i: usize) -> usize {
        debug_assert!(i > 0);
        (i - 1) / self.arity
    }

    #[inline]
    pub fn child(&self, i: usize, c: usize) -> usize {
        self.arity * i + 1 + c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledTree {
    pub shape: TreeShape,
    pub labels: Vec<u16>,
}

impl LabeledTree {
    pub fn new(shape: TreeShape, labels: Vec<u16>) -> Result<Self> {
        if labels.len() != shape.node_count() {
            return Err(Error::invalid(format!(
                "tree of depth {} needs {} labels, got {}",
                shape.depth,
                shape.node_count(),
                labels.len()
            )));
        }
        Ok(Self { shape, labels })
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    /// First node whose edge to its parent is forbidden by the model.
    pub fn check_admissible(&self, model: &AdjacencyModel) -> Result<()> {
        if let Some(&bad) = self.labels.iter().find(|&&l| l as usize >= model.size()) {
            return Err(Error::invalid(format!("label {bad} outside the alphabet")));
        }
        for i in 1..self.labels.len() {
            let (c, p) = (self.label(i), self.label(self.shape.parent(i)));
            if !model.has_edge(c, p) {
                return Err(Error::InadmissibleTree {
                    node: i,
                    child: c,
                    parent: p,
                });
            }
        }
        Ok(())
    }

    /// Symbol names in breadth-first order.
    pub fn to_names(&self, model: &AdjacencyModel) -> Vec<String> {
        self.labels
            .iter()
            .map(|&l| model.symbols()[l as usize].clone())
            .collect()
    }

    pub fn from_names(model: &AdjacencyModel, depth: usize, names: &[String]) -> Result<Self> {
        let shape = TreeShape::new(model.arity(), depth, DEFAULT_MAX_NODES)?;
        let labels = names
            .iter()
            .map(|s| {
                model
                    .symbol_index(s)
                    .map(|i| i as u16)
                    .ok_or_else(|| Error::invalid(format!("unknown symbol {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape, labels)
    }
}

/// Level distributions `π_0..π_n` and level transitions `η_0..η_{n-1}`,
/// together with the exact integer counts they were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalPair {
    pub dists: Vec<Vec<f64>>,
    /// `trans[k][a * n + b]`: fraction of children of level-`k` parents
    /// labelled `b` that carry label `a` (column-stochastic).
    pub trans: Vec<Vec<f64>>,
    pub level_counts: Vec<Vec<u64>>,
    pub edge_counts: Vec<Vec<u64>>,
}

/// Exact level counts and per-level edge-type counts of an admissible tree.
pub fn level_statistics(t: &LabeledTree, n_symbols: usize) -> (Vec<Vec<u64>>, Vec<Vec<u64>>) {
    let sh = t.shape;
    let mut levels = Vec::with_capacity(sh.depth + 1);
    let mut edges = Vec::with_capacity(sh.depth);
    for k in 0..=sh.depth {
        let mut c = vec![0u64; n_symbols];
        for i in sh.level_range(k) {
            c[t.label(i)] += 1;
        }
        levels.push(c);
        if k < sh.depth {
            let mut e = vec![0u64; n_symbols * n_symbols];
            for i in sh.level_range(k + 1) {
                e[t.label(i) * n_symbols + t.label(sh.parent(i))] += 1;
            }
            edges.push(e);
        }
    }
    (levels, edges)
}

pub fn empirical_pair(t: &LabeledTree, model: &AdjacencyModel) -> Result<EmpiricalPair> {
    t.check_admissible(model)?;
    let (level_counts, edge_counts) = level_statistics(t, model.size());
    Ok(pair_from_counts(level_counts, edge_counts, model))
}

/// Builds `(π, η)` from exact level and edge counts. A parent symbol absent
/// from a level gets the normalised adjacency column as its transition.
pub fn pair_from_counts(level_counts: Vec<Vec<u64>>, edge_counts: Vec<Vec<u64>>, model: &AdjacencyModel) -> EmpiricalPair {
    let n = model.size();
    let dists = level_counts
        .iter()
        .map(|c| {
            let tot: u64 = c.iter().sum();
            c.iter().map(|&x| x as f64 / tot as f64).collect()
        })
        .collect();
    let trans = edge_counts
        .iter()
        .map(|e| {
            let mut eta = vec![0.0; n * n];
            for b in 0..n {
                let tot: u64 = (0..n).map(|a| e[a * n + b]).sum();
                let fallback = model.column_sum(b);
                for a in 0..n {
                    eta[a * n + b] = if tot > 0 {
                        e[a * n + b] as f64 / tot as f64
                    } else if model.has_edge(a, b) {
                        1.0 / fallback as f64
                    } else {
                        0.0
                    };
                }
            }
            eta
        })
        .collect();
    EmpiricalPair {
        dists,
        trans,
        level_counts,
        edge_counts,
    }
}

/// `(1/|Λ(n)|) Σ_{g ∈ Λ(n), g ≠ root} log W[t_g, t_parent(g)]`.
pub fn sample_mean(t: &LabeledTree, w: &WeightMatrix, n: usize) -> Result<f64> {
    if n > t.shape.depth {
        return Err(Error::invalid(format!(
            "depth {n} exceeds the stored depth {}",
            t.shape.depth
        )));
    }
    let end = lattice_size(t.shape.arity, n)? as usize;
    let mut s = 0.0;
    for i in 1..end {
        let (c, p) = (t.label(i), t.label(t.shape.parent(i)));
        let lw = w.log_at(c, p);
        if lw == f64::NEG_INFINITY {
            return Err(Error::SupportMismatch { child: c, parent: p });
        }
        s += lw;
    }
    Ok(s / end as f64)
}

/// The same mean rebuilt from level distributions and transitions:
/// `Σ_k (|L(k+1)|/|Λ(n)|) Σ_{a,b} η_k[a,b] log W[a,b] π_k[b]`.
pub fn level_decomposed_mean(pair: &EmpiricalPair, w: &WeightMatrix, arity: usize) -> f64 {
    let n = w.size();
    let depth = pair.trans.len();
    let total = lattice_size_f64(arity, depth);
    let mut s = 0.0;
    for (k, (eta, pi)) in pair.trans.iter().zip(&pair.dists).enumerate() {
        let mut inner = 0.0;
        for b in 0..n {
            if pi[b] == 0.0 {
                continue;
            }
            for &(a, lw) in w.column(b) {
                inner += eta[a * n + b] * lw * pi[b];
            }
        }
        s += (arity as f64).powi(k as i32 + 1) * inner;
    }
    s / total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeDistance {
    pub value: f64,
    /// True when the trees agree on every stored level, so the true distance
    /// is only known to be at most `e^{-|Λ(depth)|}`.
    pub truncated: bool,
}

/// `e^{-|Λ(n*)|}` where `n*` is the deepest level through which the trees agree.
pub fn tree_metric(t: &LabeledTree, u: &LabeledTree) -> Result<TreeDistance> {
    if t.shape != u.shape {
        return Err(Error::ShapeMismatch);
    }
    let sh = t.shape;
    for k in 0..=sh.depth {
        if sh.level_range(k).any(|i| t.labels[i] != u.labels[i]) {
            if k == 0 {
                return Ok(TreeDistance {
                    value: 1.0,
                    truncated: false,
                });
            }
            let agree = lattice_size_f64(sh.arity, k - 1);
            return Ok(TreeDistance {
                value: (-agree).exp(),
                truncated: false,
            });
        }
    }
    Ok(TreeDistance {
        value: 0.0,
        truncated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: usize, n: usize) -> TreeShape {
        TreeShape::new(d, n, DEFAULT_MAX_NODES).unwrap()
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(lattice_size(2, 4).unwrap(), 31);
        assert_eq!(lattice_size(3, 2).unwrap(), 13);
        assert_eq!(lattice_size(2, 0).unwrap(), 1);
        assert_eq!(lattice_size(2, 62).unwrap(), (1u64 << 63) - 1);
        assert_eq!(lattice_size(2, 63), Err(Error::Overflow("lattice size")));
    }

    #[test]
    fn shape_cap_enforced() {
        assert!(matches!(TreeShape::new(2, 30, 1 << 27), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn empirical_pair_depth_one() {
        let m = AdjacencyModel::full_shift(2, 2);
        let t = LabeledTree::new(shape(2, 1), vec![0, 0, 1]).unwrap();
        let p = empirical_pair(&t, &m).unwrap();
        assert_eq!(p.dists[0], vec![1.0, 0.0]);
        assert_eq!(p.dists[1], vec![0.5, 0.5]);
        assert_eq!((p.trans[0][0], p.trans[0][2]), (0.5, 0.5));
        // Parent 1 absent: fallback to the normalised adjacency column.
        assert_eq!((p.trans[0][1], p.trans[0][3]), (0.5, 0.5));
    }

    #[test]
    fn constant_tree_has_point_masses() {
        let m = AdjacencyModel::full_shift(2, 2);
        let t = LabeledTree::new(shape(2, 2), vec![1; 7]).unwrap();
        let p = empirical_pair(&t, &m).unwrap();
        for d in &p.dists {
            assert_eq!(d, &vec![0.0, 1.0]);
        }
        assert_eq!((p.trans[1][1], p.trans[1][3]), (0.0, 1.0));
    }

    #[test]
    fn inadmissible_tree_rejected() {
        let m = AdjacencyModel::from_rows(&[vec![1, 1], vec![1, 0]], 2).unwrap();
        let t = LabeledTree::new(shape(2, 1), vec![1, 0, 1]).unwrap();
        assert_eq!(
            empirical_pair(&t, &m),
            Err(Error::InadmissibleTree {
                node: 2,
                child: 1,
                parent: 1
            })
        );
    }

    #[test]
    fn sample_mean_single_weighted_edge() {
        // Only edges from a parent labelled 1 to a child labelled 0 carry log 2.
        let w = WeightMatrix::from_linear(&[vec![1.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let t = LabeledTree::new(shape(2, 1), vec![1, 0, 0]).unwrap();
        let v = sample_mean(&t, &w, 1).unwrap();
        assert!((v - 2.0 * 2f64.ln() / 3.0).abs() < 1e-15);
        let t = LabeledTree::new(shape(2, 1), vec![0, 0, 1]).unwrap();
        assert_eq!(sample_mean(&t, &w, 1).unwrap(), 0.0);
        let t = LabeledTree::new(shape(2, 1), vec![1, 1, 0]).unwrap();
        assert_eq!(
            sample_mean(&t, &w, 1),
            Err(Error::SupportMismatch { child: 1, parent: 1 })
        );
    }

    #[test]
    fn metric_conventions() {
        let a = LabeledTree::new(shape(2, 2), vec![0, 0, 0, 0, 0, 0, 0]).unwrap();
        let mut b = a.clone();
        assert_eq!(tree_metric(&a, &b).unwrap(), TreeDistance { value: 0.0, truncated: true });
        b.labels[5] = 1;
        let d = tree_metric(&a, &b).unwrap();
        assert!((d.value - (-3f64).exp()).abs() < 1e-15);
        b.labels[0] = 1;
        assert_eq!(tree_metric(&a, &b).unwrap().value, 1.0);
        let c = LabeledTree::new(shape(2, 1), vec![0, 0, 0]).unwrap();
        assert_eq!(tree_metric(&a, &c), Err(Error::ShapeMismatch));
    }

    #[test]
    fn names_round_trip() {
        let m = AdjacencyModel::new(vec!["x".into(), "y".into()], &[vec![1, 1], vec![1, 1]], 2).unwrap();
        let t = LabeledTree::new(shape(2, 1), vec![1, 0, 1]).unwrap();
        let names = t.to_names(&m);
        assert_eq!(names, vec!["y", "x", "y"]);
        assert_eq!(LabeledTree::from_names(&m, 1, &names).unwrap(), t);
    }
}
