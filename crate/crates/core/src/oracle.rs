//! Exact ground truth at small depth: explicit block enumeration, the
//! block-count recursion, type classes with big-integer counts, exact
//! sample-mean distributions and the finite-depth dual bound.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::alphabet_graph::AdjacencyModel;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, golden_max};
use crate::optimize::compositions;
use crate::rate_function::{finite_pressure, WeightedChainModel};
use crate::tree_core::{lattice_size, lattice_size_f64, pair_from_counts, EmpiricalPair, LabeledTree, TreeShape};
use crate::weights::WeightMatrix;

/// Guard on `|A|^{|Λ(n)|}` for explicit enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: f64 = 1e8;
/// Guard on the number of type classes or DP states.
pub const DEFAULT_CLASS_LIMIT: usize = 1_000_000;

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom("not a decimal integer"))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(xs.iter().map(|x| x.to_str_radix(10)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| D::Error::custom("not a decimal integer")))
                .collect()
        }
    }
}

mod opt_ratio {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse::<BigRational>().map_err(D::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockEnumeration {
    pub depth: usize,
    /// `c_n(a)`: admissible depth-`n` trees with root `a`.
    #[serde(with = "decimal::vec")]
    pub counts: Vec<BigUint>,
    #[serde(with = "decimal")]
    pub total: BigUint,
    #[serde(skip)]
    pub trees: Option<Vec<LabeledTree>>,
}

fn enumeration_guard(model: &AdjacencyModel, n: usize, limit: f64) -> Result<usize> {
    let size = lattice_size(model.arity(), n)?;
    let space = (size as f64) * (model.size() as f64).ln();
    if space > limit.ln() {
        return Err(Error::TooLarge {
            what: "block enumeration",
            size: space.exp(),
            limit,
        });
    }
    Ok(size as usize)
}

/// Admissible depth-`n` trees by explicit backtracking, optionally listing
/// them, restricted to `root` if given.
pub fn enumerate_blocks(
    model: &AdjacencyModel,
    n: usize,
    root: Option<usize>,
    list: bool,
    limit: f64,
) -> Result<BlockEnumeration> {
    let size = enumeration_guard(model, n, limit)?;
    let d = model.arity();
    let k = model.size();
    let children: Vec<Vec<u16>> = (0..k).map(|b| model.children(b).map(|a| a as u16).collect()).collect();
    let shape = TreeShape::new(d, n, u64::MAX)?;
    let mut counts = vec![0u64; k];
    let mut trees = list.then(Vec::new);
    let mut labels = vec![0u16; size];

    fn fill(
        i: usize,
        labels: &mut [u16],
        d: usize,
        children: &[Vec<u16>],
        count: &mut u64,
        trees: &mut Option<Vec<LabeledTree>>,
        shape: TreeShape,
    ) {
        if i == labels.len() {
            *count += 1;
            if let Some(t) = trees.as_mut() {
                t.push(LabeledTree {
                    shape,
                    labels: labels.to_vec(),
                });
            }
            return;
        }
        let parent = labels[(i - 1) / d] as usize;
        for &a in &children[parent] {
            labels[i] = a;
            fill(i + 1, labels, d, children, count, trees, shape);
        }
    }

    for a in 0..k {
        if root.is_some_and(|r| r != a) {
            continue;
        }
        labels[0] = a as u16;
        fill(1, &mut labels, d, &children, &mut counts[a], &mut trees, shape);
    }
    let counts: Vec<BigUint> = counts.into_iter().map(BigUint::from).collect();
    Ok(BlockEnumeration {
        depth: n,
        total: counts.iter().sum(),
        counts,
        trees,
    })
}

/// `c_0 = 1`, `c_{k+1}(a) = (Σ_{b child of a} c_k(b))^d`, exact, for `k ≤ n`.
pub fn recursive_block_counts(model: &AdjacencyModel, n: usize) -> Vec<Vec<BigUint>> {
    let k = model.size();
    let mut out = vec![vec![BigUint::one(); k]];
    for _ in 0..n {
        let prev = out.last().unwrap();
        let next = (0..k)
            .map(|a| {
                let s: BigUint = model.children(a).map(|b| &prev[b]).sum();
                s.pow(model.arity() as u32)
            })
            .collect();
        out.push(next);
    }
    out
}

/// One type class: level counts `N^{(0..n)}`, edge counts `k^{(0..n-1)}`
/// (`edges[i][a * |A| + b]` children `a` of level-`i` parents `b`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeClass {
    pub levels: Vec<Vec<u64>>,
    pub edges: Vec<Vec<u64>>,
    /// Number of labelled trees in the class.
    #[serde(with = "decimal")]
    pub count: BigUint,
    #[serde(with = "crate::numeric::ext_float")]
    pub log_probability: f64,
    /// Exact probability when `M` is rational.
    #[serde(with = "opt_ratio")]
    pub probability: Option<BigRational>,
}

impl TypeClass {
    pub fn empirical_pair(&self, model: &AdjacencyModel) -> EmpiricalPair {
        pair_from_counts(self.levels.clone(), self.edges.clone(), model)
    }

    /// `Σ_i Σ_{a,b} k^{(i)}_{ab} log W_ab`.
    pub fn total_log_weight(&self, w: &WeightMatrix) -> f64 {
        let n = w.size();
        compensated_sum(self.edges.iter().flat_map(|e| {
            e.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(move |(i, &c)| c as f64 * w.log_at(i / n, i % n))
        }))
    }

    /// Sample mean shared by every tree in the class.
    pub fn mean(&self, w: &WeightMatrix, arity: usize) -> f64 {
        self.total_log_weight(w) / lattice_size_f64(arity, self.edges.len())
    }
}

struct Factorials(Vec<BigUint>);

impl Factorials {
    fn new(max: usize) -> Self {
        let mut f = vec![BigUint::one()];
        for i in 1..=max {
            let next = &f[i - 1] * BigUint::from(i);
            f.push(next);
        }
        Self(f)
    }

    fn multinomial(&self, total: usize, parts: impl Iterator<Item = usize>) -> BigUint {
        let mut den = BigUint::one();
        for p in parts {
            den *= &self.0[p];
        }
        &self.0[total] / den
    }
}

/// All ways to distribute the `d·N_b` children of every present parent `b`
/// over its admissible child symbols, as flat edge-count matrices.
fn level_transitions(model: &AdjacencyModel, counts: &[u64]) -> Vec<Vec<u64>> {
    let k = model.size();
    let d = model.arity() as u64;
    let mut out = vec![vec![0u64; k * k]];
    for b in 0..k {
        if counts[b] == 0 {
            continue;
        }
        let kids: Vec<usize> = model.children(b).collect();
        let comps = compositions((d * counts[b]) as usize, kids.len());
        let mut next = Vec::with_capacity(out.len() * comps.len());
        for e in &out {
            for c in &comps {
                let mut e2 = e.clone();
                for (&a, &x) in kids.iter().zip(c) {
                    e2[a * k + b] = x as u64;
                }
                next.push(e2);
            }
        }
        out = next;
    }
    out
}

fn child_counts(edges: &[u64], k: usize) -> Vec<u64> {
    (0..k).map(|a| edges[a * k..(a + 1) * k].iter().sum()).collect()
}

/// Shared weights of one level transition: the number of labellings and the
/// probability, in log form and exactly when available.
struct Weigher<'a> {
    chain: &'a WeightedChainModel,
    fact: Factorials,
}

impl Weigher<'_> {
    fn count(&self, parents: &[u64], edges: &[u64]) -> BigUint {
        let k = self.chain.size();
        let d = self.chain.arity() as u64;
        let mut c = BigUint::one();
        for b in 0..k {
            if parents[b] > 0 {
                c *= self
                    .fact
                    .multinomial((d * parents[b]) as usize, (0..k).map(|a| edges[a * k + b] as usize));
            }
        }
        c
    }

    fn log_prob(&self, count: &BigUint, edges: &[u64]) -> f64 {
        let k = self.chain.size();
        let m = self.chain.log_m();
        let lc = count.to_f64().unwrap_or(f64::INFINITY).ln();
        lc + compensated_sum(
            edges
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| c as f64 * m.log_at(i / k, i % k)),
        )
    }

    fn exact_prob(&self, count: &BigUint, edges: &[u64]) -> Option<BigRational> {
        let k = self.chain.size();
        let mex = self.chain.m_exact()?;
        let mut p = BigRational::from_integer(BigInt::from(count.clone()));
        for (i, &c) in edges.iter().enumerate() {
            for _ in 0..c {
                p *= &mex[i / k][i % k];
            }
        }
        Some(p)
    }
}

/// Every type class of depth-`n` trees rooted at `root`.
pub fn enumerate_type_classes(
    chain: &WeightedChainModel,
    n: usize,
    root: usize,
    limit: usize,
) -> Result<Vec<TypeClass>> {
    let k = chain.size();
    if root >= k {
        return Err(Error::invalid(format!("root {root} outside the alphabet")));
    }
    let d = chain.arity();
    lattice_size(d, n)?;
    let w = Weigher {
        chain,
        fact: Factorials::new(d.pow(n as u32)),
    };
    let mut start = vec![0u64; k];
    start[root] = 1;
    let mut out = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn rec(
        w: &Weigher,
        n: usize,
        levels: &mut Vec<Vec<u64>>,
        edges: &mut Vec<Vec<u64>>,
        count: BigUint,
        out: &mut Vec<TypeClass>,
        limit: usize,
    ) -> Result<()> {
        if edges.len() == n {
            if out.len() >= limit {
                return Err(Error::TooLarge {
                    what: "type-class enumeration",
                    size: (limit + 1) as f64,
                    limit: limit as f64,
                });
            }
            let k = w.chain.size();
            let flat: Vec<u64> = {
                let mut tot = vec![0u64; k * k];
                for e in edges.iter() {
                    for (t, x) in tot.iter_mut().zip(e) {
                        *t += x;
                    }
                }
                tot
            };
            out.push(TypeClass {
                levels: levels.clone(),
                edges: edges.clone(),
                log_probability: w.log_prob(&count, &flat),
                probability: w.exact_prob(&count, &flat),
                count,
            });
            return Ok(());
        }
        let parents = levels.last().unwrap().clone();
        for e in level_transitions(w.chain.base(), &parents) {
            let c = &count * w.count(&parents, &e);
            levels.push(child_counts(&e, w.chain.size()));
            edges.push(e);
            rec(w, n, levels, edges, c, out, limit)?;
            edges.pop();
            levels.pop();
        }
        Ok(())
    }

    rec(&w, n, &mut vec![start], &mut Vec::new(), BigUint::one(), &mut out, limit)?;
    Ok(out)
}

/// Number of distinct level-distribution tuples among `classes`.
pub fn distinct_level_tuples(classes: &[TypeClass]) -> usize {
    let mut seen: Vec<&Vec<Vec<u64>>> = classes.iter().map(|c| &c.levels).collect();
    seen.sort();
    seen.dedup();
    seen.len()
}

/// An atom of the exact sample-mean distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanAtom {
    /// Edge counts per distinct value of `log W` (see `weight_levels`).
    pub key: Vec<u64>,
    pub mean: f64,
    pub probability: f64,
    #[serde(with = "opt_ratio")]
    pub exact: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanDistribution {
    pub depth: usize,
    pub root: usize,
    /// Distinct values of `log W` on the support, increasing.
    pub weight_levels: Vec<f64>,
    /// Atoms sorted by mean.
    pub atoms: Vec<MeanAtom>,
}

impl MeanDistribution {
    /// `P(lo ≤ mean ≤ hi)`.
    pub fn probability_in(&self, lo: f64, hi: f64) -> f64 {
        compensated_sum(
            self.atoms
                .iter()
                .filter(|a| a.mean >= lo && a.mean <= hi)
                .map(|a| a.probability),
        )
    }

    /// Exact `P(lo ≤ mean ≤ hi)` when `M` is rational.
    pub fn exact_probability_in(&self, lo: f64, hi: f64) -> Option<BigRational> {
        let mut s = BigRational::zero();
        for a in self.atoms.iter().filter(|a| a.mean >= lo && a.mean <= hi) {
            s += a.exact.as_ref()?;
        }
        Some(s)
    }
}

/// Exact law of the depth-`n` sample mean given the root, by a level-wise
/// dynamic programme over (current level counts, accumulated weight counts).
pub fn exact_mean_distribution(
    chain: &WeightedChainModel,
    n: usize,
    root: usize,
    limit: usize,
) -> Result<MeanDistribution> {
    let k = chain.size();
    if root >= k {
        return Err(Error::invalid(format!("root {root} outside the alphabet")));
    }
    let d = chain.arity();
    lattice_size(d, n)?;
    let lw = chain.log_w();
    let mut levels: Vec<f64> = lw.log_entries().iter().copied().filter(|v| v.is_finite()).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let widx: Vec<Option<usize>> = (0..k * k)
        .map(|i| {
            let v = lw.log_at(i / k, i % k);
            levels.iter().position(|&x| x == v)
        })
        .collect();
    let w = Weigher {
        chain,
        fact: Factorials::new(d.pow(n as u32)),
    };
    type State = (Vec<u64>, Vec<u64>);
    let mut start = vec![0u64; k];
    start[root] = 1;
    let mut states: BTreeMap<State, (f64, Option<BigRational>)> = BTreeMap::new();
    states.insert((start, vec![0; levels.len()]), (1.0, chain.m_exact().map(|_| BigRational::one())));
    for _ in 0..n {
        let mut next: BTreeMap<State, (f64, Option<BigRational>)> = BTreeMap::new();
        for ((parents, key), (p, ex)) in &states {
            for e in level_transitions(chain.base(), parents) {
                let count = w.count(parents, &e);
                let step = w.log_prob(&count, &e).exp();
                let mut key2 = key.clone();
                for (i, &c) in e.iter().enumerate() {
                    if c > 0 {
                        key2[widx[i].expect("edge on the support")] += c;
                    }
                }
                let ex2 = match ex {
                    Some(x) => w.exact_prob(&count, &e).map(|q| x * q),
                    None => None,
                };
                let entry = next
                    .entry((child_counts(&e, k), key2))
                    .or_insert((0.0, ex2.as_ref().map(|_| BigRational::zero())));
                entry.0 += p * step;
                if let (Some(acc), Some(x)) = (entry.1.as_mut(), ex2) {
                    *acc += x;
                }
            }
            if next.len() > limit {
                return Err(Error::TooLarge {
                    what: "mean-distribution states",
                    size: next.len() as f64,
                    limit: limit as f64,
                });
            }
        }
        states = next;
    }
    let mut by_key: BTreeMap<Vec<u64>, (f64, Option<BigRational>)> = BTreeMap::new();
    for ((_, key), (p, ex)) in states {
        let entry = by_key.entry(key).or_insert((0.0, ex.as_ref().map(|_| BigRational::zero())));
        entry.0 += p;
        if let (Some(acc), Some(x)) = (entry.1.as_mut(), ex) {
            *acc += x;
        }
    }
    let total = lattice_size_f64(d, n);
    let mut atoms: Vec<MeanAtom> = by_key
        .into_iter()
        .map(|(key, (probability, exact))| MeanAtom {
            mean: compensated_sum(key.iter().zip(&levels).map(|(&c, &v)| c as f64 * v)) / total,
            key,
            probability,
            exact,
        })
        .collect();
    atoms.sort_by(|a, b| a.mean.total_cmp(&b.mean).then_with(|| a.key.cmp(&b.key)));
    Ok(MeanDistribution {
        depth: n,
        root,
        weight_levels: levels,
        atoms,
    })
}

/// Finite-depth dual value `inf_μ (-μ α' + sup_{A_{(j-n) mod p}} λ^{(n)}(μ))`
/// with `α' = α (1 - d^{-(n+1)})`, the sample mean rescaled to the
/// normalisation `(d-1)/d^{n+1}` of `λ^{(n)}`. Bounds
/// `(1/|Λ(n)|) log P(class)` from above for every class of mean `α`.
pub fn finite_rate(chain: &WeightedChainModel, j: usize, n: usize, alpha: f64) -> f64 {
    let d = chain.arity() as f64;
    let a = alpha * (1.0 - d.powi(-(n as i32 + 1)));
    let f = |mu: f64| mu * a - finite_pressure(chain, mu, j, n);
    let mut best = f(0.0);
    let mut prev = best;
    for k in 0..=40 {
        let bound = 2f64.powi(k);
        let (x, v) = golden_max(f, -bound, bound, 1e-12);
        best = best.max(v);
        if x.abs() < bound * (1.0 - 1e-6) || (k > 0 && v - prev < 1e-13) {
            return -best;
        }
        prev = v;
    }
    f64::NEG_INFINITY
}

/// Exact `E[(1/|Λ(n)|) Σ log W]` when the root has law `init`.
pub fn expected_sample_mean(chain: &WeightedChainModel, init: &[f64], n: usize) -> Result<f64> {
    let k = chain.size();
    if init.len() != k {
        return Err(Error::invalid("initial distribution has the wrong length"));
    }
    let d = chain.arity() as f64;
    let m = chain.log_m();
    let w = chain.log_w();
    let mut dist = init.to_vec();
    let mut terms = Vec::with_capacity(n);
    for level in 0..n {
        let e = compensated_sum(
            (0..k).flat_map(|b| m.column(b).iter().map(move |&(a, lm)| (b, a, lm))).map(|(b, a, lm)| dist[b] * lm.exp() * w.log_at(a, b)),
        );
        terms.push(d.powi(level as i32 + 1) * e);
        dist = (0..k)
            .map(|a| compensated_sum((0..k).map(|b| m.at(a, b) * dist[b])))
            .collect();
    }
    Ok(compensated_sum(terms) / lattice_size_f64(chain.arity(), n))
}
