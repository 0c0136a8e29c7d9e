use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use treeshift::alphabet_graph::AdjacencyModel;
use treeshift::fixtures::{alternating_chain, primitive_chain};
use treeshift::oracle::{
    distinct_level_tuples, enumerate_blocks, enumerate_type_classes, exact_mean_distribution, finite_rate,
    recursive_block_counts, DEFAULT_CLASS_LIMIT, DEFAULT_ENUMERATION_LIMIT,
};
use treeshift::rate_function::{rate, RateOptions, WeightedChainModel};
use treeshift::tree_core::{empirical_pair, lattice_size_f64, level_decomposed_mean, sample_mean};

fn uniform_full_three() -> WeightedChainModel {
    let base = AdjacencyModel::full_shift(3, 2);
    let m = vec![vec![1.0 / 3.0; 3]; 3];
    let w = vec![vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 1.0], vec![3.0, 1.0, 1.0]];
    WeightedChainModel::new(base, &m, &w).unwrap()
}

fn small_chains() -> Vec<WeightedChainModel> {
    vec![primitive_chain(), alternating_chain(), uniform_full_three()]
}

#[test]
fn type_classes_partition_blocks_and_probability() {
    for chain in small_chains() {
        let max_n = if chain.size() == 3 && chain.base().rows().iter().flatten().all(|&x| x == 1) { 2 } else { 4 };
        for n in 0..=max_n {
            let counts = recursive_block_counts(chain.base(), n);
            for root in 0..chain.size() {
                let classes = enumerate_type_classes(&chain, n, root, DEFAULT_CLASS_LIMIT).unwrap();
                let total: BigUint = classes.iter().map(|c| &c.count).sum();
                assert_eq!(total, counts[n][root]);
                let p: f64 = classes.iter().map(|c| c.log_probability.exp()).sum();
                assert!((p - 1.0).abs() < 1e-12);
                if chain.m_exact().is_some() {
                    let exact: BigRational = classes.iter().map(|c| c.probability.clone().unwrap()).sum();
                    assert!(exact.is_one());
                }
                for c in &classes {
                    for (i, e) in c.edges.iter().enumerate() {
                        for b in 0..chain.size() {
                            let out: u64 = (0..chain.size()).map(|a| e[a * chain.size() + b]).sum();
                            assert_eq!(out, chain.arity() as u64 * c.levels[i][b]);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn weak_duality_holds_for_every_class() {
    let chain = primitive_chain();
    let p = chain.period().period;
    for n in 1..=4 {
        let j = n % p;
        let size = lattice_size_f64(2, n);
        for c in enumerate_type_classes(&chain, n, 0, DEFAULT_CLASS_LIMIT).unwrap() {
            let alpha = c.mean(chain.log_w(), 2);
            let lhs = c.log_probability / size;
            let rhs = finite_rate(&chain, j, n, alpha);
            assert!(lhs <= rhs + 1e-9, "n={n} alpha={alpha}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn level_tuple_growth_bound() {
    for chain in small_chains() {
        let max_n = if chain.size() == 3 && chain.base().rows().iter().flatten().all(|&x| x == 1) { 2 } else { 4 };
        for n in 1..=max_n {
            let classes = enumerate_type_classes(&chain, n, 0, DEFAULT_CLASS_LIMIT).unwrap();
            let bound: f64 = (0..=n)
                .map(|i| (2f64.powi(i as i32) + 1.0).powi(chain.size() as i32))
                .product();
            assert!((distinct_level_tuples(&classes) as f64) <= bound);
        }
    }
}

#[test]
fn enumerated_trees_satisfy_the_mean_identity() {
    for chain in small_chains() {
        for n in 1..=3 {
            let e = enumerate_blocks(chain.base(), n, None, true, DEFAULT_ENUMERATION_LIMIT).unwrap();
            for t in e.trees.unwrap() {
                let direct = sample_mean(&t, chain.log_w(), n).unwrap();
                let pair = empirical_pair(&t, chain.base()).unwrap();
                let rebuilt = level_decomposed_mean(&pair, chain.log_w(), 2);
                assert!((direct - rebuilt).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn mean_distribution_aggregates_type_classes() {
    let chain = primitive_chain();
    for n in 1..=4 {
        let dist = exact_mean_distribution(&chain, n, 0, DEFAULT_CLASS_LIMIT).unwrap();
        let classes = enumerate_type_classes(&chain, n, 0, DEFAULT_CLASS_LIMIT).unwrap();
        let exact_total: BigRational = dist.atoms.iter().map(|a| a.exact.clone().unwrap()).sum();
        assert!(exact_total.is_one());
        for atom in &dist.atoms {
            let near = |m: f64| (m - atom.mean).abs() < 1e-12;
            let from_classes: BigRational = classes
                .iter()
                .filter(|c| near(c.mean(chain.log_w(), 2)))
                .map(|c| c.probability.clone().unwrap())
                .sum();
            let from_atoms: BigRational = dist.atoms.iter().filter(|a| near(a.mean)).map(|a| a.exact.clone().unwrap()).sum();
            assert_eq!(from_classes, from_atoms);
        }
    }
}

#[test]
fn constant_observable_has_a_single_atom() {
    let base = AdjacencyModel::from_rows(&[vec![1, 1], vec![1, 0]], 2).unwrap();
    let chain = WeightedChainModel::new(base, &[vec![0.5, 1.0], vec![0.5, 0.0]], &[vec![1.0; 2], vec![1.0; 2]]).unwrap();
    let dist = exact_mean_distribution(&chain, 3, 0, DEFAULT_CLASS_LIMIT).unwrap();
    assert_eq!(dist.atoms.len(), 1);
    assert_eq!(dist.atoms[0].mean, 0.0);
    assert!((dist.atoms[0].probability - 1.0).abs() < 1e-12);
}

#[test]
fn finite_depth_probabilities_trend_to_the_rate() {
    // The lattice effects make convergence non-monotone, so compare the
    // shallowest and deepest depths only.
    let chain = primitive_chain();
    let opts = RateOptions::default();
    let alpha_star = treeshift::rate_function::lln_limit(&chain, 0).unwrap();
    let dists: Vec<_> = [2, 6]
        .iter()
        .map(|&n| (n, exact_mean_distribution(&chain, n, 0, DEFAULT_CLASS_LIMIT).unwrap()))
        .collect();
    for alpha in [alpha_star + 0.05, alpha_star + 0.1, alpha_star - 0.1] {
        let target = -rate(&chain, 0, alpha, &opts).rate;
        let gaps: Vec<f64> = dists
            .iter()
            .map(|(n, dist)| {
                let p = if alpha > alpha_star {
                    dist.probability_in(alpha, f64::INFINITY)
                } else {
                    dist.probability_in(f64::NEG_INFINITY, alpha)
                };
                (p.ln() / lattice_size_f64(2, *n) - target).abs()
            })
            .collect();
        assert!(gaps[1] < gaps[0], "alpha={alpha}: {gaps:?}");
        assert!(gaps[1] < 0.025, "alpha={alpha}: {gaps:?}");
    }
}
