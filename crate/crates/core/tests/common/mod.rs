#![allow(dead_code)]

use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use treeshift::alphabet_graph::{is_irreducible, AdjacencyModel};

/// Random 0/1 matrices of size `1..=max_n`.
pub fn any_model(max_n: usize, d: usize) -> impl Strategy<Value = AdjacencyModel> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(0u8..=1, n), n)
            .prop_map(move |rows| AdjacencyModel::from_rows(&rows, d).unwrap())
    })
}

/// Random irreducible matrices in which every parent has a child of size `1..=max_n` (rejection sampling).
pub fn irreducible_model(max_n: usize, d: usize) -> impl Strategy<Value = AdjacencyModel> {
    any_model(max_n, d).prop_filter("irreducible", |m| is_irreducible(m) && m.satisfies_a0())
}

/// Random points of the simplex with `p` coordinates.
pub fn simplex_point(p: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, p).prop_map(|v| {
        let e: Vec<f64> = v.iter().map(|x| -(1.0 - x).ln()).collect();
        let s: f64 = e.iter().sum();
        if s == 0.0 {
            vec![1.0 / v.len() as f64; v.len()]
        } else {
            e.iter().map(|x| x / s).collect()
        }
    })
}

/// Seeded generator for tests that need many random matrices.
pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}
