//! Small reference models used by tests, benchmarks and documentation.

use crate::alphabet_graph::AdjacencyModel;
use crate::rate_function::WeightedChainModel;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Nine-symbol model with `d = 3` and period 3.
pub fn nine_symbol() -> AdjacencyModel {
    let rows = vec![
        vec![0, 0, 0, 0, 1, 1, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 0, 1, 0, 0, 0],
        vec![0, 0, 0, 0, 0, 0, 0, 1, 1],
        vec![0, 0, 0, 0, 0, 0, 0, 0, 1],
        vec![0, 0, 0, 0, 0, 0, 1, 0, 0],
        vec![0, 1, 1, 0, 0, 0, 0, 0, 0],
        vec![1, 0, 1, 0, 0, 0, 0, 0, 0],
        vec![1, 0, 0, 0, 0, 0, 0, 0, 0],
    ];
    AdjacencyModel::from_rows(&rows, 3).expect("valid fixture")
}

/// Period-2 model `[[0,1,1],[1,0,0],[1,0,0]]` with `d = 2`.
pub fn period_two() -> AdjacencyModel {
    AdjacencyModel::from_rows(&[vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]], 2).expect("valid fixture")
}

/// Golden-mean model `[[1,1],[1,0]]`.
pub fn golden_mean(d: usize) -> AdjacencyModel {
    AdjacencyModel::from_rows(&[vec![1, 1], vec![1, 0]], d).expect("valid fixture")
}

/// Primitive chain `M = [[1/2, 1], [1/2, 0]]` with weights `A = [[1, 2], [1, 0]]`, `d = 2`.
pub fn primitive_chain() -> WeightedChainModel {
    WeightedChainModel::new(
        golden_mean(2),
        &[vec![0.5, 1.0], vec![0.5, 0.0]],
        &[vec![1.0, 2.0], vec![1.0, 0.0]],
    )
    .and_then(|c| {
        c.with_exact_m(vec![
            vec![ratio(1, 2), BigRational::one()],
            vec![ratio(1, 2), BigRational::zero()],
        ])
    })
    .expect("valid fixture")
}

/// Period-2 chain whose children of symbol 0 are uniform on `{1, 2}`,
/// observed through `W = 1/M` (the negative log-likelihood).
pub fn alternating_chain() -> WeightedChainModel {
    let m = vec![vec![0.0, 1.0, 1.0], vec![0.5, 0.0, 0.0], vec![0.5, 0.0, 0.0]];
    let w = vec![vec![0.0, 1.0, 1.0], vec![2.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]];
    WeightedChainModel::new(period_two(), &m, &w)
        .and_then(|c| {
            c.with_exact_m(vec![
                vec![BigRational::zero(), BigRational::one(), BigRational::one()],
                vec![ratio(1, 2), BigRational::zero(), BigRational::zero()],
                vec![ratio(1, 2), BigRational::zero(), BigRational::zero()],
            ])
        })
        .expect("valid fixture")
}

/// Bipartite model `[[0,0,1,1],[0,0,1,1],[1,1,0,0],[1,1,0,0]]` (constant column sums, period 2).
pub fn bipartite_four(d: usize) -> AdjacencyModel {
    let rows = vec![vec![0, 0, 1, 1], vec![0, 0, 1, 1], vec![1, 1, 0, 0], vec![1, 1, 0, 0]];
    AdjacencyModel::from_rows(&rows, d).expect("valid fixture")
}
