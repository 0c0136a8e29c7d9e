mod common;

use std::f64::consts::LN_2;

use proptest::prelude::*;
use treeshift::alphabet_graph::AdjacencyModel;
use treeshift::fixtures::{alternating_chain, nine_symbol, primitive_chain};
use treeshift::oracle::{expected_sample_mean, finite_rate};
use treeshift::rate_function::{
    beta_bounds, class_stationary, domain_endpoints, finite_pressure, lln_phases, phi, pressure, rate, rate_curve,
    GridSpec, RateOptions, WeightedChainModel,
};

fn chains() -> Vec<WeightedChainModel> {
    vec![primitive_chain(), alternating_chain(), uniform_nine()]
}

/// Uniform children on the nine-symbol model with weights `1 + (a + 2b) mod 3`.
fn uniform_nine() -> WeightedChainModel {
    let base = nine_symbol();
    let n = base.size();
    let mut m = vec![vec![0.0; n]; n];
    let mut w = vec![vec![0.0; n]; n];
    for b in 0..n {
        let kids: Vec<usize> = base.children(b).collect();
        for &a in &kids {
            m[a][b] = 1.0 / kids.len() as f64;
            w[a][b] = 1.0 + ((a + 2 * b) % 3) as f64;
        }
    }
    WeightedChainModel::new(base, &m, &w).unwrap()
}

#[test]
fn pressure_is_convex_in_mu() {
    for chain in chains() {
        for j in 0..chain.period().period {
            let vals: Vec<f64> = (-40..=40)
                .map(|i| pressure(&chain, i as f64 * 0.5, j, 1e-12).value)
                .collect();
            for w in vals.windows(3) {
                assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-8, "{w:?}");
            }
        }
    }
}

#[test]
fn pressure_error_bound_is_honoured() {
    for chain in chains() {
        for j in 0..chain.period().period {
            for mu in [-7.0, -1.0, 0.0, 0.5, 3.0, 12.0] {
                let r = pressure(&chain, mu, j, 1e-6);
                let deeper = finite_pressure(&chain, mu, j, 2 * r.iterations);
                assert!((deeper - r.value).abs() <= r.error_bound, "mu={mu} j={j}");
            }
        }
    }
}

#[test]
fn rate_vanishes_only_at_the_lln_limit() {
    let opts = RateOptions::default();
    for chain in [primitive_chain(), uniform_nine()] {
        for j in 0..chain.period().period {
            let star = lln_phases(&chain).unwrap()[j];
            assert!(rate(&chain, j, star, &opts).rate.abs() < 1e-6, "j={j}");
            for delta in [-0.05, 0.05] {
                let r = rate(&chain, j, star + delta, &opts);
                assert!(r.rate > 0.0, "j={j} delta={delta}: {r:?}");
            }
        }
    }
}

#[test]
fn rate_curve_is_nonnegative_and_convex() {
    let curve = rate_curve(&primitive_chain(), 0, &GridSpec::default(), &RateOptions::default()).unwrap();
    let finite: Vec<_> = curve.points.iter().filter(|p| p.finite).collect();
    assert!(finite.iter().all(|p| p.rate >= -1e-8));
    for w in finite.windows(3) {
        assert!(w[0].rate + w[2].rate - 2.0 * w[1].rate >= -1e-8);
    }
}

#[test]
fn deterministic_observable_has_point_domains() {
    // Under the alternating chain every tree has the same sample mean at a given depth.
    let chain = alternating_chain();
    let phases = lln_phases(&chain).unwrap();
    for j in 0..2 {
        let (a1, a2) = domain_endpoints(&chain, j, &RateOptions::default());
        assert!((a1 - phases[j]).abs() < 1e-6 && (a2 - phases[j]).abs() < 1e-6);
    }
}

#[test]
fn lln_phases_match_exact_expectations() {
    // The expectation from a fixed root in class 0 converges along each phase.
    for chain in chains() {
        let p = chain.period().period;
        let phases = lln_phases(&chain).unwrap();
        let mut init = vec![0.0; chain.size()];
        init[chain.period().a0] = 1.0;
        // The transient decays slowly for the nine-symbol chain.
        let depth0 = 120;
        for j in 0..p {
            let depth = depth0 - depth0 % p + j;
            let e = expected_sample_mean(&chain, &init, depth).unwrap();
            assert!((e - phases[j]).abs() < 1e-6, "j={j}: {e} vs {}", phases[j]);
        }
    }
}

#[test]
fn beta_bounds_match_stationary_expectations() {
    for chain in chains() {
        let p = chain.period().period;
        let stat = class_stationary(&chain).unwrap();
        let pi: Vec<f64> = (0..chain.size()).map(|a| stat.iter().map(|s| s[a]).sum::<f64>() / p as f64).collect();
        let beta = beta_bounds(&chain, None).unwrap();
        let depth0 = if chain.arity() == 2 { 36 } else { 24 };
        for i in 0..p {
            let depth = depth0 - depth0 % p + i;
            let e = expected_sample_mean(&chain, &pi, depth).unwrap();
            assert!(beta.phases.iter().any(|b| (b - e).abs() < 1e-6), "{e} not in {:?}", beta.phases);
        }
    }
    let b = beta_bounds(&alternating_chain(), None).unwrap();
    assert!((b.beta_minus - LN_2 / 2.0).abs() < 1e-12 && (b.beta_plus - LN_2 / 2.0).abs() < 1e-12);
}

#[test]
fn finite_rate_approaches_the_rate() {
    let chain = primitive_chain();
    let opts = RateOptions::default();
    for alpha in [0.1, 0.3, 0.4] {
        let lam = rate(&chain, 0, alpha, &opts).rate;
        let f = finite_rate(&chain, 0, 40, alpha);
        assert!((f + lam).abs() < 1e-6, "alpha={alpha}: {f} vs {}", -lam);
    }
    assert!(finite_rate(&chain, 0, 12, LN_2 / 3.0) >= -1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn phi_is_nonpositive_against_stochastic_weights(raw in prop::collection::vec(0.01f64..1.0, 4)) {
        let chain = primitive_chain();
        let m = chain.m_linear();
        // Column 1 is forced; column 0 is free on {0, 1}.
        let t = raw[0] / (raw[0] + raw[1]);
        let p = vec![vec![t, 1.0], vec![1.0 - t, 0.0]];
        for v in phi(&p, &m).unwrap() {
            prop_assert!(v <= 1e-15);
        }
    }

    #[test]
    fn rate_is_nonnegative(alpha in -0.2f64..0.8) {
        let r = rate(&primitive_chain(), 0, alpha, &RateOptions::default());
        prop_assert!(r.rate >= 0.0);
        let inside = (0.0..=2.0 * LN_2 / 3.0).contains(&alpha);
        prop_assert!(r.finite || !inside);
        if alpha < -1e-3 || alpha > 2.0 * LN_2 / 3.0 + 1e-3 {
            prop_assert!(!r.finite);
        }
    }
}

#[test]
fn degenerate_observable_rate() {
    let base = AdjacencyModel::from_rows(&[vec![1, 1], vec![1, 0]], 2).unwrap();
    let chain = WeightedChainModel::new(base, &[vec![0.5, 1.0], vec![0.5, 0.0]], &[vec![1.0; 2], vec![1.0; 2]]).unwrap();
    let opts = RateOptions::default();
    assert_eq!(rate(&chain, 0, 0.0, &opts).rate, 0.0);
    assert!(!rate(&chain, 0, 1e-3, &opts).finite);
}

