//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde_json::Value;

use treeshift::alphabet_graph::{find_a0_and_period, is_irreducible, AdjacencyModel};
use treeshift::dimension::{dimension_auto, optimal_markov_measure, ratios_to_simplex, simplex_to_ratios};
use treeshift::fixtures::{alternating_chain, bipartite_four, golden_mean, nine_symbol, period_two, primitive_chain};
use treeshift::oracle::{
    enumerate_blocks, enumerate_type_classes, finite_rate, recursive_block_counts, DEFAULT_CLASS_LIMIT,
    DEFAULT_ENUMERATION_LIMIT,
};
use treeshift::rate_function::{beta_bounds, lln_phases, pressure, rate};
use treeshift::transfer_op::{apply_l, ExponentVector};
use treeshift::tree_core::lattice_size_f64;
use treeshift::{ModelFile, RateOptions, SearchOptions, SimplexPoint, WeightMatrix};
use treeshift_cli::{run, Cli};

const LN2: f64 = std::f64::consts::LN_2;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(checks: &[(&str, bool)], detail: String) -> Self {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        let detail = if failed.is_empty() {
            detail
        } else {
            format!("{detail}; failed: {}", failed.join(", "))
        };
        Outcome {
            pass: failed.is_empty(),
            detail,
        }
    }
}

fn write_model(dir: &Path, name: &str, model: &AdjacencyModel) -> PathBuf {
    let file = ModelFile {
        symbols: None,
        adjacency: model.rows(),
        d: model.arity(),
        m: None,
        a: None,
    };
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    path
}

fn write_example_one(dir: &Path) -> PathBuf {
    let path = dir.join("example_one.json");
    std::fs::write(
        &path,
        r#"{"adjacency": [[1, 1], [1, 0]], "d": 2, "M": [["1/2", 1], ["1/2", 0]], "A": [[1, 2], [1, 0]]}"#,
    )
    .unwrap();
    path
}

fn cli(args: &[&str]) -> Vec<u8> {
    let mut argv = vec!["treeshift", "--no-timing"];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    run(Cli::parse_from(argv), &mut out).expect("command succeeds");
    out
}

fn cli_json(args: &[&str]) -> Value {
    serde_json::from_slice(&cli(args)).expect("JSON output")
}

fn num(v: &Value) -> f64 {
    match v {
        Value::String(s) if s == "inf" => f64::INFINITY,
        Value::String(s) if s == "-inf" => f64::NEG_INFINITY,
        other => other.as_f64().expect("number"),
    }
}

fn criterion_1(dir: &Path) -> Outcome {
    let path = write_model(dir, "nine.json", &nine_symbol());
    let start = Instant::now();
    let doc = cli_json(&["dimension", path.to_str().unwrap()]);
    let secs = start.elapsed().as_secs_f64();
    let r = &doc["result"];
    let dim = num(&r["dim"]);
    let log_rho = num(&r["log_rho_linear"]);
    let s: Vec<f64> = r["argmin_s"].as_array().unwrap().iter().map(num).collect();
    let expected = [0.312, 0.588, 0.010];
    let dist = s.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Outcome::new(
        &[
            ("dim", (dim - 0.3027).abs() <= 5e-3),
            ("log rho", (log_rho - 0.3208).abs() <= 1e-3),
            ("dim < log rho", dim < log_rho),
            ("argmin within 0.05", dist <= 0.05),
            ("runtime", secs < 60.0),
        ],
        format!("dim={dim:.6} log_rho={log_rho:.6} argmin_s={s:.4?} linf={dist:.4} time={secs:.2}s"),
    )
}

fn criterion_2(dir: &Path) -> Outcome {
    let path = write_example_one(dir);
    let csv_path = dir.join("rate.csv");
    let start = Instant::now();
    let doc = cli_json(&["rate", path.to_str().unwrap(), "--points", "200", "--out", csv_path.to_str().unwrap()]);
    let secs = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    for rec in csv::Reader::from_path(&csv_path).unwrap().records() {
        let rec = rec.unwrap();
        let alpha: f64 = rec[0].parse().unwrap();
        let value = if &rec[1] == "inf" { f64::INFINITY } else { rec[1].parse().unwrap() };
        rows.push((alpha, value));
    }
    let hi = 2.0 / 3.0 * LN2;
    let res = 0.005;
    let domain_ok = rows.iter().all(|&(a, v)| {
        if a < -res || a > hi + res {
            v.is_infinite()
        } else if a > res && a < hi - res {
            v.is_finite()
        } else {
            true
        }
    });
    let a1 = num(&doc["result"]["alpha1"]);
    let a2 = num(&doc["result"]["alpha2"]);
    let zero = rate(&primitive_chain(), 0, LN2 / 3.0, &RateOptions::default()).rate;
    let finite: Vec<(f64, f64)> = rows.iter().copied().filter(|r| r.1.is_finite()).collect();
    let convex = finite.windows(3).all(|w| {
        let (h1, h2) = (w[1].0 - w[0].0, w[2].0 - w[1].0);
        (w[2].1 - w[1].1) / h2 - (w[1].1 - w[0].1) / h1 >= -1e-8
    });
    let argmin = finite.iter().fold((0.0, f64::INFINITY), |m, r| if r.1 < m.1 { *r } else { m });
    Outcome::new(
        &[
            ("finite domain", domain_ok && a1.abs() <= res && (a2 - hi).abs() <= res),
            ("zero at alpha*", zero.abs() <= 1e-4),
            ("convex", convex),
            ("runtime", secs < 30.0),
        ],
        format!(
            "domain=[{a1:.6}, {a2:.6}] rate((1/3)ln2)={zero:.2e} grid argmin={:.4} time={secs:.2}s",
            argmin.0
        ),
    )
}

fn criterion_3(dir: &Path) -> Outcome {
    let path = write_model(dir, "period_two.json", &period_two());
    let r = &cli_json(&["dimension", path.to_str().unwrap()])["result"];
    let dim = num(&r["dim"]);
    let h = num(&r["h_top"]);
    let log_rho = num(&r["log_rho_linear"]);
    Outcome::new(
        &[
            ("dim", (dim - LN2 / 3.0).abs() <= 1e-4),
            ("h_top", (h - 2.0 * LN2 / 3.0).abs() <= 1e-3),
            ("log rho", (log_rho - LN2 / 2.0).abs() <= 1e-12),
            ("strict chain", dim < log_rho && log_rho < h),
        ],
        format!("dim={dim:.8} log_rho={log_rho:.12} h_top={h:.6}"),
    )
}

fn criterion_4() -> Outcome {
    let chain = alternating_chain();
    let phases = lln_phases(&chain).unwrap();
    let beta = beta_bounds(&chain, None).unwrap();
    Outcome::new(
        &[
            ("phase 0", (phases[0] - LN2 / 3.0).abs() <= 1e-8),
            ("phase 1", (phases[1] - 2.0 * LN2 / 3.0).abs() <= 1e-8),
            ("beta-", (beta.beta_minus - LN2 / 2.0).abs() <= 1e-8),
            ("beta+", (beta.beta_plus - LN2 / 2.0).abs() <= 1e-8),
        ],
        format!(
            "phases={phases:.10?} beta=[{:.10}, {:.10}]",
            beta.beta_minus, beta.beta_plus
        ),
    )
}

fn irreducible_fixtures() -> Vec<(&'static str, AdjacencyModel)> {
    vec![
        ("nine", nine_symbol()),
        ("period-two", period_two()),
        ("golden-2", golden_mean(2)),
        ("golden-3", golden_mean(3)),
        ("full-2", AdjacencyModel::full_shift(2, 2)),
        ("full-3", AdjacencyModel::full_shift(3, 3)),
        ("bipartite", bipartite_four(2)),
    ]
}

fn criterion_5() -> Outcome {
    let opts = SearchOptions::default();
    let mut worst: f64 = 0.0;
    let mut all = true;
    for (_, m) in irreducible_fixtures() {
        let rep = dimension_auto(&m, &opts).unwrap();
        match optimal_markov_measure(&m, &rep, &opts.eigen, 1e-5) {
            Ok(meas) => worst = worst.max((meas.validation - rep.dim).abs()),
            Err(_) => all = false,
        }
    }
    Outcome::new(
        &[("identity", all && worst <= 1e-5)],
        format!("max |validation - dim| = {worst:.2e} over {} fixtures", irreducible_fixtures().len()),
    )
}

fn random_primitive(rng: &mut ChaCha8Rng, n: usize) -> AdjacencyModel {
    loop {
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|_| (0..n).map(|_| (rng.next_u32() % 100 < 45) as u8).collect())
            .collect();
        let m = AdjacencyModel::from_rows(&rows, 2).unwrap();
        if is_irreducible(&m) && m.satisfies_a0() && find_a0_and_period(&m).unwrap().period == 1 {
            return m;
        }
    }
}

fn criterion_6() -> Outcome {
    let opts = SearchOptions::default();
    let mut shift_err: f64 = 0.0;
    for k in 1..=5 {
        for d in 2..=3 {
            let rep = dimension_auto(&AdjacencyModel::full_shift(k, d), &opts).unwrap();
            shift_err = shift_err.max((rep.dim - (k as f64).ln()).abs());
        }
    }
    let swap = AdjacencyModel::from_rows(&[vec![0, 1], vec![1, 0]], 2).unwrap();
    let swap_dim = dimension_auto(&swap, &opts).unwrap().dim;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut prim_err: f64 = 0.0;
    for i in 0..100 {
        let m = random_primitive(&mut rng, 1 + i % 5);
        let rep = dimension_auto(&m, &opts).unwrap();
        prim_err = prim_err.max((rep.dim - rep.log_rho_linear).abs());
    }
    Outcome::new(
        &[
            ("full shifts", shift_err <= 1e-10),
            ("swap", swap_dim.abs() <= 1e-10),
            ("primitive", prim_err <= 1e-9),
        ],
        format!("full-shift err={shift_err:.1e} swap dim={swap_dim:.1e} primitive err={prim_err:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut models = vec![
        golden_mean(2),
        period_two(),
        AdjacencyModel::full_shift(1, 2),
        AdjacencyModel::full_shift(2, 2),
        AdjacencyModel::full_shift(3, 2),
        bipartite_four(2).submodel(&[0, 2]),
    ];
    // Every 0/1 matrix on two symbols.
    for bits in 0..16u32 {
        let rows: Vec<Vec<u8>> = (0..2).map(|a| (0..2).map(|b| ((bits >> (2 * a + b)) & 1) as u8).collect()).collect();
        models.push(AdjacencyModel::from_rows(&rows, 2).unwrap());
    }
    let mut counts_ok = true;
    for m in &models {
        for n in 0..=3 {
            let e = enumerate_blocks(m, n, None, false, DEFAULT_ENUMERATION_LIMIT).unwrap();
            counts_ok &= e.counts == recursive_block_counts(m, n)[n];
        }
    }
    let mut prob_ok = true;
    for chain in [primitive_chain(), alternating_chain()] {
        for n in 0..=4 {
            let classes = enumerate_type_classes(&chain, n, chain.period().a0, DEFAULT_CLASS_LIMIT).unwrap();
            let exact: BigRational = classes.iter().map(|c| c.probability.clone().unwrap()).sum();
            prob_ok &= exact == BigRational::from_integer(1.into());
        }
    }
    let chain = primitive_chain();
    let mut worst = f64::NEG_INFINITY;
    let mut classes_checked = 0;
    for n in 1..=4 {
        let size = lattice_size_f64(2, n);
        for c in enumerate_type_classes(&chain, n, 0, DEFAULT_CLASS_LIMIT).unwrap() {
            let alpha = c.mean(chain.log_w(), 2);
            worst = worst.max(c.log_probability / size - finite_rate(&chain, n % chain.period().period, n, alpha));
            classes_checked += 1;
        }
    }
    Outcome::new(
        &[
            ("block counts", counts_ok),
            ("probabilities sum to 1", prob_ok),
            ("weak duality", worst <= 1e-9),
        ],
        format!(
            "{} models, {classes_checked} classes, max (log P/|Λ| - F) = {worst:.3e}",
            models.len()
        ),
    )
}

fn criterion_8(dir: &Path) -> Outcome {
    let path = write_example_one(dir);
    let args = |t: &'static str| {
        vec![
            "--threads", t, "simulate", path.to_str().unwrap(), "--depth", "16", "--trials", "50", "--seed", "2024",
            "--root", "0",
        ]
    };
    let outputs: Vec<Vec<u8>> = ["1", "2", "8"]
        .iter()
        .map(|t| {
            let a = args(t);
            cli(&a.iter().map(|s| &**s).collect::<Vec<_>>())
        })
        .collect();
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    let doc: Value = serde_json::from_slice(&outputs[0]).unwrap();
    let e = &doc["result"]["experiment"];
    let mean = num(&e["empirical_mean"]);
    let se = num(&e["standard_error"]);
    let z = (mean - LN2 / 3.0) / se;
    Outcome::new(
        &[("within 3 se", z.abs() <= 3.0), ("bit-identical across threads", identical)],
        format!("mean={mean:.6} se={se:.2e} z={z:.3}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;

    let mut round_trip: f64 = 0.0;
    for p in 1..=5 {
        for d in 2..=4 {
            for _ in 0..200 {
                let e: Vec<f64> = (0..p).map(|_| -(1.0 - unit()).ln()).collect();
                let tot: f64 = e.iter().sum();
                let s = SimplexPoint(e.iter().map(|x| x / tot).collect());
                let back = ratios_to_simplex(&simplex_to_ratios(&s, d).r, d);
                round_trip = round_trip.max(s.0.iter().zip(&back.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            }
        }
    }

    let opts = SearchOptions::default();
    let mut spread: f64 = 0.0;
    for (_, m) in irreducible_fixtures() {
        let rep = dimension_auto(&m, &opts).unwrap();
        let lo = rep.class_values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rep.class_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
    }

    let mut homog: f64 = 0.0;
    let mut monotone = true;
    for m in [nine_symbol(), period_two(), bipartite_four(2)] {
        let p = find_a0_and_period(&m).unwrap().period;
        let w = WeightMatrix::from_adjacency(&m);
        for _ in 0..100 {
            let e: Vec<f64> = (0..p).map(|_| -(1.0 - unit()).ln()).collect();
            let tot: f64 = e.iter().sum();
            let r: ExponentVector = simplex_to_ratios(&SimplexPoint(e.iter().map(|x| x / tot).collect()), m.arity()).r;
            let x: Vec<f64> = (0..m.size()).map(|_| 10.0 * unit() - 5.0).collect();
            let c = 20.0 * unit() - 10.0;
            let bump: Vec<f64> = (0..m.size()).map(|_| 3.0 * unit()).collect();
            for rot in 0..p {
                let base = apply_l(&w, &r, &x, rot);
                let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
                for (a, b) in apply_l(&w, &r, &shifted, rot).iter().zip(&base) {
                    if b.is_finite() {
                        homog = homog.max((a - b - c).abs());
                    }
                }
                let bigger: Vec<f64> = x.iter().zip(&bump).map(|(v, e)| v + e).collect();
                for (a, b) in apply_l(&w, &r, &bigger, rot).iter().zip(&base) {
                    monotone &= *a >= b - 1e-10 || b.is_infinite();
                }
            }
        }
    }

    let mut worst_second: f64 = f64::INFINITY;
    for chain in [primitive_chain(), alternating_chain()] {
        for j in 0..chain.period().period {
            let h = 0.05;
            let vals: Vec<f64> = (-80..=80).map(|i| pressure(&chain, i as f64 * h, j, 1e-12).value).collect();
            for w in vals.windows(3) {
                worst_second = worst_second.min(w[0] - 2.0 * w[1] + w[2]);
            }
        }
    }

    Outcome::new(
        &[
            ("bijection", round_trip <= 1e-12),
            ("j-independence", spread <= 1e-6),
            ("homogeneity", homog <= 1e-10),
            ("monotonicity", monotone),
            ("pressure convexity", worst_second >= -1e-8),
        ],
        format!(
            "round trip={round_trip:.1e} class spread={spread:.1e} homogeneity={homog:.1e} min second difference={worst_second:.1e}"
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let dir = dir.path();
    let criteria: Vec<(usize, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(|| criterion_1(dir))),
        (2, Box::new(|| criterion_2(dir))),
        (3, Box::new(|| criterion_3(dir))),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(criterion_6)),
        (7, Box::new(criterion_7)),
        (8, Box::new(|| criterion_8(dir))),
        (9, Box::new(criterion_9)),
    ];
    let mut failures = 0;
    for (n, f) in criteria {
        let o = f();
        println!("criterion {n}: {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failures} failed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
