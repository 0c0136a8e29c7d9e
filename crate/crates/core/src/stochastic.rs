//! Reproducible sampling of tree-indexed Markov chains.
//!
//! Randomness is counter based: trial `t` uses ChaCha8 keyed by the seed on
//! stream `t`, and node `i` consumes the 64-bit word at position `2i` of that
//! stream. Any node can therefore be drawn independently of the others, which
//! makes the output identical for every thread count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::expected_sample_mean;
use crate::rate_function::{lln_phases, WeightedChainModel};
use crate::tree_core::{lattice_size, lattice_size_f64, LabeledTree, TreeShape};

/// Name of the generator recorded in reports.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha); key = seed, stream = trial, word position = 2 * node index";

/// Default cap on stored trees.
pub const DEFAULT_MAX_NODES: u64 = 1 << 25;
/// Cap on the number of nodes visited by a streamed trial.
pub const DEFAULT_STREAM_MAX_NODES: u64 = 1 << 28;

const CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootSpec {
    Fixed(usize),
    Distribution(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub depth: usize,
    pub trials: usize,
    pub seed: u64,
    pub root: RootSpec,
    pub max_nodes: u64,
}

impl SampleConfig {
    pub fn new(depth: usize, trials: usize, seed: u64, root: RootSpec) -> Self {
        Self {
            depth,
            trials,
            seed,
            root,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        match &self.root {
            RootSpec::Fixed(a) if *a >= n => Err(Error::invalid(format!("root symbol {a} outside the alphabet"))),
            RootSpec::Distribution(p) => {
                let s: f64 = p.iter().sum();
                if p.len() != n || p.iter().any(|x| !(*x >= 0.0)) || (s - 1.0).abs() > 1e-9 {
                    Err(Error::invalid("root distribution must be a probability vector over the alphabet"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Per-parent cumulative distributions of the children.
struct Sampler {
    cols: Vec<Vec<(usize, f64)>>,
    root: Vec<(usize, f64)>,
}

fn cumulative(pairs: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut acc = 0.0;
    pairs
        .filter(|p| p.1 > 0.0)
        .map(|(a, p)| {
            acc += p;
            (a, acc)
        })
        .collect()
}

impl Sampler {
    fn new(model: &WeightedChainModel, root: &RootSpec) -> Self {
        let m = model.log_m();
        let cols = (0..model.size())
            .map(|b| cumulative(m.column(b).iter().map(|&(a, l)| (a, l.exp()))))
            .collect();
        let root = match root {
            RootSpec::Fixed(a) => vec![(*a, 1.0)],
            RootSpec::Distribution(p) => cumulative(p.iter().copied().enumerate()),
        };
        Self { cols, root }
    }

    #[inline]
    fn draw(cum: &[(usize, f64)], u: f64) -> usize {
        let total = cum.last().expect("nonempty column").1;
        let x = u * total;
        cum.iter().find(|c| x < c.1).unwrap_or(cum.last().unwrap()).0
    }
}

#[inline]
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws level `k+1` (global indices starting at `start`) from level `k`,
/// returning the child-parent edge counts `counts[a * n + b]`.
fn next_level(
    sampler: &Sampler,
    base: &ChaCha8Rng,
    parents: &[u16],
    children: &mut [u16],
    start: usize,
    d: usize,
    n: usize,
) -> Vec<u64> {
    let partial: Vec<Vec<u64>> = children
        .par_chunks_mut(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let offset = ci * CHUNK;
            let mut rng = base.clone();
            rng.set_word_pos(2 * (start + offset) as u128);
            let mut counts = vec![0u64; n * n];
            for (i, slot) in chunk.iter_mut().enumerate() {
                let b = parents[(offset + i) / d] as usize;
                let a = Sampler::draw(&sampler.cols[b], uniform(&mut rng));
                *slot = a as u16;
                counts[a * n + b] += 1;
            }
            counts
        })
        .collect();
    let mut total = vec![0u64; n * n];
    for c in partial {
        for (t, x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    total
}

fn draw_root(sampler: &Sampler, base: &ChaCha8Rng) -> u16 {
    let mut rng = base.clone();
    rng.set_word_pos(0);
    Sampler::draw(&sampler.root, uniform(&mut rng)) as u16
}

/// Samples trial `trial` of `config` as a stored breadth-first tree.
pub fn sample_tree(model: &WeightedChainModel, config: &SampleConfig, trial: u64) -> Result<LabeledTree> {
    let n = model.size();
    config.validate(n)?;
    let d = model.arity();
    let shape = TreeShape::new(d, config.depth, config.max_nodes)?;
    let sampler = Sampler::new(model, &config.root);
    let base = trial_rng(config.seed, trial);
    let mut labels = vec![0u16; shape.node_count()];
    labels[0] = draw_root(&sampler, &base);
    for k in 0..config.depth {
        let r = shape.level_range(k + 1);
        let (head, tail) = labels.split_at_mut(r.start);
        let parents = &head[shape.level_range(k)];
        next_level(&sampler, &base, parents, &mut tail[..r.len()], r.start, d, n);
    }
    LabeledTree::new(shape, labels)
}

/// Sample means `S_k / |Λ(k)|` for `k = 0..=depth` of one streamed trial.
/// Only one level is held in memory; sums are rebuilt from integer edge
/// counts in a fixed order, so results do not depend on scheduling.
fn stream_means(model: &WeightedChainModel, sampler: &Sampler, seed: u64, depth: usize, trial: u64) -> Vec<f64> {
    let n = model.size();
    let d = model.arity();
    let w = model.log_w();
    let base = trial_rng(seed, trial);
    let mut level = vec![draw_root(sampler, &base)];
    let mut start = 1usize;
    let mut sum = 0.0;
    let mut means = vec![0.0];
    for k in 0..depth {
        let mut next = vec![0u16; level.len() * d];
        let counts = next_level(sampler, &base, &level, &mut next, start, d, n);
        for a in 0..n {
            for b in 0..n {
                let c = counts[a * n + b];
                if c > 0 {
                    sum += c as f64 * w.log_at(a, b);
                }
            }
        }
        start += next.len();
        level = next;
        means.push(sum / lattice_size_f64(d, k + 1));
    }
    means
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub generator: String,
    pub seed: u64,
    pub depth: usize,
    pub trials: usize,
    pub root: usize,
    /// Sample mean at the full depth, one per trial.
    pub per_trial_means: Vec<f64>,
    /// Trial-averaged sample mean at each depth `0..=depth`.
    pub running_means: Vec<f64>,
    pub empirical_mean: f64,
    pub standard_error: f64,
    /// LLN limit for each phase (deepest level in class `j`).
    pub phase_targets: Vec<f64>,
    /// Phase of the final depth.
    pub phase: usize,
    pub target: f64,
    /// Exact expected sample mean at the final depth.
    pub exact_expectation: f64,
    /// `|mean - target| ≤ 3 se + |exact_expectation - target|`, up to rounding.
    pub pass: bool,
}

fn stream_guard(d: usize, depth: usize) -> Result<()> {
    let size = lattice_size(d, depth)?;
    if size > DEFAULT_STREAM_MAX_NODES {
        return Err(Error::TooLarge {
            what: "streamed tree",
            size: size as f64,
            limit: DEFAULT_STREAM_MAX_NODES as f64,
        });
    }
    Ok(())
}

/// Monte-Carlo check of the law of large numbers from a fixed root.
pub fn lln_experiment(model: &WeightedChainModel, config: &SampleConfig) -> Result<ExperimentReport> {
    let n = model.size();
    config.validate(n)?;
    let root = match config.root {
        RootSpec::Fixed(a) => a,
        RootSpec::Distribution(_) => return Err(Error::invalid("the LLN experiment needs a fixed root")),
    };
    let root_class = model.period().class_of[root]
        .ok_or_else(|| Error::invalid(format!("root {root} is not reachable from the distinguished symbol")))?;
    stream_guard(model.arity(), config.depth)?;
    let sampler = Sampler::new(model, &config.root);
    let runs: Vec<Vec<f64>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| stream_means(model, &sampler, config.seed, config.depth, t))
        .collect();
    let per_trial_means: Vec<f64> = runs.iter().map(|r| r[config.depth]).collect();
    let running_means = (0..=config.depth)
        .map(|k| runs.iter().map(|r| r[k]).sum::<f64>() / runs.len() as f64)
        .collect();
    let (mean, se) = mean_and_se(&per_trial_means);
    let phase_targets = lln_phases(model)?;
    let phase = (root_class + config.depth) % model.period().period;
    let target = phase_targets[phase];
    let mut init = vec![0.0; n];
    init[root] = 1.0;
    let exact_expectation = expected_sample_mean(model, &init, config.depth)?;
    // The small absolute slack absorbs rounding when every trial is identical.
    let pass = (mean - target).abs() <= 3.0 * se + (exact_expectation - target).abs() + 1e-12 * (1.0 + target.abs());
    Ok(ExperimentReport {
        generator: GENERATOR.into(),
        seed: config.seed,
        depth: config.depth,
        trials: config.trials,
        root,
        per_trial_means,
        running_means,
        empirical_mean: mean,
        standard_error: se,
        phase_targets,
        phase,
        target,
        exact_expectation,
        pass,
    })
}

/// Sample mean and its standard error (zero for a single value).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub depth: usize,
    pub hits: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// `(1/|Λ(depth)|) log p̂`; `-inf` when there were no hits.
    #[serde(with = "crate::numeric::ext_float")]
    pub log_rate: f64,
}

/// Wilson score interval at `z`.
pub fn wilson_interval(hits: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Plain frequency estimate of `P(mean ∈ [lo, hi])` at every depth. This is
/// a sanity probe only: rare events need far more trials than are practical.
pub fn tail_estimate(model: &WeightedChainModel, config: &SampleConfig, lo: f64, hi: f64) -> Result<Vec<TailRow>> {
    config.validate(model.size())?;
    if !(lo <= hi) {
        return Err(Error::invalid("tail interval must satisfy lo <= hi"));
    }
    stream_guard(model.arity(), config.depth)?;
    let sampler = Sampler::new(model, &config.root);
    let runs: Vec<Vec<f64>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| stream_means(model, &sampler, config.seed, config.depth, t))
        .collect();
    Ok((0..=config.depth)
        .map(|k| {
            let hits = runs.iter().filter(|r| r[k] >= lo && r[k] <= hi).count();
            let p_hat = hits as f64 / config.trials as f64;
            let (wl, wh) = wilson_interval(hits, config.trials, 1.96);
            TailRow {
                depth: k,
                hits,
                trials: config.trials,
                p_hat,
                wilson_lo: wl,
                wilson_hi: wh,
                log_rate: p_hat.ln() / lattice_size_f64(model.arity(), k),
            }
        })
        .collect())
}
