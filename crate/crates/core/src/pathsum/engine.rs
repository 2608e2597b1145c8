//! Exhaustive path enumeration with branch-and-bound pruning.
//!
//! The interior indices are split into a fixed prefix, which selects a block,
//! and a suffix enumerated depth-first inside the block. Block results are
//! combined by a pairwise tree over block order. The block layout depends only
//! on `(D, N)`, so totals are bit-identical for any worker count.

use std::collections::BinaryHeap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};

use super::enumerate::guarded_count;
use super::{Path, PathContribution, PathSumResult, PruneConfig};

/// Minimum number of blocks the prefix should produce, when the path count allows.
const BLOCK_TARGET: usize = 256;
/// Slack on subtree bounds so that rounding in the bound never prunes a path the
/// leaf test would keep.
const BOUND_SLACK: f64 = 1.0 - 1e-12;

#[derive(Clone, Default)]
pub struct PathSumEngine {
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl PathSumEngine {
    /// Runs on the global rayon pool.
    pub fn new() -> Self {
        PathSumEngine { pool: None }
    }

    pub fn with_workers(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;
        Ok(PathSumEngine { pool: Some(Arc::new(pool)) })
    }

    fn run<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    /// `<to|U^steps|from>` summed path by path.
    pub fn sum(&self, u_step: &Operator, steps: usize, from: usize, to: usize, prune: &PruneConfig) -> Result<PathSumResult> {
        prune.validate()?;
        let path_count = guarded_count(u_step.dim(), steps, from, to, prune.resource_limit)?;
        let query = Query::new(u_step, steps, from, to);
        // Paths tied with the floor up to rounding are kept.
        let threshold = if prune.magnitude_floor > 0.0 { prune.magnitude_floor * query.max_path_magnitude() * BOUND_SLACK } else { 0.0 };
        let mode = Mode { accumulate: true, threshold, top_k: prune.top_k };
        let blocks = self.run(|| query.run_blocks(&mode));

        let total = tree_reduce(&blocks.iter().map(|b| b.sum).collect::<Vec<_>>(), C64::new(0.0, 0.0));
        let kept_mass = tree_reduce(&blocks.iter().map(|b| b.kept_mass).collect::<Vec<_>>(), 0.0);
        let pruned_mass = tree_reduce(&blocks.iter().map(|b| b.pruned_mass).collect::<Vec<_>>(), 0.0);
        let pruned_count = blocks.iter().map(|b| b.pruned_count).sum();
        let top = merge_top(blocks, prune.top_k);
        let total_mass = kept_mass + pruned_mass;
        let concentration = if prune.top_k > 0 && total_mass > 0.0 {
            let top_mass: f64 = top.iter().map(|c| c.magnitude).sum();
            Some((top_mass / total_mass).min(1.0))
        } else {
            None
        };
        Ok(PathSumResult { total, path_count, pruned_count, pruned_mass, total_mass, top, concentration })
    }

    /// The `top_k` largest-magnitude paths, ties broken lexicographically.
    /// Subtrees that cannot beat the current `top_k`-th entry are skipped.
    pub fn dominant(&self, u_step: &Operator, steps: usize, from: usize, to: usize, top_k: usize, resource_limit: u64) -> Result<Vec<PathContribution>> {
        guarded_count(u_step.dim(), steps, from, to, resource_limit)?;
        if top_k == 0 {
            return Ok(Vec::new());
        }
        let query = Query::new(u_step, steps, from, to);
        let mode = Mode { accumulate: false, threshold: 0.0, top_k };
        let blocks = self.run(|| query.run_blocks(&mode));
        Ok(merge_top(blocks, top_k))
    }
}

pub fn sum_over_paths(u_step: &Operator, steps: usize, from: usize, to: usize, prune: &PruneConfig) -> Result<PathSumResult> {
    PathSumEngine::new().sum(u_step, steps, from, to, prune)
}

pub fn dominant_paths(u_step: &Operator, steps: usize, from: usize, to: usize, top_k: usize) -> Result<Vec<PathContribution>> {
    PathSumEngine::new().dominant(u_step, steps, from, to, top_k, super::DEFAULT_RESOURCE_LIMIT)
}

struct Mode {
    accumulate: bool,
    threshold: f64,
    top_k: usize,
}

struct Query<'a> {
    u: &'a Operator,
    mags: Vec<f64>,
    dim: usize,
    steps: usize,
    from: usize,
    to: usize,
    /// `best[r][s]`: largest magnitude product over `r` remaining steps from `s` to `to`.
    best: Vec<Vec<f64>>,
    /// `mass[r][s]`: sum of magnitude products over the same completions.
    mass: Vec<Vec<f64>>,
}

impl<'a> Query<'a> {
    fn new(u: &'a Operator, steps: usize, from: usize, to: usize) -> Self {
        let dim = u.dim();
        let mags = u.magnitudes();
        let mut best = vec![vec![0.0; dim]; steps + 1];
        let mut mass = vec![vec![0.0; dim]; steps + 1];
        best[0][to] = 1.0;
        mass[0][to] = 1.0;
        for r in 1..=steps {
            for s in 0..dim {
                let (mut b, mut m) = (0.0f64, 0.0);
                for next in 0..dim {
                    let w = mags[next * dim + s];
                    b = b.max(w * best[r - 1][next]);
                    m += w * mass[r - 1][next];
                }
                best[r][s] = b;
                mass[r][s] = m;
            }
        }
        Query { u, mags, dim, steps, from, to, best, mass }
    }

    #[inline]
    fn mag(&self, next: usize, cur: usize) -> f64 {
        self.mags[next * self.dim + cur]
    }

    /// Largest path magnitude, multiplied in the same order as the enumeration.
    fn max_path_magnitude(&self) -> f64 {
        let d = self.dim;
        let mut fwd = vec![0.0f64; d];
        fwd[self.from] = 1.0;
        for t in 0..self.steps {
            let mut next = vec![0.0f64; d];
            let targets: Vec<usize> = if t + 1 == self.steps { vec![self.to] } else { (0..d).collect() };
            for &n in &targets {
                next[n] = (0..d).map(|s| fwd[s] * self.mag(n, s)).fold(0.0, f64::max);
            }
            fwd = next;
        }
        fwd[self.to]
    }

    fn prefix_len(&self) -> usize {
        let interior = self.steps - 1;
        let mut p = 0;
        let mut blocks = 1usize;
        while p < interior && blocks < BLOCK_TARGET {
            blocks = blocks.saturating_mul(self.dim);
            p += 1;
        }
        p
    }

    fn run_blocks(&self, mode: &Mode) -> Vec<BlockAcc> {
        let p = self.prefix_len();
        let n_blocks = self.dim.pow(p as u32);
        (0..n_blocks)
            .into_par_iter()
            .map(|b| self.run_block(b, p, mode))
            .collect()
    }

    fn run_block(&self, block: usize, prefix: usize, mode: &Mode) -> BlockAcc {
        let mut acc = BlockAcc::new(mode.top_k);
        let mut path = vec![0usize; self.steps + 1];
        path[0] = self.from;
        path[self.steps] = self.to;
        // Decode the block id into s_1..s_prefix, most significant digit first.
        let mut rem = block;
        for t in (1..=prefix).rev() {
            path[t] = rem % self.dim;
            rem /= self.dim;
        }
        let mut amp = C64::new(1.0, 0.0);
        let mut pm = 1.0;
        for t in 1..=prefix {
            amp *= self.u.get(path[t], path[t - 1]);
            pm *= self.mag(path[t], path[t - 1]);
        }
        // Only the full prefix is tested: shorter prefixes are shared with other blocks.
        if prefix > 0 && self.cut(&mut acc, mode, pm, path[prefix], self.steps - prefix) {
            return acc;
        }
        self.descend(&mut acc, mode, &mut path, prefix, amp, pm);
        acc
    }

    /// Decides whether the subtree below `(s, remaining)` is skipped, accounting for it if so.
    fn cut(&self, acc: &mut BlockAcc, mode: &Mode, pm: f64, s: usize, remaining: usize) -> bool {
        let bound = pm * self.best[remaining][s];
        if mode.threshold > 0.0 && bound < mode.threshold * BOUND_SLACK {
            if mode.accumulate {
                acc.pruned_count += (self.dim as u64).pow((remaining - 1) as u32);
                acc.pruned_mass += pm * self.mass[remaining][s];
            }
            return true;
        }
        !mode.accumulate && acc.top.cannot_admit(bound)
    }

    fn descend(&self, acc: &mut BlockAcc, mode: &Mode, path: &mut [usize], t: usize, amp: C64, pm: f64) {
        let cur = path[t];
        if t + 1 == self.steps {
            let a = amp * self.u.get(self.to, cur);
            let m = pm * self.mag(self.to, cur);
            if m < mode.threshold {
                acc.pruned_count += 1;
                acc.pruned_mass += m;
                return;
            }
            acc.sum += a;
            acc.kept_mass += m;
            acc.top.offer(a, path);
            return;
        }
        for next in 0..self.dim {
            let npm = pm * self.mag(next, cur);
            let remaining = self.steps - (t + 1);
            path[t + 1] = next;
            if self.cut(acc, mode, npm, next, remaining) {
                continue;
            }
            self.descend(acc, mode, path, t + 1, amp * self.u.get(next, cur), npm);
        }
    }
}

struct BlockAcc {
    sum: C64,
    kept_mass: f64,
    pruned_mass: f64,
    pruned_count: u64,
    top: TopK,
}

impl BlockAcc {
    fn new(k: usize) -> Self {
        BlockAcc { sum: C64::new(0.0, 0.0), kept_mass: 0.0, pruned_mass: 0.0, pruned_count: 0, top: TopK::new(k) }
    }
}

/// Heap entry ordered so that the heap's maximum is the worst kept contribution.
struct Ranked(PathContribution);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.rank_cmp(&other.0)
    }
}

struct TopK {
    k: usize,
    heap: BinaryHeap<Ranked>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK { k, heap: BinaryHeap::with_capacity(k + 1) }
    }

    fn worst_magnitude(&self) -> Option<f64> {
        if self.heap.len() < self.k {
            None
        } else {
            self.heap.peek().map(|r| r.0.magnitude)
        }
    }

    /// True when no path with magnitude at most `bound` can enter the list.
    fn cannot_admit(&self, bound: f64) -> bool {
        if self.k == 0 {
            return true;
        }
        matches!(self.worst_magnitude(), Some(w) if bound < w * BOUND_SLACK)
    }

    fn offer(&mut self, amplitude: C64, path: &[usize]) {
        if self.k == 0 {
            return;
        }
        let magnitude = amplitude.norm();
        if let Some(w) = self.worst_magnitude() {
            if magnitude < w {
                return;
            }
        }
        let cand = Ranked(PathContribution::new(Path(path.to_vec()), amplitude));
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if cand < *self.heap.peek().expect("full heap") {
            self.heap.pop();
            self.heap.push(cand);
        }
    }
}

fn merge_top(blocks: Vec<BlockAcc>, k: usize) -> Vec<PathContribution> {
    let mut all: Vec<PathContribution> = blocks.into_iter().flat_map(|b| b.top.heap.into_iter().map(|r| r.0)).collect();
    all.sort_by(|a, b| a.rank_cmp(b));
    all.truncate(k);
    all
}

/// Pairwise sum over a fixed binary split of the slice.
fn tree_reduce<T: Copy + std::ops::Add<Output = T>>(xs: &[T], zero: T) -> T {
    match xs.len() {
        0 => zero,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            tree_reduce(a, zero) + tree_reduce(b, zero)
        }
    }
}
