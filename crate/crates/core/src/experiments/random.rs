use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::divisor::Divisor;
use crate::graph::{GraphError, MultiGraph};
use crate::scalar::Scalar;

/// The generator behind every seeded experiment.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A connected loopless multigraph on `v1..vn` with exactly `n - 1 + g` edges:
/// a uniform random labeled spanning tree (Prüfer code) plus `g` extra
/// non-loop edges drawn uniformly with replacement.
pub fn random_multigraph(n: usize, g: usize, seed: u64) -> Result<MultiGraph, GraphError> {
    random_multigraph_with(n, g, &mut rng(seed))
}

pub fn random_multigraph_with<R: Rng>(n: usize, g: usize, rng: &mut R) -> Result<MultiGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::Parameter("need at least one vertex".into()));
    }
    if n == 1 && g > 0 {
        return Err(GraphError::Parameter(
            "a single vertex cannot carry genus without loops".into(),
        ));
    }
    let mut edges = tree_edges(n, rng);
    for _ in 0..g {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        edges.push((u.min(v), u.max(v)));
    }
    let labels = (1..=n).map(|i| format!("v{i}")).collect();
    MultiGraph::from_indexed(labels, edges)
}

fn tree_edges<R: Rng>(n: usize, rng: &mut R) -> Vec<(usize, usize)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf.min(c), leaf.max(c)));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges.shuffle(rng);
    edges
}

/// A divisor of exactly degree `degree` with coefficients spread at random;
/// individual coefficients may be negative when `spread > 0`.
pub fn random_divisor<T: Scalar, R: Rng>(n: usize, degree: i64, spread: i64, rng: &mut R) -> Divisor<T> {
    let mut c = vec![0i64; n];
    for _ in 0..spread {
        let v = rng.gen_range(0..n);
        let w = rng.gen_range(0..n);
        c[v] += 1;
        c[w] -= 1;
    }
    let step = if degree >= 0 { 1 } else { -1 };
    for _ in 0..degree.abs() {
        c[rng.gen_range(0..n)] += step;
    }
    Divisor::from_i64s(&c)
}
