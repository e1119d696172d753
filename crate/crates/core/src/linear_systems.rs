//! Linear-system queries built on the rank engine: minimal-degree g^r_d,
//! gonality, hyperellipticity, Weierstrass points and gap sequences.

use thiserror::Error;

use crate::divisor::{Divisor, Reducer};
use crate::graph::MultiGraph;
use crate::rank::RankEngine;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearSystemError {
    #[error("requires genus at least {required}, graph has genus {genus}")]
    GenusTooSmall { required: usize, genus: usize },
    #[error("rank must be at least 1")]
    RankTooSmall,
}

/// A divisor realizing a g^r_d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrdWitness<T> {
    pub divisor: Divisor<T>,
    pub degree: i64,
    pub rank: i64,
}

/// Every base-reduced divisor of degree `d` whose base coefficient is at
/// least `min_base`, i.e. one representative per effective class of degree
/// `d` with `r >= min_base` possible. Visited in lexicographic order of the
/// non-base coefficients.
pub fn reduced_effective_classes<T: Scalar>(
    reducer: &Reducer<'_>,
    d: i64,
    min_base: i64,
    mut visit: impl FnMut(&Divisor<T>) -> bool,
) {
    let graph = reducer.graph();
    let n = graph.vertex_count();
    let base = reducer.base();
    let budget = d - min_base.max(0);
    if budget < 0 {
        return;
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != base).collect();
    let mut coeffs = vec![0i64; n];
    // depth-first over non-base vertices; returns false to stop early
    fn go<T: Scalar>(
        i: usize,
        left: i64,
        d: i64,
        others: &[usize],
        coeffs: &mut Vec<i64>,
        reducer: &Reducer<'_>,
        visit: &mut dyn FnMut(&Divisor<T>) -> bool,
    ) -> bool {
        if i == others.len() {
            let mut c = coeffs.clone();
            c[reducer.base()] = d - (coeffs.iter().sum::<i64>());
            let div = Divisor::<T>::from_i64s(&c);
            if reducer.burn(&div).complete {
                return visit(&div);
            }
            return true;
        }
        let v = others[i];
        // a reduced divisor has fewer chips than edges at each non-base vertex
        let cap = left.min(reducer.graph().degree(v) as i64 - 1);
        for c in 0..=cap {
            coeffs[v] = c;
            if !go(i + 1, left - c, d, others, coeffs, reducer, visit) {
                coeffs[v] = 0;
                return false;
            }
        }
        coeffs[v] = 0;
        true
    }
    go::<T>(0, budget, d, &others, &mut coeffs, reducer, &mut visit);
}

/// Minimal degree `d <= d_max` of a divisor of rank exactly `r`, with a
/// witness. Searches one reduced representative per class, degree by degree.
pub fn min_degree_grd<T: Scalar>(
    graph: &MultiGraph,
    r: i64,
    d_max: i64,
) -> Result<Option<GrdWitness<T>>, LinearSystemError> {
    if r < 1 {
        return Err(LinearSystemError::RankTooSmall);
    }
    let mut engine = RankEngine::<T>::new(graph);
    for d in r..=d_max {
        let reducer = engine.reducer().clone();
        let mut found: Option<Divisor<T>> = None;
        reduced_effective_classes::<T>(&reducer, d, r, |div| {
            if engine.rank_at_least(div, r) {
                found = Some(div.clone());
                false
            } else {
                true
            }
        });
        if let Some(div) = found {
            // minimality of d forces the rank to be exactly r
            let rank = engine.rank(&div);
            debug_assert_eq!(rank, r);
            return Ok(Some(GrdWitness {
                divisor: div,
                degree: d,
                rank,
            }));
        }
    }
    Ok(None)
}

/// Some effective divisor of degree exactly `d` with rank at least `r`.
/// Existence is monotone in `d`: adding a point never lowers rank.
pub fn divisor_of_rank_at_least<T: Scalar>(graph: &MultiGraph, r: i64, d: i64) -> Option<Divisor<T>> {
    let mut engine = RankEngine::<T>::new(graph);
    let reducer = engine.reducer().clone();
    let mut found = None;
    reduced_effective_classes::<T>(&reducer, d, r, |div| {
        if engine.rank_at_least(div, r) {
            found = Some(div.clone());
            false
        } else {
            true
        }
    });
    found
}

/// Least degree of a divisor of rank >= 1. Always at most `genus + 1`.
pub fn gonality(graph: &MultiGraph) -> i64 {
    gonality_witness::<i64>(graph).degree
}

pub fn gonality_witness<T: Scalar>(graph: &MultiGraph) -> GrdWitness<T> {
    let ceiling = graph.genus() as i64 + 1;
    min_degree_grd::<T>(graph, 1, ceiling)
        .expect("r = 1 is valid")
        .expect("a degree g + 1 divisor has rank >= 1")
}

/// Genus at least 2 and a g^1_2 exists.
pub fn is_hyperelliptic(graph: &MultiGraph) -> bool {
    graph.genus() >= 2
        && min_degree_grd::<i64>(graph, 1, 2)
            .expect("r = 1 is valid")
            .is_some()
}

/// Vertices `P` with `r(g (P)) >= 1`.
pub fn weierstrass_points(graph: &MultiGraph) -> Vec<usize> {
    let g = graph.genus() as i64;
    let n = graph.vertex_count();
    let mut engine = RankEngine::<i64>::new(graph);
    (0..n)
        .filter(|&v| engine.rank_at_least(&Divisor::point(n, v, g), 1))
        .collect()
}

/// Integers `k` in `1..=2g-1` with `r(k (P)) = r((k-1) (P))`.
pub fn gap_sequence(graph: &MultiGraph, p: usize) -> Result<Vec<usize>, LinearSystemError> {
    let genus = graph.genus();
    if genus < 1 {
        return Err(LinearSystemError::GenusTooSmall { required: 1, genus });
    }
    let n = graph.vertex_count();
    let mut engine = RankEngine::<i64>::new(graph);
    let mut prev = 0; // r(0)
    let mut gaps = Vec::new();
    for k in 1..=(2 * genus - 1) {
        let r = engine.rank(&Divisor::point(n, p, k as i64));
        if r == prev {
            gaps.push(k);
        }
        prev = r;
    }
    Ok(gaps)
}

/// Deleting `v` leaves a tree; then `v` cannot be a Weierstrass point.
pub fn is_residual_tree_vertex(graph: &MultiGraph, v: usize) -> Result<bool, LinearSystemError> {
    let genus = graph.genus();
    if genus < 2 {
        return Err(LinearSystemError::GenusTooSmall { required: 2, genus });
    }
    Ok(graph.residual_is_tree(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, complete, cycle, path, quartic_dual_graph, MultiGraph};
    use crate::rank::rank;

    #[test]
    fn class_enumeration_counts_jacobian() {
        // degree-0 reduced divisors with nonnegative base: exactly the zero class
        let k4 = complete(4).unwrap();
        let r = Reducer::new(&k4, 0);
        let mut count = 0;
        reduced_effective_classes::<i64>(&r, 0, 0, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);
        // degree g: every class is effective, so count = |Jac| = 16
        let mut count = 0;
        reduced_effective_classes::<i64>(&r, 3, 0, |d| {
            assert!(r.is_reduced(d));
            count += 1;
            true
        });
        assert_eq!(count, 16);
    }

    #[test]
    fn complete_graph_gonality() {
        for n in 3..7 {
            let k = complete(n).unwrap();
            let w = min_degree_grd::<i64>(&k, 1, n as i64).unwrap().unwrap();
            assert_eq!(w.degree, n as i64 - 1);
            assert_eq!(rank(&k, &w.divisor), 1);
        }
        assert_eq!(gonality(&complete(5).unwrap()), 4);
    }

    #[test]
    fn small_gonalities() {
        assert_eq!(gonality(&quartic_dual_graph()), 3);
        assert_eq!(gonality(&path(4).unwrap()), 1);
        for n in 3..8 {
            assert_eq!(gonality(&banana(n).unwrap()), 2);
        }
        for n in 2..7 {
            assert_eq!(gonality(&cycle(n).unwrap()), 2);
        }
        assert!(min_degree_grd::<i64>(&path(3).unwrap(), 0, 3).is_err());
        assert_eq!(min_degree_grd::<i64>(&complete(5).unwrap(), 1, 3).unwrap(), None);
    }

    #[test]
    fn hyperelliptic() {
        assert!(is_hyperelliptic(&banana(4).unwrap()));
        assert!(!is_hyperelliptic(&complete(5).unwrap()));
        assert!(!is_hyperelliptic(&cycle(4).unwrap()));
        let genus_two = MultiGraph::from_edges(&[("a", "b"), ("b", "c"), ("c", "a"), ("a", "d"), ("d", "c")]).unwrap();
        assert_eq!(genus_two.genus(), 2);
        assert!(is_hyperelliptic(&genus_two));
    }

    #[test]
    fn weierstrass_examples() {
        for n in 3..7 {
            assert!(weierstrass_points(&banana(n).unwrap()).is_empty());
        }
        for n in 4..7 {
            assert_eq!(weierstrass_points(&complete(n).unwrap()), (0..n).collect::<Vec<_>>());
        }
        let q = quartic_dual_graph();
        let w: Vec<&str> = weierstrass_points(&q).into_iter().map(|v| q.label(v)).collect();
        assert_eq!(w, vec!["Q1", "Q2"]);
    }

    #[test]
    fn gap_examples() {
        let b = banana(3).unwrap();
        assert_eq!(gap_sequence(&b, 0).unwrap(), vec![1, 2]);
        let q = quartic_dual_graph();
        let gaps = gap_sequence(&q, q.vertex("Q1").unwrap()).unwrap();
        assert_eq!(gaps.len(), 3);
        assert!(!gaps.contains(&3));
        assert!(gap_sequence(&path(3).unwrap(), 0).is_err());
    }

    #[test]
    fn residual_tree_examples() {
        let b = banana(5).unwrap();
        assert!(is_residual_tree_vertex(&b, 0).unwrap());
        let q = quartic_dual_graph();
        assert!(is_residual_tree_vertex(&q, q.vertex("P").unwrap()).unwrap());
        assert!(is_residual_tree_vertex(&cycle(3).unwrap(), 0).is_err());
    }
}
