//! Rank of divisors, with certificates.
//!
//! `r(D) >= k` holds iff `|D| != {}` and `r(D - (v)) >= k - 1` for every
//! vertex `v`; unrolling that recursion enumerates every effective `E` of
//! degree `k`. The engine walks it depth-first on reduced representatives and
//! memoizes verdicts per class for the lifetime of one engine.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::divisor::{canonical_divisor, Divisor, Reducer};
use crate::graph::{MultiGraph, VertexOrdering};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("divisor has {found} coefficients, graph has {expected} vertices")]
    WrongLength { expected: usize, found: usize },
    #[error("no ordering certifies that the linear system is empty")]
    CertificateSearchExhausted,
}

/// Orderings are only searched exhaustively up to this many vertices.
pub const EXHAUSTIVE_ORDERING_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Bounds {
    at_least: i64,
    below: i64,
}

pub struct RankEngine<'g, T: Scalar> {
    reducer: Reducer<'g>,
    genus: i64,
    degree_shortcut: bool,
    memo: HashMap<Vec<T>, Bounds>,
}

impl<'g, T: Scalar> RankEngine<'g, T> {
    pub fn new(graph: &'g MultiGraph) -> Self {
        RankEngine {
            reducer: Reducer::new(graph, 0),
            genus: graph.genus() as i64,
            degree_shortcut: true,
            memo: HashMap::new(),
        }
    }

    /// Disable the `deg(D) > 2g - 2  =>  r(D) = deg(D) - g` shortcut so every
    /// value comes out of the search itself.
    pub fn without_degree_shortcut(mut self) -> Self {
        self.degree_shortcut = false;
        self
    }

    pub fn graph(&self) -> &'g MultiGraph {
        self.reducer.graph()
    }

    pub fn reducer(&self) -> &Reducer<'g> {
        &self.reducer
    }

    fn check(&self, d: &Divisor<T>) {
        assert_eq!(d.len(), self.graph().vertex_count(), "divisor bound to another graph");
    }

    fn reduced(&self, d: &Divisor<T>) -> Vec<T> {
        self.check(d);
        self.reducer.reduce(d).into_vec()
    }

    fn degree_of(c: &[T]) -> i64 {
        c.iter()
            .fold(T::zero(), |a, x| a + x.clone())
            .to_i64()
            .expect("degree fits in i64")
    }

    /// `r(d) >= k`.
    pub fn rank_at_least(&mut self, d: &Divisor<T>, k: i64) -> bool {
        let red = self.reduced(d);
        self.at_least(red, k)
    }

    fn child(&self, red: &[T], v: usize) -> Vec<T> {
        let mut c = red.to_vec();
        c[v] = c[v].clone() - T::one();
        self.reducer.reduce_in_place(&mut c);
        c
    }

    fn at_least(&mut self, red: Vec<T>, k: i64) -> bool {
        if k < 0 {
            return true;
        }
        let base = self.reducer.base();
        if red[base].is_negative() {
            return false;
        }
        if k == 0 {
            return true;
        }
        let deg = Self::degree_of(&red);
        if deg < k {
            return false;
        }
        if self.degree_shortcut && deg > 2 * self.genus - 2 {
            return deg - self.genus >= k;
        }
        if let Some(b) = self.memo.get(&red) {
            if b.at_least >= k {
                return true;
            }
            if b.below <= k {
                return false;
            }
        }
        // D - (base) stays reduced, so its verdict at level 0 is immediate.
        if k == 1 && red[base].is_zero() {
            self.record(red, k, false);
            return false;
        }
        let n = red.len();
        let order = std::iter::once(base).chain((0..n).filter(|&v| v != base));
        for v in order {
            let c = self.child(&red, v);
            if !self.at_least(c, k - 1) {
                self.record(red, k, false);
                return false;
            }
        }
        self.record(red, k, true);
        true
    }

    fn record(&mut self, red: Vec<T>, k: i64, holds: bool) {
        let e = self.memo.entry(red).or_insert(Bounds {
            at_least: -1,
            below: i64::MAX,
        });
        if holds {
            e.at_least = e.at_least.max(k);
        } else {
            e.below = e.below.min(k);
        }
    }

    /// The rank of `d`.
    pub fn rank(&mut self, d: &Divisor<T>) -> i64 {
        let red = self.reduced(d);
        self.rank_of_reduced(red)
    }

    fn rank_of_reduced(&mut self, red: Vec<T>) -> i64 {
        if red[self.reducer.base()].is_negative() {
            return -1;
        }
        let deg = Self::degree_of(&red);
        if self.degree_shortcut && deg > 2 * self.genus - 2 {
            let forced = deg - self.genus;
            // audit one level of the search for the forced value
            let n = red.len();
            for v in 0..n {
                let c = self.child(&red, v);
                assert!(
                    self.at_least(c, forced - 1),
                    "rank search disagrees with the forced value deg(D) - g"
                );
            }
            return forced;
        }
        let mut k = 1;
        while self.at_least(red.clone(), k) {
            k += 1;
        }
        k - 1
    }

    /// An effective `E` of degree `k` with `|D - E|` empty. Requires `r(d) < k`.
    pub fn failing_effective(&mut self, d: &Divisor<T>, k: i64) -> Option<Divisor<T>> {
        let red = self.reduced(d);
        if k < 0 || self.at_least(red.clone(), k) {
            return None;
        }
        let n = red.len();
        let mut e = Divisor::zero(n);
        let mut cur = red;
        let mut level = k;
        while level > 0 {
            if cur[self.reducer.base()].is_negative() {
                // already empty; any effective remainder works
                e.add_at(self.reducer.base(), T::from_i64_exact(level));
                break;
            }
            let mut next = None;
            for v in 0..n {
                let c = self.child(&cur, v);
                if !self.at_least(c.clone(), level - 1) {
                    next = Some((v, c));
                    break;
                }
            }
            let (v, c) = next.expect("a failing rank test has a failing child");
            e.add_at(v, T::one());
            cur = c;
            level -= 1;
        }
        Some(e)
    }

    /// An ordering whose ν-divisor certifies `|d| = {}`, if `|d|` is empty.
    pub fn emptiness_ordering(&self, d: &Divisor<T>) -> Result<Option<VertexOrdering>, RankError> {
        let red = self.reducer.reduce(d);
        let base = self.reducer.base();
        if !red.get(base).is_negative() {
            return Ok(None);
        }
        let graph = self.graph();
        let burn = self.reducer.burn(&red);
        if burn.complete {
            let ord = VertexOrdering::new(graph, burn.order).expect("burn order is a permutation");
            if certifies_empty(graph, &ord, d) {
                return Ok(Some(ord));
            }
        }
        if graph.vertex_count() <= EXHAUSTIVE_ORDERING_LIMIT {
            for perm in OrderingPermutations::new(graph.vertex_count()) {
                let ord = VertexOrdering::new(graph, perm).expect("permutation");
                if certifies_empty(graph, &ord, d) {
                    return Ok(Some(ord));
                }
            }
        }
        Err(RankError::CertificateSearchExhausted)
    }
}

/// `ν - D` has an effective representative, which forces `|D| = {}`.
pub fn certifies_empty<T: Scalar>(graph: &MultiGraph, ord: &VertexOrdering, d: &Divisor<T>) -> bool {
    let nu: Divisor<T> = nu_divisor(graph, ord);
    Reducer::new(graph, 0).has_effective_representative(&(&nu - d))
}

/// `sum_v (#{edges vw : w < v} - 1) (v)`, of degree `g - 1`.
pub fn nu_divisor<T: Scalar>(graph: &MultiGraph, ord: &VertexOrdering) -> Divisor<T> {
    let n = graph.vertex_count();
    let mut pos = vec![0; n];
    for (i, &v) in ord.as_slice().iter().enumerate() {
        pos[v] = i;
    }
    Divisor::from_vec(
        (0..n)
            .map(|v| {
                let earlier: usize = graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&(w, _)| pos[w] < pos[v])
                    .map(|&(_, m)| m)
                    .sum();
                T::from_count(earlier) - T::one()
            })
            .collect(),
    )
}

pub fn rank<T: Scalar>(graph: &MultiGraph, d: &Divisor<T>) -> i64 {
    RankEngine::new(graph).rank(d)
}

pub fn rank_at_least<T: Scalar>(graph: &MultiGraph, d: &Divisor<T>, k: i64) -> bool {
    RankEngine::new(graph).rank_at_least(d, k)
}

/// Rank together with evidence that can be checked without the engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankResult<T> {
    pub rank: i64,
    /// An effective divisor equivalent to `D`, when `rank >= 0`.
    pub representative: Option<Divisor<T>>,
    /// Effective `E` of degree `rank + 1` with `|D - E|` empty (zero when `rank = -1`).
    pub failing_effective: Divisor<T>,
    /// Ordering whose ν-divisor dominates a representative of `D - E`.
    pub emptiness_ordering: VertexOrdering,
}

pub fn rank_with_certificate<T: Scalar>(graph: &MultiGraph, d: &Divisor<T>) -> Result<RankResult<T>, RankError> {
    d.check_graph(graph).map_err(|_| RankError::WrongLength {
        expected: graph.vertex_count(),
        found: d.len(),
    })?;
    let mut engine = RankEngine::new(graph);
    let r = engine.rank(d);
    let representative = (r >= 0).then(|| engine.reducer().reduce(d));
    let failing_effective = engine
        .failing_effective(d, r + 1)
        .expect("rank + 1 fails by definition");
    let residual = d - &failing_effective;
    let emptiness_ordering = engine
        .emptiness_ordering(&residual)?
        .ok_or(RankError::CertificateSearchExhausted)?;
    Ok(RankResult {
        rank: r,
        representative,
        failing_effective,
        emptiness_ordering,
    })
}

impl<T: Scalar> RankResult<T> {
    /// Check every certificate against `d` using reductions only.
    pub fn verify(&self, graph: &MultiGraph, d: &Divisor<T>) -> Result<(), String> {
        let reducer = Reducer::new(graph, 0);
        match (&self.representative, self.rank >= 0) {
            (Some(rep), true) => {
                if !rep.is_effective() {
                    return Err("representative is not effective".into());
                }
                if reducer.reduce(rep) != reducer.reduce(d) {
                    return Err("representative is not equivalent to D".into());
                }
            }
            (None, false) => {}
            _ => return Err("representative present iff rank >= 0".into()),
        }
        let e = &self.failing_effective;
        if !e.is_effective() {
            return Err("failing divisor is not effective".into());
        }
        if e.degree() != T::from_i64_exact(self.rank + 1) {
            return Err("failing divisor has the wrong degree".into());
        }
        if !certifies_empty(graph, &self.emptiness_ordering, &(d - e)) {
            return Err("ordering does not certify |D - E| = {}".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RiemannRochReport {
    pub degree: i64,
    pub genus: i64,
    pub rank: i64,
    pub residual_rank: i64,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

/// Compute `r(D)` and `r(K - D)` with separate engines (no degree shortcut)
/// and compare `r(D) - r(K - D)` with `deg(D) + 1 - g`.
pub fn riemann_roch_check<T: Scalar>(graph: &MultiGraph, d: &Divisor<T>) -> RiemannRochReport {
    let k = canonical_divisor::<T>(graph);
    let residual = &k - d;
    let rank = RankEngine::new(graph).without_degree_shortcut().rank(d);
    let residual_rank = RankEngine::new(graph).without_degree_shortcut().rank(&residual);
    let degree = d.degree().to_i64().expect("degree fits in i64");
    let genus = graph.genus() as i64;
    let lhs = rank - residual_rank;
    let rhs = degree + 1 - genus;
    RiemannRochReport {
        degree,
        genus,
        rank,
        residual_rank,
        lhs,
        rhs,
        holds: lhs == rhs,
    }
}

/// All permutations of `0..n` in lexicographic order.
pub struct OrderingPermutations {
    current: Option<Vec<usize>>,
}

impl OrderingPermutations {
    pub fn new(n: usize) -> Self {
        OrderingPermutations {
            current: Some((0..n).collect()),
        }
    }
}

impl Iterator for OrderingPermutations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let p = self.current.as_mut().unwrap();
        match (0..p.len().saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) {
            None => self.current = None,
            Some(i) => {
                let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
                p.swap(i, j);
                p[i + 1..].reverse();
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, complete, cycle, path, quartic_dual_graph};

    type D = Divisor<i64>;

    #[test]
    fn permutations_enumerate_all() {
        assert_eq!(OrderingPermutations::new(4).count(), 24);
        assert_eq!(OrderingPermutations::new(0).count(), 1);
    }

    #[test]
    fn banana_hyperelliptic_pair() {
        for n in 3..9 {
            let b = banana(n).unwrap();
            assert_eq!(rank(&b, &D::from_i64s(&[1, 1])), 1);
        }
    }

    #[test]
    fn zero_divisor_has_rank_zero() {
        for g in [banana(4).unwrap(), complete(5).unwrap(), path(3).unwrap(), quartic_dual_graph()] {
            let z = D::zero(g.vertex_count());
            assert_eq!(rank(&g, &z), 0);
            let cert = rank_with_certificate(&g, &z).unwrap();
            assert_eq!(cert.representative, Some(z.clone()));
            cert.verify(&g, &z).unwrap();
        }
    }

    #[test]
    fn quartic_canonical_rank() {
        let q = quartic_dual_graph();
        assert_eq!(rank(&q, &canonical_divisor::<i64>(&q)), 2);
    }

    #[test]
    fn complete_graph_ordering_argument() {
        // effective D of degree n-2 on K_n has rank <= 0
        for n in 3..7 {
            let k = complete(n).unwrap();
            let d = D::from_vec((0..n).map(|i| i64::from(i >= 2)).collect());
            assert_eq!(d.degree(), n as i64 - 2);
            assert!(rank(&k, &d) <= 0);
            let v1 = D::point(n, 0, 1);
            assert_eq!(rank(&k, &(&d - &v1)), -1);
        }
    }

    #[test]
    fn nu_divisor_examples() {
        for n in 2..7 {
            let b = banana(n).unwrap();
            let ord = VertexOrdering::new(&b, vec![0, 1]).unwrap();
            assert_eq!(nu_divisor::<i64>(&b, &ord), D::from_i64s(&[-1, n as i64 - 1]));
        }
        let p = path(5).unwrap();
        let ord = VertexOrdering::new(&p, (0..5).collect()).unwrap();
        assert_eq!(nu_divisor::<i64>(&p, &ord), D::from_i64s(&[-1, 0, 0, 0, 0]));
        let k4 = complete(4).unwrap();
        let ord = VertexOrdering::new(&k4, vec![0, 1, 2, 3]).unwrap();
        let nu = nu_divisor::<i64>(&k4, &ord);
        assert_eq!(nu, D::from_i64s(&[-1, 0, 1, 2]));
        assert_eq!(nu.degree(), 2);
    }

    #[test]
    fn banana_negative_certificate() {
        let b = banana(3).unwrap();
        let d = D::from_i64s(&[-1, 2]);
        let res = rank_with_certificate(&b, &d).unwrap();
        assert_eq!(res.rank, -1);
        assert_eq!(res.emptiness_ordering.labels(&b), vec!["Q1", "Q2"]);
        let nu = nu_divisor::<i64>(&b, &res.emptiness_ordering);
        assert_eq!(nu, d);
        res.verify(&b, &d).unwrap();
    }

    #[test]
    fn quartic_negative_certificate() {
        let q = quartic_dual_graph();
        let d = D::from_labeled(&q, &[("P", 1), ("Q1", 2), ("P'", -1)]).unwrap();
        let res = rank_with_certificate(&q, &d).unwrap();
        assert_eq!(res.rank, -1);
        res.verify(&q, &d).unwrap();
        let named = VertexOrdering::from_labels(&q, &["P'", "Q2", "P", "Q1"]).unwrap();
        assert_eq!(nu_divisor::<i64>(&q, &named), d);
        assert!(certifies_empty(&q, &named, &d));
    }

    #[test]
    fn certificates_verify_on_cycle() {
        let c = cycle(5).unwrap();
        for coeffs in [[1, 0, 0, 0, 0], [2, -1, 0, 0, 1], [0, 0, 0, 0, -1], [3, 0, 0, 0, 0]] {
            let d = D::from_i64s(&coeffs);
            let res = rank_with_certificate(&c, &d).unwrap();
            res.verify(&c, &d).unwrap();
            assert_eq!(res.rank, rank(&c, &d));
        }
    }

    #[test]
    fn high_degree_uses_forced_value() {
        let q = quartic_dual_graph();
        let d = D::from_labeled(&q, &[("P", 5), ("Q1", -1)]).unwrap();
        assert_eq!(rank(&q, &d), 4 - 3);
        assert_eq!(RankEngine::new(&q).without_degree_shortcut().rank(&d), 1);
    }

    #[test]
    fn riemann_roch_examples() {
        let b = banana(3).unwrap();
        let rep = riemann_roch_check(&b, &D::from_i64s(&[1, 1]));
        assert_eq!((rep.rank, rep.residual_rank), (1, 0));
        assert!(rep.holds);
        let q = quartic_dual_graph();
        let rep = riemann_roch_check(&q, &canonical_divisor::<i64>(&q));
        assert_eq!((rep.rank, rep.residual_rank, rep.lhs), (2, 0, 2));
        assert!(rep.holds);
    }
}
