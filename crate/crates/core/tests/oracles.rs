//! Independent oracles and algebraic invariants for the divisor and rank code.
//!
//! The oracles here never call the reducer: linear equivalence is decided by
//! Jacobian class coordinates, and rank by enumerating every effective `E`
//! straight from the definition.

use graphdiv::divisor::{canonical_divisor, is_equivalent, laplacian_apply, q_reduce, Divisor, IntFunction, Reducer};
use graphdiv::experiments::{random_divisor, random_multigraph, rng};
use graphdiv::graph::{banana, complete, cycle, quartic_dual_graph, MultiGraph, VertexOrdering};
use graphdiv::jacobian::Jacobian;
use graphdiv::rank::{nu_divisor, rank, rank_with_certificate, OrderingPermutations, RankEngine};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::Rng;

type D = Divisor<i64>;

/// Every vector of `n` nonnegative integers summing to `k`.
fn compositions(n: usize, k: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    if n == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in 0..=k {
        for mut rest in compositions(n - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `|D| != {}` by searching effective divisors of the same degree for one in
/// the same Jacobian class.
fn has_effective_oracle(jac: &Jacobian<'_, i64>, n: usize, d: &D) -> bool {
    let deg = d.degree();
    if deg < 0 {
        return false;
    }
    compositions(n, deg)
        .into_iter()
        .any(|e| jac.is_principal(&(&D::from_vec(e) - d)).unwrap())
}

fn rank_oracle(g: &MultiGraph, d: &D) -> i64 {
    let n = g.vertex_count();
    let jac = Jacobian::<i64>::new(g);
    if !has_effective_oracle(&jac, n, d) {
        return -1;
    }
    let mut k = 1;
    loop {
        let all = compositions(n, k)
            .into_iter()
            .all(|e| has_effective_oracle(&jac, n, &(d - &D::from_vec(e))));
        if !all {
            return k - 1;
        }
        k += 1;
    }
}

fn small_instance(seed: u64, max_n: usize, max_g: usize) -> (MultiGraph, D) {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n);
    let genus = r.gen_range(0..=max_g);
    let g = random_multigraph(n, genus, seed ^ 0x9e37).unwrap();
    let deg = r.gen_range(-1..=(2 * genus as i64 + 1));
    let d = random_divisor(n, deg, r.gen_range(0..3), &mut r);
    (g, d)
}

#[test]
fn rank_matches_definition_oracle() {
    let mut checked = 0;
    for seed in 0..120 {
        let (g, d) = small_instance(seed, 4, 3);
        if d.degree() > 5 {
            continue;
        }
        assert_eq!(rank(&g, &d), rank_oracle(&g, &d), "seed {seed}: {g:?} {d:?}");
        checked += 1;
    }
    assert!(checked > 80);
}

#[test]
fn rank_oracle_on_named_graphs() {
    let q = quartic_dual_graph();
    let k = canonical_divisor::<i64>(&q);
    assert_eq!(rank_oracle(&q, &k), 2);
    let b = banana(4).unwrap();
    assert_eq!(rank_oracle(&b, &D::from_i64s(&[1, 1])), 1);
    assert_eq!(rank_oracle(&complete(4).unwrap(), &D::from_i64s(&[1, 1, 1, 0])), 1);
}

#[test]
fn equivalence_agrees_with_class_coordinates_exhaustively() {
    let graphs = vec![
        quartic_dual_graph(),
        complete(4).unwrap(),
        banana(3).unwrap(),
        cycle(5).unwrap(),
        random_multigraph(5, 2, 11).unwrap(),
    ];
    for g in &graphs {
        let n = g.vertex_count();
        let jac = Jacobian::<i64>::new(g);
        let zero = D::zero(n);
        let mut principal = 0;
        let total = 7i64.pow(n as u32 - 1);
        for code in 0..total {
            let mut c = vec![0i64; n];
            let mut x = code;
            for slot in c.iter_mut().skip(1) {
                *slot = x % 7 - 3;
                x /= 7;
            }
            c[0] = -c.iter().sum::<i64>();
            if c[0].abs() > 3 {
                continue;
            }
            let d = D::from_vec(c);
            let by_reduction = is_equivalent(g, &d, &zero);
            assert_eq!(by_reduction, jac.is_principal(&d).unwrap(), "{g:?} {d:?}");
            principal += by_reduction as usize;
        }
        assert!(principal >= 1);
    }
}

#[test]
fn ordering_dichotomy_exhaustive() {
    for seed in 0..40 {
        let (g, d) = small_instance(seed, 5, 3);
        let n = g.vertex_count();
        let reducer = Reducer::new(&g, 0);
        let effective = reducer.has_effective_representative(&d);
        let ordering_witness = OrderingPermutations::new(n).any(|p| {
            let ord = VertexOrdering::new(&g, p).unwrap();
            let nu: D = nu_divisor(&g, &ord);
            reducer.has_effective_representative(&(&nu - &d))
        });
        assert!(effective ^ ordering_witness, "seed {seed}");
    }
}

#[test]
fn certificates_verify_on_random_instances() {
    for seed in 0..60 {
        let (g, d) = small_instance(seed, 6, 4);
        let res = rank_with_certificate(&g, &d).unwrap();
        assert_eq!(res.rank, rank(&g, &d));
        res.verify(&g, &d).unwrap();
    }
}

#[test]
fn bigint_and_i64_agree() {
    for seed in 0..30 {
        let (g, d) = small_instance(seed, 6, 4);
        let big: Divisor<BigInt> = d.convert();
        assert_eq!(rank(&g, &big), rank(&g, &d));
        assert_eq!(q_reduce(&g, &big, 0).convert::<i64>(), q_reduce(&g, &d, 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_has_degree_zero(seed in any::<u64>(), vals in proptest::collection::vec(-9i64..9, 7)) {
        let g = random_multigraph(7, (seed % 5) as usize, seed).unwrap();
        let d = laplacian_apply(&g, &IntFunction::from_vec(vals)).unwrap();
        prop_assert_eq!(d.degree(), 0);
    }

    #[test]
    fn reduction_is_a_class_function(seed in any::<u64>(), vals in proptest::collection::vec(-4i64..4, 6)) {
        let (g, d) = small_instance(seed, 6, 4);
        let n = g.vertex_count();
        let f = IntFunction::from_vec(vals[..n].to_vec());
        let moved = &d + &laplacian_apply(&g, &f).unwrap();
        for q in 0..n {
            let r = q_reduce(&g, &d, q);
            prop_assert_eq!(&q_reduce(&g, &r, q), &r);
            prop_assert_eq!(&q_reduce(&g, &moved, q), &r);
            prop_assert!(Reducer::new(&g, q).is_reduced(&r));
            let diff = &r - &d;
            prop_assert!(Jacobian::<i64>::new(&g).is_principal(&diff).unwrap());
        }
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_multigraph(r.gen_range(2..6), r.gen_range(0..4), seed).unwrap();
        let n = g.vertex_count();
        let a: D = random_divisor(n, 2, 3, &mut r);
        let b: D = random_divisor(n, 2, 3, &mut r);
        let c: D = random_divisor(n, 2, 3, &mut r);
        prop_assert!(is_equivalent(&g, &a, &a));
        prop_assert_eq!(is_equivalent(&g, &a, &b), is_equivalent(&g, &b, &a));
        if is_equivalent(&g, &a, &b) && is_equivalent(&g, &b, &c) {
            prop_assert!(is_equivalent(&g, &a, &c));
        }
        // transitivity through a guaranteed-equivalent middle term
        let f = IntFunction::from_vec((0..n as i64).collect());
        let a2 = &a + &laplacian_apply(&g, &f).unwrap();
        prop_assert!(is_equivalent(&g, &a, &a2));
        prop_assert_eq!(is_equivalent(&g, &a2, &c), is_equivalent(&g, &a, &c));
    }

    #[test]
    fn riemann_roch_holds(seed in any::<u64>()) {
        let (g, d) = small_instance(seed, 7, 4);
        let rep = graphdiv::rank::riemann_roch_check(&g, &d);
        prop_assert!(rep.holds, "{:?}", rep);
    }

    #[test]
    fn rank_monotonicity_and_drop(seed in any::<u64>()) {
        let (g, d) = small_instance(seed, 6, 4);
        let n = g.vertex_count();
        let mut engine = RankEngine::<i64>::new(&g);
        let r = engine.rank(&d);
        let drops: Vec<i64> = (0..n).map(|p| engine.rank(&(&d - &D::point(n, p, 1)))).collect();
        prop_assert!(drops.iter().all(|&x| x >= r - 1));
        if r >= 0 {
            prop_assert!(drops.iter().any(|&x| x == r - 1));
        }
    }

    #[test]
    fn rank_degree_bounds(seed in any::<u64>()) {
        let (g, d) = small_instance(seed, 6, 4);
        let r = rank(&g, &d);
        let deg = d.degree();
        prop_assert!(r <= (-1i64).max(deg));
        let genus = g.genus() as i64;
        if deg > 2 * genus - 2 {
            prop_assert_eq!(r, deg - genus);
            prop_assert_eq!(RankEngine::<i64>::new(&g).without_degree_shortcut().rank(&d), deg - genus);
        }
    }

    #[test]
    fn rank_is_a_class_invariant(seed in any::<u64>(), vals in proptest::collection::vec(-3i64..3, 6)) {
        let (g, d) = small_instance(seed, 6, 4);
        let n = g.vertex_count();
        let moved = &d + &laplacian_apply(&g, &IntFunction::from_vec(vals[..n].to_vec())).unwrap();
        prop_assert_eq!(rank(&g, &d), rank(&g, &moved));
    }

    #[test]
    fn clifford_degree_two(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..7);
        let g = random_multigraph(n, r.gen_range(2..5), seed).unwrap();
        let d: D = random_divisor(n, 2, r.gen_range(0..3), &mut r);
        let k = rank(&g, &d);
        if k >= 1 {
            prop_assert_eq!(k, 1);
        }
    }

    #[test]
    fn canonical_degree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..9);
        let genus = if n == 1 { 0 } else { r.gen_range(0..6) };
        let g = random_multigraph(n, genus, seed).unwrap();
        let k = canonical_divisor::<i64>(&g);
        prop_assert_eq!(k.degree(), 2 * g.genus() as i64 - 2);
    }
}
