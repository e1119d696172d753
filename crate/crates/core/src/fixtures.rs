//! Assertion tables for the quartic fixture and the named graph families.

use serde::Serialize;

use crate::divisor::{canonical_divisor, is_equivalent, Divisor};
use crate::graph::{banana, complete};
use crate::jacobian::{jacobian_structure, spanning_tree_count};
use crate::linear_systems::{gonality_witness, weierstrass_points};
use crate::rank::{rank, RankEngine};
use crate::specialization::{check_specialization_lemma, specialize, SpecializationFixture};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixtureCheck {
    pub group: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(group: &str, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> FixtureCheck {
    FixtureCheck {
        group: group.to_string(),
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

pub fn quartic_checks() -> Vec<FixtureCheck> {
    const G: &str = "quartic";
    let fixture = SpecializationFixture::<i64>::quartic();
    let table = &fixture.table;
    let g = table.target();
    let v = |l: &str| g.vertex(l).expect("fixture label");
    let mut out = Vec::new();

    out.push(check(G, "genus", g.genus() == 3, format!("genus {}", g.genus())));

    let gon = gonality_witness::<i64>(g);
    out.push(check(
        G,
        "gonality",
        gon.degree == 3 && rank(g, &gon.divisor) == 1,
        format!("gonality {} via {}", gon.degree, gon.divisor.display(g)),
    ));

    let w: Vec<&str> = weierstrass_points(g).into_iter().map(|x| g.label(x)).collect();
    out.push(check(G, "weierstrass set", w == ["Q1", "Q2"], format!("{w:?}")));

    let k = canonical_divisor::<i64>(g);
    let rk = rank(g, &k);
    out.push(check(G, "canonical rank", rk == 2, format!("r(K) = {rk}")));

    let target = Divisor::<i64>::from_labeled(g, &[("P", 2), ("Q1", 1), ("Q2", 1)]).expect("labels");
    out.push(check(G, "K equals 2(P)+(Q1)+(Q2)", k == target, k.display(g)));
    for name in ["K1", "K2", "K3", "K4"] {
        let d = fixture.divisor(name).expect("fixture divisor");
        match specialize(table, d) {
            Ok(rho) => out.push(check(
                G,
                format!("rho({name}) ~ K"),
                is_equivalent(g, &rho, &target),
                rho.display(g),
            )),
            Err(e) => out.push(check(G, format!("rho({name}) ~ K"), false, e.to_string())),
        }
    }
    for d in &fixture.divisors {
        match check_specialization_lemma(table, d) {
            Ok(rep) => out.push(check(
                G,
                format!("r_G(rho({})) >= stated", d.name),
                rep.holds,
                format!("{} >= {}", rep.graph_rank, rep.stated_curve_rank),
            )),
            Err(e) => out.push(check(G, format!("r_G(rho({})) >= stated", d.name), false, e.to_string())),
        }
    }

    let three_q1 = Divisor::<i64>::point(4, v("Q1"), 3);
    let three_q2 = Divisor::<i64>::point(4, v("Q2"), 3);
    let two_p_p = Divisor::<i64>::from_labeled(g, &[("P", 2), ("P'", 1)]).expect("labels");
    let r3 = RankEngine::<i64>::new(g).rank(&three_q1);
    out.push(check(G, "r(3(Q1)) >= 1", r3 >= 1, format!("r = {r3}")));
    out.push(check(
        G,
        "3(Q1) ~ 3(Q2) ~ 2(P)+(P')",
        is_equivalent(g, &three_q1, &three_q2) && is_equivalent(g, &three_q1, &two_p_p),
        "",
    ));

    let jac = jacobian_structure::<i64>(g);
    let trees = spanning_tree_count::<i64>(g);
    out.push(check(
        G,
        "|Jac| = spanning trees",
        jac.order == trees,
        format!("{:?}, {} trees", jac.invariant_factors(), trees),
    ));
    out
}

pub fn family_checks() -> Vec<FixtureCheck> {
    let mut out = Vec::new();
    for n in 3..=6 {
        let k = complete(n).expect("n >= 1");
        let gon = gonality_witness::<i64>(&k).degree;
        out.push(check(
            "complete",
            format!("gonality(K{n}) = {}", n - 1),
            gon == n as i64 - 1,
            format!("{gon}"),
        ));
    }
    for n in 4..=6 {
        let k = complete(n).expect("n >= 1");
        let w = weierstrass_points(&k);
        out.push(check(
            "complete",
            format!("every vertex of K{n} is Weierstrass"),
            w.len() == n,
            format!("{} of {n}", w.len()),
        ));
    }
    for n in 3..=8 {
        let b = banana(n).expect("n >= 1");
        let r = rank(&b, &Divisor::<i64>::from_i64s(&[1, 1]));
        out.push(check("banana", format!("r((Q1)+(Q2)) = 1 on B{n}"), r == 1, format!("{r}")));
        let w = weierstrass_points(&b);
        out.push(check(
            "banana",
            format!("no Weierstrass vertices on B{n}"),
            w.is_empty(),
            format!("{w:?}"),
        ));
    }
    out
}

/// Quartic checks followed by family checks.
pub fn fixture_suite() -> Vec<FixtureCheck> {
    let mut out = quartic_checks();
    out.extend(family_checks());
    out
}
