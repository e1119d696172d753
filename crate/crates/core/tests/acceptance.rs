//! Acceptance gate: every criterion runs at its stated tolerance and time
//! limit and prints one PASS/FAIL line. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use graphdiv::divisor::{is_equivalent, Divisor};
use graphdiv::experiments::{random_divisor, random_multigraph, rng, run_sweep, summarize, SweepConfig, SweepKind};
use graphdiv::fixtures::{family_checks, quartic_checks};
use graphdiv::graph::{banana, quartic_dual_graph, MultiGraph};
use graphdiv::jacobian::{jacobian_structure, spanning_tree_count, Jacobian};
use graphdiv::linear_systems::gap_sequence;
use graphdiv::metric::{
    divisor_of_function, norine_function, norine_scan, q_rank, semicontinuity_probe, ProbeOptions, QDivisor, QGraph,
    QPoint,
};
use graphdiv::rank::{riemann_roch_check, RankEngine};
use num_rational::Ratio;
use rand::Rng;

type D = Divisor<i64>;
type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn quartic_fixture() -> Outcome {
    let checks = quartic_checks();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    ensure(failed.is_empty(), || format!("failed checks: {failed:?}"))?;
    // the same claims again, straight from the engines
    let g = quartic_dual_graph();
    let v = |l: &str| g.vertex(l).unwrap();
    let k = D::from_labeled(&g, &[("P", 2), ("Q1", 1), ("Q2", 1)]).unwrap();
    ensure(RankEngine::<i64>::new(&g).rank(&k) == 2, || "r(K) != 2".into())?;
    ensure(graphdiv::linear_systems::gonality(&g) == 3, || "gonality != 3".into())?;
    let w = graphdiv::linear_systems::weierstrass_points(&g);
    ensure(w == vec![v("Q1"), v("Q2")], || format!("Weierstrass set {w:?}"))?;
    for rho in [
        vec![("P'", 1), ("Q1", 3)],
        vec![("P'", 1), ("Q2", 3)],
        vec![("P'", 2), ("P", 2)],
        vec![("Q1", 1), ("Q2", 1), ("P", 2)],
    ] {
        let d = D::from_labeled(&g, &rho).unwrap();
        ensure(is_equivalent(&g, &d, &k), || format!("{} not ~ K", d.display(&g)))?;
    }
    ensure(RankEngine::<i64>::new(&g).rank(&D::point(4, v("Q1"), 3)) >= 1, || "r(3(Q1)) < 1".into())?;
    Ok(format!("{} fixture checks", checks.len()))
}

fn families() -> Outcome {
    let checks = family_checks();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    ensure(failed.is_empty(), || format!("failed checks: {failed:?}"))?;
    Ok(format!("{} family checks", checks.len()))
}

fn riemann_roch() -> Outcome {
    let mut degrees = (i64::MAX, i64::MIN);
    for seed in 0..500u64 {
        let mut r = rng(0x5252_0000 + seed);
        let n = r.gen_range(1..=7);
        let genus = if n == 1 { 0 } else { r.gen_range(0..=5) };
        let g = random_multigraph(n, genus, r.gen()).unwrap();
        let deg = r.gen_range(-2..=(2 * genus as i64 + 2));
        let d: D = random_divisor(n, deg, r.gen_range(0..3), &mut r);
        let rep = riemann_roch_check(&g, &d);
        ensure(rep.holds, || format!("seed {seed}: {rep:?} on {}", g.to_edge_list()))?;
        degrees = (degrees.0.min(deg), degrees.1.max(deg));
    }
    Ok(format!("500 instances, degrees {}..={}, 0 violations", degrees.0, degrees.1))
}

fn subdivision_theorem() -> Outcome {
    let mut checked = 0;
    for seed in 0..50u64 {
        let mut r = rng(0x5355_0000 + seed);
        let n = r.gen_range(2..=6);
        let genus = r.gen_range(0..=5);
        let g = random_multigraph(n, genus, r.gen()).unwrap();
        let deg = r.gen_range(-1..=(2 * genus as i64 + 1));
        let d: D = random_divisor(n, deg, r.gen_range(0..3), &mut r);
        let base = RankEngine::<i64>::new(&g).rank(&d);
        for k in [2, 3] {
            let (sub, map) = g.subdivide(k).unwrap();
            let mut moved = D::zero(sub.vertex_count());
            for (v, &w) in map.iter().enumerate() {
                moved.set(w, *d.get(v));
            }
            let rk = RankEngine::<i64>::new(&sub).rank(&moved);
            ensure(rk == base, || format!("seed {seed}, k = {k}: {rk} != {base}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (G, D, k) comparisons, 0 violations"))
}

/// Every connected loopless multigraph on `n` labeled vertices with at most
/// `max_edges` edges.
fn small_multigraphs(n: usize, max_edges: usize) -> Vec<MultiGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    let mut mult = vec![0usize; pairs.len()];
    fn go(i: usize, left: usize, pairs: &[(usize, usize)], mult: &mut Vec<usize>, n: usize, out: &mut Vec<MultiGraph>) {
        if i == pairs.len() {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .zip(mult.iter())
                .flat_map(|(&p, &m)| std::iter::repeat_n(p, m))
                .collect();
            let labels = (0..n).map(|v| format!("x{v}")).collect();
            if let Ok(g) = MultiGraph::from_indexed(labels, edges) {
                out.push(g);
            }
            return;
        }
        for m in 0..=left {
            mult[i] = m;
            go(i + 1, left - m, pairs, mult, n, out);
        }
        mult[i] = 0;
    }
    go(0, max_edges, &pairs, &mut mult, n, &mut out);
    out
}

/// Spanning trees counted by checking every `(n - 1)`-subset of edges.
fn brute_force_spanning_trees(g: &MultiGraph) -> i64 {
    let n = g.vertex_count();
    let edges = g.edges();
    let want = n - 1;
    let mut count = 0;
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize != want {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut acyclic = true;
        for (i, &(u, v)) in edges.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                if a == b {
                    acyclic = false;
                    break;
                }
                parent[a] = b;
            }
        }
        count += acyclic as i64;
    }
    count
}

fn jacobian_kirchhoff() -> Outcome {
    let mut graphs = 0;
    let mut divisors = 0;
    for n in 1..=4 {
        for g in small_multigraphs(n, 6) {
            let structure = jacobian_structure::<i64>(&g);
            let det = spanning_tree_count::<i64>(&g);
            let brute = brute_force_spanning_trees(&g);
            ensure(structure.order == det && det == brute, || {
                format!("{}: SNF {} det {det} brute {brute}", g.to_edge_list(), structure.order)
            })?;
            // reduced-divisor equivalence against class coordinates
            let jac = Jacobian::<i64>::new(&g);
            let zero = D::zero(n);
            for code in 0..5usize.pow(n as u32) {
                let mut x = code;
                let c: Vec<i64> = (0..n)
                    .map(|_| {
                        let v = (x % 5) as i64 - 2;
                        x /= 5;
                        v
                    })
                    .collect();
                if c.iter().sum::<i64>() != 0 {
                    continue;
                }
                let d = D::from_vec(c);
                ensure(is_equivalent(&g, &d, &zero) == jac.is_principal(&d).unwrap(), || {
                    format!("{}: {d:?}", g.to_edge_list())
                })?;
                divisors += 1;
            }
            graphs += 1;
        }
    }
    for seed in 0..100u64 {
        let mut r = rng(0x4a41_0000 + seed);
        let n = r.gen_range(5..=9);
        let g = random_multigraph(n, r.gen_range(0..=6), r.gen()).unwrap();
        let structure = jacobian_structure::<i64>(&g);
        let det = spanning_tree_count::<i64>(&g);
        ensure(structure.order == det, || format!("seed {seed}: {} != {det}", structure.order))?;
    }
    Ok(format!("{graphs} small graphs exhaustive, {divisors} divisor classes, 100 random"))
}

fn gap_lemma() -> Outcome {
    let mut vertices = 0;
    for seed in 0..100u64 {
        let mut r = rng(0x4741_0000 + seed);
        let genus = r.gen_range(1..=5);
        let n = r.gen_range(2..=7);
        let g = random_multigraph(n, genus, r.gen()).unwrap();
        for v in 0..n {
            let gaps = gap_sequence(&g, v).unwrap();
            ensure(gaps.len() == genus, || format!("seed {seed}, vertex {v}: gaps {gaps:?}, genus {genus}"))?;
            vertices += 1;
        }
    }
    Ok(format!("{vertices} vertices on 100 graphs"))
}

fn norine() -> Outcome {
    let scan = norine_scan(4, 12).map_err(|e| e.to_string())?;
    for p in &scan {
        if p.in_claimed_interval {
            ensure(p.rank >= 1, || format!("rank {} at offset {}", p.rank, p.offset))?;
        }
    }
    let gamma = QGraph::<i64>::unit(banana(4).unwrap());
    let q1 = q_rank(&gamma, &QDivisor::single(QPoint::Vertex(0), 3)).map_err(|e| e.to_string())?;
    ensure(q1 == 0, || format!("q_rank(3(Q1)) = {q1}"))?;
    // independent route: explicit functions with (f) >= -3(P) + (Q)
    let mut certified = 0;
    for j in 4..=8 {
        let x = Ratio::new(j, 12);
        let p = gamma.point(0, x).unwrap();
        for edge in 0..4 {
            for k in 0..=12 {
                let q = gamma.point(edge, Ratio::new(k, 12)).unwrap();
                let f = norine_function(4, 0, &x, &q).ok_or_else(|| format!("no function for P = {x}"))?;
                let div = divisor_of_function(&gamma, &f).map_err(|e| e.to_string())?;
                let target = QDivisor::single(p.clone(), -3).plus(&QDivisor::single(q.clone(), 1));
                ensure(div.dominates(&target), || format!("P = {x}, Q = {q:?}: (f) = {div:?}"))?;
                certified += 1;
            }
        }
    }
    let ranks: Vec<String> = scan.iter().map(|p| format!("{}:{}", p.offset, p.rank)).collect();
    Ok(format!("ranks [{}]; {certified} explicit functions verified", ranks.join(" ")))
}

fn bn_audit() -> Outcome {
    let cfg = SweepConfig {
        gmax: 6,
        seeds: 100,
        seed: 0x4241_0000,
        ..SweepConfig::default()
    };
    let records = run_sweep(SweepKind::BrillNoether, &cfg, |_| Ok(())).map_err(|e| e.to_string())?;
    let s = summarize(&records);
    let metric_only = records
        .iter()
        .filter(|r| r.result["rows"].as_array().is_some_and(|rows| rows.iter().any(|x| x["graph_witness"].is_null())))
        .count();
    ensure(s.violations == 0, || format!("{s:?}"))?;
    Ok(format!(
        "100 graphs x r <= 2: 0 failures ({metric_only} needed a subdivision)"
    ))
}

fn conjecture_audits() -> Outcome {
    let cfg = SweepConfig {
        gmax: 6,
        seeds: 200,
        seed: 0x4341_0000,
        ..SweepConfig::default()
    };
    let mut parts = Vec::new();
    for kind in [SweepKind::BrillNoether, SweepKind::Gonality, SweepKind::Subdivision] {
        let records = run_sweep(kind, &cfg, |_| Ok(())).map_err(|e| e.to_string())?;
        let s = summarize(&records);
        ensure(s.violations == 0, || format!("{}: {s:?}", kind.name()))?;
        if s.findings > 0 {
            eprintln!("{}: {} conjecture findings", kind.name(), s.findings);
        }
        parts.push(format!("{} {} records, {} findings", kind.name(), s.records, s.findings));
    }
    Ok(parts.join("; "))
}

fn semicontinuity() -> Outcome {
    let r = |a, b| Ratio::new(a, b);
    let mut instances = Vec::new();
    let b4 = QGraph::<i64>::unit(banana(4).unwrap());
    instances.push((b4.clone(), QDivisor::single(b4.point(0, r(1, 2)).unwrap(), 3)));
    let quartic = QGraph::<i64>::unit(quartic_dual_graph());
    let k = quartic.canonical_divisor();
    instances.push((quartic, k));
    let b3 = QGraph::new(banana(3).unwrap(), vec![r(1, 1), r(1, 2), r(3, 2)]).unwrap();
    let d3 = QDivisor::single(QPoint::Vertex(0), 1).plus(&QDivisor::single(b3.point(2, r(1, 4)).unwrap(), 1));
    instances.push((b3, d3));
    let k4 = QGraph::<i64>::unit(graphdiv::graph::complete(4).unwrap());
    instances.push((k4, QDivisor::single(QPoint::Vertex(0), 3)));
    let mut probes = 0;
    let mut summary = Vec::new();
    for (i, (g, d)) in instances.iter().enumerate() {
        let rep = semicontinuity_probe(g, d, r(1, 4), 50, 0x5345_0000 + i as u64 * 1000, ProbeOptions::default())
            .map_err(|e| e.to_string())?;
        ensure(rep.violations == 0, || format!("instance {i}: {:?}", rep.probes.iter().find(|p| p.violation)))?;
        probes += rep.probes.len();
        summary.push(format!("r={}", rep.base_rank));
    }
    Ok(format!("{probes} probes over {} instances ({}), 0 violations", instances.len(), summary.join(", ")))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("quartic fixture", Duration::from_secs(5), quartic_fixture),
        ("graph families", Duration::from_secs(10), families),
        ("Riemann-Roch identity", Duration::from_secs(120), riemann_roch),
        ("subdivision invariance of rank", Duration::from_secs(300), subdivision_theorem),
        ("Jacobian order and equivalence oracle", Duration::from_secs(60), jacobian_kirchhoff),
        ("gap count equals genus", Duration::from_secs(600), gap_lemma),
        ("Norine scan on metric banana(4)", Duration::from_secs(60), norine),
        ("Brill-Noether existence on unit Q-graphs", Duration::from_secs(900), bn_audit),
        ("conjecture sweeps", Duration::from_secs(3600), conjecture_audits),
        ("semicontinuity probes", Duration::from_secs(300), semicontinuity),
    ];
    let mut failures = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded {:?}", limit)),
            Err(e) => (false, e),
        };
        failures += !ok as usize;
        println!(
            "criterion {:>2} {}: {} in {:.2}s: {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            detail
        );
    }
    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
