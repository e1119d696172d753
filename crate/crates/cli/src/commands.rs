use std::path::Path;

use graphdiv::experiments::{
    read_records, replay_record, run_sweep, summarize, JsonlWriter, SweepConfig, SweepKind,
};
use graphdiv::fixtures::fixture_suite;
use graphdiv::jacobian::{jacobian_structure, spanning_tree_count};
use graphdiv::linear_systems::{gap_sequence, gonality_witness, is_hyperelliptic, is_residual_tree_vertex, min_degree_grd, weierstrass_points};
use graphdiv::metric::{metric_rr_check, norine_scan, q_rank_with, semicontinuity_probe, ProbeOptions, QRankOptions};
use graphdiv::rank::{rank_with_certificate, riemann_roch_check, RankEngine};
use graphdiv::scalar::parse_ratio;
use graphdiv::specialization::{check_specialization_lemma, specialize, SpecializationFixture};
use graphdiv::{Int, MultiGraph};
use serde_json::{json, Value};

use crate::input::{is_json_array, load_divisor, load_graph, load_qdivisor, load_qgraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Finding,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Finding => "finding",
            Status::Error => "error",
        }
    }
}

/// What a command produced: machine payload plus a human rendering.
pub struct Output {
    pub status: Status,
    pub payload: Value,
    pub human: String,
    pub diagnostics: Vec<String>,
}

impl Output {
    fn ok(payload: Value, human: String) -> Self {
        Output {
            status: Status::Ok,
            payload,
            human,
            diagnostics: Vec::new(),
        }
    }

    fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    fn with_diagnostics(mut self, d: Vec<String>) -> Self {
        self.diagnostics.extend(d);
        self
    }
}

pub type CmdResult = Result<Output, String>;

fn big(n: &Int) -> Value {
    serde_json::from_str(&n.to_string()).expect("integers are valid JSON numbers")
}

fn labels(graph: &MultiGraph, vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| graph.label(v).to_string()).collect()
}

pub fn rank(graph: &str, divisor: &str, certificate: bool) -> CmdResult {
    let g = load_graph(graph)?;
    let d = load_divisor(&g, divisor)?;
    if !certificate {
        let r = RankEngine::<Int>::new(&g).rank(&d);
        return Ok(Output::ok(json!({"rank": r}), format!("rank {r}")));
    }
    let res = rank_with_certificate(&g, &d).map_err(|e| e.to_string())?;
    res.verify(&g, &d).map_err(|e| format!("certificate failed to verify: {e}"))?;
    let order = res.emptiness_ordering.labels(&g);
    let mut payload = json!({
        "rank": res.rank,
        "failingEffective": res.failing_effective.to_json(&g),
        "nuOrdering": order,
    });
    let mut human = format!("rank {}\n", res.rank);
    if let Some(w) = &res.representative {
        payload["witness"] = w.to_json(&g);
        human.push_str(&format!("effective representative: {}\n", w.display(&g)));
    }
    human.push_str(&format!(
        "|D - E| is empty for E = {}; certified by ordering {}",
        res.failing_effective.display(&g),
        order.join(" ")
    ));
    Ok(Output::ok(payload, human))
}

pub fn gonality(graph: &str) -> CmdResult {
    let g = load_graph(graph)?;
    let w = gonality_witness::<Int>(&g);
    let hyper = is_hyperelliptic(&g);
    Ok(Output::ok(
        json!({"gonality": w.degree, "genus": g.genus(), "witness": w.divisor.to_json(&g), "hyperelliptic": hyper}),
        format!(
            "gonality {} (genus {}), witness {}{}",
            w.degree,
            g.genus(),
            w.divisor.display(&g),
            if hyper { ", hyperelliptic" } else { "" }
        ),
    ))
}

pub fn grd(graph: &str, r: i64, dmax: i64) -> CmdResult {
    let g = load_graph(graph)?;
    let found = min_degree_grd::<Int>(&g, r, dmax).map_err(|e| e.to_string())?;
    Ok(match found {
        Some(w) => Output::ok(
            json!({"r": r, "dmax": dmax, "found": true, "degree": w.degree, "witness": w.divisor.to_json(&g)}),
            format!("least degree of a rank-{r} divisor: {} via {}", w.degree, w.divisor.display(&g)),
        ),
        None => Output::ok(
            json!({"r": r, "dmax": dmax, "found": false}),
            format!("no divisor of rank {r} and degree <= {dmax}"),
        ),
    })
}

pub fn weierstrass(graph: &str) -> CmdResult {
    let g = load_graph(graph)?;
    let w = weierstrass_points(&g);
    let residual: Vec<usize> = if g.genus() >= 2 {
        (0..g.vertex_count())
            .filter(|&v| is_residual_tree_vertex(&g, v).unwrap_or(false))
            .collect()
    } else {
        Vec::new()
    };
    let names = labels(&g, &w);
    Ok(Output::ok(
        json!({"genus": g.genus(), "weierstrass": names, "residualTree": labels(&g, &residual)}),
        format!("Weierstrass vertices: {}", if names.is_empty() { "none".into() } else { names.join(" ") }),
    ))
}

pub fn gaps(graph: &str, vertex: &str) -> CmdResult {
    let g = load_graph(graph)?;
    let v = g.require_vertex(vertex).map_err(|e| e.to_string())?;
    let gaps = gap_sequence(&g, v).map_err(|e| e.to_string())?;
    let list: Vec<String> = gaps.iter().map(|k| k.to_string()).collect();
    Ok(Output::ok(
        json!({"vertex": vertex, "genus": g.genus(), "gaps": gaps}),
        format!("gaps at {vertex}: {}", list.join(" ")),
    ))
}

pub fn jacobian(graph: &str) -> CmdResult {
    let g = load_graph(graph)?;
    let s = jacobian_structure::<Int>(&g);
    let trees = spanning_tree_count::<Int>(&g);
    let factors: Vec<Value> = s.invariant_factors().iter().map(big).collect();
    let shown: Vec<String> = s.invariant_factors().iter().map(|f| format!("Z/{f}")).collect();
    let out = Output::ok(
        json!({"invariantFactors": factors, "order": big(&s.order), "spanningTrees": big(&trees)}),
        format!(
            "Jac = {}, order {}, spanning trees {}",
            if shown.is_empty() { "0".into() } else { shown.join(" x ") },
            s.order,
            trees
        ),
    );
    if s.order != trees {
        return Ok(out.with_status(Status::Error).with_diagnostics(vec!["group order differs from spanning-tree count".into()]));
    }
    Ok(out)
}

pub fn qrank(graph: &str, divisor: &str, audit: bool) -> CmdResult {
    let (g, warnings) = load_qgraph(graph)?;
    let d = load_qdivisor(&g, divisor)?;
    let rep = q_rank_with(&g, &d, QRankOptions { audit, degree_shortcut: true }).map_err(|e| e.to_string())?;
    Ok(Output::ok(
        json!({"rank": rep.rank, "scale": rep.scale, "modelVertices": rep.model_vertices, "auditedScale": rep.audited_scale}),
        format!("rank {} (unit model at scale {}, {} vertices)", rep.rank, rep.scale, rep.model_vertices),
    )
    .with_diagnostics(warnings))
}

pub fn norine(n: usize, den: i64) -> CmdResult {
    let scan = norine_scan(n, den).map_err(|e| e.to_string())?;
    let failures: Vec<&str> = scan
        .iter()
        .filter(|p| p.in_claimed_interval && p.rank < 1)
        .map(|p| p.offset.as_str())
        .collect();
    let outside: Vec<&str> = scan
        .iter()
        .filter(|p| !p.in_claimed_interval && p.rank >= 1)
        .map(|p| p.offset.as_str())
        .collect();
    let mut human = String::from("offset  r(3P)\n");
    for p in &scan {
        human.push_str(&format!("{:>6}  {}{}\n", p.offset, p.rank, if p.in_claimed_interval { "  *" } else { "" }));
    }
    human.push_str("* offsets in [1/3, 2/3]");
    let out = Output::ok(
        json!({"n": n, "den": den, "points": scan, "outsideIntervalPositive": outside}),
        human,
    );
    if failures.is_empty() {
        Ok(out)
    } else {
        Ok(out
            .with_status(Status::Error)
            .with_diagnostics(vec![format!("rank 0 inside [1/3, 2/3] at {}", failures.join(", "))]))
    }
}

pub fn semicontinuity(graph: &str, divisor: &str, eps: &str, samples: usize, seed: Option<u64>, max_den: i64) -> CmdResult {
    let seed = seed.ok_or("semicontinuity needs an explicit --seed")?;
    let eps = parse_ratio::<i64>(eps).ok_or_else(|| format!("--eps `{eps}` is not a rational like 1/4"))?;
    let (g, warnings) = load_qgraph(graph)?;
    let d = load_qdivisor(&g, divisor)?;
    let opts = ProbeOptions {
        max_denominator: max_den,
        ..ProbeOptions::default()
    };
    let rep = semicontinuity_probe(&g, &d, eps, samples, seed, opts).map_err(|e| e.to_string())?;
    let status = if rep.violations > 0 { Status::Finding } else { Status::Ok };
    let human = format!(
        "base rank {}, {} probes, {} violations",
        rep.base_rank,
        rep.probes.len(),
        rep.violations
    );
    Ok(Output::ok(serde_json::to_value(&rep).expect("serializable"), human)
        .with_status(status)
        .with_diagnostics(warnings))
}

pub fn rrcheck(graph: &str, divisor: &str) -> CmdResult {
    let (payload, holds, human) = if is_json_array(divisor)? {
        let (g, _) = load_qgraph(graph)?;
        let d = load_qdivisor(&g, divisor)?;
        let rep = metric_rr_check(&g, &d).map_err(|e| e.to_string())?;
        let human = format!(
            "r(D) - r(K - D) = {} - {}, deg(D) + 1 - g = {} + 1 - {}: {}",
            rep.rank, rep.residual_rank, rep.degree, rep.genus, if rep.holds { "holds" } else { "FAILS" }
        );
        (serde_json::to_value(&rep).expect("serializable"), rep.holds, human)
    } else {
        let g = load_graph(graph)?;
        let d = load_divisor(&g, divisor)?;
        let rep = riemann_roch_check(&g, &d);
        let human = format!(
            "r(D) - r(K - D) = {} - {} = {}, deg(D) + 1 - g = {}: {}",
            rep.rank, rep.residual_rank, rep.lhs, rep.rhs, if rep.holds { "holds" } else { "FAILS" }
        );
        (serde_json::to_value(&rep).expect("serializable"), rep.holds, human)
    };
    let out = Output::ok(payload, human);
    Ok(if holds { out } else { out.with_status(Status::Error) })
}

pub fn specialize_cmd(fixture: &str, only: Option<&str>) -> CmdResult {
    let fx = if fixture == "quartic" {
        SpecializationFixture::<Int>::quartic()
    } else {
        let text = std::fs::read_to_string(fixture).map_err(|e| format!("reading {fixture}: {e}"))?;
        SpecializationFixture::<Int>::parse(&text).map_err(|e| format!("{fixture}: {e}"))?
    };
    let g = fx.table.target();
    let chosen: Vec<_> = fx.divisors.iter().filter(|d| only.is_none_or(|n| n == d.name)).collect();
    if chosen.is_empty() {
        return Err(format!("fixture has no divisor named `{}`", only.unwrap_or("")));
    }
    let mut rows = Vec::new();
    let mut human = Vec::new();
    let mut all_hold = true;
    for d in chosen {
        let rho = specialize(&fx.table, d).map_err(|e| e.to_string())?;
        let mut row = json!({"name": d.name, "specialized": rho.to_json(g), "display": rho.display(g)});
        let mut line = format!("{}: rho = {}", d.name, rho.display(g));
        if d.stated_rank.is_some() {
            let rep = check_specialization_lemma(&fx.table, d).map_err(|e| e.to_string())?;
            all_hold &= rep.holds;
            row["graphRank"] = json!(rep.graph_rank);
            row["statedCurveRank"] = json!(rep.stated_curve_rank);
            row["holds"] = json!(rep.holds);
            line.push_str(&format!(
                ", r_G = {} {} stated {}",
                rep.graph_rank,
                if rep.holds { ">=" } else { "<" },
                rep.stated_curve_rank
            ));
        }
        rows.push(row);
        human.push(line);
    }
    let out = Output::ok(json!({"provenance": fx.provenance, "divisors": rows}), human.join("\n"));
    Ok(if all_hold { out } else { out.with_status(Status::Error) })
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    kind: &str,
    gmax: usize,
    seeds: usize,
    out: &Path,
    seed: Option<u64>,
    rmax: i64,
    kmax: usize,
    max_vertices: usize,
) -> CmdResult {
    let seed = seed.ok_or("sweep needs an explicit --seed")?;
    let kind = SweepKind::parse(kind).ok_or_else(|| format!("unknown sweep `{kind}` (expected bn, gonality or subdivision)"))?;
    if kmax < 2 {
        return Err("--kmax must be at least 2".into());
    }
    let cfg = SweepConfig {
        gmax,
        seeds,
        seed,
        max_vertices,
        rmax,
        kmax,
    };
    let writer = JsonlWriter::append_to(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let records = run_sweep(kind, &cfg, |rec| writer.write(rec)).map_err(|e| e.to_string())?;
    let s = summarize(&records);
    let status = if s.violations > 0 {
        Status::Error
    } else if s.findings > 0 {
        Status::Finding
    } else {
        Status::Ok
    };
    let mut human = format!(
        "{}: {} records, {} ok, {} findings, {} theorem violations -> {}",
        kind.name(),
        s.records,
        s.ok,
        s.findings,
        s.violations,
        out.display()
    );
    if !s.max_gonality_by_genus.is_empty() {
        let per: Vec<String> = s.max_gonality_by_genus.iter().map(|(g, m)| format!("g{g}:{m}")).collect();
        human.push_str(&format!("\nmax gonality by genus: {}", per.join(" ")));
        human.push_str(&format!("\nfamilies meeting the bound: {}", s.tight_families.join(", ")));
    }
    Ok(Output::ok(
        json!({"experiment": kind.name(), "summary": s, "out": out.display().to_string()}),
        human,
    )
    .with_status(status))
}

pub fn replay(file: &Path) -> CmdResult {
    let records = read_records(file).map_err(|e| e.to_string())?;
    let mut mismatches = Vec::new();
    for (i, rec) in records.iter().enumerate() {
        let out = replay_record(rec).map_err(|e| format!("record {}: {e}", i + 1))?;
        if !out.reproduced {
            mismatches.push(json!({"record": i + 1, "experiment": rec.experiment, "seed": rec.seed}));
        }
    }
    let human = format!("{} records, {} reproduced", records.len(), records.len() - mismatches.len());
    let ok = mismatches.is_empty();
    let out = Output::ok(
        json!({"records": records.len(), "reproduced": records.len() - mismatches.len(), "mismatches": mismatches}),
        human,
    );
    Ok(if ok { out } else { out.with_status(Status::Error) })
}

pub fn fixtures() -> CmdResult {
    let checks = fixture_suite();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut human = String::new();
    for c in &checks {
        human.push_str(&format!(
            "{:<8} {:<width$}  {}  {}\n",
            c.group,
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.detail
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    human.push_str(&format!("{} checks, {} failed", checks.len(), failed));
    let out = Output::ok(json!({"checks": checks, "failed": failed}), human);
    Ok(if failed == 0 { out } else { out.with_status(Status::Error) })
}
