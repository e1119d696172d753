use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::random::{random_divisor, random_multigraph, rng};
use crate::divisor::{Divisor, DivisorError};
use crate::graph::{banana, complete, cycle, parse_graph, GraphError, MultiGraph};
use crate::linear_systems::{divisor_of_rank_at_least, gonality_witness, min_degree_grd};
use crate::rank::RankEngine;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Instances evaluated in parallel before their records are written.
const CHUNK: usize = 16;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("bad parameters: {0}")]
    Parameter(String),
    #[error("{path}: line {line}: {message}")]
    Record { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One self-contained experiment outcome; `result` is reproducible from
/// `experiment`, `graph` and `params` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub graph: String,
    pub params: Value,
    pub result: Value,
    pub seed: u64,
    pub engine_version: String,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    /// A conjecture failed on this instance.
    Finding,
    /// A theorem failed on this instance: a bug.
    Violation,
}

impl ExperimentRecord {
    pub fn outcome(&self) -> Outcome {
        serde_json::from_value(self.result["outcome"].clone()).unwrap_or(Outcome::Violation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    BrillNoether,
    Gonality,
    Subdivision,
}

impl SweepKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bn" => Some(SweepKind::BrillNoether),
            "gonality" => Some(SweepKind::Gonality),
            "subdivision" => Some(SweepKind::Subdivision),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::BrillNoether => "bn_existence",
            SweepKind::Gonality => "gonality_bound",
            SweepKind::Subdivision => "subdivision_invariance",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub gmax: usize,
    /// Number of random instances.
    pub seeds: usize,
    /// Instance `i` uses seed `seed + i`.
    pub seed: u64,
    pub max_vertices: usize,
    pub rmax: i64,
    pub kmax: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            gmax: 6,
            seeds: 200,
            seed: 0,
            max_vertices: 7,
            rmax: 2,
            kmax: 3,
        }
    }
}

/// `g - (r + 1)(g - d + r)`.
pub fn brill_noether_number(g: i64, r: i64, d: i64) -> i64 {
    g - (r + 1) * (g - d + r)
}

/// Least `d` with nonnegative Brill-Noether number.
pub fn brill_noether_degree(g: i64, r: i64) -> i64 {
    g + r - g / (r + 1)
}

/// `floor((g + 3) / 2)`.
pub fn gonality_bound(g: i64) -> i64 {
    (g + 3) / 2
}

fn outcome_of(findings: &[Value], violations: &[Value]) -> Value {
    let o = if !violations.is_empty() {
        Outcome::Violation
    } else if !findings.is_empty() {
        Outcome::Finding
    } else {
        Outcome::Ok
    };
    serde_json::to_value(o).expect("serializable")
}

fn subdivided_divisor(d: &Divisor<i64>, map: &[usize], n: usize) -> Divisor<i64> {
    let mut out = Divisor::zero(n);
    for (v, &w) in map.iter().enumerate() {
        out.set(w, *d.get(v));
    }
    out
}

/// For each `r`, look for a rank-`r` divisor of Brill-Noether degree on the
/// graph, then on its subdivisions when the graph has none.
pub fn bn_instance(graph: &MultiGraph, rmax: i64, kmax: usize) -> Result<Value, ExperimentError> {
    let g = graph.genus() as i64;
    let mut rows = Vec::new();
    let (mut findings, mut violations) = (Vec::new(), Vec::new());
    for r in 1..=rmax {
        let d = brill_noether_degree(g, r);
        let on_graph = min_degree_grd::<i64>(graph, r, d).expect("r >= 1");
        let mut row = json!({"r": r, "d": d, "rho": brill_noether_number(g, r, d)});
        match &on_graph {
            Some(w) => {
                row["graph_witness"] = w.divisor.to_json(graph);
                row["graph_degree"] = json!(w.degree);
            }
            None => {
                row["graph_witness"] = Value::Null;
                // a theorem for r = 1 and small genus, a conjecture otherwise
                let msg = json!({"r": r, "d": d, "claim": "graph g^r_d"});
                if r == 1 && g <= 3 {
                    violations.push(msg);
                } else {
                    findings.push(msg);
                }
                let mut metric = Value::Null;
                for k in 2..=kmax {
                    let (sub, _) = graph.subdivide(k)?;
                    if let Some(w) = min_degree_grd::<i64>(&sub, r, d).expect("r >= 1") {
                        metric = json!({"k": k, "degree": w.degree, "divisor": w.divisor.to_json(&sub)});
                        break;
                    }
                }
                if metric.is_null() {
                    violations.push(json!({"r": r, "d": d, "claim": "metric g^r_d", "searched_k": kmax}));
                }
                row["metric_witness"] = metric;
            }
        }
        rows.push(row);
    }
    Ok(json!({
        "genus": g,
        "rows": rows,
        "findings": findings,
        "violations": violations,
        "outcome": outcome_of(&findings, &violations),
    }))
}

/// Gonality against `floor((g + 3) / 2)`.
pub fn gonality_instance(graph: &MultiGraph) -> Result<Value, ExperimentError> {
    let g = graph.genus() as i64;
    let w = gonality_witness::<i64>(graph);
    let bound = gonality_bound(g);
    let (mut findings, mut violations) = (Vec::new(), Vec::new());
    if w.degree > bound {
        let msg = json!({"gonality": w.degree, "bound": bound});
        if g <= 3 {
            violations.push(msg);
        } else {
            findings.push(msg);
        }
    }
    Ok(json!({
        "genus": g,
        "gonality": w.degree,
        "bound": bound,
        "tight": w.degree == bound,
        "witness": w.divisor.to_json(graph),
        "findings": findings,
        "violations": violations,
        "outcome": outcome_of(&findings, &violations),
    }))
}

/// Rank of `d` on `sigma_k(G)` for `k = 2..=kmax` (must match), and the least
/// degree of a rank-`r` divisor on `sigma_k(G)` (conjecturally unchanged).
pub fn subdivision_instance(graph: &MultiGraph, d: &Divisor<i64>, kmax: usize, rmax: i64) -> Result<Value, ExperimentError> {
    let g = graph.genus() as i64;
    let base_rank = RankEngine::<i64>::new(graph).rank(d);
    let min_degrees: Vec<i64> = (1..=rmax)
        .map(|r| {
            min_degree_grd::<i64>(graph, r, g + r)
                .expect("r >= 1")
                .expect("degree g + r always carries rank r")
                .degree
        })
        .collect();
    let (mut findings, mut violations) = (Vec::new(), Vec::new());
    let mut ranks = Vec::new();
    for k in 2..=kmax {
        let (sub, map) = graph.subdivide(k)?;
        let moved = subdivided_divisor(d, &map, sub.vertex_count());
        let rk = RankEngine::<i64>::new(&sub).rank(&moved);
        ranks.push(json!({"k": k, "rank": rk}));
        if rk != base_rank {
            violations.push(json!({"k": k, "rank": rk, "expected": base_rank}));
        }
        for (i, &dg) in min_degrees.iter().enumerate() {
            let r = i as i64 + 1;
            if dg - 1 < r {
                continue;
            }
            if let Some(w) = divisor_of_rank_at_least::<i64>(&sub, r, dg - 1) {
                findings.push(json!({"k": k, "r": r, "graph_min_degree": dg, "witness": w.to_json(&sub)}));
            }
        }
    }
    Ok(json!({
        "genus": g,
        "rank": base_rank,
        "subdivided_ranks": ranks,
        "min_degree_by_r": min_degrees,
        "findings": findings,
        "violations": violations,
        "outcome": outcome_of(&findings, &violations),
    }))
}

fn param_u64(params: &Value, key: &str) -> Result<u64, ExperimentError> {
    params[key]
        .as_u64()
        .ok_or_else(|| ExperimentError::Parameter(format!("missing `{key}`")))
}

/// Recompute a record's result from its experiment, graph and params.
pub fn evaluate(experiment: &str, graph: &MultiGraph, params: &Value) -> Result<Value, ExperimentError> {
    match experiment {
        "bn_existence" => bn_instance(graph, param_u64(params, "rmax")? as i64, param_u64(params, "kmax")? as usize),
        "gonality_bound" | "gonality_family" => gonality_instance(graph),
        "subdivision_invariance" => {
            let d = Divisor::<i64>::from_json(graph, &params["divisor"])?;
            subdivision_instance(graph, &d, param_u64(params, "kmax")? as usize, param_u64(params, "rmax")? as i64)
        }
        other => Err(ExperimentError::UnknownExperiment(other.to_string())),
    }
}

/// The graph and params of instance `index`.
pub fn sample_instance(kind: SweepKind, cfg: &SweepConfig, index: usize) -> Result<(MultiGraph, Value, u64), ExperimentError> {
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut r = rng(seed);
    let gmin = match kind {
        SweepKind::BrillNoether => 1,
        SweepKind::Gonality => 2,
        SweepKind::Subdivision => 0,
    };
    if cfg.gmax < gmin {
        return Err(ExperimentError::Parameter(format!("gmax must be at least {gmin}")));
    }
    if cfg.max_vertices < 2 {
        return Err(ExperimentError::Parameter("need at least 2 vertices".into()));
    }
    let g = r.gen_range(gmin..=cfg.gmax);
    let n = r.gen_range(2..=cfg.max_vertices);
    let graph = random_multigraph(n, g, r.gen())?;
    let params = match kind {
        SweepKind::BrillNoether => json!({"n": n, "g": g, "rmax": cfg.rmax, "kmax": cfg.kmax}),
        SweepKind::Gonality => json!({"n": n, "g": g}),
        SweepKind::Subdivision => {
            let deg = r.gen_range(-1..=(2 * g as i64 + 1));
            let spread = r.gen_range(0..3);
            let d: Divisor<i64> = random_divisor(n, deg, spread, &mut r);
            json!({"n": n, "g": g, "kmax": cfg.kmax, "rmax": cfg.rmax, "divisor": d.to_json(&graph)})
        }
    };
    Ok((graph, params, seed))
}

fn timed_record(experiment: &str, graph: &MultiGraph, params: Value, seed: u64) -> Result<ExperimentRecord, ExperimentError> {
    let start = Instant::now();
    let result = evaluate(experiment, graph, &params)?;
    Ok(ExperimentRecord {
        experiment: experiment.to_string(),
        graph: graph.to_edge_list(),
        params,
        result,
        seed,
        engine_version: ENGINE_VERSION.to_string(),
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

/// Small named graphs probed for gonality equal to the bound.
pub fn tightness_candidates() -> Vec<(String, MultiGraph)> {
    let k33 = MultiGraph::from_edges(&[
        ("a1", "b1"), ("a1", "b2"), ("a1", "b3"),
        ("a2", "b1"), ("a2", "b2"), ("a2", "b3"),
        ("a3", "b1"), ("a3", "b2"), ("a3", "b3"),
    ])
    .expect("valid");
    let mut k5_minus = Vec::new();
    let k5 = complete(5).expect("valid");
    for (i, &(u, v)) in k5.edges().iter().enumerate() {
        if i > 0 {
            k5_minus.push((k5.label(u), k5.label(v)));
        }
    }
    let k5_minus = MultiGraph::from_edges(&k5_minus).expect("valid");
    vec![
        ("cycle:3".into(), cycle(3).expect("valid")),
        ("banana:3".into(), banana(3).expect("valid")),
        ("complete:4".into(), complete(4).expect("valid")),
        ("complete_bipartite:3,3".into(), k33),
        ("complete:5 minus an edge".into(), k5_minus),
        ("complete:5".into(), k5),
    ]
}

/// Evaluate every instance, in parallel chunks, handing each record to
/// `sink` in instance order.
pub fn run_sweep(
    kind: SweepKind,
    cfg: &SweepConfig,
    mut sink: impl FnMut(&ExperimentRecord) -> Result<(), ExperimentError>,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut all = Vec::with_capacity(cfg.seeds);
    let indices: Vec<usize> = (0..cfg.seeds).collect();
    for chunk in indices.chunks(CHUNK) {
        let records: Vec<ExperimentRecord> = chunk
            .par_iter()
            .map(|&i| {
                let (graph, params, seed) = sample_instance(kind, cfg, i)?;
                timed_record(kind.name(), &graph, params, seed)
            })
            .collect::<Result<_, _>>()?;
        for rec in records {
            sink(&rec)?;
            all.push(rec);
        }
    }
    if kind == SweepKind::Gonality {
        for (name, graph) in tightness_candidates() {
            if graph.genus() > cfg.gmax {
                continue;
            }
            let rec = timed_record("gonality_family", &graph, json!({"family": name}), cfg.seed)?;
            sink(&rec)?;
            all.push(rec);
        }
    }
    Ok(all)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub records: usize,
    pub ok: usize,
    pub findings: usize,
    pub violations: usize,
    /// `(genus, largest gonality seen)`; gonality sweeps only.
    pub max_gonality_by_genus: Vec<(i64, i64)>,
    /// Families whose gonality meets the bound.
    pub tight_families: Vec<String>,
}

pub fn summarize(records: &[ExperimentRecord]) -> SweepSummary {
    let mut s = SweepSummary {
        records: records.len(),
        ..Default::default()
    };
    let mut max_gon = std::collections::BTreeMap::new();
    for rec in records {
        match rec.outcome() {
            Outcome::Ok => s.ok += 1,
            Outcome::Finding => s.findings += 1,
            Outcome::Violation => s.violations += 1,
        }
        if let (Some(g), Some(gon)) = (rec.result["genus"].as_i64(), rec.result["gonality"].as_i64()) {
            let e = max_gon.entry(g).or_insert(gon);
            *e = (*e).max(gon);
            if rec.experiment == "gonality_family" && rec.result["tight"] == json!(true) {
                s.tight_families.push(rec.params["family"].as_str().unwrap_or("?").to_string());
            }
        }
    }
    s.max_gonality_by_genus = max_gon.into_iter().collect();
    s
}

/// Appends whole records as single lines; safe to share across threads.
pub struct JsonlWriter {
    file: Mutex<File>,
}

impl JsonlWriter {
    pub fn append_to(path: &Path) -> Result<Self, ExperimentError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(JsonlWriter { file: Mutex::new(file) })
    }

    pub fn write(&self, rec: &ExperimentRecord) -> Result<(), ExperimentError> {
        let mut line = serde_json::to_string(rec).expect("record serializes");
        line.push('\n');
        let mut f = self.file.lock().expect("writer lock");
        f.write_all(line.as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| ExperimentError::Record {
            path: path.display().to_string(),
            line: i + 1,
            message: format!("column {}: {}", e.column(), e),
        })?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayOutcome {
    pub experiment: String,
    pub seed: u64,
    pub reproduced: bool,
    pub recomputed: Value,
}

/// Recompute a record and compare result payloads exactly.
pub fn replay_record(rec: &ExperimentRecord) -> Result<ReplayOutcome, ExperimentError> {
    let graph = parse_graph(&rec.graph)?;
    let recomputed = evaluate(&rec.experiment, &graph, &rec.params)?;
    Ok(ReplayOutcome {
        experiment: rec.experiment.clone(),
        seed: rec.seed,
        reproduced: recomputed == rec.result,
        recomputed,
    })
}
