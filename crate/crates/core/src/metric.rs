//! Metric graphs with rational edge lengths.
//!
//! A Q-graph is a model multigraph plus a positive rational length per edge.
//! Divisors live on rational points. Ranks are computed on the unit model:
//! scale every length by the lcm `L` of the relevant denominators and
//! subdivide into unit edges, so that every support point becomes a vertex.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::divisor::{scalar_from_json, scalar_to_json, Divisor};
use crate::experiments::rng;
use crate::graph::{tokenize, GraphError, MultiGraph};
use crate::rank::RankEngine;
use crate::scalar::{format_ratio, parse_ratio, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge {edge} has non-positive length")]
    NonPositiveLength { edge: usize },
    #[error("expected {expected} edge lengths, found {found}")]
    LengthCount { expected: usize, found: usize },
    #[error("no edge with index {0}")]
    NoSuchEdge(usize),
    #[error("offset {offset} lies outside edge {edge}")]
    OffsetOutOfRange { edge: usize, offset: String },
    #[error("point is not representable as a rational point: {0}")]
    UnrepresentablePoint(String),
    #[error("edge {edge}: slope {slope} on segment {segment} is not an integer")]
    NonIntegerSlope { edge: usize, segment: usize, slope: String },
    #[error("function is discontinuous at vertex `{0}`")]
    Discontinuity(String),
    #[error("edge {edge}: breakpoints must start at 0, end at the edge length and increase strictly")]
    InvalidBreakpoints { edge: usize },
    #[error("rank changed under subdivision: {base} at scale {scale}, {refined} at scale {refined_scale}")]
    SubdivisionAuditFailed {
        base: i64,
        refined: i64,
        scale: String,
        refined_scale: String,
    },
    #[error("invalid Q-divisor JSON: {0}")]
    Json(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// A metric graph given by a model with rational edge lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QGraph<T: Clone + Integer> {
    model: MultiGraph,
    lengths: Vec<Ratio<T>>,
}

/// A rational point: either a model vertex or an interior point of an edge at
/// `offset` from the edge's first endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QPoint<T: Clone + Integer> {
    Vertex(usize),
    Interior { edge: usize, offset: Ratio<T> },
}

impl<T: Scalar> QGraph<T> {
    pub fn new(model: MultiGraph, lengths: Vec<Ratio<T>>) -> Result<Self, MetricError> {
        if lengths.len() != model.edge_count() {
            return Err(MetricError::LengthCount {
                expected: model.edge_count(),
                found: lengths.len(),
            });
        }
        if let Some(edge) = lengths.iter().position(|l| !l.is_positive()) {
            return Err(MetricError::NonPositiveLength { edge });
        }
        Ok(QGraph { model, lengths })
    }

    /// Every edge of length one.
    pub fn unit(model: MultiGraph) -> Self {
        let lengths = vec![Ratio::from_integer(T::one()); model.edge_count()];
        QGraph { model, lengths }
    }

    pub fn model(&self) -> &MultiGraph {
        &self.model
    }

    pub fn lengths(&self) -> &[Ratio<T>] {
        &self.lengths
    }

    pub fn genus(&self) -> usize {
        self.model.genus()
    }

    pub fn min_length(&self) -> Option<&Ratio<T>> {
        self.lengths.iter().min()
    }

    /// The point at `offset` along `edge`, identified with an endpoint at 0
    /// or at the full length.
    pub fn point(&self, edge: usize, offset: Ratio<T>) -> Result<QPoint<T>, MetricError> {
        let &(u, v) = self.model.edges().get(edge).ok_or(MetricError::NoSuchEdge(edge))?;
        let len = &self.lengths[edge];
        if offset.is_negative() || &offset > len {
            return Err(MetricError::OffsetOutOfRange {
                edge,
                offset: format_ratio(&offset),
            });
        }
        Ok(if offset.is_zero() {
            QPoint::Vertex(u)
        } else if &offset == len {
            QPoint::Vertex(v)
        } else {
            QPoint::Interior { edge, offset }
        })
    }

    /// Same combinatorial type with new lengths.
    pub fn with_lengths(&self, lengths: Vec<Ratio<T>>) -> Result<Self, MetricError> {
        QGraph::new(self.model.clone(), lengths)
    }

    /// Multiply every length by `k`; offsets of points scale along.
    pub fn rescaled(&self, k: &T) -> Self {
        QGraph {
            model: self.model.clone(),
            lengths: self.lengths.iter().map(|l| l * Ratio::from_integer(k.clone())).collect(),
        }
    }

    /// `(deg(v) - 2)` at each model vertex.
    pub fn canonical_divisor(&self) -> QDivisor<T> {
        let mut d = QDivisor::zero();
        for v in 0..self.model.vertex_count() {
            d.add(
                QPoint::Vertex(v),
                T::from_count(self.model.degree(v)) - T::from_count(2),
            );
        }
        d
    }

    /// Lengths in the extended edge-list format.
    pub fn to_text(&self) -> String {
        let mut s = format!("# vertices: {}\n", self.model.labels().join(" "));
        for (&(u, v), l) in self.model.edges().iter().zip(&self.lengths) {
            s.push_str(&format!("{} {} {}\n", self.model.label(u), self.model.label(v), format_ratio(l)));
        }
        s
    }

    fn point_denominator(&self, p: &QPoint<T>) -> T {
        match p {
            QPoint::Vertex(_) => T::one(),
            QPoint::Interior { offset, .. } => offset.denom().clone(),
        }
    }

    /// Least `L` such that every length and every support offset of `d`
    /// becomes an integer after scaling by `L`.
    pub fn scale_for(&self, d: &QDivisor<T>) -> T {
        let lengths = self.lengths.iter().fold(T::one(), |acc, l| acc.lcm(l.denom()));
        d.terms
            .keys()
            .fold(lengths, |acc, p| acc.lcm(&self.point_denominator(p)))
    }

    /// Unit-length model after scaling by `scale` (which must clear every
    /// length denominator).
    pub fn unit_model(&self, scale: &T) -> Result<UnitModel<T>, MetricError> {
        let mut labels: Vec<String> = self.model.labels().to_vec();
        let mut edges = Vec::new();
        let mut edge_vertices = Vec::with_capacity(self.model.edge_count());
        for (ei, (&(u, v), len)) in self.model.edges().iter().zip(&self.lengths).enumerate() {
            let scaled = len * Ratio::from_integer(scale.clone());
            if !scaled.is_integer() {
                return Err(MetricError::Parameter(format!(
                    "scale {scale} does not clear the length of edge {ei}"
                )));
            }
            let units = scaled
                .to_integer()
                .to_usize()
                .ok_or_else(|| MetricError::Parameter("unit model too large".into()))?;
            let mut path = Vec::with_capacity(units + 1);
            path.push(u);
            let mut prev = u;
            for j in 1..units {
                labels.push(format!("{}__{}__{}__{}", self.model.label(u), self.model.label(v), ei, j));
                let fresh = labels.len() - 1;
                edges.push((prev, fresh));
                path.push(fresh);
                prev = fresh;
            }
            edges.push((prev, v));
            path.push(v);
            edge_vertices.push(path);
        }
        Ok(UnitModel {
            graph: MultiGraph::from_indexed(labels, edges)?,
            scale: scale.clone(),
            edge_vertices,
        })
    }

    /// The unit model for the least scale clearing all length denominators.
    pub fn canonical_unit_model(&self) -> UnitModel<T> {
        let scale = self.scale_for(&QDivisor::zero());
        self.unit_model(&scale).expect("scale clears every length")
    }
}

/// A subdivided, unit-length model of a Q-graph.
#[derive(Debug, Clone)]
pub struct UnitModel<T> {
    pub graph: MultiGraph,
    pub scale: T,
    /// Vertices along each original edge, from its first endpoint.
    pub edge_vertices: Vec<Vec<usize>>,
}

impl<T: Scalar> UnitModel<T> {
    /// The model vertex at a rational point, if its scaled offset is integral.
    pub fn vertex_of(&self, p: &QPoint<T>) -> Option<usize> {
        match p {
            QPoint::Vertex(v) => Some(*v),
            QPoint::Interior { edge, offset } => {
                let pos = offset * Ratio::from_integer(self.scale.clone());
                if !pos.is_integer() {
                    return None;
                }
                self.edge_vertices.get(*edge)?.get(pos.to_integer().to_usize()?).copied()
            }
        }
    }

    pub fn transport(&self, d: &QDivisor<T>) -> Result<Divisor<T>, MetricError> {
        let mut out = Divisor::zero(self.graph.vertex_count());
        for (p, c) in &d.terms {
            let v = self
                .vertex_of(p)
                .ok_or_else(|| MetricError::UnrepresentablePoint(format!("{p:?}")))?;
            out.add_at(v, c.clone());
        }
        Ok(out)
    }
}

/// A finite integer combination of rational points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QDivisor<T: Clone + Integer> {
    terms: BTreeMap<QPoint<T>, T>,
}

impl<T: Scalar> QDivisor<T> {
    pub fn zero() -> Self {
        QDivisor { terms: BTreeMap::new() }
    }

    pub fn single(p: QPoint<T>, c: T) -> Self {
        let mut d = Self::zero();
        d.add(p, c);
        d
    }

    pub fn add(&mut self, p: QPoint<T>, c: T) {
        let e = self.terms.entry(p.clone()).or_insert_with(T::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&p);
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add(p.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add(p.clone(), -c.clone());
        }
        out
    }

    pub fn terms(&self) -> &BTreeMap<QPoint<T>, T> {
        &self.terms
    }

    pub fn coefficient(&self, p: &QPoint<T>) -> T {
        self.terms.get(p).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> T {
        self.terms.values().fold(T::zero(), |a, c| a + c.clone())
    }

    pub fn is_effective(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &Self) -> bool {
        self.minus(other).is_effective()
    }

    /// `[{"edge": i, "offset": "p/q", "coeff": n}, ...]`; vertex points use
    /// their lowest-index incident edge.
    pub fn to_json(&self, graph: &QGraph<T>) -> Value {
        let model = graph.model();
        let items: Vec<Value> = self
            .terms
            .iter()
            .map(|(p, c)| match p {
                QPoint::Interior { edge, offset } => {
                    json!({"edge": edge, "offset": format_ratio(offset), "coeff": scalar_to_json(c)})
                }
                QPoint::Vertex(v) => {
                    match model.edges().iter().position(|&(a, b)| a == *v || b == *v) {
                        Some(e) => {
                            let off = if model.edges()[e].0 == *v {
                                Ratio::from_integer(T::zero())
                            } else {
                                graph.lengths()[e].clone()
                            };
                            json!({"edge": e, "offset": format_ratio(&off), "coeff": scalar_to_json(c)})
                        }
                        None => json!({"vertex": model.label(*v), "coeff": scalar_to_json(c)}),
                    }
                }
            })
            .collect();
        Value::Array(items)
    }

    pub fn from_json(graph: &QGraph<T>, value: &Value) -> Result<Self, MetricError> {
        let items = value
            .as_array()
            .ok_or_else(|| MetricError::Json("expected an array of points".into()))?;
        let mut d = QDivisor::zero();
        for (i, item) in items.iter().enumerate() {
            let coeff = item
                .get("coeff")
                .and_then(scalar_from_json::<T>)
                .ok_or_else(|| MetricError::Json(format!("entry {i}: missing integer `coeff`")))?;
            let point = if let Some(label) = item.get("vertex").and_then(Value::as_str) {
                QPoint::Vertex(graph.model().require_vertex(label)?)
            } else {
                let edge = item
                    .get("edge")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| MetricError::Json(format!("entry {i}: missing `edge`")))?
                    as usize;
                let offset = match item.get("offset") {
                    Some(Value::String(s)) => parse_ratio::<T>(s),
                    Some(Value::Number(n)) => parse_ratio::<T>(&n.to_string()),
                    _ => None,
                }
                .ok_or_else(|| MetricError::Json(format!("entry {i}: `offset` must be a rational like \"p/q\"")))?;
                graph.point(edge, offset)?
            };
            d.add(point, coeff);
        }
        Ok(d)
    }

    pub fn parse_json(graph: &QGraph<T>, text: &str) -> Result<Self, MetricError> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| MetricError::Json(format!("line {}, column {}: {}", e.line(), e.column(), e)))?;
        Self::from_json(graph, &v)
    }
}

/// Parse `"<u> <v> [<p>/<q>]"` lines (length defaults to 1).
///
/// Unbounded edges (`inf`) are dropped with a warning, together with any
/// vertex that only they touched; rank is unaffected by removing them.
pub fn parse_qgraph<T: Scalar>(text: &str) -> Result<(QGraph<T>, Vec<String>), MetricError> {
    let mut header: Vec<String> = Vec::new();
    let mut bounded: Vec<(usize, String, String, Ratio<T>)> = Vec::new();
    let mut warnings = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(h) = comment.trim().strip_prefix("vertices:") {
                header.extend(h.split_ascii_whitespace().map(String::from));
            }
            continue;
        }
        let tokens = tokenize(raw);
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(GraphError::Syntax {
                line: line_no,
                column: tokens.get(3).map_or(raw.len() + 1, |t| t.0),
                message: format!("expected `<label> <label> [<p>/<q>]`, found {} fields", tokens.len()),
            }
            .into());
        }
        let (u, v) = (tokens[0].1.to_string(), tokens[1].1.to_string());
        if u == v {
            return Err(GraphError::LoopEdge { line: line_no, label: u }.into());
        }
        let len = match tokens.get(2) {
            None => Ratio::from_integer(T::one()),
            Some((_, t)) if matches!(t.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
                warnings.push(format!("line {line_no}: dropped unbounded edge {u} {v}"));
                log::warn!("dropping unbounded edge {u} {v} on line {line_no}");
                continue;
            }
            Some((col, t)) => match parse_ratio::<T>(t) {
                Some(l) if l.is_positive() => l,
                _ => {
                    return Err(GraphError::Syntax {
                        line: line_no,
                        column: *col,
                        message: format!("edge length `{t}` is not a positive rational"),
                    }
                    .into())
                }
            },
        };
        bounded.push((line_no, u, v, len));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for l in header.iter().chain(bounded.iter().flat_map(|(_, u, v, _)| [u, v])) {
        if !index.contains_key(l) {
            index.insert(l.clone(), labels.len());
            labels.push(l.clone());
        }
    }
    // vertices declared in the header but touched only by unbounded edges go too
    if !warnings.is_empty() && !bounded.is_empty() {
        let used: std::collections::HashSet<&String> = bounded.iter().flat_map(|(_, u, v, _)| [u, v]).collect();
        labels.retain(|l| used.contains(l));
        index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    }
    let edges = bounded.iter().map(|(_, u, v, _)| (index[u], index[v])).collect();
    let lengths = bounded.into_iter().map(|(_, _, _, l)| l).collect();
    let model = MultiGraph::from_indexed(labels, edges)?;
    Ok((QGraph::new(model, lengths)?, warnings))
}

#[derive(Debug, Clone, Copy)]
pub struct QRankOptions {
    /// Recompute on a model refined once more and require the same rank.
    pub audit: bool,
    pub degree_shortcut: bool,
}

impl Default for QRankOptions {
    fn default() -> Self {
        QRankOptions {
            audit: true,
            degree_shortcut: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QRankReport {
    pub rank: i64,
    pub scale: String,
    pub model_vertices: usize,
    pub audited_scale: Option<String>,
}

fn rank_on<T: Scalar>(model: &UnitModel<T>, d: &QDivisor<T>, shortcut: bool) -> Result<i64, MetricError> {
    let div = model.transport(d)?;
    let mut engine = RankEngine::<T>::new(&model.graph);
    if !shortcut {
        engine = engine.without_degree_shortcut();
    }
    Ok(engine.rank(&div))
}

/// Rank of a Q-divisor, computed on the unit model where its support is
/// vertex-supported.
pub fn q_rank<T: Scalar>(graph: &QGraph<T>, d: &QDivisor<T>) -> Result<i64, MetricError> {
    q_rank_with(graph, d, QRankOptions::default()).map(|r| r.rank)
}

pub fn q_rank_with<T: Scalar>(graph: &QGraph<T>, d: &QDivisor<T>, opts: QRankOptions) -> Result<QRankReport, MetricError> {
    let scale = graph.scale_for(d);
    let model = graph.unit_model(&scale)?;
    let rank = rank_on(&model, d, opts.degree_shortcut)?;
    let mut audited_scale = None;
    if opts.audit {
        let refined_scale = scale.clone() * T::from_count(2);
        let refined = graph.unit_model(&refined_scale)?;
        let again = rank_on(&refined, d, opts.degree_shortcut)?;
        if again != rank {
            return Err(MetricError::SubdivisionAuditFailed {
                base: rank,
                refined: again,
                scale: scale.to_string(),
                refined_scale: refined_scale.to_string(),
            });
        }
        audited_scale = Some(refined_scale.to_string());
    }
    Ok(QRankReport {
        rank,
        scale: scale.to_string(),
        model_vertices: model.graph.vertex_count(),
        audited_scale,
    })
}

/// `r(D) >= k` on the unit model (no audit).
pub fn q_rank_at_least<T: Scalar>(graph: &QGraph<T>, d: &QDivisor<T>, k: i64) -> Result<bool, MetricError> {
    let scale = graph.scale_for(d);
    let model = graph.unit_model(&scale)?;
    let div = model.transport(d)?;
    Ok(RankEngine::<T>::new(&model.graph).rank_at_least(&div, k))
}

/// A continuous piecewise-affine function given by breakpoints per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlFunction<T: Clone + Integer> {
    /// Per edge, `(offset, value)` pairs from offset 0 to the edge length.
    pub pieces: Vec<Vec<(Ratio<T>, Ratio<T>)>>,
}

impl<T: Scalar> PlFunction<T> {
    pub fn constant(graph: &QGraph<T>, value: Ratio<T>) -> Self {
        PlFunction {
            pieces: graph
                .lengths()
                .iter()
                .map(|l| vec![(Ratio::from_integer(T::zero()), value.clone()), (l.clone(), value.clone())])
                .collect(),
        }
    }

    /// Build an edge piece from a starting value and `(end_offset, slope)`
    /// runs; consecutive runs with equal slope are merged.
    pub fn edge_from_slopes(start: Ratio<T>, runs: &[(Ratio<T>, i64)]) -> Vec<(Ratio<T>, Ratio<T>)> {
        let mut out = vec![(Ratio::from_integer(T::zero()), start)];
        for (end, slope) in runs {
            let (x, y) = out.last().cloned().expect("nonempty");
            if *end == x {
                continue;
            }
            let y2 = y + (end.clone() - x) * Ratio::from_integer(T::from_i64_exact(*slope));
            out.push((end.clone(), y2));
        }
        out
    }

    pub fn value_at_start(&self, edge: usize) -> &Ratio<T> {
        &self.pieces[edge][0].1
    }

    pub fn value_at_end(&self, edge: usize) -> &Ratio<T> {
        &self.pieces[edge].last().expect("nonempty").1
    }
}

/// `(f) = - sum_P sigma_P(f) (P)`, where `sigma_P` sums the outgoing slopes.
pub fn divisor_of_function<T: Scalar>(graph: &QGraph<T>, f: &PlFunction<T>) -> Result<QDivisor<T>, MetricError> {
    let model = graph.model();
    if f.pieces.len() != model.edge_count() {
        return Err(MetricError::LengthCount {
            expected: model.edge_count(),
            found: f.pieces.len(),
        });
    }
    let mut slopes_per_edge = Vec::with_capacity(f.pieces.len());
    for (edge, piece) in f.pieces.iter().enumerate() {
        let ok = piece.len() >= 2
            && piece[0].0.is_zero()
            && piece.last().unwrap().0 == graph.lengths()[edge]
            && piece.windows(2).all(|w| w[0].0 < w[1].0);
        if !ok {
            return Err(MetricError::InvalidBreakpoints { edge });
        }
        let slopes = piece
            .windows(2)
            .enumerate()
            .map(|(segment, w)| {
                let s = (w[1].1.clone() - w[0].1.clone()) / (w[1].0.clone() - w[0].0.clone());
                if s.is_integer() {
                    Ok(s.to_integer())
                } else {
                    Err(MetricError::NonIntegerSlope {
                        edge,
                        segment,
                        slope: format_ratio(&s),
                    })
                }
            })
            .collect::<Result<Vec<T>, _>>()?;
        slopes_per_edge.push(slopes);
    }
    let mut vertex_value: Vec<Option<Ratio<T>>> = vec![None; model.vertex_count()];
    let mut check = |v: usize, val: &Ratio<T>| -> Result<(), MetricError> {
        match &vertex_value[v] {
            Some(prev) if prev != val => Err(MetricError::Discontinuity(model.label(v).to_string())),
            Some(_) => Ok(()),
            None => {
                vertex_value[v] = Some(val.clone());
                Ok(())
            }
        }
    };
    for (edge, &(u, v)) in model.edges().iter().enumerate() {
        check(u, f.value_at_start(edge))?;
        check(v, f.value_at_end(edge))?;
    }
    let mut out = QDivisor::zero();
    for (edge, &(u, v)) in model.edges().iter().enumerate() {
        let slopes = &slopes_per_edge[edge];
        // leaving u along the edge, leaving v backwards along it
        out.add(QPoint::Vertex(u), -slopes[0].clone());
        out.add(QPoint::Vertex(v), slopes.last().unwrap().clone());
        for (i, w) in slopes.windows(2).enumerate() {
            let offset = f.pieces[edge][i + 1].0.clone();
            // sigma = right slope - left slope
            out.add(QPoint::Interior { edge, offset }, w[0].clone() - w[1].clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricRiemannRoch {
    pub degree: i64,
    pub genus: i64,
    pub rank: i64,
    pub residual_rank: i64,
    pub holds: bool,
}

/// `r(D) - r(K - D) = deg(D) + 1 - g` with both ranks computed on unit models
/// without the high-degree shortcut.
pub fn metric_rr_check<T: Scalar>(graph: &QGraph<T>, d: &QDivisor<T>) -> Result<MetricRiemannRoch, MetricError> {
    let opts = QRankOptions {
        audit: false,
        degree_shortcut: false,
    };
    let residual = graph.canonical_divisor().minus(d);
    let rank = q_rank_with(graph, d, opts)?.rank;
    let residual_rank = q_rank_with(graph, &residual, opts)?.rank;
    let degree = d.degree().to_i64().expect("degree fits in i64");
    let genus = graph.genus() as i64;
    Ok(MetricRiemannRoch {
        degree,
        genus,
        rank,
        residual_rank,
        holds: rank - residual_rank == degree + 1 - genus,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NorinePoint {
    pub offset: String,
    pub rank: i64,
    pub in_claimed_interval: bool,
}

/// `r(3(P))` for `P` at every multiple of `1/denominator` on the first edge of
/// the unit metric banana graph with `n` edges.
pub fn norine_scan(n: usize, denominator: i64) -> Result<Vec<NorinePoint>, MetricError> {
    if n < 4 {
        return Err(MetricError::Parameter("banana needs n >= 4 edges".into()));
    }
    if denominator < 3 {
        return Err(MetricError::Parameter("denominator must be at least 3".into()));
    }
    let gamma = QGraph::<i64>::unit(crate::graph::banana(n)?);
    let third = Ratio::new(1, 3);
    (0..=denominator)
        .into_par_iter()
        .map(|j| {
            let x = Ratio::new(j, denominator);
            let p = gamma.point(0, x)?;
            let rank = q_rank(&gamma, &QDivisor::single(p, 3))?;
            Ok(NorinePoint {
                offset: format_ratio(&x),
                rank,
                in_claimed_interval: x >= third && x <= Ratio::new(2, 3),
            })
        })
        .collect()
}

/// Explicit function `f` on the unit metric banana graph with
/// `(f) >= -3(P) + (Q)`, for `P` at offset `x` in `[1/3, 2/3]` on edge `i`
/// and `Q` any rational point. `None` when `x` is outside that interval.
pub fn norine_function(n: usize, i: usize, x: &Ratio<i64>, q: &QPoint<i64>) -> Option<PlFunction<i64>> {
    let (third, half, two_thirds) = (Ratio::new(1, 3), Ratio::new(1, 2), Ratio::new(2, 3));
    if *x < third || *x > two_thirds || i >= n {
        return None;
    }
    let zero = Ratio::from_integer(0);
    let one = Ratio::from_integer(1);
    let flat = || vec![(zero, zero), (one, zero)];
    let mut pieces: Vec<Vec<(Ratio<i64>, Ratio<i64>)>> = (0..n).map(|_| flat()).collect();
    let p_point = if *x == zero { QPoint::Vertex(0) } else { QPoint::Interior { edge: i, offset: *x } };
    if *q == p_point {
        return Some(PlFunction { pieces });
    }
    // position of Q on edge i, if it lies there (the endpoints lie on every edge)
    let on_i = match q {
        QPoint::Vertex(0) => Some(zero),
        QPoint::Vertex(_) => Some(one),
        QPoint::Interior { edge, offset } if *edge == i => Some(*offset),
        QPoint::Interior { .. } => None,
    };
    let runs = PlFunction::<i64>::edge_from_slopes;
    match on_i {
        Some(xq) if *x < xq => {
            // slope -2 up to P, then +1 up to Q
            let y = (Ratio::from_integer(3) * x - xq) / 2;
            pieces[i] = runs(zero, &[(y, 0), (*x, -2), (xq, 1), (one, 0)]);
        }
        Some(xq) => {
            // slope -1 from Q to P, then +2
            let y = (Ratio::from_integer(3) * x - xq) / 2;
            pieces[i] = runs(zero, &[(xq, 0), (*x, -1), (y, 2), (one, 0)]);
        }
        None => {
            let QPoint::Interior { edge: j, offset: xq } = q else {
                unreachable!("vertices lie on edge i")
            };
            let z = (*xq).min(one - xq);
            pieces[*j] = runs(zero, &[(z, 1), (one - z, 0), (one, -1)]);
            let y = Ratio::from_integer(3) * x - one;
            pieces[i] = if *x <= half {
                runs(zero, &[(y, -1), (*x, -2), (one, 1)])
            } else {
                runs(zero, &[(*x, -1), (y, 2), (one, 1)])
            };
        }
    }
    Some(PlFunction { pieces })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub sample: usize,
    /// Perturbation magnitudes, largest first.
    pub magnitudes: Vec<String>,
    pub ranks: Vec<i64>,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SemicontinuityReport {
    pub base_rank: i64,
    pub probes: Vec<Probe>,
    pub violations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ProbeOptions {
    pub perturb_lengths: bool,
    pub perturb_points: bool,
    /// Largest denominator of a perturbation magnitude.
    pub max_denominator: i64,
    /// Points per shrinking sequence.
    pub sequence_length: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            perturb_lengths: true,
            perturb_points: true,
            max_denominator: 24,
            sequence_length: 3,
        }
    }
}

/// Falsification harness for upper semicontinuity of rank.
///
/// Each sample picks a random direction (a sign per edge length, a move per
/// support point) and a shrinking sequence of magnitudes `1/den` below `eps`.
/// A violation is a sequence whose ranks all exceed the rank at the limit.
pub fn semicontinuity_probe(
    graph: &QGraph<i64>,
    d: &QDivisor<i64>,
    eps: Ratio<i64>,
    samples: usize,
    seed: u64,
    opts: ProbeOptions,
) -> Result<SemicontinuityReport, MetricError> {
    if let Some(min) = graph.min_length() {
        if eps >= *min || !eps.is_positive() {
            return Err(MetricError::Parameter("eps must be positive and below every edge length".into()));
        }
    }
    if !d.is_effective() {
        return Err(MetricError::Parameter("probes move effective divisors only".into()));
    }
    let base_rank = q_rank_with(graph, d, QRankOptions { audit: false, degree_shortcut: true })?.rank;
    let dens: Vec<i64> = (2..=opts.max_denominator)
        .filter(|&den| Ratio::new(1, den) < eps)
        .collect();
    if dens.len() < opts.sequence_length {
        return Err(MetricError::Parameter(format!(
            "too few denominators <= {} give magnitudes below eps",
            opts.max_denominator
        )));
    }
    let model = graph.model();
    let support: Vec<(QPoint<i64>, i64)> = d.terms().iter().map(|(p, c)| (p.clone(), *c)).collect();
    let probe = |sample: usize| -> Result<Probe, MetricError> {
        let mut r = rng(seed.wrapping_add(sample as u64));
        let signs: Vec<i64> = (0..model.edge_count())
            .map(|_| if opts.perturb_lengths { r.gen_range(-1..=1) } else { 0 })
            .collect();
        // per support point: (edge, start offset, direction)
        let moves: Vec<(usize, Ratio<i64>, i64)> = support
            .iter()
            .map(|(p, _)| match p {
                QPoint::Interior { edge, offset } => {
                    let dir = if opts.perturb_points { r.gen_range(-1..=1) } else { 0 };
                    (*edge, *offset, dir)
                }
                QPoint::Vertex(v) => {
                    let incident: Vec<usize> = (0..model.edge_count())
                        .filter(|&e| model.edges()[e].0 == *v || model.edges()[e].1 == *v)
                        .collect();
                    if incident.is_empty() || !opts.perturb_points {
                        return (usize::MAX, Ratio::from_integer(0), 0);
                    }
                    // a vertex point either stays or steps into one edge
                    let e = incident[r.gen_range(0..incident.len())];
                    let at_start = model.edges()[e].0 == *v;
                    let dir = if r.gen_bool(0.5) { 0 } else if at_start { 1 } else { -1 };
                    let start = if at_start { Ratio::from_integer(0) } else { graph.lengths()[e] };
                    (e, start, dir)
                }
            })
            .collect();
        // shrinking magnitudes: increasing denominators
        let mut pool = dens.clone();
        let mut chosen = Vec::new();
        while chosen.len() < opts.sequence_length && !pool.is_empty() {
            chosen.push(pool.swap_remove(r.gen_range(0..pool.len())));
        }
        chosen.sort_unstable();
        let mut magnitudes = Vec::new();
        let mut ranks = Vec::new();
        for den in chosen {
            let t = Ratio::new(1, den);
            let lengths: Vec<Ratio<i64>> = graph
                .lengths()
                .iter()
                .zip(&signs)
                .map(|(l, s)| l + t * Ratio::from_integer(*s))
                .collect();
            let moved_graph = graph.with_lengths(lengths)?;
            let mut moved = QDivisor::zero();
            for ((p, c), (edge, start, dir)) in support.iter().zip(&moves) {
                if *edge == usize::MAX {
                    moved.add(p.clone(), *c);
                    continue;
                }
                let old = graph.lengths()[*edge];
                let new = moved_graph.lengths()[*edge];
                // follow a length change: keep the offset, or the distance to
                // the far end when the offset no longer fits
                let base = if *start == old {
                    new
                } else if *start < new {
                    *start
                } else {
                    new - (old - start)
                };
                let step = t * Ratio::from_integer(*dir);
                let mut off = base + step;
                if off.is_negative() || off > new {
                    off = base - step;
                }
                moved.add(moved_graph.point(*edge, off)?, *c);
            }
            let rank = q_rank_with(&moved_graph, &moved, QRankOptions { audit: false, degree_shortcut: true })?.rank;
            magnitudes.push(format_ratio(&t));
            ranks.push(rank);
        }
        // magnitudes were generated with increasing denominators
        let violation = !ranks.is_empty() && ranks.iter().all(|&k| k > base_rank);
        Ok(Probe {
            sample,
            magnitudes,
            ranks,
            violation,
        })
    };
    let probes = (0..samples).into_par_iter().map(probe).collect::<Result<Vec<_>, _>>()?;
    let violations = probes.iter().filter(|p| p.violation).count();
    Ok(SemicontinuityReport {
        base_rank,
        probes,
        violations,
    })
}

/// First rational point with `r(g (P)) >= 1`, scanning model vertices, then
/// interior points with offsets `k/den` for `den = 2..=max_den`.
pub fn find_weierstrass_point(graph: &QGraph<i64>, max_den: i64) -> Result<Option<QPoint<i64>>, MetricError> {
    let g = graph.genus() as i64;
    let unit = graph.canonical_unit_model();
    let mut engine = RankEngine::<i64>::new(&unit.graph);
    let n = unit.graph.vertex_count();
    for v in 0..graph.model().vertex_count() {
        if engine.rank_at_least(&Divisor::point(n, v, g), 1) {
            return Ok(Some(QPoint::Vertex(v)));
        }
    }
    for den in 2..=max_den {
        for (edge, len) in graph.lengths().iter().enumerate() {
            let steps = (len * Ratio::from_integer(den)).floor().to_integer();
            for k in 1..=steps {
                let off = Ratio::new(k, den);
                if off.denom() != &den || &off >= len {
                    continue;
                }
                let p = graph.point(edge, off)?;
                if q_rank_at_least(graph, &QDivisor::single(p.clone(), g), 1)? {
                    return Ok(Some(p));
                }
            }
        }
    }
    Ok(None)
}
