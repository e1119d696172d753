//! Pushing curve divisors down to the dual graph of a model.
//!
//! The curve side is tabulated input: which component each point reduces to,
//! and (optionally) the rank each divisor has on the curve. Only the graph
//! side is computed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::divisor::{scalar_from_json, Divisor};
use crate::graph::{parse_graph, GraphError, MultiGraph};
use crate::rank::RankEngine;
use crate::scalar::Scalar;

/// The shipped quartic fixture.
pub const QUARTIC_FIXTURE: &str = include_str!("../fixtures/quartic_x0.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecializationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("curve point `{0}` has no assigned vertex")]
    UnassignedPoint(String),
    #[error("divisor `{0}` carries no stated curve rank")]
    MissingStatedRank(String),
    #[error("invalid fixture: {0}")]
    Fixture(String),
}

/// Which vertex (component) each curve point reduces to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecializationTable {
    target: MultiGraph,
    assignments: BTreeMap<String, usize>,
}

impl SpecializationTable {
    pub fn new(target: MultiGraph, assignments: &BTreeMap<String, String>) -> Result<Self, SpecializationError> {
        let assignments = assignments
            .iter()
            .map(|(point, vertex)| Ok((point.clone(), target.require_vertex(vertex)?)))
            .collect::<Result<_, GraphError>>()?;
        Ok(SpecializationTable { target, assignments })
    }

    pub fn target(&self) -> &MultiGraph {
        &self.target
    }

    pub fn vertex_of(&self, point: &str) -> Option<usize> {
        self.assignments.get(point).copied()
    }
}

/// A divisor on the curve, known only through point labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCurveDivisor<T> {
    pub name: String,
    pub coeffs: BTreeMap<String, T>,
    pub stated_rank: Option<i64>,
}

impl<T: Scalar> LabeledCurveDivisor<T> {
    pub fn new(name: &str, coeffs: &[(&str, i64)], stated_rank: Option<i64>) -> Self {
        LabeledCurveDivisor {
            name: name.to_string(),
            coeffs: coeffs
                .iter()
                .map(|(p, c)| (p.to_string(), T::from_i64_exact(*c)))
                .collect(),
            stated_rank,
        }
    }

    pub fn degree(&self) -> T {
        self.coeffs.values().fold(T::zero(), |a, c| a + c.clone())
    }

    /// Coefficientwise sum; the stated rank is dropped.
    pub fn plus(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (p, c) in &other.coeffs {
            let e = coeffs.entry(p.clone()).or_insert_with(T::zero);
            *e = e.clone() + c.clone();
        }
        LabeledCurveDivisor {
            name: format!("{}+{}", self.name, other.name),
            coeffs,
            stated_rank: None,
        }
    }
}

/// `sum_P n_P (v(P))`.
pub fn specialize<T: Scalar>(table: &SpecializationTable, d: &LabeledCurveDivisor<T>) -> Result<Divisor<T>, SpecializationError> {
    let mut out = Divisor::zero(table.target.vertex_count());
    for (point, c) in &d.coeffs {
        let v = table
            .vertex_of(point)
            .ok_or_else(|| SpecializationError::UnassignedPoint(point.clone()))?;
        out.add_at(v, c.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecializationReport {
    pub name: String,
    pub specialized: String,
    pub graph_rank: i64,
    pub stated_curve_rank: i64,
    /// `graph_rank >= stated_curve_rank`.
    pub holds: bool,
}

/// Compare the graph rank of the specialization with the stated curve rank;
/// specialization can only increase rank.
pub fn check_specialization_lemma<T: Scalar>(
    table: &SpecializationTable,
    d: &LabeledCurveDivisor<T>,
) -> Result<SpecializationReport, SpecializationError> {
    let stated = d
        .stated_rank
        .ok_or_else(|| SpecializationError::MissingStatedRank(d.name.clone()))?;
    let rho = specialize(table, d)?;
    let graph_rank = RankEngine::<T>::new(&table.target).rank(&rho);
    Ok(SpecializationReport {
        name: d.name.clone(),
        specialized: rho.display(&table.target),
        graph_rank,
        stated_curve_rank: stated,
        holds: graph_rank >= stated,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FixtureFile {
    #[serde(default)]
    provenance: String,
    #[serde(default)]
    notes: Vec<String>,
    graph: String,
    assignments: BTreeMap<String, String>,
    divisors: Vec<FixtureDivisor>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FixtureDivisor {
    name: String,
    coeffs: BTreeMap<String, Value>,
    #[serde(rename = "statedRank", default)]
    stated_rank: Option<i64>,
}

/// A parsed specialization fixture.
#[derive(Debug, Clone)]
pub struct SpecializationFixture<T> {
    pub provenance: String,
    pub notes: Vec<String>,
    pub table: SpecializationTable,
    pub divisors: Vec<LabeledCurveDivisor<T>>,
}

impl<T: Scalar> SpecializationFixture<T> {
    pub fn parse(text: &str) -> Result<Self, SpecializationError> {
        let raw: FixtureFile = serde_json::from_str(text).map_err(|e| {
            SpecializationError::Fixture(format!("line {}, column {}: {}", e.line(), e.column(), e))
        })?;
        let graph = parse_graph(&raw.graph)?;
        let table = SpecializationTable::new(graph, &raw.assignments)?;
        let divisors = raw
            .divisors
            .into_iter()
            .map(|d| {
                let coeffs = d
                    .coeffs
                    .iter()
                    .map(|(p, v)| {
                        scalar_from_json::<T>(v)
                            .map(|c| (p.clone(), c))
                            .ok_or_else(|| SpecializationError::Fixture(format!("{}: coefficient of {p} is not an integer", d.name)))
                    })
                    .collect::<Result<_, _>>()?;
                Ok(LabeledCurveDivisor {
                    name: d.name,
                    coeffs,
                    stated_rank: d.stated_rank,
                })
            })
            .collect::<Result<_, SpecializationError>>()?;
        Ok(SpecializationFixture {
            provenance: raw.provenance,
            notes: raw.notes,
            table,
            divisors,
        })
    }

    pub fn quartic() -> Self {
        Self::parse(QUARTIC_FIXTURE).expect("shipped fixture parses")
    }

    pub fn divisor(&self, name: &str) -> Option<&LabeledCurveDivisor<T>> {
        self.divisors.iter().find(|d| d.name == name)
    }
}
