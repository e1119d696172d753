//! Divisors, the graph Laplacian, and q-reduced normal forms.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::graph::{GraphError, MultiGraph};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisorError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("divisor has {found} coefficients, graph has {expected} vertices")]
    WrongLength { expected: usize, found: usize },
    #[error("function is missing a value at vertex `{0}`")]
    MissingVertex(String),
    #[error("invalid divisor JSON: {0}")]
    Json(String),
}

/// A divisor on a fixed graph: one integer per vertex in canonical order.
///
/// Stored densely; zero coefficients are simply zero. The labeled JSON form
/// omits them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Divisor<T> {
    pub fn zero(n: usize) -> Self {
        Divisor {
            coeffs: vec![T::zero(); n],
        }
    }

    pub fn from_vec(coeffs: Vec<T>) -> Self {
        Divisor { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Divisor {
            coeffs: coeffs.iter().map(|&c| T::from_i64_exact(c)).collect(),
        }
    }

    /// `c * (v)` on a graph with `n` vertices.
    pub fn point(n: usize, v: usize, c: T) -> Self {
        let mut d = Self::zero(n);
        d.coeffs[v] = c;
        d
    }

    /// Build from `(label, coefficient)` pairs; repeated labels accumulate.
    pub fn from_labeled<S: AsRef<str>>(graph: &MultiGraph, terms: &[(S, i64)]) -> Result<Self, DivisorError> {
        let mut d = Self::zero(graph.vertex_count());
        for (l, c) in terms {
            let v = graph.require_vertex(l.as_ref())?;
            d.coeffs[v] = d.coeffs[v].clone() + T::from_i64_exact(*c);
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.coeffs
    }

    pub fn get(&self, v: usize) -> &T {
        &self.coeffs[v]
    }

    pub fn set(&mut self, v: usize, c: T) {
        self.coeffs[v] = c;
    }

    pub fn add_at(&mut self, v: usize, c: T) {
        self.coeffs[v] = self.coeffs[v].clone() + c;
    }

    pub fn degree(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.clone())
    }

    pub fn is_effective(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &Self) -> bool {
        self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a >= b)
    }

    pub fn scaled(&self, k: &T) -> Self {
        Divisor {
            coeffs: self.coeffs.iter().map(|c| c.clone() * k.clone()).collect(),
        }
    }

    pub fn check_graph(&self, graph: &MultiGraph) -> Result<(), DivisorError> {
        if self.len() != graph.vertex_count() {
            return Err(DivisorError::WrongLength {
                expected: graph.vertex_count(),
                found: self.len(),
            });
        }
        Ok(())
    }

    /// Convert to another scalar width. Panics if a value does not fit.
    pub fn convert<U: Scalar>(&self) -> Divisor<U> {
        Divisor {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    U::from_i128(c.to_i128().expect("coefficient fits in i128"))
                        .expect("coefficient fits in target scalar")
                })
                .collect(),
        }
    }

    /// Nonzero terms as `label -> coefficient`, in canonical vertex order.
    pub fn to_labeled(&self, graph: &MultiGraph) -> Vec<(String, T)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| (graph.label(v).to_string(), c.clone()))
            .collect()
    }

    /// Divisor JSON object `{"label": n, ...}` with zero entries omitted.
    pub fn to_json(&self, graph: &MultiGraph) -> Value {
        let mut m = Map::new();
        for (l, c) in self.to_labeled(graph) {
            m.insert(l, scalar_to_json(&c));
        }
        Value::Object(m)
    }

    pub fn from_json(graph: &MultiGraph, value: &Value) -> Result<Self, DivisorError> {
        let obj = value
            .as_object()
            .ok_or_else(|| DivisorError::Json("expected an object of label -> integer".into()))?;
        let mut d = Self::zero(graph.vertex_count());
        for (label, c) in obj {
            let v = graph.require_vertex(label)?;
            d.coeffs[v] = scalar_from_json(c)
                .ok_or_else(|| DivisorError::Json(format!("coefficient of `{label}` is not an integer")))?;
        }
        Ok(d)
    }

    pub fn parse_json(graph: &MultiGraph, text: &str) -> Result<Self, DivisorError> {
        let v: Value = serde_json::from_str(text).map_err(|e| {
            DivisorError::Json(format!("line {}, column {}: {}", e.line(), e.column(), e))
        })?;
        Self::from_json(graph, &v)
    }

    /// Human-readable `2(P) + (Q1) - (P')`.
    pub fn display(&self, graph: &MultiGraph) -> String {
        let terms = self.to_labeled(graph);
        if terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (l, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if !a.is_one() {
                s.push_str(&a.to_string());
            }
            s.push('(');
            s.push_str(l);
            s.push(')');
        }
        s
    }
}

pub(crate) fn scalar_to_json<T: Scalar>(c: &T) -> Value {
    match c.to_string().parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(c.to_string()),
    }
}

pub(crate) fn scalar_from_json<T: Scalar>(v: &Value) -> Option<T> {
    match v {
        Value::Number(n) => T::parse_decimal(&n.to_string()),
        _ => None,
    }
}

impl<T: Scalar> Add for &Divisor<T> {
    type Output = Divisor<T>;
    fn add(self, rhs: Self) -> Divisor<T> {
        assert_eq!(self.len(), rhs.len());
        Divisor {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &Divisor<T> {
    type Output = Divisor<T>;
    fn sub(self, rhs: Self) -> Divisor<T> {
        assert_eq!(self.len(), rhs.len());
        Divisor {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Add for Divisor<T> {
    type Output = Divisor<T>;
    fn add(self, rhs: Self) -> Divisor<T> {
        &self + &rhs
    }
}

impl<T: Scalar> Sub for Divisor<T> {
    type Output = Divisor<T>;
    fn sub(self, rhs: Self) -> Divisor<T> {
        &self - &rhs
    }
}

impl<T: Scalar> AddAssign<&Divisor<T>> for Divisor<T> {
    fn add_assign(&mut self, rhs: &Divisor<T>) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a = a.clone() + b.clone();
        }
    }
}

impl<T: Scalar> SubAssign<&Divisor<T>> for Divisor<T> {
    fn sub_assign(&mut self, rhs: &Divisor<T>) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a = a.clone() - b.clone();
        }
    }
}

impl<T: Scalar> Neg for Divisor<T> {
    type Output = Divisor<T>;
    fn neg(self) -> Divisor<T> {
        Divisor {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

/// An integer-valued function on the vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntFunction<T>(Vec<T>);

impl<T: Scalar> IntFunction<T> {
    pub fn from_vec(values: Vec<T>) -> Self {
        IntFunction(values)
    }

    /// Requires a value for every vertex.
    pub fn from_labeled(graph: &MultiGraph, values: &BTreeMap<String, T>) -> Result<Self, DivisorError> {
        for l in values.keys() {
            graph.require_vertex(l)?;
        }
        graph
            .labels()
            .iter()
            .map(|l| {
                values
                    .get(l)
                    .cloned()
                    .ok_or_else(|| DivisorError::MissingVertex(l.clone()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(IntFunction)
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn indicator(n: usize, v: usize) -> Self {
        let mut f = vec![T::zero(); n];
        f[v] = T::one();
        IntFunction(f)
    }
}

/// `sum_v sum_{e = vw} (f(v) - f(w)) (v)`.
pub fn laplacian_apply<T: Scalar>(graph: &MultiGraph, f: &IntFunction<T>) -> Result<Divisor<T>, DivisorError> {
    if f.0.len() != graph.vertex_count() {
        return Err(DivisorError::WrongLength {
            expected: graph.vertex_count(),
            found: f.0.len(),
        });
    }
    let coeffs = (0..graph.vertex_count())
        .map(|v| {
            graph.neighbors(v).iter().fold(T::zero(), |acc, &(w, m)| {
                acc + (f.0[v].clone() - f.0[w].clone()) * T::from_count(m)
            })
        })
        .collect();
    Ok(Divisor { coeffs })
}

/// `sum_v (deg(v) - 2) (v)`.
pub fn canonical_divisor<T: Scalar>(graph: &MultiGraph) -> Divisor<T> {
    Divisor {
        coeffs: (0..graph.vertex_count())
            .map(|v| T::from_count(graph.degree(v)) - T::from_count(2))
            .collect(),
    }
}

/// Precomputed data for reducing divisors against a fixed base vertex.
#[derive(Debug, Clone)]
pub struct Reducer<'g> {
    graph: &'g MultiGraph,
    base: usize,
    bfs: Vec<usize>,
    position: Vec<usize>,
    /// `bfs[levels[l]..levels[l + 1]]` are the vertices at distance `l`.
    levels: Vec<usize>,
}

/// Result of a burning pass on a divisor that is nonnegative off the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Burn {
    /// Vertices in the order they caught fire, base first.
    pub order: Vec<usize>,
    /// True when the whole graph burned.
    pub complete: bool,
}

impl<'g> Reducer<'g> {
    pub fn new(graph: &'g MultiGraph, base: usize) -> Self {
        let bfs = graph.bfs_order(base);
        let mut position = vec![0; graph.vertex_count()];
        let mut dist = vec![usize::MAX; graph.vertex_count()];
        dist[base] = 0;
        let mut levels = vec![0];
        for (i, &v) in bfs.iter().enumerate() {
            position[v] = i;
            for &(w, _) in graph.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                }
            }
            if i > 0 && dist[v] != dist[bfs[i - 1]] {
                levels.push(i);
            }
        }
        levels.push(bfs.len());
        Reducer {
            graph,
            base,
            bfs,
            position,
            levels,
        }
    }

    pub fn graph(&self) -> &'g MultiGraph {
        self.graph
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// The unique base-reduced divisor equivalent to `d`.
    pub fn reduce<T: Scalar>(&self, d: &Divisor<T>) -> Divisor<T> {
        let mut c = d.coeffs.clone();
        self.reduce_in_place(&mut c);
        Divisor { coeffs: c }
    }

    pub fn reduce_in_place<T: Scalar>(&self, c: &mut [T]) {
        self.make_nonnegative(c);
        let n = c.len();
        let mut hits = vec![0usize; n];
        let mut burnt = vec![false; n];
        loop {
            if self.burn_pass(c, &mut hits, &mut burnt, None) {
                return;
            }
            // The unburnt set can fire legally; fire it as often as possible.
            let mut times: Option<T> = None;
            for v in 0..n {
                if !burnt[v] && hits[v] > 0 {
                    let t = c[v].clone().div_floor(&T::from_count(hits[v]));
                    times = Some(match times {
                        Some(m) if m <= t => m,
                        _ => t,
                    });
                }
            }
            let times = times.expect("unburnt set borders the burnt set");
            debug_assert!(times >= T::one());
            for v in 0..n {
                if burnt[v] {
                    continue;
                }
                for &(w, m) in self.graph.neighbors(v) {
                    if burnt[w] {
                        let chips = times.clone() * T::from_count(m);
                        c[v] = c[v].clone() - chips.clone();
                        c[w] = c[w].clone() + chips;
                    }
                }
            }
        }
    }

    /// Working outward-in by BFS distance, fire the ball of smaller radius
    /// until the current sphere is nonnegative. Spheres already handled only
    /// gain chips.
    fn make_nonnegative<T: Scalar>(&self, c: &mut [T]) {
        for l in (1..self.levels.len() - 1).rev() {
            let (start, end) = (self.levels[l], self.levels[l + 1]);
            let mut times = T::zero();
            for &v in &self.bfs[start..end] {
                if !c[v].is_negative() {
                    continue;
                }
                let into_v: usize = self
                    .graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&(w, _)| self.position[w] < start)
                    .map(|&(_, m)| m)
                    .sum();
                let need = (-c[v].clone()).div_ceil(&T::from_count(into_v));
                if need > times {
                    times = need;
                }
            }
            if times.is_zero() {
                continue;
            }
            for &u in &self.bfs[..start] {
                for &(w, m) in self.graph.neighbors(u) {
                    if self.position[w] >= start {
                        let chips = times.clone() * T::from_count(m);
                        c[u] = c[u].clone() - chips.clone();
                        c[w] = c[w].clone() + chips;
                    }
                }
            }
        }
    }

    /// One burning pass from the base. Returns true if everything burned.
    /// `hits[v]` ends as the number of edges from `v` to burnt vertices.
    fn burn_pass<T: Scalar>(
        &self,
        c: &[T],
        hits: &mut [usize],
        burnt: &mut [bool],
        mut order: Option<&mut Vec<usize>>,
    ) -> bool {
        hits.iter_mut().for_each(|h| *h = 0);
        burnt.iter_mut().for_each(|b| *b = false);
        burnt[self.base] = true;
        let mut stack = vec![self.base];
        if let Some(o) = order.as_deref_mut() {
            o.push(self.base);
        }
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(w, m) in self.graph.neighbors(u) {
                if burnt[w] {
                    continue;
                }
                hits[w] += m;
                if T::from_count(hits[w]) > c[w] {
                    burnt[w] = true;
                    count += 1;
                    stack.push(w);
                    if let Some(o) = order.as_deref_mut() {
                        o.push(w);
                    }
                }
            }
        }
        count == c.len()
    }

    /// Run the burning process on `d` (which must be nonnegative off the base).
    pub fn burn<T: Scalar>(&self, d: &Divisor<T>) -> Burn {
        let n = d.len();
        let mut order = Vec::with_capacity(n);
        let complete = self.burn_pass(&d.coeffs, &mut vec![0; n], &mut vec![false; n], Some(&mut order));
        Burn { order, complete }
    }

    /// True if `d` is base-reduced: nonnegative off the base and fully burning.
    pub fn is_reduced<T: Scalar>(&self, d: &Divisor<T>) -> bool {
        (0..d.len()).all(|v| v == self.base || !d.coeffs[v].is_negative()) && self.burn(d).complete
    }

    /// Whether some effective divisor is equivalent to `d`.
    pub fn has_effective_representative<T: Scalar>(&self, d: &Divisor<T>) -> bool {
        !self.reduce(d).get(self.base).is_negative()
    }
}

/// The unique `q`-reduced divisor equivalent to `d`.
pub fn q_reduce<T: Scalar>(graph: &MultiGraph, d: &Divisor<T>, q: usize) -> Divisor<T> {
    Reducer::new(graph, q).reduce(d)
}

/// Linear equivalence, decided by comparing reduced forms at the first vertex.
pub fn is_equivalent<T: Scalar>(graph: &MultiGraph, a: &Divisor<T>, b: &Divisor<T>) -> bool {
    if a.degree() != b.degree() {
        return false;
    }
    let r = Reducer::new(graph, 0);
    r.reduce(a) == r.reduce(b)
}
