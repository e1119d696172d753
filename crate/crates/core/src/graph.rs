//! Finite connected loopless multigraphs.
//!
//! Vertices are identified by string labels and kept in canonical order (first
//! appearance in the input). Parallel edges are stored by repetition; the edge
//! list order is the input order and is what subdivision labels refer to.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: loop edge at vertex `{label}`")]
    LoopEdge { line: usize, label: String },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    // neighbor index with edge multiplicity, sorted by neighbor
    adjacency: Vec<Vec<(usize, usize)>>,
    degrees: Vec<usize>,
}

impl fmt::Debug for MultiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiGraph")
            .field("vertices", &self.labels)
            .field("edges", &self.edges)
            .finish()
    }
}

impl MultiGraph {
    /// Build a graph from a vertex list and index pairs, validating invariants.
    pub fn from_indexed(labels: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if labels.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        let n = labels.len();
        let mut counts: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n];
        let mut degrees = vec![0; n];
        for (line, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(GraphError::Parameter(format!("edge {line} refers to a missing vertex")));
            }
            if u == v {
                return Err(GraphError::LoopEdge {
                    line: line + 1,
                    label: labels[u].clone(),
                });
            }
            *counts[u].entry(v).or_insert(0) += 1;
            *counts[v].entry(u).or_insert(0) += 1;
            degrees[u] += 1;
            degrees[v] += 1;
        }
        let adjacency = counts
            .into_iter()
            .map(|m| {
                let mut row: Vec<(usize, usize)> = m.into_iter().collect();
                row.sort_unstable();
                row
            })
            .collect();
        let g = MultiGraph {
            labels,
            index,
            edges,
            adjacency,
            degrees,
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    /// Build from labeled edges; vertex order is first appearance.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self, GraphError> {
        let mut labels: Vec<String> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut idx = |s: &str, labels: &mut Vec<String>| -> usize {
            *seen.entry(s.to_string()).or_insert_with(|| {
                labels.push(s.to_string());
                labels.len() - 1
            })
        };
        let mut out = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            let u = idx(a.as_ref(), &mut labels);
            let v = idx(b.as_ref(), &mut labels);
            out.push((u, v));
        }
        Self::from_indexed(labels, out)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require_vertex(&self, label: &str) -> Result<usize, GraphError> {
        self.vertex(label)
            .ok_or_else(|| GraphError::UnknownVertex(label.to_string()))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `v` with edge multiplicities, sorted by neighbor index.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| self.adjacency[u][i].1)
            .unwrap_or(0)
    }

    /// Cyclomatic number |E| - |V| + 1.
    pub fn genus(&self) -> usize {
        self.edges.len() + 1 - self.labels.len()
    }

    pub fn is_tree(&self) -> bool {
        self.genus() == 0
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Breadth-first order from `root`; every vertex after the first has an
    /// earlier neighbor.
    pub fn bfs_order(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.vertex_count()];
        let mut order = Vec::with_capacity(self.vertex_count());
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(w, _) in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Replace each edge by a path of `k` edges.
    ///
    /// Returns the subdivided graph and the map from old vertex indices to new
    /// ones. Old vertices keep their labels and come first; fresh vertices are
    /// labeled `<u>__<v>__<edgeIndex>__<j>`.
    pub fn subdivide(&self, k: usize) -> Result<(MultiGraph, Vec<usize>), GraphError> {
        if k == 0 {
            return Err(GraphError::Parameter("subdivision factor must be at least 1".into()));
        }
        let mut labels = self.labels.clone();
        let mut edges = Vec::with_capacity(self.edge_count() * k);
        for (ei, &(u, v)) in self.edges.iter().enumerate() {
            let mut prev = u;
            for j in 1..k {
                labels.push(format!("{}__{}__{}__{}", self.labels[u], self.labels[v], ei, j));
                let fresh = labels.len() - 1;
                edges.push((prev, fresh));
                prev = fresh;
            }
            edges.push((prev, v));
        }
        let map = (0..self.vertex_count()).collect();
        Ok((MultiGraph::from_indexed(labels, edges)?, map))
    }

    /// Serialize to the edge-list format with a vertex header.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# vertices: {}\n", self.labels.join(" "));
        for &(u, v) in &self.edges {
            s.push_str(&self.labels[u]);
            s.push(' ');
            s.push_str(&self.labels[v]);
            s.push('\n');
        }
        s
    }

    /// True when deleting `v` and its incident edges leaves a tree.
    pub fn residual_is_tree(&self, v: usize) -> bool {
        let n = self.vertex_count();
        if n == 1 {
            return false;
        }
        let remaining_edges = self.edge_count() - self.degree(v);
        if remaining_edges != n - 2 {
            return false;
        }
        let start = if v == 0 { 1 } else { 0 };
        let mut seen = vec![false; n];
        seen[v] = true;
        seen[start] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(w, _) in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n - 1
    }
}

/// A permutation of the vertices of a graph, earliest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrdering(Vec<usize>);

impl VertexOrdering {
    pub fn new(graph: &MultiGraph, order: Vec<usize>) -> Result<Self, GraphError> {
        let n = graph.vertex_count();
        if order.len() != n {
            return Err(GraphError::Parameter(format!(
                "ordering has {} entries, graph has {} vertices",
                order.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(GraphError::Parameter("ordering is not a permutation".into()));
            }
        }
        Ok(VertexOrdering(order))
    }

    pub fn from_labels<S: AsRef<str>>(graph: &MultiGraph, labels: &[S]) -> Result<Self, GraphError> {
        let order = labels
            .iter()
            .map(|l| graph.require_vertex(l.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(graph, order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn labels<'g>(&self, graph: &'g MultiGraph) -> Vec<&'g str> {
        self.0.iter().map(|&v| graph.label(v)).collect()
    }
}

/// Parse the edge-list text format.
///
/// One edge per line as two whitespace-separated labels. Blank lines and `#`
/// comments are skipped, except a `# vertices: a b c` header which fixes the
/// vertex order (and allows a single isolated vertex).
pub fn parse_graph(text: &str) -> Result<MultiGraph, GraphError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut edge_lines = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(header) = comment.trim().strip_prefix("vertices:") {
                for l in header.split_ascii_whitespace() {
                    if index.contains_key(l) {
                        return Err(GraphError::DuplicateVertex(l.to_string()));
                    }
                    index.insert(l.to_string(), labels.len());
                    labels.push(l.to_string());
                }
            }
            continue;
        }
        let tokens = tokenize(raw);
        if tokens.len() != 2 {
            let column = tokens.get(2).map(|t| t.0).unwrap_or(raw.len() + 1);
            return Err(GraphError::Syntax {
                line: line_no,
                column,
                message: format!("expected `<label> <label>`, found {} fields", tokens.len()),
            });
        }
        let mut ends = [0usize; 2];
        for (slot, (_, tok)) in ends.iter_mut().zip(&tokens) {
            *slot = *index.entry(tok.to_string()).or_insert_with(|| {
                labels.push(tok.to_string());
                labels.len() - 1
            });
        }
        if ends[0] == ends[1] {
            return Err(GraphError::LoopEdge {
                line: line_no,
                label: labels[ends[0]].clone(),
            });
        }
        edges.push((ends[0], ends[1]));
        edge_lines.push(line_no);
    }
    MultiGraph::from_indexed(labels, edges)
}

/// Whitespace tokens with their 1-based columns.
pub(crate) fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_ascii_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Named graph families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Complete(usize),
    Banana(usize),
    BananaLengths(Vec<usize>),
    Cycle(usize),
    Path(usize),
}

impl Family {
    /// Parse `complete:4`, `banana:3`, `banana_lengths:2,1,1`, `cycle:5`,
    /// `path:3` (also accepts the `name(args)` form).
    pub fn parse(spec: &str) -> Result<Family, GraphError> {
        let spec = spec.trim();
        let (name, args) = if let Some((n, a)) = spec.split_once(':') {
            (n, a)
        } else if let (Some(open), true) = (spec.find('('), spec.ends_with(')')) {
            (&spec[..open], &spec[open + 1..spec.len() - 1])
        } else {
            return Err(GraphError::Parameter(format!("unrecognized family `{spec}`")));
        };
        let nums = args
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<usize>()
                    .map_err(|_| GraphError::Parameter(format!("bad family parameter `{a}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let one = || -> Result<usize, GraphError> {
            match nums.as_slice() {
                [n] => Ok(*n),
                _ => Err(GraphError::Parameter(format!("`{name}` takes one parameter"))),
            }
        };
        Ok(match name.trim() {
            "complete" => Family::Complete(one()?),
            "banana" => Family::Banana(one()?),
            "banana_lengths" => Family::BananaLengths(nums),
            "cycle" => Family::Cycle(one()?),
            "path" => Family::Path(one()?),
            other => return Err(GraphError::Parameter(format!("unknown family `{other}`"))),
        })
    }

    pub fn build(&self) -> Result<MultiGraph, GraphError> {
        match self {
            Family::Complete(n) => complete(*n),
            Family::Banana(n) => banana(*n),
            Family::BananaLengths(ls) => banana_lengths(ls),
            Family::Cycle(n) => cycle(*n),
            Family::Path(n) => path(*n),
        }
    }
}

fn numbered(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("v{i}")).collect()
}

/// Complete graph on `v1..vn`, n >= 2.
pub fn complete(n: usize) -> Result<MultiGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::Parameter("complete(n) needs n >= 2".into()));
    }
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    MultiGraph::from_indexed(numbered(n), edges)
}

/// Two vertices `Q1`, `Q2` joined by `n` parallel edges.
pub fn banana(n: usize) -> Result<MultiGraph, GraphError> {
    if n < 1 {
        return Err(GraphError::Parameter("banana(n) needs n >= 1 edges".into()));
    }
    MultiGraph::from_indexed(vec!["Q1".into(), "Q2".into()], vec![(0, 1); n])
}

/// Banana graph with the i-th edge subdivided into `lengths[i]` edges.
/// Interior vertices are `R<i>_<j>` in path order from `Q1`.
pub fn banana_lengths(lengths: &[usize]) -> Result<MultiGraph, GraphError> {
    if lengths.is_empty() || lengths.contains(&0) {
        return Err(GraphError::Parameter(
            "banana_lengths needs at least one length, all >= 1".into(),
        ));
    }
    let mut labels = vec!["Q1".to_string(), "Q2".to_string()];
    let mut edges = Vec::new();
    for (i, &l) in lengths.iter().enumerate() {
        let mut prev = 0;
        for j in 1..l {
            labels.push(format!("R{}_{}", i + 1, j));
            let fresh = labels.len() - 1;
            edges.push((prev, fresh));
            prev = fresh;
        }
        edges.push((prev, 1));
    }
    MultiGraph::from_indexed(labels, edges)
}

/// Cycle `v1 - v2 - ... - vn - v1`, n >= 2 (n = 2 is a doubled edge).
pub fn cycle(n: usize) -> Result<MultiGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::Parameter("cycle(n) needs n >= 2".into()));
    }
    let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
    MultiGraph::from_indexed(numbered(n), edges)
}

/// Path `v1 - v2 - ... - vn`, n >= 1.
pub fn path(n: usize) -> Result<MultiGraph, GraphError> {
    if n < 1 {
        return Err(GraphError::Parameter("path(n) needs n >= 1".into()));
    }
    let edges = (1..n).map(|i| (i - 1, i)).collect();
    MultiGraph::from_indexed(numbered(n), edges)
}

/// The dual graph of the plane-quartic reduction: `P` (conic), `Q1`, `Q2`
/// (lines) and `P'` (exceptional curve).
pub fn quartic_dual_graph() -> MultiGraph {
    MultiGraph::from_edges(&[
        ("P", "Q1"),
        ("P", "Q1"),
        ("P", "Q2"),
        ("P", "Q2"),
        ("Q1", "P'"),
        ("Q2", "P'"),
    ])
    .expect("fixture graph is valid")
}
