//! Undirected simple graphs: the problem instance and the radio topology.
//!
//! A [`Graph`] keeps two views of the same adjacency: a dense indicator
//! matrix for the energy sums over `e_ij`, and sorted neighbor lists for
//! traversal and simulation. Both are built together and never mutated.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::rng::seeded;

pub mod corpus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange {
        line: usize,
        vertex: usize,
        n: usize,
    },
    #[error("vertex {vertex} out of range for n = {n}")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("graph needs at least one vertex")]
    Empty,
    #[error("expected {expected} positions, got {got}")]
    PositionCount { expected: usize, got: usize },
}

/// A point in the deployment plane (dimensionless units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Undirected graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    matrix: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    positions: Option<Vec<Point>>,
}

impl Graph {
    /// Builds a graph from an edge iterator. Duplicate and reversed edges
    /// collapse into one undirected edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut matrix = vec![false; n * n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::InvalidVertex { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            matrix[u * n + v] = true;
            matrix[v * n + u] = true;
        }
        Ok(Self::from_matrix(n, matrix))
    }

    fn from_matrix(n: usize, matrix: Vec<bool>) -> Self {
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| matrix[i * n + j]).collect())
            .collect();
        Self {
            n,
            matrix,
            neighbors,
            positions: None,
        }
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_matrix(n, vec![false; n * n])
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    /// Star `K_{1,leaves}` with the center at vertex 0.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).expect("valid star")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_edges(n, edges).expect("valid complete graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Indicator `e_ij`.
    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.matrix[i * self.n + j]
    }

    /// Sorted neighbor list of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors[u]
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn positions(&self) -> Option<&[Point]> {
        self.positions.as_deref()
    }

    /// Attaches planar coordinates, one per vertex.
    pub fn with_positions(mut self, positions: Vec<Point>) -> Result<Self, GraphError> {
        if positions.len() != self.n {
            return Err(GraphError::PositionCount {
                expected: self.n,
                got: positions.len(),
            });
        }
        self.positions = Some(positions);
        Ok(self)
    }

    /// Vertices at most two hops from `v`, excluding `v`, sorted.
    pub fn within_two_hops(&self, v: usize) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for &j in self.neighbors(v) {
            out.insert(j);
            out.extend(self.neighbors(j).iter().copied());
        }
        out.remove(&v);
        out.into_iter().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_in_graph(&VertexSet::full(self.n))
    }

    pub fn check_set(&self, s: &VertexSet) -> Result<(), GraphError> {
        match s.iter().find(|&v| v >= self.n) {
            Some(v) => Err(GraphError::InvalidVertex {
                vertex: v,
                n: self.n,
            }),
            None => Ok(()),
        }
    }

    /// Every vertex outside `s` has at least one neighbor in `s`.
    pub fn is_dominating_set(&self, s: &VertexSet) -> bool {
        let member = s.membership(self.n);
        (0..self.n).all(|v| member[v] || self.neighbors(v).iter().any(|&u| member[u]))
    }

    /// The subgraph induced by `s` is connected. Empty and singleton sets
    /// count as connected.
    pub fn is_connected_in_graph(&self, s: &VertexSet) -> bool {
        let Some(start) = s.iter().next() else {
            return true;
        };
        let member = s.membership(self.n);
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                if member[u] && !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == s.len()
    }

    /// `s` is independent and every vertex outside it has exactly one
    /// neighbor inside it. These are the binary zeros of the domination
    /// energy.
    pub fn is_independent_perfect_dominating(&self, s: &VertexSet) -> bool {
        let member = s.membership(self.n);
        (0..self.n).all(|v| {
            let active = self.neighbors(v).iter().filter(|&&u| member[u]).count();
            if member[v] {
                active == 0
            } else {
                active == 1
            }
        })
    }

    /// Canonical edge-list text: `n <count>` then sorted `u v` lines, `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list format written by [`Graph::to_edge_list`].
    /// Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (header_line, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            message: "missing `n <count>` header".into(),
        })?;
        let mut parts = header.split_whitespace();
        let n = match (parts.next(), parts.next(), parts.next()) {
            (Some("n"), Some(count), None) => {
                count.parse::<usize>().map_err(|e| GraphError::Parse {
                    line: header_line,
                    message: format!("bad vertex count `{count}`: {e}"),
                })?
            }
            _ => {
                return Err(GraphError::Parse {
                    line: header_line,
                    message: format!("expected `n <count>`, got `{header}`"),
                })
            }
        };

        let mut edges = Vec::new();
        for (line, content) in lines {
            let fields: Vec<&str> = content.split_whitespace().collect();
            let [a, b] = fields.as_slice() else {
                return Err(GraphError::Parse {
                    line,
                    message: format!("expected `u v`, got `{content}`"),
                });
            };
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| GraphError::Parse {
                    line,
                    message: format!("bad vertex index `{s}`: {e}"),
                })
            };
            let (u, v) = (parse(a)?, parse(b)?);
            for vertex in [u, v] {
                if vertex >= n {
                    return Err(GraphError::VertexOutOfRange { line, vertex, n });
                }
            }
            if u == v {
                return Err(GraphError::Parse {
                    line,
                    message: format!("self-loop on vertex {u}"),
                });
            }
            edges.push((u, v));
        }
        Self::from_edges(n, edges)
    }

    /// Unit-disk graph: an edge joins two distinct points iff their distance
    /// is at most `radius`.
    pub fn unit_disk(positions: Vec<Point>, radius: f64) -> Result<Self, GraphError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GraphError::InvalidRadius(radius));
        }
        if positions.is_empty() {
            return Err(GraphError::Empty);
        }
        let n = positions.len();
        let mut matrix = vec![false; n * n];
        for i in 0..n {
            for j in i + 1..n {
                if positions[i].distance(&positions[j]) <= radius {
                    matrix[i * n + j] = true;
                    matrix[j * n + i] = true;
                }
            }
        }
        Self::from_matrix(n, matrix).with_positions(positions)
    }

    /// `n` points uniform on the unit square, joined by the unit-disk rule.
    pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut rng = seeded(seed);
        let points = (0..n)
            .map(|_| Point::new(rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        Self::unit_disk(points, radius)
    }
}

/// A set of vertex indices, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let set: BTreeSet<usize> = members.into_iter().collect();
        Self(set.into_iter().collect())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Members are the set bits of `mask`.
    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|b| mask >> b & 1 == 1).collect())
    }

    /// Vertices whose output reads as active. An output of exactly `0.5`
    /// reads as inactive.
    pub fn from_indicator(z: &[f64]) -> Self {
        Self(
            z.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.5)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// 0/1 indicator vector of length `n`.
    pub fn indicator(&self, n: usize) -> Vec<f64> {
        let mut z = vec![0.0; n];
        for v in self.iter() {
            z[v] = 1.0;
        }
        z
    }

    fn membership(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for v in self.iter() {
            m[v] = true;
        }
        m
    }
}

impl std::fmt::Display for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let items: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", items.join(" "))
    }
}
