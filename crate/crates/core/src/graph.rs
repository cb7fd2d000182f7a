//! Degree-bounded directed graphs and their edge-list text format.
//!
//! Vertices are named `1..=n`. Both adjacency directions are stored and kept
//! sorted ascending, which fixes what "the i-th neighbor" means for every
//! oracle built on top of a graph.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A vertex name, 1-based.
pub type Vertex = usize;

/// A digraph whose in- and out-degrees are all at most `d`.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedDigraph {
    d: usize,
    out_adj: Vec<Vec<Vertex>>,
    in_adj: Vec<Vec<Vertex>>,
}

impl BoundedDigraph {
    /// Validates and builds a graph. Duplicate edges are merged.
    pub fn new(n: usize, d: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(Error::BadVertexIndex { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            out_adj[u - 1].push(v);
            in_adj[v - 1].push(u);
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        for (i, (outs, ins)) in out_adj.iter().zip(&in_adj).enumerate() {
            if outs.len() > d || ins.len() > d {
                return Err(Error::DegreeBoundViolated {
                    vertex: i + 1,
                    bound: d,
                });
            }
        }
        Ok(BoundedDigraph { d, out_adj, in_adj })
    }

    /// A graph on `n` vertices with no edges.
    pub fn empty(n: usize, d: usize) -> Self {
        BoundedDigraph {
            d,
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.d
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    /// Sorted out-neighbors of `v`. Panics if `v` is out of range.
    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.out_adj[v - 1]
    }

    /// Sorted in-neighbors of `v`. Panics if `v` is out of range.
    pub fn in_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.in_adj[v - 1]
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.out_adj[u - 1].binary_search(&v).is_ok()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.vertex_count()
    }

    /// All edges in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(i, outs)| outs.iter().map(move |&v| (i + 1, v)))
    }

    /// Largest in- or out-degree actually present.
    pub fn max_degree(&self) -> usize {
        self.out_adj
            .iter()
            .chain(&self.in_adj)
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v == 0 || v > self.vertex_count() {
            Err(Error::BadVertexIndex {
                vertex: v,
                n: self.vertex_count(),
            })
        } else {
            Ok(())
        }
    }

    /// Disjoint union; vertices of `other` are shifted by `self.vertex_count()`.
    pub fn disjoint_union(&self, other: &BoundedDigraph) -> Result<BoundedDigraph> {
        let shift = self.vertex_count();
        let edges = self
            .edges()
            .chain(other.edges().map(|(u, v)| (u + shift, v + shift)));
        BoundedDigraph::new(
            shift + other.vertex_count(),
            self.d.max(other.d),
            edges.collect::<Vec<_>>(),
        )
    }

    /// Serializes to the edge-list format: `n m d`, then one `u v` per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {} {}\n", self.vertex_count(), self.edge_count(), self.d);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list format. Edges may appear in any order.
    pub fn parse_edge_list(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing `n m d` header"))?;
        let head = parse_numbers(header, origin, hline)?;
        let [n, m, d] = head[..] else {
            return Err(Error::parse(origin, hline, "header must be `n m d`"));
        };
        let mut edges = Vec::with_capacity(m);
        for (lineno, line) in lines {
            let nums = parse_numbers(line, origin, lineno)?;
            let [u, v] = nums[..] else {
                return Err(Error::parse(origin, lineno, "edge line must be `u v`"));
            };
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::parse(
                origin,
                hline,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        BoundedDigraph::new(n, d, edges)
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text, &path.display().to_string())
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn parse_numbers(line: &str, origin: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|e| Error::parse(origin, lineno, format!("bad integer `{tok}`: {e}")))
        })
        .collect()
}

/// Small named digraphs used throughout tests and experiments.
pub mod patterns {
    use super::BoundedDigraph;

    /// The seven-vertex pattern with three source components
    /// `{1}`, `{3,4,5}`, `{6}` feeding the center `{2,7}`.
    pub fn three_source_example() -> BoundedDigraph {
        BoundedDigraph::new(
            7,
            3,
            [(1, 2), (4, 3), (3, 2), (6, 7), (7, 2), (3, 5), (5, 4)],
        )
        .expect("valid pattern")
    }

    /// `k` leaves `1..=k`, each with one edge into the center `k+1`.
    pub fn star(k: usize) -> BoundedDigraph {
        BoundedDigraph::new(k + 1, k, (1..=k).map(|leaf| (leaf, k + 1))).expect("valid star")
    }

    /// Directed cycle `1 -> 2 -> ... -> n -> 1`.
    pub fn cycle(n: usize) -> BoundedDigraph {
        BoundedDigraph::new(n, 1, (1..=n).map(|v| (v, v % n + 1))).expect("valid cycle")
    }
}
