//! Query-metered access to a graph in the unidirectional or bidirectional
//! model.

use crate::error::{Error, Result};
use crate::graph::{BoundedDigraph, Vertex};

/// Which edge directions a tester may ask about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryModel {
    /// Only outgoing edges can be queried.
    Unidirectional,
    /// Both outgoing and incoming edges can be queried.
    Bidirectional,
}

/// Anything that can answer neighbor queries about a (possibly virtual)
/// degree-bounded digraph. Indices `i` are 1-based; `Ok(None)` means `i`
/// exceeds the degree.
pub trait NeighborOracle {
    fn vertex_count(&self) -> usize;
    fn degree_bound(&self) -> usize;
    fn out_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>>;
    fn out_degree(&mut self, v: Vertex) -> Result<usize>;

    fn in_neighbor(&mut self, _v: Vertex, _i: usize) -> Result<Option<Vertex>> {
        Err(Error::Unsupported("in-neighbor queries"))
    }
}

impl NeighborOracle for &BoundedDigraph {
    fn vertex_count(&self) -> usize {
        BoundedDigraph::vertex_count(self)
    }

    fn degree_bound(&self) -> usize {
        BoundedDigraph::degree_bound(self)
    }

    fn out_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        self.check_vertex(v)?;
        Ok(nth(self.out_neighbors(v), i))
    }

    fn out_degree(&mut self, v: Vertex) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.out_neighbors(v).len())
    }

    fn in_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        self.check_vertex(v)?;
        Ok(nth(self.in_neighbors(v), i))
    }
}

impl<T: NeighborOracle + ?Sized> NeighborOracle for &mut T {
    fn vertex_count(&self) -> usize {
        (**self).vertex_count()
    }

    fn degree_bound(&self) -> usize {
        (**self).degree_bound()
    }

    fn out_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        (**self).out_neighbor(v, i)
    }

    fn out_degree(&mut self, v: Vertex) -> Result<usize> {
        (**self).out_degree(v)
    }

    fn in_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        (**self).in_neighbor(v, i)
    }
}

fn nth(list: &[Vertex], i: usize) -> Option<Vertex> {
    i.checked_sub(1).and_then(|idx| list.get(idx)).copied()
}

/// A metered view of an oracle under a fixed query model.
///
/// Every successful neighbor or degree query costs exactly one unit, including
/// queries answered with `None`. Rejected queries cost nothing.
#[derive(Debug)]
pub struct OracleSession<G> {
    graph: G,
    model: QueryModel,
    query_count: u64,
}

impl<G: NeighborOracle> OracleSession<G> {
    pub fn new(graph: G, model: QueryModel) -> Self {
        OracleSession {
            graph,
            model,
            query_count: 0,
        }
    }

    pub fn model(&self) -> QueryModel {
        self.model
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn degree_bound(&self) -> usize {
        self.graph.degree_bound()
    }

    pub fn out_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        let ans = self.graph.out_neighbor(v, i)?;
        self.query_count += 1;
        Ok(ans)
    }

    pub fn in_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        if self.model == QueryModel::Unidirectional {
            return Err(Error::ModelViolation);
        }
        let ans = self.graph.in_neighbor(v, i)?;
        self.query_count += 1;
        Ok(ans)
    }

    pub fn out_degree(&mut self, v: Vertex) -> Result<usize> {
        let deg = self.graph.out_degree(v)?;
        self.query_count += 1;
        Ok(deg)
    }

    pub fn into_inner(self) -> G {
        self.graph
    }

    pub fn inner(&self) -> &G {
        &self.graph
    }
}
