use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};

use num::{BigRational, Signed, ToPrimitive, Zero};
use rand::Rng;

use super::{TesterVerdict, Witness};
use crate::config::TesterConfig;
use crate::embed::Matcher;
use crate::error::{Error, Result};
use crate::graph::{BoundedDigraph, Vertex};
use crate::oracle::{NeighborOracle, OracleSession, QueryModel};
use crate::pattern::PatternDecomposition;
use crate::seed::{rng_for, Stream};

/// Reads the out-list of `v` by scanning indices `1..=d` until `None`.
pub fn read_out_list<G: NeighborOracle>(session: &mut OracleSession<G>, v: Vertex) -> Result<Vec<Vertex>> {
    let mut list = Vec::new();
    for i in 1..=session.degree_bound() {
        match session.out_neighbor(v, i)? {
            Some(w) => list.push(w),
            None => break,
        }
    }
    Ok(list)
}

fn read_in_list<G: NeighborOracle>(session: &mut OracleSession<G>, v: Vertex) -> Result<Vec<Vertex>> {
    let mut list = Vec::new();
    for i in 1..=session.degree_bound() {
        match session.in_neighbor(v, i)? {
            Some(w) => list.push(w),
            None => break,
        }
    }
    Ok(list)
}

/// The part of the host graph seen so far, relabelled to `1..=len`.
#[derive(Debug, Default)]
struct Explored {
    local: HashMap<Vertex, Vertex>,
    global: Vec<Vertex>,
    edges: Vec<(Vertex, Vertex)>,
}

impl Explored {
    fn id(&mut self, v: Vertex) -> Vertex {
        if let Some(&id) = self.local.get(&v) {
            return id;
        }
        self.global.push(v);
        let id = self.global.len();
        self.local.insert(v, id);
        id
    }

    fn add_edge(&mut self, u: Vertex, v: Vertex) {
        let (a, b) = (self.id(u), self.id(v));
        self.edges.push((a, b));
    }

    /// An embedding of `matcher`'s pattern in the seen subgraph, in host ids.
    fn find(&self, matcher: &Matcher<'_>, d: usize) -> Result<Option<Vec<Vertex>>> {
        let g = BoundedDigraph::new(self.global.len(), d, self.edges.iter().copied())?;
        Ok(matcher
            .find_embedding(&g)
            .map(|img| img.iter().map(|&x| self.global[x - 1]).collect()))
    }
}

fn eps_to_f64(eps: &BigRational) -> Result<f64> {
    if eps.is_negative() {
        return Err(Error::NegativeEpsilon(eps.clone()));
    }
    if eps.is_zero() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    eps.to_f64()
        .ok_or_else(|| Error::InvalidArgument("eps out of range".into()))
}

fn radius(cfg: &TesterConfig, dec: &PatternDecomposition) -> usize {
    if cfg.bfs_radius == 0 {
        dec.pattern().vertex_count()
    } else {
        cfg.bfs_radius
    }
}

/// Samples `ceil(c_bi / eps)` vertices and explores the radius-`|V(H)|` ball
/// around each along both edge directions. Rejects as soon as the explored
/// part contains a copy of the pattern.
pub fn bidirectional_hfree_tester<G: NeighborOracle>(
    session: &mut OracleSession<G>,
    dec: &PatternDecomposition,
    eps: &BigRational,
    cfg: &TesterConfig,
    seed: u64,
) -> Result<TesterVerdict> {
    if session.model() != QueryModel::Bidirectional {
        return Err(Error::ModelViolation);
    }
    let eps = eps_to_f64(eps)?;
    let n = session.vertex_count();
    if n == 0 {
        return Ok(TesterVerdict::accept(0));
    }
    let matcher = Matcher::new(dec.pattern())?;
    let d = session.degree_bound();
    let r = radius(cfg, dec);
    let samples = (cfg.c_bi / eps).ceil().max(1.0) as usize;
    let mut rng = rng_for(seed, Stream::Tester, 0);
    let mut adjacency: HashMap<Vertex, (Vec<Vertex>, Vec<Vertex>)> = HashMap::new();
    let mut seen = Explored::default();
    for _ in 0..samples {
        let start = rng.random_range(1..=n);
        let mut dist = HashMap::from([(start, 0usize)]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            if dv >= r {
                continue;
            }
            if let Entry::Vacant(e) = adjacency.entry(v) {
                let outs = read_out_list(session, v)?;
                let ins = read_in_list(session, v)?;
                for &w in &outs {
                    seen.add_edge(v, w);
                }
                for &u in &ins {
                    seen.add_edge(u, v);
                }
                e.insert((outs, ins));
            }
            let (outs, ins) = &adjacency[&v];
            for &w in outs.iter().chain(ins) {
                if let Entry::Vacant(e) = dist.entry(w) {
                    e.insert(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        if let Some(map) = seen.find(&matcher, d)? {
            return Ok(TesterVerdict::reject(session.query_count(), Witness::Embedding(map)));
        }
    }
    Ok(TesterVerdict::accept(session.query_count()))
}

/// Samples vertices uniformly and reads their out-lists, following out-edges
/// up to depth `|V(H)|`, until `budget` queries are spent. Rejects iff the
/// collected subgraph contains a copy of the pattern.
pub fn unidirectional_hfree_tester<G: NeighborOracle>(
    session: &mut OracleSession<G>,
    dec: &PatternDecomposition,
    budget: u64,
    cfg: &TesterConfig,
    seed: u64,
) -> Result<TesterVerdict> {
    if session.model() != QueryModel::Unidirectional {
        return Err(Error::ModelViolation);
    }
    let n = session.vertex_count();
    let matcher = Matcher::new(dec.pattern())?;
    let d = session.degree_bound();
    let r = radius(cfg, dec);
    let mut rng = rng_for(seed, Stream::Tester, 1);
    let mut read: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    let mut seen = Explored::default();
    let spent = |s: &OracleSession<G>| s.query_count();
    'outer: while n > 0 && read.len() < n && spent(session) < budget {
        let start = rng.random_range(1..=n);
        let mut dist = HashMap::from([(start, 0usize)]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            if let Entry::Vacant(e) = read.entry(v) {
                let mut outs = Vec::new();
                for i in 1..=d {
                    if spent(session) >= budget {
                        for &w in &outs {
                            seen.add_edge(v, w);
                        }
                        break 'outer;
                    }
                    match session.out_neighbor(v, i)? {
                        Some(w) => outs.push(w),
                        None => break,
                    }
                }
                for &w in &outs {
                    seen.add_edge(v, w);
                }
                e.insert(outs);
            }
            if dv + 1 >= r {
                continue;
            }
            for &w in &read[&v] {
                if let Entry::Vacant(e) = dist.entry(w) {
                    e.insert(dv + 1);
                    queue.push_back(w);
                }
            }
        }
    }
    let used = spent(session);
    Ok(match seen.find(&matcher, d)? {
        Some(map) => TesterVerdict::reject(used, Witness::Embedding(map)),
        None => TesterVerdict::accept(used),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::patterns::{star, three_source_example};

    fn eps(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn bidirectional_finds_star() {
        let h = star(3);
        let dec = PatternDecomposition::new(&h).unwrap();
        let host = star(3).disjoint_union(&star(2)).unwrap();
        let mut session = OracleSession::new(&host, QueryModel::Bidirectional);
        let v = bidirectional_hfree_tester(&mut session, &dec, &eps(1, 2), &TesterConfig::default(), 1).unwrap();
        assert!(v.rejected());
        assert_eq!(v.queries_used, session.query_count());
        assert!(v.witness_valid_in_graph(&host, &h));
    }

    #[test]
    fn bidirectional_accepts_free_graph() {
        let h = star(3);
        let dec = PatternDecomposition::new(&h).unwrap();
        let host = star(2).disjoint_union(&star(2)).unwrap();
        for seed in 0..10 {
            let mut session = OracleSession::new(&host, QueryModel::Bidirectional);
            let v = bidirectional_hfree_tester(&mut session, &dec, &eps(1, 4), &TesterConfig::default(), seed).unwrap();
            assert!(!v.rejected());
        }
    }

    #[test]
    fn model_checks() {
        let h = three_source_example();
        let dec = PatternDecomposition::new(&h).unwrap();
        let cfg = TesterConfig::default();
        let mut uni = OracleSession::new(&h, QueryModel::Unidirectional);
        assert!(matches!(
            bidirectional_hfree_tester(&mut uni, &dec, &eps(1, 4), &cfg, 0),
            Err(Error::ModelViolation)
        ));
        let mut bi = OracleSession::new(&h, QueryModel::Bidirectional);
        assert!(matches!(
            unidirectional_hfree_tester(&mut bi, &dec, 10, &cfg, 0),
            Err(Error::ModelViolation)
        ));
        let mut bi = OracleSession::new(&h, QueryModel::Bidirectional);
        assert!(bidirectional_hfree_tester(&mut bi, &dec, &eps(0, 1), &cfg, 0).is_err());
    }

    #[test]
    fn unidirectional_respects_budget() {
        let h = star(3);
        let dec = PatternDecomposition::new(&h).unwrap();
        let host = star(3);
        let cfg = TesterConfig::default();
        for budget in [0, 1, 3, 7, 100] {
            let mut session = OracleSession::new(&host, QueryModel::Unidirectional);
            let v = unidirectional_hfree_tester(&mut session, &dec, budget, &cfg, 5).unwrap();
            assert!(v.queries_used <= budget);
            assert_eq!(v.queries_used, session.query_count());
            if budget == 100 {
                assert!(v.rejected());
                assert!(v.witness_valid_in_graph(&host, &h));
            }
        }
    }

    #[test]
    fn unidirectional_stops_when_everything_is_read() {
        let h = star(3);
        let dec = PatternDecomposition::new(&h).unwrap();
        let host = star(2);
        let mut session = OracleSession::new(&host, QueryModel::Unidirectional);
        let v = unidirectional_hfree_tester(&mut session, &dec, 1_000_000, &TesterConfig::default(), 2).unwrap();
        assert!(!v.rejected());
        assert!(v.queries_used <= 3 * 4);
    }
}
