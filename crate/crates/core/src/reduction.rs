//! From a sequence with occurrence cap `k` to an `H`-freeness instance.
//!
//! The graph has `n` center copies of `C_0` and `n` source blocks of `n_comp`
//! vertices. Position `a` holding value `b` turns its block into a copy of
//! some source component `C_t'` wired into center copy `b`. The `k`
//! positions of a value receive distinct types `t`, so a value occurring
//! exactly `k` times completes one copy of `H` and nothing else does.
//!
//! Types are drawn without replacement per value. The draw for the `r`-th
//! occurrence of `b` (in position order) is entry `r` of a random permutation
//! of `1..=k` seeded by `(seed, b)`, so the lazy oracle and the offline build
//! agree no matter in which order positions are touched.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num::{BigInt, BigRational, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{BoundedDigraph, Vertex};
use crate::occurrence::IntSequence;
use crate::oracle::NeighborOracle;
use crate::pattern::PatternDecomposition;
use crate::seed::{derive_seed, rng_for, Stream};

/// Position-metered read access to a sequence.
pub trait SequenceAccess {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at 1-based position `a`. Costs one query.
    fn query(&mut self, a: usize) -> usize;

    /// How many earlier positions hold the same value as `a`. Free: it is
    /// bookkeeping for the type draw, not information handed to a tester.
    fn occurrence_rank(&self, a: usize) -> usize;

    fn query_count(&self) -> u64;

    /// Occurrence cap of the underlying sequence.
    fn cap(&self) -> usize;
}

/// A [`SequenceAccess`] over an in-memory sequence.
#[derive(Debug, Clone)]
pub struct MeteredSequence<'s> {
    seq: &'s IntSequence,
    ranks: Vec<u32>,
    queries: u64,
}

impl<'s> MeteredSequence<'s> {
    pub fn new(seq: &'s IntSequence) -> Self {
        MeteredSequence {
            seq,
            ranks: seq.occurrence_ranks(),
            queries: 0,
        }
    }

    pub fn sequence(&self) -> &'s IntSequence {
        self.seq
    }
}

impl SequenceAccess for MeteredSequence<'_> {
    fn len(&self) -> usize {
        self.seq.len()
    }

    fn query(&mut self, a: usize) -> usize {
        self.queries += 1;
        self.seq.get(a)
    }

    fn occurrence_rank(&self, a: usize) -> usize {
        self.ranks[a - 1] as usize
    }

    fn query_count(&self) -> u64 {
        self.queries
    }

    fn cap(&self) -> usize {
        self.seq.cap()
    }
}

impl<T: SequenceAccess + ?Sized> SequenceAccess for &mut T {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn query(&mut self, a: usize) -> usize {
        (**self).query(a)
    }

    fn occurrence_rank(&self, a: usize) -> usize {
        (**self).occurrence_rank(a)
    }

    fn query_count(&self) -> u64 {
        (**self).query_count()
    }

    fn cap(&self) -> usize {
        (**self).cap()
    }
}

/// Vertex layout of the reduced graph.
///
/// Source part: `1..=n*n_comp`, position `a` owning
/// `(a-1)*n_comp + 1 ..= a*n_comp`. Center part: copy `j` owning
/// `n*n_comp + (j-1)*n_center + 1 ..= n*n_comp + j*n_center`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedIndexing {
    pub n: usize,
    pub n_comp: usize,
    pub n_center: usize,
}

impl ReducedIndexing {
    pub fn vertex_count(&self) -> usize {
        self.n * (self.n_comp + self.n_center)
    }

    pub fn source_part_end(&self) -> usize {
        self.n * self.n_comp
    }

    pub fn is_source(&self, v: Vertex) -> bool {
        v <= self.source_part_end()
    }

    /// Position owning source vertex `v`: `ceil(v / n_comp)`.
    pub fn position_of(&self, v: Vertex) -> usize {
        v.div_ceil(self.n_comp)
    }

    /// 1-based offset of `v` inside its block.
    pub fn source_local(&self, v: Vertex) -> usize {
        (v - 1) % self.n_comp + 1
    }

    /// 1-based offset of center vertex `v` inside its copy of `C_0`.
    pub fn center_local(&self, v: Vertex) -> usize {
        (v - self.source_part_end() - 1) % self.n_center + 1
    }

    pub fn center_copy_of(&self, v: Vertex) -> usize {
        (v - self.source_part_end() - 1) / self.n_center + 1
    }

    pub fn source_vertex(&self, a: usize, local: usize) -> Vertex {
        (a - 1) * self.n_comp + local
    }

    pub fn center_vertex(&self, copy: usize, local: usize) -> Vertex {
        self.source_part_end() + (copy - 1) * self.n_center + local
    }
}

/// The type assigned to the `rank`-th occurrence (0-based) of `value`, or
/// `None` once all `k` types are used up.
pub fn drawn_type(seed: u64, value: usize, rank: usize, k: usize) -> Option<usize> {
    if rank >= k {
        return None;
    }
    let mut types: Vec<usize> = (1..=k).collect();
    let mut rng = rng_for(seed, Stream::TypeDraw, value as u64);
    // Partial Fisher-Yates: only the first rank + 1 slots are needed.
    for i in 0..=rank {
        let j = rng.random_range(i..k);
        types.swap(i, j);
    }
    Some(types[rank])
}

/// Out-neighbors of every `H'` vertex, ordered the way they appear in the
/// reduced graph: same-block targets first, then center targets. Both
/// groups keep ascending `H'` order because the block and center maps are
/// monotone, so position `i` here is the reduced graph's `i`-th neighbor.
fn neighbor_plan(dec: &PatternDecomposition) -> Vec<Vec<Vertex>> {
    let h = &dec.padded;
    let mut plan = vec![Vec::new(); h.vertex_count() + 1];
    for v in h.vertices() {
        let (center, block): (Vec<Vertex>, Vec<Vertex>) = h
            .out_neighbors(v)
            .iter()
            .partition(|&&w| w <= dec.n_center());
        plan[v] = block.into_iter().chain(center).collect();
    }
    plan
}

/// A virtual reduced graph answering out-neighbor queries on demand, each
/// with at most one sequence query.
#[derive(Debug)]
pub struct ReductionOracle<'d, S> {
    dec: &'d PatternDecomposition,
    layout: ReducedIndexing,
    seq: S,
    seed: u64,
    plan: Vec<Vec<Vertex>>,
    /// `T`: type of each position, 0 while unassigned.
    types: Vec<u16>,
    /// Value read at each position, valid where `types` is nonzero.
    values: Vec<usize>,
    /// `R_b`: types still available for each value seen so far.
    remaining: HashMap<usize, Vec<usize>>,
}

impl<'d, S: SequenceAccess> ReductionOracle<'d, S> {
    pub fn new(seq: S, dec: &'d PatternDecomposition, seed: u64) -> Self {
        let n = seq.len();
        ReductionOracle {
            dec,
            layout: ReducedIndexing {
                n,
                n_comp: dec.n_comp(),
                n_center: dec.n_center(),
            },
            seq,
            seed,
            plan: neighbor_plan(dec),
            types: vec![0; n],
            values: vec![0; n],
            remaining: HashMap::new(),
        }
    }

    pub fn layout(&self) -> ReducedIndexing {
        self.layout
    }

    pub fn sequence_queries(&self) -> u64 {
        self.seq.query_count()
    }

    /// `T` as assigned so far (0 = untouched).
    pub fn types(&self) -> Vec<usize> {
        self.types.iter().map(|&t| t as usize).collect()
    }

    pub fn remaining_types(&self, value: usize) -> Option<&[usize]> {
        self.remaining.get(&value).map(Vec::as_slice)
    }

    pub fn into_sequence(self) -> S {
        self.seq
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if v == 0 || v > self.layout.vertex_count() {
            Err(Error::BadVertexIndex {
                vertex: v,
                n: self.layout.vertex_count(),
            })
        } else {
            Ok(())
        }
    }

    /// `(value, type)` for position `a`, reading the sequence on first touch.
    fn resolve(&mut self, a: usize) -> Result<(usize, usize)> {
        if self.types[a - 1] != 0 {
            return Ok((self.values[a - 1], self.types[a - 1] as usize));
        }
        let b = self.seq.query(a);
        let n = self.layout.n;
        if b > n {
            return Err(Error::ValueOutOfRange { value: b, position: a, n });
        }
        let k = self.dec.k();
        let rank = self.seq.occurrence_rank(a);
        let t = drawn_type(self.seed, b, rank, k)
            .ok_or(Error::OccurrenceCapExceeded { value: b, cap: k })?;
        let left = self
            .remaining
            .entry(b)
            .or_insert_with(|| (1..=k).collect());
        left.retain(|&x| x != t);
        self.types[a - 1] = t as u16;
        self.values[a - 1] = b;
        Ok((b, t))
    }

    /// The `i`-th out-neighbor of `v` in the reduced graph.
    pub fn reduced_out_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        self.check(v)?;
        let layout = self.layout;
        if !layout.is_source(v) {
            let local = layout.center_local(v);
            return Ok(nth(&self.plan[local], i).map(|w| v - local + w));
        }
        let a = layout.position_of(v);
        let (b, t) = self.resolve(a)?;
        let local = layout.source_local(v);
        let start = self.dec.block_start(t);
        let h_vertex = start + local - 1;
        Ok(nth(&self.plan[h_vertex], i).map(|w| {
            if w <= self.dec.n_center() {
                layout.center_vertex(b, w)
            } else {
                v - local + (w - start + 1)
            }
        }))
    }

    pub fn reduced_out_degree(&mut self, v: Vertex) -> Result<usize> {
        self.check(v)?;
        let layout = self.layout;
        if !layout.is_source(v) {
            return Ok(self.plan[layout.center_local(v)].len());
        }
        let (_, t) = self.resolve(layout.position_of(v))?;
        Ok(self.plan[self.dec.block_start(t) + layout.source_local(v) - 1].len())
    }
}

fn nth(list: &[Vertex], i: usize) -> Option<Vertex> {
    i.checked_sub(1).and_then(|idx| list.get(idx)).copied()
}

impl<S: SequenceAccess> NeighborOracle for ReductionOracle<'_, S> {
    fn vertex_count(&self) -> usize {
        self.layout.vertex_count()
    }

    fn degree_bound(&self) -> usize {
        self.dec.pattern().degree_bound()
    }

    fn out_neighbor(&mut self, v: Vertex, i: usize) -> Result<Option<Vertex>> {
        self.reduced_out_neighbor(v, i)
    }

    fn out_degree(&mut self, v: Vertex) -> Result<usize> {
        self.reduced_out_degree(v)
    }
}

/// A materialized reduced graph and the types assigned to its positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfflineReduction {
    pub graph: BoundedDigraph,
    pub types: Vec<usize>,
    pub seed: u64,
}

impl OfflineReduction {
    /// Replay sidecar: the seed and the full `T` array.
    pub fn sidecar(&self) -> String {
        let ts: Vec<String> = self.types.iter().map(|t| t.to_string()).collect();
        let mut out = String::new();
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "n {}", self.types.len());
        let _ = writeln!(out, "T {}", ts.join(" "));
        out
    }
}

/// Builds the whole reduced graph for `s`.
pub fn build_offline(s: &IntSequence, dec: &PatternDecomposition, seed: u64) -> Result<OfflineReduction> {
    let n = s.len();
    let k = dec.k();
    let layout = ReducedIndexing {
        n,
        n_comp: dec.n_comp(),
        n_center: dec.n_center(),
    };
    let h = &dec.padded;
    let n_center = dec.n_center();
    let mut edges = Vec::new();
    let center_edges: Vec<(Vertex, Vertex)> = h
        .edges()
        .filter(|&(x, y)| x <= n_center && y <= n_center)
        .collect();
    for copy in 1..=n {
        edges.extend(
            center_edges
                .iter()
                .map(|&(x, y)| (layout.center_vertex(copy, x), layout.center_vertex(copy, y))),
        );
    }
    let ranks = s.occurrence_ranks();
    let mut types = Vec::with_capacity(n);
    for a in 1..=n {
        let b = s.get(a);
        if b > n {
            return Err(Error::ValueOutOfRange { value: b, position: a, n });
        }
        let t = drawn_type(seed, b, ranks[a - 1] as usize, k)
            .ok_or(Error::OccurrenceCapExceeded { value: b, cap: k })?;
        types.push(t);
        let start = dec.block_start(t);
        for local in 1..=dec.n_comp() {
            let hv = start + local - 1;
            for &w in h.out_neighbors(hv) {
                let target = if w <= n_center {
                    layout.center_vertex(b, w)
                } else {
                    layout.source_vertex(a, w - start + 1)
                };
                edges.push((layout.source_vertex(a, local), target));
            }
        }
    }
    let graph = BoundedDigraph::new(layout.vertex_count(), dec.pattern().degree_bound(), edges)?;
    Ok(OfflineReduction { graph, types, seed })
}

/// `eps / (d * (n_center + n_comp))`: how far the reduced graph is from
/// `H`-freeness when the sequence is `eps`-far from `k`-occurrence-freeness.
pub fn distance_transfer(eps: &BigRational, d: usize, dec: &PatternDecomposition) -> Result<BigRational> {
    if eps.is_negative() {
        return Err(Error::NegativeEpsilon(eps.clone()));
    }
    let scale = d * (dec.n_center() + dec.n_comp());
    if scale == 0 {
        return Err(Error::InvalidArgument("degree bound must be positive".into()));
    }
    if eps.is_zero() {
        return Ok(BigRational::zero());
    }
    Ok(eps / BigRational::from_integer(BigInt::from(scale)))
}

/// Outcome of sweeping every `(v, i)` probe against the offline graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub probes: usize,
    pub mismatches: usize,
    /// Sequence queries issued by the lazy oracle.
    pub sequence_queries: u64,
    /// Distinct positions whose source block was probed.
    pub source_positions_probed: usize,
    /// Sequence queries issued while answering center-part probes.
    pub center_sequence_queries: u64,
    /// Largest number of sequence queries a single probe caused.
    pub max_queries_per_probe: u64,
}

impl ConsistencyReport {
    pub fn consistent(&self) -> bool {
        self.mismatches == 0
    }

    /// At most one sequence query per distinct source position, none for
    /// center probes, and never more than one per probe.
    pub fn thrifty(&self) -> bool {
        self.sequence_queries <= self.source_positions_probed as u64
            && self.center_sequence_queries == 0
            && self.max_queries_per_probe <= 1
    }
}

/// Probes the lazy oracle (seeded with `lazy_seed`) at every `(v, i)` with
/// `i` in `1..=d+1`, in an order shuffled by `order_seed`, and compares with
/// the offline graph built from `offline_seed`. `probe_budget` caps the
/// number of probes.
pub fn consistency_check_with(
    s: &IntSequence,
    dec: &PatternDecomposition,
    lazy_seed: u64,
    offline_seed: u64,
    order_seed: u64,
    probe_budget: Option<usize>,
) -> Result<ConsistencyReport> {
    let offline = build_offline(s, dec, offline_seed)?;
    let g = &offline.graph;
    let mut oracle = ReductionOracle::new(MeteredSequence::new(s), dec, lazy_seed);
    let layout = oracle.layout();
    let d = g.degree_bound();
    let mut probes: Vec<(Vertex, usize)> = g
        .vertices()
        .flat_map(|v| (1..=d + 1).map(move |i| (v, i)))
        .collect();
    probes.shuffle(&mut rng_for(order_seed, Stream::Tester, 0));
    if let Some(cap) = probe_budget {
        probes.truncate(cap);
    }
    let mut report = ConsistencyReport::default();
    let mut positions = HashSet::new();
    for (v, i) in probes {
        let before = oracle.sequence_queries();
        let lazy = oracle.reduced_out_neighbor(v, i)?;
        let spent = oracle.sequence_queries() - before;
        report.max_queries_per_probe = report.max_queries_per_probe.max(spent);
        if layout.is_source(v) {
            positions.insert(layout.position_of(v));
        } else {
            report.center_sequence_queries += spent;
        }
        let expected = g.out_neighbors(v).get(i - 1).copied();
        report.probes += 1;
        if lazy != expected {
            report.mismatches += 1;
        }
    }
    report.sequence_queries = oracle.sequence_queries();
    report.source_positions_probed = positions.len();
    Ok(report)
}

/// Full sweep with matching seeds.
pub fn consistency_check(
    s: &IntSequence,
    dec: &PatternDecomposition,
    seed: u64,
    probe_budget: Option<usize>,
) -> Result<bool> {
    let order_seed = derive_seed(seed, Stream::Tester, 1);
    Ok(consistency_check_with(s, dec, seed, seed, order_seed, probe_budget)?.consistent())
}
