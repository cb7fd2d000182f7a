//! Non-induced subgraph embeddings of a small pattern into a host digraph.
//!
//! An embedding is an injective map `V(H) -> V(G)` under which every edge of
//! `H` is an edge of `G`. Copies are embeddings modulo automorphisms of `H`.

use std::collections::VecDeque;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::graph::{BoundedDigraph, Vertex};

/// Patterns above this many vertices are refused.
pub const PATTERN_VERTEX_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy)]
enum Anchor {
    /// No earlier pattern vertex is adjacent; try every host vertex.
    Free,
    /// `earlier -> this` is a pattern edge.
    OutOf(usize),
    /// `this -> earlier` is a pattern edge.
    InTo(usize),
}

#[derive(Debug, Clone)]
struct Step {
    vertex: Vertex,
    anchor: Anchor,
    // Pattern edges between this vertex and earlier ones: (earlier, this_is_tail).
    checks: Vec<(Vertex, bool)>,
    out_deg: usize,
    in_deg: usize,
}

/// A precomputed matching order for one pattern.
#[derive(Debug, Clone)]
pub struct Matcher<'p> {
    pattern: &'p BoundedDigraph,
    steps: Vec<Step>,
}

impl<'p> Matcher<'p> {
    pub fn new(pattern: &'p BoundedDigraph) -> Result<Self> {
        let size = pattern.vertex_count();
        if size > PATTERN_VERTEX_LIMIT {
            return Err(Error::PatternTooLarge {
                size,
                limit: PATTERN_VERTEX_LIMIT,
            });
        }
        let order = matching_order(pattern);
        let mut position = vec![usize::MAX; size + 1];
        for (idx, &v) in order.iter().enumerate() {
            position[v] = idx;
        }
        let steps = order
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                let mut checks = Vec::new();
                let mut anchor = Anchor::Free;
                for &w in pattern.in_neighbors(v) {
                    if position[w] < idx {
                        checks.push((w, false));
                        if matches!(anchor, Anchor::Free) {
                            anchor = Anchor::OutOf(w);
                        }
                    }
                }
                for &w in pattern.out_neighbors(v) {
                    if position[w] < idx {
                        checks.push((w, true));
                        if matches!(anchor, Anchor::Free) {
                            anchor = Anchor::InTo(w);
                        }
                    }
                }
                Step {
                    vertex: v,
                    anchor,
                    checks,
                    out_deg: pattern.out_neighbors(v).len(),
                    in_deg: pattern.in_neighbors(v).len(),
                }
            })
            .collect();
        Ok(Matcher { pattern, steps })
    }

    pub fn pattern(&self) -> &BoundedDigraph {
        self.pattern
    }

    /// Calls `f` with every embedding (indexed by pattern vertex − 1) that
    /// avoids `blocked` host vertices. Stops early on `ControlFlow::Break`.
    pub fn for_each_embedding<F>(
        &self,
        host: &BoundedDigraph,
        blocked: Option<&[bool]>,
        f: F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[Vertex]) -> ControlFlow<()>,
    {
        self.for_each_embedding_rooted(host, blocked, None, f)
    }

    fn for_each_embedding_rooted<F>(
        &self,
        host: &BoundedDigraph,
        blocked: Option<&[bool]>,
        root: Option<Vertex>,
        mut f: F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[Vertex]) -> ControlFlow<()>,
    {
        let mut used = vec![false; host.vertex_count() + 1];
        if let Some(b) = blocked {
            for (slot, &flag) in used.iter_mut().zip(b) {
                *slot = flag;
            }
        }
        let mut image = vec![0; self.pattern.vertex_count()];
        self.extend(host, 0, root, &mut used, &mut image, &mut f)
    }

    fn extend<F>(
        &self,
        host: &BoundedDigraph,
        depth: usize,
        root: Option<Vertex>,
        used: &mut [bool],
        image: &mut [Vertex],
        f: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[Vertex]) -> ControlFlow<()>,
    {
        if depth == self.steps.len() {
            return f(image);
        }
        let step = &self.steps[depth];
        let mut try_candidate = |c: Vertex, used: &mut [bool], image: &mut [Vertex]| {
            if used[c]
                || host.out_neighbors(c).len() < step.out_deg
                || host.in_neighbors(c).len() < step.in_deg
            {
                return ControlFlow::Continue(());
            }
            let ok = step.checks.iter().all(|&(w, tail)| {
                let hw = image[w - 1];
                if tail {
                    host.has_edge(c, hw)
                } else {
                    host.has_edge(hw, c)
                }
            });
            if !ok {
                return ControlFlow::Continue(());
            }
            used[c] = true;
            image[step.vertex - 1] = c;
            let flow = self.extend(host, depth + 1, None, used, image, f);
            used[c] = false;
            flow
        };
        match step.anchor {
            Anchor::Free if root.is_some() => {
                if let Some(c) = root.filter(|&c| c >= 1 && c <= host.vertex_count()) {
                    try_candidate(c, used, image)?;
                }
            }
            Anchor::Free => {
                for c in host.vertices() {
                    try_candidate(c, used, image)?;
                }
            }
            Anchor::OutOf(w) => {
                for &c in host.out_neighbors(image[w - 1]) {
                    try_candidate(c, used, image)?;
                }
            }
            Anchor::InTo(w) => {
                for &c in host.in_neighbors(image[w - 1]) {
                    try_candidate(c, used, image)?;
                }
            }
        }
        ControlFlow::Continue(())
    }

    pub fn count_embeddings(&self, host: &BoundedDigraph) -> u128 {
        let mut count = 0u128;
        let _ = self.for_each_embedding(host, None, |_| {
            count += 1;
            ControlFlow::Continue(())
        });
        count
    }

    pub fn find_embedding(&self, host: &BoundedDigraph) -> Option<Vec<Vertex>> {
        let mut found = None;
        let _ = self.for_each_embedding(host, None, |img| {
            found = Some(img.to_vec());
            ControlFlow::Break(())
        });
        found
    }

    pub fn automorphism_count(&self) -> u128 {
        self.count_embeddings(self.pattern)
    }
}

/// BFS over the underlying undirected graph, starting each weak component at
/// its highest-degree vertex, so every later vertex has an earlier neighbor.
fn matching_order(pattern: &BoundedDigraph) -> Vec<Vertex> {
    let n = pattern.vertex_count();
    let degree = |v: Vertex| pattern.out_neighbors(v).len() + pattern.in_neighbors(v).len();
    let mut seen = vec![false; n + 1];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<Vertex> = pattern.vertices().collect();
    by_degree.sort_by_key(|&v| (std::cmp::Reverse(degree(v)), v));
    for start in by_degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<Vertex> = pattern
                .out_neighbors(v)
                .iter()
                .chain(pattern.in_neighbors(v))
                .copied()
                .filter(|&w| !seen[w])
                .collect();
            next.sort_by_key(|&w| (std::cmp::Reverse(degree(w)), w));
            next.dedup();
            for w in next {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

/// Number of distinct copies of `pattern` in `host`.
pub fn count_subgraph_copies(host: &BoundedDigraph, pattern: &BoundedDigraph) -> Result<u128> {
    let m = Matcher::new(pattern)?;
    Ok(m.count_embeddings(host) / m.automorphism_count())
}

/// Size of a greedily built maximal family of vertex-disjoint copies.
///
/// Every copy needs at least one deleted edge and disjoint copies share no
/// edge, so the result lower-bounds the edge-deletion distance to
/// `pattern`-freeness.
pub fn disjoint_copy_lower_bound(host: &BoundedDigraph, pattern: &BoundedDigraph) -> Result<usize> {
    Ok(disjoint_copies(host, pattern)?.len())
}

/// The greedy family of disjoint copies itself, as embeddings.
pub fn disjoint_copies(host: &BoundedDigraph, pattern: &BoundedDigraph) -> Result<Vec<Vec<Vertex>>> {
    let m = Matcher::new(pattern)?;
    if pattern.vertex_count() == 0 {
        return Ok(Vec::new());
    }
    // One pass over roots: an embedding rooted at `c` that was skipped must
    // have hit a vertex blocked before `c` was tried, so the family is maximal.
    let mut blocked = vec![false; host.vertex_count() + 1];
    let mut image = vec![0; pattern.vertex_count()];
    let mut copies = Vec::new();
    for c in host.vertices() {
        if blocked[c] {
            continue;
        }
        let mut found = None;
        // `extend` restores `blocked` on the way out, even after a break.
        let _ = m.extend(host, 0, Some(c), &mut blocked, &mut image, &mut |img: &[Vertex]| {
            found = Some(img.to_vec());
            ControlFlow::Break(())
        });
        if let Some(img) = found {
            for &v in &img {
                blocked[v] = true;
            }
            copies.push(img);
        }
    }
    Ok(copies)
}

/// True iff `map` (indexed by pattern vertex − 1) is an injective,
/// edge-preserving map into `host`.
pub fn is_embedding(host: &BoundedDigraph, pattern: &BoundedDigraph, map: &[Vertex]) -> bool {
    if map.len() != pattern.vertex_count() {
        return false;
    }
    if map.iter().any(|&v| v == 0 || v > host.vertex_count()) {
        return false;
    }
    let mut sorted = map.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    pattern
        .edges()
        .all(|(u, v)| host.has_edge(map[u - 1], map[v - 1]))
}
