//! Exact classical graph algorithms: homomorphism search and enumeration,
//! chromatic and clique numbers, idempotent powers of endomorphisms, and
//! cores via retractions.
//!
//! Everything here is exhaustive and deterministic. Search orders are fixed
//! (vertices by descending degree, candidate targets ascending) so results
//! are reproducible golden values.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

/// Search-space guard for full homomorphism enumeration.
pub const ENUMERATION_GUARD: f64 = 1e6;
/// Vertex-count guard for chromatic/clique computation.
pub const CHROMATIC_GUARD: usize = 40;
/// Vertex-count guard for core computation.
pub const CORE_GUARD: usize = 20;

#[derive(Debug, Error)]
pub enum HomoError {
    #[error("graph has {actual} vertices, exceeding the guard of {bound}")]
    SizeGuard { bound: usize, actual: usize },
    #[error("enumeration space m^n = {space:.3e} exceeds the guard of {guard:.1e} (pass an explicit limit)")]
    EnumerationGuard { space: f64, guard: f64 },
    #[error("map is not an endomorphism of the graph")]
    NotEndomorphism,
    #[error("map has {got} entries, expected {expected}")]
    MapLength { expected: usize, got: usize },
    #[error("map value {value} out of range [0, {m})")]
    MapRange { value: usize, m: usize },
}

/// A total map `V(G) -> V(H)` with its edge-preservation flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMap {
    pub n: usize,
    pub m: usize,
    pub f: Vec<usize>,
    /// Set only after an edge-preservation check; deserialized maps start
    /// unchecked (false) until revalidated against concrete graphs.
    #[serde(default, skip_serializing)]
    pub homomorphism: bool,
}

impl VertexMap {
    pub fn new(f: Vec<usize>, n: usize, m: usize) -> Result<Self, HomoError> {
        if f.len() != n {
            return Err(HomoError::MapLength {
                expected: n,
                got: f.len(),
            });
        }
        for &value in &f {
            if value >= m {
                return Err(HomoError::MapRange { value, m });
            }
        }
        Ok(VertexMap {
            n,
            m,
            f,
            homomorphism: false,
        })
    }

    /// Builds the map and runs the exact edge-preservation check.
    pub fn checked(f: Vec<usize>, g: &Graph, h: &Graph) -> Result<Self, HomoError> {
        let mut map = VertexMap::new(f, g.vertex_count(), h.vertex_count())?;
        map.homomorphism = map.preserves_edges(g, h);
        Ok(map)
    }

    pub fn preserves_edges(&self, g: &Graph, h: &Graph) -> bool {
        g.edges().all(|(u, v)| h.has_edge(self.f[u], self.f[v]))
    }

    pub fn apply(&self, v: usize) -> usize {
        self.f[v]
    }

    /// Composition `other . self` (apply `self` first).
    pub fn then(&self, other: &VertexMap) -> VertexMap {
        assert_eq!(self.m, other.n, "composition shape mismatch");
        VertexMap {
            n: self.n,
            m: other.m,
            f: self.f.iter().map(|&v| other.f[v]).collect(),
            homomorphism: false,
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.n == self.m && self.f.iter().all(|&v| self.f[v] == v)
    }

    pub fn image(&self) -> Vec<usize> {
        let mut image: Vec<usize> = self.f.clone();
        image.sort_unstable();
        image.dedup();
        image
    }
}

fn search_order(g: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.vertex_count()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    order
}

/// Backtracking homomorphism search. Vertices are assigned in descending
/// degree order and candidate targets tried in ascending index, so the result
/// is the lexicographically-first homomorphism under that order (or `None`
/// after an exhaustive search).
pub fn find_homomorphism(g: &Graph, h: &Graph) -> Option<VertexMap> {
    let n = g.vertex_count();
    let m = h.vertex_count();
    let order = search_order(g);
    let mut position = vec![usize::MAX; n];
    for (slot, &v) in order.iter().enumerate() {
        position[v] = slot;
    }
    let mut assignment = vec![0usize; n];

    fn backtrack(
        g: &Graph,
        h: &Graph,
        order: &[usize],
        position: &[usize],
        assignment: &mut [usize],
        depth: usize,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        'candidates: for target in 0..h.vertex_count() {
            for w in g.neighbors(v) {
                if position[w] < depth && !h.has_edge(assignment[w], target) {
                    continue 'candidates;
                }
            }
            assignment[v] = target;
            if backtrack(g, h, order, position, assignment, depth + 1) {
                return true;
            }
        }
        false
    }

    if backtrack(g, h, &order, &position, &mut assignment, 0) {
        let mut map = VertexMap::new(assignment, n, m).expect("search output in range");
        map.homomorphism = true;
        debug_assert!(map.preserves_edges(g, h));
        Some(map)
    } else {
        None
    }
}

/// Complete enumeration of homomorphisms from `g` to `h`, in lexicographic
/// order of the map `(f(0), ..., f(n-1))`. Guarded by `m^n <= 1e6` unless an
/// explicit `limit` caps the number of returned maps.
pub fn enumerate_homomorphisms(
    g: &Graph,
    h: &Graph,
    limit: Option<usize>,
) -> Result<Vec<VertexMap>, HomoError> {
    let n = g.vertex_count();
    let m = h.vertex_count();
    let space = (m as f64).powi(n as i32);
    if limit.is_none() && space > ENUMERATION_GUARD {
        return Err(HomoError::EnumerationGuard {
            space,
            guard: ENUMERATION_GUARD,
        });
    }
    let cap = limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];

    fn backtrack(
        g: &Graph,
        h: &Graph,
        assignment: &mut Vec<usize>,
        depth: usize,
        out: &mut Vec<VertexMap>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        if depth == assignment.len() {
            let mut map = VertexMap::new(assignment.clone(), assignment.len(), h.vertex_count())
                .expect("enumeration output in range");
            map.homomorphism = true;
            out.push(map);
            return;
        }
        'candidates: for target in 0..h.vertex_count() {
            for w in g.neighbors(depth) {
                if w < depth && !h.has_edge(assignment[w], target) {
                    continue 'candidates;
                }
            }
            assignment[depth] = target;
            backtrack(g, h, assignment, depth + 1, out, cap);
            if out.len() >= cap {
                return;
            }
        }
    }

    backtrack(g, h, &mut assignment, 0, &mut out, cap);
    Ok(out)
}

/// Chromatic number by ascending-target homomorphism search into complete
/// graphs. Guarded at 40 vertices.
pub fn chromatic_number(g: &Graph) -> Result<usize, HomoError> {
    let n = g.vertex_count();
    if n > CHROMATIC_GUARD {
        return Err(HomoError::SizeGuard {
            bound: CHROMATIC_GUARD,
            actual: n,
        });
    }
    for c in 1..=n {
        let target = Graph::complete(c).expect("c >= 1");
        if find_homomorphism(g, &target).is_some() {
            return Ok(c);
        }
    }
    Ok(n)
}

/// Clique number by branch and bound over candidate extensions.
pub fn clique_number(g: &Graph) -> Result<usize, HomoError> {
    let n = g.vertex_count();
    if n > CHROMATIC_GUARD {
        return Err(HomoError::SizeGuard {
            bound: CHROMATIC_GUARD,
            actual: n,
        });
    }

    fn expand(g: &Graph, clique: usize, candidates: &[usize], best: &mut usize) {
        if clique > *best {
            *best = clique;
        }
        if clique + candidates.len() <= *best {
            return;
        }
        for (i, &v) in candidates.iter().enumerate() {
            if clique + (candidates.len() - i) <= *best {
                return;
            }
            let rest: Vec<usize> = candidates[(i + 1)..]
                .iter()
                .copied()
                .filter(|&w| g.has_edge(v, w))
                .collect();
            expand(g, clique + 1, &rest, best);
        }
    }

    let mut best = 0;
    let all: Vec<usize> = (0..n).collect();
    expand(g, 0, &all, &mut best);
    Ok(best)
}

/// Iterates an endomorphism under composition until some power is idempotent,
/// returning `(k, f^k)` for the smallest such power along the sequence.
pub fn iterate_to_idempotent(f: &VertexMap, g: &Graph) -> Result<(usize, VertexMap), HomoError> {
    let n = g.vertex_count();
    if f.n != n || f.m != n {
        return Err(HomoError::MapLength {
            expected: n,
            got: f.n,
        });
    }
    if !f.preserves_edges(g, g) {
        return Err(HomoError::NotEndomorphism);
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut power = f.clone();
    let mut k = 1usize;
    loop {
        if power.is_idempotent() {
            let mut out = power;
            out.homomorphism = true;
            return Ok((k, out));
        }
        if !seen.insert(power.f.clone()) {
            // A cycle of powers always contains an idempotent; reaching this
            // point would mean the composition bookkeeping is broken.
            unreachable!("power sequence cycled without an idempotent");
        }
        power = power.then(f);
        k += 1;
    }
}

/// One stage of a core computation: an idempotent retraction of the stage's
/// graph and the image vertices kept for the next stage.
#[derive(Debug, Clone, Serialize)]
pub struct CoreStage {
    pub retraction: VertexMap,
    pub image: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoreResult {
    pub core: Graph,
    pub stages: Vec<CoreStage>,
}

/// Searches for an endomorphism of `g` missing at least one vertex, as a
/// homomorphism into some vertex-deleted induced subgraph.
fn non_surjective_endomorphism(g: &Graph) -> Option<VertexMap> {
    let n = g.vertex_count();
    if n == 1 {
        return None;
    }
    for skip in 0..n {
        let subset: Vec<usize> = (0..n).filter(|&v| v != skip).collect();
        let (induced, kept) = g
            .induced_subgraph(&subset)
            .expect("nonempty subset of valid vertices");
        if let Some(map) = find_homomorphism(g, &induced) {
            let lifted: Vec<usize> = map.f.iter().map(|&v| kept[v]).collect();
            let mut out = VertexMap::new(lifted, n, n).expect("lifted map in range");
            out.homomorphism = true;
            debug_assert!(out.preserves_edges(g, g));
            return Some(out);
        }
    }
    None
}

/// Computes a core of `g` by repeatedly retracting along idempotent powers of
/// non-surjective endomorphisms. Terminates exactly when the exhaustive scan
/// finds no proper retraction.
pub fn classical_core(g: &Graph) -> Result<CoreResult, HomoError> {
    if g.vertex_count() > CORE_GUARD {
        return Err(HomoError::SizeGuard {
            bound: CORE_GUARD,
            actual: g.vertex_count(),
        });
    }
    let mut current = g.clone();
    let mut stages = Vec::new();
    while let Some(endo) = non_surjective_endomorphism(&current) {
        let (_, retraction) = iterate_to_idempotent(&endo, &current)?;
        let image = retraction.image();

        // Edge pushforward along the retraction; for an idempotent
        // endomorphism this coincides with the induced subgraph on the image,
        // which is asserted below.
        let mut pushed_edges = Vec::new();
        for (u, v) in current.edges() {
            let (a, b) = (retraction.f[u], retraction.f[v]);
            pushed_edges.push((a, b));
        }
        let index_of = |v: usize| image.binary_search(&v).expect("image vertex");
        let relabeled: Vec<(usize, usize)> = pushed_edges
            .iter()
            .map(|&(a, b)| (index_of(a), index_of(b)))
            .collect();
        let pushed = Graph::new(image.len(), &relabeled).expect("retraction image graph");
        let (induced, _) = current
            .induced_subgraph(&image)
            .expect("image is a nonempty vertex set");
        assert_eq!(
            pushed, induced,
            "pushforward of an idempotent retraction must equal the induced subgraph"
        );

        stages.push(CoreStage {
            retraction,
            image: image.clone(),
        });
        current = induced;
    }
    Ok(CoreResult {
        core: current,
        stages,
    })
}
