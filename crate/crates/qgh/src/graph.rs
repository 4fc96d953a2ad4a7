//! Finite simple graphs: construction, parsing, complements, operator-system
//! support sets, and induced subgraphs.
//!
//! Vertices are `0..n`. Edges are unordered pairs stored canonically as
//! `(min, max)`; loops are rejected everywhere.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex count must be positive")]
    EmptyVertexSet,
    #[error("loop edge at vertex {0}")]
    LoopEdge(usize),
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("induced subgraph needs a nonempty vertex subset")]
    EmptySubset,
}

/// A finite simple graph: `n` vertices and a set of unordered edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an edge list, validating ranges and rejecting loops.
    /// Duplicate edges (in either orientation) are deduplicated.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyVertexSet);
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::LoopEdge(u));
            }
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as canonical `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&w| self.has_edge(v, w)).count()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&w| self.has_edge(v, w))
    }

    /// The complete graph `K_c`.
    pub fn complete(c: usize) -> Result<Self, GraphError> {
        if c == 0 {
            return Err(GraphError::EmptyVertexSet);
        }
        let mut edges = BTreeSet::new();
        for u in 0..c {
            for v in (u + 1)..c {
                edges.insert((u, v));
            }
        }
        Ok(Graph { n: c, edges })
    }

    /// The empty (edgeless) graph on `m` vertices.
    pub fn empty(m: usize) -> Result<Self, GraphError> {
        if m == 0 {
            return Err(GraphError::EmptyVertexSet);
        }
        Ok(Graph {
            n: m,
            edges: BTreeSet::new(),
        })
    }

    /// The cycle `C_n` (requires `n >= 3`).
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::Parse {
                line: 0,
                message: format!("cycle needs at least 3 vertices, got {n}"),
            });
        }
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Graph::new(n, &edges)
    }

    /// The path `P_n` on `n` vertices (`n - 1` edges).
    pub fn path(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyVertexSet);
        }
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::new(n, &edges)
    }

    /// The Petersen graph (outer 5-cycle, inner pentagram, spokes).
    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for v in 0..5 {
            edges.push((v, (v + 1) % 5));
            edges.push((5 + v, 5 + (v + 2) % 5));
            edges.push((v, 5 + v));
        }
        Graph::new(10, &edges).expect("petersen construction is valid")
    }

    /// The complement: `{v, w}` is an edge iff `v != w` and it is not an edge here.
    pub fn complement(&self) -> Graph {
        let mut edges = BTreeSet::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if !self.edges.contains(&(u, v)) {
                    edges.insert((u, v));
                }
            }
        }
        Graph {
            n: self.n,
            edges,
        }
    }

    /// Ordered index pairs spanning the graph's operator system: every diagonal
    /// pair plus both orientations of every edge.
    pub fn operator_system_support(&self) -> SupportSet {
        let mut pairs = BTreeSet::new();
        for v in 0..self.n {
            pairs.insert((v, v));
        }
        for &(u, v) in &self.edges {
            pairs.insert((u, v));
            pairs.insert((v, u));
        }
        SupportSet { n: self.n, pairs }
    }

    /// Induced subgraph on `subset`, with vertices relabeled `0..subset.len()`.
    /// Returns the subgraph together with the map new-index -> old-vertex.
    pub fn induced_subgraph(&self, subset: &[usize]) -> Result<(Graph, Vec<usize>), GraphError> {
        if subset.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        let mut kept: Vec<usize> = subset.to_vec();
        kept.sort_unstable();
        kept.dedup();
        for &v in &kept {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        let index_of = |v: usize| kept.binary_search(&v).ok();
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            if let (Some(a), Some(b)) = (index_of(u), index_of(v)) {
                edges.push((a, b));
            }
        }
        let g = Graph::new(kept.len(), &edges)?;
        Ok((g, kept))
    }

    /// Parses either the plain edge-list format (`n` on the first data line,
    /// then `u v` lines, `#` comments) or DIMACS `.col` (`p edge n m`, `e u v`
    /// with 1-indexed vertices).
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let is_dimacs = text.lines().any(|l| {
            let t = l.trim();
            t.starts_with("p ") || t.starts_with("p\t")
        });
        if is_dimacs {
            Self::parse_dimacs(text)
        } else {
            Self::parse_edge_list(text)
        }
    }

    fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if fields.len() != 1 {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: "expected vertex count on first data line".into(),
                        });
                    }
                    let count: usize = fields[0].parse().map_err(|_| GraphError::Parse {
                        line: line_no,
                        message: format!("invalid vertex count `{}`", fields[0]),
                    })?;
                    if count == 0 {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: "vertex count must be positive".into(),
                        });
                    }
                    n = Some(count);
                }
                Some(count) => {
                    if fields.len() != 2 {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: format!("expected `u v`, got `{line}`"),
                        });
                    }
                    let parse_vertex = |s: &str| -> Result<usize, GraphError> {
                        s.parse().map_err(|_| GraphError::Parse {
                            line: line_no,
                            message: format!("invalid vertex `{s}`"),
                        })
                    };
                    let u = parse_vertex(fields[0])?;
                    let v = parse_vertex(fields[1])?;
                    if u == v {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: format!("loop edge at vertex {u}"),
                        });
                    }
                    if u >= count || v >= count {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: format!("edge ({u}, {v}) out of range for n = {count}"),
                        });
                    }
                    edges.push((u, v));
                }
            }
        }
        match n {
            Some(count) => Graph::new(count, &edges),
            None => Err(GraphError::Parse {
                line: 0,
                message: "empty graph description".into(),
            }),
        }
    }

    fn parse_dimacs(text: &str) -> Result<Self, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "p" => {
                    if fields.len() < 3 {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: "malformed problem line".into(),
                        });
                    }
                    let count: usize = fields[2].parse().map_err(|_| GraphError::Parse {
                        line: line_no,
                        message: format!("invalid vertex count `{}`", fields[2]),
                    })?;
                    if count == 0 {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: "vertex count must be positive".into(),
                        });
                    }
                    n = Some(count);
                }
                "e" => {
                    let count = n.ok_or(GraphError::Parse {
                        line: line_no,
                        message: "edge before problem line".into(),
                    })?;
                    if fields.len() != 3 {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: "expected `e u v`".into(),
                        });
                    }
                    let parse_vertex = |s: &str| -> Result<usize, GraphError> {
                        let v: usize = s.parse().map_err(|_| GraphError::Parse {
                            line: line_no,
                            message: format!("invalid vertex `{s}`"),
                        })?;
                        if v == 0 || v > count {
                            return Err(GraphError::Parse {
                                line: line_no,
                                message: format!("vertex {v} out of range 1..={count}"),
                            });
                        }
                        Ok(v - 1)
                    };
                    let u = parse_vertex(fields[1])?;
                    let v = parse_vertex(fields[2])?;
                    if u == v {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: format!("loop edge at vertex {}", u + 1),
                        });
                    }
                    edges.push((u, v));
                }
                _ => {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: format!("unrecognized line `{line}`"),
                    })
                }
            }
        }
        match n {
            Some(count) => Graph::new(count, &edges),
            None => Err(GraphError::Parse {
                line: 0,
                message: "missing problem line".into(),
            }),
        }
    }

    /// Canonical edge-list serialization: `n`, then one `u v` line per edge in
    /// lexicographic order with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph(n={}, m={})", self.n, self.edges.len())
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Graph", 2)?;
        s.serialize_field("n", &self.n)?;
        let edges: Vec<[usize; 2]> = self.edges.iter().map(|&(u, v)| [u, v]).collect();
        s.serialize_field("edges", &edges)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            edges: Vec<[usize; 2]>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let edges: Vec<(usize, usize)> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(raw.n, &edges).map_err(serde::de::Error::custom)
    }
}

/// The index-pair support of a graph's operator system: all diagonal pairs
/// plus both orientations of every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl SupportSet {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, v: usize, w: usize) -> bool {
        self.pairs.contains(&(v, w))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force isomorphism check over all vertex permutations.
    fn isomorphic(a: &Graph, b: &Graph) -> bool {
        if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
            return false;
        }
        let n = a.vertex_count();
        let mut perm: Vec<usize> = (0..n).collect();
        loop {
            let ok = a
                .edges()
                .all(|(u, v)| b.has_edge(perm[u], perm[v]))
                && b.edges().all(|(u, v)| {
                    let iu = perm.iter().position(|&p| p == u).unwrap();
                    let iv = perm.iter().position(|&p| p == v).unwrap();
                    a.has_edge(iu, iv)
                });
            if ok {
                return true;
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }

    fn next_permutation(perm: &mut [usize]) -> bool {
        let n = perm.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
        true
    }

    #[test]
    fn parse_edge_list_k2() {
        let g = Graph::parse("2\n0 1").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert!(g.has_edge(0, 1));
    }

    #[test]
    fn parse_dimacs_triangle() {
        let g = Graph::parse("p edge 3 3\ne 1 2\ne 2 3\ne 1 3").unwrap();
        assert_eq!(g, Graph::complete(3).unwrap());
    }

    #[test]
    fn parse_rejects_loop_with_line_number() {
        let err = Graph::parse("2\n0 0").unwrap_err();
        match err {
            GraphError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("loop"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_skips_comments_and_dedups() {
        let g = Graph::parse("# triangle\n3\n0 1\n1 0 # dup\n1 2\n0 2\n").unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn parse_rejects_out_of_range() {
        assert!(Graph::parse("2\n0 5").is_err());
        assert!(Graph::parse("p edge 2 1\ne 1 3").is_err());
    }

    #[test]
    fn constructors() {
        assert_eq!(Graph::complete(3).unwrap().edge_count(), 3);
        assert_eq!(Graph::empty(4).unwrap().edge_count(), 0);
        assert_eq!(Graph::complete(1).unwrap().edge_count(), 0);
        assert!(Graph::complete(0).is_err());
        assert!(Graph::empty(0).is_err());
    }

    #[test]
    fn complement_of_k3_is_empty() {
        assert_eq!(
            Graph::complete(3).unwrap().complement(),
            Graph::empty(3).unwrap()
        );
    }

    #[test]
    fn complement_of_c5_is_isomorphic_to_c5() {
        let c5 = Graph::cycle(5).unwrap();
        let comp = c5.complement();
        for v in 0..5 {
            assert_eq!(comp.degree(v), 2);
        }
        assert!(isomorphic(&c5, &comp));
    }

    #[test]
    fn support_set_examples() {
        let k2 = Graph::complete(2).unwrap();
        let s = k2.operator_system_support();
        assert_eq!(s.len(), 4);
        for pair in [(0, 0), (1, 1), (0, 1), (1, 0)] {
            assert!(s.contains(pair.0, pair.1));
        }
        assert_eq!(Graph::empty(2).unwrap().operator_system_support().len(), 2);
        assert_eq!(
            Graph::cycle(5).unwrap().operator_system_support().len(),
            15
        );
    }

    #[test]
    fn induced_subgraph_examples() {
        let c6 = Graph::cycle(6).unwrap();
        let (adjacent, map) = c6.induced_subgraph(&[0, 1]).unwrap();
        assert_eq!(adjacent, Graph::complete(2).unwrap());
        assert_eq!(map, vec![0, 1]);
        let (non_adjacent, _) = c6.induced_subgraph(&[0, 2]).unwrap();
        assert_eq!(non_adjacent, Graph::empty(2).unwrap());
        let all: Vec<usize> = (0..6).collect();
        let (full, _) = c6.induced_subgraph(&all).unwrap();
        assert_eq!(full, c6);
        assert!(c6.induced_subgraph(&[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::cycle(5).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }

    proptest! {
        #[test]
        fn complement_is_involution(n in 1usize..8, seed in 0u64..1000) {
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(11);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    if state >> 63 == 1 {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::new(n, &edges).unwrap();
            prop_assert_eq!(g.complement().complement(), g.clone());
            let support = g.operator_system_support();
            prop_assert_eq!(support.len(), n + 2 * g.edge_count());
            let text = g.to_edge_list();
            prop_assert_eq!(Graph::parse(&text).unwrap(), g);
        }
    }
}
