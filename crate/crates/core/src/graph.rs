//! Undirected graphs on a small vertex set, with optional loops and no
//! multi-edges. Vertex 0 is the distinguished (nonconforming) vertex in every
//! construction here; serialized forms label vertices 1-based.
//!
//! Adjacency is stored as one bitmask per vertex. Bit `j` of `adj[i]` means
//! `j` is in the neighbourhood of `i`; a loop sets bit `i` of `adj[i]`, so
//! `N(i)` contains `i` exactly when the loop is present.

use std::fmt::Write as _;

use thiserror::Error;

/// Hard cap from the u32 bitmask representation.
pub const MAX_VERTICES: usize = 32;

/// Labelled enumeration stops here; 2^(15+6) graphs at n = 6 is the most a
/// desk run should ever chew through.
pub const ENUM_MAX_VERTICES: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex count {0} out of range 1..={MAX_VERTICES}")]
    BadVertexCount(usize),
    #[error("vertex index {0} out of range for n = {1}")]
    VertexOutOfRange(usize, usize),
    #[error("edge ({0}, {0}) pairs a vertex with itself; declare a loop instead")]
    SelfPair(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("duplicate loop at {0}")]
    DuplicateLoop(usize),
    #[error("enumeration over n = {0} exceeds the n <= {ENUM_MAX_VERTICES} guard")]
    EnumerationTooLarge(usize),
    #[error("long-period construction needs k >= 2, got {0}")]
    BadGkParameter(usize),
    #[error("unknown preset \"{0}\"")]
    UnknownPreset(String),
}

/// Simple graph plus optional loops, at most [`MAX_VERTICES`] vertices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<u32>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .field("loops", &self.loop_vertices().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Builds from an edge list and a loop list, both 0-based. Rejects
    /// out-of-range vertices, self-pairs in `edges`, and any repetition.
    pub fn build(n: usize, edges: &[(usize, usize)], loops: &[usize]) -> Result<Graph, GraphError> {
        if n == 0 || n > MAX_VERTICES {
            return Err(GraphError::BadVertexCount(n));
        }
        let mut adj = vec![0u32; n];
        for &(a, b) in edges {
            if a >= n {
                return Err(GraphError::VertexOutOfRange(a, n));
            }
            if b >= n {
                return Err(GraphError::VertexOutOfRange(b, n));
            }
            if a == b {
                return Err(GraphError::SelfPair(a));
            }
            if adj[a] & (1 << b) != 0 {
                return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        for &v in loops {
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if adj[v] & (1 << v) != 0 {
                return Err(GraphError::DuplicateLoop(v));
            }
            adj[v] |= 1 << v;
        }
        Ok(Graph { n, adj })
    }

    fn from_masks(n: usize, adj: Vec<u32>) -> Graph {
        debug_assert_eq!(adj.len(), n);
        debug_assert!((0..n).all(|i| adj[i] >> n == 0));
        debug_assert!(
            (0..n).all(|i| (0..n).all(|j| { i == j || (adj[i] >> j) & 1 == (adj[j] >> i) & 1 }))
        );
        Graph { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbourhood of `v` as a bitmask; includes bit `v` iff `v` has a loop.
    #[inline(always)]
    pub fn neighbor_mask(&self, v: usize) -> u32 {
        self.adj[v]
    }

    /// |N(v)|, counting the loop once if present.
    #[inline]
    pub fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && a < self.n && b < self.n && self.adj[a] & (1 << b) != 0
    }

    pub fn has_loop(&self, v: usize) -> bool {
        v < self.n && self.adj[v] & (1 << v) != 0
    }

    /// Edges as ordered pairs (a, b) with a < b, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |a| {
            ((a + 1)..self.n).filter_map(move |b| self.has_edge(a, b).then_some((a, b)))
        })
    }

    pub fn loop_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.has_loop(v))
    }

    pub fn has_any_loop(&self) -> bool {
        (0..self.n).any(|v| self.has_loop(v))
    }

    /// Neighbours of vertex 0 other than itself, as a bitmask.
    #[inline]
    pub fn v1_neighbors(&self) -> u32 {
        self.adj[0] & !1
    }

    /// True iff no two distinct neighbours of vertex 0 are adjacent. Loops on
    /// those neighbours do not count against independence.
    pub fn v1_neighborhood_independent(&self) -> bool {
        let nb = self.v1_neighbors();
        let mut rest = nb;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.adj[v] & !(1 << v) & nb != 0 {
                return false;
            }
        }
        true
    }

    /// DOT rendering with 1-based labels; loops come out as self-edges.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph dynamics {\n");
        for v in 0..self.n {
            let _ = writeln!(out, "  {};", v + 1);
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  {} -- {};", a + 1, b + 1);
        }
        for v in self.loop_vertices() {
            let _ = writeln!(out, "  {} -- {};", v + 1, v + 1);
        }
        out.push_str("}\n");
        out
    }
}

// --- fixed graphs ---------------------------------------------------------

/// Two vertices joined by one edge.
pub fn single_edge() -> Graph {
    Graph::build(2, &[(0, 1)], &[]).expect("static graph")
}

/// Complete bipartite 3 + 3, parts {0,1,2} and {3,4,5}.
pub fn k33() -> Graph {
    let mut edges = Vec::with_capacity(9);
    for a in 0..3 {
        for b in 3..6 {
            edges.push((a, b));
        }
    }
    Graph::build(6, &edges, &[]).expect("static graph")
}

/// 3-cube: vertices are the binary words of length 3, edges flip one bit.
pub fn cube3() -> Graph {
    let mut edges = Vec::with_capacity(12);
    for v in 0usize..8 {
        for bit in 0..3 {
            let w = v ^ (1 << bit);
            if v < w {
                edges.push((v, w));
            }
        }
    }
    Graph::build(8, &edges, &[]).expect("static graph")
}

pub fn preset(name: &str) -> Result<Graph, GraphError> {
    match name {
        "single_edge" => Ok(single_edge()),
        "k33" => Ok(k33()),
        "cube3" => Ok(cube3()),
        other => Err(GraphError::UnknownPreset(other.to_string())),
    }
}

/// Long-period gadget on 2k + 8 vertices, k >= 2. Vertex 0 is adjacent to
/// vertices 1..=2k+1; of those, 1..=k+1 are pendant and k+2..=2k+1 induce a
/// path. Vertices 2k+2..=2k+7 form two triangles {2k+2, 2k+3, 2k+4} and
/// {2k+5, 2k+6, 2k+7}, joined by the edges (2k+3, 2k+5) and (2k+4, 2k+6);
/// the path ends attach via (k+2, 2k+2) and (2k+1, 2k+7). Every vertex other
/// than 0 ends up with odd degree, so majority updates never tie.
pub fn gk(k: usize) -> Result<Graph, GraphError> {
    if k < 2 {
        return Err(GraphError::BadGkParameter(k));
    }
    let n = 2 * k + 8;
    if n > MAX_VERTICES {
        return Err(GraphError::BadVertexCount(n));
    }
    let mut edges = Vec::new();
    for v in 1..=2 * k + 1 {
        edges.push((0, v));
    }
    for v in k + 2..2 * k + 1 {
        edges.push((v, v + 1));
    }
    let (a, b) = (2 * k + 2, 2 * k + 5); // first vertex of each triangle
    edges.push((a, a + 1));
    edges.push((a, a + 2));
    edges.push((a + 1, a + 2));
    edges.push((b, b + 1));
    edges.push((b, b + 2));
    edges.push((b + 1, b + 2));
    edges.push((a + 1, b));
    edges.push((a + 2, b + 1));
    edges.push((k + 2, a));
    edges.push((2 * k + 1, b + 2));
    Graph::build(n, &edges, &[])
}

// --- labelled enumeration -------------------------------------------------

/// All labelled graphs on `n` vertices in a fixed order: the edge set sweeps
/// the C(n,2)-bit counter (pair (a,b), a < b, in lexicographic order), and
/// for each edge set the loop set sweeps the n-bit counter. No isomorphism
/// reduction; callers filter further as needed.
pub fn enumerate_graphs(
    n: usize,
    allow_loops: bool,
) -> Result<impl Iterator<Item = Graph>, GraphError> {
    if n == 0 {
        return Err(GraphError::BadVertexCount(n));
    }
    if n > ENUM_MAX_VERTICES {
        return Err(GraphError::EnumerationTooLarge(n));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    let edge_sets = 1u64 << pairs.len();
    let loop_sets = if allow_loops { 1u32 << n } else { 1 };
    Ok((0..edge_sets).flat_map(move |em| {
        let pairs = pairs.clone();
        (0..loop_sets).map(move |lm| {
            let mut adj = vec![0u32; n];
            for (bit, &(a, b)) in pairs.iter().enumerate() {
                if em >> bit & 1 == 1 {
                    adj[a] |= 1 << b;
                    adj[b] |= 1 << a;
                }
            }
            for v in 0..n {
                if lm >> v & 1 == 1 {
                    adj[v] |= 1 << v;
                }
            }
            Graph::from_masks(n, adj)
        })
    }))
}
