//! Simple undirected graphs with graph6 and JSON edge-list I/O.

use crate::error::{Error, Result};
use crate::matrix::FieldMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Largest order accepted by the single-byte graph6 header.
pub const GRAPH6_MAX_VERTICES: usize = 62;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EdgeList", into = "EdgeList")]
pub struct Graph {
    n: usize,
    /// Edges `(i, j)` with `i < j`.
    edges: BTreeSet<(usize, usize)>,
}

/// JSON form: `{"n_vertices": 3, "edges": [[0, 1], [1, 2]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct EdgeList {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<EdgeList> for Graph {
    type Error = Error;

    fn try_from(e: EdgeList) -> Result<Graph> {
        Graph::new(e.n_vertices, e.edges)
    }
}

impl From<Graph> for EdgeList {
    fn from(g: Graph) -> EdgeList {
        EdgeList { n_vertices: g.n, edges: g.edges.into_iter().collect() }
    }
}

impl Graph {
    /// Rejects self-loops and out-of-range endpoints; duplicate and reversed
    /// pairs collapse to one edge.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Invalid(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("edge ({a}, {b}) out of range for {n} vertices")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph { n, edges: set })
    }

    pub fn empty(n: usize) -> Self {
        Graph { n, edges: BTreeSet::new() }
    }

    pub fn complete(n: usize) -> Self {
        Graph { n, edges: (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect() }
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    /// `G(n, p)` with a seeded generator.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect::<Vec<_>>();
        Graph { n, edges: edges.into_iter().filter(|_| rng.random_bool(p)).collect() }
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn complement(&self) -> Self {
        Graph { n: self.n, edges: (0..self.n).flat_map(|j| (0..j).map(move |i| (i, j))).filter(|e| !self.edges.contains(e)).collect() }
    }

    /// Symmetric 0/1 adjacency matrix.
    pub fn adjacency(&self) -> FieldMatrix {
        FieldMatrix::real_fn(self.n, self.n, |i, j| if self.has_edge(i, j) && i != j { 1.0 } else { 0.0 })
    }

    /// Number of edges crossing the bipartition given by signs.
    pub fn cut_value(&self, x: &[i8]) -> usize {
        self.edges.iter().filter(|&&(i, j)| x[i] != x[j]).count()
    }

    /// Standard (non-sparse6) graph6 string, `n ≤ 62`.
    pub fn parse_graph6(s: &str) -> Result<Self> {
        let bytes = s.trim_end_matches(['\n', '\r']).as_bytes();
        let Some((&head, body)) = bytes.split_first() else {
            return Err(Error::Parse("empty graph6 string".into()));
        };
        if let Some(&b) = bytes.iter().find(|&&b| !(63..=126).contains(&b)) {
            return Err(Error::Parse(format!("byte {b} outside the graph6 range 63..=126")));
        }
        if head == 126 {
            return Err(Error::Parse(format!("graph6 headers for more than {GRAPH6_MAX_VERTICES} vertices are not supported")));
        }
        let n = (head - 63) as usize;
        let nbits = n * n.saturating_sub(1) / 2;
        let want = nbits.div_ceil(6);
        if body.len() != want {
            return Err(Error::Parse(format!("graph6 body has {} bytes, {n} vertices need {want}", body.len())));
        }
        let bit = |k: usize| (body[k / 6] - 63) >> (5 - k % 6) & 1 == 1;
        if (nbits..want * 6).any(bit) {
            return Err(Error::Parse("nonzero padding bits in graph6 string".into()));
        }
        let mut edges = BTreeSet::new();
        let mut k = 0;
        for j in 1..n {
            for i in 0..j {
                if bit(k) {
                    edges.insert((i, j));
                }
                k += 1;
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn to_graph6(&self) -> Result<String> {
        if self.n > GRAPH6_MAX_VERTICES {
            return Err(Error::Invalid(format!("graph6 output supports at most {GRAPH6_MAX_VERTICES} vertices")));
        }
        let bits: Vec<bool> = (1..self.n).flat_map(|j| (0..j).map(move |i| (i, j))).map(|e| self.edges.contains(&e)).collect();
        let mut out = String::with_capacity(1 + bits.len().div_ceil(6));
        out.push((self.n as u8 + 63) as char);
        for chunk in bits.chunks(6) {
            let v = chunk.iter().enumerate().fold(0u8, |acc, (t, &b)| acc | (u8::from(b) << (5 - t)));
            out.push((v + 63) as char);
        }
        Ok(out)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graph6_strings() {
        assert_eq!(Graph::parse_graph6("A_").unwrap(), Graph::complete(2));
        assert_eq!(Graph::parse_graph6("Bw").unwrap(), Graph::complete(3));
        assert_eq!(Graph::parse_graph6("@").unwrap(), Graph::empty(1));
        assert_eq!(Graph::complete(3).to_graph6().unwrap(), "Bw");
    }

    #[test]
    fn eleven_vertex_graph() {
        let g = Graph::parse_graph6("Jzl[kWq_YE?").unwrap();
        assert_eq!(g.n_vertices(), 11);
        assert_eq!(g.to_graph6().unwrap(), "Jzl[kWq_YE?");
    }

    #[test]
    fn malformed_graph6_is_rejected() {
        for s in ["", "B", "Bww", "B\x20", "Bx", "~?"] {
            assert!(Graph::parse_graph6(s).is_err(), "{s:?}");
        }
    }

    #[test]
    fn edge_list_json_round_trip() {
        let g = Graph::cycle(5);
        let s = g.to_json().unwrap();
        assert_eq!(Graph::from_json(&s).unwrap(), g);
        assert!(Graph::from_json(r#"{"n_vertices": 2, "edges": [[0, 0]]}"#).is_err());
        assert!(Graph::from_json(r#"{"n_vertices": 2, "edges": [[0, 2]]}"#).is_err());
    }

    #[test]
    fn complement_and_adjacency() {
        let g = Graph::cycle(5);
        let c = g.complement();
        assert_eq!(c.n_edges(), 5);
        assert!(!c.has_edge(0, 1) && c.has_edge(0, 2));
        let w = g.adjacency();
        assert_eq!(w.re(0, 1), 1.0);
        assert_eq!(w.re(0, 2), 0.0);
        assert_eq!(g.cut_value(&[1, -1, 1, -1, 1]), 4);
    }
}
