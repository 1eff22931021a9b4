//! Undirected simple graphs on `0..n` stored as symmetric bit-matrix rows.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Symmetric adjacency bit-matrix. Row `i` holds the neighbours of `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph").field("n", &self.n).field("edges", &self.edges().collect::<Vec<_>>()).finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        let words = n.div_ceil(WORD);
        Graph { n, words, bits: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.set_edge(i, j);
            }
        }
        g
    }

    /// Builds a graph from an edge list, rejecting self-loops and
    /// out-of-range endpoints. Repeated edges are merged.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbourhood bitset of `i`.
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.row(i)[j / WORD] >> (j % WORD) & 1 == 1
    }

    #[inline]
    pub(crate) fn set_edge(&mut self, i: usize, j: usize) {
        let w = self.words;
        self.bits[i * w + j / WORD] |= 1 << (j % WORD);
        self.bits[j * w + i / WORD] |= 1 << (i % WORD);
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        for v in [i, j] {
            if v >= self.n {
                return Err(Error::Index { index: v, n: self.n });
            }
        }
        if i == j {
            return Err(Error::Param(format!("self-loop at vertex {i}")));
        }
        self.set_edge(i, j);
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        if i < self.n && j < self.n {
            let w = self.words;
            self.bits[i * w + j / WORD] &= !(1 << (j % WORD));
            self.bits[j * w + i / WORD] &= !(1 << (i % WORD));
        }
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        if i >= self.n {
            return Err(Error::Index { index: i, n: self.n });
        }
        Ok(popcount(self.row(i)))
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| popcount(self.row(i))).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| popcount(self.row(i))).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        popcount(&self.bits) / 2
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            let row = self.row(i);
            (i + 1..self.n).filter(move |&j| row[j / WORD] >> (j % WORD) & 1 == 1).map(move |j| (i, j))
        })
    }

    /// Number of edges with one endpoint in `right` and the other in `left`.
    /// The two sets are expected to be disjoint.
    pub fn block_edges(&self, right: &[usize], left: &[usize]) -> usize {
        let mask = VertexMask::from_vertices(self.n, left);
        right.iter().map(|&r| mask.count_in(self.row(r))).sum()
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permute(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n);
        let mut g = Graph::empty(self.n);
        for (i, j) in self.edges() {
            g.set_edge(perm[i], perm[j]);
        }
        g
    }

    /// Edge-list text: an `n <N>` header then one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}").unwrap();
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut graph: Option<Graph> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let err = |msg: String| Error::Parse { line, msg };
            match graph.as_mut() {
                None => {
                    if fields.len() != 2 || fields[0] != "n" {
                        return Err(err(format!("expected header `n <N>`, found `{content}`")));
                    }
                    let n: usize =
                        fields[1].parse().map_err(|_| err(format!("invalid vertex count `{}`", fields[1])))?;
                    graph = Some(Graph::empty(n));
                }
                Some(g) => {
                    if fields.len() != 2 {
                        return Err(err(format!("expected `i j`, found `{content}`")));
                    }
                    let parse_v = |s: &str| s.parse::<usize>().map_err(|_| err(format!("invalid vertex `{s}`")));
                    let (i, j) = (parse_v(fields[0])?, parse_v(fields[1])?);
                    if i >= g.n || j >= g.n {
                        return Err(err(format!("vertex out of range in `{content}` (n = {})", g.n)));
                    }
                    if i == j {
                        return Err(err(format!("self-loop at vertex {i}")));
                    }
                    if g.has_edge(i, j) {
                        return Err(err(format!("duplicate edge {} {}", i.min(j), i.max(j))));
                    }
                    g.set_edge(i, j);
                }
            }
        }
        graph.ok_or(Error::Parse { line: text.lines().count().max(1), msg: "missing `n <N>` header".into() })
    }
}

impl FromStr for Graph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Graph> {
        Graph::parse_edge_list(s)
    }
}

pub(crate) fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Bitset over `0..n`, sized to match a graph row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct VertexMask {
    bits: Vec<u64>,
}

impl VertexMask {
    pub fn new(n: usize) -> VertexMask {
        VertexMask { bits: vec![0; n.div_ceil(WORD)] }
    }

    pub fn from_vertices(n: usize, vs: &[usize]) -> VertexMask {
        let mut m = VertexMask::new(n);
        for &v in vs {
            m.insert(v);
        }
        m
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.bits[v / WORD] |= 1 << (v % WORD);
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.bits[v / WORD] >> (v % WORD) & 1 == 1
    }

    /// `|row ∩ self|`.
    #[inline]
    pub fn count_in(&self, row: &[u64]) -> usize {
        row.iter().zip(&self.bits).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn basic_quantities() {
        let k4 = Graph::complete(4);
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(k4.max_degree(), 3);

        let e = Graph::empty(5);
        assert_eq!(e.edge_count(), 0);
        assert_eq!(e.max_degree(), 0);
        assert_eq!(Graph::empty(0).max_degree(), 0);

        let p = path3();
        assert_eq!(p.degrees(), vec![1, 2, 1]);
        assert_eq!(p.max_degree(), 2);
        assert_eq!(p.degree(3), Err(Error::Index { index: 3, n: 3 }));
    }

    #[test]
    fn symmetric_without_loops() {
        let g = Graph::from_edges(70, [(0, 69), (3, 64), (10, 11)]).unwrap();
        for i in 0..70 {
            assert!(!g.has_edge(i, i));
            for j in 0..70 {
                assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
            }
        }
        assert_eq!(g.edge_count(), 3);
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn triangle_serializes_sorted() {
        let t = Graph::from_edges(3, [(2, 1), (0, 2), (1, 0)]).unwrap();
        assert_eq!(t.to_edge_list(), "n 3\n0 1\n0 2\n1 2\n");
        assert_eq!(Graph::empty(3).to_edge_list(), "n 3\n");
        assert_eq!(Graph::parse_edge_list("n 3\n").unwrap(), Graph::empty(3));
    }

    #[test]
    fn parse_ignores_comments_and_blank_lines() {
        let text = "# header comment\n\nn 4\n0 1 # trailing\n\n2 3\n";
        let g: Graph = text.parse().unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("n 3\n0 1\n0 1\n", 3),
            ("n 3\n1 0\n0 1\n", 3),
            ("n 3\n2 2\n", 2),
            ("n 3\n0 3\n", 2),
            ("n 3\n0 x\n", 2),
            ("n 3\n0 1 2\n", 2),
            ("\n0 1\n", 2),
            ("n -1\n", 1),
        ];
        for (text, want) in cases {
            match Graph::parse_edge_list(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
        assert!(matches!(Graph::parse_edge_list(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn block_edges_counts_cross_pairs() {
        let g = Graph::complete(6);
        assert_eq!(g.block_edges(&[0, 1], &[2, 3, 4]), 6);
        let p = path3();
        assert_eq!(p.block_edges(&[1], &[0, 2]), 2);
        assert_eq!(p.block_edges(&[0], &[2]), 0);
    }
}
