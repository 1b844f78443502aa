//! Plain undirected graphs with optional vertex weights and homomorphism lists.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Undirected simple graph on `0..n`.
///
/// Adjacency is kept both as word bitsets (for subset-heavy oracles) and as a
/// sorted pair list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    n: usize,
    adj: Vec<Vec<u64>>,
    edges: Vec<(usize, usize)>,
    weights: BTreeMap<usize, u64>,
    lists: BTreeMap<usize, Vec<usize>>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl LabeledGraph {
    pub fn new(n: usize) -> Self {
        LabeledGraph {
            n,
            adj: vec![vec![0; words(n)]; n],
            edges: Vec::new(),
            weights: BTreeMap::new(),
            lists: BTreeMap::new(),
        }
    }

    /// Builds a graph from an edge list; rejects loops, duplicates and bad endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = LabeledGraph::new(n);
        let mut sorted = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::domain(format!("endpoint out of range: {u} {v} (n = {n})")));
            }
            if u == v {
                return Err(Error::domain(format!("self-loop at {u}")));
            }
            sorted.push((u.min(v), u.max(v)));
        }
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!("duplicate edge {} {}", w[0].0, w[0].1)));
        }
        for &(u, v) in &sorted {
            g.adj[u][v / 64] |= 1 << (v % 64);
            g.adj[v][u / 64] |= 1 << (u % 64);
        }
        g.edges = sorted;
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::domain(format!("endpoint out of range: {u} {v} (n = {})", self.n)));
        }
        if u == v {
            return Err(Error::domain(format!("self-loop at {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::domain(format!("duplicate edge {u} {v}")));
        }
        self.adj[u][v / 64] |= 1 << (v % 64);
        self.adj[v][u / 64] |= 1 << (u % 64);
        let e = (u.min(v), u.max(v));
        let pos = self.edges.binary_search(&e).unwrap_err();
        self.edges.insert(pos, e);
        Ok(())
    }

    pub fn set_weight(&mut self, v: usize, w: u64) -> Result<()> {
        if v >= self.n {
            return Err(Error::domain(format!("weight for missing vertex {v}")));
        }
        if w == 0 {
            return Err(Error::domain(format!("weight of vertex {v} must be positive")));
        }
        self.weights.insert(v, w);
        Ok(())
    }

    pub fn set_list(&mut self, v: usize, list: Vec<usize>) -> Result<()> {
        if v >= self.n {
            return Err(Error::domain(format!("list for missing vertex {v}")));
        }
        let mut list = list;
        list.sort_unstable();
        list.dedup();
        self.lists.insert(v, list);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u][v / 64] >> (v % 64) & 1 == 1
    }

    /// Neighbourhood bitset of `v`, one bit per vertex.
    pub fn neighbors_words(&self, v: usize) -> &[u64] {
        &self.adj[v]
    }

    /// Neighbourhood as a single word; only meaningful when `n <= 64`.
    pub fn neighbors_mask(&self, v: usize) -> u64 {
        debug_assert!(self.n <= 64);
        self.adj[v][0]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.has_edge(v, u))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Weight of `v`; vertices without an explicit weight weigh 1.
    pub fn weight(&self, v: usize) -> u64 {
        self.weights.get(&v).copied().unwrap_or(1)
    }

    pub fn has_weights(&self) -> bool {
        !self.weights.is_empty()
    }

    /// Allowed pattern vertices of `v`; `None` means unrestricted.
    pub fn list(&self, v: usize) -> Option<&[usize]> {
        self.lists.get(&v).map(|l| l.as_slice())
    }

    pub fn has_lists(&self) -> bool {
        !self.lists.is_empty()
    }

    /// Same vertices and edges, ignoring weights and lists.
    pub fn same_edges(&self, other: &LabeledGraph) -> bool {
        self.n == other.n && self.edges == other.edges
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("graph 1\nn {}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "e {u} {v}");
        }
        for (v, w) in &self.weights {
            let _ = writeln!(out, "w {v} {w}");
        }
        for (v, l) in &self.lists {
            let items: Vec<String> = l.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "list {v} {}", items.join(" "));
        }
        out
    }
}

/// Splits text into numbered, comment-stripped, non-empty lines.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub(crate) fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::parse(line, format!("bad {what}: {tok:?}")))
}

/// Parses the line-oriented graph format.
pub fn parse_graph(text: &str) -> Result<LabeledGraph> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, t)) if t == ["graph", "1"] => {}
        Some((l, _)) => return Err(Error::parse(l, "expected header \"graph 1\"")),
        None => return Err(Error::parse(1, "empty input")),
    }
    let mut g = match lines.next() {
        Some((l, t)) if t.len() == 2 && t[0] == "n" => LabeledGraph::new(parse_num(l, t[1], "vertex count")?),
        Some((l, _)) => return Err(Error::parse(l, "expected \"n <count>\"")),
        None => return Err(Error::parse(2, "missing vertex count")),
    };
    let at = |l: usize| move |e: Error| Error::parse(l, e.to_string());
    for (l, t) in lines {
        match t[0] {
            "e" if t.len() == 3 => {
                let u: usize = parse_num(l, t[1], "endpoint")?;
                let v: usize = parse_num(l, t[2], "endpoint")?;
                if u >= v && u < g.n && v < g.n && u != v {
                    return Err(Error::parse(l, format!("edge endpoints must satisfy u < v, got {u} {v}")));
                }
                g.add_edge(u, v).map_err(at(l))?;
            }
            "w" if t.len() == 3 => {
                let v: usize = parse_num(l, t[1], "vertex")?;
                let w: u64 = parse_num(l, t[2], "weight")?;
                g.set_weight(v, w).map_err(at(l))?;
            }
            "list" if t.len() >= 2 => {
                let v: usize = parse_num(l, t[1], "vertex")?;
                let items = t[2..].iter().map(|x| parse_num(l, x, "pattern index")).collect::<Result<Vec<usize>>>()?;
                g.set_list(v, items).map_err(at(l))?;
            }
            _ => return Err(Error::parse(l, format!("unrecognised line {:?}", t.join(" ")))),
        }
    }
    Ok(g)
}

/// True iff no edge of `g` has both endpoints in `s`.
pub fn is_independent_set(g: &LabeledGraph, s: &[usize]) -> bool {
    s.iter().enumerate().all(|(i, &u)| s[i + 1..].iter().all(|&v| !g.has_edge(u, v)))
}

/// Number of edges with exactly one endpoint in `x`.
pub fn cut_size(g: &LabeledGraph, x: &[usize]) -> usize {
    let mut inside = vec![false; g.n()];
    for &v in x {
        inside[v] = true;
    }
    g.edges().iter().filter(|&&(u, v)| inside[u] != inside[v]).count()
}

/// Common small graphs used by tests and generators.
pub mod families {
    use super::LabeledGraph;

    pub fn complete(n: usize) -> LabeledGraph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        LabeledGraph::from_edges(n, &edges).expect("valid edges")
    }

    pub fn path(n: usize) -> LabeledGraph {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        LabeledGraph::from_edges(n, &edges).expect("valid edges")
    }

    pub fn cycle(n: usize) -> LabeledGraph {
        assert!(n >= 3);
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        edges.push((0, n - 1));
        LabeledGraph::from_edges(n, &edges).expect("valid edges")
    }

    pub fn complete_bipartite(a: usize, b: usize) -> LabeledGraph {
        let edges: Vec<_> = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))).collect();
        LabeledGraph::from_edges(a + b, &edges).expect("valid edges")
    }

    pub fn edgeless(n: usize) -> LabeledGraph {
        LabeledGraph::new(n)
    }
}
