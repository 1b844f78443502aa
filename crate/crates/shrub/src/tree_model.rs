//! (d,k)-tree-models: rooted trees whose leaves are graph vertices, with a
//! symmetric label matrix per internal node and a label renaming per tree edge.
//!
//! Labels are `1..=k` in files and `0..k` in memory.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{content_lines, parse_num, LabeledGraph};

pub type NodeId = usize;

/// Symmetric k×k Boolean matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    k: usize,
    bits: Vec<bool>,
}

impl LabelMatrix {
    pub fn zero(k: usize) -> Self {
        LabelMatrix { k, bits: vec![false; k * k] }
    }

    pub fn from_rows(rows: &[&str]) -> Result<Self> {
        let k = rows.len();
        let mut m = LabelMatrix::zero(k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::domain(format!("matrix dimension mismatch: row {} has length {}, expected {k}", i + 1, row.len())));
            }
            for (j, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.bits[i * k + j] = true,
                    _ => return Err(Error::domain(format!("matrix entry {ch:?} is not 0/1"))),
                }
            }
        }
        if !m.is_symmetric() {
            return Err(Error::domain("matrix is not symmetric"));
        }
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.k + j]
    }

    /// Sets both `[i,j]` and `[j,i]`.
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[i * self.k + j] = value;
        self.bits[j * self.k + i] = value;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.k).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Row `i` as a bitmask; requires `k <= 64`.
    pub fn row_mask(&self, i: usize) -> u64 {
        (0..self.k).filter(|&j| self.get(i, j)).fold(0, |m, j| m | 1 << j)
    }

    fn rows_text(&self) -> Vec<String> {
        (0..self.k).map(|i| (0..self.k).map(|j| if self.get(i, j) { '1' } else { '0' }).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Internal { matrix: Option<LabelMatrix> },
    Leaf { vertex: usize, label: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// ρ from this node's labels to its parent's labels.
    pub rename: Option<Vec<usize>>,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// A rooted tree-model. Construction never fails on shape problems that
/// [`TreeModel::validate`] reports; solvers require a valid model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeModel {
    k: usize,
    nodes: Vec<Node>,
}

impl TreeModel {
    pub fn new(k: usize) -> Self {
        TreeModel { k, nodes: Vec::new() }
    }

    fn push(&mut self, node: Node) -> NodeId {
        let id = self.nodes.len();
        if let Some(p) = node.parent {
            self.nodes[p].children.push(id);
        }
        self.nodes.push(node);
        id
    }

    pub fn add_root(&mut self, matrix: LabelMatrix) -> NodeId {
        let name = format!("n{}", self.nodes.len());
        self.push(Node { name, parent: None, children: Vec::new(), rename: None, kind: NodeKind::Internal { matrix: Some(matrix) } })
    }

    pub fn add_internal(&mut self, parent: NodeId, rename: Vec<usize>, matrix: LabelMatrix) -> NodeId {
        let name = format!("n{}", self.nodes.len());
        self.push(Node {
            name,
            parent: Some(parent),
            children: Vec::new(),
            rename: Some(rename),
            kind: NodeKind::Internal { matrix: Some(matrix) },
        })
    }

    pub fn add_leaf(&mut self, parent: NodeId, rename: Vec<usize>, vertex: usize, label: usize) -> NodeId {
        let name = format!("v{vertex}");
        self.push(Node { name, parent: Some(parent), children: Vec::new(), rename: Some(rename), kind: NodeKind::Leaf { vertex, label } })
    }

    pub fn set_matrix(&mut self, a: NodeId, matrix: LabelMatrix) {
        self.nodes[a].kind = NodeKind::Internal { matrix: Some(matrix) };
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, a: NodeId) -> &Node {
        &self.nodes[a]
    }

    pub fn children(&self, a: NodeId) -> &[NodeId] {
        &self.nodes[a].children
    }

    pub fn parent(&self, a: NodeId) -> Option<NodeId> {
        self.nodes[a].parent
    }

    pub fn is_leaf(&self, a: NodeId) -> bool {
        self.nodes[a].is_leaf()
    }

    /// The unique root; panics on a model that fails validation.
    pub fn root(&self) -> NodeId {
        self.nodes.iter().position(|x| x.parent.is_none()).expect("model has a root")
    }

    pub fn matrix(&self, a: NodeId) -> &LabelMatrix {
        match &self.nodes[a].kind {
            NodeKind::Internal { matrix: Some(m) } => m,
            _ => panic!("node {} has no matrix", self.nodes[a].name),
        }
    }

    /// ρ_{parent(b), b}; identity for the root.
    pub fn rename(&self, b: NodeId) -> &[usize] {
        self.nodes[b].rename.as_deref().expect("non-root node has a rename")
    }

    /// `(vertex, label)` of a leaf.
    pub fn leaf(&self, a: NodeId) -> Option<(usize, usize)> {
        match self.nodes[a].kind {
            NodeKind::Leaf { vertex, label } => Some((vertex, label)),
            NodeKind::Internal { .. } => None,
        }
    }

    /// Number of graph vertices (leaves).
    pub fn n(&self) -> usize {
        self.nodes.iter().filter(|x| x.is_leaf()).count()
    }

    /// Leaf node of each vertex, indexed by vertex id.
    pub fn leaf_nodes(&self) -> Vec<NodeId> {
        let mut out = vec![usize::MAX; self.n()];
        for (a, x) in self.nodes.iter().enumerate() {
            if let NodeKind::Leaf { vertex, .. } = x.kind {
                if vertex < out.len() {
                    out[vertex] = a;
                }
            }
        }
        out
    }

    pub fn depth_of(&self, mut a: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[a].parent {
            a = p;
            d += 1;
            if d > self.nodes.len() {
                break;
            }
        }
        d
    }

    /// Edges on the longest root-leaf path.
    pub fn depth(&self) -> usize {
        (0..self.nodes.len()).filter(|&a| self.is_leaf(a)).map(|a| self.depth_of(a)).max().unwrap_or(0)
    }

    /// Nodes in post-order (children before parents), children in stored order.
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root(), false)];
        while let Some((a, expanded)) = stack.pop() {
            if expanded {
                out.push(a);
            } else {
                stack.push((a, true));
                for &b in self.nodes[a].children.iter().rev() {
                    stack.push((b, false));
                }
            }
        }
        out
    }

    /// Structural diagnostics; empty iff the model is a valid tree-model.
    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        let k = self.k;
        if k == 0 {
            diags.push("k must be at least 1".to_string());
        }
        let roots: Vec<_> = (0..self.nodes.len()).filter(|&a| self.nodes[a].parent.is_none()).collect();
        match roots.len() {
            0 => diags.push("no root".to_string()),
            1 => {}
            _ => diags.push("forest, not tree".to_string()),
        }
        for &r in &roots {
            if self.nodes[r].rename.is_some() {
                diags.push(format!("root has no incoming edge, but node {} carries a rename", self.nodes[r].name));
            }
            if self.nodes[r].is_leaf() {
                diags.push(format!("root {} is a leaf", self.nodes[r].name));
            }
        }
        let mut reached = vec![false; self.nodes.len()];
        let mut stack = roots.clone();
        while let Some(a) = stack.pop() {
            if reached[a] {
                continue;
            }
            reached[a] = true;
            stack.extend(self.nodes[a].children.iter().copied());
        }
        for (a, x) in self.nodes.iter().enumerate() {
            if !reached[a] {
                diags.push(format!("node {} is not reachable from a root", x.name));
            }
            if x.parent.is_some() {
                match &x.rename {
                    None => diags.push(format!("node {} has no rename", x.name)),
                    Some(r) if r.len() != k => diags.push(format!("rename of {} has {} entries, expected {k}", x.name, r.len())),
                    Some(r) if r.iter().any(|&t| t >= k) => diags.push(format!("rename of {} leaves [k]", x.name)),
                    _ => {}
                }
            }
            match &x.kind {
                NodeKind::Leaf { label, .. } => {
                    if *label >= k {
                        diags.push(format!("leaf {} label {} outside [k]", x.name, label + 1));
                    }
                    if !x.children.is_empty() {
                        diags.push(format!("leaf {} has children", x.name));
                    }
                }
                NodeKind::Internal { matrix } => {
                    match matrix {
                        None => diags.push(format!("internal node {} has no matrix", x.name)),
                        Some(m) if m.k() != k => diags.push(format!("matrix of {} is {}x{}, expected {k}x{k}", x.name, m.k(), m.k())),
                        Some(m) if !m.is_symmetric() => diags.push(format!("matrix of {} is not symmetric", x.name)),
                        _ => {}
                    }
                    if x.children.is_empty() {
                        diags.push(format!("internal node {} has no children", x.name));
                    }
                }
            }
        }
        let mut seen = vec![0usize; self.nodes.len()];
        let n = self.n();
        for x in &self.nodes {
            if let NodeKind::Leaf { vertex, .. } = x.kind {
                if vertex >= n {
                    diags.push(format!("leaf {} names vertex {vertex}, but there are only {n} leaves", x.name));
                } else {
                    seen[vertex] += 1;
                }
            }
        }
        for (v, &c) in seen.iter().enumerate().take(n) {
            if c > 1 {
                diags.push(format!("vertex {v} appears on {c} leaves"));
            }
        }
        diags
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid model: {}", d.join("; "))))
        }
    }

    /// λ_a(v): the label of `v` as seen at node `a`.
    pub fn label_at(&self, a: NodeId, v: usize) -> Result<usize> {
        let leaf = self.leaf_nodes().get(v).copied().filter(|&x| x != usize::MAX).ok_or_else(|| Error::domain(format!("no vertex {v}")))?;
        let (_, mut label) = self.leaf(leaf).expect("leaf");
        let mut x = leaf;
        while x != a {
            let p = self.nodes[x].parent.ok_or_else(|| Error::domain(format!("vertex {v} is not below node {}", self.nodes[a].name)))?;
            label = self.rename(x)[label];
            x = p;
        }
        Ok(label)
    }

    /// Per node, the vertices below it and their labels there, in leaf order.
    pub fn views(&self) -> Vec<NodeView> {
        let mut views: Vec<NodeView> = vec![NodeView::default(); self.nodes.len()];
        for a in self.post_order() {
            let mut view = NodeView::default();
            if let Some((v, l)) = self.leaf(a) {
                view.vertices.push(v);
                view.labels.push(l);
            } else {
                for &b in &self.nodes[a].children {
                    let rho = self.rename(b);
                    let child = std::mem::take(&mut views[b]);
                    view.vertices.extend(child.vertices.iter().copied());
                    view.labels.extend(child.labels.iter().map(|&l| rho[l]));
                    views[b] = child;
                }
            }
            view.counts = vec![0; self.k];
            for &l in &view.labels {
                view.counts[l] += 1;
            }
            views[a] = view;
        }
        views
    }

    /// Least common ancestor by parent walking with depth equalization.
    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        let (mut da, mut db) = (self.depth_of(a), self.depth_of(b));
        while da > db {
            a = self.nodes[a].parent.expect("parent");
            da -= 1;
        }
        while db > da {
            b = self.nodes[b].parent.expect("parent");
            db -= 1;
        }
        while a != b {
            a = self.nodes[a].parent.expect("parent");
            b = self.nodes[b].parent.expect("parent");
        }
        a
    }

    /// The graph defined by the LCA rule. Each pair of vertices is decided
    /// once, at the node where their root paths meet.
    pub fn realize(&self) -> LabeledGraph {
        let views = self.views();
        let mut edges = Vec::new();
        for a in (0..self.nodes.len()).filter(|&a| !self.is_leaf(a)) {
            let m = self.matrix(a);
            let parts: Vec<Vec<(usize, usize)>> = self.nodes[a]
                .children
                .iter()
                .map(|&b| {
                    let rho = self.rename(b);
                    views[b].vertices.iter().zip(&views[b].labels).map(|(&v, &l)| (v, rho[l])).collect()
                })
                .collect();
            for (i, left) in parts.iter().enumerate() {
                for right in &parts[i + 1..] {
                    for &(u, lu) in left {
                        for &(v, lv) in right {
                            if m.get(lu, lv) {
                                edges.push((u, v));
                            }
                        }
                    }
                }
            }
        }
        LabeledGraph::from_edges(self.n(), &edges).expect("each pair is decided once")
    }

    /// Number of edges with both endpoints below each node.
    pub fn inner_edge_counts(&self, g: &LabeledGraph) -> Vec<usize> {
        let leaves = self.leaf_nodes();
        let mut counts = vec![0; self.nodes.len()];
        for &(u, v) in g.edges() {
            let mut a = self.lca(leaves[u], leaves[v]);
            loop {
                counts[a] += 1;
                match self.nodes[a].parent {
                    Some(p) => a = p,
                    None => break,
                }
            }
        }
        counts
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("shrubmodel 1\nk {}\n", self.k);
        for a in self.pre_order() {
            let x = &self.nodes[a];
            match (&x.kind, x.parent) {
                (NodeKind::Leaf { vertex, label }, Some(p)) => {
                    let _ = writeln!(out, "leaf {} child-of {} vertex {vertex} label {}", x.name, self.nodes[p].name, label + 1);
                }
                (_, Some(p)) => {
                    let _ = writeln!(out, "node {} child-of {}", x.name, self.nodes[p].name);
                }
                (_, None) => {
                    let _ = writeln!(out, "node {} root", x.name);
                }
            }
        }
        for a in self.pre_order() {
            let x = &self.nodes[a];
            if let NodeKind::Internal { matrix: Some(m) } = &x.kind {
                let _ = writeln!(out, "matrix {} {}", x.name, m.rows_text().join(" "));
            }
        }
        for a in self.pre_order() {
            let x = &self.nodes[a];
            if let Some(r) = &x.rename {
                if r.iter().enumerate().all(|(i, &t)| i == t) {
                    let _ = writeln!(out, "rename {} id", x.name);
                } else {
                    let items: Vec<String> = r.iter().map(|t| (t + 1).to_string()).collect();
                    let _ = writeln!(out, "rename {} {}", x.name, items.join(" "));
                }
            }
        }
        out
    }

    fn pre_order(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = (0..self.nodes.len()).filter(|&a| self.nodes[a].parent.is_none()).rev().collect();
        while let Some(a) = stack.pop() {
            out.push(a);
            for &b in self.nodes[a].children.iter().rev() {
                stack.push(b);
            }
        }
        out
    }

    /// Renames nodes to unique names (`r`, `iN`, `vN`) for stable output.
    pub fn canonical_names(mut self) -> Self {
        let mut counter = 0;
        for a in 0..self.nodes.len() {
            let name = match (&self.nodes[a].kind, self.nodes[a].parent) {
                (NodeKind::Leaf { vertex, .. }, _) => format!("v{vertex}"),
                (_, None) => "r".to_string(),
                _ => {
                    counter += 1;
                    format!("i{counter}")
                }
            };
            self.nodes[a].name = name;
        }
        self
    }
}

/// V_a with λ_a, and the per-label counts |V_a(i)|.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeView {
    pub vertices: Vec<usize>,
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
}

struct RawNode {
    line: usize,
    parent: Option<String>,
    leaf: Option<(usize, usize)>,
}

/// Parses the line-oriented model format.
pub fn parse_tree_model(text: &str) -> Result<TreeModel> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, t)) if t == ["shrubmodel", "1"] => {}
        Some((l, _)) => return Err(Error::parse(l, "expected header \"shrubmodel 1\"")),
        None => return Err(Error::parse(1, "empty input")),
    }
    let k: usize = match lines.next() {
        Some((l, t)) if t.len() == 2 && t[0] == "k" => parse_num(l, t[1], "label count")?,
        Some((l, _)) => return Err(Error::parse(l, "expected \"k <k>\"")),
        None => return Err(Error::parse(2, "missing label count")),
    };
    if k == 0 {
        return Err(Error::parse(2, "k must be at least 1"));
    }
    let mut order: Vec<String> = Vec::new();
    let mut raw: HashMap<String, RawNode> = HashMap::new();
    let mut matrices: HashMap<String, (usize, LabelMatrix)> = HashMap::new();
    let mut renames: HashMap<String, (usize, Vec<usize>)> = HashMap::new();
    for (l, t) in lines {
        match t[0] {
            "node" if t.len() == 3 && t[2] == "root" || t.len() == 4 && t[2] == "child-of" => {
                let parent = (t.len() == 4).then(|| t[3].to_string());
                if raw.insert(t[1].to_string(), RawNode { line: l, parent, leaf: None }).is_some() {
                    return Err(Error::parse(l, format!("node {} declared twice", t[1])));
                }
                order.push(t[1].to_string());
            }
            "leaf" if t.len() == 8 && t[2] == "child-of" && t[4] == "vertex" && t[6] == "label" => {
                let v: usize = parse_num(l, t[5], "vertex")?;
                let lab: usize = parse_num(l, t[7], "label")?;
                if lab == 0 || lab > k {
                    return Err(Error::parse(l, format!("label {lab} outside 1..={k}")));
                }
                let node = RawNode { line: l, parent: Some(t[3].to_string()), leaf: Some((v, lab - 1)) };
                if raw.insert(t[1].to_string(), node).is_some() {
                    return Err(Error::parse(l, format!("node {} declared twice", t[1])));
                }
                order.push(t[1].to_string());
            }
            "matrix" if t.len() >= 2 => {
                if t.len() - 2 != k {
                    return Err(Error::parse(l, format!("matrix dimension mismatch: {} rows for k = {k}", t.len() - 2)));
                }
                let m = LabelMatrix::from_rows(&t[2..]).map_err(|e| Error::parse(l, e.to_string()))?;
                if matrices.insert(t[1].to_string(), (l, m)).is_some() {
                    return Err(Error::parse(l, format!("second matrix for {}", t[1])));
                }
            }
            "rename" if t.len() == 3 && t[2] == "id" => {
                renames.insert(t[1].to_string(), (l, (0..k).collect()));
            }
            "rename" if t.len() >= 2 => {
                if t.len() - 2 != k {
                    return Err(Error::parse(l, format!("rename has {} targets, expected {k}", t.len() - 2)));
                }
                let mut r = Vec::with_capacity(k);
                for tok in &t[2..] {
                    let x: usize = parse_num(l, tok, "rename target")?;
                    if x == 0 || x > k {
                        return Err(Error::parse(l, format!("rename out of range: target {x} outside 1..={k}")));
                    }
                    r.push(x - 1);
                }
                renames.insert(t[1].to_string(), (l, r));
            }
            _ => return Err(Error::parse(l, format!("unrecognised line {:?}", t.join(" ")))),
        }
    }
    let index: HashMap<&str, usize> = order.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut model = TreeModel::new(k);
    for name in &order {
        let r = &raw[name];
        let parent = match &r.parent {
            Some(p) => match index.get(p.as_str()) {
                Some(&pi) if raw[p].leaf.is_none() => Some(pi),
                Some(_) => return Err(Error::parse(r.line, format!("parent {p} of {name} is a leaf"))),
                None => return Err(Error::parse(r.line, format!("orphan node {name}: parent {p} is not declared"))),
            },
            None => None,
        };
        let kind = match r.leaf {
            Some((vertex, label)) => NodeKind::Leaf { vertex, label },
            None => NodeKind::Internal { matrix: None },
        };
        let rename = renames.remove(name).map(|(_, x)| x);
        if parent.is_some() && rename.is_none() {
            return Err(Error::parse(r.line, format!("node {name} has no rename line")));
        }
        model.nodes.push(Node { name: name.clone(), parent, children: Vec::new(), rename, kind });
    }
    if let Some((name, (l, _))) = renames.into_iter().min_by_key(|(_, (l, _))| *l) {
        return Err(Error::parse(l, format!("rename for unknown node {name}")));
    }
    for a in 0..model.nodes.len() {
        if let Some(p) = model.nodes[a].parent {
            model.nodes[p].children.push(a);
        }
    }
    for (name, (l, m)) in matrices {
        match index.get(name.as_str()) {
            Some(&a) if !model.nodes[a].is_leaf() => model.nodes[a].kind = NodeKind::Internal { matrix: Some(m) },
            Some(_) => return Err(Error::parse(l, format!("matrix given for leaf {name}"))),
            None => return Err(Error::parse(l, format!("matrix for unknown node {name}"))),
        }
    }
    for (a, name) in order.iter().enumerate() {
        if matches!(model.nodes[a].kind, NodeKind::Internal { matrix: None }) {
            return Err(Error::parse(raw[name].line, format!("missing matrix for internal node {name}")));
        }
    }
    let n = model.n();
    let mut seen = vec![false; n];
    for name in &order {
        if let Some((v, _)) = raw[name].leaf {
            if v >= n || seen[v] {
                return Err(Error::parse(raw[name].line, format!("leaf/vertex bijection violated at vertex {v} ({n} leaves)")));
            }
            seen[v] = true;
        }
    }
    Ok(model)
}

/// Parameters for [`random_model`].
#[derive(Debug, Clone, Copy)]
pub struct RandomModelSpec {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Probability that a matrix entry is 1.
    pub density: f64,
}

/// A random model with exactly `n` leaves, `k` labels and depth at most `d`.
pub fn random_model<R: Rng>(rng: &mut R, spec: RandomModelSpec) -> TreeModel {
    let RandomModelSpec { n, k, d, density } = spec;
    assert!(n >= 1 && k >= 1 && d >= 1);
    let random_matrix = |rng: &mut R| {
        let mut m = LabelMatrix::zero(k);
        for i in 0..k {
            for j in i..k {
                if rng.gen_bool(density) {
                    m.set(i, j, true);
                }
            }
        }
        m
    };
    let random_rename = |rng: &mut R| (0..k).map(|_| rng.gen_range(0..k)).collect::<Vec<_>>();
    // Levels of internal nodes; leaves hang under random internal nodes.
    let mut levels: Vec<Vec<usize>> = vec![vec![0]];
    let mut parents: Vec<Option<usize>> = vec![None];
    for depth in 1..d {
        let width = rng.gen_range(1..=n.div_ceil(2).max(1));
        let prev = levels[depth - 1].clone();
        let mut level = Vec::new();
        for _ in 0..width {
            parents.push(Some(prev[rng.gen_range(0..prev.len())]));
            level.push(parents.len() - 1);
        }
        levels.push(level);
    }
    let internal = parents.len();
    let mut leaf_parent = Vec::with_capacity(n);
    for _ in 0..n {
        // Mostly attach at the deepest level so depth d is usually reached.
        let lvl = if rng.gen_bool(0.7) { d - 1 } else { rng.gen_range(0..d) };
        let lv = &levels[lvl];
        leaf_parent.push(lv[rng.gen_range(0..lv.len())]);
    }
    let mut has_child = vec![false; internal];
    for &p in &leaf_parent {
        has_child[p] = true;
    }
    let mut alive = has_child.clone();
    for i in (1..internal).rev() {
        if alive[i] {
            alive[parents[i].unwrap()] = true;
        }
    }
    alive[0] = true;
    let mut model = TreeModel::new(k);
    let mut ids = vec![usize::MAX; internal];
    for i in 0..internal {
        if !alive[i] {
            continue;
        }
        let m = random_matrix(rng);
        ids[i] = match parents[i] {
            None => model.add_root(m),
            Some(p) => {
                let r = random_rename(rng);
                model.add_internal(ids[p], r, m)
            }
        };
    }
    let mut vertices: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        vertices.swap(i, j);
    }
    for (slot, &p) in leaf_parent.iter().enumerate() {
        let r = random_rename(rng);
        let label = rng.gen_range(0..k);
        model.add_leaf(ids[p], r, vertices[slot], label);
    }
    model.canonical_names()
}

/// Hand-built models for common graphs.
pub mod families {
    use super::{LabelMatrix, TreeModel};

    fn identity(k: usize) -> Vec<usize> {
        (0..k).collect()
    }

    /// Depth-1 model with one label and matrix `[bit]`: K_n or the edgeless graph.
    pub fn flat(n: usize, bit: bool) -> TreeModel {
        let mut m = LabelMatrix::zero(1);
        m.set(0, 0, bit);
        let mut t = TreeModel::new(1);
        let r = t.add_root(m);
        for v in 0..n {
            t.add_leaf(r, identity(1), v, 0);
        }
        t.canonical_names()
    }

    pub fn complete(n: usize) -> TreeModel {
        flat(n, true)
    }

    pub fn edgeless(n: usize) -> TreeModel {
        flat(n, false)
    }

    /// Complete bipartite K_{a,b}: two labels joined by the matrix.
    pub fn complete_bipartite(a: usize, b: usize) -> TreeModel {
        let mut m = LabelMatrix::zero(2);
        m.set(0, 1, true);
        let mut t = TreeModel::new(2);
        let r = t.add_root(m);
        for v in 0..a + b {
            t.add_leaf(r, identity(2), v, usize::from(v >= a));
        }
        t.canonical_names()
    }

    /// Path P_n by nesting: the node for P_m holds leaf m-1 and the node for
    /// P_{m-1}. At that node the new end has label 3, the old end label 1 and
    /// every other vertex label 2. Depth is n - 1.
    pub fn path(n: usize) -> TreeModel {
        let mut t = TreeModel::new(3);
        let mut m = LabelMatrix::zero(3);
        m.set(2, 0, true);
        let mut parent = t.add_root(if n >= 2 { m.clone() } else { LabelMatrix::zero(3) });
        if n == 0 {
            return t;
        }
        for v in (1..n).rev() {
            t.add_leaf(parent, identity(3), v, 2);
            if v == 1 {
                t.add_leaf(parent, identity(3), 0, 0);
            } else {
                parent = t.add_internal(parent, vec![1, 1, 0], m.clone());
            }
        }
        if n == 1 {
            t.add_leaf(parent, identity(3), 0, 0);
        }
        t.canonical_names()
    }
}
