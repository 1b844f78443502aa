//! Reduction from Longest Common Subsequence to Independent Set, with an
//! explicit tree-model of depth `2·log₂ t + 4` over `14r·log₂ N − 3` labels.
//!
//! Positions `I` are 0-based and bit `i` of a position counts from the most
//! significant of its `log N` bits. The canonical vertex order is: every
//! selection gadget (by `q`, then `p`), every inferiority gadget (by `q`, then
//! `p`), every matching gadget (by `q`, then `p`, then `(I, J)`).

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{content_lines, parse_num, LabeledGraph};
use crate::oracle::independence_number;
use crate::tree_model::{LabelMatrix, NodeId, TreeModel};

/// Letter appended by padding when it is not already in the alphabet.
pub const PAD_LETTER: char = '♠';

/// `r` strings of length `N` over an alphabet, and a target length `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcsInstance {
    pub n: usize,
    pub t: usize,
    pub alphabet: Vec<char>,
    pub strings: Vec<Vec<char>>,
}

impl LcsInstance {
    pub fn new(t: usize, alphabet: &str, strings: &[&str]) -> Result<Self> {
        let strings: Vec<Vec<char>> = strings.iter().map(|s| s.chars().collect()).collect();
        let n = strings.first().map_or(0, Vec::len);
        let inst = LcsInstance { n, t, alphabet: alphabet.chars().collect(), strings };
        inst.check()?;
        Ok(inst)
    }

    fn check(&self) -> Result<()> {
        if self.alphabet.is_empty() {
            return Err(Error::domain("empty alphabet"));
        }
        if self.t == 0 {
            return Err(Error::domain("t must be at least 1"));
        }
        if self.strings.is_empty() {
            return Err(Error::domain("at least one string is required"));
        }
        if self.n == 0 {
            return Err(Error::domain("strings must be nonempty"));
        }
        if self.t > self.n {
            return Err(Error::domain(format!("t = {} exceeds N = {}", self.t, self.n)));
        }
        for (p, s) in self.strings.iter().enumerate() {
            if s.len() != self.n {
                return Err(Error::domain(format!("string {} has length {}, expected {}", p + 1, s.len(), self.n)));
            }
            if let Some(c) = s.iter().find(|c| !self.alphabet.contains(c)) {
                return Err(Error::domain(format!("string {} uses {c:?} outside the alphabet", p + 1)));
            }
        }
        Ok(())
    }

    pub fn r(&self) -> usize {
        self.strings.len()
    }

    /// `log₂ N`; only meaningful after padding.
    pub fn log_n(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    /// `M_p`: position pairs `(I, J)` with `s_p[I] = s_{p+1}[J]`, in
    /// lexicographic order.
    pub fn matches(&self, p: usize) -> Vec<(usize, usize)> {
        let (a, b) = (&self.strings[p], &self.strings[p + 1]);
        (0..self.n).flat_map(|i| (0..self.n).filter(move |&j| a[i] == b[j]).map(move |j| (i, j))).collect()
    }

    /// True iff the strings share a common subsequence of length `t`.
    pub fn brute_force(&self) -> Result<bool> {
        crate::oracle::brute_lcs(&self.strings, self.t)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("lcs 1\nN {} t {}\nalphabet {}\n", self.n, self.t, self.alphabet.iter().collect::<String>());
        for s in &self.strings {
            let _ = writeln!(out, "{}", s.iter().collect::<String>());
        }
        out
    }
}

/// Parses `lcs 1`, `N <N> t <t>`, `alphabet <chars>`, then one string per line.
pub fn parse_lcs(text: &str) -> Result<LcsInstance> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, toks)) if toks == ["lcs", "1"] => {}
        Some((l, _)) => return Err(Error::parse(l, "expected header \"lcs 1\"")),
        None => return Err(Error::parse(1, "empty input")),
    }
    let (n, t) = match lines.next() {
        Some((l, toks)) if toks.len() == 4 && toks[0] == "N" && toks[2] == "t" => (parse_num::<usize>(l, toks[1], "N")?, parse_num::<usize>(l, toks[3], "t")?),
        Some((l, _)) => return Err(Error::parse(l, "expected \"N <N> t <t>\"")),
        None => return Err(Error::parse(0, "missing \"N <N> t <t>\" line")),
    };
    let alphabet: Vec<char> = match lines.next() {
        Some((_, toks)) if toks.len() == 2 && toks[0] == "alphabet" => toks[1].chars().collect(),
        Some((l, _)) => return Err(Error::parse(l, "expected \"alphabet <chars>\"")),
        None => return Err(Error::parse(0, "missing alphabet line")),
    };
    let mut strings = Vec::new();
    for (l, toks) in lines {
        if toks.len() != 1 {
            return Err(Error::parse(l, "expected one string per line"));
        }
        let s: Vec<char> = toks[0].chars().collect();
        if s.len() != n {
            return Err(Error::parse(l, format!("string has length {}, expected N = {n}", s.len())));
        }
        strings.push(s);
    }
    let inst = LcsInstance { n, t, alphabet, strings };
    inst.check()?;
    Ok(inst)
}

/// Appends a fresh letter `2^{⌈log₂ N⌉} − N` times to every string and adds the
/// same amount to `t`. `N = 1` is padded to 2 so that positions have a bit.
pub fn pad_to_power_of_two(inst: &LcsInstance) -> LcsInstance {
    let target = inst.n.next_power_of_two().max(2);
    let extra = target - inst.n;
    if extra == 0 {
        return inst.clone();
    }
    let pad = std::iter::once(PAD_LETTER).chain(('\u{2660}'..='\u{26ff}').chain('A'..='z')).find(|c| !inst.alphabet.contains(c)).expect("a fresh letter");
    let mut out = inst.clone();
    out.alphabet.push(pad);
    for s in &mut out.strings {
        s.extend(std::iter::repeat(pad).take(extra));
    }
    out.n = target;
    out.t += extra;
    out
}

/// A vertex of the reduction graph by its gadget coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    /// `x`-endpoint of the `i`-edge of `S_p^q`.
    Selection { p: usize, q: usize, i: usize, x: usize },
    /// `v_i^x` of `Inf(p, q)`.
    InfPair { p: usize, q: usize, i: usize, x: usize },
    /// Member `j` of `V_i^{01}` of `Inf(p, q)`.
    InfSet { p: usize, q: usize, i: usize, j: usize },
    /// `x`-endpoint of the `i`-edge of the copy of `S_{p+side}^q` in
    /// `Match(p, q)` for the pair `(a, b)`.
    MatchCopy { p: usize, q: usize, a: usize, b: usize, side: usize, i: usize, x: usize },
    /// Selector `v^q_{p,a,b}`.
    Selector { p: usize, q: usize, a: usize, b: usize },
}

/// Vertex ids of every gadget part.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexAtlas {
    parts: Vec<Part>,
    index: HashMap<Part, usize>,
}

impl VertexAtlas {
    fn push(&mut self, part: Part) -> usize {
        let id = self.parts.len();
        self.parts.push(part);
        self.index.insert(part, id);
        id
    }

    pub fn id(&self, part: Part) -> Option<usize> {
        self.index.get(&part).copied()
    }

    fn at(&self, part: Part) -> usize {
        self.index[&part]
    }

    pub fn part(&self, v: usize) -> Part {
        self.parts[v]
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    /// Vertices of `Inf(p, q)`.
    pub fn inferiority(&self, p: usize, q: usize) -> Vec<usize> {
        self.select(|x| matches!(x, Part::InfPair { p: a, q: b, .. } | Part::InfSet { p: a, q: b, .. } if *a == p && *b == q))
    }

    /// Vertices of `Match(p, q)`.
    pub fn matching(&self, p: usize, q: usize) -> Vec<usize> {
        self.select(|x| matches!(x, Part::MatchCopy { p: a, q: b, .. } | Part::Selector { p: a, q: b, .. } if *a == p && *b == q))
    }

    /// Vertices of `S_p^q|I`: for every bit `i`, the endpoint given by bit `i` of `I`.
    pub fn selected(&self, p: usize, q: usize, pos: usize, log_n: usize) -> Vec<usize> {
        (0..log_n).map(|i| self.at(Part::Selection { p, q, i, x: bit(pos, i, log_n) })).collect()
    }

    fn select(&self, f: impl Fn(&Part) -> bool) -> Vec<usize> {
        (0..self.parts.len()).filter(|&v| f(&self.parts[v])).collect()
    }
}

/// Bit `i` of `pos`, most significant of `log_n` bits first.
pub fn bit(pos: usize, i: usize, log_n: usize) -> usize {
    (pos >> (log_n - 1 - i)) & 1
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    /// The padded instance the gadgets encode.
    pub instance: LcsInstance,
    pub graph: LabeledGraph,
    pub model: TreeModel,
    pub goal: usize,
    pub vertex_atlas: VertexAtlas,
    /// `M_p` for `p < r − 1`.
    pub matches: Vec<Vec<(usize, usize)>>,
}

impl ReductionOutput {
    /// `2·log₂ t + 4`.
    pub fn depth_bound(&self) -> f64 {
        2.0 * (self.instance.t as f64).log2() + 4.0
    }

    /// `14r·log₂ N − 3`.
    pub fn label_count(&self) -> usize {
        label_count(self.instance.r(), self.instance.log_n())
    }

    /// `16·r·t·N²·log₂ N`.
    pub fn size_bound(&self) -> usize {
        let i = &self.instance;
        16 * i.r() * i.t * i.n * i.n * i.log_n()
    }

    /// Structural diagnostics: validity, realization, depth, labels, size.
    pub fn structure_checks(&self) -> Vec<String> {
        let mut out = self.model.validate();
        if out.is_empty() && !self.model.realize().same_edges(&self.graph) {
            out.push("the model does not realize the graph".to_string());
        }
        if self.model.depth() as f64 > self.depth_bound() + 1e-9 {
            out.push(format!("depth {} exceeds {:.3}", self.model.depth(), self.depth_bound()));
        }
        if self.model.k() != self.label_count() {
            out.push(format!("k = {} differs from {}", self.model.k(), self.label_count()));
        }
        if self.graph.n() > self.size_bound() {
            out.push(format!("{} vertices exceed {}", self.graph.n(), self.size_bound()));
        }
        out
    }
}

pub fn label_count(r: usize, log_n: usize) -> usize {
    14 * r * log_n - 3
}

/// Label blocks `L_S, L_M, L_min, L_max` (each `2r·log N`), `L_Inf`
/// (`6r·log N − 4`) and `ℓ0`, packed in that order.
#[derive(Debug, Clone, Copy)]
struct Labels {
    r: usize,
    log_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    S,
    M,
    Min,
    Max,
    Inf,
}

impl Labels {
    fn block(&self) -> usize {
        2 * self.r * self.log_n
    }

    fn k(&self) -> usize {
        label_count(self.r, self.log_n)
    }

    fn zero(&self) -> usize {
        self.k() - 1
    }

    fn offset(&self, b: Block) -> usize {
        self.block()
            * match b {
                Block::S => 0,
                Block::M => 1,
                Block::Min => 2,
                Block::Max => 3,
                Block::Inf => 4,
            }
    }

    fn endpoint(&self, b: Block, p: usize, i: usize, x: usize) -> usize {
        self.offset(b) + (p * self.log_n + i) * 2 + x
    }

    /// `slot` 0 holds the gadget between the left subtree and `q`, slot 1 the
    /// one between `q` and the right subtree.
    fn inf(&self, slot: usize, p: usize, part: Part) -> usize {
        let per = 3 * self.log_n - 2;
        let base = self.offset(Block::Inf) + (slot * self.r + p) * per;
        match part {
            Part::InfPair { i, x, .. } => base + 2 * i + x,
            Part::InfSet { i, .. } => base + 2 * (self.log_n - 1) + i,
            _ => unreachable!("inferiority part"),
        }
    }

    fn block_of(&self, l: usize) -> Option<Block> {
        [Block::S, Block::M, Block::Min, Block::Max].into_iter().find(|&b| (self.offset(b)..self.offset(b) + self.block()).contains(&l)).or_else(|| (l >= self.offset(Block::Inf) && l < self.zero()).then_some(Block::Inf))
    }

    /// Keeps the listed blocks and sends every other label to `ℓ0`.
    fn keep(&self, blocks: &[Block]) -> Vec<usize> {
        (0..self.k()).map(|l| if self.block_of(l).is_some_and(|b| blocks.contains(&b)) { l } else { self.zero() }).collect()
    }

    /// Moves `L_S` onto `to` position by position; everything else goes to `ℓ0`.
    fn selection_to(&self, to: Block) -> Vec<usize> {
        (0..self.k()).map(|l| if self.block_of(l) == Some(Block::S) { l + self.offset(to) } else { self.zero() }).collect()
    }

    fn identity(&self) -> Vec<usize> {
        (0..self.k()).collect()
    }
}

struct Builder<'a> {
    inst: &'a LcsInstance,
    labels: Labels,
    atlas: VertexAtlas,
    matches: Vec<Vec<(usize, usize)>>,
    edges: Vec<(usize, usize)>,
    model: TreeModel,
    /// Label of every vertex at its leaf.
    leaf_label: Vec<usize>,
}

/// Builds the graph, its tree-model and the goal for a padded instance.
pub fn build_reduction(inst: &LcsInstance) -> Result<ReductionOutput> {
    inst.check()?;
    if !inst.n.is_power_of_two() || inst.n < 2 {
        return Err(Error::domain(format!("N = {} must be a power of two of at least 2; pad first", inst.n)));
    }
    let (r, t, log_n) = (inst.r(), inst.t, inst.log_n());
    let labels = Labels { r, log_n };
    let matches: Vec<Vec<(usize, usize)>> = (0..r - 1).map(|p| inst.matches(p)).collect();
    let mut b = Builder { inst, labels, atlas: VertexAtlas::default(), matches, edges: Vec::new(), model: TreeModel::new(labels.k()), leaf_label: Vec::new() };
    b.gadgets();
    let graph = LabeledGraph::from_edges(b.atlas.len(), &b.edges)?;
    b.interval(None, 0, t - 1, Block::Min);
    b.derive_matrices(&graph)?;
    let goal = (r * t + r * (t - 1)) * log_n + b.matches.iter().map(|m| t * (1 + 2 * m.len() * log_n)).sum::<usize>();
    let out = ReductionOutput { instance: inst.clone(), graph, model: b.model, goal, vertex_atlas: b.atlas, matches: b.matches };
    Ok(out)
}

impl Builder<'_> {
    fn vertex(&mut self, part: Part, label: usize) -> usize {
        self.leaf_label.push(label);
        self.atlas.push(part)
    }

    fn edge(&mut self, u: usize, v: usize) {
        self.edges.push((u, v));
    }

    fn sel(&self, p: usize, q: usize, i: usize, x: usize) -> usize {
        self.atlas.at(Part::Selection { p, q, i, x })
    }

    fn gadgets(&mut self) {
        let (r, t, ln) = (self.inst.r(), self.inst.t, self.inst.log_n());
        let lab = self.labels;
        for q in 0..t {
            for p in 0..r {
                for i in 0..ln {
                    let u = self.vertex(Part::Selection { p, q, i, x: 0 }, lab.endpoint(Block::S, p, i, 0));
                    let v = self.vertex(Part::Selection { p, q, i, x: 1 }, lab.endpoint(Block::S, p, i, 1));
                    self.edge(u, v);
                }
            }
        }
        for q in 0..t.saturating_sub(1) {
            for p in 0..r {
                self.inferiority(p, q);
            }
        }
        for q in 0..t {
            for p in 0..r.saturating_sub(1) {
                self.matching(p, q);
            }
        }
    }

    /// `Inf(p, q)` between `S_p^q` and `S_p^{q+1}`. Leaf labels are assigned
    /// when the gadget is attached to the tree.
    fn inferiority(&mut self, p: usize, q: usize) {
        let ln = self.inst.log_n();
        let mut pairs = vec![[0usize; 2]; ln.saturating_sub(1)];
        for (i, pair) in pairs.iter_mut().enumerate() {
            for x in 0..2 {
                pair[x] = self.vertex(Part::InfPair { p, q, i, x }, 0);
            }
            self.edge(pair[0], pair[1]);
            for x in 0..2 {
                let (a, b) = (self.sel(p, q, i, 1 - x), self.sel(p, q + 1, i, 1 - x));
                self.edge(pair[x], a);
                self.edge(pair[x], b);
            }
        }
        let sets: Vec<Vec<usize>> = (0..ln).map(|i| (0..ln - i).map(|j| self.vertex(Part::InfSet { p, q, i, j }, 0)).collect()).collect();
        for i in 0..ln {
            for &v in &sets[i] {
                let (a, b) = (self.sel(p, q, i, 1), self.sel(p, q + 1, i, 0));
                self.edge(v, a);
                self.edge(v, b);
                for pair in &pairs[i.min(pairs.len())..] {
                    self.edge(v, pair[0]);
                    self.edge(v, pair[1]);
                }
                for later in &sets[i + 1..] {
                    for &w in later {
                        self.edge(v, w);
                    }
                }
            }
        }
    }

    /// `Match(p, q)` between `S_p^q` and `S_{p+1}^q`.
    fn matching(&mut self, p: usize, q: usize) {
        let ln = self.inst.log_n();
        let lab = self.labels;
        let mut selectors = Vec::new();
        for (a, b) in self.matches[p].clone() {
            let mut outside = Vec::new();
            for side in 0..2 {
                let (string, pos) = (p + side, if side == 0 { a } else { b });
                for i in 0..ln {
                    let ends = [0, 1].map(|x| self.vertex(Part::MatchCopy { p, q, a, b, side, i, x }, lab.endpoint(Block::M, string, i, x)));
                    self.edge(ends[0], ends[1]);
                    for x in 0..2 {
                        let orig = self.sel(string, q, i, x);
                        self.edge(orig, ends[1 - x]);
                    }
                    outside.push(ends[1 - bit(pos, i, ln)]);
                }
            }
            let v = self.vertex(Part::Selector { p, q, a, b }, lab.zero());
            for u in outside {
                self.edge(v, u);
            }
            for &w in &selectors {
                self.edge(v, w);
            }
            selectors.push(v);
        }
    }

    fn node(&mut self, parent: Option<(NodeId, Vec<usize>)>) -> NodeId {
        let zero = LabelMatrix::zero(self.labels.k());
        match parent {
            None => self.model.add_root(zero),
            Some((a, rho)) => self.model.add_internal(a, rho, zero),
        }
    }

    fn leaf(&mut self, parent: NodeId, v: usize) {
        let label = self.leaf_label[v];
        self.model.add_leaf(parent, self.labels.identity(), v, label);
    }

    /// `T^q`: selection gadgets of column `q` as leaves of `a^q`, one node per
    /// string pair with a nonempty `M_p`, one node per pair `(I, J)`.
    fn column(&mut self, parent: NodeId, rho: Vec<usize>, q: usize) {
        let (r, ln) = (self.inst.r(), self.inst.log_n());
        let root = self.node(Some((parent, rho)));
        for p in 0..r {
            for i in 0..ln {
                for x in 0..2 {
                    let v = self.sel(p, q, i, x);
                    self.leaf(root, v);
                }
            }
        }
        for p in 0..r.saturating_sub(1) {
            if self.matches[p].is_empty() {
                continue;
            }
            let ap = self.node(Some((root, self.labels.identity())));
            for (a, b) in self.matches[p].clone() {
                let apij = self.node(Some((ap, self.labels.identity())));
                for side in 0..2 {
                    for i in 0..ln {
                        for x in 0..2 {
                            let v = self.atlas.at(Part::MatchCopy { p, q, a, b, side, i, x });
                            self.leaf(apij, v);
                        }
                    }
                }
                let v = self.atlas.at(Part::Selector { p, q, a, b });
                self.leaf(apij, v);
            }
        }
    }

    /// Leaves of every `Inf(p, q)` under `parent`, labelled in `slot`.
    fn inferiority_leaves(&mut self, parent: NodeId, q: usize, slot: usize) {
        for p in 0..self.inst.r() {
            for v in self.atlas.inferiority(p, q) {
                self.leaf_label[v] = self.labels.inf(slot, p, self.atlas.part(v));
                self.leaf(parent, v);
            }
        }
    }

    /// Model of columns `x..=y`. At its root `S^x` carries `L_min` and `S^y`
    /// carries `L_max`; a single column carries only `end`.
    fn interval(&mut self, parent: Option<(NodeId, Vec<usize>)>, x: usize, y: usize, end: Block) {
        let lab = self.labels;
        let alpha = self.node(parent);
        if x == y {
            self.column(alpha, lab.selection_to(end), x);
            return;
        }
        let q = x + (y - x) / 2;
        if x < q {
            self.column(alpha, lab.keep(&[Block::S]), q);
            let left = self.node(Some((alpha, lab.keep(&[Block::Min, Block::Inf]))));
            self.interval(Some((left, lab.keep(&[Block::Min, Block::Max]))), x, q - 1, Block::Min);
            self.inferiority_leaves(left, q - 1, 0);
        } else {
            self.column(alpha, lab.selection_to(Block::Min), q);
        }
        let right = self.node(Some((alpha, lab.keep(&[Block::Max, Block::Inf]))));
        self.interval(Some((right, lab.keep(&[Block::Min, Block::Max]))), q + 1, y, Block::Max);
        self.inferiority_leaves(right, q, 1);
    }

    /// Sets each matrix entry demanded by an edge at its LCA, then checks
    /// that the model realizes exactly the graph.
    fn derive_matrices(&mut self, g: &LabeledGraph) -> Result<()> {
        let views = self.model.views();
        let leaves = self.model.leaf_nodes();
        let mut label_at: Vec<HashMap<usize, usize>> = vec![HashMap::new(); views.len()];
        for (a, view) in views.iter().enumerate() {
            label_at[a] = view.vertices.iter().copied().zip(view.labels.iter().copied()).collect();
        }
        let mut matrices: Vec<Option<LabelMatrix>> = vec![None; views.len()];
        for &(u, v) in g.edges() {
            let a = self.model.lca(leaves[u], leaves[v]);
            let (lu, lv) = (label_at[a][&u], label_at[a][&v]);
            let m = matrices[a].get_or_insert_with(|| LabelMatrix::zero(self.labels.k()));
            m.set(lu, lv, true);
            m.set(lv, lu, true);
        }
        for (a, m) in matrices.into_iter().enumerate() {
            if let Some(m) = m {
                self.model.set_matrix(a, m);
            }
        }
        if !self.model.realize().same_edges(g) {
            return Err(Error::domain("internal: the derived model realizes extra edges"));
        }
        Ok(())
    }
}

/// Brute-force checks of the gadget independence numbers and of the
/// completion properties of inferiority and matching gadgets. Empty iff all
/// hold.
pub fn gadget_independence_checks(out: &ReductionOutput) -> Result<Vec<String>> {
    let inst = &out.instance;
    let (r, t, ln, n) = (inst.r(), inst.t, inst.log_n(), inst.n);
    let atlas = &out.vertex_atlas;
    let mut diags = Vec::new();
    for q in 0..t.saturating_sub(1) {
        for p in 0..r {
            let verts = atlas.inferiority(p, q);
            let alpha = induced_alpha(&out.graph, &verts)?;
            if alpha != ln {
                diags.push(format!("Inf({p},{q}) has independence number {alpha}, expected {ln}"));
            }
            for a in 0..n {
                for b in 0..n {
                    let mut fixed = atlas.selected(p, q, a, ln);
                    fixed.extend(atlas.selected(p, q + 1, b, ln));
                    let completes = completion(&out.graph, &fixed, &verts)? >= ln;
                    if completes != (a < b) {
                        diags.push(format!("Inf({p},{q}) with (I,J) = ({a},{b}): completion {completes}"));
                    }
                }
            }
        }
    }
    for q in 0..t {
        for p in 0..r.saturating_sub(1) {
            let verts = atlas.matching(p, q);
            let m = out.matches[p].len();
            let want = if m == 0 { 0 } else { 1 + 2 * m * ln };
            let alpha = induced_alpha(&out.graph, &verts)?;
            if alpha != want {
                diags.push(format!("Match({p},{q}) has independence number {alpha}, expected {want}"));
            }
            for a in 0..n {
                for b in 0..n {
                    let mut fixed = atlas.selected(p, q, a, ln);
                    fixed.extend(atlas.selected(p + 1, q, b, ln));
                    let completes = m > 0 && completion(&out.graph, &fixed, &verts)? >= want;
                    let equal = inst.strings[p][a] == inst.strings[p + 1][b];
                    if completes != equal {
                        diags.push(format!("Match({p},{q}) with (I,J) = ({a},{b}): completion {completes}"));
                    }
                }
            }
        }
    }
    Ok(diags)
}

fn induced_alpha(g: &LabeledGraph, verts: &[usize]) -> Result<usize> {
    if verts.len() > 64 * 64 {
        return Err(Error::capability(format!("gadget of {} vertices", verts.len())));
    }
    let pos: HashMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges: Vec<(usize, usize)> = g.edges().iter().filter_map(|(u, v)| Some((*pos.get(u)?, *pos.get(v)?))).collect();
    Ok(independence_number(&LabeledGraph::from_edges(verts.len(), &edges)?))
}

/// Independence number among `candidates` avoiding `fixed` and its
/// neighbours; zero when `fixed` itself is not independent.
fn completion(g: &LabeledGraph, fixed: &[usize], candidates: &[usize]) -> Result<usize> {
    if !crate::graph::is_independent_set(g, fixed) {
        return Ok(0);
    }
    let free: Vec<usize> = candidates.iter().copied().filter(|&v| !fixed.iter().any(|&f| f == v || g.has_edge(f, v))).collect();
    induced_alpha(g, &free)
}
