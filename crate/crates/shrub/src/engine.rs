//! The guess-and-recurse evaluation shared by the independent-set and
//! homomorphism solvers.
//!
//! A guess is a set of states. A state is a pair (pattern vertex, label).
//! Pattern vertices adjacent to every pattern vertex (themselves included)
//! never cause conflicts, so they are left out of the state universe and
//! only show up in leaf values. For independent sets the universe is
//! exactly the label set.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::modmath::PrimeField;
use crate::settrans::submasks;
use crate::tree_model::{NodeId, TreeModel};

pub const MAX_STATES: usize = 30;

/// Which vertices of a homomorphism target are tracked, and how leaves score.
#[derive(Debug, Clone)]
pub struct Problem {
    /// Pattern vertices carried in guesses, in state-block order.
    pub tracked: Vec<usize>,
    /// Adjacency among all pattern vertices (loops on the diagonal).
    pub pattern_adj: Vec<Vec<bool>>,
    /// Membership in the counted set R.
    pub in_r: Vec<bool>,
    /// Allowed pattern vertices per graph vertex.
    pub lists: Vec<Vec<usize>>,
    pub weights: Vec<u64>,
}

impl Problem {
    /// Independent sets: pattern `{u, v}` with a loop at `v`, edge `uv`, `R = {u}`.
    pub fn independent_set(n: usize) -> Self {
        Problem {
            tracked: vec![0],
            pattern_adj: vec![vec![false, true], vec![true, true]],
            in_r: vec![true, false],
            lists: vec![vec![0, 1]; n],
            weights: vec![1; n],
        }
    }

    /// Tracks every pattern vertex that is not adjacent to all pattern vertices.
    pub fn homomorphism(pattern_adj: Vec<Vec<bool>>, in_r: Vec<bool>, lists: Vec<Vec<usize>>, weights: Vec<u64>) -> Self {
        let m = pattern_adj.len();
        let tracked = (0..m).filter(|&h| !(0..m).all(|x| pattern_adj[h][x])).collect();
        Problem { tracked, pattern_adj, in_r, lists, weights }
    }

    /// Same, but every pattern vertex is tracked.
    pub fn homomorphism_all_tracked(pattern_adj: Vec<Vec<bool>>, in_r: Vec<bool>, lists: Vec<Vec<usize>>, weights: Vec<u64>) -> Self {
        let tracked = (0..pattern_adj.len()).collect();
        Problem { tracked, pattern_adj, in_r, lists, weights }
    }
}

#[derive(Debug, Clone, Copy)]
struct LeafInfo {
    vertex: usize,
    /// Untracked allowed targets outside and inside R.
    empty_plain: u64,
    empty_r: u64,
    /// Allowed single states, and those whose pattern vertex is in R.
    singles: u32,
    singles_r: u32,
}

/// How IS(a, S) expands at internal nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainMode {
    /// Sum over α of the signed 1_≥ / 1_= chain ending in TIS.
    InclusionExclusion,
    /// A single TIS call with every constrained state 1_= and the rest 1_≥.
    /// Equal to the chain sum, with far fewer calls.
    #[default]
    Collapsed,
}

/// Knobs for one evaluation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    pub chain: ChainMode,
    /// Cache IS(b, D) per evaluation point.
    pub memoize: bool,
}

/// Precomputed per-node data for a model and problem.
#[derive(Debug)]
pub struct Engine<'m> {
    model: &'m TreeModel,
    problem: Problem,
    k: usize,
    u: usize,
    root: NodeId,
    depth: usize,
    present: Vec<u32>,
    conf: Vec<Vec<u32>>,
    up: Vec<Vec<u8>>,
    reach: Vec<u32>,
    leaves: Vec<Option<LeafInfo>>,
}

impl<'m> Engine<'m> {
    pub fn new(model: &'m TreeModel, problem: Problem) -> Result<Self> {
        model.ensure_valid()?;
        let k = model.k();
        let n = model.n();
        let u = problem.tracked.len() * k;
        if u > MAX_STATES {
            return Err(Error::capability(format!("state universe {} x {k} = {u} exceeds {MAX_STATES}", problem.tracked.len())));
        }
        if problem.lists.len() != n || problem.weights.len() != n {
            return Err(Error::domain("lists and weights must cover every vertex"));
        }
        let m = problem.pattern_adj.len();
        if problem.lists.iter().flatten().any(|&h| h >= m) {
            return Err(Error::domain("list references a vertex outside the pattern"));
        }
        let state = |t: usize, i: usize| t * k + i;
        let views = model.views();
        let mut present = vec![0u32; model.nodes().len()];
        for (a, view) in views.iter().enumerate() {
            for (&v, &l) in view.vertices.iter().zip(&view.labels) {
                for (t, &h) in problem.tracked.iter().enumerate() {
                    if problem.lists[v].contains(&h) {
                        present[a] |= 1 << state(t, l);
                    }
                }
            }
        }
        let mut conf = vec![Vec::new(); model.nodes().len()];
        let mut up = vec![Vec::new(); model.nodes().len()];
        let mut reach = vec![0u32; model.nodes().len()];
        let mut leaves = vec![None; model.nodes().len()];
        for a in 0..model.nodes().len() {
            if let Some((vertex, label)) = model.leaf(a) {
                let list = &problem.lists[vertex];
                let mut info = LeafInfo { vertex, empty_plain: 0, empty_r: 0, singles: 0, singles_r: 0 };
                for &h in list {
                    match problem.tracked.iter().position(|&x| x == h) {
                        Some(t) => {
                            info.singles |= 1 << state(t, label);
                            if problem.in_r[h] {
                                info.singles_r |= 1 << state(t, label);
                            }
                        }
                        None if problem.in_r[h] => info.empty_r += 1,
                        None => info.empty_plain += 1,
                    }
                }
                leaves[a] = Some(info);
            } else {
                let mat = model.matrix(a);
                conf[a] = (0..u)
                    .map(|s1| {
                        let (t1, i1) = (s1 / k, s1 % k);
                        (0..u).fold(0u32, |acc, s2| {
                            let (t2, i2) = (s2 / k, s2 % k);
                            let clash = mat.get(i1, i2) && !problem.pattern_adj[problem.tracked[t1]][problem.tracked[t2]];
                            if clash {
                                acc | 1 << s2
                            } else {
                                acc
                            }
                        })
                    })
                    .collect();
            }
            if model.parent(a).is_some() {
                let rho = model.rename(a);
                up[a] = (0..u).map(|s| state(s / k, rho[s % k]) as u8).collect();
                reach[a] = (0..u).filter(|&s| present[a] >> s & 1 == 1).fold(0, |acc, s| acc | 1 << up[a][s]);
            }
        }
        Ok(Engine { model, problem, k, u, root: model.root(), depth: model.depth(), present, conf, up, reach, leaves })
    }

    pub fn model(&self) -> &TreeModel {
        self.model
    }

    pub fn states(&self) -> usize {
        self.u
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// States realised by some vertex below `a`.
    pub fn present(&self, a: NodeId) -> u32 {
        self.present[a]
    }

    /// States of `s` in conflict with some state of `s` at `a`.
    pub fn constrained(&self, a: NodeId, s: u32) -> u32 {
        let conf = &self.conf[a];
        bits(s).filter(|&i| conf[i] & s != 0).fold(0, |acc, i| acc | 1 << i)
    }

    /// Image of a child state set under the renaming into the parent.
    pub fn image(&self, b: NodeId, d: u32) -> u32 {
        bits(d).fold(0, |acc, s| acc | 1 << self.up[b][s])
    }

    /// Frame bound (u + 4)(d + 1).
    pub fn frame_bound(&self) -> usize {
        (self.u + 4) * (self.depth + 1)
    }

    /// Connected components of the auxiliary graph on `beta_eq` at `a`.
    pub fn components(&self, a: NodeId, beta_eq: u32) -> Vec<u32> {
        let conf = &self.conf[a];
        let mut parent: Vec<usize> = (0..self.u).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in bits(beta_eq) {
            for j in bits(conf[i] & beta_eq) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
        let mut comps: Vec<(usize, u32)> = Vec::new();
        for i in bits(beta_eq) {
            let r = find(&mut parent, i);
            match comps.iter_mut().find(|(root, _)| *root == r) {
                Some((_, m)) => *m |= 1 << i,
                None => comps.push((r, 1 << i)),
            }
        }
        comps.into_iter().map(|(_, m)| m).collect()
    }

    pub fn evaluator(&self, fld: PrimeField, x: u64, y: u64, opts: EvalOptions) -> Evaluator<'_, 'm> {
        Evaluator {
            eng: self,
            fld,
            x: fld.reduce(x),
            y: fld.reduce(y),
            opts,
            memo: RefCell::new(HashMap::new()),
            counters: Counters::default(),
        }
    }
}

pub(crate) fn bits(mut m: u32) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            b
        })
    })
}

#[derive(Debug, Default)]
struct Counters {
    live: Cell<usize>,
    max_live: Cell<usize>,
    max_residues: Cell<usize>,
    is_calls: Cell<u64>,
    tis_calls: Cell<u64>,
    pruned_alpha: Cell<u64>,
    memo_hits: Cell<u64>,
}

/// Counters from one or more evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub max_frames: usize,
    pub max_frame_residues: usize,
    pub is_calls: u64,
    pub tis_calls: u64,
    pub pruned_alpha: u64,
    pub memo_entries: usize,
    pub memo_hits: u64,
    pub evaluations: u64,
}

impl EvalStats {
    pub fn absorb(&mut self, other: &EvalStats) {
        self.max_frames = self.max_frames.max(other.max_frames);
        self.max_frame_residues = self.max_frame_residues.max(other.max_frame_residues);
        self.is_calls += other.is_calls;
        self.tis_calls += other.tis_calls;
        self.pruned_alpha += other.pruned_alpha;
        self.memo_entries = self.memo_entries.max(other.memo_entries);
        self.memo_hits += other.memo_hits;
        self.evaluations += other.evaluations;
    }
}

struct Frame<'c> {
    c: &'c Counters,
}

impl Drop for Frame<'_> {
    fn drop(&mut self) {
        self.c.live.set(self.c.live.get() - 1);
    }
}

/// Largest z-degree cap is the state count.
type ZPoly = [u64; MAX_STATES + 1];

/// Evaluates the recursion at one point `(x, y)` of one prime field.
pub struct Evaluator<'e, 'm> {
    eng: &'e Engine<'m>,
    fld: PrimeField,
    x: u64,
    y: u64,
    opts: EvalOptions,
    memo: RefCell<HashMap<(NodeId, u32), u64>>,
    counters: Counters,
}

impl Evaluator<'_, '_> {
    fn enter(&self, residues: usize) -> Frame<'_> {
        let c = &self.counters;
        c.live.set(c.live.get() + 1);
        c.max_live.set(c.max_live.get().max(c.live.get()));
        c.max_residues.set(c.max_residues.get().max(residues));
        Frame { c }
    }

    pub fn stats(&self) -> EvalStats {
        let c = &self.counters;
        EvalStats {
            max_frames: c.max_live.get(),
            max_frame_residues: c.max_residues.get(),
            is_calls: c.is_calls.get(),
            tis_calls: c.tis_calls.get(),
            pruned_alpha: c.pruned_alpha.get(),
            memo_entries: self.memo.borrow().len(),
            memo_hits: c.memo_hits.get(),
            evaluations: 1,
        }
    }

    /// Frames currently open; zero between top-level calls.
    pub fn live_frames(&self) -> usize {
        self.counters.live.get()
    }

    fn leaf_value(&self, a: NodeId, s: u32) -> u64 {
        let info = self.eng.leaves[a].expect("leaf");
        let f = self.fld;
        let r_value = || f.mul(self.x, f.pow(self.y, self.eng.problem.weights[info.vertex]));
        if s == 0 {
            let plain = f.reduce(info.empty_plain);
            if info.empty_r == 0 {
                plain
            } else {
                f.add(plain, f.mul(f.reduce(info.empty_r), r_value()))
            }
        } else if s.count_ones() == 1 && info.singles & s != 0 {
            if info.singles_r & s != 0 {
                r_value()
            } else {
                1
            }
        } else {
            0
        }
    }

    /// Σ_S IS(root, S): the polynomial's value at this point.
    pub fn root_total(&self) -> u64 {
        let _f = self.enter(1);
        let root = self.eng.root;
        let mut acc = 0;
        for s in submasks(self.eng.present[root]) {
            acc = self.fld.add(acc, self.is_body(root, s));
        }
        acc
    }

    /// IS(a, S) at this point.
    pub fn is(&self, a: NodeId, s: u32) -> u64 {
        let _f = self.enter(1);
        self.is_body(a, s)
    }

    fn is_body(&self, a: NodeId, s: u32) -> u64 {
        self.counters.is_calls.set(self.counters.is_calls.get() + 1);
        if self.eng.leaves[a].is_some() {
            return self.leaf_value(a, s);
        }
        if s & !self.eng.present[a] != 0 {
            return 0;
        }
        if self.opts.memoize {
            if let Some(&v) = self.memo.borrow().get(&(a, s)) {
                self.counters.memo_hits.set(self.counters.memo_hits.get() + 1);
                return v;
            }
        }
        let constrained = self.eng.constrained(a, s);
        let value = match self.opts.chain {
            ChainMode::Collapsed => self.tis(a, s, constrained),
            ChainMode::InclusionExclusion => {
                let free = s & !constrained;
                let all = 1u64 << s.count_ones();
                let kept = 1u64 << free.count_ones();
                self.counters.pruned_alpha.set(self.counters.pruned_alpha.get() + (all - kept));
                let mut acc = 0;
                for a2 in submasks(free) {
                    acc = self.fld.add(acc, self.t_chain(a, s, a2, 0, 0));
                }
                acc
            }
        };
        if self.opts.memoize {
            self.memo.borrow_mut().insert((a, s), value);
        }
        value
    }

    /// PIS(b, Z): Σ over child guesses D with ρ(D) = Z of IS(b, D).
    pub fn pis(&self, b: NodeId, z: u32) -> u64 {
        let _f = self.enter(1);
        let eng = self.eng;
        let up = &eng.up[b];
        let cand = bits(eng.present[b]).filter(|&s| z >> up[s] & 1 == 1).fold(0u32, |acc, s| acc | 1 << s);
        let mut acc = 0;
        for d in submasks(cand) {
            if eng.image(b, d) == z {
                acc = self.fld.add(acc, self.is_body(b, d));
            }
        }
        acc
    }

    /// T(a, S, α, c, γ): α is given by its 2_≥ set `a2`, γ by the prefix
    /// length `c` and the 1_= part `gamma_eq` of that prefix.
    pub fn t_chain(&self, a: NodeId, s: u32, a2: u32, c: usize, gamma_eq: u32) -> u64 {
        let m = a2.count_ones() as usize;
        if c == m {
            let beta_eq = (s & !a2) | gamma_eq;
            return self.tis(a, s, beta_eq);
        }
        let _f = self.enter(1);
        let next = bits(a2).nth(c).expect("chain position");
        let geq = self.t_chain(a, s, a2, c + 1, gamma_eq);
        let eq = self.t_chain(a, s, a2, c + 1, gamma_eq | 1 << next);
        self.fld.sub(geq, eq)
    }

    /// TIS(a, S, β) with β given by its 1_= set; β must be conflict-free.
    pub fn tis(&self, a: NodeId, s: u32, beta_eq: u32) -> u64 {
        let _f = self.enter(1);
        self.counters.tis_calls.set(self.counters.tis_calls.get() + 1);
        let eng = self.eng;
        assert!(
            bits(s & !beta_eq).all(|i| eng.conf[a][i] & s == 0),
            "β marks a conflicting state 1_≥"
        );
        let comps = eng.components(a, beta_eq);
        let size = s.count_ones();
        let mut acc = 0;
        for y in submasks(s) {
            let prod = self.zeta_product(a, y, &comps);
            acc = if (size - y.count_ones()) % 2 == 0 { self.fld.add(acc, prod) } else { self.fld.sub(acc, prod) };
        }
        acc
    }

    /// The z^{cap} coefficient of Π_j Σ_{Z ⊆ Y} g_j(Z).
    fn zeta_product(&self, a: NodeId, y: u32, comps: &[u32]) -> u64 {
        let cap = comps.len();
        let _f = self.enter(cap + 1);
        let f = self.fld;
        let mut prod: ZPoly = [0; MAX_STATES + 1];
        prod[0] = 1;
        for &b in self.eng.model.children(a) {
            let inner = self.zeta_sum(b, y, comps);
            let mut next: ZPoly = [0; MAX_STATES + 1];
            let mut nonzero = false;
            for i in 0..=cap {
                if prod[i] == 0 {
                    continue;
                }
                for j in 0..=cap - i {
                    if inner[j] != 0 {
                        next[i + j] = f.add(next[i + j], f.mul(prod[i], inner[j]));
                        nonzero = true;
                    }
                }
            }
            if !nonzero {
                return 0;
            }
            prod = next;
        }
        prod[cap]
    }

    /// Σ_{Z ⊆ Y} g_j(Z) as a polynomial in z truncated at the cap.
    fn zeta_sum(&self, b: NodeId, y: u32, comps: &[u32]) -> ZPoly {
        let cap = comps.len();
        let _f = self.enter(cap + 1);
        let mut out: ZPoly = [0; MAX_STATES + 1];
        for z in submasks(y & self.eng.reach[b]) {
            let mut full = 0;
            let mut ok = true;
            for &c in comps {
                let hit = z & c;
                if hit == c {
                    full += 1;
                } else if hit != 0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                out[full] = self.fld.add(out[full], self.pis(b, z));
            }
        }
        out
    }
}

/// Dense row index of `s` among the subsets of `mask`.
fn compress(s: u32, mask: u32) -> usize {
    bits(mask).enumerate().filter(|&(_, b)| s >> b & 1 == 1).fold(0, |acc, (j, _)| acc | 1 << j)
}

fn expand(idx: usize, mask: u32) -> u32 {
    bits(mask).enumerate().filter(|&(j, _)| idx >> j & 1 == 1).fold(0, |acc, (_, b)| acc | 1 << b)
}

/// Cells (rows x points) a batched table may hold.
pub const MAX_BATCH_CELLS: usize = 1 << 25;

/// Values for every subset of `mask` at every point, row-major.
struct Table {
    mask: u32,
    data: Vec<u64>,
}

fn table_size(mask: u32, width: usize) -> Result<usize> {
    let rows = 1usize << mask.count_ones();
    match rows.checked_mul(width) {
        Some(c) if c <= MAX_BATCH_CELLS => Ok(c),
        _ => Err(Error::capability(format!("batched table of 2^{} rows x {width} exceeds {MAX_BATCH_CELLS} cells", mask.count_ones()))),
    }
}

/// IS(root, S) at every point `(xs[j], ys[j])` for every guess `S`, with
/// per-node tables covering all points at once. Uses the collapsed chain.
pub fn batched_root_rows(eng: &Engine<'_>, fld: PrimeField, xs: &[u64], ys: &[u64]) -> Result<(Vec<(u32, Vec<u64>)>, EvalStats)> {
    assert_eq!(xs.len(), ys.len());
    let pts = xs.len();
    let model = eng.model;
    let mut tables: Vec<Option<Table>> = (0..model.nodes().len()).map(|_| None).collect();
    let mut peak = 0usize;
    for a in model.post_order() {
        let t = match eng.leaves[a] {
            Some(info) => {
                let mask = eng.present[a];
                let mut data = vec![0; table_size(mask, pts)?];
                let w = eng.problem.weights[info.vertex];
                for j in 0..pts {
                    let rv = fld.mul(fld.reduce(xs[j]), fld.pow(ys[j], w));
                    data[j] = fld.add(fld.reduce(info.empty_plain), fld.mul(fld.reduce(info.empty_r), rv));
                    for s in bits(info.singles) {
                        let row = compress(1 << s, mask);
                        data[row * pts + j] = if info.singles_r >> s & 1 == 1 { rv } else { 1 };
                    }
                }
                Table { mask, data }
            }
            None => {
                let kids: Vec<Table> = model.children(a).iter().map(|&b| tables[b].take().expect("child table")).collect();
                batched_internal(eng, fld, a, &kids, pts)?
            }
        };
        peak = peak.max(t.data.len());
        tables[a] = Some(t);
    }
    let root = tables[eng.root].take().expect("root table");
    let rows = root.data.chunks(pts.max(1)).enumerate().map(|(idx, row)| (expand(idx, root.mask), row.to_vec())).collect();
    let stats = EvalStats { memo_entries: peak / pts.max(1), evaluations: pts as u64, ..EvalStats::default() };
    Ok((rows, stats))
}

/// Σ_S IS(root, S) at every point, from [`batched_root_rows`].
pub fn batched_root_values(eng: &Engine<'_>, fld: PrimeField, xs: &[u64], ys: &[u64]) -> Result<(Vec<u64>, EvalStats)> {
    let (rows, stats) = batched_root_rows(eng, fld, xs, ys)?;
    let mut out = vec![0; xs.len()];
    for (_, row) in rows {
        for (o, v) in out.iter_mut().zip(row) {
            *o = fld.add(*o, v);
        }
    }
    Ok((out, stats))
}

fn batched_internal(eng: &Engine<'_>, fld: PrimeField, a: NodeId, kids: &[Table], pts: usize) -> Result<Table> {
    let children = eng.model.children(a);
    let pis: Vec<Table> = children
        .iter()
        .zip(kids)
        .map(|(&b, t)| {
            let mask = eng.reach[b];
            let mut data = vec![0; table_size(mask, pts)?];
            for (d_idx, row) in t.data.chunks(pts).enumerate() {
                let z = compress(eng.image(b, expand(d_idx, t.mask)), mask);
                for (o, &v) in data[z * pts..(z + 1) * pts].iter_mut().zip(row) {
                    *o = fld.add(*o, v);
                }
            }
            Ok(Table { mask, data })
        })
        .collect::<Result<_>>()?;
    let present = eng.present[a];
    let mut groups: std::collections::BTreeMap<u32, u32> = std::collections::BTreeMap::new();
    for s in submasks(present) {
        *groups.entry(eng.constrained(a, s)).or_insert(0) |= s;
    }
    let mut out = vec![0; table_size(present, pts)?];
    for (&beta, &uni) in &groups {
        let comps = eng.components(a, beta);
        let g = batched_tis(fld, &pis, &comps, uni, pts)?;
        for s in submasks(uni) {
            if eng.constrained(a, s) == beta {
                let (src, dst) = (compress(s, uni), compress(s, present));
                out[dst * pts..(dst + 1) * pts].copy_from_slice(&g[src * pts..(src + 1) * pts]);
            }
        }
    }
    Ok(Table { mask: present, data: out })
}

/// TIS at every subset of `uni` for one component structure, via a zeta
/// transform per child, a pointwise product and a Möbius transform.
fn batched_tis(fld: PrimeField, pis: &[Table], comps: &[u32], uni: u32, pts: usize) -> Result<Vec<u64>> {
    let cap = comps.len();
    let width = (cap + 1) * pts;
    let rows = 1usize << uni.count_ones();
    let cells = table_size(uni, width)?;
    let mut prod = vec![0; cells];
    for y in 0..rows {
        prod[y * width..y * width + pts].fill(1);
    }
    let mut h = vec![0; cells];
    let mut scratch = vec![0; width];
    for t in pis {
        h.fill(0);
        for z in submasks(uni & t.mask) {
            let mut full = 0;
            let mut flat = true;
            for &c in comps {
                let hit = z & c;
                if hit == c {
                    full += 1;
                } else if hit != 0 {
                    flat = false;
                    break;
                }
            }
            if flat {
                let src = compress(z, t.mask) * pts;
                let dst = compress(z, uni) * width + full * pts;
                h[dst..dst + pts].copy_from_slice(&t.data[src..src + pts]);
            }
        }
        for bit in 0..uni.count_ones() {
            for y in 0..rows {
                if y >> bit & 1 == 1 {
                    let lo = (y ^ 1 << bit) * width;
                    let (head, tail) = h.split_at_mut(y * width);
                    for (o, &v) in tail[..width].iter_mut().zip(&head[lo..lo + width]) {
                        *o = fld.add(*o, v);
                    }
                }
            }
        }
        for y in 0..rows {
            let p = &mut prod[y * width..(y + 1) * width];
            let q = &h[y * width..(y + 1) * width];
            scratch.fill(0);
            for i in 0..=cap {
                for l in 0..=cap - i {
                    let (pi, ql) = (&p[i * pts..(i + 1) * pts], &q[l * pts..(l + 1) * pts]);
                    let dst = &mut scratch[(i + l) * pts..(i + l + 1) * pts];
                    for j in 0..pts {
                        dst[j] = fld.add(dst[j], fld.mul(pi[j], ql[j]));
                    }
                }
            }
            p.copy_from_slice(&scratch);
        }
    }
    let mut g = vec![0; rows * pts];
    for y in 0..rows {
        g[y * pts..(y + 1) * pts].copy_from_slice(&prod[y * width + cap * pts..(y + 1) * width]);
    }
    for bit in 0..uni.count_ones() {
        for y in 0..rows {
            if y >> bit & 1 == 1 {
                let lo = (y ^ 1 << bit) * pts;
                let (head, tail) = g.split_at_mut(y * pts);
                for (o, &v) in tail[..pts].iter_mut().zip(&head[lo..lo + pts]) {
                    *o = fld.sub(*o, v);
                }
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_model::{families, parse_tree_model};

    fn two_leaf_zero() -> TreeModel {
        families::edgeless(2)
    }

    #[test]
    fn leaf_values() {
        let m = two_leaf_zero();
        let eng = Engine::new(&m, Problem::independent_set(2)).unwrap();
        let ev = eng.evaluator(PrimeField::new(101), 7, 1, EvalOptions::default());
        let leaf = m.leaf_nodes()[0];
        assert_eq!(ev.is(leaf, 0), 1);
        assert_eq!(ev.is(leaf, 1), 7);
        let wide = parse_tree_model("shrubmodel 1\nk 2\nnode r root\nleaf a child-of r vertex 0 label 1\nmatrix r 00 00\nrename a id\n").unwrap();
        let eng = Engine::new(&wide, Problem::independent_set(1)).unwrap();
        let ev = eng.evaluator(PrimeField::new(101), 7, 1, EvalOptions::default());
        assert_eq!(ev.is(wide.leaf_nodes()[0], 0b10), 0);
    }

    #[test]
    fn root_values_on_two_leaves() {
        let m = two_leaf_zero();
        let eng = Engine::new(&m, Problem::independent_set(2)).unwrap();
        for chain in [ChainMode::InclusionExclusion, ChainMode::Collapsed] {
            let ev = eng.evaluator(PrimeField::new(101), 2, 1, EvalOptions { chain, memoize: false });
            let r = m.root();
            assert_eq!(ev.is(r, 1), 8);
            assert_eq!(ev.tis(r, 1, 0), 8);
            assert_eq!(ev.tis(r, 1, 1), 4);
            assert_eq!(ev.tis(r, 0, 0), 1);
            assert_eq!(ev.root_total(), 9);
            assert_eq!(ev.live_frames(), 0);
        }
        let ev = eng.evaluator(PrimeField::new(101), 1, 1, EvalOptions::default());
        assert_eq!(ev.t_chain(m.root(), 1, 1, 0, 0), 1);
        assert_eq!(ev.t_chain(m.root(), 1, 0, 0, 0), ev.tis(m.root(), 1, 1));
    }

    #[test]
    fn components_by_matrix() {
        let text = "shrubmodel 1\nk 2\nnode r root\nleaf a child-of r vertex 0 label 1\nleaf b child-of r vertex 1 label 2\nmatrix r 01 10\nrename a id\nrename b id\n";
        let m = parse_tree_model(text).unwrap();
        let eng = Engine::new(&m, Problem::independent_set(2)).unwrap();
        assert_eq!(eng.components(m.root(), 0b11), vec![0b11]);
        let z = families::edgeless(2);
        let eng = Engine::new(&z, Problem::independent_set(2)).unwrap();
        assert_eq!(eng.components(z.root(), 0b1), vec![0b1]);
        assert!(eng.components(z.root(), 0).is_empty());
    }

    #[test]
    fn state_cap_is_capability_error() {
        let m = families::edgeless(2);
        let big = Problem::homomorphism_all_tracked(vec![vec![false; 31]; 31], vec![false; 31], vec![(0..31).collect(); 2], vec![1; 2]);
        assert!(Engine::new(&m, big).unwrap_err().is_capability());
    }
}
