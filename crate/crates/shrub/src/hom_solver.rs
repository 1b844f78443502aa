//! Counting list homomorphisms into a small pattern graph, by cardinality of
//! the preimage of R and its total weight.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::engine::{batched_root_rows, batched_root_values, ChainMode, Engine, EvalOptions, EvalStats, Problem};
use crate::error::{Error, Result};
use crate::graph::{content_lines, parse_num, LabeledGraph};
use crate::modmath::{crt_combine, interpolate_all_mod_p, CrtPlan, PrimeField};
use crate::tree_model::TreeModel;

/// Undirected pattern graph `H` (loops allowed) with a designated set `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    adj: Vec<Vec<bool>>,
    r: Vec<bool>,
}

impl PatternGraph {
    pub fn new(m: usize, edges: &[(usize, usize)], r: &[usize]) -> Result<Self> {
        let mut adj = vec![vec![false; m]; m];
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::domain(format!("pattern edge {a} {b} outside 0..{m}")));
            }
            adj[a][b] = true;
            adj[b][a] = true;
        }
        let mut in_r = vec![false; m];
        for &x in r {
            if x >= m {
                return Err(Error::domain(format!("R member {x} outside 0..{m}")));
            }
            in_r[x] = true;
        }
        Ok(PatternGraph { adj, r: in_r })
    }

    pub fn m(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn in_r(&self, a: usize) -> bool {
        self.r[a]
    }

    /// `{u, v}` with a loop at `v` and the edge `uv`; `R = {u}`.
    pub fn independent_set() -> Self {
        PatternGraph::new(2, &[(1, 1), (0, 1)], &[0]).expect("valid")
    }

    /// Triangle `u, v, w` with a loop at `u`; `R = {u}`.
    pub fn odd_cycle_transversal() -> Self {
        PatternGraph::new(3, &[(0, 0), (0, 1), (0, 2), (1, 2)], &[0]).expect("valid")
    }

    /// Loopless clique on `q` vertices; `R = V(H)`.
    pub fn clique(q: usize) -> Self {
        let edges: Vec<_> = (0..q).flat_map(|a| (a + 1..q).map(move |b| (a, b))).collect();
        let r: Vec<_> = (0..q).collect();
        PatternGraph::new(q, &edges, &r).expect("valid")
    }

    /// Taken / Allowed / Forbidden: loops everywhere plus `TA` and `AF`; `R = {T}`.
    pub fn taf() -> Self {
        PatternGraph::new(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)], &[0]).expect("valid")
    }

    /// Vertices not adjacent to every vertex (themselves included). These are
    /// the ones carried in guesses, and a guess state is `t * k + label` for
    /// the `t`-th of them.
    pub fn tracked(&self) -> Vec<usize> {
        (0..self.m()).filter(|&h| !self.adj[h].iter().all(|&x| x)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("pattern 1\nm {}\n", self.m());
        for a in 0..self.m() {
            for b in a..self.m() {
                if self.adj[a][b] {
                    out.push_str(&format!("edge {a} {b}\n"));
                }
            }
        }
        let r: Vec<String> = (0..self.m()).filter(|&a| self.r[a]).map(|a| a.to_string()).collect();
        out.push_str(&format!("R {}\n", r.join(" ")));
        out
    }
}

/// Parses `pattern 1`, `m <count>`, `edge <u> <v>` lines and one `R ...` line.
pub fn parse_pattern(text: &str) -> Result<PatternGraph> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, t)) if t == ["pattern", "1"] => {}
        Some((l, _)) => return Err(Error::parse(l, "expected header \"pattern 1\"")),
        None => return Err(Error::parse(1, "empty input")),
    }
    let m: usize = match lines.next() {
        Some((l, t)) if t.len() == 2 && t[0] == "m" => parse_num(l, t[1], "pattern size")?,
        Some((l, _)) => return Err(Error::parse(l, "expected \"m <count>\"")),
        None => return Err(Error::parse(2, "missing pattern size")),
    };
    let mut edges = Vec::new();
    let mut r = Vec::new();
    for (l, t) in lines {
        match t[0] {
            "edge" if t.len() == 3 => {
                let a: usize = parse_num(l, t[1], "pattern vertex")?;
                let b: usize = parse_num(l, t[2], "pattern vertex")?;
                if a >= m || b >= m {
                    return Err(Error::parse(l, format!("pattern vertex out of range 0..{m}")));
                }
                edges.push((a, b));
            }
            "R" => {
                for tok in &t[1..] {
                    let x: usize = parse_num(l, tok, "R member")?;
                    if x >= m {
                        return Err(Error::parse(l, format!("R member {x} out of range 0..{m}")));
                    }
                    r.push(x);
                }
            }
            _ => return Err(Error::parse(l, format!("unrecognised line {:?}", t.join(" ")))),
        }
    }
    PatternGraph::new(m, &edges, &r)
}

/// A model with a pattern, per-vertex lists and weights.
#[derive(Debug, Clone)]
pub struct HomInstance {
    pub model: TreeModel,
    pub pattern: PatternGraph,
    pub lists: Vec<Vec<usize>>,
    pub weights: Vec<u64>,
}

impl HomInstance {
    /// Full lists and unit weights.
    pub fn new(model: TreeModel, pattern: PatternGraph) -> Self {
        let n = model.n();
        let lists = vec![(0..pattern.m()).collect(); n];
        HomInstance { model, pattern, lists, weights: vec![1; n] }
    }

    /// Takes weights and lists from a graph file overlay.
    pub fn with_overlay(model: TreeModel, pattern: PatternGraph, overlay: &LabeledGraph) -> Result<Self> {
        let n = model.n();
        if overlay.n() != n {
            return Err(Error::domain(format!("overlay has {} vertices, model has {n}", overlay.n())));
        }
        let mut inst = HomInstance::new(model, pattern);
        for v in 0..n {
            inst.weights[v] = overlay.weight(v);
            if let Some(l) = overlay.list(v) {
                if l.iter().any(|&h| h >= inst.pattern.m()) {
                    return Err(Error::domain(format!("list of vertex {v} references a vertex outside the pattern")));
                }
                inst.lists[v] = l.to_vec();
            }
        }
        Ok(inst)
    }

    pub fn with_weights(mut self, weights: Vec<u64>) -> Result<Self> {
        if weights.len() != self.model.n() || weights.contains(&0) {
            return Err(Error::domain("weights must be positive, one per vertex"));
        }
        self.weights = weights;
        Ok(self)
    }

    /// The graph of the model carrying this instance's weights and lists.
    pub fn overlay_graph(&self) -> LabeledGraph {
        let mut g = self.model.realize();
        for v in 0..g.n() {
            g.set_weight(v, self.weights[v]).expect("positive");
            if self.lists[v].len() != self.pattern.m() {
                g.set_list(v, self.lists[v].clone()).expect("vertex exists");
            }
        }
        g
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(1)
    }

    fn problem(&self, track_all: bool) -> Problem {
        let adj = self.pattern.adj.clone();
        let r = self.pattern.r.clone();
        if track_all {
            Problem::homomorphism_all_tracked(adj, r, self.lists.clone(), self.weights.clone())
        } else {
            Problem::homomorphism(adj, r, self.lists.clone(), self.weights.clone())
        }
    }
}

/// `j1 (n W* + 1) + j2`: the univariate exponent standing for `x^{j1} y^{j2}`.
pub fn encode_exponent(j1: usize, j2: u64, n: usize, wstar: u64) -> Result<u64> {
    let nw = n as u64 * wstar;
    if j1 > n || j2 > nw {
        return Err(Error::domain(format!("({j1}, {j2}) outside [0,{n}] x [0,{nw}]")));
    }
    Ok(j1 as u64 * (nw + 1) + j2)
}

/// How to evaluate the recursion for a homomorphism count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HomOptions {
    pub eval: EvalOptions,
    /// Evaluate all points of a prime together with per-node tables.
    pub batched: bool,
    /// Track pattern vertices adjacent to everything as well.
    pub track_all: bool,
}

impl HomOptions {
    /// Tabled evaluation over whole prime fields.
    pub fn fast() -> Self {
        HomOptions { batched: true, ..HomOptions::default() }
    }
}

/// All nonzero counts by `(cardinality, weight)`.
#[derive(Debug, Clone)]
pub struct HomTable {
    pub counts: BTreeMap<(usize, u64), BigUint>,
    pub primes: Vec<u64>,
    pub stats: EvalStats,
}

impl HomTable {
    pub fn get(&self, c: usize, w: u64) -> BigUint {
        self.counts.get(&(c, w)).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }
}

pub fn hom_table(inst: &HomInstance, opts: HomOptions) -> Result<HomTable> {
    let n = inst.model.n();
    let wstar = inst.max_weight();
    let base = n as u64 * wstar + 1;
    let degree = encode_exponent(n, n as u64 * wstar, n, wstar)? as usize;
    let eng = Engine::new(&inst.model, inst.problem(opts.track_all))?;
    let magnitude = BigUint::from(inst.pattern.m().max(1)).pow(n as u32);
    let plan = CrtPlan::new(degree, &magnitude);
    let mut stats = EvalStats::default();
    let mut batched = opts.batched;
    let coeffs = plan.reconstruct(|fld| {
        let xs: Vec<u64> = (0..fld.p()).map(|s| fld.pow(s, base)).collect();
        if batched {
            let ys: Vec<u64> = (0..fld.p()).collect();
            if let Ok((vals, st)) = batched_root_values(&eng, fld, &xs, &ys) {
                stats.absorb(&st);
                return vals;
            }
            batched = false;
        }
        let eval = if opts.batched { EvalOptions { chain: ChainMode::Collapsed, memoize: true } } else { opts.eval };
        {
            (0..fld.p())
                .map(|s| {
                    let ev = eng.evaluator(fld, xs[s as usize], s, eval);
                    let v = ev.root_total();
                    stats.absorb(&ev.stats());
                    v
                })
                .collect()
        }
    });
    let mut counts = BTreeMap::new();
    for (e, c) in coeffs.into_iter().enumerate() {
        if !c.is_zero() {
            counts.insert((e / base as usize, e as u64 % base), c);
        }
    }
    Ok(HomTable { counts, primes: plan.primes, stats })
}

/// Counts split by the root guess: entry `S` holds, by `(cardinality,
/// weight)`, the homomorphisms whose set of (tracked vertex, root label)
/// states is exactly `S`.
pub fn hom_occupancy(inst: &HomInstance) -> Result<BTreeMap<u32, BTreeMap<(usize, u64), BigUint>>> {
    let n = inst.model.n();
    let wstar = inst.max_weight();
    let base = n as u64 * wstar + 1;
    let degree = encode_exponent(n, n as u64 * wstar, n, wstar)? as usize;
    let eng = Engine::new(&inst.model, inst.problem(false))?;
    let magnitude = BigUint::from(inst.pattern.m().max(1)).pow(n as u32);
    let plan = CrtPlan::new(degree, &magnitude);
    let mut residues: BTreeMap<u32, Vec<Vec<u64>>> = BTreeMap::new();
    for &p in &plan.primes {
        let fld = PrimeField::new(p);
        let xs: Vec<u64> = (0..p).map(|s| fld.pow(s, base)).collect();
        let ys: Vec<u64> = (0..p).collect();
        let (rows, _) = batched_root_rows(&eng, fld, &xs, &ys)?;
        for (s, row) in rows {
            let mut all = interpolate_all_mod_p(&row, fld);
            all.truncate(degree + 1);
            residues.entry(s).or_default().push(all);
        }
    }
    Ok(residues
        .into_iter()
        .map(|(s, per_prime)| {
            let counts = (0..=degree)
                .filter_map(|e| {
                    let r: Vec<u64> = per_prime.iter().map(|v| v[e]).collect();
                    let c = crt_combine(&plan.primes, &r);
                    (!c.is_zero()).then(|| ((e / base as usize, e as u64 % base), c))
                })
                .collect();
            (s, counts)
        })
        .collect())
}

/// Homomorphisms with `|φ^{-1}(R)| = c` and `ω(φ^{-1}(R)) = w`.
pub fn count_hom(inst: &HomInstance, c: usize, w: u64) -> Result<BigUint> {
    count_hom_with(inst, c, w, HomOptions::default())
}

pub fn count_hom_with(inst: &HomInstance, c: usize, w: u64, opts: HomOptions) -> Result<BigUint> {
    Ok(hom_table(inst, opts)?.get(c, w))
}

fn check_states(m: &TreeModel, tracked: usize) -> Result<()> {
    if tracked * m.k() > crate::engine::MAX_STATES {
        return Err(Error::capability(format!("{tracked} x k = {} states exceed {}", tracked * m.k(), crate::engine::MAX_STATES)));
    }
    Ok(())
}

/// Proper `q`-colourings.
pub fn q_coloring_count(m: &TreeModel, q: usize, opts: HomOptions) -> Result<BigUint> {
    check_states(m, q)?;
    let n = m.n();
    let inst = HomInstance::new(m.clone(), PatternGraph::clique(q));
    count_hom_with(&inst, n, n as u64, opts)
}

/// Minimum odd cycle transversal size.
pub fn oct_minimum(m: &TreeModel, opts: HomOptions) -> Result<usize> {
    check_states(m, 3)?;
    let inst = HomInstance::new(m.clone(), PatternGraph::odd_cycle_transversal());
    let table = hom_table(&inst, opts)?;
    (0..=m.n())
        .find(|&c| !table.get(c, c as u64).is_zero())
        .ok_or_else(|| Error::domain("no odd cycle transversal found; every vertex set should qualify"))
}

/// Number of independent sets of each size, through the homomorphism path.
pub fn is_polynomial_via_hom(m: &TreeModel, opts: HomOptions) -> Result<Vec<BigUint>> {
    let inst = HomInstance::new(m.clone(), PatternGraph::independent_set());
    let table = hom_table(&inst, opts)?;
    Ok((0..=m.n()).map(|c| table.get(c, c as u64)).collect())
}

/// Sum of all counts as a machine integer, for quick checks.
pub fn total_u64(table: &HomTable) -> Option<u64> {
    table.total().to_u64()
}
