//! Max Cut through signatures: `f_a(s)` is the largest cut inside `G[V_a]`
//! over sides `X` with `s_i = |X ∩ V_a(i)|`. Each value is found by testing
//! budgets `B` downwards with character sums modulo a run of primes.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::modmath::{mod_pow, next_prime_u64, PrimeField};
use crate::tree_model::{LabelMatrix, NodeId, TreeModel};

/// A per-label occupancy vector.
pub type Signature = Vec<usize>;

/// Cut edges between labels `i` and `j` implied by `s` against `sizes`.
pub fn edgelabel(s: &[usize], i: usize, j: usize, sizes: &[usize]) -> u64 {
    let (si, sj) = (s[i] as u64, s[j] as u64);
    let (ni, nj) = (sizes[i] as u64, sizes[j] as u64);
    if i == j {
        si * (ni - si)
    } else {
        si * (nj - sj) + sj * (ni - si)
    }
}

/// Σ over label pairs `i ≤ j` with `M[i][j] = 1` of `edgelabel`.
pub fn m_value(s: &[usize], m: &LabelMatrix, sizes: &[usize]) -> u64 {
    let k = s.len();
    (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).filter(|&(i, j)| m.get(i, j)).map(|(i, j)| edgelabel(s, i, j, sizes)).sum()
}

/// All vectors `0 ≤ s_i ≤ sizes[i]` in mixed-radix order, first label fastest.
pub fn signatures(sizes: &[usize]) -> impl Iterator<Item = Signature> + '_ {
    let mut cur = Some(vec![0; sizes.len()]);
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = 0;
        loop {
            if i == sizes.len() {
                cur = None;
                break;
            }
            if next[i] < sizes[i] {
                next[i] += 1;
                cur = Some(next);
                break;
            }
            next[i] = 0;
            i += 1;
        }
        Some(out)
    })
}

/// Positional base-`C` packing of a signature with a trailing budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KaneEncoding {
    pub c: i128,
}

impl KaneEncoding {
    /// `C = 2n² + 1`.
    pub fn for_vertices(n: usize) -> Self {
        KaneEncoding { c: 2 * (n as i128) * (n as i128) + 1 }
    }

    pub fn encode(&self, s: &[usize], budget: i64) -> i128 {
        let mut acc = budget as i128;
        for &x in s.iter().rev() {
            acc = acc * self.c + x as i128;
        }
        acc
    }

    /// `C^{k+1}`, or `None` past 2^126.
    pub fn bound(&self, k: usize) -> Option<i128> {
        (0..=k).try_fold(1i128, |acc, _| acc.checked_mul(self.c).filter(|&x| x < 1 << 126))
    }
}

/// How the character sum is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KaneStrategy {
    /// Loop over `x = 1 .. p-1`; only for small primes.
    CharacterSum,
    /// Count child tuples by exponent class modulo `p - 1`, which is what the
    /// `x`-sum evaluates to.
    ExponentClasses,
    /// The literal sum below 2^16, exponent classes above.
    #[default]
    Auto,
}

const CHARACTER_SUM_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxCutOptions {
    /// Keep computed `f_a(s)` values.
    pub memoize: bool,
    pub strategy: KaneStrategy,
}

impl Default for MaxCutOptions {
    fn default() -> Self {
        MaxCutOptions { memoize: true, strategy: KaneStrategy::Auto }
    }
}

/// Counters from a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxCutStats {
    pub node_calls: u64,
    pub kane_evals: u64,
    pub primes_in_schedule: usize,
    pub memo_entries: usize,
}

/// Precomputed sizes and the prime schedule for one model.
pub struct MaxCutSolver<'m> {
    model: &'m TreeModel,
    opts: MaxCutOptions,
    enc: KaneEncoding,
    primes: Vec<u64>,
    /// `|V_a(i)|` per node.
    sizes: Vec<Vec<usize>>,
    /// `|V_{ab}(i)|` per non-root node `b`, labels read at its parent.
    edge_sizes: Vec<Vec<usize>>,
    inner_edges: Vec<usize>,
    memo: RefCell<HashMap<(NodeId, Signature), u64>>,
    node_calls: Cell<u64>,
    kane_evals: Cell<u64>,
}

/// Accumulate `⌊log₂ p⌋` over primes from `next_prime(C^{k+1})` while the
/// total is at most `n k ⌈log₂ n⌉`.
fn prime_schedule(n: usize, k: usize, start: u64) -> Vec<u64> {
    let log_n = (n.max(1) as u64).next_power_of_two().trailing_zeros() as u64;
    let threshold = n as u64 * k as u64 * log_n;
    let mut primes = Vec::new();
    let mut c = 0;
    let mut p = next_prime_u64(start);
    loop {
        primes.push(p);
        c += 63 - p.leading_zeros() as u64;
        if c > threshold {
            break;
        }
        p = next_prime_u64(p);
    }
    primes
}

impl<'m> MaxCutSolver<'m> {
    pub fn new(model: &'m TreeModel, opts: MaxCutOptions) -> Result<Self> {
        model.ensure_valid()?;
        let n = model.n();
        let k = model.k();
        let enc = KaneEncoding::for_vertices(n);
        let start = enc
            .bound(k)
            .and_then(|b| u64::try_from(b).ok())
            .filter(|&b| b < 1 << 62)
            .ok_or_else(|| Error::capability(format!("C^(k+1) = {}^{} exceeds the 62-bit prime range", enc.c, k + 1)))?;
        let primes = prime_schedule(n, k, start);
        let views = model.views();
        let sizes: Vec<Vec<usize>> = views.iter().map(|v| v.counts.clone()).collect();
        let edge_sizes = (0..model.nodes().len())
            .map(|b| match model.parent(b) {
                Some(_) => {
                    let mut out = vec![0; k];
                    for (j, &c) in sizes[b].iter().enumerate() {
                        out[model.rename(b)[j]] += c;
                    }
                    out
                }
                None => Vec::new(),
            })
            .collect();
        let inner_edges = model.inner_edge_counts(&model.realize());
        Ok(MaxCutSolver {
            model,
            opts,
            enc,
            primes,
            sizes,
            edge_sizes,
            inner_edges,
            memo: RefCell::new(HashMap::new()),
            node_calls: Cell::new(0),
            kane_evals: Cell::new(0),
        })
    }

    pub fn encoding(&self) -> KaneEncoding {
        self.enc
    }

    /// Primes tried per budget, in order.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn sizes(&self, a: NodeId) -> &[usize] {
        &self.sizes[a]
    }

    /// Label counts of `V_b` read at the parent of `b`.
    pub fn edge_sizes(&self, b: NodeId) -> &[usize] {
        &self.edge_sizes[b]
    }

    pub fn stats(&self) -> MaxCutStats {
        MaxCutStats {
            node_calls: self.node_calls.get(),
            kane_evals: self.kane_evals.get(),
            primes_in_schedule: self.primes.len(),
            memo_entries: self.memo.borrow().len(),
        }
    }

    fn check(s: &[usize], sizes: &[usize]) -> Result<()> {
        if s.len() != sizes.len() || s.iter().zip(sizes).any(|(x, n)| x > n) {
            return Err(Error::domain(format!("signature {s:?} is not valid for sizes {sizes:?}")));
        }
        Ok(())
    }

    /// The maximum cut of the realised graph.
    pub fn max_cut(&self) -> Result<u64> {
        let root = self.model.root();
        let mut best = 0;
        for s in signatures(&self.sizes[root]) {
            best = best.max(self.f_node(root, &s)?);
        }
        Ok(best)
    }

    /// Always 0 for a valid leaf signature.
    pub fn f_leaf(&self, leaf: NodeId, s: &[usize]) -> Result<u64> {
        if !self.model.is_leaf(leaf) {
            return Err(Error::domain("not a leaf"));
        }
        Self::check(s, &self.sizes[leaf])?;
        Ok(0)
    }

    /// `f_{ab}(s)`: the best `f_b(s')` over `s'` aggregating to `s` under the renaming.
    pub fn f_edge(&self, b: NodeId, s: &[usize]) -> Result<u64> {
        if self.model.parent(b).is_none() {
            return Err(Error::domain("the root has no incoming edge"));
        }
        Self::check(s, &self.edge_sizes[b])?;
        let rho = self.model.rename(b);
        let mut best: Option<u64> = None;
        for s2 in signatures(&self.sizes[b]) {
            let mut agg = vec![0; s.len()];
            for (j, &x) in s2.iter().enumerate() {
                agg[rho[j]] += x;
            }
            if agg == s {
                let v = self.f_node(b, &s2)?;
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
        Ok(best.expect("valid signatures have a preimage"))
    }

    /// Per child: every signature at the edge with its exponent `C(s^j | g_j)`,
    /// where `g_j = f_{ab_j}(s^j) - m_{ab_j}(s^j, M_a)`.
    fn child_terms(&self, a: NodeId) -> Result<Vec<Vec<i128>>> {
        let mat = self.model.matrix(a);
        self.model
            .children(a)
            .iter()
            .map(|&b| {
                let es = &self.edge_sizes[b];
                signatures(es)
                    .map(|sj| {
                        let g = self.f_edge(b, &sj)? as i64 - m_value(&sj, mat, es) as i64;
                        Ok(self.enc.encode(&sj, g))
                    })
                    .collect()
            })
            .collect()
    }

    /// `P_{a,s}(B, p)`, congruent to `-A(s, B)` where `A(s, B)` counts child
    /// signature tuples summing to `s` whose `g` values sum to `B - m_a(s, M_a)`.
    pub fn kane_poly_eval(&self, a: NodeId, s: &[usize], budget: i64, fld: PrimeField) -> Result<u64> {
        if self.model.is_leaf(a) {
            return Err(Error::domain("kane_poly_eval is defined at internal nodes"));
        }
        Self::check(s, &self.sizes[a])?;
        let terms = self.child_terms(a)?;
        self.kane_with_terms(a, s, budget, fld, &terms)
    }

    fn strategy_for(&self, fld: PrimeField) -> Result<KaneStrategy> {
        let bound = self.enc.bound(self.model.k()).expect("checked at construction");
        if (fld.p() as i128) <= bound + 1 {
            return Err(Error::domain(format!("prime {} must exceed C^(k+1) + 1 = {}", fld.p(), bound + 1)));
        }
        Ok(match self.opts.strategy {
            KaneStrategy::Auto if fld.p() < CHARACTER_SUM_LIMIT => KaneStrategy::CharacterSum,
            KaneStrategy::Auto => KaneStrategy::ExponentClasses,
            other => other,
        })
    }

    fn exponent(&self, a: NodeId, s: &[usize], budget: i64) -> i128 {
        let m = m_value(s, self.model.matrix(a), &self.sizes[a]) as i64;
        self.enc.encode(s, budget - m)
    }

    fn kane_with_terms(&self, a: NodeId, s: &[usize], budget: i64, fld: PrimeField, terms: &[Vec<i128>]) -> Result<u64> {
        let strategy = self.strategy_for(fld)?;
        self.kane_evals.set(self.kane_evals.get() + 1);
        let e = self.exponent(a, s, budget);
        Ok(match strategy {
            KaneStrategy::CharacterSum => character_sum(e, terms, fld),
            _ => fld.neg(class_count(&exponent_classes(terms, fld), e, fld)),
        })
    }

    /// The largest budget `B ≤ |E(G[V_a])|` whose tuple count is
    /// nonzero modulo some prime of the schedule.
    pub fn f_node(&self, a: NodeId, s: &[usize]) -> Result<u64> {
        if self.model.is_leaf(a) {
            return self.f_leaf(a, s);
        }
        Self::check(s, &self.sizes[a])?;
        self.node_calls.set(self.node_calls.get() + 1);
        if self.opts.memoize {
            if let Some(&v) = self.memo.borrow().get(&(a, s.to_vec())) {
                return Ok(v);
            }
        }
        let terms = self.child_terms(a)?;
        // Class counts and child products depend only on the prime, so each is built once per call.
        let mut classes: Vec<Option<HashMap<i128, u64>>> = vec![None; self.primes.len()];
        let mut products: Vec<Option<Vec<u64>>> = vec![None; self.primes.len()];
        let mut found = None;
        'budget: for budget in (0..=self.inner_edges[a] as i64).rev() {
            for (idx, &p) in self.primes.iter().enumerate() {
                let fld = PrimeField::new(p);
                let value = match self.strategy_for(fld)? {
                    KaneStrategy::CharacterSum => {
                        self.kane_evals.set(self.kane_evals.get() + 1);
                        let table = products[idx].get_or_insert_with(|| child_products(&terms, fld));
                        weighted_sum(self.exponent(a, s, budget), table, fld)
                    }
                    _ => {
                        self.kane_evals.set(self.kane_evals.get() + 1);
                        let table = classes[idx].get_or_insert_with(|| exponent_classes(&terms, fld));
                        fld.neg(class_count(table, self.exponent(a, s, budget), fld))
                    }
                };
                if value != 0 {
                    found = Some(budget as u64);
                    break 'budget;
                }
            }
        }
        let value = found.expect("every valid signature is realised by some side");
        if self.opts.memoize {
            self.memo.borrow_mut().insert((a, s.to_vec()), value);
        }
        Ok(value)
    }
}

fn reduce_exponent(x: i128, fld: PrimeField) -> u64 {
    x.rem_euclid((fld.p() - 1) as i128) as u64
}

/// `Π_j Σ_t x^{-t}` for `x = 1..p-1`, stored at index `x - 1`.
fn child_products(terms: &[Vec<i128>], fld: PrimeField) -> Vec<u64> {
    let neg: Vec<Vec<u64>> = terms.iter().map(|ts| ts.iter().map(|&t| reduce_exponent(-t, fld)).collect()).collect();
    (1..fld.p())
        .map(|x| {
            neg.iter().fold(1, |v, ts| {
                let inner = ts.iter().fold(0, |s, &t| fld.add(s, fld.pow(x, t)));
                fld.mul(v, inner)
            })
        })
        .collect()
}

/// `Σ_{x=1}^{p-1} x^e · table[x - 1]`.
fn weighted_sum(e: i128, table: &[u64], fld: PrimeField) -> u64 {
    let e = reduce_exponent(e, fld);
    table.iter().zip(1..fld.p()).fold(0, |acc, (&q, x)| fld.add(acc, fld.mul(fld.pow(x, e), q)))
}

/// Σ_{x=1}^{p-1} x^e Π_j Σ_t x^{-t}, exponents taken modulo p - 1.
fn character_sum(e: i128, terms: &[Vec<i128>], fld: PrimeField) -> u64 {
    weighted_sum(e, &child_products(terms, fld), fld)
}

/// Number of child tuples per class of `Σ t_j` modulo `p - 1`, reduced mod `p`.
/// Since `Σ_x x^ℓ` is `-1` when `(p-1) | ℓ` and 0 otherwise, the character sum
/// equals minus the count in the class of the target exponent.
fn exponent_classes(terms: &[Vec<i128>], fld: PrimeField) -> HashMap<i128, u64> {
    let order = (fld.p() - 1) as i128;
    let mut classes: HashMap<i128, u64> = HashMap::from([(0, 1)]);
    for ts in terms {
        let mut next: HashMap<i128, u64> = HashMap::with_capacity(classes.len() * ts.len());
        for (&r, &c) in &classes {
            for &t in ts {
                let slot = next.entry((r + t).rem_euclid(order)).or_insert(0);
                *slot = fld.add(*slot, c);
            }
        }
        classes = next;
    }
    classes
}

fn class_count(classes: &HashMap<i128, u64>, e: i128, fld: PrimeField) -> u64 {
    classes.get(&e.rem_euclid((fld.p() - 1) as i128)).copied().unwrap_or(0)
}

/// `Σ_{x=1}^{p-1} x^ℓ mod p` by direct summation.
pub fn power_sum(p: u64, exponent: &BigInt) -> u64 {
    let fld = PrimeField::new(p);
    (1..p).fold(0, |acc, x| fld.add(acc, mod_pow(x, exponent, fld)))
}

/// Maximum cut of the graph realised by `m`.
pub fn max_cut(m: &TreeModel) -> Result<u64> {
    MaxCutSolver::new(m, MaxCutOptions::default())?.max_cut()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cut_size;
    use crate::oracle::brute_max_cut;
    use crate::tree_model::{families, parse_tree_model, random_model, RandomModelSpec};
    use rand::{Rng, SeedableRng};

    const K2: &str = "shrubmodel 1\nk 1\nnode r root\nleaf a child-of r vertex 0 label 1\nleaf b child-of r vertex 1 label 1\nmatrix r 1\nrename a id\nrename b id\n";

    #[test]
    fn edgelabel_examples() {
        assert_eq!(edgelabel(&[1, 0], 0, 0, &[2, 1]), 1);
        assert_eq!(edgelabel(&[1, 0], 0, 1, &[2, 1]), 1);
        assert_eq!(edgelabel(&[0, 0], 0, 1, &[2, 1]), 0);
    }

    #[test]
    fn m_value_examples() {
        assert_eq!(m_value(&[1, 0], &LabelMatrix::zero(2), &[2, 1]), 0);
        assert_eq!(m_value(&[1], &LabelMatrix::from_rows(&["1"]).unwrap(), &[2]), 1);
        assert_eq!(m_value(&[1, 0], &LabelMatrix::from_rows(&["01", "10"]).unwrap(), &[2, 1]), 1);
    }

    #[test]
    fn signature_order_is_mixed_radix() {
        let all: Vec<_> = signatures(&[1, 2]).collect();
        assert_eq!(all, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(signatures(&[]).count(), 1);
    }

    #[test]
    fn max_cut_examples() {
        assert_eq!(max_cut(&families::complete(2)).unwrap(), 1);
        assert_eq!(max_cut(&families::complete(3)).unwrap(), 2);
        assert_eq!(max_cut(&families::complete_bipartite(2, 2)).unwrap(), 4);
        assert_eq!(max_cut(&families::edgeless(3)).unwrap(), 0);
    }

    #[test]
    fn node_and_edge_examples() {
        let m = parse_tree_model(K2).unwrap();
        let sv = MaxCutSolver::new(&m, MaxCutOptions::default()).unwrap();
        let r = m.root();
        assert_eq!(sv.f_node(r, &[1]).unwrap(), 1);
        assert_eq!(sv.f_node(r, &[0]).unwrap(), 0);
        assert_eq!(sv.f_node(r, &[2]).unwrap(), 0);
        let leaf = m.leaf_nodes()[0];
        assert_eq!(sv.f_leaf(leaf, &[0]).unwrap(), 0);
        assert_eq!(sv.f_leaf(leaf, &[1]).unwrap(), 0);
        assert_eq!(sv.f_edge(leaf, &[1]).unwrap(), 0);

        let merged = "shrubmodel 1\nk 2\nnode r root\nnode x child-of r\nleaf a child-of x vertex 0 label 1\nleaf b child-of x vertex 1 label 2\nmatrix r 00 00\nmatrix x 00 00\nrename x 1 1\nrename a id\nrename b id\n";
        let m = parse_tree_model(merged).unwrap();
        let sv = MaxCutSolver::new(&m, MaxCutOptions::default()).unwrap();
        let x = m.children(m.root())[0];
        assert_eq!(sv.f_edge(x, &[1, 0]).unwrap(), 0);
        assert!(sv.f_leaf(m.leaf_nodes()[0], &[0, 1]).is_err());
    }

    #[test]
    fn kane_examples() {
        let m = parse_tree_model(K2).unwrap();
        let sv = MaxCutSolver::new(&m, MaxCutOptions::default()).unwrap();
        assert_eq!(sv.encoding().c, 9);
        let f = PrimeField::new(83);
        assert_eq!(sv.kane_poly_eval(m.root(), &[1], 1, f).unwrap(), 81);
        assert_eq!(sv.kane_poly_eval(m.root(), &[1], 0, f).unwrap(), 0);
        assert_eq!(sv.kane_poly_eval(m.root(), &[0], 0, f).unwrap(), 82);
        assert!(sv.kane_poly_eval(m.root(), &[1], 1, PrimeField::new(79)).is_err());
    }

    #[test]
    fn character_sum_fact() {
        for p in (2u64..=200).filter(|&p| crate::modmath::is_prime_u64(p)) {
            for l in 0..=3 * (p - 1) {
                let want = if l % (p - 1) == 0 { p - 1 } else { 0 };
                assert_eq!(power_sum(p, &BigInt::from(l)), want, "p={p} l={l}");
            }
        }
    }

    #[test]
    fn encoding_is_injective() {
        for n in 1..=4usize {
            for k in 1..=2 {
                let enc = KaneEncoding::for_vertices(n);
                let mut seen = std::collections::HashSet::new();
                let sizes = vec![n; k];
                let lim = 2 * (n * n) as i64;
                for s in signatures(&sizes) {
                    for b in -lim..=lim {
                        assert!(seen.insert(enc.encode(&s, b)), "n={n} k={k} s={s:?} b={b}");
                    }
                }
            }
        }
    }

    /// Best cut inside `V_b` among sides with label counts `s'` that aggregate
    /// to `s` at the parent, by subset enumeration.
    fn brute_f_edge(m: &TreeModel, b: NodeId, s: &[usize]) -> Option<i64> {
        let g = m.realize();
        let view = &m.views()[b];
        let rho = m.rename(b);
        let verts = &view.vertices;
        let mut best = None;
        for mask in 0u32..1 << verts.len() {
            let mut sig = vec![0; m.k()];
            let mut side = vec![false; g.n()];
            for (idx, (&v, &l)) in verts.iter().zip(&view.labels).enumerate() {
                if mask >> idx & 1 == 1 {
                    sig[rho[l]] += 1;
                    side[v] = true;
                }
            }
            if sig != s {
                continue;
            }
            let cut = g.edges().iter().filter(|&&(u, v)| verts.contains(&u) && verts.contains(&v) && side[u] != side[v]).count() as i64;
            best = Some(best.map_or(cut, |x: i64| x.max(cut)));
        }
        best
    }

    fn brute_a(m: &TreeModel, sv: &MaxCutSolver<'_>, a: NodeId, s: &[usize], budget: i64) -> u64 {
        let mat = m.matrix(a);
        let kids = m.children(a);
        let lists: Vec<Vec<(Signature, i64)>> = kids
            .iter()
            .map(|&b| {
                let es = sv.edge_sizes(b).to_vec();
                signatures(&es).map(|sj| (sj.clone(), brute_f_edge(m, b, &sj).unwrap() - m_value(&sj, mat, &es) as i64)).collect()
            })
            .collect();
        let target = budget - m_value(s, mat, sv.sizes(a)) as i64;
        let mut count = 0;
        let mut idx = vec![0; kids.len()];
        'outer: loop {
            let mut sum = vec![0; m.k()];
            let mut g = 0;
            for (j, &i) in idx.iter().enumerate() {
                for (x, y) in sum.iter_mut().zip(&lists[j][i].0) {
                    *x += y;
                }
                g += lists[j][i].1;
            }
            if sum == s && g == target {
                count += 1;
            }
            for j in 0..idx.len() {
                idx[j] += 1;
                if idx[j] < lists[j].len() {
                    continue 'outer;
                }
                idx[j] = 0;
            }
            break;
        }
        count
    }

    #[test]
    fn kane_matches_brute_tuple_count() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut samples = 0;
        while samples < 60 {
            let spec = RandomModelSpec { n: rng.gen_range(2..=6), k: rng.gen_range(1..=2), d: rng.gen_range(1..=2), density: 0.5 };
            let m = random_model(&mut rng, spec);
            let internal: Vec<NodeId> = (0..m.nodes().len()).filter(|&a| !m.is_leaf(a) && m.children(a).len() <= 3).collect();
            if internal.is_empty() {
                continue;
            }
            let a = internal[rng.gen_range(0..internal.len())];
            let sv = MaxCutSolver::new(&m, MaxCutOptions::default()).unwrap();
            let s: Signature = sv.sizes(a).iter().map(|&c| rng.gen_range(0..=c)).collect();
            let budget = rng.gen_range(0..=m.n() as i64 * 2);
            let want = brute_a(&m, &sv, a, &s, budget);
            let mut p = sv.primes()[0];
            for _ in 0..5 {
                let f = PrimeField::new(p);
                let got = sv.kane_poly_eval(a, &s, budget, f).unwrap();
                assert_eq!(got, f.neg(want % p), "a={a} s={s:?} B={budget}\n{}", m.to_text());
                p = next_prime_u64(p);
            }
            samples += 1;
        }
    }

    #[test]
    fn strategies_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let spec = RandomModelSpec { n: rng.gen_range(2..=3), k: 1, d: 1, density: 0.5 };
            let m = random_model(&mut rng, spec);
            let lit = MaxCutSolver::new(&m, MaxCutOptions { memoize: true, strategy: KaneStrategy::CharacterSum }).unwrap();
            let cls = MaxCutSolver::new(&m, MaxCutOptions { memoize: false, strategy: KaneStrategy::ExponentClasses }).unwrap();
            let f = PrimeField::new(lit.primes()[0]);
            for s in signatures(lit.sizes(m.root())) {
                for b in 0..=3 {
                    assert_eq!(lit.kane_poly_eval(m.root(), &s, b, f).unwrap(), cls.kane_poly_eval(m.root(), &s, b, f).unwrap());
                }
            }
            assert_eq!(lit.max_cut().unwrap(), cls.max_cut().unwrap());
        }
    }

    #[test]
    fn cut_decomposes_over_children() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let spec = RandomModelSpec { n: rng.gen_range(2..=9), k: rng.gen_range(1..=3), d: rng.gen_range(1..=3), density: 0.5 };
            let m = random_model(&mut rng, spec);
            let g = m.realize();
            let views = m.views();
            let sv = MaxCutSolver::new(&m, MaxCutOptions::default()).unwrap();
            let side: Vec<bool> = (0..g.n()).map(|_| rng.gen_bool(0.5)).collect();
            let inner_cut = |a: NodeId| {
                let vs = &views[a].vertices;
                g.edges().iter().filter(|&&(u, v)| vs.contains(&u) && vs.contains(&v) && side[u] != side[v]).count() as i64
            };
            for a in (0..m.nodes().len()).filter(|&a| !m.is_leaf(a)) {
                let sig = |vs: &[usize], labels: &[usize], map: &dyn Fn(usize) -> usize| {
                    let mut s = vec![0; m.k()];
                    for (&v, &l) in vs.iter().zip(labels) {
                        if side[v] {
                            s[map(l)] += 1;
                        }
                    }
                    s
                };
                let sa = sig(&views[a].vertices, &views[a].labels, &|l| l);
                let mut rhs = m_value(&sa, m.matrix(a), sv.sizes(a)) as i64;
                for &b in m.children(a) {
                    let rho = m.rename(b).to_vec();
                    let sb = sig(&views[b].vertices, &views[b].labels, &|l| rho[l]);
                    rhs += inner_cut(b) - m_value(&sb, m.matrix(a), sv.edge_sizes(b)) as i64;
                }
                assert_eq!(inner_cut(a), rhs);
            }
            let x: Vec<usize> = (0..g.n()).filter(|&v| side[v]).collect();
            assert_eq!(inner_cut(m.root()), cut_size(&g, &x) as i64);
        }
    }

    #[test]
    fn matches_oracle_with_and_without_memo() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for i in 0..20 {
            let spec = RandomModelSpec { n: 1 + i % 8, k: 1 + i % 2, d: 1 + i % 3, density: 0.5 };
            let m = random_model(&mut rng, spec);
            let want = brute_max_cut(&m.realize()).unwrap() as u64;
            assert_eq!(max_cut(&m).unwrap(), want);
            if m.n() <= 5 {
                let sv = MaxCutSolver::new(&m, MaxCutOptions { memoize: false, ..Default::default() }).unwrap();
                assert_eq!(sv.max_cut().unwrap(), want);
            }
        }
    }
}
