//! Brute-force reference implementations. Capability caps are hard errors.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::hom_solver::PatternGraph;

pub const MAX_IS_VERTICES: usize = 24;
pub const MAX_CUT_VERTICES: usize = 24;
pub const MAX_DOMSET_VERTICES: usize = 20;
pub const MAX_HOM_MAPS: u64 = 10_000_000;
pub const MAX_LCS_CELLS: u64 = 10_000_000;

fn cap(n: usize, max: usize, what: &str) -> Result<()> {
    if n > max {
        return Err(Error::capability(format!("{what} oracle handles at most {max} vertices, got {n}")));
    }
    Ok(())
}

fn masks(g: &LabeledGraph) -> Vec<u32> {
    (0..g.n()).map(|v| g.neighbors_mask(v) as u32).collect()
}

/// Number of independent sets of each size.
pub fn brute_is_polynomial(g: &LabeledGraph) -> Result<Vec<u64>> {
    cap(g.n(), MAX_IS_VERTICES, "independent set")?;
    let adj = masks(g);
    let mut counts = vec![0u64; g.n() + 1];
    for set in 0u32..1 << g.n() {
        let mut rest = set;
        let mut ok = true;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if adj[v] & set != 0 {
                ok = false;
                break;
            }
        }
        if ok {
            counts[set.count_ones() as usize] += 1;
        }
    }
    Ok(counts)
}

pub fn brute_max_cut(g: &LabeledGraph) -> Result<usize> {
    cap(g.n(), MAX_CUT_VERTICES, "max cut")?;
    let n = g.n();
    if n == 0 {
        return Ok(0);
    }
    let edges = g.edges();
    let mut best = 0;
    for set in 0u32..1 << (n - 1) {
        let cut = edges.iter().filter(|&&(u, v)| (set >> u ^ set >> v) & 1 == 1).count();
        best = best.max(cut);
    }
    Ok(best)
}

fn dominates(adj: &[u32], set: u32, full: u32) -> bool {
    let mut covered = set;
    let mut rest = set;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        covered |= adj[v];
    }
    covered == full
}

/// Minimum size of a dominating set.
pub fn brute_min_domset(g: &LabeledGraph) -> Result<usize> {
    cap(g.n(), MAX_DOMSET_VERTICES, "dominating set")?;
    let adj = masks(g);
    let full = ((1u64 << g.n()) - 1) as u32;
    Ok((0..=full).filter(|&s| dominates(&adj, s, full)).map(|s| s.count_ones() as usize).min().unwrap_or(0))
}

/// Dominating sets counted by `(size, total weight)` under the given weights.
pub fn brute_domset_table(g: &LabeledGraph, weights: &[u64]) -> Result<BTreeMap<(usize, u64), u64>> {
    cap(g.n(), MAX_DOMSET_VERTICES, "dominating set")?;
    let adj = masks(g);
    let full = ((1u64 << g.n()) - 1) as u32;
    let mut table = BTreeMap::new();
    for s in 0..=full {
        if dominates(&adj, s, full) {
            let w: u64 = (0..g.n()).filter(|&v| s >> v & 1 == 1).map(|v| weights[v]).sum();
            *table.entry((s.count_ones() as usize, w)).or_insert(0) += 1;
        }
    }
    Ok(table)
}

/// List homomorphisms to `h` counted by `(|φ^{-1}(R)|, ω(φ^{-1}(R)))`.
pub fn brute_hom_table(g: &LabeledGraph, h: &PatternGraph) -> Result<BTreeMap<(usize, u64), BigUint>> {
    let m = h.m() as u64;
    let maps = (0..g.n()).try_fold(1u64, |acc, _| acc.checked_mul(m).filter(|&x| x <= MAX_HOM_MAPS));
    if maps.is_none() {
        return Err(Error::capability(format!("|V(H)|^n exceeds {MAX_HOM_MAPS}")));
    }
    let n = g.n();
    let allowed: Vec<Vec<usize>> = (0..n).map(|v| g.list(v).map(|l| l.to_vec()).unwrap_or_else(|| (0..h.m()).collect())).collect();
    if allowed.iter().flatten().any(|&x| x >= h.m()) {
        return Err(Error::domain("list references a vertex outside the pattern"));
    }
    let mut table: BTreeMap<(usize, u64), BigUint> = BTreeMap::new();
    let mut phi = vec![0usize; n];
    fn rec(
        v: usize,
        g: &LabeledGraph,
        h: &PatternGraph,
        allowed: &[Vec<usize>],
        phi: &mut Vec<usize>,
        table: &mut BTreeMap<(usize, u64), BigUint>,
    ) {
        if v == g.n() {
            let (mut c, mut w) = (0, 0);
            for (u, &x) in phi.iter().enumerate() {
                if h.in_r(x) {
                    c += 1;
                    w += g.weight(u);
                }
            }
            *table.entry((c, w)).or_default() += 1u32;
            return;
        }
        for &x in &allowed[v] {
            if (0..v).all(|u| !g.has_edge(u, v) || h.has_edge(phi[u], x)) {
                phi[v] = x;
                rec(v + 1, g, h, allowed, phi, table);
            }
        }
    }
    rec(0, g, h, &allowed, &mut phi, &mut table);
    Ok(table)
}

pub fn brute_count_hom(g: &LabeledGraph, h: &PatternGraph, c: usize, w: u64) -> Result<BigUint> {
    Ok(brute_hom_table(g, h)?.remove(&(c, w)).unwrap_or_default())
}

/// True iff the strings share a common subsequence of length at least `t`.
pub fn brute_lcs<T: PartialEq, S: AsRef<[T]>>(strings: &[S], t: usize) -> Result<bool> {
    if strings.is_empty() {
        return Err(Error::domain("no strings"));
    }
    let dims: Vec<usize> = strings.iter().map(|s| s.as_ref().len() + 1).collect();
    let cells = dims.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d as u64).filter(|&x| x <= MAX_LCS_CELLS));
    let cells = cells.ok_or_else(|| Error::capability(format!("LCS table exceeds {MAX_LCS_CELLS} cells")))? as usize;
    let r = dims.len();
    let mut stride = vec![1usize; r];
    for j in 1..r {
        stride[j] = stride[j - 1] * dims[j - 1];
    }
    let mut table = vec![0u32; cells];
    let mut idx = vec![0usize; r];
    for cell in 0..cells {
        let mut rem = cell;
        for j in 0..r {
            idx[j] = rem % dims[j];
            rem /= dims[j];
        }
        if idx.contains(&0) {
            continue;
        }
        let first = &strings[0].as_ref()[idx[0] - 1];
        let all_equal = (1..r).all(|j| strings[j].as_ref()[idx[j] - 1] == *first);
        table[cell] = if all_equal {
            1 + table[cell - stride.iter().sum::<usize>()]
        } else {
            (0..r).map(|j| table[cell - stride[j]]).max().unwrap_or(0)
        };
    }
    Ok(table[cells - 1] as usize >= t)
}

/// Exact independence number by branch and bound. Handles graphs far beyond
/// the subset-enumeration caps when they have a matching-like structure.
pub fn independence_number(g: &LabeledGraph) -> usize {
    let n = g.n();
    let w = n.div_ceil(64).max(1);
    let adj: Vec<Vec<u64>> = (0..n).map(|v| g.neighbors_words(v).to_vec()).collect();
    let mut p = vec![0u64; w];
    for v in 0..n {
        p[v / 64] |= 1 << (v % 64);
    }
    let mut search = MisSearch { adj, best: 0 };
    search.run(p, 0);
    search.best
}

struct MisSearch {
    adj: Vec<Vec<u64>>,
    best: usize,
}

fn ones(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(i, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            (x != 0).then(|| {
                let b = x.trailing_zeros() as usize;
                x &= x - 1;
                i * 64 + b
            })
        })
    })
}

fn first(set: &[u64]) -> Option<usize> {
    set.iter().enumerate().find(|(_, &w)| w != 0).map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
}

fn count_and(a: &[u64], b: &[u64]) -> usize {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

impl MisSearch {
    /// Greedy partition of `p` into cliques; the count bounds α(G[p]).
    fn clique_cover(&self, p: &[u64]) -> usize {
        let mut rest = p.to_vec();
        let mut cliques = 0;
        while let Some(v) = first(&rest) {
            cliques += 1;
            rest[v / 64] &= !(1 << (v % 64));
            let mut cand: Vec<u64> = rest.iter().zip(&self.adj[v]).map(|(r, a)| r & a).collect();
            while let Some(u) = first(&cand) {
                rest[u / 64] &= !(1 << (u % 64));
                for (c, a) in cand.iter_mut().zip(&self.adj[u]) {
                    *c &= a;
                }
            }
        }
        cliques
    }

    fn run(&mut self, mut p: Vec<u64>, mut size: usize) {
        // Vertices of degree at most one inside p can always be taken.
        loop {
            let low = ones(&p).find(|&v| count_and(&p, &self.adj[v]) <= 1);
            match low {
                Some(v) => {
                    size += 1;
                    p[v / 64] &= !(1 << (v % 64));
                    for (x, a) in p.iter_mut().zip(&self.adj[v]) {
                        *x &= !a;
                    }
                }
                None => break,
            }
        }
        if p.iter().all(|&x| x == 0) {
            self.best = self.best.max(size);
            return;
        }
        if size + self.clique_cover(&p) <= self.best {
            return;
        }
        let v = ones(&p).max_by_key(|&v| count_and(&p, &self.adj[v])).expect("nonempty");
        let mut with = p.clone();
        with[v / 64] &= !(1 << (v % 64));
        for (x, a) in with.iter_mut().zip(&self.adj[v]) {
            *x &= !a;
        }
        self.run(with, size + 1);
        p[v / 64] &= !(1 << (v % 64));
        self.run(p, size);
    }
}

/// Minimum number of vertices whose removal leaves a bipartite graph.
pub fn brute_oct(g: &LabeledGraph) -> Result<usize> {
    cap(g.n(), MAX_DOMSET_VERTICES, "odd cycle transversal")?;
    let n = g.n();
    let adj = masks(g);
    let bipartite = |keep: u32| {
        let mut color = vec![u8::MAX; n];
        for s in 0..n {
            if keep >> s & 1 == 0 || color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                let mut nb = adj[v] & keep;
                while nb != 0 {
                    let u = nb.trailing_zeros() as usize;
                    nb &= nb - 1;
                    if color[u] == u8::MAX {
                        color[u] = 1 - color[v];
                        stack.push(u);
                    } else if color[u] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    };
    let full = ((1u64 << n) - 1) as u32;
    Ok((0..=full).filter(|&x| bipartite(full & !x)).map(|x| x.count_ones() as usize).min().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;

    #[test]
    fn is_polynomial_examples() {
        assert_eq!(brute_is_polynomial(&complete(2)).unwrap(), vec![1, 2, 0]);
        assert_eq!(brute_is_polynomial(&path(3)).unwrap(), vec![1, 3, 1, 0]);
        assert_eq!(brute_is_polynomial(&edgeless(3)).unwrap(), vec![1, 3, 3, 1]);
        assert!(brute_is_polynomial(&edgeless(25)).unwrap_err().is_capability());
    }

    #[test]
    fn is_counts_sum_to_independent_sets() {
        let g = cycle(7);
        let total: u64 = brute_is_polynomial(&g).unwrap().iter().sum();
        let direct = (0u32..1 << 7)
            .filter(|&s| {
                let vs: Vec<usize> = (0..7).filter(|&v| s >> v & 1 == 1).collect();
                crate::graph::is_independent_set(&g, &vs)
            })
            .count() as u64;
        assert_eq!(total, direct);
    }

    #[test]
    fn max_cut_examples() {
        assert_eq!(brute_max_cut(&complete(3)).unwrap(), 2);
        assert_eq!(brute_max_cut(&cycle(4)).unwrap(), 4);
        assert_eq!(brute_max_cut(&complete(2)).unwrap(), 1);
    }

    #[test]
    fn domset_examples() {
        assert_eq!(brute_min_domset(&complete_bipartite(1, 3)).unwrap(), 1);
        assert_eq!(brute_min_domset(&path(4)).unwrap(), 2);
        assert_eq!(brute_min_domset(&edgeless(3)).unwrap(), 3);
        let t = brute_domset_table(&complete(2), &[1, 2]).unwrap();
        assert_eq!(t.get(&(1, 1)), Some(&1));
        assert_eq!(t.get(&(1, 3)), None);
        assert_eq!(t.get(&(2, 3)), Some(&1));
    }

    #[test]
    fn hom_examples() {
        let k2 = PatternGraph::new(2, &[(0, 1)], &[0, 1]).unwrap();
        assert_eq!(brute_count_hom(&complete(2), &k2, 2, 2).unwrap(), BigUint::from(2u32));
        assert_eq!(brute_count_hom(&complete(3), &k2, 3, 3).unwrap(), BigUint::from(0u32));
        let looped = PatternGraph::new(1, &[(0, 0)], &[0]).unwrap();
        assert_eq!(brute_count_hom(&edgeless(1), &looped, 1, 1).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn lcs_examples() {
        assert!(brute_lcs(&["ab", "ab"], 2).unwrap());
        assert!(!brute_lcs(&["ab", "ba"], 2).unwrap());
        assert!(brute_lcs(&["ab", "ba"], 1).unwrap());
        assert!(brute_lcs(&["abcbdab", "bdcaba", "bcab"], 4).unwrap());
        assert!(!brute_lcs(&["abcbdab", "bdcaba", "bcab"], 5).unwrap());
    }

    #[test]
    fn independence_number_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..=16);
            let mut g = LabeledGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.3) {
                        g.add_edge(u, v).unwrap();
                    }
                }
            }
            let poly = brute_is_polynomial(&g).unwrap();
            let alpha = poly.iter().rposition(|&c| c > 0).unwrap();
            assert_eq!(independence_number(&g), alpha);
        }
        assert_eq!(independence_number(&cycle(101)), 50);
        assert_eq!(independence_number(&complete(70)), 1);
    }

    #[test]
    fn oct_examples() {
        assert_eq!(brute_oct(&path(3)).unwrap(), 0);
        assert_eq!(brute_oct(&complete(3)).unwrap(), 1);
        assert_eq!(brute_oct(&complete(4)).unwrap(), 2);
    }
}
