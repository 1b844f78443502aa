//! Zeta and Möbius transforms and the cover product over small universes.

use crate::error::{Error, Result};

pub const MAX_UNIVERSE: usize = 20;

/// A function `2^[u] -> Z`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFunction {
    u: usize,
    values: Vec<i128>,
}

impl SetFunction {
    pub fn new(u: usize, values: Vec<i128>) -> Result<Self> {
        if u > MAX_UNIVERSE {
            return Err(Error::capability(format!("universe size {u} exceeds {MAX_UNIVERSE}")));
        }
        if values.len() != 1 << u {
            return Err(Error::domain(format!("expected {} values, got {}", 1usize << u, values.len())));
        }
        Ok(SetFunction { u, values })
    }

    pub fn zeros(u: usize) -> Self {
        SetFunction::new(u, vec![0; 1 << u]).expect("size matches")
    }

    pub fn indicator(u: usize, set: usize) -> Self {
        let mut f = SetFunction::zeros(u);
        f.values[set] = 1;
        f
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn values(&self) -> &[i128] {
        &self.values
    }

    pub fn get(&self, set: usize) -> i128 {
        self.values[set]
    }
}

/// Iterates all submasks of `mask`, including `mask` and 0.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// `(ζf)(Y) = Σ_{X ⊆ Y} f(X)` by the in-place subset-sum sweep.
pub fn zeta(f: &SetFunction) -> SetFunction {
    let mut v = f.values.clone();
    for bit in 0..f.u {
        for y in 0..v.len() {
            if y >> bit & 1 == 1 {
                v[y] += v[y ^ 1 << bit];
            }
        }
    }
    SetFunction { u: f.u, values: v }
}

/// `(μf)(Y) = Σ_{X ⊆ Y} (-1)^{|Y \ X|} f(X)` by the sweep.
pub fn mobius(f: &SetFunction) -> SetFunction {
    let mut v = f.values.clone();
    for bit in 0..f.u {
        for y in 0..v.len() {
            if y >> bit & 1 == 1 {
                v[y] -= v[y ^ 1 << bit];
            }
        }
    }
    SetFunction { u: f.u, values: v }
}

pub fn zeta_naive(f: &SetFunction) -> SetFunction {
    let values = (0..1u32 << f.u).map(|y| submasks(y).map(|x| f.values[x as usize]).sum()).collect();
    SetFunction { u: f.u, values }
}

pub fn mobius_naive(f: &SetFunction) -> SetFunction {
    let values = (0..1u32 << f.u)
        .map(|y| {
            submasks(y)
                .map(|x| {
                    let sign = if (y & !x).count_ones() % 2 == 0 { 1 } else { -1 };
                    sign * f.values[x as usize]
                })
                .sum()
        })
        .collect();
    SetFunction { u: f.u, values }
}

fn same_universe(fs: &[SetFunction]) -> Result<usize> {
    let u = fs.first().map(|f| f.u).ok_or_else(|| Error::domain("cover product of no functions"))?;
    if fs.iter().any(|f| f.u != u) {
        return Err(Error::domain("functions live on different universes"));
    }
    Ok(u)
}

/// Pairwise cover product restricted to subsets of `within`: the result at
/// `Y ⊆ within` is `Σ_{A ∪ B = Y} f(A) g(B)`.
fn cover_pair(f: &[i128], g: &[i128], within: u32, out: &mut [i128]) {
    for y in submasks(within) {
        let mut acc = 0;
        for a in submasks(y) {
            let fa = f[a as usize];
            if fa == 0 {
                continue;
            }
            let rest = y & !a;
            for c in submasks(a) {
                acc += fa * g[(rest | c) as usize];
            }
        }
        out[y as usize] = acc;
    }
}

/// `(g_1 *_c ... *_c g_t)(target)` by enumerating covers.
pub fn cover_product(fs: &[SetFunction], target: usize) -> Result<i128> {
    let u = same_universe(fs)?;
    if target >= 1 << u {
        return Err(Error::domain(format!("target {target:#b} outside universe of size {u}")));
    }
    let mut acc = fs[0].values.clone();
    let mut next = vec![0; 1 << u];
    for g in &fs[1..] {
        cover_pair(&acc, &g.values, target as u32, &mut next);
        std::mem::swap(&mut acc, &mut next);
    }
    Ok(acc[target])
}

/// The full cover product as a set function.
pub fn cover_product_all(fs: &[SetFunction]) -> Result<SetFunction> {
    let u = same_universe(fs)?;
    let full = ((1u64 << u) - 1) as u32;
    let mut acc = fs[0].values.clone();
    let mut next = vec![0; 1 << u];
    for g in &fs[1..] {
        cover_pair(&acc, &g.values, full, &mut next);
        std::mem::swap(&mut acc, &mut next);
    }
    Ok(SetFunction { u, values: acc })
}
