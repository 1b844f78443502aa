//! Independent set polynomial from a tree-model, by pointwise evaluation in
//! prime fields and Chinese remaindering.

use num_bigint::BigUint;

use crate::engine::{ChainMode, Engine, EvalOptions, EvalStats, Problem};
use crate::error::{Error, Result};
use crate::modmath::{crt_reconstruct_coefficient, CrtPlan, PrimeField};
use crate::tree_model::{NodeId, TreeModel};

/// Result of a full polynomial computation.
#[derive(Debug, Clone)]
pub struct IsRun {
    /// `coeffs[p]` = number of independent sets of size `p`.
    pub coeffs: Vec<BigUint>,
    pub primes: Vec<u64>,
    pub stats: EvalStats,
}

fn engine(m: &TreeModel) -> Result<Engine<'_>> {
    if m.k() > crate::engine::MAX_STATES {
        return Err(Error::capability(format!("k = {} exceeds the bitmask width {}", m.k(), crate::engine::MAX_STATES)));
    }
    Engine::new(m, Problem::independent_set(m.n()))
}

/// The independent set polynomial with default options.
pub fn is_polynomial(m: &TreeModel) -> Result<Vec<BigUint>> {
    Ok(is_polynomial_with(m, EvalOptions::default())?.coeffs)
}

pub fn is_polynomial_with(m: &TreeModel, opts: EvalOptions) -> Result<IsRun> {
    let eng = engine(m)?;
    let n = m.n();
    let plan = CrtPlan::for_exponent_bound(n)?;
    let mut stats = EvalStats::default();
    let coeffs = plan.reconstruct(|fld| {
        (0..fld.p())
            .map(|s| {
                let ev = eng.evaluator(fld, s, 1, opts);
                let v = ev.root_total();
                stats.absorb(&ev.stats());
                v
            })
            .collect()
    });
    Ok(IsRun { coeffs, primes: plan.primes, stats })
}

/// A single coefficient `q_target`, reconstructed through the oracle interface.
pub fn is_coefficient(m: &TreeModel, target: usize, opts: EvalOptions) -> Result<BigUint> {
    let eng = engine(m)?;
    crt_reconstruct_coefficient(|p, s| eng.evaluator(PrimeField::new(p), s, 1, opts).root_total(), m.n(), target)
}

/// Σ_S IS(root, S) at `x = s`.
pub fn eval_root(m: &TreeModel, s: u64, fld: PrimeField, opts: EvalOptions) -> Result<u64> {
    Ok(engine(m)?.evaluator(fld, s, 1, opts).root_total())
}

/// IS(a, S) at `x = s`; `labels` is a bitmask over `[k]`.
pub fn eval_is(m: &TreeModel, a: NodeId, labels: u32, s: u64, fld: PrimeField) -> Result<u64> {
    Ok(engine(m)?.evaluator(fld, s, 1, EvalOptions::default()).is(a, labels))
}

/// T(a, S, α, c, γ) with α given by its 2_≥ set and γ by the 1_= part of the
/// first `c` elements of that set (ascending label order).
pub fn eval_t_chain(m: &TreeModel, a: NodeId, labels: u32, alpha_geq2: u32, c: usize, gamma_eq: u32, s: u64, fld: PrimeField) -> Result<u64> {
    if alpha_geq2 & !labels != 0 || c > alpha_geq2.count_ones() as usize {
        return Err(Error::domain("α must live on S and c must not exceed |α^{-1}(2_≥)|"));
    }
    let eng = engine(m)?;
    if m.is_leaf(a) {
        return Err(Error::domain("the chain is defined at internal nodes"));
    }
    let opts = EvalOptions { chain: ChainMode::InclusionExclusion, memoize: false };
    Ok(eng.evaluator(fld, s, 1, opts).t_chain(a, labels, alpha_geq2, c, gamma_eq))
}

/// TIS(a, S, β) with β given by its 1_= set.
pub fn eval_tis(m: &TreeModel, a: NodeId, labels: u32, beta_eq: u32, s: u64, fld: PrimeField) -> Result<u64> {
    let eng = engine(m)?;
    if m.is_leaf(a) {
        return Err(Error::domain("TIS is defined at internal nodes"));
    }
    if eng.constrained(a, labels) & !beta_eq & labels != 0 {
        return Err(Error::domain("β is not conflict-free"));
    }
    Ok(eng.evaluator(fld, s, 1, EvalOptions::default()).tis(a, labels, beta_eq))
}

/// PIS(b, S) for a non-root node.
pub fn eval_pis(m: &TreeModel, b: NodeId, labels: u32, s: u64, fld: PrimeField) -> Result<u64> {
    if m.parent(b).is_none() {
        return Err(Error::domain("PIS is defined for non-root nodes"));
    }
    Ok(engine(m)?.evaluator(fld, s, 1, EvalOptions::default()).pis(b, labels))
}

/// Components of the auxiliary graph on `beta_eq` at `a`, as label bitmasks.
pub fn components_of_f(m: &TreeModel, a: NodeId, beta_eq: u32) -> Result<Vec<u32>> {
    Ok(engine(m)?.components(a, beta_eq))
}
