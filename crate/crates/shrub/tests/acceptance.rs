//! Acceptance suite: one PASS/FAIL line per criterion, each computed against
//! an independent brute-force oracle.
//!
//! A criterion that cannot be met in full prints FAIL with the reason. The
//! test itself fails only on a wrong answer or a broken property.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shrub::domset_solver::{min_dominating_set, single_trial, trial_seed};
use shrub::engine::{Engine, EvalOptions, Problem};
use shrub::graph::LabeledGraph;
use shrub::hom_solver::{count_hom, hom_table, is_polynomial_via_hom, q_coloring_count, HomInstance, HomOptions, PatternGraph};
use shrub::is_solver::{is_polynomial, is_polynomial_with};
use shrub::lcsgen::{build_reduction, gadget_independence_checks, LcsInstance};
use shrub::maxcut_solver::{m_value, max_cut, power_sum, signatures, MaxCutOptions, MaxCutSolver};
use shrub::modmath::{crt_reconstruct_coefficient, is_prime_u64, next_prime_u64, PrimeField};
use shrub::oracle::{brute_count_hom, brute_hom_table, brute_is_polynomial, brute_max_cut, brute_min_domset, independence_number};
use shrub::settrans::{cover_product_all, mobius, zeta, SetFunction};
use shrub::tree_model::{families, random_model, LabelMatrix, NodeId, RandomModelSpec, TreeModel};

enum Status {
    Pass,
    /// A wrong answer or a broken property.
    Fail,
    /// Every check that ran agreed, but part of the criterion could not run.
    Unattainable(String),
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome { status: if ok { Status::Pass } else { Status::Fail }, detail }
    }
}

fn run(id: usize, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
        Outcome { status: Status::Fail, detail: format!("panicked: {msg}") }
    });
    let secs = start.elapsed().as_secs_f64();
    let (word, ok, extra) = match &outcome.status {
        Status::Pass => ("PASS", true, String::new()),
        Status::Fail => ("FAIL", false, String::new()),
        Status::Unattainable(why) => ("FAIL", true, format!("; not attainable: {why}")),
    };
    println!("criterion {id}: {word} ({}{extra}) [{secs:.1}s]", outcome.detail);
    ok
}

#[test]
fn acceptance() {
    let results = [
        run(1, is_correctness),
        run(2, crt_layer),
        run(3, transform_identities),
        run(4, hom_framework),
        run(5, max_cut_criterion),
        run(6, dominating_set),
        run(7, reduction),
        run(8, space_structure),
        run(9, gadget_observations),
    ];
    let broken: Vec<usize> = results.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| i + 1).collect();
    assert!(broken.is_empty(), "criteria with wrong answers: {broken:?}");
}

fn to_u64(v: &[BigUint]) -> Vec<u64> {
    v.iter().map(|x| x.to_u64().expect("fits")).collect()
}

/// `C_n` with one label per vertex at a single root.
fn cycle_model(n: usize) -> TreeModel {
    let mut mat = LabelMatrix::zero(n);
    for v in 0..n {
        let w = (v + 1) % n;
        if n > 2 || v == 0 {
            mat.set(v, w, true);
            mat.set(w, v, true);
        }
    }
    let mut m = TreeModel::new(n);
    let root = m.add_root(mat);
    for v in 0..n {
        m.add_leaf(root, (0..n).collect(), v, v);
    }
    m
}

fn random_models(seed: u64, count: usize, spec: impl Fn(usize, &mut ChaCha8Rng) -> RandomModelSpec) -> Vec<TreeModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let s = spec(i, &mut rng);
            random_model(&mut rng, s)
        })
        .collect()
}

fn is_correctness() -> Outcome {
    let mut corpus = random_models(101, 200, |_, rng| RandomModelSpec { n: rng.gen_range(1..=10), k: rng.gen_range(1..=3), d: rng.gen_range(1..=3), density: rng.gen_range(0.2..0.8) });
    for n in 1..=8 {
        corpus.push(families::complete(n));
        corpus.push(families::path(n));
        corpus.push(families::edgeless(n));
    }
    for n in 3..=8 {
        corpus.push(cycle_model(n));
    }
    for (a, b) in [(1, 1), (1, 3), (2, 2), (2, 3), (3, 4), (4, 4)] {
        corpus.push(families::complete_bipartite(a, b));
    }
    let mut bad = 0;
    for m in &corpus {
        let got = to_u64(&is_polynomial(m).expect("solver runs"));
        if got != brute_is_polynomial(&m.realize()).expect("oracle runs") {
            bad += 1;
        }
    }
    Outcome::check(bad == 0, format!("{} models, {bad} mismatches", corpus.len()))
}

fn crt_layer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut bad = 0;
    let mut coeffs_checked = 0;
    for _ in 0..100 {
        let n_prime = rng.gen_range(1..=24);
        let top = BigUint::from(1u32) << n_prime;
        let poly: Vec<BigUint> = (0..=n_prime).map(|_| rng.gen_biguint_below(&(&top + 1u32))).collect();
        for target in 0..=n_prime {
            let oracle = |p: u64, s: u64| {
                let big_p = BigUint::from(p);
                poly.iter().rev().fold(BigUint::zero(), |acc, c| (acc * s + c) % &big_p).to_u64().expect("reduced")
            };
            let got = crt_reconstruct_coefficient(oracle, n_prime, target).expect("reconstructs");
            coeffs_checked += 1;
            if got != poly[target] {
                bad += 1;
            }
        }
    }
    Outcome::check(bad == 0, format!("100 polynomials, {coeffs_checked} coefficients, {bad} mismatches"))
}

fn transform_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut failures = 0;
    for _ in 0..1000 {
        let u = rng.gen_range(0..=10);
        let t = rng.gen_range(1..=4);
        let gs: Vec<SetFunction> = (0..t).map(|_| SetFunction::new(u, (0..1 << u).map(|_| rng.gen_range(-4..=4)).collect()).unwrap()).collect();
        if gs.iter().any(|g| mobius(&zeta(g)) != *g) {
            failures += 1;
            continue;
        }
        let lhs = zeta(&cover_product_all(&gs).unwrap());
        let zs: Vec<SetFunction> = gs.iter().map(zeta).collect();
        let ok = (0..1usize << u).all(|x| lhs.get(x) == zs.iter().map(|z| z.get(x)).product::<i128>());
        if !ok {
            failures += 1;
        }
    }
    Outcome::check(failures == 0, format!("1000 function tuples, {failures} failures"))
}

fn hom_framework() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let fixed = [PatternGraph::independent_set(), PatternGraph::odd_cycle_transversal(), PatternGraph::clique(2), PatternGraph::clique(3)];
    let mut instances = 0;
    let mut bad = 0;
    let mut default_mode = 0;
    for i in 0..120 {
        let pattern = if i % 5 < 4 {
            fixed[i % 5].clone()
        } else {
            let m = rng.gen_range(1..=3);
            let edges: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).filter(|_| rng.gen_bool(0.5)).collect();
            let r: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.5)).collect();
            PatternGraph::new(m, &edges, &r).unwrap()
        };
        let states = pattern.tracked().len().max(1);
        let k = rng.gen_range(1..=if states > 1 { 2 } else { 3 });
        let spec = RandomModelSpec { n: rng.gen_range(1..=8), k, d: rng.gen_range(1..=3), density: 0.5 };
        let model = random_model(&mut rng, spec);
        let weights: Vec<u64> = (0..model.n()).map(|_| rng.gen_range(1..=3)).collect();
        let mut inst = HomInstance::new(model, pattern).with_weights(weights).unwrap();
        if i % 3 == 0 && inst.pattern.m() > 1 {
            let v = rng.gen_range(0..inst.lists.len());
            inst.lists[v].remove(rng.gen_range(0..inst.pattern.m()));
        }
        let g = inst.overlay_graph();
        let want = brute_hom_table(&g, &inst.pattern).unwrap();
        let got = hom_table(&inst, HomOptions::fast()).unwrap();
        instances += 1;
        if got.counts != want {
            bad += 1;
        }
        if inst.model.n() <= 5 {
            default_mode += 1;
            let (c, w) = want.keys().next().copied().unwrap_or((0, 0));
            if count_hom(&inst, c, w).unwrap() != brute_count_hom(&g, &inst.pattern, c, w).unwrap() {
                bad += 1;
            }
        }
    }
    let k3 = q_coloring_count(&families::complete(3), 3, HomOptions::default()).unwrap();
    let ok = bad == 0 && k3 == BigUint::from(6u32);
    Outcome::check(ok, format!("{instances} instances (tabled), {default_mode} also in default mode, {bad} mismatches; K3 3-colourings = {k3}"))
}

/// Best cut inside `V_b` among sides whose label counts at the parent are `s`.
fn brute_f_edge(m: &TreeModel, g: &LabeledGraph, b: NodeId, s: &[usize]) -> Option<i64> {
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
        if sig == s {
            let cut = g.edges().iter().filter(|&&(u, v)| verts.contains(&u) && verts.contains(&v) && side[u] != side[v]).count() as i64;
            best = Some(best.map_or(cut, |x: i64| x.max(cut)));
        }
    }
    best
}

/// A(s, B): child signature tuples summing to `s` whose inner values sum to
/// `B - m_a(s)`, by enumerating all tuples.
fn brute_a(m: &TreeModel, sv: &MaxCutSolver<'_>, a: NodeId, s: &[usize], budget: i64) -> u64 {
    let g = m.realize();
    let mat = m.matrix(a);
    let lists: Vec<Vec<(Vec<usize>, i64)>> = m
        .children(a)
        .iter()
        .map(|&b| {
            let es = sv.edge_sizes(b).to_vec();
            signatures(&es).filter_map(|sj| Some((sj.clone(), brute_f_edge(m, &g, b, &sj)? - m_value(&sj, mat, &es) as i64))).collect()
        })
        .collect();
    let target = budget - m_value(s, mat, sv.sizes(a)) as i64;
    let mut count = 0;
    let mut idx = vec![0; lists.len()];
    if lists.iter().any(Vec::is_empty) {
        return 0;
    }
    'outer: loop {
        let mut sum = vec![0; m.k()];
        let mut val = 0;
        for (j, &i) in idx.iter().enumerate() {
            for (x, y) in sum.iter_mut().zip(&lists[j][i].0) {
                *x += y;
            }
            val += lists[j][i].1;
        }
        if sum == s && val == target {
            count += 1;
        }
        for j in 0..idx.len() {
            idx[j] += 1;
            if idx[j] < lists[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        return count;
    }
}

fn max_cut_criterion() -> Outcome {
    let corpus = random_models(505, 100, |i, rng| RandomModelSpec { n: 2 + i % 11, k: rng.gen_range(1..=2), d: rng.gen_range(1..=3), density: rng.gen_range(0.3..0.8) });
    let mut bad_cut = 0;
    for m in &corpus {
        if max_cut(m).unwrap() as usize != brute_max_cut(&m.realize()).unwrap() {
            bad_cut += 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(506);
    let mut samples = 0;
    let mut bad_kane = 0;
    while samples < 60 {
        let spec = RandomModelSpec { n: rng.gen_range(2..=6), k: rng.gen_range(1..=2), d: rng.gen_range(1..=2), density: 0.5 };
        let m = random_model(&mut rng, spec);
        let internal: Vec<NodeId> = (0..m.nodes().len()).filter(|&a| !m.is_leaf(a) && m.children(a).len() <= 3).collect();
        if internal.is_empty() {
            continue;
        }
        let a = internal[rng.gen_range(0..internal.len())];
        let sv = MaxCutSolver::new(&m, MaxCutOptions::default()).unwrap();
        let s: Vec<usize> = sv.sizes(a).iter().map(|&c| rng.gen_range(0..=c)).collect();
        let budget = rng.gen_range(0..=2 * m.n() as i64);
        let want = brute_a(&m, &sv, a, &s, budget);
        let p = next_prime_u64(sv.primes()[0] + rng.gen_range(0..50));
        let f = PrimeField::new(p);
        if sv.kane_poly_eval(a, &s, budget, f).unwrap() != f.neg(want % p) {
            bad_kane += 1;
        }
        samples += 1;
    }

    let mut bad_char = 0;
    for p in (2u64..=200).filter(|&p| is_prime_u64(p)) {
        for l in 0..=3 * (p - 1) {
            let direct = (1..p).fold(0, |acc, x| (acc + PrimeField::new(p).pow(x, l)) % p);
            let want = if l % (p - 1) == 0 { p - 1 } else { 0 };
            if direct != want || power_sum(p, &BigInt::from(l)) != want {
                bad_char += 1;
            }
        }
    }
    let ok = bad_cut == 0 && bad_kane == 0 && bad_char == 0;
    Outcome::check(ok, format!("100 models with n <= 12: {bad_cut} mismatches; {samples} Kane samples: {bad_kane} mismatches; character sums for p <= 200: {bad_char} failures"))
}

fn dominating_set() -> Outcome {
    let corpus = random_models(606, 30, |i, rng| RandomModelSpec { n: 3 + i % 3, k: 1 + i % 2, d: rng.gen_range(1..=2), density: 0.5 });
    let mut unsound = 0;
    let mut wrong_final = 0;
    let mut worst_rate = 1.0f64;
    for (i, m) in corpus.iter().enumerate() {
        let truth = brute_min_domset(&m.realize()).unwrap();
        let mut hits = 0;
        for s in 0..100u64 {
            let got = single_trial(m, trial_seed(7_000 + i as u64, s as usize)).unwrap();
            if got < truth {
                unsound += 1;
            }
            hits += usize::from(got == truth);
        }
        worst_rate = worst_rate.min(hits as f64 / 100.0);
        let run = min_dominating_set(m, 20, 9_000 + i as u64).unwrap();
        if run.trials.iter().any(|&t| t < truth) {
            unsound += 1;
        }
        if run.answer != truth {
            wrong_final += 1;
        }
    }
    let ok = unsound == 0 && wrong_final == 0 && worst_rate >= 0.4;
    Outcome::check(ok, format!("30 models x 100 seeds: {unsound} unsound runs; 20-trial answers wrong on {wrong_final}; lowest single-trial success rate {worst_rate:.2}"))
}

/// Reduction instances with `N` in {2, 4}, `r` in {1, 2} and `t <= 3`.
fn lcs_corpus() -> Vec<LcsInstance> {
    let words = |n: usize, sigma: &[char]| -> Vec<String> {
        let mut out = vec![String::new()];
        for _ in 0..n {
            out = out.iter().flat_map(|w| sigma.iter().map(move |c| format!("{w}{c}"))).collect();
        }
        out
    };
    let mut out = Vec::new();
    for w in words(2, &['a', 'b']) {
        for t in 1..=2 {
            out.push(LcsInstance::new(t, "ab", &[&w]).unwrap());
        }
    }
    let pairs2 = words(2, &['a', 'b']);
    for x in &pairs2 {
        for y in &pairs2 {
            for t in 1..=2 {
                out.push(LcsInstance::new(t, "ab", &[x, y]).unwrap());
            }
        }
    }
    for w in words(4, &['a', 'b']) {
        for t in 1..=3 {
            out.push(LcsInstance::new(t, "ab", &[&w]).unwrap());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let four = words(4, &['a', 'b', 'c']);
    for i in 0..24 {
        let (x, y) = (&four[rng.gen_range(0..four.len())], &four[rng.gen_range(0..four.len())]);
        out.push(LcsInstance::new(1 + i % 3, "abc", &[x, y]).unwrap());
    }
    out
}

/// Whether the IS solver finds a set of size at least `goal`, or `None`
/// when the model is outside what the solver can run here.
fn solver_detects(m: &TreeModel, goal: usize, n: usize, t: usize) -> Option<bool> {
    if m.k() > shrub::engine::MAX_STATES {
        return None;
    }
    let coeffs = if t == 1 || m.k() <= 11 {
        is_polynomial_with(m, EvalOptions { memoize: true, ..EvalOptions::default() }).ok()?.coeffs
    } else if n <= 14 {
        is_polynomial_via_hom(m, HomOptions::fast()).ok()?
    } else {
        return None;
    };
    Some(coeffs.iter().skip(goal).any(|c| !c.is_zero()))
}

fn reduction() -> Outcome {
    let corpus = lcs_corpus();
    let mut wrong = 0;
    let mut structural = 0;
    let (mut ran, mut capped, mut skipped) = (0, 0, 0);
    for inst in &corpus {
        let out = build_reduction(inst).unwrap();
        if !out.structure_checks().is_empty() {
            structural += 1;
        }
        let lcs = inst.brute_force().unwrap();
        let alpha = independence_number(&out.graph) >= out.goal;
        if lcs != alpha {
            wrong += 1;
        }
        match solver_detects(&out.model, out.goal, out.graph.n(), inst.t) {
            Some(found) => {
                ran += 1;
                if found != lcs {
                    wrong += 1;
                }
            }
            None if out.model.k() > shrub::engine::MAX_STATES => capped += 1,
            None => skipped += 1,
        }
    }
    let detail = format!(
        "{} instances: {wrong} equivalence failures, {structural} structural failures; solver leg ran on {ran}, {capped} exceed the {}-state cap, {skipped} skipped for run time",
        corpus.len(),
        shrub::engine::MAX_STATES
    );
    let status = if wrong > 0 || structural > 0 {
        Status::Fail
    } else if capped + skipped > 0 {
        Status::Unattainable(format!("k = 14r log N - 3 reaches 25 and 53 labels; the solver leg covers {ran} of {}", corpus.len()))
    } else {
        Status::Pass
    };
    Outcome { status, detail }
}

fn space_structure() -> Outcome {
    let corpus = random_models(808, 40, |i, rng| RandomModelSpec { n: 2 + i % 8, k: 1 + i % 3, d: rng.gen_range(1..=3), density: 0.5 });
    let off = EvalOptions { memoize: false, ..EvalOptions::default() };
    let mut violations = 0;
    let mut worst = (0, 0);
    for m in &corpus {
        let bound = Engine::new(m, Problem::independent_set(m.n())).unwrap().frame_bound();
        let run = is_polynomial_with(m, off).unwrap();
        let s = run.stats;
        if s.memo_entries != 0 || s.max_frames > bound || s.max_frame_residues > m.k() + 1 {
            violations += 1;
        }
        worst = (worst.0.max(s.max_frames), worst.1.max(bound));
        if m.n() <= 6 && m.k() <= 2 {
            let inst = HomInstance::new(m.clone(), PatternGraph::odd_cycle_transversal());
            let u = inst.pattern.tracked().len() * m.k();
            let hom_bound = (u + 4) * (m.depth() + 1);
            let table = hom_table(&inst, HomOptions { eval: off, ..HomOptions::default() }).unwrap();
            let s = table.stats;
            if s.memo_entries != 0 || s.max_frames > hom_bound || s.max_frame_residues > u + 1 {
                violations += 1;
            }
        }
    }
    Outcome::check(violations == 0, format!("40 models, IS and OCT runs without memoization: {violations} violations; largest frame count {} against bound {}", worst.0, worst.1))
}

fn gadget_observations() -> Outcome {
    let corpus = lcs_corpus();
    let mut failures = 0;
    let mut gadgets = 0;
    for inst in &corpus {
        let out = build_reduction(inst).unwrap();
        gadgets += inst.r() * (inst.t - 1) + (inst.r() - 1) * inst.t;
        failures += gadget_independence_checks(&out).unwrap().len();
    }
    Outcome::check(failures == 0, format!("{} instances, {gadgets} gadgets: {failures} failed checks", corpus.len()))
}
