//! Prime fields, primality, prime search and Chinese-remainder reconstruction
//! of integer polynomial coefficients from evaluations.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Arithmetic modulo a word-sized prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        debug_assert!(is_prime_u64(p), "{p} is not prime");
        PrimeField { p }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.p <= u32::MAX as u64 {
            a * b % self.p
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero residue.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a % self.p != 0, "zero has no inverse");
        self.pow(a, self.p - 2)
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

const SMALL_PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin; the first twelve primes are a complete witness set below 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &SMALL_PRIMES {
        if n % q == 0 {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primality for arbitrary precision: exact below 2^64, otherwise trial
/// division followed by 64 Miller-Rabin rounds (error below 2^-128).
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(x) = n.to_u64() {
        return is_prime_u64(x);
    }
    for q in 2u32..1000 {
        if (n % q).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_4a11);
    let two = BigUint::from(2u32);
    'witness: for _ in 0..64 {
        let a = rng.gen_biguint_range(&two, &n1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn next_prime_u64(x: u64) -> u64 {
    let mut c = x + 1;
    while !is_prime_u64(c) {
        c += 1;
    }
    c
}

/// Smallest prime strictly greater than `x`.
pub fn next_prime(x: &BigUint) -> BigUint {
    if let Some(v) = x.to_u64() {
        if v < u64::MAX - 1000 {
            return BigUint::from(next_prime_u64(v));
        }
    }
    let mut c = x + 1u32;
    if c.is_even() && c > BigUint::from(2u32) {
        c += 1u32;
    }
    while !is_prime(&c) {
        c += 2u32;
    }
    c
}

/// `base^exp` in the field; negative exponents use the inverse. `0^0 = 1`.
pub fn mod_pow(base: u64, exp: &BigInt, fld: PrimeField) -> u64 {
    let base = fld.reduce(base);
    if base == 0 {
        assert!(exp.sign() != num_bigint::Sign::Minus, "negative power of zero");
        return if exp.is_zero() { 1 } else { 0 };
    }
    let order = BigInt::from(fld.p() - 1);
    let e = exp.mod_floor(&order).to_u64().expect("reduced exponent fits");
    fld.pow(base, e)
}

/// Coefficient of `x^target` of the unique polynomial of degree `< p`
/// through `(s, evals[s])` for all `s` in F_p.
pub fn interpolate_coeff_mod_p(evals: &[u64], target: usize, fld: PrimeField) -> Result<u64> {
    let p = fld.p() as usize;
    if evals.len() != p {
        return Err(Error::domain(format!("expected {p} evaluations, got {}", evals.len())));
    }
    if target >= p {
        return Err(Error::domain(format!("target degree {target} is not below p = {p}")));
    }
    if target == 0 {
        return Ok(fld.reduce(evals[0]));
    }
    let mut sum = 0;
    for (s, &f) in evals.iter().enumerate().skip(1) {
        let e = if target == p - 1 { 0 } else { (p - 1 - target) as u64 };
        sum = fld.add(sum, fld.mul(fld.reduce(f), fld.pow(s as u64, e)));
    }
    let c = fld.neg(sum);
    Ok(if target == p - 1 { fld.sub(c, fld.reduce(evals[0])) } else { c })
}

/// All `p` coefficients of the interpolating polynomial, in O(p^2).
pub fn interpolate_all_mod_p(evals: &[u64], fld: PrimeField) -> Vec<u64> {
    let p = fld.p() as usize;
    assert_eq!(evals.len(), p);
    let mut coeffs = vec![0; p];
    coeffs[0] = fld.reduce(evals[0]);
    if p == 1 {
        return coeffs;
    }
    let f: Vec<u64> = evals.iter().map(|&x| fld.reduce(x)).collect();
    let inv: Vec<u64> = (0..p as u64).map(|s| if s == 0 { 0 } else { fld.inv(s) }).collect();
    // pw[s] = s^{-j} while computing c_j.
    let mut pw: Vec<u64> = vec![1; p];
    let total: u64 = f[1..].iter().fold(0, |a, &x| fld.add(a, x));
    for (j, slot) in coeffs.iter_mut().enumerate().take(p - 1).skip(1) {
        let _ = j;
        let mut sum = 0;
        for s in 1..p {
            pw[s] = fld.mul(pw[s], inv[s]);
            sum = fld.add(sum, fld.mul(f[s], pw[s]));
        }
        *slot = fld.neg(sum);
    }
    coeffs[p - 1] = fld.sub(fld.neg(total), coeffs[0]);
    coeffs
}

/// Primes for reconstructing coefficients of a polynomial of degree at most
/// `degree` whose coefficients lie in `[0, magnitude]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtPlan {
    pub degree: usize,
    pub primes: Vec<u64>,
}

impl CrtPlan {
    /// Ascending primes above `degree` until their product exceeds `magnitude`.
    pub fn new(degree: usize, magnitude: &BigUint) -> Self {
        let mut primes = Vec::new();
        let mut product = BigUint::one();
        let mut p = degree as u64;
        while product <= *magnitude {
            p = next_prime_u64(p);
            product *= p;
            primes.push(p);
        }
        CrtPlan { degree, primes }
    }

    /// The schedule for degree and magnitude bound `n'` and `2^{n'}`: primes
    /// above `n'` until the product exceeds `2^{n'}`. These stay within
    /// `2n'+2` for every `n'` except 13, which needs 29.
    pub fn for_exponent_bound(n_prime: usize) -> Result<Self> {
        let plan = CrtPlan::new(n_prime, &(BigUint::one() << n_prime));
        if plan.primes.is_empty() {
            return Err(Error::domain("internal: empty prime schedule"));
        }
        Ok(plan)
    }

    pub fn modulus(&self) -> BigUint {
        self.primes.iter().fold(BigUint::one(), |acc, &p| acc * p)
    }

    /// Reconstructs coefficients `0..=degree` from full evaluation tables.
    /// `evaluate(p)` must return the polynomial's values at every `s` in F_p.
    pub fn reconstruct<F>(&self, mut evaluate: F) -> Vec<BigUint>
    where
        F: FnMut(PrimeField) -> Vec<u64>,
    {
        let mut residues: Vec<Vec<u64>> = Vec::with_capacity(self.primes.len());
        for &p in &self.primes {
            let fld = PrimeField::new(p);
            let evals = evaluate(fld);
            let mut all = interpolate_all_mod_p(&evals, fld);
            all.truncate(self.degree + 1);
            residues.push(all);
        }
        (0..=self.degree).map(|j| crt_combine(&self.primes, &residues.iter().map(|r| r[j]).collect::<Vec<_>>())).collect()
    }
}

/// The unique `x` in `[0, Π p_i)` with `x ≡ r_i (mod p_i)`.
pub fn crt_combine(primes: &[u64], residues: &[u64]) -> BigUint {
    let mut x = BigUint::zero();
    let mut m = BigUint::one();
    for (&p, &r) in primes.iter().zip(residues) {
        let fld = PrimeField::new(p);
        let xm = (&x % p).to_u64().expect("small");
        let mm = (&m % p).to_u64().expect("small");
        let t = fld.mul(fld.sub(r % p, xm), fld.inv(mm));
        x += &m * t;
        m *= p;
    }
    x
}

/// Exact coefficient at `target` of a polynomial of degree at most `n'` with
/// coefficients in `[0, 2^{n'}]`, given an evaluation oracle `(p, s) -> value mod p`.
pub fn crt_reconstruct_coefficient<F>(oracle: F, n_prime: usize, target: usize) -> Result<BigUint>
where
    F: Fn(u64, u64) -> u64,
{
    if target > n_prime {
        return Err(Error::domain(format!("target {target} exceeds degree bound {n_prime}")));
    }
    let plan = CrtPlan::for_exponent_bound(n_prime)?;
    let mut residues = Vec::with_capacity(plan.primes.len());
    for &p in &plan.primes {
        let fld = PrimeField::new(p);
        let evals: Vec<u64> = (0..p).map(|s| oracle(p, s) % p).collect();
        residues.push(interpolate_coeff_mod_p(&evals, target, fld)?);
    }
    Ok(crt_combine(&plan.primes, &residues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn next_prime_examples() {
        let np = |x: u64| next_prime(&BigUint::from(x)).to_u64().unwrap();
        assert_eq!(np(1), 2);
        assert_eq!(np(10), 11);
        assert_eq!(np(13), 17);
    }

    #[test]
    fn next_prime_has_no_gap_primes() {
        let mut x = 1u64;
        while x < 20_000 {
            let p = next_prime_u64(x);
            assert!(trial_division(p));
            assert!((x + 1..p).all(|y| !trial_division(y)));
            x = p;
        }
        for n in 0..5000 {
            assert_eq!(is_prime_u64(n), trial_division(n), "{n}");
        }
    }

    #[test]
    fn big_primality() {
        let m61 = (BigUint::one() << 61) - 1u32;
        assert!(is_prime(&m61));
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(is_prime(&m127));
        assert!(!is_prime(&(&m127 * &m61)));
        let np = next_prime(&(BigUint::one() << 80));
        assert!(is_prime(&np));
        assert_eq!(np, (BigUint::one() << 80) + 13u32);
    }

    #[test]
    fn mod_pow_examples() {
        let f = PrimeField::new(1_000_003);
        assert_eq!(mod_pow(2, &BigInt::from(10), f), 1024);
        let f7 = PrimeField::new(7);
        assert_eq!(mod_pow(3, &BigInt::from(6), f7), 1);
        assert_eq!(mod_pow(0, &BigInt::from(5), f7), 0);
        assert_eq!(mod_pow(0, &BigInt::from(0), f7), 1);
        assert_eq!(mod_pow(3, &BigInt::from(-1), f7), 5);
    }

    #[test]
    fn interpolation_examples() {
        let f = PrimeField::new(5);
        assert_eq!(interpolate_coeff_mod_p(&[0, 1, 4, 4, 1], 2, f).unwrap(), 1);
        assert_eq!(interpolate_coeff_mod_p(&[3; 5], 0, f).unwrap(), 3);
        assert_eq!(interpolate_coeff_mod_p(&[3; 5], 1, f).unwrap(), 0);
        assert!(interpolate_coeff_mod_p(&[3; 5], 5, f).is_err());
    }

    #[test]
    fn crt_examples() {
        let r = crt_reconstruct_coefficient(|p, s| (1 + 2 * s) % p, 2, 1).unwrap();
        assert_eq!(r, BigUint::from(2u32));
        let r = crt_reconstruct_coefficient(|p, s| (3 + s) % p, 4, 0).unwrap();
        assert_eq!(r, BigUint::from(3u32));
        let r = crt_reconstruct_coefficient(|p, s| (1 + 3 * s + s * s) % p, 3, 2).unwrap();
        assert_eq!(r, BigUint::one());
    }

    #[test]
    fn exponent_bound_primes_always_suffice() {
        for n in 1..2000 {
            let plan = CrtPlan::for_exponent_bound(n).unwrap();
            assert!(plan.modulus() > BigUint::one() << n);
            let limit = if n == 13 { 29 } else { 2 * n as u64 + 2 };
            assert!(plan.primes.iter().all(|&p| p > n as u64 && p <= limit), "n' = {n}: {:?}", plan.primes);
        }
    }

    fn horner(coeffs: &[u64], s: u64, p: u64) -> u64 {
        coeffs.iter().rev().fold(0u64, |acc, &c| ((acc as u128 * s as u128 + c as u128) % p as u128) as u64)
    }

    proptest! {
        #[test]
        fn pow_adds_exponents(a in 1u64..1_000_003, e1 in -10_000i64..10_000, e2 in -10_000i64..10_000) {
            let f = PrimeField::new(1_000_003);
            let lhs = mod_pow(a, &BigInt::from(e1 + e2), f);
            let rhs = f.mul(mod_pow(a, &BigInt::from(e1), f), mod_pow(a, &BigInt::from(e2), f));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn interpolate_all_matches_single(p_idx in 0usize..6, seed in any::<u64>()) {
            let p = [2u64, 3, 5, 7, 11, 13][p_idx];
            let f = PrimeField::new(p);
            let evals: Vec<u64> = (0..p).map(|s| (seed.wrapping_mul(s + 7) >> 7) % p).collect();
            let all = interpolate_all_mod_p(&evals, f);
            for (j, &c) in all.iter().enumerate() {
                prop_assert_eq!(c, interpolate_coeff_mod_p(&evals, j, f).unwrap());
            }
            for s in 0..p {
                prop_assert_eq!(horner(&all, s, p), evals[s as usize]);
            }
        }

        #[test]
        fn crt_round_trip(ns in 1usize..=24, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bound = 1u64 << ns;
            let coeffs: Vec<u64> = (0..=ns).map(|_| rand::Rng::gen_range(&mut rng, 0..=bound)).collect();
            let plan = CrtPlan::for_exponent_bound(ns).unwrap();
            let got = plan.reconstruct(|f| (0..f.p()).map(|s| horner(&coeffs, s, f.p())).collect());
            let want: Vec<BigUint> = coeffs.iter().map(|&c| BigUint::from(c)).collect();
            prop_assert_eq!(got, want);
        }
    }
}
