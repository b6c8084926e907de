//! Prime-characteristic combinatorics: field parameters, bounded
//! multi-indices and binomial coefficients (Lucas and exact).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Characteristic `p` together with the height vector `m`; `n = m.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    p: u64,
    m: Vec<u32>,
}

impl FieldParams {
    pub fn new(p: u64, m: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParams(format!("p = {p} is not prime")));
        }
        if m.is_empty() {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        for &mi in &m {
            if mi == 0 {
                return Err(Error::InvalidParams("every m_i must be positive".into()));
            }
            let fits = p.checked_pow(mi).is_some_and(|q| q <= u32::MAX as u64 + 1);
            if !fits {
                return Err(Error::InvalidParams(format!("p^{mi} does not fit a 32-bit index")));
            }
        }
        Ok(FieldParams { p, m })
    }

    /// `m = (1, …, 1)` with `n` entries.
    pub fn uniform(p: u64, n: usize) -> Result<Self> {
        Self::new(p, vec![1; n])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn m(&self) -> &[u32] {
        &self.m
    }

    /// Largest admissible exponent on axis `i`, i.e. `p^{m_i} - 1`.
    pub fn bound(&self, i: usize) -> u32 {
        (self.p.pow(self.m[i]) - 1) as u32
    }

    /// `δ = (p^{m_1} - 1, …, p^{m_n} - 1)`.
    pub fn delta(&self) -> MultiIndex {
        MultiIndex::new((0..self.n()).map(|i| self.bound(i)))
    }

    /// Number of divided-power monomials, `p^{Σ m_i}`.
    pub fn dp_dim(&self) -> usize {
        (0..self.n()).map(|i| self.bound(i) as usize + 1).product()
    }
}

impl fmt::Display for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.m.iter().map(|x| x.to_string()).collect();
        write!(f, "p={}, n={}, m=({})", self.p, self.n(), m.join(","))
    }
}

/// Exponent vector `α ∈ ℤ₊ⁿ`. Ordered graded-lexicographically: first by
/// `|α|`, then lexicographically on the entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn new<I: IntoIterator<Item = u32>>(entries: I) -> Self {
        MultiIndex(entries.into_iter().collect())
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    /// `ε_i`, zero-based axis.
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut e = Self::zero(n);
        e.0[axis] = 1;
        e
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// `|α|`
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Componentwise sum, or `None` when some entry exceeds `bound`
    /// (the product then vanishes in the truncated algebra).
    pub fn add_bounded(&self, other: &MultiIndex, bound: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        let mut out = SmallVec::with_capacity(self.len());
        for ((&a, &b), &d) in self.0.iter().zip(&other.0).zip(&bound.0) {
            let s = a + b;
            if s > d {
                return None;
            }
            out.push(s);
        }
        Some(MultiIndex(out))
    }

    /// Componentwise difference, or `None` on underflow.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        let mut out = SmallVec::with_capacity(self.len());
        for (&a, &b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(b)?);
        }
        Some(MultiIndex(out))
    }

    /// `α - ε_axis`, or `None` if `α_axis = 0`.
    pub fn dec(&self, axis: usize) -> Option<MultiIndex> {
        let mut out = self.clone();
        out.0[axis] = out.0[axis].checked_sub(1)?;
        Some(out)
    }

    /// `α + ε_axis` if it stays below `bound`.
    pub fn inc(&self, axis: usize, bound: &MultiIndex) -> Option<MultiIndex> {
        let mut out = self.clone();
        out.0[axis] += 1;
        (out.0[axis] <= bound.0[axis]).then_some(out)
    }

    /// Componentwise `α ≤ β`.
    pub fn le_componentwise(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// All `β ≤ self`, in graded-lex order.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.len())];
        for axis in 0..self.len() {
            let mut next = Vec::with_capacity(out.len() * (self.0[axis] as usize + 1));
            for base in &out {
                for k in 0..=self.0[axis] {
                    let mut b = base.clone();
                    b.0[axis] = k;
                    next.push(b);
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo the prime `p` (Fermat).
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p), "zero has no inverse");
    pow_mod(a, p - 2, p)
}

/// `C(a, b)` for single base-`p` digits, `a, b < p`.
fn binom_digit(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut num = 1u64;
    let mut den = 1u64;
    for k in 0..b {
        num = mul_mod(num, a - k, p);
        den = mul_mod(den, k + 1, p);
    }
    mul_mod(num, inv_mod(den, p), p)
}

/// `C(a, b) mod p` by Lucas' theorem: product of digitwise binomials in base `p`.
pub fn binom_lucas(mut a: u64, mut b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let mut acc = 1 % p;
    while b > 0 || a > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return 0;
        }
        acc = mul_mod(acc, binom_digit(ad, bd, p), p);
        a /= p;
        b /= p;
    }
    acc
}

/// `C(α, β) = Π C(α_i, β_i) mod p`.
pub fn multi_binom(alpha: &MultiIndex, beta: &MultiIndex, p: u64) -> u64 {
    debug_assert_eq!(alpha.len(), beta.len());
    let mut acc = 1 % p;
    for (&a, &b) in alpha.entries().iter().zip(beta.entries()) {
        acc = mul_mod(acc, binom_lucas(a as u64, b as u64, p), p);
        if acc == 0 {
            break;
        }
    }
    acc
}

/// Exact `C(a, b)` over the integers.
pub fn binom_exact(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::default();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for k in 0..b {
        acc *= a - k;
        acc /= k + 1;
    }
    acc
}

/// `a! mod p`.
pub fn factorial_mod(a: u64, p: u64) -> u64 {
    (1..=a).fold(1 % p, |acc, k| mul_mod(acc, k, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom_factorial_oracle(a: u64, b: u64, p: u64) -> u64 {
        // independent route: exact factorial quotient, then reduce
        if b > a {
            return 0;
        }
        let fact = |k: u64| (1..=k).fold(BigUint::one(), |acc, x| acc * x);
        let c = fact(a) / (fact(b) * fact(a - b));
        (c % p).try_into().unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(FieldParams::new(3, vec![1, 1]).unwrap().delta().entries(), &[2, 2]);
        assert_eq!(FieldParams::new(5, vec![1, 1]).unwrap().delta().entries(), &[4, 4]);
        assert_eq!(FieldParams::new(3, vec![2]).unwrap().delta().entries(), &[8]);
    }

    #[test]
    fn params_validation() {
        assert!(FieldParams::new(4, vec![1]).is_err());
        assert!(FieldParams::new(3, vec![]).is_err());
        assert!(FieldParams::new(3, vec![1, 0]).is_err());
        assert!(FieldParams::new(2, vec![40]).is_err());
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(binom_lucas(2, 1, 3), 2);
        assert_eq!(binom_lucas(4, 2, 5), 1);
        assert_eq!(binom_lucas(3, 1, 3), 0);
        assert_eq!(binom_lucas(1, 2, 3), 0);
    }

    #[test]
    fn lucas_matches_factorials_exhaustively() {
        for p in [2u64, 3, 5, 7] {
            for a in 0..=200u64 {
                for b in 0..=a {
                    assert_eq!(binom_lucas(a, b, p), binom_factorial_oracle(a, b, p), "C({a},{b}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn multi_binom_examples() {
        let mi = |v: &[u32]| MultiIndex::new(v.iter().copied());
        assert_eq!(multi_binom(&mi(&[2, 1]), &mi(&[1, 1]), 3), 2);
        assert_eq!(multi_binom(&mi(&[3, 4]), &mi(&[0, 0]), 7), 1);
        assert_eq!(multi_binom(&mi(&[2, 2]), &mi(&[1, 0]), 3), 2);
    }

    #[test]
    fn binom_of_delta_is_alternating_sign() {
        for p in [3u64, 5] {
            let params = FieldParams::uniform(p, 2).unwrap();
            let delta = params.delta();
            for alpha in delta.lower_set() {
                let expected = if alpha.degree() % 2 == 0 { 1 } else { p - 1 };
                assert_eq!(multi_binom(&delta, &alpha, p), expected, "alpha = {alpha}");
            }
        }
    }

    #[test]
    fn multi_index_arithmetic() {
        let mi = |v: &[u32]| MultiIndex::new(v.iter().copied());
        let delta = mi(&[2, 2]);
        assert_eq!(mi(&[1, 0]).add_bounded(&mi(&[1, 1]), &delta), Some(mi(&[2, 1])));
        assert_eq!(mi(&[2, 0]).add_bounded(&mi(&[1, 0]), &delta), None);
        assert_eq!(mi(&[2, 1]).checked_sub(&mi(&[0, 1])), Some(mi(&[2, 0])));
        assert_eq!(mi(&[0, 1]).checked_sub(&mi(&[1, 0])), None);
        assert!(mi(&[1, 1]).le_componentwise(&delta));
        assert!(!mi(&[3, 0]).le_componentwise(&delta));
    }

    #[test]
    fn graded_lex_order() {
        let mi = |v: &[u32]| MultiIndex::new(v.iter().copied());
        let mut v = vec![mi(&[2, 0]), mi(&[0, 0]), mi(&[1, 1]), mi(&[0, 1]), mi(&[1, 0])];
        v.sort();
        assert_eq!(v, vec![mi(&[0, 0]), mi(&[0, 1]), mi(&[1, 0]), mi(&[1, 1]), mi(&[2, 0])]);
        assert_eq!(mi(&[2, 2]).lower_set().len(), 9);
    }

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&k| is_prime(k)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    proptest! {
        #[test]
        fn multi_binom_symmetric(a in proptest::collection::vec(0u32..25, 3), b in proptest::collection::vec(0u32..25, 3), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
            let alpha = MultiIndex::new(a.iter().copied());
            let beta = MultiIndex::new(a.iter().zip(&b).map(|(&x, &y)| y.min(x)));
            let rest = alpha.checked_sub(&beta).unwrap();
            prop_assert_eq!(multi_binom(&alpha, &beta, p), multi_binom(&alpha, &rest, p));
        }

        #[test]
        fn exact_binomial_reduces_to_lucas(a in 0u64..300, b in 0u64..300, p in prop::sample::select(vec![3u64, 5, 7, 11])) {
            let exact: u64 = (binom_exact(a, b) % p).try_into().unwrap();
            prop_assert_eq!(exact, binom_lucas(a, b, p));
        }
    }
}
