//! The truncated divided power algebra `K_n(m)`.
//!
//! Monomials `x^(α)`, `α ≤ δ`, multiply by
//! `x^(α) x^(β) = C(α+β, α) x^(α+β)` and vanish once an exponent passes `δ`.
//! The special derivations act by `∂_i x^(α) = x^(α - ε_i)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::arith::{FieldParams, MultiIndex};
use crate::error::{Error, Result};
use crate::ring::{Integers, PrimeField, Ring};

/// All `α ≤ δ` in graded-lex order; this is the canonical order used
/// throughout the crate.
pub fn dp_basis(params: &FieldParams) -> Vec<MultiIndex> {
    params.delta().lower_set()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpPolynomial<R: Ring> {
    params: Arc<FieldParams>,
    ring: R,
    terms: BTreeMap<MultiIndex, R::Elem>,
}

impl<R: Ring> DpPolynomial<R> {
    pub fn zero(params: &Arc<FieldParams>, ring: &R) -> Self {
        DpPolynomial { params: params.clone(), ring: ring.clone(), terms: BTreeMap::new() }
    }

    /// `c · x^(α)`; errors if `α` is not below `δ`.
    pub fn monomial(params: &Arc<FieldParams>, ring: &R, alpha: MultiIndex, coeff: R::Elem) -> Result<Self> {
        if alpha.len() != params.n() || !alpha.le_componentwise(&params.delta()) {
            return Err(Error::InvalidParams(format!("multi-index {alpha} outside 0..=delta")));
        }
        let mut f = Self::zero(params, ring);
        if !ring.is_zero(&coeff) {
            f.terms.insert(alpha, coeff);
        }
        Ok(f)
    }

    pub fn one(params: &Arc<FieldParams>, ring: &R) -> Self {
        Self::monomial(params, ring, MultiIndex::zero(params.n()), ring.one()).expect("zero index is valid")
    }

    pub fn params(&self) -> &Arc<FieldParams> {
        &self.params
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (graded-lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &R::Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> R::Elem {
        self.terms.get(alpha).cloned().unwrap_or_else(|| self.ring.zero())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.params != other.params || self.ring != other.ring {
            return Err(Error::ParamMismatch);
        }
        Ok(())
    }

    fn accumulate(&mut self, alpha: MultiIndex, c: R::Elem) {
        if self.ring.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&alpha) {
            Some(acc) => {
                self.ring.add_assign(acc, &c);
                if self.ring.is_zero(acc) {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.accumulate(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.ring.neg(&self.ring.one()))
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let mut out = Self::zero(&self.params, &self.ring);
        for (a, x) in &self.terms {
            out.accumulate(a.clone(), self.ring.mul(x, c));
        }
        out
    }

    /// Divided-power product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let delta = self.params.delta();
        let mut out = Self::zero(&self.params, &self.ring);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let Some(sum) = a.add_bounded(b, &delta) else { continue };
                let mut c = self.ring.mul(x, y);
                for (&s, &ai) in sum.entries().iter().zip(a.entries()) {
                    if self.ring.is_zero(&c) {
                        break;
                    }
                    c = self.ring.mul(&c, &self.ring.binomial(s as u64, ai as u64));
                }
                out.accumulate(sum, c);
            }
        }
        Ok(out)
    }

    /// `∂_axis` with zero-based `axis`.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        if axis >= self.params.n() {
            return Err(Error::AxisOutOfRange { axis, n: self.params.n() });
        }
        let mut out = Self::zero(&self.params, &self.ring);
        for (a, c) in &self.terms {
            if let Some(b) = a.dec(axis) {
                out.accumulate(b, c.clone());
            }
        }
        Ok(out)
    }

    /// Maps every coefficient through `f` into another ring.
    pub fn map_ring<S: Ring>(&self, ring: &S, f: impl Fn(&R::Elem) -> S::Elem) -> DpPolynomial<S> {
        let mut out = DpPolynomial::zero(&self.params, ring);
        for (a, c) in &self.terms {
            out.accumulate(a.clone(), f(c));
        }
        out
    }
}

impl DpPolynomial<Integers> {
    pub fn reduce(&self, field: &PrimeField) -> DpPolynomial<PrimeField> {
        self.map_ring(field, |c| field.from_bigint(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup(p: u64) -> (Arc<FieldParams>, PrimeField) {
        (Arc::new(FieldParams::uniform(p, 2).unwrap()), PrimeField::new(p).unwrap())
    }

    fn x(params: &Arc<FieldParams>, f: &PrimeField, a: u32, b: u32) -> DpPolynomial<PrimeField> {
        DpPolynomial::monomial(params, f, MultiIndex::new([a, b]), 1).unwrap()
    }

    #[test]
    fn product_examples() {
        let (params, f) = setup(3);
        let prod = x(&params, &f, 1, 0).mul(&x(&params, &f, 1, 1)).unwrap();
        assert_eq!(prod, DpPolynomial::monomial(&params, &f, MultiIndex::new([2, 1]), 2).unwrap());
        assert!(x(&params, &f, 2, 0).mul(&x(&params, &f, 1, 0)).unwrap().is_zero());

        let (params5, f5) = setup(5);
        let sq = x(&params5, &f5, 1, 0).mul(&x(&params5, &f5, 1, 0)).unwrap();
        assert_eq!(sq, DpPolynomial::monomial(&params5, &f5, MultiIndex::new([2, 0]), 2).unwrap());
    }

    #[test]
    fn derivative_examples() {
        let (params, f) = setup(3);
        assert_eq!(x(&params, &f, 2, 1).partial(0).unwrap(), x(&params, &f, 1, 1));
        assert!(x(&params, &f, 2, 0).partial(1).unwrap().is_zero());
        assert_eq!(x(&params, &f, 2, 0).partial(0).unwrap().partial(0).unwrap(), DpPolynomial::one(&params, &f));
        assert!(matches!(x(&params, &f, 1, 0).partial(2), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn basis_enumeration() {
        let one = FieldParams::uniform(3, 1).unwrap();
        assert_eq!(dp_basis(&one), vec![MultiIndex::new([0]), MultiIndex::new([1]), MultiIndex::new([2])]);
        let two = FieldParams::uniform(3, 2).unwrap();
        let b = dp_basis(&two);
        assert_eq!(b.len(), 9);
        assert_eq!(b[0], MultiIndex::new([0, 0]));
        assert_eq!(b[8], MultiIndex::new([2, 2]));
        assert_eq!(dp_basis(&FieldParams::uniform(5, 2).unwrap()).len(), 25);
        assert_eq!(dp_basis(&FieldParams::new(2, vec![2, 1]).unwrap()).len(), 8);
    }

    #[test]
    fn mismatched_params_rejected() {
        let (p3, f3) = setup(3);
        let (p5, f5) = setup(5);
        assert_eq!(x(&p3, &f3, 1, 0).mul(&x(&p5, &f5, 1, 0)), Err(Error::ParamMismatch));
    }

    #[test]
    fn integer_products_reduce_to_field_products() {
        let params = Arc::new(FieldParams::uniform(5, 2).unwrap());
        let f = PrimeField::new(5).unwrap();
        for a in dp_basis(&params) {
            for b in dp_basis(&params) {
                let xi = DpPolynomial::monomial(&params, &Integers, a.clone(), Integers.one()).unwrap();
                let yi = DpPolynomial::monomial(&params, &Integers, b.clone(), Integers.one()).unwrap();
                let xp = DpPolynomial::monomial(&params, &f, a.clone(), 1).unwrap();
                let yp = DpPolynomial::monomial(&params, &f, b.clone(), 1).unwrap();
                assert_eq!(xi.mul(&yi).unwrap().reduce(&f), xp.mul(&yp).unwrap());
            }
        }
    }

    fn arb_poly(p: u64) -> impl Strategy<Value = DpPolynomial<PrimeField>> {
        let params = Arc::new(FieldParams::uniform(p, 2).unwrap());
        let basis = dp_basis(&params);
        let f = PrimeField::new(p).unwrap();
        proptest::collection::vec((0..basis.len(), 0..p), 0..6).prop_map(move |terms| {
            let mut out = DpPolynomial::zero(&params, &f);
            for (k, c) in terms {
                out = out.add(&DpPolynomial::monomial(&params, &f, basis[k].clone(), c).unwrap()).unwrap();
            }
            out
        })
    }

    fn check_laws(f: &DpPolynomial<PrimeField>, g: &DpPolynomial<PrimeField>, h: &DpPolynomial<PrimeField>) -> Result<(), TestCaseError> {
        prop_assert_eq!(f.mul(g).unwrap(), g.mul(f).unwrap());
        prop_assert_eq!(f.mul(g).unwrap().mul(h).unwrap(), f.mul(&g.mul(h).unwrap()).unwrap());
        prop_assert_eq!(f.partial(0).unwrap().partial(1).unwrap(), f.partial(1).unwrap().partial(0).unwrap());
        for axis in 0..2 {
            let lhs = f.mul(g).unwrap().partial(axis).unwrap();
            let rhs = f.partial(axis).unwrap().mul(g).unwrap().add(&f.mul(&g.partial(axis).unwrap()).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let mut d = f.clone();
            for _ in 0..=f.params().bound(axis) {
                d = d.partial(axis).unwrap();
            }
            prop_assert!(d.is_zero());
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn algebra_laws_p3(f in arb_poly(3), g in arb_poly(3), h in arb_poly(3)) {
            check_laws(&f, &g, &h)?;
        }

        #[test]
        fn algebra_laws_p5(f in arb_poly(5), g in arb_poly(5), h in arb_poly(5)) {
            check_laws(&f, &g, &h)?;
        }
    }
}
