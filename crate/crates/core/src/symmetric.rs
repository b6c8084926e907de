//! The symmetric algebra `S(L)` of a Cartan-type algebra, the adjoint action
//! extended as a derivation, the operator `d^(δ)` and the generator criteria.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::arith::MultiIndex;
use crate::budget::Budget;
use crate::cartan::{AlgebraKind, BasisTag, CartanAlgebra, IntVec};
use crate::error::{Error, Result};
use crate::linalg::{kernel, SparseVec};
use crate::ring::{Integers, PrimeField, Ring};

/// Exponent multiset: `(basis index, exponent)` pairs sorted by index,
/// exponents positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(SmallVec<[(u32, u32); 6]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(index: usize) -> Self {
        Monomial(smallvec::smallvec![(index as u32, 1)])
    }

    /// Normalizes arbitrary pairs: sorts, merges repeated indices, drops zero exponents.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut v: SmallVec<[(u32, u32); 6]> = pairs.into_iter().map(|(i, e)| (i as u32, e)).collect();
        v.sort_unstable_by_key(|&(i, _)| i);
        let mut out: SmallVec<[(u32, u32); 6]> = SmallVec::new();
        for (i, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += e,
                _ => out.push((i, e)),
            }
        }
        out.retain(|&mut (_, e)| e > 0);
        Monomial(out)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(i, e)| (i as usize, e))
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.0.iter().find(|&&(i, _)| i as usize == index).map_or(0, |&(_, e)| e)
    }

    pub fn contains(&self, index: usize) -> bool {
        self.exponent(index) > 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(i, e)), Some(&&(j, f))) => match i.cmp(&j) {
                    Ordering::Less => {
                        out.push((i, e));
                        a.next();
                    }
                    Ordering::Greater => {
                        out.push((j, f));
                        b.next();
                    }
                    Ordering::Equal => {
                        out.push((i, e + f));
                        a.next();
                        b.next();
                    }
                },
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial(out)
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial(self.0.iter().map(|&(i, e)| (i, e * k)).filter(|&(_, e)| e > 0).collect())
    }

    /// Replaces one factor at position `pos` by the variable `w`.
    fn replace(&self, pos: usize, w: u32) -> Monomial {
        let mut v = self.0.clone();
        if v[pos].1 == 1 {
            v.remove(pos);
        } else {
            v[pos].1 -= 1;
        }
        match v.binary_search_by_key(&w, |&(i, _)| i) {
            Ok(k) => v[k].1 += 1,
            Err(k) => v.insert(k, (w, 1)),
        }
        Monomial(v)
    }

    /// Maps every variable index through `f`; `None` drops the monomial.
    pub fn remap(&self, f: impl Fn(usize) -> Option<usize>) -> Option<Monomial> {
        let mut pairs = Vec::with_capacity(self.0.len());
        for (i, e) in self.entries() {
            pairs.push((f(i)?, e));
        }
        Some(Monomial::from_pairs(pairs))
    }
}

/// Canonical order: total degree, then the exponent list lexicographically.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A linear endomorphism of `L` given by its columns (images of basis elements).
#[derive(Clone, Debug)]
pub struct LinearMap<R: Ring> {
    ring: R,
    columns: Vec<Vec<(u32, R::Elem)>>,
}

impl<R: Ring> LinearMap<R> {
    /// `ad(x)` for `x = Σ coords_b b`.
    pub fn ad(algebra: &CartanAlgebra, ring: &R, coords: &[(usize, R::Elem)]) -> Self {
        let dim = algebra.dim();
        let mut columns = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut col: FxHashMap<u32, R::Elem> = FxHashMap::default();
            for (b, x) in coords {
                for (k, c) in algebra.structure_constants(*b, j) {
                    let term = ring.mul(x, &ring.from_bigint(c));
                    let slot = col.entry(*k as u32).or_insert_with(|| ring.zero());
                    ring.add_assign(slot, &term);
                }
            }
            let mut col: Vec<_> = col.into_iter().filter(|(_, c)| !ring.is_zero(c)).collect();
            col.sort_unstable_by_key(|&(k, _)| k);
            columns.push(col);
        }
        LinearMap { ring: ring.clone(), columns }
    }

    pub fn ad_basis(algebra: &CartanAlgebra, ring: &R, b: usize) -> Self {
        Self::ad(algebra, ring, &[(b, ring.one())])
    }

    /// `ad(∂_axis)`.
    pub fn ad_partial(algebra: &CartanAlgebra, ring: &R, axis: usize) -> Result<Self> {
        let coords = lift_coords(ring, &algebra.partial_coords(axis)?);
        Ok(Self::ad(algebra, ring, &coords))
    }

    pub fn column(&self, j: usize) -> &[(u32, R::Elem)] {
        &self.columns[j]
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }

    /// Image of a Lie algebra element given in coordinates.
    pub fn apply_vec(&self, v: &[(usize, R::Elem)]) -> Vec<(usize, R::Elem)> {
        let r = &self.ring;
        let mut out: FxHashMap<usize, R::Elem> = FxHashMap::default();
        for (j, x) in v {
            for (k, c) in &self.columns[*j] {
                let slot = out.entry(*k as usize).or_insert_with(|| r.zero());
                r.add_assign(slot, &r.mul(x, c));
            }
        }
        let mut out: Vec<_> = out.into_iter().filter(|(_, c)| !r.is_zero(c)).collect();
        out.sort_unstable_by_key(|&(k, _)| k);
        out
    }
}

/// Integer coordinates mapped into `ring`.
pub fn lift_coords<R: Ring>(ring: &R, coords: &IntVec) -> Vec<(usize, R::Elem)> {
    coords.iter().map(|(k, c)| (*k, ring.from_bigint(c))).filter(|(_, c)| !ring.is_zero(c)).collect()
}

/// Options for `d^(γ)` expansions.
#[derive(Clone, Debug)]
pub struct DeltaOptions {
    /// Order in which the axes are applied; defaults to `0..n`.
    pub order: Option<Vec<usize>>,
    /// Worker threads for the expansion; `0` or `1` runs sequentially.
    pub workers: usize,
    pub budget: Budget,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { order: None, workers: 1, budget: Budget::unlimited() }
    }
}

const PARALLEL_THRESHOLD: usize = 4096;

/// Element of `S(L)` over `ring`.
#[derive(Clone)]
pub struct SymPolynomial<R: Ring> {
    algebra: Arc<CartanAlgebra>,
    ring: R,
    terms: FxHashMap<Monomial, R::Elem>,
}

impl<R: Ring> PartialEq for SymPolynomial<R> {
    fn eq(&self, other: &Self) -> bool {
        self.algebra.same_as(&other.algebra) && self.ring == other.ring && self.terms == other.terms
    }
}

impl<R: Ring> fmt::Debug for SymPolynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymPolynomial[{:?}]({})", self.algebra, self)
    }
}

impl<R: Ring> fmt::Display for SymPolynomial<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::render_basis(self))
    }
}

impl<R: Ring> SymPolynomial<R> {
    pub fn zero(algebra: &Arc<CartanAlgebra>, ring: &R) -> Self {
        SymPolynomial { algebra: algebra.clone(), ring: ring.clone(), terms: FxHashMap::default() }
    }

    pub fn constant(algebra: &Arc<CartanAlgebra>, ring: &R, c: R::Elem) -> Self {
        Self::from_terms(algebra, ring, [(Monomial::one(), c)]).expect("constant monomial is valid")
    }

    pub fn one(algebra: &Arc<CartanAlgebra>, ring: &R) -> Self {
        Self::constant(algebra, ring, ring.one())
    }

    /// The basis element `index` as a degree-one polynomial.
    pub fn var(algebra: &Arc<CartanAlgebra>, ring: &R, index: usize) -> Result<Self> {
        Self::from_terms(algebra, ring, [(Monomial::var(index), ring.one())])
    }

    /// Sums the given terms; fails on indices outside the basis.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, R::Elem)>>(algebra: &Arc<CartanAlgebra>, ring: &R, terms: I) -> Result<Self> {
        let mut out = Self::zero(algebra, ring);
        for (m, c) in terms {
            if let Some((i, _)) = m.entries().find(|&(i, _)| i >= algebra.dim()) {
                return Err(Error::InvalidParams(format!("variable index {i} outside a basis of size {}", algebra.dim())));
            }
            out.accumulate(m, c);
        }
        Ok(out)
    }

    pub fn algebra(&self) -> &Arc<CartanAlgebra> {
        &self.algebra
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &R::Elem)> {
        self.terms.iter()
    }

    /// Terms in canonical order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &R::Elem)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn coeff(&self, m: &Monomial) -> R::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// Common total degree of all terms; `None` for zero or mixed degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    /// Whether some term contains the variable `index`.
    pub fn contains_var(&self, index: usize) -> bool {
        self.terms.keys().any(|m| m.contains(index))
    }

    fn accumulate(&mut self, m: Monomial, c: R::Elem) {
        accumulate(&self.ring, &mut self.terms, m, c);
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !self.algebra.same_as(&other.algebra) || self.ring != other.ring {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    fn with_terms(&self, terms: FxHashMap<Monomial, R::Elem>) -> Self {
        SymPolynomial { algebra: self.algebra.clone(), ring: self.ring.clone(), terms }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(m.clone(), c.clone());
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
        let mut out = self.with_terms(FxHashMap::default());
        for (m, x) in &self.terms {
            out.accumulate(m.clone(), self.ring.mul(x, c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.with_terms(FxHashMap::default());
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.accumulate(a.mul(b), self.ring.mul(x, y));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(&self.algebra, &self.ring);
        for _ in 0..k {
            out = out.mul(self).expect("same algebra");
        }
        out
    }

    pub fn map_ring<S: Ring>(&self, ring: &S, f: impl Fn(&R::Elem) -> S::Elem) -> SymPolynomial<S> {
        let mut out = SymPolynomial::zero(&self.algebra, ring);
        for (m, c) in &self.terms {
            out.accumulate(m.clone(), f(c));
        }
        out
    }

    /// Reinterprets the polynomial over `target` by mapping variable indices;
    /// monomials containing an unmapped variable are dropped.
    pub fn transfer(&self, target: &Arc<CartanAlgebra>, f: impl Fn(usize) -> Option<usize>) -> Self {
        let mut out = SymPolynomial::zero(target, &self.ring);
        for (m, c) in &self.terms {
            if let Some(m2) = m.remap(&f) {
                out.accumulate(m2, c.clone());
            }
        }
        out
    }

    /// The derivation of `S(L)` extending the linear map `map` of `L`.
    pub fn apply_derivation(&self, map: &LinearMap<R>) -> Self {
        let terms: Vec<_> = self.terms.iter().collect();
        self.with_terms(derive_chunk(&self.ring, map, &terms))
    }

    fn apply_derivation_par(&self, map: &LinearMap<R>, workers: usize) -> Self {
        if workers <= 1 || self.terms.len() < PARALLEL_THRESHOLD {
            return self.apply_derivation(map);
        }
        let terms: Vec<_> = self.terms.iter().collect();
        let chunk = terms.len().div_ceil(workers * 4).max(256);
        let ring = &self.ring;
        let merged = terms.par_chunks(chunk).map(|c| derive_chunk(ring, map, c)).reduce(FxHashMap::default, |mut a, b| {
            if a.len() < b.len() {
                return merge(ring, b, a);
            }
            a = merge(ring, a, b);
            a
        });
        self.with_terms(merged)
    }

    /// `ad(b)` for the basis element `b`, extended by the Leibniz rule.
    pub fn ad_basis(&self, b: usize) -> Result<Self> {
        if b >= self.algebra.dim() {
            return Err(Error::NotInSpan);
        }
        Ok(self.apply_derivation(&LinearMap::ad_basis(&self.algebra, &self.ring, b)))
    }

    /// `ad(x)` for `x` in coordinates over the same ring.
    pub fn ad_element(&self, coords: &[(usize, R::Elem)]) -> Result<Self> {
        if coords.iter().any(|(b, _)| *b >= self.algebra.dim()) {
            return Err(Error::NotInSpan);
        }
        Ok(self.apply_derivation(&LinearMap::ad(&self.algebra, &self.ring, coords)))
    }

    /// `ad(D)` for a derivation with integer coefficients lying in the algebra.
    pub fn ad_derivation(&self, d: &crate::cartan::Derivation<Integers>) -> Result<Self> {
        let coords = self.algebra.decompose_int(d)?;
        self.ad_element(&lift_coords(&self.ring, &coords))
    }

    /// `d^(γ) = Π ad(∂_i)^{γ_i}`.
    pub fn d_power(&self, gamma: &MultiIndex, opts: &DeltaOptions) -> Result<Self> {
        let n = self.algebra.params().n();
        if gamma.len() != n {
            return Err(Error::ParamMismatch);
        }
        let order = match &opts.order {
            Some(order) => {
                let mut sorted = order.clone();
                sorted.sort_unstable();
                if sorted != (0..n).collect::<Vec<_>>() {
                    return Err(Error::InvalidParams("axis order must be a permutation of 0..n".into()));
                }
                order.clone()
            }
            None => (0..n).collect(),
        };
        let run = || -> Result<Self> {
            let mut f = self.clone();
            for &axis in &order {
                if gamma.get(axis) == 0 {
                    continue;
                }
                let map = LinearMap::ad_partial(&self.algebra, &self.ring, axis)?;
                for _ in 0..gamma.get(axis) {
                    if f.is_zero() {
                        return Ok(f);
                    }
                    f = f.apply_derivation_par(&map, opts.workers);
                    opts.budget.check(f.len(), "d_delta expansion")?;
                }
            }
            Ok(f)
        };
        if opts.workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(opts.workers)
                .build()
                .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;
            pool.install(run)
        } else {
            run()
        }
    }

    /// `d^(δ)` applied with default options.
    pub fn d_delta(&self) -> Self {
        self.d_delta_with(&DeltaOptions::default()).expect("unlimited budget")
    }

    pub fn d_delta_with(&self, opts: &DeltaOptions) -> Result<Self> {
        self.d_power(&self.algebra.params().delta(), opts)
    }

    /// Checks `ad(b)(F) = 0` for the basis elements in `indices`; stops at
    /// the first failure.
    pub fn invariance_on(&self, indices: &[usize]) -> InvarianceReport<R> {
        for &b in indices {
            let image = self.apply_derivation(&LinearMap::ad_basis(&self.algebra, &self.ring, b));
            if !image.is_zero() {
                return InvarianceReport { witness: Some((b, image)) };
            }
        }
        InvarianceReport { witness: None }
    }

    /// Checks `ad(b)(F) = 0` for every basis element of the algebra.
    pub fn invariance(&self) -> InvarianceReport<R> {
        let all: Vec<usize> = (0..self.algebra.dim()).collect();
        self.invariance_on(&all)
    }

    pub fn is_invariant(&self) -> bool {
        self.invariance().is_invariant()
    }

    /// `𝓛_1(F) = 0` and `ad(x_i ∂_j)(F) = -δ_{ij} F`, for `W`-type algebras.
    pub fn check_generator_w(&self) -> Result<GeneratorReport<R>> {
        let a = &self.algebra;
        if a.kind() != AlgebraKind::W {
            return Err(Error::WrongKind { expected: "W".into(), found: a.kind().to_string() });
        }
        let upper = if a.top_grade() >= 1 { a.filtration_basis(1)? } else { Vec::new() };
        if let Some((b, image)) = self.invariance_on(&upper).witness {
            return Ok(GeneratorReport::fail(a, b, image, Self::zero(a, &self.ring)));
        }
        let n = a.params().n();
        for i in 0..n {
            for j in 0..n {
                let tag = BasisTag::W { alpha: MultiIndex::unit(n, i), axis: j };
                let b = a.index_of_tag(&tag).expect("W contains x_i d_j");
                let image = self.ad_basis(b)?;
                let expected = if i == j { self.neg() } else { Self::zero(a, &self.ring) };
                if image != expected {
                    return Ok(GeneratorReport::fail(a, b, image, expected));
                }
            }
        }
        Ok(GeneratorReport { witness: None })
    }

    /// `𝓛_0(F) = 0`, for `S`- and Hamiltonian-type algebras.
    pub fn check_generator_sh(&self) -> Result<GeneratorReport<R>> {
        let a = &self.algebra;
        if a.kind() == AlgebraKind::W {
            return Err(Error::WrongKind { expected: "S, H or Hbar".into(), found: a.kind().to_string() });
        }
        let upper = if a.top_grade() >= 0 { a.filtration_basis(0)? } else { Vec::new() };
        match self.invariance_on(&upper).witness {
            Some((b, image)) => Ok(GeneratorReport::fail(a, b, image, Self::zero(a, &self.ring))),
            None => Ok(GeneratorReport { witness: None }),
        }
    }
}

fn accumulate<R: Ring>(ring: &R, terms: &mut FxHashMap<Monomial, R::Elem>, m: Monomial, c: R::Elem) {
    if ring.is_zero(&c) {
        return;
    }
    match terms.entry(m) {
        std::collections::hash_map::Entry::Occupied(mut e) => {
            ring.add_assign(e.get_mut(), &c);
            if ring.is_zero(e.get()) {
                e.remove();
            }
        }
        std::collections::hash_map::Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}

fn merge<R: Ring>(ring: &R, mut a: FxHashMap<Monomial, R::Elem>, b: FxHashMap<Monomial, R::Elem>) -> FxHashMap<Monomial, R::Elem> {
    for (m, c) in b {
        accumulate(ring, &mut a, m, c);
    }
    a
}

fn derive_chunk<R: Ring>(ring: &R, map: &LinearMap<R>, terms: &[(&Monomial, &R::Elem)]) -> FxHashMap<Monomial, R::Elem> {
    let mut out = FxHashMap::default();
    for (m, c) in terms {
        for (pos, &(v, e)) in m.0.iter().enumerate() {
            let col = map.column(v as usize);
            if col.is_empty() {
                continue;
            }
            let ce = ring.mul_u64(c, e as u64);
            for (w, a) in col {
                accumulate(ring, &mut out, m.replace(pos, *w), ring.mul(&ce, a));
            }
        }
    }
    out
}

impl SymPolynomial<Integers> {
    pub fn reduce(&self, field: &PrimeField) -> SymPolynomial<PrimeField> {
        self.map_ring(field, |c| field.from_bigint(c))
    }
}

impl SymPolynomial<PrimeField> {
    /// Lift with least nonnegative residues as integer coefficients.
    pub fn lift(&self) -> SymPolynomial<Integers> {
        self.map_ring(&Integers, |c| BigInt::from(*c))
    }
}

/// Outcome of an invariance check: a witness `(b, ad(b)(F))` or none.
#[derive(Clone, Debug)]
pub struct InvarianceReport<R: Ring> {
    pub witness: Option<(usize, SymPolynomial<R>)>,
}

impl<R: Ring> InvarianceReport<R> {
    pub fn is_invariant(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct GeneratorWitness<R: Ring> {
    pub basis: usize,
    pub label: String,
    pub grade: i32,
    pub image: SymPolynomial<R>,
    pub expected: SymPolynomial<R>,
}

/// Outcome of a generator criterion; `witness` names the first failing element.
#[derive(Clone, Debug)]
pub struct GeneratorReport<R: Ring> {
    pub witness: Option<GeneratorWitness<R>>,
}

impl<R: Ring> GeneratorReport<R> {
    fn fail(a: &CartanAlgebra, b: usize, image: SymPolynomial<R>, expected: SymPolynomial<R>) -> Self {
        let witness = GeneratorWitness { basis: b, label: a.label(b).to_string(), grade: a.grade(b), image, expected };
        GeneratorReport { witness: Some(witness) }
    }

    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Evaluates both sides of
/// `ad(x)∘d^(δ) = Σ_γ (-1)^{|γ|} C(δ,γ) d^(δ-γ)∘ad(d^(γ)(x))` on `f`,
/// where `d^(γ)(x)` is `x` with `ad(∂_i)` applied `γ_i` times.
pub fn commutation_expansion_check<R: Ring>(x: &[(usize, R::Elem)], f: &SymPolynomial<R>) -> Result<bool> {
    let a = f.algebra();
    let ring = f.ring();
    let opts = DeltaOptions::default();
    let delta = a.params().delta();
    let lhs = f.d_power(&delta, &opts)?.ad_element(x)?;

    let partials: Vec<LinearMap<R>> = (0..a.params().n()).map(|i| LinearMap::ad_partial(a, ring, i)).collect::<Result<_>>()?;
    let mut rhs = SymPolynomial::zero(a, ring);
    for gamma in delta.lower_set() {
        let mut y: Vec<(usize, R::Elem)> = x.to_vec();
        for (axis, map) in partials.iter().enumerate() {
            for _ in 0..gamma.get(axis) {
                y = map.apply_vec(&y);
            }
        }
        if y.is_empty() {
            continue;
        }
        let mut c = ring.one();
        for (&d, &g) in delta.entries().iter().zip(gamma.entries()) {
            c = ring.mul(&c, &ring.binomial(d as u64, g as u64));
        }
        if gamma.degree() % 2 == 1 {
            c = ring.neg(&c);
        }
        let rest = delta.checked_sub(&gamma).expect("gamma below delta");
        let term = f.ad_element(&y)?.d_power(&rest, &opts)?;
        rhs = rhs.add(&term.scale(&c))?;
    }
    Ok(lhs == rhs)
}

/// All homogeneous monomials of `degree` in `dim` variables, canonically ordered.
pub fn monomials_of_degree(dim: usize, degree: u32) -> Vec<Monomial> {
    fn rec(start: usize, dim: usize, left: u32, acc: &mut Vec<(usize, u32)>, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(Monomial::from_pairs(acc.iter().copied()));
            return;
        }
        for i in start..dim {
            for e in (1..=left).rev() {
                acc.push((i, e));
                rec(i + 1, dim, left - e, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, dim, degree, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Basis of the homogeneous degree-`degree` polynomials over `F_p` annihilated
/// by `𝓛_{min_grade}`.
pub fn homogeneous_annihilator(algebra: &Arc<CartanAlgebra>, degree: u32, min_grade: i32) -> Result<Vec<SymPolynomial<PrimeField>>> {
    let field = *algebra.field();
    let upper = algebra.filtration_basis(min_grade)?;
    let maps: Vec<_> = upper.iter().map(|&b| LinearMap::ad_basis(algebra, &field, b)).collect();
    let domain = monomials_of_degree(algebra.dim(), degree);
    let mut ids: FxHashMap<Monomial, usize> = FxHashMap::default();
    let mut images: Vec<SparseVec<u64>> = Vec::with_capacity(domain.len());
    for m in &domain {
        let f = SymPolynomial::from_terms(algebra, &field, [(m.clone(), 1)])?;
        let mut image = SparseVec::new();
        for (slot, map) in maps.iter().enumerate() {
            for (m2, c) in f.apply_derivation(map).sorted_terms() {
                let next = ids.len();
                let id = *ids.entry(m2.clone()).or_insert(next);
                image.insert(id * maps.len() + slot, *c);
            }
        }
        images.push(image);
    }
    let kernel = kernel(&field, &images);
    kernel.into_iter().map(|v| SymPolynomial::from_terms(algebra, &field, v.into_iter().map(|(k, c)| (domain[k].clone(), c)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::FieldParams;
    use crate::cartan::HamiltonianStructure;

    fn hbar(p: u64) -> Arc<CartanAlgebra> {
        CartanAlgebra::build_hbar(FieldParams::uniform(p, 2).unwrap(), HamiltonianStructure::standard(2).unwrap()).unwrap()
    }

    fn w1() -> Arc<CartanAlgebra> {
        CartanAlgebra::build_w(FieldParams::uniform(3, 1).unwrap()).unwrap()
    }

    #[test]
    fn monomial_ops() {
        let a = Monomial::from_pairs([(3, 1), (1, 2), (3, 1), (5, 0)]);
        assert_eq!(a.entries().collect::<Vec<_>>(), vec![(1, 2), (3, 2)]);
        assert_eq!(a.degree(), 4);
        let b = Monomial::var(2).mul(&Monomial::var(3));
        assert_eq!(a.mul(&b), Monomial::from_pairs([(1, 2), (2, 1), (3, 3)]));
        assert!(Monomial::var(9) > Monomial::var(0));
        assert!(Monomial::var(9) < Monomial::var(0).pow(2));
        assert_eq!(a.replace(0, 3), Monomial::from_pairs([(1, 1), (3, 3)]));
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_of_degree(8, 3).len(), 120);
    }

    #[test]
    fn ring_operations() {
        let a = hbar(3);
        let f = PrimeField::new(3).unwrap();
        let u = SymPolynomial::var(&a, &f, a.top_element().unwrap()).unwrap();
        assert!(u.add(&u.neg()).unwrap().is_zero());
        let u2 = u.mul(&u).unwrap();
        assert_eq!(u2.sorted_terms()[0].0, &Monomial::var(7).pow(2));
        assert_eq!(SymPolynomial::one(&a, &f).mul(&u).unwrap(), u);
        let other = hbar(5);
        let g = PrimeField::new(5).unwrap();
        let v = SymPolynomial::var(&other, &g, 0).unwrap();
        assert!(v.map_ring(&f, |c| *c % 3).add(&u).is_err());
        assert!(SymPolynomial::var(&a, &f, 8).is_err());
    }

    #[test]
    fn ad_action_examples() {
        let a = w1();
        let f = PrimeField::new(3).unwrap();
        let d = a.index_of("x^(0)d_1").unwrap();
        let e1 = a.index_of("x^(2)d_1").unwrap();
        let euler = a.index_of("x^(1)d_1").unwrap();
        assert!(SymPolynomial::one(&a, &f).ad_basis(d).unwrap().is_zero());
        let sq = SymPolynomial::var(&a, &f, e1).unwrap().pow(2);
        assert_eq!(sq.ad_basis(euler).unwrap(), sq.scale(&2));
        assert!(sq.ad_basis(5).is_err());
    }

    #[test]
    fn d_delta_examples() {
        let a = hbar(3);
        let f = PrimeField::new(3).unwrap();
        assert!(SymPolynomial::one(&a, &f).d_delta().is_zero());
        let u = SymPolynomial::var(&a, &f, a.top_element().unwrap()).unwrap();
        assert!(u.d_delta().is_zero());
        let delta2 = u.pow(2).d_delta();
        assert_eq!(delta2.len(), 4);
        assert!(delta2.is_invariant());
    }

    #[test]
    fn invariance_witness() {
        let a = CartanAlgebra::build_h(FieldParams::uniform(3, 2).unwrap(), HamiltonianStructure::standard(2).unwrap()).unwrap();
        let f = PrimeField::new(3).unwrap();
        assert!(SymPolynomial::one(&a, &f).invariance().is_invariant());
        let x = SymPolynomial::var(&a, &f, a.index_of("D(1,1)").unwrap()).unwrap();
        let report = x.invariance();
        let (b, image) = report.witness.expect("not invariant");
        assert_eq!(x.ad_basis(b).unwrap(), image);
        assert!(!image.is_zero());
        assert!((0..b).all(|c| x.ad_basis(c).unwrap().is_zero()));
    }

    #[test]
    fn generator_checks_w1() {
        let a = w1();
        let f = PrimeField::new(3).unwrap();
        let e1 = SymPolynomial::var(&a, &f, a.index_of("x^(2)d_1").unwrap()).unwrap();
        assert!(SymPolynomial::zero(&a, &f).check_generator_w().unwrap().passed());
        assert!(e1.pow(2).check_generator_w().unwrap().passed());
        let report = e1.check_generator_w().unwrap();
        assert_eq!(report.witness.unwrap().label, "x^(1)d_1");
        assert!(e1.check_generator_sh().is_err());
    }

    #[test]
    fn generator_checks_hbar() {
        let a = hbar(3);
        let f = PrimeField::new(3).unwrap();
        let u = SymPolynomial::var(&a, &f, a.top_element().unwrap()).unwrap();
        assert!(u.pow(2).check_generator_sh().unwrap().passed());
        let x = SymPolynomial::var(&a, &f, a.index_of("D(1,1)").unwrap()).unwrap();
        let w = x.check_generator_sh().unwrap().witness.unwrap();
        assert!(w.grade >= 0);
        assert!(SymPolynomial::zero(&a, &f).check_generator_sh().unwrap().passed());
        assert!(u.check_generator_w().is_err());
    }

    #[test]
    fn order_and_workers_do_not_change_d_delta() {
        let a = hbar(5);
        let f = PrimeField::new(5).unwrap();
        let u = SymPolynomial::var(&a, &f, a.top_element().unwrap()).unwrap();
        let g = u.pow(4).add(&SymPolynomial::var(&a, &f, 3).unwrap().pow(2)).unwrap();
        let base = g.d_delta();
        let swapped = g.d_delta_with(&DeltaOptions { order: Some(vec![1, 0]), ..Default::default() }).unwrap();
        let parallel = g.d_delta_with(&DeltaOptions { workers: 4, ..Default::default() }).unwrap();
        assert_eq!(base, swapped);
        assert_eq!(base, parallel);
        let bad = DeltaOptions { order: Some(vec![0, 0]), ..Default::default() };
        assert!(g.d_delta_with(&bad).is_err());
        let tight = DeltaOptions { budget: Budget::new(Some(3), None), ..Default::default() };
        assert!(matches!(g.d_delta_with(&tight), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn annihilator_contains_u_squared() {
        let a = hbar(3);
        let f = PrimeField::new(3).unwrap();
        let kernel = homogeneous_annihilator(&a, 2, 0).unwrap();
        let u2 = SymPolynomial::var(&a, &f, a.top_element().unwrap()).unwrap().pow(2);
        assert!(kernel.iter().any(|k| k == &u2 || k == &u2.scale(&2)));
        for k in &kernel {
            assert!(k.check_generator_sh().unwrap().passed());
        }
    }

    #[test]
    fn commutation_identity_examples() {
        let a = hbar(3);
        let f = PrimeField::new(3).unwrap();
        let x = SymPolynomial::var(&a, &f, 3).unwrap();
        let y = SymPolynomial::var(&a, &f, 5).unwrap();
        let g = x.mul(&y).unwrap().add(&y.pow(2)).unwrap();
        let u = a.top_element().unwrap();
        assert!(commutation_expansion_check(&[(u, 1)], &g).unwrap());
        let d1 = lift_coords(&f, &a.partial_coords(0).unwrap());
        assert!(commutation_expansion_check(&d1, &g).unwrap());
    }
}
