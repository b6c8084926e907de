//! Lie algebras of Cartan type realised as special derivations of `K_n(m)`:
//! the general algebra `W`, the special algebra `S`, the Hamiltonian
//! algebra `H` and its extension `H̄ = H ⊕ ⟨D(δ)⟩`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::arith::{FieldParams, MultiIndex};
use crate::divided_powers::{dp_basis, DpPolynomial};
use crate::error::{Error, Result};
use crate::linalg::{Insert, SpanReducer, SparseVec};
use crate::ring::{Integers, PrimeField, Rationals, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraKind {
    W,
    S,
    H,
    Hbar,
}

impl AlgebraKind {
    pub fn is_hamiltonian(self) -> bool {
        matches!(self, AlgebraKind::H | AlgebraKind::Hbar)
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgebraKind::W => "W",
            AlgebraKind::S => "S",
            AlgebraKind::H => "H",
            AlgebraKind::Hbar => "Hbar",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for AlgebraKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "W" => Ok(AlgebraKind::W),
            "S" => Ok(AlgebraKind::S),
            "H" => Ok(AlgebraKind::H),
            "Hbar" => Ok(AlgebraKind::Hbar),
            _ => Err(Error::InvalidParams(format!("unknown algebra kind `{s}`"))),
        }
    }
}

/// Fixed-point-free involution `π` with signs `a_{i,πi} = ±1`,
/// `a_{i,πi} + a_{πi,i} = 0`. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HamiltonianStructure {
    pi: Vec<usize>,
    signs: Vec<i8>,
}

impl HamiltonianStructure {
    pub fn new(pi: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = pi.len();
        if signs.len() != n {
            return Err(Error::InvalidParams("sign vector length differs from n".into()));
        }
        for i in 0..n {
            let j = pi[i];
            if j >= n || j == i || pi[j] != i {
                return Err(Error::InvalidParams("pi must be a fixed-point-free involution".into()));
            }
            if !matches!(signs[i], 1 | -1) || signs[i] + signs[j] != 0 {
                return Err(Error::InvalidParams("signs must be ±1 and antisymmetric".into()));
            }
        }
        Ok(HamiltonianStructure { pi, signs })
    }

    /// `π = (1 2)(3 4)…` with `a_{2k-1,2k} = +1`.
    pub fn standard(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("Hamiltonian algebras need even n, got {n}")));
        }
        let pi = (0..n).map(|i| i ^ 1).collect();
        let signs = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Self::new(pi, signs)
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn partner(&self, i: usize) -> usize {
        self.pi[i]
    }

    pub fn sign(&self, i: usize) -> i8 {
        self.signs[i]
    }

    /// Short identifier of the sign convention, e.g. `pi=(1 2);a=+-`.
    pub fn tag(&self) -> String {
        let mut cycles = String::new();
        for i in 0..self.n() {
            if i < self.pi[i] {
                cycles.push_str(&format!("({} {})", i + 1, self.pi[i] + 1));
            }
        }
        let signs: String = self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect();
        format!("pi={cycles};a={signs}")
    }
}

/// `D = Σ f_i ∂_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation<R: Ring> {
    params: Arc<FieldParams>,
    ring: R,
    coeffs: Vec<DpPolynomial<R>>,
}

impl<R: Ring> Derivation<R> {
    pub fn zero(params: &Arc<FieldParams>, ring: &R) -> Self {
        let coeffs = (0..params.n()).map(|_| DpPolynomial::zero(params, ring)).collect();
        Derivation { params: params.clone(), ring: ring.clone(), coeffs }
    }

    pub fn from_coeffs(params: &Arc<FieldParams>, ring: &R, coeffs: Vec<DpPolynomial<R>>) -> Result<Self> {
        if coeffs.len() != params.n() || coeffs.iter().any(|c| c.params() != params || c.ring() != ring) {
            return Err(Error::ParamMismatch);
        }
        Ok(Derivation { params: params.clone(), ring: ring.clone(), coeffs })
    }

    /// `c · x^(α) ∂_axis`.
    pub fn monomial(params: &Arc<FieldParams>, ring: &R, alpha: MultiIndex, axis: usize, coeff: R::Elem) -> Result<Self> {
        if axis >= params.n() {
            return Err(Error::AxisOutOfRange { axis, n: params.n() });
        }
        let mut d = Self::zero(params, ring);
        d.coeffs[axis] = DpPolynomial::monomial(params, ring, alpha, coeff)?;
        Ok(d)
    }

    /// The coordinate derivation `∂_axis`.
    pub fn partial(params: &Arc<FieldParams>, ring: &R, axis: usize) -> Result<Self> {
        Self::monomial(params, ring, MultiIndex::zero(params.n()), axis, ring.one())
    }

    /// `D_{i,j}(α) = ∂_i(x^(α)) ∂_j - ∂_j(x^(α)) ∂_i`.
    pub fn special(params: &Arc<FieldParams>, ring: &R, i: usize, j: usize, alpha: MultiIndex) -> Result<Self> {
        let x = DpPolynomial::monomial(params, ring, alpha, ring.one())?;
        let mut d = Self::zero(params, ring);
        d.coeffs[j] = x.partial(i)?;
        d.coeffs[i] = d.coeffs[i].sub(&x.partial(j)?)?;
        Ok(d)
    }

    /// `D(α) = Σ_i a_{i,πi} ∂_i(x^(α)) ∂_{πi}`.
    pub fn hamiltonian(params: &Arc<FieldParams>, ring: &R, hs: &HamiltonianStructure, alpha: MultiIndex) -> Result<Self> {
        if hs.n() != params.n() {
            return Err(Error::ParamMismatch);
        }
        let x = DpPolynomial::monomial(params, ring, alpha, ring.one())?;
        let mut d = Self::zero(params, ring);
        for i in 0..params.n() {
            let term = x.partial(i)?.scale(&ring.from_i64(hs.sign(i) as i64));
            let j = hs.partner(i);
            d.coeffs[j] = d.coeffs[j].add(&term)?;
        }
        Ok(d)
    }

    pub fn params(&self) -> &Arc<FieldParams> {
        &self.params
    }

    pub fn coeffs(&self) -> &[DpPolynomial<R>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.params != other.params || self.ring != other.ring {
            return Err(Error::ParamMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Derivation { coeffs, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&self.ring.neg(&self.ring.one())))
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let coeffs = self.coeffs.iter().map(|f| f.scale(c)).collect();
        Derivation { coeffs, ..self.clone() }
    }

    /// `D(h) = Σ f_i ∂_i(h)`.
    pub fn apply(&self, h: &DpPolynomial<R>) -> Result<DpPolynomial<R>> {
        let mut out = DpPolynomial::zero(&self.params, &self.ring);
        for (i, f) in self.coeffs.iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            out = out.add(&f.mul(&h.partial(i)?)?)?;
        }
        Ok(out)
    }

    /// `[D, E]`, whose `k`-th coefficient is `Σ_i f_i ∂_i(g_k) - g_i ∂_i(f_k)`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut coeffs = Vec::with_capacity(self.params.n());
        for k in 0..self.params.n() {
            let forward = self.apply(&other.coeffs[k])?;
            let backward = other.apply(&self.coeffs[k])?;
            coeffs.push(forward.sub(&backward)?);
        }
        Ok(Derivation { coeffs, ..self.clone() })
    }

    pub fn map_ring<S: Ring>(&self, ring: &S, f: impl Fn(&R::Elem) -> S::Elem) -> Derivation<S> {
        let coeffs = self.coeffs.iter().map(|c| c.map_ring(ring, &f)).collect();
        Derivation { params: self.params.clone(), ring: ring.clone(), coeffs }
    }
}

impl Derivation<Integers> {
    pub fn reduce(&self, field: &PrimeField) -> Derivation<PrimeField> {
        self.map_ring(field, |c| field.from_bigint(c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BasisTag {
    /// `x^(α) ∂_axis`
    W { alpha: MultiIndex, axis: usize },
    /// `D_{i,j}(α)`, `i < j`
    S { alpha: MultiIndex, i: usize, j: usize },
    /// `D(α)`
    H { alpha: MultiIndex },
}

impl BasisTag {
    pub fn alpha(&self) -> &MultiIndex {
        match self {
            BasisTag::W { alpha, .. } | BasisTag::S { alpha, .. } | BasisTag::H { alpha } => alpha,
        }
    }

    pub fn label(&self) -> String {
        match self {
            BasisTag::W { alpha, axis } => format!("x^{alpha}d_{}", axis + 1),
            BasisTag::S { alpha, i, j } => format!("D_{{{},{}}}{alpha}", i + 1, j + 1),
            BasisTag::H { alpha } => format!("D{alpha}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BasisElement {
    pub label: String,
    pub tag: BasisTag,
    pub derivation: Derivation<Integers>,
    pub grade: i32,
}

/// Sparse column of integer structure constants.
pub type IntVec = Vec<(usize, BigInt)>;

/// A constructed algebra: ordered basis, grading and structure constants
/// `[b_i, b_j] = Σ_k c_{ij}^k b_k` stored over ℤ.
pub struct CartanAlgebra {
    kind: AlgebraKind,
    params: Arc<FieldParams>,
    field: PrimeField,
    hamiltonian: Option<HamiltonianStructure>,
    basis: Vec<BasisElement>,
    top_grade: i32,
    labels: FxHashMap<String, usize>,
    dp_index: FxHashMap<MultiIndex, usize>,
    reducer_p: SpanReducer<PrimeField>,
    reducer_q: SpanReducer<Rationals>,
    structure: Vec<IntVec>,
    structure_p: Vec<Vec<(usize, u64)>>,
}

impl fmt::Debug for CartanAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CartanAlgebra({}, {}, dim {})", self.kind, self.params, self.dim())
    }
}

impl CartanAlgebra {
    pub fn build_w(params: FieldParams) -> Result<Arc<Self>> {
        Self::build(AlgebraKind::W, params, None)
    }

    pub fn build_s(params: FieldParams) -> Result<Arc<Self>> {
        Self::build(AlgebraKind::S, params, None)
    }

    pub fn build_h(params: FieldParams, hs: HamiltonianStructure) -> Result<Arc<Self>> {
        Self::build(AlgebraKind::H, params, Some(hs))
    }

    pub fn build_hbar(params: FieldParams, hs: HamiltonianStructure) -> Result<Arc<Self>> {
        Self::build(AlgebraKind::Hbar, params, Some(hs))
    }

    /// Builds the algebra and computes its structure constants.
    pub fn build(kind: AlgebraKind, params: FieldParams, hs: Option<HamiltonianStructure>) -> Result<Arc<Self>> {
        let mut algebra = Self::basis_only(kind, params, hs)?;
        algebra.compute_structure()?;
        Ok(Arc::new(algebra))
    }

    /// Builds the basis and installs precomputed integer structure constants
    /// (`table[i * dim + j]`) after checking them against the bracket modulo `p`.
    pub fn with_structure(kind: AlgebraKind, params: FieldParams, hs: Option<HamiltonianStructure>, table: Vec<IntVec>) -> Result<Arc<Self>> {
        let mut algebra = Self::basis_only(kind, params, hs)?;
        let dim = algebra.dim();
        if table.len() != dim * dim {
            return Err(Error::Malformed(format!("structure table has {} cells, expected {}", table.len(), dim * dim)));
        }
        algebra.install_structure(table);
        for i in 0..dim {
            for j in 0..dim {
                let expected = algebra.basis[i].derivation.reduce(&algebra.field).bracket(&algebra.basis[j].derivation.reduce(&algebra.field))?;
                let mut sum = Derivation::zero(&algebra.params, &algebra.field);
                for (k, c) in algebra.structure_mod_p(i, j) {
                    sum = sum.add(&algebra.basis[*k].derivation.reduce(&algebra.field).scale(c))?;
                }
                if sum != expected {
                    return Err(Error::ClosureFailure(format!(
                        "table entry for [{}, {}] disagrees with the bracket",
                        algebra.basis[i].label, algebra.basis[j].label
                    )));
                }
            }
        }
        Ok(Arc::new(algebra))
    }

    fn basis_only(kind: AlgebraKind, params: FieldParams, hs: Option<HamiltonianStructure>) -> Result<Self> {
        let n = params.n();
        let hs = match kind {
            AlgebraKind::S if n < 2 => return Err(Error::InvalidParams("S_n requires n >= 2".into())),
            AlgebraKind::H | AlgebraKind::Hbar => {
                if !n.is_multiple_of(2) {
                    return Err(Error::InvalidParams("Hamiltonian algebras require even n".into()));
                }
                let hs = match hs {
                    Some(hs) => hs,
                    None => HamiltonianStructure::standard(n)?,
                };
                if hs.n() != n {
                    return Err(Error::InvalidParams("Hamiltonian structure size differs from n".into()));
                }
                Some(hs)
            }
            _ => None,
        };
        let params = Arc::new(params);
        let field = PrimeField::new(params.p())?;
        let monomials = dp_basis(&params);
        let dp_index: FxHashMap<MultiIndex, usize> = monomials.iter().cloned().enumerate().map(|(k, a)| (a, k)).collect();
        let delta = params.delta();

        let mut candidates: Vec<(BasisTag, Derivation<Integers>, i32)> = Vec::new();
        for alpha in &monomials {
            let deg = alpha.degree() as i32;
            match kind {
                AlgebraKind::W => {
                    for axis in 0..n {
                        let d = Derivation::monomial(&params, &Integers, alpha.clone(), axis, BigInt::one())?;
                        candidates.push((BasisTag::W { alpha: alpha.clone(), axis }, d, deg - 1));
                    }
                }
                AlgebraKind::S => {
                    for i in 0..n {
                        for j in i + 1..n {
                            let d = Derivation::special(&params, &Integers, i, j, alpha.clone())?;
                            if !d.is_zero() {
                                candidates.push((BasisTag::S { alpha: alpha.clone(), i, j }, d, deg - 2));
                            }
                        }
                    }
                }
                AlgebraKind::H | AlgebraKind::Hbar => {
                    if alpha.is_zero() || (kind == AlgebraKind::H && *alpha == delta) {
                        continue;
                    }
                    let d = Derivation::hamiltonian(&params, &Integers, hs.as_ref().expect("checked above"), alpha.clone())?;
                    candidates.push((BasisTag::H { alpha: alpha.clone() }, d, deg - 2));
                }
            }
        }

        let mut algebra = CartanAlgebra {
            kind,
            params,
            field,
            hamiltonian: hs,
            basis: Vec::new(),
            top_grade: -1,
            labels: FxHashMap::default(),
            dp_index,
            reducer_p: SpanReducer::new(field),
            reducer_q: SpanReducer::new(Rationals),
            structure: Vec::new(),
            structure_p: Vec::new(),
        };
        for (tag, d, grade) in candidates {
            let vp = algebra.coords_p(&d.reduce(&field));
            match algebra.reducer_p.insert(&vp) {
                Insert::Independent(_) => {}
                Insert::Dependent(_) if kind == AlgebraKind::S => continue,
                Insert::Dependent(_) => return Err(Error::ClosureFailure(format!("basis element {} is dependent", tag.label()))),
            }
            let vq = algebra.coords_int(&d).into_iter().map(|(k, c)| (k, Rationals.from_bigint(&c))).collect();
            if !matches!(algebra.reducer_q.insert(&vq), Insert::Independent(_)) {
                return Err(Error::ClosureFailure(format!("basis element {} is dependent over Q", tag.label())));
            }
            let label = tag.label();
            algebra.labels.insert(label.clone(), algebra.basis.len());
            algebra.top_grade = algebra.top_grade.max(grade);
            algebra.basis.push(BasisElement { label, tag, derivation: d, grade });
        }
        Ok(algebra)
    }

    fn compute_structure(&mut self) -> Result<()> {
        let dim = self.dim();
        let mut table: Vec<IntVec> = vec![Vec::new(); dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let br = self.basis[i].derivation.bracket(&self.basis[j].derivation)?;
                let coords = self
                    .decompose_int(&br)
                    .map_err(|_| Error::ClosureFailure(format!("[{}, {}] leaves the algebra", self.basis[i].label, self.basis[j].label)))?;
                table[j * dim + i] = coords.iter().map(|(k, c)| (*k, -c)).collect();
                table[i * dim + j] = coords;
            }
        }
        self.install_structure(table);
        Ok(())
    }

    fn install_structure(&mut self, table: Vec<IntVec>) {
        let field = self.field;
        self.structure_p = table.iter().map(|col| col.iter().map(|(k, c)| (*k, field.from_bigint(c))).filter(|(_, c)| *c != 0).collect()).collect();
        self.structure = table;
    }

    fn coord_index(&self, alpha: &MultiIndex, axis: usize) -> usize {
        self.dp_index[alpha] * self.params.n() + axis
    }

    fn coords_p(&self, d: &Derivation<PrimeField>) -> SparseVec<u64> {
        let mut v = SparseVec::new();
        for (axis, f) in d.coeffs().iter().enumerate() {
            for (alpha, c) in f.terms() {
                v.insert(self.coord_index(alpha, axis), *c);
            }
        }
        v
    }

    fn coords_int(&self, d: &Derivation<Integers>) -> SparseVec<BigInt> {
        let mut v = SparseVec::new();
        for (axis, f) in d.coeffs().iter().enumerate() {
            for (alpha, c) in f.terms() {
                v.insert(self.coord_index(alpha, axis), c.clone());
            }
        }
        v
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn params(&self) -> &Arc<FieldParams> {
        &self.params
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn hamiltonian(&self) -> Option<&HamiltonianStructure> {
        self.hamiltonian.as_ref()
    }

    /// Sign-convention tag recorded in serialized headers.
    pub fn sign_tag(&self) -> String {
        self.hamiltonian.as_ref().map_or_else(|| "none".to_string(), |hs| hs.tag())
    }

    /// Same kind, parameters and sign convention.
    pub fn same_as(&self, other: &CartanAlgebra) -> bool {
        std::ptr::eq(self, other) || (self.kind == other.kind && self.params == other.params && self.hamiltonian == other.hamiltonian)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn element(&self, i: usize) -> &BasisElement {
        &self.basis[i]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.basis[i].label
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.get(label).copied()
    }

    /// Index of the basis element with the given tag.
    pub fn index_of_tag(&self, tag: &BasisTag) -> Option<usize> {
        self.index_of(&tag.label())
    }

    pub fn grade(&self, i: usize) -> i32 {
        self.basis[i].grade
    }

    /// Top grade `r`, taken from the constructed basis.
    pub fn top_grade(&self) -> i32 {
        self.top_grade
    }

    /// Integer structure constants of `[b_i, b_j]`.
    pub fn structure_constants(&self, i: usize, j: usize) -> &[(usize, BigInt)] {
        &self.structure[i * self.dim() + j]
    }

    /// Structure constants of `[b_i, b_j]` reduced mod `p` (nonzero entries only).
    pub fn structure_mod_p(&self, i: usize, j: usize) -> &[(usize, u64)] {
        &self.structure_p[i * self.dim() + j]
    }

    /// Coordinates of `d` in the basis over `F_p`.
    pub fn decompose(&self, d: &Derivation<PrimeField>) -> Result<Vec<u64>> {
        if d.params() != &self.params {
            return Err(Error::ParamMismatch);
        }
        let coords = self.reducer_p.solve(&self.coords_p(d)).ok_or(Error::NotInSpan)?;
        let mut out = vec![0; self.dim()];
        for (k, c) in coords {
            out[k] = c;
        }
        Ok(out)
    }

    /// Integral coordinates of `d`. Components of `d` outside the ℤ-span must
    /// vanish modulo `p` (truncation leftovers of the integral lift).
    pub fn decompose_int(&self, d: &Derivation<Integers>) -> Result<IntVec> {
        if d.params() != &self.params {
            return Err(Error::ParamMismatch);
        }
        let v: SparseVec<_> = self.coords_int(d).into_iter().map(|(k, c)| (k, Rationals.from_bigint(&c))).collect();
        let (coords, residual) = self.reducer_q.reduce(&v);
        let p = BigInt::from(self.params.p());
        for c in residual.values() {
            if !c.is_integer() || !(c.to_integer() % &p).is_zero() {
                return Err(Error::NotInSpan);
            }
        }
        let mut out = Vec::with_capacity(coords.len());
        for (k, c) in coords {
            if !c.is_integer() {
                return Err(Error::ClosureFailure("coordinates have no integral lift".into()));
            }
            out.push((k, c.to_integer()));
        }
        Ok(out)
    }

    /// Basis indices of `𝓛_i = L_i ⊕ … ⊕ L_r`; `i = r + 1` gives the empty set.
    pub fn filtration_basis(&self, i: i32) -> Result<Vec<usize>> {
        if i < -1 || i > self.top_grade + 1 {
            return Err(Error::FiltrationOutOfRange { index: i, max: self.top_grade + 1 });
        }
        Ok((0..self.dim()).filter(|&k| self.basis[k].grade >= i).collect())
    }

    /// Integral coordinates of `∂_axis`.
    pub fn partial_coords(&self, axis: usize) -> Result<IntVec> {
        let d = Derivation::partial(&self.params, &Integers, axis)?;
        self.decompose_int(&d)
    }

    /// Index of the Hamiltonian element `D(α)`, if present.
    pub fn hamiltonian_index(&self, alpha: &MultiIndex) -> Option<usize> {
        self.index_of_tag(&BasisTag::H { alpha: alpha.clone() })
    }

    /// Index of `u = D(δ)` in `H̄`.
    pub fn top_element(&self) -> Option<usize> {
        match self.kind {
            AlgebraKind::Hbar => self.hamiltonian_index(&self.params.delta()),
            _ => None,
        }
    }
}
