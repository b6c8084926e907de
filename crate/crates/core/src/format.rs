//! Canonical text and JSON forms of symmetric-algebra elements and
//! structure-constant tables.
//!
//! Two variable schemes exist for Hamiltonian algebras. `basis` names the
//! variables by basis label (`D(1,2)`). `u` uses `u_{i,j} = i! j! D(i,j)`,
//! the image of the ordinary monomial `x_1^i x_2^j`; coefficients are
//! rescaled accordingly, which needs every `α!` to be invertible mod `p`.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arith::{factorial_mod, inv_mod, FieldParams, MultiIndex};
use crate::cartan::{AlgebraKind, BasisTag, CartanAlgebra, HamiltonianStructure, IntVec};
use crate::error::{Error, Result};
use crate::ring::{Ring, RingKind};
use crate::symmetric::{Monomial, SymPolynomial};

pub const FORMAT_VERSION: u32 = 1;
pub const POLY_FORMAT: &str = "cartan-sym";
pub const TABLE_FORMAT: &str = "cartan-structure";
pub const RECORD_FORMAT: &str = "cartan-record";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariableScheme {
    #[serde(rename = "basis")]
    Basis,
    #[serde(rename = "u")]
    Monomial,
}

impl FromStr for VariableScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basis" => Ok(VariableScheme::Basis),
            "u" => Ok(VariableScheme::Monomial),
            _ => Err(Error::InvalidParams(format!("unknown variable scheme `{s}`"))),
        }
    }
}

impl VariableScheme {
    /// `u` when it is available for the algebra and ring, `basis` otherwise.
    pub fn preferred(algebra: &CartanAlgebra, ring: RingKind) -> Self {
        if monomial_scheme_available(algebra, ring) {
            VariableScheme::Monomial
        } else {
            VariableScheme::Basis
        }
    }
}

fn monomial_scheme_available(algebra: &CartanAlgebra, ring: RingKind) -> bool {
    let p = algebra.params().p() as u32;
    algebra.kind().is_hamiltonian() && ring == RingKind::ModP && algebra.params().delta().entries().iter().all(|&d| d < p)
}

fn check_scheme(algebra: &CartanAlgebra, ring: RingKind, scheme: VariableScheme) -> Result<()> {
    if scheme == VariableScheme::Monomial && !monomial_scheme_available(algebra, ring) {
        return Err(Error::InvalidParams("the u scheme needs a Hamiltonian algebra over F_p with every exponent below p".into()));
    }
    Ok(())
}

fn u_label(alpha: &MultiIndex) -> String {
    let parts: Vec<String> = alpha.entries().iter().map(u32::to_string).collect();
    format!("u_{{{}}}", parts.join(","))
}

fn parse_u_label(s: &str) -> Option<MultiIndex> {
    let inner = s.strip_prefix("u_{")?.strip_suffix('}')?;
    inner.split(',').map(|x| x.trim().parse::<u32>().ok()).collect::<Option<Vec<_>>>().map(MultiIndex::new)
}

/// `Π α_i!` mod p for a Hamiltonian basis element.
fn weight(algebra: &CartanAlgebra, index: usize) -> u64 {
    let p = algebra.params().p();
    algebra.element(index).tag.alpha().entries().iter().fold(1, |acc, &a| acc * factorial_mod(a as u64, p) % p)
}

/// Name of basis element `index` in the given scheme.
pub fn variable_label(algebra: &CartanAlgebra, index: usize, scheme: VariableScheme) -> String {
    match scheme {
        VariableScheme::Basis => algebra.label(index).to_string(),
        VariableScheme::Monomial => u_label(algebra.element(index).tag.alpha()),
    }
}

/// Inverse of [`variable_label`].
pub fn resolve_label(algebra: &CartanAlgebra, label: &str, scheme: VariableScheme) -> Result<usize> {
    let found = match scheme {
        VariableScheme::Basis => algebra.index_of(label),
        VariableScheme::Monomial => parse_u_label(label).and_then(|a| algebra.index_of_tag(&BasisTag::H { alpha: a })),
    };
    found.ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

/// Factor `Π (α!)^{±e}` converting a coefficient between schemes.
fn rescale<R: Ring>(f: &SymPolynomial<R>, m: &Monomial, to_u: bool) -> R::Elem {
    let a = f.algebra();
    let p = a.params().p();
    let mut s = 1u64;
    for (i, e) in m.entries() {
        let w = weight(a, i);
        let w = if to_u { inv_mod(w, p) } else { w };
        for _ in 0..e {
            s = s * w % p;
        }
    }
    f.ring().from_bigint(&BigInt::from(s))
}

/// A term as named variables with exponents and an integer coefficient.
pub type NamedTerm = (Vec<(String, u32)>, BigInt);

/// Terms in canonical order, with variable names and coefficients in `scheme`.
pub fn scheme_terms<R: Ring>(f: &SymPolynomial<R>, scheme: VariableScheme) -> Result<Vec<NamedTerm>> {
    let a = f.algebra();
    check_scheme(a, f.ring().kind(), scheme)?;
    let ring = f.ring();
    Ok(f.sorted_terms()
        .into_iter()
        .map(|(m, c)| {
            let c = match scheme {
                VariableScheme::Basis => c.clone(),
                VariableScheme::Monomial => ring.mul(c, &rescale(f, m, true)),
            };
            let vars = m.entries().map(|(i, e)| (variable_label(a, i, scheme), e)).collect();
            (vars, ring.to_bigint(&c))
        })
        .collect())
}

/// Canonical text, e.g. `2*u_{0,1}*u_{2,1} + u_{1,1}^2`.
pub fn render_text<R: Ring>(f: &SymPolynomial<R>, scheme: VariableScheme) -> Result<String> {
    let terms = scheme_terms(f, scheme)?;
    if terms.is_empty() {
        return Ok("0".to_string());
    }
    let mut out = String::new();
    for (k, (vars, c)) in terms.iter().enumerate() {
        let negative = c.is_negative();
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let abs = c.abs();
        let mut factors: Vec<String> = Vec::new();
        if !abs.is_one() || vars.is_empty() {
            factors.push(abs.to_string());
        }
        for (name, e) in vars {
            factors.push(if *e == 1 { name.clone() } else { format!("{name}^{e}") });
        }
        out.push_str(&factors.join("*"));
    }
    Ok(out)
}

/// Text in basis labels; used by `Display`.
pub fn render_basis<R: Ring>(f: &SymPolynomial<R>) -> String {
    render_text(f, VariableScheme::Basis).expect("basis scheme always applies")
}

fn resolve_factor(algebra: &CartanAlgebra, factor: &str, scheme: VariableScheme) -> Result<(usize, u32)> {
    if let Ok(i) = resolve_label(algebra, factor, scheme) {
        return Ok((i, 1));
    }
    if let Some((name, exp)) = factor.rsplit_once('^') {
        if let Ok(e) = exp.parse::<u32>() {
            return Ok((resolve_label(algebra, name, scheme)?, e));
        }
    }
    Err(Error::UnknownLabel(factor.to_string()))
}

/// Parses canonical text (any term order, optional whitespace).
pub fn parse_text<R: Ring>(algebra: &Arc<CartanAlgebra>, ring: &R, text: &str, scheme: VariableScheme) -> Result<SymPolynomial<R>> {
    check_scheme(algebra, ring.kind(), scheme)?;
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Malformed("empty polynomial text".into()));
    }
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    for ch in compact.chars() {
        if ch == '+' || ch == '-' {
            if !current.is_empty() {
                pieces.push((negative, std::mem::take(&mut current)));
            } else if !pieces.is_empty() || negative {
                return Err(Error::Malformed(format!("dangling sign in `{text}`")));
            }
            negative = ch == '-';
        } else {
            current.push(ch);
        }
    }
    if current.is_empty() {
        return Err(Error::Malformed(format!("dangling sign in `{text}`")));
    }
    pieces.push((negative, current));

    let mut out = SymPolynomial::zero(algebra, ring);
    for (negative, piece) in pieces {
        let mut coeff = BigInt::one();
        let mut pairs = Vec::new();
        for factor in piece.split('*') {
            if factor.is_empty() {
                return Err(Error::Malformed(format!("empty factor in `{piece}`")));
            }
            if factor.chars().all(|c| c.is_ascii_digit()) {
                coeff *= factor.parse::<BigInt>().map_err(|e| Error::Malformed(e.to_string()))?;
            } else {
                pairs.push(resolve_factor(algebra, factor, scheme)?);
            }
        }
        if negative {
            coeff = -coeff;
        }
        let m = Monomial::from_pairs(pairs);
        let single = SymPolynomial::from_terms(algebra, ring, [(m.clone(), ring.from_bigint(&coeff))])?;
        let single = match scheme {
            VariableScheme::Basis => single,
            VariableScheme::Monomial => single.scale(&rescale(&single, &m, false)),
        };
        out = out.add(&single)?;
    }
    Ok(out)
}

fn coeff_value(c: &BigInt) -> Value {
    match c.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(c.to_string()),
    }
}

fn value_coeff(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| Error::Malformed(format!("coefficient {n} is not an integer"))),
        Value::String(s) => s.parse::<BigInt>().map_err(|_| Error::Malformed(format!("coefficient `{s}` is not an integer"))),
        other => Err(Error::Malformed(format!("coefficient {other} is not an integer"))),
    }
}

/// Header shared by every document: algebra identity and sign convention.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraHeader {
    pub kind: AlgebraKind,
    pub p: u64,
    pub n: usize,
    pub m: Vec<u32>,
    pub signs: String,
}

impl AlgebraHeader {
    pub fn of(algebra: &CartanAlgebra) -> Self {
        let params = algebra.params();
        AlgebraHeader { kind: algebra.kind(), p: params.p(), n: params.n(), m: params.m().to_vec(), signs: algebra.sign_tag() }
    }

    pub fn check(&self, algebra: &CartanAlgebra) -> Result<()> {
        let own = Self::of(algebra);
        if *self != own {
            return Err(Error::Malformed(format!(
                "document is for {} p={} m={:?} signs={}, algebra is {} p={} m={:?} signs={}",
                self.kind, self.p, self.m, self.signs, own.kind, own.p, own.m, own.signs
            )));
        }
        Ok(())
    }

    fn params(&self) -> Result<FieldParams> {
        if self.m.len() != self.n {
            return Err(Error::Malformed("m has the wrong length".into()));
        }
        FieldParams::new(self.p, self.m.clone())
    }

    fn hamiltonian(&self) -> Result<Option<HamiltonianStructure>> {
        if !self.kind.is_hamiltonian() {
            return Ok(None);
        }
        let standard = HamiltonianStructure::standard(self.n)?;
        if standard.tag() != self.signs {
            return Err(Error::Malformed(format!("unsupported sign convention `{}`", self.signs)));
        }
        Ok(Some(standard))
    }

    /// Builds the algebra the header describes (standard sign convention only).
    pub fn build(&self) -> Result<Arc<CartanAlgebra>> {
        CartanAlgebra::build(self.kind, self.params()?, self.hamiltonian()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDocument {
    pub monomial: Vec<(String, u32)>,
    pub coefficient: Value,
}

/// Structured form of a symmetric-algebra element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyDocument {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub header: AlgebraHeader,
    pub ring: RingKind,
    pub variables: VariableScheme,
    pub terms: Vec<TermDocument>,
}

pub fn serialize<R: Ring>(f: &SymPolynomial<R>, scheme: VariableScheme) -> Result<PolyDocument> {
    let terms = scheme_terms(f, scheme)?.into_iter().map(|(monomial, c)| TermDocument { monomial, coefficient: coeff_value(&c) }).collect();
    Ok(PolyDocument {
        format: POLY_FORMAT.to_string(),
        version: FORMAT_VERSION,
        header: AlgebraHeader::of(f.algebra()),
        ring: f.ring().kind(),
        variables: scheme,
        terms,
    })
}

fn check_version(format: &str, expected_format: &str, version: u32) -> Result<()> {
    if format != expected_format {
        return Err(Error::Malformed(format!("expected format `{expected_format}`, found `{format}`")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch { found: version, expected: FORMAT_VERSION });
    }
    Ok(())
}

pub fn deserialize<R: Ring>(doc: &PolyDocument, algebra: &Arc<CartanAlgebra>, ring: &R) -> Result<SymPolynomial<R>> {
    check_version(&doc.format, POLY_FORMAT, doc.version)?;
    doc.header.check(algebra)?;
    if doc.ring != ring.kind() {
        return Err(Error::Malformed(format!("document ring {:?} differs from requested {:?}", doc.ring, ring.kind())));
    }
    check_scheme(algebra, ring.kind(), doc.variables)?;
    let mut out = SymPolynomial::zero(algebra, ring);
    for term in &doc.terms {
        let mut pairs = Vec::with_capacity(term.monomial.len());
        for (label, e) in &term.monomial {
            if *e == 0 {
                return Err(Error::Malformed(format!("zero exponent on `{label}`")));
            }
            pairs.push((resolve_label(algebra, label, doc.variables)?, *e));
        }
        let m = Monomial::from_pairs(pairs);
        let c = ring.from_bigint(&value_coeff(&term.coefficient)?);
        let single = SymPolynomial::from_terms(algebra, ring, [(m.clone(), c)])?;
        let single = match doc.variables {
            VariableScheme::Basis => single,
            VariableScheme::Monomial => single.scale(&rescale(&single, &m, false)),
        };
        out = out.add(&single)?;
    }
    Ok(out)
}

/// Pretty JSON with a trailing newline; deterministic for a given value.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub label: String,
    pub grade: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub terms: Vec<(String, Value)>,
}

/// Integer structure constants `[b_i, b_j]` for `i < j` with nonzero bracket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureTableDocument {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub header: AlgebraHeader,
    pub basis: Vec<BasisEntry>,
    pub brackets: Vec<BracketEntry>,
}

pub fn export_structure(algebra: &CartanAlgebra) -> StructureTableDocument {
    let dim = algebra.dim();
    let basis = algebra.basis().iter().map(|b| BasisEntry { label: b.label.clone(), grade: b.grade }).collect();
    let mut brackets = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            let terms = algebra.structure_constants(i, j);
            if terms.is_empty() {
                continue;
            }
            brackets.push(BracketEntry {
                left: algebra.label(i).to_string(),
                right: algebra.label(j).to_string(),
                terms: terms.iter().map(|(k, c)| (algebra.label(*k).to_string(), coeff_value(c))).collect(),
            });
        }
    }
    StructureTableDocument { format: TABLE_FORMAT.to_string(), version: FORMAT_VERSION, header: AlgebraHeader::of(algebra), basis, brackets }
}

/// Rebuilds the algebra from a table, checking every entry against the bracket mod `p`.
pub fn import_structure(doc: &StructureTableDocument) -> Result<Arc<CartanAlgebra>> {
    check_version(&doc.format, TABLE_FORMAT, doc.version)?;
    let skeleton = CartanAlgebra::build(doc.header.kind, doc.header.params()?, doc.header.hamiltonian()?)?;
    let labels: Vec<&str> = doc.basis.iter().map(|b| b.label.as_str()).collect();
    let own: Vec<&str> = skeleton.basis().iter().map(|b| b.label.as_str()).collect();
    if labels != own {
        return Err(Error::Malformed("basis labels differ from the constructed basis".into()));
    }
    let dim = skeleton.dim();
    let index = |l: &str| skeleton.index_of(l).ok_or_else(|| Error::UnknownLabel(l.to_string()));
    let mut table: Vec<IntVec> = vec![Vec::new(); dim * dim];
    for entry in &doc.brackets {
        let (i, j) = (index(&entry.left)?, index(&entry.right)?);
        let mut col = Vec::with_capacity(entry.terms.len());
        for (label, c) in &entry.terms {
            let c = value_coeff(c)?;
            if !c.is_zero() {
                col.push((index(label)?, c));
            }
        }
        col.sort_by_key(|(k, _)| *k);
        table[j * dim + i] = col.iter().map(|(k, c)| (*k, -c)).collect();
        table[i * dim + j] = col;
    }
    CartanAlgebra::with_structure(doc.header.kind, doc.header.params()?, doc.header.hamiltonian()?, table)
}
