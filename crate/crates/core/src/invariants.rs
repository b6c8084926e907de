//! The `Δ` series of the Hamiltonian algebras: `Δ_i = d^(δ)(u^i)` over ℤ,
//! restriction to `u = 0`, the `φ` normalization, `Δ_i^*`, the `λ` grading
//! and independence bookkeeping.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Zero};
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::arith::FieldParams;
use crate::budget::Budget;
use crate::cartan::{AlgebraKind, CartanAlgebra, HamiltonianStructure};
use crate::error::{Error, Result};
use crate::format::{self, PolyDocument, VariableScheme, FORMAT_VERSION, RECORD_FORMAT};
use crate::linalg::{Insert, SpanReducer, SparseVec};
use crate::ring::{p_adic_valuation, Integers, PrimeField, Ring};
use crate::symmetric::{DeltaOptions, Monomial, SymPolynomial};

/// `H̄` together with its subalgebra `H`, sharing parameters and signs.
#[derive(Clone, Debug)]
pub struct HamiltonianPair {
    pub hbar: Arc<CartanAlgebra>,
    pub h: Arc<CartanAlgebra>,
}

impl HamiltonianPair {
    pub fn new(params: FieldParams, hs: HamiltonianStructure) -> Result<Self> {
        let hbar = CartanAlgebra::build_hbar(params.clone(), hs.clone())?;
        let h = CartanAlgebra::build_h(params, hs)?;
        Ok(HamiltonianPair { hbar, h })
    }

    /// `H̄_2` and `H_2` with `m = (1, 1)` and the standard signs.
    pub fn rank_two(p: u64) -> Result<Self> {
        Self::new(FieldParams::uniform(p, 2)?, HamiltonianStructure::standard(2)?)
    }

    pub fn p(&self) -> u64 {
        self.h.params().p()
    }

    pub fn field(&self) -> PrimeField {
        *self.h.field()
    }

    /// Index of `u = D(δ)` in `H̄`.
    pub fn u(&self) -> usize {
        self.hbar.top_element().expect("Hbar has a top element")
    }

    /// The algebra of the pair whose kind is `kind`.
    pub fn algebra(&self, kind: AlgebraKind) -> Result<&Arc<CartanAlgebra>> {
        match kind {
            AlgebraKind::H => Ok(&self.h),
            AlgebraKind::Hbar => Ok(&self.hbar),
            other => Err(Error::WrongKind { expected: "H or Hbar".into(), found: other.to_string() }),
        }
    }
}

fn require_kind(a: &CartanAlgebra, kind: AlgebraKind) -> Result<()> {
    if a.kind() != kind {
        return Err(Error::WrongKind { expected: kind.to_string(), found: a.kind().to_string() });
    }
    Ok(())
}

/// Largest power accepted by [`compute_delta`]: `max(p - 1, 2(p - 2))`.
pub fn max_delta_power(p: u64) -> u32 {
    (p - 1).max(2 * p.saturating_sub(2)) as u32
}

/// `Δ_i = d^(δ)(u^i)` over the integers.
pub fn compute_delta(hbar: &Arc<CartanAlgebra>, i: u32, opts: &DeltaOptions) -> Result<SymPolynomial<Integers>> {
    require_kind(hbar, AlgebraKind::Hbar)?;
    let max = max_delta_power(hbar.params().p());
    if i < 2 || i > max {
        return Err(Error::PowerOutOfRange { power: i, min: 2, max });
    }
    let u = SymPolynomial::var(hbar, &Integers, hbar.top_element().expect("Hbar has a top element"))?;
    u.pow(i).d_delta_with(opts)
}

/// Drops the monomials containing `u` and reinterprets the rest over `h`.
pub fn restrict_u_zero<R: Ring>(f: &SymPolynomial<R>, h: &Arc<CartanAlgebra>) -> Result<SymPolynomial<R>> {
    let hbar = f.algebra();
    require_kind(hbar, AlgebraKind::Hbar)?;
    require_kind(h, AlgebraKind::H)?;
    if hbar.params() != h.params() || hbar.hamiltonian() != h.hamiltonian() {
        return Err(Error::ParamMismatch);
    }
    Ok(f.transfer(h, |i| h.index_of(hbar.label(i))))
}

/// Inverse of [`restrict_u_zero`] on `u`-free polynomials: embeds `S(H)` into `S(H̄)`.
pub fn embed_in_hbar<R: Ring>(f: &SymPolynomial<R>, hbar: &Arc<CartanAlgebra>) -> Result<SymPolynomial<R>> {
    require_kind(f.algebra(), AlgebraKind::H)?;
    require_kind(hbar, AlgebraKind::Hbar)?;
    let h = f.algebra();
    Ok(f.transfer(hbar, |i| hbar.index_of(h.label(i))))
}

/// `φ(F) = F / p^m mod p`, `m` the `p`-adic valuation of the coefficient gcd.
pub fn phi_normalize(f: &SymPolynomial<Integers>) -> Result<(SymPolynomial<PrimeField>, u32)> {
    let field = *f.algebra().field();
    let p = field.p();
    let gcd = f.terms().fold(BigInt::zero(), |g, (_, c)| g.gcd(c));
    let m = p_adic_valuation(&gcd, p).ok_or(Error::ZeroInput)?;
    let divisor = BigInt::from(p).pow(m);
    let reduced = f.map_ring(&field, |c| field.from_bigint(&(c / &divisor)));
    Ok((reduced, m))
}

/// `λ` of a single variable: `|δ| - |α|` for `D(α)`.
pub fn lambda_of_var(algebra: &CartanAlgebra, index: usize) -> Option<i64> {
    if !algebra.kind().is_hamiltonian() {
        return None;
    }
    let delta = algebra.params().delta().degree() as i64;
    Some(delta - algebra.element(index).tag.alpha().degree() as i64)
}

/// Additive `λ` of a monomial.
pub fn lambda_value(algebra: &CartanAlgebra, m: &Monomial) -> Option<i64> {
    m.entries().map(|(i, e)| lambda_of_var(algebra, i).map(|l| l * e as i64)).sum()
}

/// Common `λ` of all monomials, or `None` when mixed, zero or not Hamiltonian.
pub fn lambda_homogeneity<R: Ring>(f: &SymPolynomial<R>) -> Option<i64> {
    let a = f.algebra();
    let mut values = f.terms().map(|(m, _)| lambda_value(a, m));
    let first = values.next()??;
    values.all(|v| v == Some(first)).then_some(first)
}

/// Whether `f` is a `p`-th power in `S(L)` over `F_p`: every exponent is divisible by `p`.
pub fn is_pth_power(f: &SymPolynomial<PrimeField>) -> bool {
    let p = f.ring().p() as u32;
    f.terms().all(|(m, _)| m.entries().all(|(_, e)| e % p == 0))
}

/// A verified invariant `z = d^(δ)(F)` with its generator `F`.
#[derive(Clone, Debug)]
pub struct InvariantRecord {
    label: String,
    power: u32,
    invariant: SymPolynomial<PrimeField>,
    generator: SymPolynomial<PrimeField>,
    lambda_value: Option<i64>,
    term_count: usize,
    p_power_m: u32,
}

impl InvariantRecord {
    /// Builds the record and verifies it; `invariant` must live over `H`,
    /// `generator` over `H` or `H̄`.
    pub fn new(
        label: impl Into<String>,
        power: u32,
        generator: SymPolynomial<PrimeField>,
        invariant: SymPolynomial<PrimeField>,
        p_power_m: u32,
        pair: &HamiltonianPair,
        opts: &DeltaOptions,
    ) -> Result<Self> {
        let record = InvariantRecord {
            label: label.into(),
            power,
            lambda_value: lambda_homogeneity(&invariant),
            term_count: invariant.len(),
            invariant,
            generator,
            p_power_m,
        };
        record.verify(pair, opts)?;
        Ok(record)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn invariant(&self) -> &SymPolynomial<PrimeField> {
        &self.invariant
    }

    pub fn generator(&self) -> &SymPolynomial<PrimeField> {
        &self.generator
    }

    pub fn lambda_value(&self) -> Option<i64> {
        self.lambda_value
    }

    pub fn term_count(&self) -> usize {
        self.term_count
    }

    pub fn p_power_m(&self) -> u32 {
        self.p_power_m
    }

    /// Re-checks `invariant = d^(δ)(generator)`, invariance under `H`,
    /// the term count, `λ` bookkeeping and that the invariant is not a `p`-th power.
    pub fn verify(&self, pair: &HamiltonianPair, opts: &DeltaOptions) -> Result<()> {
        let fail = |msg: String| Err(Error::VerificationFailed(format!("{}: {msg}", self.label)));
        if !self.invariant.algebra().same_as(&pair.h) {
            return fail("invariant must live over H".into());
        }
        let image = self.generator.d_delta_with(opts)?;
        let image = match self.generator.algebra().kind() {
            AlgebraKind::H if self.generator.algebra().same_as(&pair.h) => image,
            AlgebraKind::Hbar if self.generator.algebra().same_as(&pair.hbar) => {
                if image.contains_var(pair.u()) {
                    return fail("d_delta of the generator involves u".into());
                }
                restrict_u_zero(&image, &pair.h)?
            }
            _ => return fail("generator must live over H or Hbar of the same pair".into()),
        };
        if image != self.invariant {
            return fail("invariant differs from d_delta(generator)".into());
        }
        if self.invariant.is_zero() {
            return fail("invariant is zero".into());
        }
        if let Some((b, _)) = self.invariant.invariance().witness {
            return fail(format!("not annihilated by {}", pair.h.label(b)));
        }
        if self.term_count != self.invariant.len() {
            return fail("term count differs from the invariant".into());
        }
        if self.lambda_value != lambda_homogeneity(&self.invariant) {
            return fail("stored lambda differs from the invariant".into());
        }
        let delta = pair.h.params().delta().degree() as i64;
        if let (Some(li), Some(lg)) = (self.lambda_value, lambda_homogeneity(&self.generator)) {
            if li != lg + delta {
                return fail(format!("lambda {li} is not generator lambda {lg} + {delta}"));
            }
        }
        if is_pth_power(&self.invariant) {
            return fail("invariant is a p-th power".into());
        }
        Ok(())
    }

    pub fn to_document(&self) -> Result<RecordDocument> {
        let doc = |f: &SymPolynomial<PrimeField>| format::serialize(f, VariableScheme::preferred(f.algebra(), f.ring().kind()));
        Ok(RecordDocument {
            format: RECORD_FORMAT.to_string(),
            version: FORMAT_VERSION,
            label: self.label.clone(),
            power: self.power,
            p_power_m: self.p_power_m,
            lambda: self.lambda_value,
            term_count: self.term_count,
            generator: doc(&self.generator)?,
            invariant: doc(&self.invariant)?,
        })
    }

    /// Reads a record document and verifies it against `pair`.
    pub fn from_document(doc: &RecordDocument, pair: &HamiltonianPair, opts: &DeltaOptions) -> Result<Self> {
        if doc.format != RECORD_FORMAT {
            return Err(Error::Malformed(format!("expected format `{RECORD_FORMAT}`, found `{}`", doc.format)));
        }
        if doc.version != FORMAT_VERSION {
            return Err(Error::VersionMismatch { found: doc.version, expected: FORMAT_VERSION });
        }
        let field = pair.field();
        let generator = format::deserialize(&doc.generator, pair.algebra(doc.generator.header.kind)?, &field)?;
        let invariant = format::deserialize(&doc.invariant, pair.algebra(doc.invariant.header.kind)?, &field)?;
        let record = InvariantRecord {
            label: doc.label.clone(),
            power: doc.power,
            invariant,
            generator,
            lambda_value: doc.lambda,
            term_count: doc.term_count,
            p_power_m: doc.p_power_m,
        };
        record.verify(pair, opts)?;
        Ok(record)
    }
}

/// Serialized [`InvariantRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct RecordDocument {
    pub format: String,
    pub version: u32,
    pub label: String,
    pub power: u32,
    pub p_power_m: u32,
    pub lambda: Option<i64>,
    pub term_count: usize,
    pub generator: PolyDocument,
    pub invariant: PolyDocument,
}

/// Outcome of [`delta_star`]: a verified record, a vanishing result, or a
/// nonzero candidate that fails invariance.
#[derive(Clone, Debug)]
pub enum PipelineResult {
    Record(InvariantRecord),
    Null { power: u32, label: String, p_power_m: Option<u32>, reason: String },
    NotInvariant { power: u32, label: String, p_power_m: u32, term_count: usize, witness: String },
}

impl PipelineResult {
    pub fn record(&self) -> Option<&InvariantRecord> {
        match self {
            PipelineResult::Record(r) => Some(r),
            _ => None,
        }
    }
}

pub fn delta_label(i: u32) -> String {
    format!("Delta_{i}")
}

pub fn delta_star_label(i: u32) -> String {
    format!("Delta_{i}_star")
}

/// Runs the pipeline for power `i`.
///
/// When `Δ_i mod p` is nonzero and free of `u` it is recorded directly
/// (label `Delta_i`, generator `u^i`). Otherwise the record is
/// `Δ_i^* = d^(δ)(φ(Δ_i|_{u=0}))` with generator `φ(Δ_i|_{u=0})`
/// (label `Delta_i_star`).
pub fn delta_star(pair: &HamiltonianPair, i: u32, opts: &DeltaOptions) -> Result<PipelineResult> {
    let p = pair.p();
    let max = 2 * (p as u32).saturating_sub(2);
    if i < 2 || i > max || !i.is_multiple_of(2) {
        return Err(Error::PowerOutOfRange { power: i, min: 2, max });
    }
    let field = pair.field();
    let delta = compute_delta(&pair.hbar, i, opts)?;
    let reduced = delta.reduce(&field);
    if !reduced.is_zero() && !reduced.contains_var(pair.u()) {
        let u = SymPolynomial::var(&pair.hbar, &field, pair.u())?;
        let invariant = restrict_u_zero(&reduced, &pair.h)?;
        let record = InvariantRecord::new(delta_label(i), i, u.pow(i), invariant, 0, pair, opts)?;
        return Ok(PipelineResult::Record(record));
    }
    let label = delta_star_label(i);
    let restricted = restrict_u_zero(&delta, &pair.h)?;
    if restricted.is_zero() {
        return Ok(PipelineResult::Null { power: i, label, p_power_m: None, reason: "restriction to u = 0 vanishes".into() });
    }
    let (generator, m) = phi_normalize(&restricted)?;
    let invariant = generator.d_delta_with(opts)?;
    if invariant.is_zero() {
        return Ok(PipelineResult::Null { power: i, label, p_power_m: Some(m), reason: "d_delta of the normalized restriction vanishes".into() });
    }
    if let Some((b, _)) = invariant.invariance().witness {
        let witness = pair.h.label(b).to_string();
        return Ok(PipelineResult::NotInvariant { power: i, label, p_power_m: m, term_count: invariant.len(), witness });
    }
    let record = InvariantRecord::new(label, i, generator, invariant, m, pair, opts)?;
    Ok(PipelineResult::Record(record))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateTrace {
    /// Product of earlier records, e.g. `Delta_2^2*Delta_4_star`.
    pub product: String,
    pub lambda: i64,
    pub lambda_matches: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No product of earlier records has the same degree.
    NoCandidates,
    /// Candidates exist but none has the same `λ`.
    NoLambdaMatch,
    /// The record is outside the span of the `λ`-matched candidates.
    NotInSpan,
    /// The record is a combination of the `λ`-matched candidates.
    InSpan,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceEntry {
    pub label: String,
    pub degree: u32,
    pub lambda: i64,
    pub candidates: Vec<CandidateTrace>,
    pub verdict: Verdict,
    /// For `InSpan`: the record as a combination of candidate products.
    pub combination: Vec<(String, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub entries: Vec<IndependenceEntry>,
    pub independent: bool,
    pub count: usize,
}

fn exponent_vectors(degrees: &[u32], target: u32) -> Vec<Vec<u32>> {
    fn rec(k: usize, degrees: &[u32], left: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == degrees.len() {
            if left == 0 {
                out.push(acc.clone());
            }
            return;
        }
        for e in 0..=left / degrees[k] {
            acc.push(e);
            rec(k + 1, degrees, left - e * degrees[k], acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, degrees, target, &mut Vec::new(), &mut out);
    out
}

fn product_name(labels: &[&str], exps: &[u32]) -> String {
    let parts: Vec<String> =
        labels.iter().zip(exps).filter(|(_, &e)| e > 0).map(|(l, &e)| if e == 1 { l.to_string() } else { format!("{l}^{e}") }).collect();
    parts.join("*")
}

/// For each record, compares it with all products of earlier records of the
/// same degree: by `λ` first, then by linear algebra over `F_p` for the
/// `λ`-matched products.
pub fn independence_report(records: &[InvariantRecord], budget: &Budget) -> Result<IndependenceReport> {
    let mut degrees = Vec::with_capacity(records.len());
    let mut lambdas = Vec::with_capacity(records.len());
    for r in records {
        let degree = r.invariant.homogeneous_degree().ok_or_else(|| Error::NotHomogeneous(format!("{} has mixed degree", r.label)))?;
        let lambda = lambda_homogeneity(&r.invariant).ok_or_else(|| Error::NotHomogeneous(r.label.clone()))?;
        if let Some(first) = records.first() {
            if !first.invariant.algebra().same_as(r.invariant.algebra()) {
                return Err(Error::AlgebraMismatch);
            }
        }
        degrees.push(degree);
        lambdas.push(lambda);
    }
    let labels: Vec<&str> = records.iter().map(|r| r.label.as_str()).collect();
    let mut entries = Vec::with_capacity(records.len());
    for k in 0..records.len() {
        let mut candidates = Vec::new();
        let mut matched = Vec::new();
        for exps in exponent_vectors(&degrees[..k], degrees[k]) {
            let lambda: i64 = exps.iter().zip(&lambdas).map(|(&e, &l)| e as i64 * l).sum();
            let lambda_matches = lambda == lambdas[k];
            if lambda_matches {
                matched.push(exps.clone());
            }
            candidates.push(CandidateTrace { product: product_name(&labels[..k], &exps), lambda, lambda_matches });
        }
        let mut combination = Vec::new();
        let verdict = if candidates.is_empty() {
            Verdict::NoCandidates
        } else if matched.is_empty() {
            Verdict::NoLambdaMatch
        } else {
            match span_coordinates(records, &matched, &records[k].invariant, budget)? {
                Some(coords) => {
                    combination = coords.into_iter().map(|(g, c)| (product_name(&labels[..k], &matched[g]), c)).collect();
                    Verdict::InSpan
                }
                None => Verdict::NotInSpan,
            }
        };
        entries.push(IndependenceEntry { label: records[k].label.clone(), degree: degrees[k], lambda: lambdas[k], candidates, verdict, combination });
    }
    let count = entries.iter().filter(|e| e.verdict != Verdict::InSpan).count();
    Ok(IndependenceReport { independent: count == entries.len(), count, entries })
}

/// Coordinates of `target` in the given products when it lies in their span.
/// Products that depend on earlier ones receive no coordinate.
fn span_coordinates(
    records: &[InvariantRecord],
    products: &[Vec<u32>],
    target: &SymPolynomial<PrimeField>,
    budget: &Budget,
) -> Result<Option<Vec<(usize, u64)>>> {
    let field = *target.ring();
    let mut ids: FxHashMap<Monomial, usize> = FxHashMap::default();
    let mut to_vec = |f: &SymPolynomial<PrimeField>| -> SparseVec<u64> {
        f.sorted_terms()
            .into_iter()
            .map(|(m, c)| {
                let next = ids.len();
                (*ids.entry(m.clone()).or_insert(next), *c)
            })
            .collect()
    };
    let mut reducer = SpanReducer::new(field);
    let mut accepted = Vec::new();
    for (g, exps) in products.iter().enumerate() {
        let mut prod = SymPolynomial::one(target.algebra(), &field);
        for (r, &e) in records.iter().zip(exps) {
            for _ in 0..e {
                prod = prod.mul(&r.invariant)?;
                budget.check(prod.len(), "independence products")?;
            }
        }
        let v = to_vec(&prod);
        if let Insert::Independent(_) = reducer.insert(&v) {
            accepted.push(g);
        }
    }
    let v = to_vec(target);
    Ok(reducer.solve(&v).map(|coords| coords.into_iter().map(|(k, c)| (accepted[k], c)).collect()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordSummary {
    pub label: String,
    pub power: u32,
    pub term_count: usize,
    pub generator_terms: usize,
    pub lambda: Option<i64>,
    pub p_power_m: u32,
}

impl From<&InvariantRecord> for RecordSummary {
    fn from(r: &InvariantRecord) -> Self {
        RecordSummary {
            label: r.label.clone(),
            power: r.power,
            term_count: r.term_count,
            generator_terms: r.generator.len(),
            lambda: r.lambda_value,
            p_power_m: r.p_power_m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NullSummary {
    pub label: String,
    pub power: u32,
    pub reason: String,
}

/// A nonzero pipeline output that is not invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RejectedSummary {
    pub label: String,
    pub power: u32,
    pub term_count: usize,
    pub p_power_m: u32,
    pub witness: String,
}

/// Result of [`conjecture_sweep`]; `partial` is set when the budget ran out.
#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub p: u64,
    pub index: u64,
    pub records: Vec<RecordSummary>,
    pub nulls: Vec<NullSummary>,
    pub rejected: Vec<RejectedSummary>,
    pub independence: Option<IndependenceReport>,
    pub count: usize,
    pub matches_index: bool,
    pub partial: bool,
    pub note: Option<String>,
    #[serde(skip)]
    pub full_records: Vec<InvariantRecord>,
}

/// Runs [`delta_star`] for `i = 2, 4, …, 2(p - 2)` over `H̄_2(1,1)` and
/// compares the number of independent invariants with the index `p - 2`.
/// `run` replaces the pipeline call (e.g. to consult a store).
pub fn conjecture_sweep_with(
    p: u64,
    opts: &DeltaOptions,
    mut run: impl FnMut(&HamiltonianPair, u32, &DeltaOptions) -> Result<PipelineResult>,
) -> Result<SweepReport> {
    if p < 3 {
        return Err(Error::InvalidParams("the sweep needs an odd prime".into()));
    }
    let pair = HamiltonianPair::rank_two(p)?;
    let mut report = SweepReport {
        p,
        index: p - 2,
        records: Vec::new(),
        nulls: Vec::new(),
        rejected: Vec::new(),
        independence: None,
        count: 0,
        matches_index: false,
        partial: false,
        note: None,
        full_records: Vec::new(),
    };
    for i in (2..=2 * (p as u32 - 2)).step_by(2) {
        match run(&pair, i, opts) {
            Ok(PipelineResult::Record(r)) => {
                report.records.push(RecordSummary::from(&r));
                report.full_records.push(r);
            }
            Ok(PipelineResult::Null { power, label, reason, .. }) => report.nulls.push(NullSummary { label, power, reason }),
            Ok(PipelineResult::NotInvariant { power, label, p_power_m, term_count, witness }) => {
                report.rejected.push(RejectedSummary { label, power, term_count, p_power_m, witness })
            }
            Err(Error::BudgetExceeded(msg)) => {
                report.partial = true;
                report.note = Some(format!("stopped at power {i}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    match independence_report(&report.full_records, &opts.budget) {
        Ok(ind) => {
            report.count = ind.count;
            report.independence = Some(ind);
        }
        Err(Error::BudgetExceeded(msg)) => {
            report.partial = true;
            report.note.get_or_insert(format!("independence check stopped: {msg}"));
        }
        Err(e) => return Err(e),
    }
    report.matches_index = !report.partial && report.count as u64 == report.index;
    Ok(report)
}

pub fn conjecture_sweep(p: u64, opts: &DeltaOptions) -> Result<SweepReport> {
    conjecture_sweep_with(p, opts, delta_star)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_poly(pair: &HamiltonianPair, coeffs: &[i64]) -> SymPolynomial<Integers> {
        let terms = coeffs.iter().enumerate().map(|(k, &c)| (Monomial::var(k), BigInt::from(c)));
        SymPolynomial::from_terms(&pair.h, &Integers, terms).unwrap()
    }

    #[test]
    fn phi_examples() {
        let pair = HamiltonianPair::rank_two(3).unwrap();
        let (f, m) = phi_normalize(&int_poly(&pair, &[3, 6])).unwrap();
        assert_eq!(m, 1);
        assert_eq!(f.coeff(&Monomial::var(0)), 1);
        assert_eq!(f.coeff(&Monomial::var(1)), 2);
        let (g, m) = phi_normalize(&int_poly(&pair, &[2, 4])).unwrap();
        assert_eq!(m, 0);
        assert_eq!((g.coeff(&Monomial::var(0)), g.coeff(&Monomial::var(1))), (2, 1));
        assert!(matches!(phi_normalize(&int_poly(&pair, &[])), Err(Error::ZeroInput)));
        let (_, again) = phi_normalize(&f.lift()).unwrap();
        assert_eq!(again, 0);
    }

    #[test]
    fn restriction() {
        let pair = HamiltonianPair::rank_two(3).unwrap();
        let f = PrimeField::new(3).unwrap();
        let u = SymPolynomial::var(&pair.hbar, &f, pair.u()).unwrap();
        assert!(restrict_u_zero(&u.pow(2), &pair.h).unwrap().is_zero());
        let x = SymPolynomial::var(&pair.hbar, &f, 3).unwrap();
        let mixed = x.pow(2).add(&x.mul(&u).unwrap()).unwrap();
        let r = restrict_u_zero(&mixed, &pair.h).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(embed_in_hbar(&r, &pair.hbar).unwrap(), x.pow(2));
        assert!(restrict_u_zero(&r, &pair.h).is_err());
    }

    #[test]
    fn compute_delta_range() {
        let pair = HamiltonianPair::rank_two(3).unwrap();
        let opts = DeltaOptions::default();
        assert!(matches!(compute_delta(&pair.hbar, 1, &opts), Err(Error::PowerOutOfRange { .. })));
        assert!(matches!(compute_delta(&pair.hbar, 3, &opts), Err(Error::PowerOutOfRange { .. })));
        assert!(compute_delta(&pair.h, 2, &opts).is_err());
        assert_eq!(max_delta_power(5), 6);
    }

    #[test]
    fn lambda_grading() {
        let pair = HamiltonianPair::rank_two(5).unwrap();
        assert_eq!(lambda_of_var(&pair.hbar, pair.u()), Some(0));
        assert_eq!(lambda_of_var(&pair.h, pair.h.index_of("D(1,0)").unwrap()), Some(7));
        let w = CartanAlgebra::build_w(FieldParams::uniform(5, 1).unwrap()).unwrap();
        assert_eq!(lambda_of_var(&w, 0), None);
    }

    #[test]
    fn delta_two_at_three() {
        let pair = HamiltonianPair::rank_two(3).unwrap();
        let result = delta_star(&pair, 2, &DeltaOptions::default()).unwrap();
        let r = result.record().unwrap();
        assert_eq!(r.label(), "Delta_2");
        assert_eq!(r.term_count(), 4);
        assert_eq!(r.p_power_m(), 0);
        assert_eq!(r.lambda_value(), Some(4));
        assert!(delta_star(&pair, 4, &DeltaOptions::default()).is_err());
    }

    #[test]
    fn tampered_records_rejected() {
        let pair = HamiltonianPair::rank_two(3).unwrap();
        let opts = DeltaOptions::default();
        let r = delta_star(&pair, 2, &opts).unwrap().record().unwrap().clone();
        let doubled = r.invariant().scale(&2);
        assert!(InvariantRecord::new("bad", 2, r.generator().clone(), doubled, 0, &pair, &opts).is_err());
        let mut doc = r.to_document().unwrap();
        doc.term_count = 5;
        assert!(matches!(InvariantRecord::from_document(&doc, &pair, &opts), Err(Error::VerificationFailed(_))));
        let doc = r.to_document().unwrap();
        let back = InvariantRecord::from_document(&doc, &pair, &opts).unwrap();
        assert_eq!(back.invariant(), r.invariant());
    }

    #[test]
    fn proportional_records_are_dependent() {
        let pair = HamiltonianPair::rank_two(3).unwrap();
        let opts = DeltaOptions::default();
        let r = delta_star(&pair, 2, &opts).unwrap().record().unwrap().clone();
        let twice = InvariantRecord::new("twice", 2, r.generator().scale(&2), r.invariant().scale(&2), 0, &pair, &opts).unwrap();
        let report = independence_report(&[r.clone(), twice], &Budget::unlimited()).unwrap();
        assert!(!report.independent);
        assert_eq!(report.entries[1].verdict, Verdict::InSpan);
        assert_eq!(report.entries[1].combination, vec![("Delta_2".to_string(), 2)]);
        assert_eq!(report.count, 1);
        let single = independence_report(&[r], &Budget::unlimited()).unwrap();
        assert_eq!(single.entries[0].verdict, Verdict::NoCandidates);
    }

    #[test]
    fn exponent_enumeration() {
        assert_eq!(exponent_vectors(&[2, 4], 6), vec![vec![1, 1], vec![3, 0]]);
        assert_eq!(product_name(&["A", "B"], &[3, 0]), "A^3");
        assert_eq!(product_name(&["A", "B"], &[1, 1]), "A*B");
    }

    #[test]
    fn sweep_at_three() {
        let report = conjecture_sweep(3, &DeltaOptions::default()).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.count, 1);
        assert!(report.matches_index);
        assert!(conjecture_sweep(2, &DeltaOptions::default()).is_err());
    }
}
