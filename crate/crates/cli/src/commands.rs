use std::fmt::Write as _;
use std::fs;
use std::sync::Arc;

use cartan_core::format::{self, AlgebraHeader, BasisEntry, PolyDocument, POLY_FORMAT, RECORD_FORMAT};
use cartan_core::invariants::{
    delta_star_label, independence_report, CandidateTrace, IndependenceReport, NullSummary, RecordDocument, RecordSummary, RejectedSummary,
    SweepReport, Verdict,
};
use cartan_core::store::{delta_star_stored, read_record_document};
use cartan_core::{
    AlgebraKind, Budget, CartanAlgebra, DeltaOptions, Error, FieldParams, HamiltonianPair, HamiltonianStructure, Integers, PipelineResult,
    PrimeField, Result, Ring, RingKind, Store, SymPolynomial, VariableScheme,
};
use serde_json::{json, Value};

use crate::{AlgebraArgs, CommonArgs, ComputeArgs, ConjectureArgs, GeneratorArgs, OutputArg, SweepArgs, VerifyArgs};

/// What a command prints and the exit status it requests.
pub struct Outcome {
    pub stdout: String,
    pub stderr: Option<String>,
    pub status: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, stderr: None, status: 0 }
    }

    fn failed(stdout: String, why: String) -> Self {
        Outcome { stdout, stderr: Some(why), status: 1 }
    }
}

fn structured(value: &impl serde::Serialize) -> Result<String> {
    format::to_json(value)
}

fn field_params(a: &AlgebraArgs) -> Result<FieldParams> {
    let m = a.m.clone().unwrap_or_else(|| vec![1; a.n]);
    if m.len() != a.n {
        return Err(Error::InvalidParams(format!("--m has {} entries, expected n = {}", m.len(), a.n)));
    }
    FieldParams::new(a.p, m)
}

fn build_algebra(a: &AlgebraArgs) -> Result<Arc<CartanAlgebra>> {
    let kind = AlgebraKind::from(a.algebra);
    let hs = if kind.is_hamiltonian() { Some(HamiltonianStructure::standard(a.n)?) } else { None };
    CartanAlgebra::build(kind, field_params(a)?, hs)
}

fn pair_for(a: &AlgebraArgs) -> Result<HamiltonianPair> {
    if !AlgebraKind::from(a.algebra).is_hamiltonian() {
        return Err(Error::WrongKind { expected: "H or Hbar".into(), found: AlgebraKind::from(a.algebra).to_string() });
    }
    HamiltonianPair::new(field_params(a)?, HamiltonianStructure::standard(a.n)?)
}

fn pair_from_header(h: &AlgebraHeader) -> Result<HamiltonianPair> {
    if !h.kind.is_hamiltonian() {
        return Err(Error::WrongKind { expected: "H or Hbar".into(), found: h.kind.to_string() });
    }
    HamiltonianPair::new(FieldParams::new(h.p, h.m.clone())?, HamiltonianStructure::standard(h.n)?)
}

fn options(c: &CommonArgs) -> DeltaOptions {
    DeltaOptions { order: None, workers: c.workers, budget: Budget::new(c.max_terms, c.max_seconds) }
}

fn store(c: &CommonArgs) -> Option<Store> {
    c.store.clone().map(Store::new)
}

fn scheme_for(c: &CommonArgs, algebra: &CartanAlgebra, ring: RingKind) -> VariableScheme {
    c.vars.map(VariableScheme::from).unwrap_or_else(|| VariableScheme::preferred(algebra, ring))
}

pub fn basis(a: &AlgebraArgs) -> Result<Outcome> {
    let algebra = build_algebra(a)?;
    let entries: Vec<BasisEntry> = algebra.basis().iter().map(|b| BasisEntry { label: b.label.clone(), grade: b.grade }).collect();
    if a.common.output == OutputArg::Structured {
        return Ok(Outcome::ok(structured(&json!({ "header": AlgebraHeader::of(&algebra), "basis": entries }))?));
    }
    let mut out = format!("{} p={} n={} m={:?}: dim {}\n", algebra.kind(), a.p, a.n, algebra.params().m(), algebra.dim());
    for e in &entries {
        writeln!(out, "{}  grade {}", e.label, e.grade).unwrap();
    }
    Ok(Outcome::ok(out))
}

fn render_combination(algebra: &CartanAlgebra, terms: &[(usize, String)]) -> String {
    let parts: Vec<String> =
        terms.iter().map(|(k, c)| if c == "1" { algebra.label(*k).to_string() } else { format!("{c}*{}", algebra.label(*k)) }).collect();
    parts.join(" + ").replace("+ -", "- ")
}

pub fn bracket_table(a: &AlgebraArgs) -> Result<Outcome> {
    let algebra = build_algebra(a)?;
    if a.common.output == OutputArg::Structured {
        return Ok(Outcome::ok(structured(&format::export_structure(&algebra))?));
    }
    let mut out = String::new();
    for i in 0..algebra.dim() {
        for j in i + 1..algebra.dim() {
            let terms: Vec<(usize, String)> = match RingKind::from(a.ring) {
                RingKind::Integers => algebra.structure_constants(i, j).iter().map(|(k, c)| (*k, c.to_string())).collect(),
                RingKind::ModP => algebra.structure_mod_p(i, j).iter().map(|(k, c)| (*k, c.to_string())).collect(),
            };
            if !terms.is_empty() {
                writeln!(out, "[{}, {}] = {}", algebra.label(i), algebra.label(j), render_combination(&algebra, &terms)).unwrap();
            }
        }
    }
    Ok(Outcome::ok(out))
}

pub fn invariant_compute(a: &ComputeArgs) -> Result<Outcome> {
    let args = &a.algebra;
    let pair = pair_for(args)?;
    let opts = options(&args.common);
    if RingKind::from(args.ring) == RingKind::Integers {
        let delta = cartan_core::invariants::compute_delta(&pair.hbar, a.power, &opts)?;
        if args.common.output == OutputArg::Structured {
            return Ok(Outcome::ok(structured(&format::serialize(&delta, VariableScheme::Basis)?)?));
        }
        let text = format::render_text(&delta, scheme_for(&args.common, &pair.hbar, RingKind::Integers))?;
        return Ok(Outcome::ok(format!("Delta_{} = {text}\nterms = {}\n", a.power, delta.len())));
    }
    let store = store(&args.common);
    match delta_star_stored(&pair, a.power, &opts, store.as_ref())? {
        PipelineResult::Record(r) => {
            if args.common.output == OutputArg::Structured {
                return Ok(Outcome::ok(structured(&r.to_document()?)?));
            }
            let inv = format::render_text(r.invariant(), scheme_for(&args.common, &pair.h, RingKind::ModP))?;
            let generator = format::render_text(r.generator(), scheme_for(&args.common, r.generator().algebra(), RingKind::ModP))?;
            let lambda = r.lambda_value().map_or("none".to_string(), |l| l.to_string());
            let out = format!(
                "{} = {inv}\ngenerator = {generator}\nterms = {}\nlambda = {lambda}\np-adic shift = {}\n",
                r.label(),
                r.term_count(),
                r.p_power_m()
            );
            Ok(Outcome::ok(out))
        }
        PipelineResult::Null { power, label, p_power_m, reason } => {
            let out = if args.common.output == OutputArg::Structured {
                structured(&json!({ "label": label, "power": power, "status": "null", "p_power_m": p_power_m, "reason": reason }))?
            } else {
                format!("{label} = 0 ({reason})\n")
            };
            Ok(Outcome::ok(out))
        }
        PipelineResult::NotInvariant { power, label, p_power_m, term_count, witness } => {
            let out = if args.common.output == OutputArg::Structured {
                structured(&json!({
                    "label": label, "power": power, "status": "not_invariant",
                    "p_power_m": p_power_m, "term_count": term_count, "witness": witness,
                }))?
            } else {
                format!("{label}: {term_count} terms, invariant: no (moved by {witness})\n")
            };
            Ok(Outcome::failed(out, format!("{} is not invariant", delta_star_label(power))))
        }
    }
}

fn verify_report(label: &str, terms: usize, witness: Option<String>, output: OutputArg) -> Result<Outcome> {
    let stdout = if output == OutputArg::Structured {
        structured(&json!({ "label": label, "term_count": terms, "invariant": witness.is_none(), "witness": witness }))?
    } else {
        match &witness {
            None => format!("{label}: {terms} terms, invariant: yes\n"),
            Some(w) => format!("{label}: {terms} terms, invariant: no ({w})\n"),
        }
    };
    Ok(match witness {
        None => Outcome::ok(stdout),
        Some(w) => Outcome::failed(stdout, format!("verification failed: {w}")),
    })
}

fn poly_invariance<R: Ring>(doc: &PolyDocument, algebra: &Arc<CartanAlgebra>, ring: &R) -> Result<(usize, Option<String>)> {
    let f = format::deserialize(doc, algebra, ring)?;
    let witness = f.invariance().witness.map(|(b, _)| format!("moved by {}", algebra.label(b)));
    Ok((f.len(), witness))
}

pub fn invariant_verify(a: &VerifyArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&a.input)?;
    let value: Value = serde_json::from_str(&text)?;
    let label = a.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match value.get("format").and_then(Value::as_str) {
        Some(RECORD_FORMAT) => {
            let doc: RecordDocument = read_record_document(&a.input)?;
            let pair = pair_from_header(&doc.invariant.header)?;
            let opts = options(&a.common);
            match cartan_core::InvariantRecord::from_document(&doc, &pair, &opts) {
                Ok(r) => verify_report(r.label(), r.term_count(), None, a.common.output),
                Err(Error::VerificationFailed(msg)) => verify_report(&doc.label, doc.term_count, Some(msg), a.common.output),
                Err(e) => Err(e),
            }
        }
        Some(POLY_FORMAT) => {
            let doc: PolyDocument = serde_json::from_value(value)?;
            let algebra = doc.header.build()?;
            let (terms, witness) = match doc.ring {
                RingKind::ModP => poly_invariance(&doc, &algebra, algebra.field())?,
                RingKind::Integers => poly_invariance(&doc, &algebra, &Integers)?,
            };
            verify_report(&label, terms, witness, a.common.output)
        }
        other => Err(Error::Malformed(format!("unsupported document format {other:?}"))),
    }
}

fn load_poly<R: Ring>(a: &GeneratorArgs, algebra: &Arc<CartanAlgebra>, ring: &R) -> Result<SymPolynomial<R>> {
    if let Some(text) = &a.source.poly {
        let scheme = scheme_for(&a.algebra.common, algebra, ring.kind());
        return format::parse_text(algebra, ring, text, scheme);
    }
    let path = a.source.input.as_deref().expect("clap requires --poly or --input");
    let doc: PolyDocument = serde_json::from_str(&fs::read_to_string(path)?)?;
    format::deserialize(&doc, algebra, ring)
}

fn check_generator<R: Ring>(a: &GeneratorArgs, algebra: &Arc<CartanAlgebra>, ring: &R) -> Result<Outcome> {
    let f = load_poly(a, algebra, ring)?;
    let report = if algebra.kind() == AlgebraKind::W { f.check_generator_w()? } else { f.check_generator_sh()? };
    let criterion = if algebra.kind() == AlgebraKind::W { "W" } else { "S/H" };
    let scheme = scheme_for(&a.algebra.common, algebra, ring.kind());
    let Some(w) = report.witness else {
        let stdout = if a.algebra.common.output == OutputArg::Structured {
            structured(&json!({ "criterion": criterion, "passed": true }))?
        } else {
            format!("{criterion} generator criterion: pass\n")
        };
        return Ok(Outcome::ok(stdout));
    };
    let image = format::render_text(&w.image, scheme)?;
    let expected = format::render_text(&w.expected, scheme)?;
    let stdout = if a.algebra.common.output == OutputArg::Structured {
        structured(&json!({
            "criterion": criterion, "passed": false,
            "witness": { "label": w.label, "grade": w.grade, "image": image, "expected": expected },
        }))?
    } else {
        format!(
            "{criterion} generator criterion: fail\nwitness = {} (grade {})\nad({})(F) = {image}\nexpected = {expected}\n",
            w.label, w.grade, w.label
        )
    };
    Ok(Outcome::failed(stdout, format!("generator criterion fails at {}", w.label)))
}

pub fn generator_check(a: &GeneratorArgs) -> Result<Outcome> {
    let algebra = build_algebra(&a.algebra)?;
    match RingKind::from(a.algebra.ring) {
        RingKind::ModP => {
            let field: PrimeField = *algebra.field();
            check_generator(a, &algebra, &field)
        }
        RingKind::Integers => check_generator(a, &algebra, &Integers),
    }
}

fn default_powers(p: u64) -> Vec<u32> {
    (2..=2 * (p.saturating_sub(2) as u32)).step_by(2).collect()
}

fn trace_line(c: &CandidateTrace) -> String {
    format!("  candidate {} lambda {}{}", c.product, c.lambda, if c.lambda_matches { " (match)" } else { "" })
}

fn render_independence(report: &IndependenceReport) -> String {
    let mut out = String::new();
    for e in &report.entries {
        let verdict = match e.verdict {
            Verdict::NoCandidates => "no products of the same degree".to_string(),
            Verdict::NoLambdaMatch => "no product with the same lambda".to_string(),
            Verdict::NotInSpan => "outside the span of the lambda-matched products".to_string(),
            Verdict::InSpan => {
                let parts: Vec<String> = e.combination.iter().map(|(name, c)| format!("{c}*{name}")).collect();
                format!("in span: {} = {}", e.label, parts.join(" + "))
            }
        };
        writeln!(out, "{}: degree {}, lambda {}, {verdict}", e.label, e.degree, e.lambda).unwrap();
        for c in &e.candidates {
            writeln!(out, "{}", trace_line(c)).unwrap();
        }
    }
    writeln!(out, "independent: {} of {}", report.count, report.entries.len()).unwrap();
    out
}

pub fn independence(a: &SweepArgs) -> Result<Outcome> {
    let pair = HamiltonianPair::rank_two(a.p)?;
    let opts = options(&a.common);
    let store = store(&a.common);
    let mut records = Vec::new();
    let mut nulls = Vec::new();
    let mut rejected = Vec::new();
    for i in a.power.clone().unwrap_or_else(|| default_powers(a.p)) {
        match delta_star_stored(&pair, i, &opts, store.as_ref())? {
            PipelineResult::Record(r) => records.push(r),
            PipelineResult::Null { power, label, reason, .. } => nulls.push(NullSummary { label, power, reason }),
            PipelineResult::NotInvariant { power, label, p_power_m, term_count, witness } => {
                rejected.push(RejectedSummary { label, power, term_count, p_power_m, witness })
            }
        }
    }
    let report = independence_report(&records, &opts.budget)?;
    if a.common.output == OutputArg::Structured {
        let summaries: Vec<RecordSummary> = records.iter().map(RecordSummary::from).collect();
        let doc = json!({ "p": a.p, "records": summaries, "nulls": nulls, "rejected": rejected, "report": report });
        return Ok(Outcome::ok(structured(&doc)?));
    }
    let mut out = render_independence(&report);
    for n in &nulls {
        writeln!(out, "{}: zero ({})", n.label, n.reason).unwrap();
    }
    for r in &rejected {
        writeln!(out, "{}: {} terms, not invariant (moved by {})", r.label, r.term_count, r.witness).unwrap();
    }
    Ok(Outcome::ok(out))
}

fn render_sweep(report: &SweepReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        let lambda = r.lambda.map_or("none".to_string(), |l| l.to_string());
        writeln!(out, "{}: {} terms, generator {} terms, lambda {lambda}, p-adic shift {}", r.label, r.term_count, r.generator_terms, r.p_power_m)
            .unwrap();
    }
    for n in &report.nulls {
        writeln!(out, "{}: zero ({})", n.label, n.reason).unwrap();
    }
    for r in &report.rejected {
        writeln!(out, "{}: {} terms, not invariant (moved by {})", r.label, r.term_count, r.witness).unwrap();
    }
    if let Some(ind) = &report.independence {
        out.push_str(&render_independence(ind));
    }
    writeln!(out, "count {} vs index {}: {}", report.count, report.index, if report.matches_index { "match" } else { "no match" }).unwrap();
    if let Some(note) = &report.note {
        writeln!(out, "partial: {note}").unwrap();
    }
    out
}

pub fn conjecture(a: &ConjectureArgs) -> Result<Outcome> {
    if a.common.max_terms.is_none() && a.common.max_seconds.is_none() {
        return Err(Error::InvalidParams("conjecture sweeps need --max-terms or --max-seconds".into()));
    }
    let opts = options(&a.common);
    let store = store(&a.common);
    let report = cartan_core::invariants::conjecture_sweep_with(a.p, &opts, |pair, i, o| delta_star_stored(pair, i, o, store.as_ref()))?;
    let stdout = if a.common.output == OutputArg::Structured { structured(&report)? } else { render_sweep(&report) };
    if report.partial {
        let note = report.note.clone().unwrap_or_default();
        return Ok(Outcome { stdout, stderr: Some(format!("budget exceeded: {note}")), status: 3 });
    }
    Ok(Outcome::ok(stdout))
}
