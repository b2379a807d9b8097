//! `monodromy`: propagation, regeneration pipelines, the F222 audit and
//! factorization checks from the command line.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on
//! usage, parse or fixture errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use monodromy_core::f222::{self, Surface};
use monodromy_core::notation::render_items;
use monodromy_core::regeneration::{apply_plan, parse_plan, stage_factorization};
use monodromy_core::{
    elaborate, forget_degree, full_twist, hurwitz_equiv_bounded, invariance_check, k_point_chain, pair_positions,
    parse_document, parse_factorization, parse_items, parse_table, product_check, propagate, render, BraidWord, Factorization,
    Fiber, HurwitzOutcome, InvarianceResult, Item, ProductReport,
};

const SCHEMA_FACTORIZATION: &str = "monodromy/factorization/v1";
const SCHEMA_PRODUCT: &str = "monodromy/verify-product/v1";
const SCHEMA_HURWITZ: &str = "monodromy/verify-hurwitz/v1";
const SCHEMA_INVARIANCE: &str = "monodromy/verify-invariance/v1";
const SCHEMA_FORGET: &str = "monodromy/verify-forget-degree/v1";

#[derive(Parser)]
#[command(name = "monodromy", version, about = "Braid monodromy factorizations: propagate, regenerate, audit, verify")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Print the JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Write the DSL (propagate, regenerate) or the JSON report (others) here.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Propagate a singularity table into a factorization.
    Propagate {
        /// Table in the DSL.
        #[arg(long)]
        input: PathBuf,
        /// Factorization to compare with, factor by factor.
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Run a regeneration pipeline.
    Regenerate {
        #[command(subcommand)]
        pipeline: Pipeline,
    },
    /// Degree and forgetting audit of the regenerated F222 surface.
    #[command(name = "audit-f222")]
    AuditF222 {
        /// Fixture directory; defaults to MONODROMY_FIXTURES or the shipped fixtures.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also compare the six-point braid by normal forms (informational, non-gating).
        #[arg(long)]
        full: bool,
    },
    /// Checks on factorization files.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
}

#[derive(Subcommand)]
enum Pipeline {
    /// Five lines through a point, first case: stages 1 to 3.
    #[command(name = "five-point-case1")]
    FivePointCase1 {
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=3))]
        stage: u64,
    },
    /// The `k+1`-point chain `B_k → B_k^{(stage)}`.
    Kpoint {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        k: u64,
        #[arg(long)]
        stage: u64,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Compare the product with the full twist, or with another file's product.
    Product {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Bounded Hurwitz-equivalence search between two factorizations.
    Hurwitz {
        /// Exactly two factorization files.
        #[arg(long, required = true, num_args = 1)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        nodes: u64,
    },
    /// Is the factorization invariant under conjugation by a braid?
    Invariance {
        #[arg(long)]
        input: PathBuf,
        /// Conjugating braid as a DSL expression in the file's fiber.
        #[arg(long)]
        by: String,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        nodes: u64,
    },
    /// Degree of the forgetting map onto a pair `i, i'` of the product.
    #[command(name = "forget-degree")]
    ForgetDegree {
        #[arg(long)]
        input: PathBuf,
        /// One pair; all pairs of the fiber when omitted.
        #[arg(long)]
        pair: Option<u32>,
    },
}

/// What a command produced: an optional DSL document, a report, a one-line
/// summary and whether its checks passed.
struct Outcome {
    dsl: Option<String>,
    report: serde_json::Value,
    summary: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let out = match &cli.cmd {
        Cmd::Propagate { input, expect } => cmd_propagate(input, expect.as_deref())?,
        Cmd::Regenerate { pipeline } => cmd_regenerate(pipeline)?,
        Cmd::AuditF222 { input, full } => cmd_audit(input.clone().unwrap_or_else(f222::fixture_dir), *full)?,
        Cmd::Verify { check } => cmd_verify(check)?,
    };
    let report = pretty(&out.report)?;
    match (&out.dsl, &cli.output) {
        (Some(dsl), Some(path)) => write(path, dsl)?,
        (Some(dsl), None) if !cli.json => print!("{dsl}"),
        (None, Some(path)) => write(path, &report)?,
        _ => {}
    }
    if cli.json {
        print!("{report}");
    } else if out.dsl.is_some() && cli.output.is_none() {
        eprintln!("{}", out.summary);
    } else {
        println!("{}", out.summary);
    }
    Ok(out.ok)
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_factorization(path: &Path) -> Result<(Fiber, Factorization)> {
    parse_factorization(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Serialize)]
struct FactorizationReport {
    schema: &'static str,
    command: String,
    fiber: String,
    strands: usize,
    factors: usize,
    degree: i64,
    /// Factor degree ↦ number of factors.
    degree_histogram: BTreeMap<i64, usize>,
    /// Image of each position under the product's permutation, 1-based.
    permutation: Vec<usize>,
    cycles: Vec<Vec<usize>>,
    /// Emitted DSL re-parsed to the same factors.
    roundtrip: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    matches_expected: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_mismatch: Option<String>,
}

fn factorization_report(command: String, fiber: &Fiber, f: &Factorization) -> FactorizationReport {
    let mut degree_histogram = BTreeMap::new();
    for t in &f.factors {
        *degree_histogram.entry(t.degree()).or_insert(0) += 1;
    }
    let p = f.product().permutation();
    FactorizationReport {
        schema: SCHEMA_FACTORIZATION,
        command,
        fiber: fiber.to_string(),
        strands: fiber.len(),
        factors: f.len(),
        degree: f.degree(),
        degree_histogram,
        permutation: p.images(),
        cycles: p.cycles(),
        roundtrip: true,
        matches_expected: None,
        first_mismatch: None,
    }
}

/// Re-parses emitted DSL and insists on the same factors.
fn roundtrip(dsl: &str, fiber: &Fiber, f: &Factorization) -> Result<()> {
    let (pf, g) = parse_factorization(dsl).context("emitted DSL does not re-parse")?;
    ensure!(&pf == fiber, "emitted DSL has fiber {pf}, expected {fiber}");
    if let Some(m) = g.first_mismatch(f)? {
        bail!("emitted DSL does not reproduce the factorization: {m}");
    }
    Ok(())
}

/// A readable name for a propagated factor: a plain twist `Z^e` or
/// `Z̄^e` on some pair if one is braid-equal, else the raw word.
fn name_factor(word: &BraidWord, fiber: &Fiber) -> Result<String> {
    let e = word.degree();
    if matches!(e, 1 | 2 | 4) {
        let power = if e == 1 { String::new() } else { e.to_string() };
        let labels = fiber.labels();
        for j in 1..labels.len() {
            for i in 0..j {
                for bar in ["", "bar"] {
                    let text = format!("Z{bar}{power}[{},{}]", labels[i], labels[j]);
                    let f = elaborate(&parse_items(&text)?, fiber)?;
                    if f.product().equals(word)? {
                        return Ok(text);
                    }
                }
            }
        }
    }
    let letters: Vec<String> = word.letters().iter().map(|l| l.to_string()).collect();
    Ok(format!("W[{}]", letters.join(",")))
}

fn cmd_propagate(input: &Path, expect: Option<&Path>) -> Result<Outcome> {
    let table = parse_table(&read(input)?).with_context(|| format!("parsing {}", input.display()))?;
    let mut f = propagate(&table.records, &table.fiber)?;
    let mut ok = true;
    let mut matches_expected = None;
    let mut first_mismatch = None;
    let mut named = false;
    if let Some(path) = expect {
        let (ef, e) = load_factorization(path)?;
        first_mismatch = if ef != table.fiber {
            Some(format!("fiber {ef} differs from {}", table.fiber))
        } else {
            f.first_mismatch(&e)?.map(|m| m.to_string())
        };
        ok = first_mismatch.is_none();
        matches_expected = Some(ok);
        if ok {
            // Factorwise braid-equal, so the expected expressions name the factors.
            for (t, x) in f.factors.iter_mut().zip(&e.factors) {
                t.expr = x.expr.clone();
            }
            named = true;
        }
    }
    if !named {
        for t in &mut f.factors {
            t.expr = name_factor(&t.word, &table.fiber)?;
        }
    }
    let dsl = render(&table.fiber, &f);
    roundtrip(&dsl, &table.fiber, &f)?;
    let mut report = factorization_report(format!("propagate {}", input.display()), &table.fiber, &f);
    report.matches_expected = matches_expected;
    report.first_mismatch = first_mismatch;
    let summary = format!(
        "propagate: {} factors, degree {}{}",
        f.len(),
        f.degree(),
        match report.matches_expected {
            Some(true) => ", matches expected",
            Some(false) => ", DIFFERS from expected",
            None => "",
        }
    );
    Ok(Outcome { dsl: Some(dsl), report: serde_json::to_value(&report)?, summary, ok })
}

/// One top-level expression per line under a fiber header.
fn render_stage(fiber: &Fiber, items: &[Item]) -> String {
    let mut out = format!("fiber: {fiber}\n");
    for it in items {
        out.push_str(&render_items(std::slice::from_ref(it)));
        out.push('\n');
    }
    out
}

fn cmd_regenerate(p: &Pipeline) -> Result<Outcome> {
    let (command, fiber, items) = match *p {
        Pipeline::FivePointCase1 { stage } => {
            let dir = f222::fixture_dir().join("five_point");
            let table = parse_table(&read(&dir.join("table.dsl"))?).context("five_point/table.dsl")?;
            let first = propagate(&table.records, &table.fiber)?;
            let doc = parse_document(&read(&dir.join("stage1.dsl"))?).context("five_point/stage1.dsl")?;
            // The readable stage-1 expressions must be what the table propagates to.
            let parsed = elaborate(&doc.items, &doc.fiber)?;
            ensure!(doc.fiber == table.fiber, "stage 1 fiber differs from the table's");
            if let Some(m) = first.first_mismatch(&parsed)? {
                bail!("the table does not propagate to stage 1: {m}");
            }
            let (mut fiber, mut items) = (doc.fiber, doc.items);
            for s in 2..=stage {
                let plan = parse_plan(&read(&dir.join(format!("stage{s}.plan")))?).with_context(|| format!("stage{s}.plan"))?;
                (fiber, items) = apply_plan(&fiber, &items, &plan)?;
            }
            (format!("regenerate five-point-case1 --stage {stage}"), fiber, items)
        }
        Pipeline::Kpoint { k, stage } => {
            let (k, stage) = (k as usize, stage as usize);
            ensure!(stage < k, "--stage must be below --k (got k = {k}, stage = {stage})");
            let (fiber, items) = k_point_chain(k, stage)?.pop().context("empty chain")?;
            (format!("regenerate kpoint --k {k} --stage {stage}"), fiber, items)
        }
    };
    let f = stage_factorization(&fiber, &items)?;
    let dsl = render_stage(&fiber, &items);
    roundtrip(&dsl, &fiber, &f)?;
    let report = factorization_report(command.clone(), &fiber, &f);
    let summary = format!("{command}: {} factors, degree {}", f.len(), f.degree());
    Ok(Outcome { dsl: Some(dsl), report: serde_json::to_value(&report)?, summary, ok: true })
}

#[derive(Serialize)]
struct AuditOutput {
    #[serde(flatten)]
    audit: f222::AuditReport,
    /// `deg f_i(φ_j)` for the values the extra-branch-point argument needs.
    local_forget_degrees: Vec<LocalForget>,
    six_point: f222::SixPointCheck,
    ok: bool,
}

#[derive(Serialize)]
struct LocalForget {
    phi: u32,
    pair: u32,
    degree: i64,
    expected: i64,
}

fn cmd_audit(dir: PathBuf, full: bool) -> Result<Outcome> {
    let s = Surface::load(&dir)?;
    let audit = s.audit()?;
    let mut local_forget_degrees = Vec::new();
    for (phi, pair, expected) in [(3, 7, 1), (7, 7, 0), (7, 16, 2)] {
        let degree = f222::local_forget_degree(&s, phi, pair)?;
        local_forget_degrees.push(LocalForget { phi, pair, degree, expected });
    }
    let six_point = f222::six_point_check(&dir, full)?;
    // The normal-form comparison is informational; degree and permutation gate.
    let ok = audit.matches
        && audit.forget_ok
        && local_forget_degrees.iter().all(|l| l.degree == l.expected)
        && six_point.local.necessary
        && six_point.embedded_necessary;
    let groups: Vec<String> = audit.groups.iter().map(|g| g.degree.to_string()).collect();
    let summary = format!(
        "audit-f222: {} = {} (expected {}), without phi14 {}; forgetting degrees {}; six-point degree/permutation {}{}",
        groups.join(" + "),
        audit.total,
        audit.expected,
        audit.total_without_extra,
        if audit.forget_ok { "all 2" } else { "NOT all 2" },
        if six_point.local.necessary { "agree" } else { "DIFFER" },
        if ok { "" } else { " -- FAILED" },
    );
    let out = AuditOutput { audit, local_forget_degrees, six_point, ok };
    Ok(Outcome { dsl: None, report: serde_json::to_value(&out)?, summary, ok })
}

#[derive(Serialize)]
struct ProductOutput {
    schema: &'static str,
    input: String,
    against: String,
    #[serde(flatten)]
    report: ProductReport,
}

#[derive(Serialize)]
struct HurwitzOutput {
    schema: &'static str,
    inputs: Vec<String>,
    depth: u64,
    nodes: u64,
    outcome: HurwitzOutcome,
}

#[derive(Serialize)]
struct InvarianceOutput {
    schema: &'static str,
    input: String,
    by: String,
    depth: u64,
    nodes: u64,
    #[serde(flatten)]
    result: InvarianceResult,
}

#[derive(Serialize)]
struct ForgetOutput {
    schema: &'static str,
    input: String,
    /// Pair index ↦ degree.
    degrees: BTreeMap<u32, i64>,
}

fn cmd_verify(c: &Check) -> Result<Outcome> {
    match c {
        Check::Product { input, against } => {
            let (fiber, f) = load_factorization(input)?;
            let (expected, name) = match against {
                Some(p) => {
                    let (gf, g) = load_factorization(p)?;
                    ensure!(gf.len() == fiber.len(), "{} has {} strands, {} has {}", p.display(), gf.len(), input.display(), fiber.len());
                    (g.product(), p.display().to_string())
                }
                None => (full_twist(fiber.len(), 1, fiber.len())?, format!("full twist on {} strands", fiber.len())),
            };
            let report = product_check(&f, &expected)?;
            let ok = report.equal;
            let summary = format!(
                "verify product: {} (degree {} vs {}, permutation {})",
                if ok { "equal" } else { "NOT equal" },
                report.degree,
                report.expected_degree,
                if report.permutation_delta.is_empty() { "agrees" } else { "differs" }
            );
            let out = ProductOutput { schema: SCHEMA_PRODUCT, input: input.display().to_string(), against: name, report };
            Ok(Outcome { dsl: None, report: serde_json::to_value(&out)?, summary, ok })
        }
        Check::Hurwitz { input, depth, nodes } => {
            ensure!(input.len() == 2, "verify hurwitz takes exactly two --input files");
            let (_, f) = load_factorization(&input[0])?;
            let (_, g) = load_factorization(&input[1])?;
            let outcome = hurwitz_equiv_bounded(&f, &g, *depth as usize, *nodes as usize)?;
            let ok = outcome.is_equivalent();
            let summary = match &outcome {
                HurwitzOutcome::Equivalent { depth, explored, .. } => {
                    format!("verify hurwitz: equivalent in {depth} moves ({explored} tuples explored)")
                }
                HurwitzOutcome::NotFound { explored } => {
                    format!("verify hurwitz: not found within the bounds ({explored} tuples explored)")
                }
                HurwitzOutcome::NotEquivalent { reason } => format!("verify hurwitz: not equivalent: {reason}"),
            };
            let inputs = input.iter().map(|p| p.display().to_string()).collect();
            let out = HurwitzOutput { schema: SCHEMA_HURWITZ, inputs, depth: *depth, nodes: *nodes, outcome };
            Ok(Outcome { dsl: None, report: serde_json::to_value(&out)?, summary, ok })
        }
        Check::Invariance { input, by, depth, nodes } => {
            let (fiber, f) = load_factorization(input)?;
            let h = elaborate(&parse_items(by).context("parsing --by")?, &fiber)?.product();
            let result = invariance_check(&f, &h, *depth as usize, *nodes as usize)?;
            let ok = result.outcome.is_equivalent();
            let summary = format!(
                "verify invariance: {}{}",
                if ok { "invariant" } else { "NOT shown invariant" },
                if result.fast_path { " (commutes with every factor)" } else { "" }
            );
            let out = InvarianceOutput {
                schema: SCHEMA_INVARIANCE,
                input: input.display().to_string(),
                by: by.clone(),
                depth: *depth,
                nodes: *nodes,
                result,
            };
            Ok(Outcome { dsl: None, report: serde_json::to_value(&out)?, summary, ok })
        }
        Check::ForgetDegree { input, pair } => {
            let (fiber, f) = load_factorization(input)?;
            let pairs: Vec<u32> = match pair {
                Some(i) => vec![*i],
                None => {
                    let mut bases: Vec<u32> =
                        fiber.labels().iter().filter(|l| l.primed).map(|l| l.base).collect();
                    bases.sort_unstable();
                    bases
                }
            };
            ensure!(!pairs.is_empty(), "the fiber of {} has no doubled pairs", input.display());
            let mut degrees = BTreeMap::new();
            for i in pairs {
                pair_positions(&fiber, i)?;
                degrees.insert(i, forget_degree(&f, &fiber, i)?);
            }
            let parts: Vec<String> = degrees.iter().map(|(i, d)| format!("f_{i} = {d}")).collect();
            let summary = format!("verify forget-degree: {}", parts.join(", "));
            let out = ForgetOutput { schema: SCHEMA_FORGET, input: input.display().to_string(), degrees };
            Ok(Outcome { dsl: None, report: serde_json::to_value(&out)?, summary, ok: true })
        }
    }
}
