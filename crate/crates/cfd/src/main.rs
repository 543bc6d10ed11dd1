//! Deterministic command-line front end.
//!
//! Subcommands: genus, basis, generators, rep, gaps, count, verify.
//! Identical inputs produce byte-identical outputs; there is no randomness
//! anywhere. Exit codes: 0 success, 2 invalid input, 3 size limit,
//! 4 internal invariant violation.

use cfd::differentials::{
    count_via_series, enumerate_basis, enumerate_generators, genus, mono_valuations, ExponentTuple,
};
use cfd::field::FieldCtx;
use cfd::galois::rep_matrix;
use cfd::gaps::{gap_sequence, order_sequence, valuation_multiset};
use cfd::lambda::{canonicalize, LambdaSum, WindowPolicy};
use cfd::oracle::{oracle_build, oracle_independent};
use cfd::poly::{parse_modulus, parse_poly, units_enumerate, ModulusSpec};
use cfd::{Error, Limits};
use serde::Serialize;

const USAGE: &str = "usage: cfd <command> [flags]

commands:
  genus       --q Q --modulus M
  basis       --q Q --modulus M [--at I] [--format json|csv|text]
  generators  --q Q --modulus M [--format json|csv|text]
  rep         --q Q --modulus M --unit A [--at I] [--format json|text]
  gaps        --q Q --modulus M [--at I] [--format json|csv|text]
  count       --q Q --modulus M [--at I]
  verify      [--q Q] [--max-deg D]

flags:
  --q Q            field size, a prime power (extension fields use p^r)
  --modulus M      factored literal `root^mult,...` or polynomial in T
  --at I           anchor prime index, 0-based (default 0)
  --unit A         unit of F_q[T]/(M) as a polynomial literal
  --format F       json, csv or text (default text)
  --max-genus N    enumeration bound (default 512; env CFD_MAX_GENUS)
  --max-units N    unit/model bound (default 4096)
  --max-deg D      verify: largest modulus degree (default 3)
";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotPrime(_)
        | Error::NotIrreducible(_)
        | Error::NonSplitModulus { .. }
        | Error::NotAUnit(_)
        | Error::Parse(_) => 2,
        Error::SizeLimit(_) => 3,
        Error::InternalInvariant(_)
        | Error::DTSquared
        | Error::NotReducible { .. }
        | Error::NegativePower => 4,
    }
}

fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(output) => {
            print!("{output}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Flags {
    q: u64,
    modulus: Option<String>,
    at: usize,
    unit: Option<String>,
    format: String,
    max_deg: usize,
    limits: Limits,
}

fn parse_flags(args: &[String]) -> Result<Flags, Error> {
    let mut flags = Flags {
        q: 3,
        modulus: None,
        at: 0,
        unit: None,
        format: "text".into(),
        max_deg: 3,
        limits: Limits::default(),
    };
    if let Ok(v) = std::env::var("CFD_MAX_GENUS") {
        flags.limits.max_genus = v
            .parse()
            .map_err(|_| Error::Parse(format!("bad CFD_MAX_GENUS value {v:?}")))?;
    }
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let mut value = || {
            it.next()
                .cloned()
                .ok_or_else(|| Error::Parse(format!("flag {flag} needs a value")))
        };
        match flag.as_str() {
            "--q" => {
                let v = value()?;
                flags.q = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad --q value {v:?}")))?;
            }
            "--modulus" => flags.modulus = Some(value()?),
            "--at" => {
                let v = value()?;
                flags.at = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad --at value {v:?}")))?;
            }
            "--unit" => flags.unit = Some(value()?),
            "--format" => flags.format = value()?,
            "--max-deg" => {
                let v = value()?;
                flags.max_deg = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad --max-deg value {v:?}")))?;
            }
            "--max-genus" => {
                let v = value()?;
                flags.limits.max_genus = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad --max-genus value {v:?}")))?;
            }
            "--max-units" => {
                let v = value()?;
                flags.limits.max_units = v
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad --max-units value {v:?}")))?;
            }
            other => return Err(Error::Parse(format!("unknown flag {other}"))),
        }
    }
    if !["json", "csv", "text"].contains(&flags.format.as_str()) {
        return Err(Error::Parse(format!("unknown format {:?}", flags.format)));
    }
    Ok(flags)
}

/// Split q into (p, r) with p prime. The CLI works at desk scale: q <= 16.
fn field_of(q: u64) -> Result<FieldCtx, Error> {
    if q < 2 {
        return Err(Error::NotPrime(q));
    }
    if q > 16 {
        return Err(Error::Parse(format!(
            "q = {q} exceeds the CLI range (q <= 16)"
        )));
    }
    let mut p = 2;
    while p * p <= q {
        if q.is_multiple_of(p) {
            let mut v = q;
            let mut r = 0;
            while v.is_multiple_of(p) {
                v /= p;
                r += 1;
            }
            if v != 1 {
                return Err(Error::NotPrime(q));
            }
            return FieldCtx::new(p, r);
        }
        p += 1;
    }
    FieldCtx::new(q, 1)
}

fn spec_of(flags: &Flags) -> Result<ModulusSpec, Error> {
    let ctx = field_of(flags.q)?;
    let m = flags
        .modulus
        .as_ref()
        .ok_or_else(|| Error::Parse("--modulus is required".into()))?;
    let spec = parse_modulus(&ctx, m)?;
    Ok(spec)
}

fn check_anchor(spec: &ModulusSpec, at: usize) -> Result<(), Error> {
    if at >= spec.num_primes() {
        return Err(Error::Parse(format!(
            "anchor {at} out of range; modulus has {} primes",
            spec.num_primes()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct TupleRecord {
    mu0: i64,
    mu: Vec<(usize, usize, i64)>,
}

#[derive(Serialize)]
struct BasisRecord {
    mu0: i64,
    mu: Vec<(usize, usize, i64)>,
    val_finite: Vec<i64>,
    inf_bound: i64,
}

#[derive(Serialize)]
struct RepRecord {
    unit: String,
    matrix: Vec<Vec<u64>>,
    basis_ref: Vec<TupleRecord>,
}

#[derive(Serialize)]
struct GapsRecord {
    modulus: String,
    anchor: usize,
    genus: u64,
    orders: Vec<i64>,
    gaps: Vec<i64>,
    caveat: bool,
    gap_convention: &'static str,
}

fn mu_entries(t: &ExponentTuple) -> Vec<(usize, usize, i64)> {
    let mut out = Vec::new();
    for (j, mus) in t.mu.iter().enumerate() {
        for (idx, &v) in mus.iter().enumerate() {
            out.push((j + 1, idx + 1, v));
        }
    }
    out
}

fn basis_records(spec: &ModulusSpec, anchor: usize, tuples: &[ExponentTuple]) -> Vec<BasisRecord> {
    tuples
        .iter()
        .map(|t| {
            let rep = mono_valuations(&t.materialize(spec, anchor), spec);
            BasisRecord {
                mu0: t.mu0,
                mu: mu_entries(t),
                val_finite: rep.finite,
                inf_bound: rep.infinity_bound,
            }
        })
        .collect()
}

fn render_tuples(records: &[BasisRecord], format: &str) -> Result<String, Error> {
    match format {
        "json" => Ok(format!(
            "{}\n",
            serde_json::to_string(records).expect("serialization cannot fail")
        )),
        "csv" => {
            let mut out = String::from("mu0,mu,val_finite,inf_bound\n");
            for r in records {
                let mu =
                    r.mu.iter()
                        .map(|(j, k, v)| format!("{j}:{k}:{v}"))
                        .collect::<Vec<_>>()
                        .join(";");
                let vf = r
                    .val_finite
                    .iter()
                    .map(i64::to_string)
                    .collect::<Vec<_>>()
                    .join(";");
                out.push_str(&format!("{},{},{},{}\n", r.mu0, mu, vf, r.inf_bound));
            }
            Ok(out)
        }
        _ => {
            let mut out = String::new();
            for r in records {
                let mu =
                    r.mu.iter()
                        .map(|(j, k, v)| format!("mu[{j},{k}]={v}"))
                        .collect::<Vec<_>>()
                        .join(" ");
                out.push_str(&format!(
                    "mu0={} {} val_finite={:?} inf_bound={}\n",
                    r.mu0, mu, r.val_finite, r.inf_bound
                ));
            }
            Ok(out)
        }
    }
}

fn dispatch(args: &[String]) -> Result<String, Error> {
    let Some(cmd) = args.first() else {
        return Err(Error::Parse(format!("missing command\n{USAGE}")));
    };
    let flags = parse_flags(&args[1..])?;
    match cmd.as_str() {
        "genus" => {
            let spec = spec_of(&flags)?;
            let g = genus(&spec)?;
            if flags.format == "json" {
                Ok(format!(
                    "{}\n",
                    serde_json::json!({
                        "q": flags.q,
                        "modulus": spec.format_factored(),
                        "genus": g,
                    })
                ))
            } else {
                Ok(format!("{g}\n"))
            }
        }
        "count" => {
            let spec = spec_of(&flags)?;
            check_anchor(&spec, flags.at)?;
            let c = count_via_series(&spec, flags.at)?;
            if flags.format == "json" {
                Ok(format!(
                    "{}\n",
                    serde_json::json!({
                        "q": flags.q,
                        "modulus": spec.format_factored(),
                        "anchor": flags.at,
                        "count": c as u64,
                    })
                ))
            } else {
                Ok(format!("{c}\n"))
            }
        }
        "basis" => {
            let spec = spec_of(&flags)?;
            check_anchor(&spec, flags.at)?;
            let tuples = enumerate_basis(&spec, flags.at, &flags.limits)?;
            let records = basis_records(&spec, flags.at, &tuples);
            render_tuples(&records, &flags.format)
        }
        "generators" => {
            let spec = spec_of(&flags)?;
            let tuples = enumerate_generators(&spec, &flags.limits)?;
            // generator monomials carry no anchor prime power (mu0 = 0), so
            // any anchor gives the same valuations
            let records = basis_records(&spec, 0, &tuples);
            render_tuples(&records, &flags.format)
        }
        "rep" => {
            let spec = spec_of(&flags)?;
            check_anchor(&spec, flags.at)?;
            if genus(&spec)? == 0 {
                return Err(Error::Parse(
                    "genus is zero; there is no representation to compute".into(),
                ));
            }
            let ctx = spec.field().clone();
            let unit_str = flags
                .unit
                .as_ref()
                .ok_or_else(|| Error::Parse("--unit is required for rep".into()))?;
            let unit = parse_poly(&ctx, unit_str)?.rem_monic(&ctx, &spec.modulus_poly());
            let mat = rep_matrix(&unit, &spec, flags.at, &flags.limits)?;
            let basis = enumerate_basis(&spec, flags.at, &flags.limits)?;
            let record = RepRecord {
                unit: unit.format(&ctx),
                matrix: (0..mat.size())
                    .map(|i| {
                        (0..mat.size())
                            .map(|j| ctx.encode(&mat.get(i, j)))
                            .collect()
                    })
                    .collect(),
                basis_ref: basis
                    .iter()
                    .map(|t| TupleRecord {
                        mu0: t.mu0,
                        mu: mu_entries(t),
                    })
                    .collect(),
            };
            if flags.format == "json" {
                Ok(format!(
                    "{}\n",
                    serde_json::to_string(&record).expect("serialization cannot fail")
                ))
            } else {
                let mut out = format!("unit {}\n", record.unit);
                for row in &record.matrix {
                    out.push_str(&row.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
                    out.push('\n');
                }
                Ok(out)
            }
        }
        "gaps" => {
            let spec = spec_of(&flags)?;
            check_anchor(&spec, flags.at)?;
            let g = genus(&spec)?;
            if g == 0 {
                return Err(Error::Parse("genus is zero; no gap data".into()));
            }
            let (orders, gaps, caveat) = if spec.num_primes() == 1 {
                let seq = order_sequence(&spec, &flags.limits)?;
                let gaps = gap_sequence(&spec, &flags.limits)?;
                (seq.orders, gaps, false)
            } else {
                let (vals, caveat) = valuation_multiset(&spec, flags.at, &flags.limits)?;
                let gaps = vals.iter().map(|o| o + 1).collect();
                (vals, gaps, caveat)
            };
            let record = GapsRecord {
                modulus: spec.format_factored(),
                anchor: flags.at,
                genus: g,
                orders,
                gaps,
                caveat,
                gap_convention: "order_plus_one",
            };
            match flags.format.as_str() {
                "json" => Ok(format!(
                    "{}\n",
                    serde_json::to_string(&record).expect("serialization cannot fail")
                )),
                _ => {
                    let join =
                        |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(";");
                    Ok(format!(
                        "modulus,anchor,genus,orders,gaps,caveat\n{},{},{},{},{},{}\n",
                        record.modulus,
                        record.anchor,
                        record.genus,
                        join(&record.orders),
                        join(&record.gaps),
                        record.caveat
                    ))
                }
            }
        }
        "verify" => verify(&flags),
        other => Err(Error::Parse(format!("unknown command {other}\n{USAGE}"))),
    }
}

/// Split moduli over F_q up to a degree bound: all root multisets.
fn split_moduli(ctx: &FieldCtx, max_deg: usize) -> Vec<ModulusSpec> {
    type Frame = (usize, usize, Vec<(cfd::field::FqElement, usize)>);
    let roots: Vec<_> = ctx.elements().collect();
    let mut out = Vec::new();
    let mut stack: Vec<Frame> = vec![(0, 0, vec![])];
    while let Some((idx, deg, factors)) = stack.pop() {
        if !factors.is_empty() {
            out.push(ModulusSpec::new(ctx.clone(), factors.clone()).expect("valid factors"));
        }
        if idx == roots.len() || deg == max_deg {
            continue;
        }
        for mult in 1..=(max_deg - deg) {
            let mut f = factors.clone();
            f.push((roots[idx], mult));
            stack.push((idx + 1, deg + mult, f));
        }
        stack.push((idx + 1, deg, factors));
    }
    out.sort_by_key(|s| (s.degree(), s.format_factored()));
    out
}

/// Run every model suite over all split moduli of degree <= max_deg:
/// defining relations, count agreement, action agreement on all generator
/// monomials under all units, and basis independence at every anchor.
fn verify(flags: &Flags) -> Result<String, Error> {
    let ctx = field_of(flags.q)?;
    let mut out = String::new();
    let mut suites = 0usize;
    for spec in split_moduli(&ctx, flags.max_deg) {
        let name = spec.format_factored();
        let ring = oracle_build(&spec, &flags.limits)?;
        ring.check_relations()?;
        suites += 1;
        out.push_str(&format!(
            "ok relations {} (dimension {})\n",
            name,
            ring.dimension()
        ));
        let g = genus(&spec)?;
        for anchor in 0..spec.num_primes() {
            let basis = enumerate_basis(&spec, anchor, &flags.limits)?;
            if basis.len() as u64 != g || count_via_series(&spec, anchor)? != g as u128 {
                return Err(Error::InternalInvariant(format!(
                    "basis count mismatch for {name} at anchor {anchor}"
                )));
            }
        }
        suites += 1;
        out.push_str(&format!("ok counts {name} (genus {g})\n"));
        if g == 0 {
            continue;
        }
        let units = units_enumerate(&spec, &flags.limits)?;
        let generators = enumerate_generators(&spec, &flags.limits)?;
        let maps = units
            .iter()
            .map(|u| ring.sigma_map(u))
            .collect::<Result<Vec<_>, _>>()?;
        for anchor in 0..spec.num_primes() {
            let policy = WindowPolicy::for_spec(&spec, anchor);
            let gen_sums: Vec<LambdaSum> = generators
                .iter()
                .map(|t| LambdaSum::from_monomial(t.materialize(&spec, anchor), &spec))
                .collect();
            for s in &gen_sums {
                let embedded = ring.embed(s);
                let canon = canonicalize(s, &policy, &spec)?;
                if ring.embed(&canon) != embedded {
                    return Err(Error::InternalInvariant(format!(
                        "canonicalization changed a value for {name} at anchor {anchor}"
                    )));
                }
                for (unit, map) in units.iter().zip(&maps) {
                    let symbolic = cfd::galois::sigma_apply(unit, s, &spec, &policy)?;
                    let model = ring.sigma_with(map, &embedded);
                    if ring.embed(&symbolic) != model {
                        return Err(Error::InternalInvariant(format!(
                            "sigma mismatch for {name} at anchor {anchor}"
                        )));
                    }
                }
            }
            let basis_sums: Vec<LambdaSum> = enumerate_basis(&spec, anchor, &flags.limits)?
                .iter()
                .map(|t| LambdaSum::from_monomial(t.materialize(&spec, anchor), &spec))
                .collect();
            if !oracle_independent(&basis_sums, &ring)? {
                return Err(Error::InternalInvariant(format!(
                    "basis is dependent in the model for {name} at anchor {anchor}"
                )));
            }
            suites += 2;
            out.push_str(&format!("ok action {name} anchor {anchor}\n"));
            out.push_str(&format!("ok independence {name} anchor {anchor}\n"));
        }
    }
    out.push_str(&format!("all suites passed ({suites})\n"));
    Ok(out)
}
