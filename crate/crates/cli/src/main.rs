//! `rcft`: command-line front end for the RCFT toolkit.
//!
//! Exit codes: 0 success, 1 usage error (bad flags, unreadable input),
//! 2 validation or relation failure (the offending residual is printed).
//! Text mode prints results on standard output and echoes the resolved
//! configuration on standard error; `--format json` emits exactly one JSON
//! document on standard output with the configuration embedded.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use serde_json::{json, Value};

use rcft_core::characters::{
    check_modular_transform, ising_characters, su2_characters, PuiseuxSeries, Transform,
};
use rcft_core::error::{Error, Result};
use rcft_core::fusion::{block_dimension, fusion_tensor, Surface};
use rcft_core::invariants::enumerate_invariants_bounded;
use rcft_core::kz::{kz_transport, ConfigPath, SpinSystem};
use rcft_core::mcg_reps::{ising_braid_rep, projective_image_closure, ClosureOutcome};
use rcft_core::modular_data::{
    ising_modular_data, load_modular_data, su2_modular_data, validate_modular_data,
    ModularData, VALIDATION_TOL,
};
use rcft_core::orbifold::{
    builtin_group, conjugation_classes, enumerate_flat, mednykh_count, torus_classes,
    torus_sl2z_action, FiniteGroup,
};
use rcft_core::{blocks, linalg};

#[derive(Parser)]
#[command(
    name = "rcft",
    version,
    about = "Modular data, fusion, characters, conformal blocks, and mapping-class-group representations"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run every consistency check on a modular datum.
    Validate {
        /// Built-in name (ising, su2:K) or a JSON file path.
        #[arg(long)]
        data: String,
        /// Residual tolerance for all checks.
        #[arg(long, default_value_t = VALIDATION_TOL)]
        tol: f64,
    },
    /// Print the fusion tensor (or a single product).
    Fusion {
        #[arg(long)]
        data: String,
        /// Left label of a single product.
        #[arg(long)]
        left: Option<String>,
        /// Right label of a single product.
        #[arg(long)]
        right: Option<String>,
    },
    /// Dimension of the space of chiral blocks of a labeled surface.
    Dims {
        #[arg(long)]
        data: String,
        #[arg(long)]
        genus: usize,
        /// Comma-separated puncture labels (omit for a closed surface).
        #[arg(long)]
        punctures: Option<String>,
    },
    /// Print character q-expansions.
    Chars {
        /// Built-in model: ising or su2:K.
        #[arg(long)]
        model: String,
        /// Series cutoff (exponents kept strictly below this).
        #[arg(long, default_value_t = 20)]
        cutoff: i64,
        /// Restrict to one label.
        #[arg(long)]
        label: Option<String>,
    },
    /// Verify a modular transformation of the characters numerically.
    Check {
        #[arg(long)]
        model: String,
        /// Which transformation: s or t.
        #[arg(long)]
        which: String,
        /// Base point "re,im" in the upper half plane.
        #[arg(long)]
        tau: String,
        #[arg(long, default_value_t = 50)]
        cutoff: i64,
        /// Residual tolerance.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Enumerate modular-invariant partition functions.
    Minv {
        #[arg(long)]
        data: String,
        /// Candidate budget for the integer search.
        #[arg(long, default_value_t = rcft_core::invariants::MAX_CANDIDATES)]
        max: u64,
    },
    /// Analytically continue the four-point blocks around a loop.
    Monodromy {
        /// Loop spec "circle:RE,IM:RADIUS[:TURNS]" (negative turns =
        /// clockwise).
        #[arg(long = "loop")]
        loop_spec: Option<String>,
        /// Path file: optional first line "start re,im" (default start 0.5),
        /// then one segment per line: "line re,im" or "arc re,im angle".
        #[arg(long)]
        path: Option<String>,
        /// Minimum distance kept from the singular points 0 and 1.
        #[arg(long, default_value_t = blocks::DEFAULT_CLEARANCE)]
        clearance: f64,
    },
    /// Express the four-point blocks as series on the modular curve.
    Lift {
        #[arg(long, default_value_t = 12)]
        cutoff: i64,
    },
    /// Transport flat sections of the spin connection along a path.
    Kz {
        #[arg(long)]
        level: usize,
        /// Named path (swap12, swap23, loop23) or a sample file: each line
        /// one configuration, "re,im re,im ...".
        #[arg(long = "loop")]
        loop_spec: String,
        /// Comma-separated spins (default "1/2,1/2,1/2,1/2").
        #[arg(long)]
        spins: Option<String>,
        #[arg(long, default_value_t = rcft_core::kz::DEFAULT_CLEARANCE)]
        clearance: f64,
    },
    /// Braid-group representation checks and projective closure.
    Braid {
        /// Print all relation residuals.
        #[arg(long, conflicts_with = "closure")]
        check: bool,
        /// Breadth-first closure of the projective image.
        #[arg(long)]
        closure: bool,
        /// Element bound for the closure.
        #[arg(long, default_value_t = 10_000)]
        max: usize,
    },
    /// Count flat bundles on a surface and inspect the torus action.
    Orbifold {
        /// Built-in group name (trivial, z2, z3, z4, z2xz2, s3, d4, q8, a4)
        /// or a table file.
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 1)]
        genus: usize,
        /// List conjugation classes.
        #[arg(long)]
        classes: bool,
        /// Print the modular-group permutation action (genus 1 only).
        #[arg(long)]
        action: bool,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(0);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(1);
                }
            }
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

/// 2 for numerical validation/relation failures, 1 for everything else.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CheckFailed { .. }
        | Error::NonIntegral { .. }
        | Error::NotPermutation { .. }
        | Error::Truncation { .. }
        | Error::Clearance { .. }
        | Error::StepUnderflow { .. }
        | Error::NotASquare(_)
        | Error::Series(_)
        | Error::GroupTable(_) => 2,
        _ => 1,
    }
}

/// Fixed 15-significant-digit scientific formatting.
fn fnum(x: f64) -> String {
    format!("{x:.14e}")
}

fn fcomplex(z: Complex64) -> String {
    format!("{:.14e}{:+.14e}i", z.re, z.im)
}

fn jcomplex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn jmatrix(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|r| Value::Array((0..m.ncols()).map(|c| jcomplex(m[(r, c)])).collect()))
        .collect();
    Value::Array(rows)
}

fn print_matrix(out: &mut String, m: &DMatrix<Complex64>) {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fcomplex(m[(r, c)])).collect();
        let _ = writeln!(out, "  {}", row.join("  "));
    }
}

/// Resolve `--data`: built-in names first, then file paths.
fn load_data(spec: &str) -> Result<ModularData> {
    if spec == "ising" {
        return Ok(ising_modular_data());
    }
    if let Some(k) = spec.strip_prefix("su2:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad level in {spec:?}")))?;
        if k == 0 || k > 64 {
            return Err(Error::Domain(format!(
                "level {k} is outside the supported range 1..=64"
            )));
        }
        return Ok(su2_modular_data(k));
    }
    load_modular_data(Path::new(spec))
}

fn parse_complex(text: &str) -> Result<Complex64> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected \"re,im\", got {text:?}")))?;
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad real part {re:?}")))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad imaginary part {im:?}")))?;
    Ok(Complex64::new(re, im))
}

fn parse_cutoff(cutoff: i64) -> Result<BigRational> {
    if cutoff <= 0 {
        return Err(Error::Domain("cutoff must be positive".into()));
    }
    Ok(BigRational::from_integer(cutoff.into()))
}

/// Emit one report: text goes to stdout with the config echoed to stderr;
/// JSON becomes a single document embedding the config.
fn emit(format: Format, config: Value, text: String, result: Value) {
    match format {
        Format::Text => {
            let mut cfg = String::from("config:");
            if let Value::Object(map) = &config {
                for (k, v) in map {
                    let shown = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let _ = write!(cfg, " {k}={shown}");
                }
            }
            eprintln!("{cfg}");
            print!("{text}");
        }
        Format::Json => {
            let doc = json!({ "config": config, "result": result });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("reports serialize")
            );
        }
    }
}

fn series_lines(out: &mut String, series: &PuiseuxSeries) {
    for (e, c) in series.terms() {
        let _ = writeln!(out, "{e}  {c}");
    }
}

fn series_json(series: &PuiseuxSeries) -> Value {
    let terms: Vec<Value> = series
        .terms()
        .map(|(e, c)| json!([e.to_string(), c.to_string()]))
        .collect();
    json!({ "cutoff": series.cutoff().to_string(), "terms": terms })
}

fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Validate { data, tol } => {
            let md = load_data(&data)?;
            let report = validate_modular_data(&md, tol);
            let mut text = String::new();
            let mut checks = Vec::new();
            for c in &report.checks {
                let _ = writeln!(
                    text,
                    "{}: residual {} {}",
                    c.name,
                    fnum(c.residual),
                    if c.pass { "pass" } else { "FAIL" }
                );
                checks.push(json!({
                    "name": c.name,
                    "residual": c.residual,
                    "pass": c.pass,
                }));
            }
            let _ = writeln!(
                text,
                "overall: {}",
                if report.overall_pass() { "pass" } else { "FAIL" }
            );
            emit(
                format,
                json!({ "command": "validate", "data": data, "tol": tol }),
                text,
                json!({ "checks": checks, "pass": report.overall_pass() }),
            );
            if let Some(f) = report.first_failure() {
                return Err(Error::CheckFailed {
                    check: f.name.into(),
                    residual: f.residual,
                    tol,
                });
            }
            Ok(())
        }

        Command::Fusion { data, left, right } => {
            let md = load_data(&data)?;
            let tensor = fusion_tensor(&md)?;
            let n = md.rank();
            let name = |i: usize| md.labels()[i].name.clone();
            let pairs: Vec<(usize, usize)> = match (&left, &right) {
                (Some(l), Some(r)) => vec![(md.resolve_label(l)?, md.resolve_label(r)?)],
                (None, None) => (0..n)
                    .flat_map(|a| (a..n).map(move |b| (a, b)))
                    .collect(),
                _ => {
                    return Err(Error::Domain(
                        "--left and --right must be given together".into(),
                    ))
                }
            };
            let mut text = String::new();
            let mut products = Vec::new();
            for (a, b) in pairs {
                let mut terms = Vec::new();
                let mut jterms = Vec::new();
                for c in 0..n {
                    let m = tensor.get(a, b, c);
                    if m > 0 {
                        terms.push(if m == 1 {
                            name(c)
                        } else {
                            format!("{m} {}", name(c))
                        });
                        jterms.push(json!({ "label": name(c), "multiplicity": m }));
                    }
                }
                let rhs = if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join(" + ")
                };
                let _ = writeln!(text, "{} x {} = {}", name(a), name(b), rhs);
                products.push(json!({
                    "left": name(a),
                    "right": name(b),
                    "product": jterms,
                }));
            }
            emit(
                format,
                json!({
                    "command": "fusion",
                    "data": data,
                    "left": left,
                    "right": right,
                }),
                text,
                json!({ "products": products }),
            );
            Ok(())
        }

        Command::Dims {
            data,
            genus,
            punctures,
        } => {
            let md = load_data(&data)?;
            let labels = match &punctures {
                Some(p) if !p.is_empty() => p
                    .split(',')
                    .map(|tok| md.resolve_label(tok.trim()))
                    .collect::<Result<Vec<_>>>()?,
                _ => Vec::new(),
            };
            let surface = Surface::new(genus, labels);
            let dim = block_dimension(&md, &surface)?;
            emit(
                format,
                json!({
                    "command": "dims",
                    "data": data,
                    "genus": genus,
                    "punctures": punctures,
                }),
                format!("{dim}\n"),
                json!({ "dimension": dim }),
            );
            Ok(())
        }

        Command::Chars {
            model,
            cutoff,
            label,
        } => {
            let cut = parse_cutoff(cutoff)?;
            let (md, chars) = builtin_characters(&model, &cut)?;
            let indices: Vec<usize> = match &label {
                Some(l) => vec![md.resolve_label(l)?],
                None => (0..md.rank()).collect(),
            };
            let mut text = String::new();
            let mut jchars = Vec::new();
            for &i in &indices {
                let name = &md.labels()[i].name;
                let _ = writeln!(text, "# {name}");
                series_lines(&mut text, &chars[i]);
                jchars.push(json!({
                    "label": name,
                    "series": series_json(&chars[i]),
                }));
            }
            emit(
                format,
                json!({
                    "command": "chars",
                    "model": model,
                    "cutoff": cutoff,
                    "label": label,
                }),
                text,
                json!({ "characters": jchars }),
            );
            Ok(())
        }

        Command::Check {
            model,
            which,
            tau,
            cutoff,
            tol,
        } => {
            let cut = parse_cutoff(cutoff)?;
            let (md, chars) = builtin_characters(&model, &cut)?;
            let transform = match which.to_ascii_lowercase().as_str() {
                "s" => Transform::S,
                "t" => Transform::T,
                other => {
                    return Err(Error::Parse(format!(
                        "unknown transform {other:?}; expected S or T"
                    )))
                }
            };
            let tau_c = parse_complex(&tau)?;
            let residual = check_modular_transform(&md, &chars, tau_c, transform, tol)?;
            emit(
                format,
                json!({
                    "command": "check",
                    "model": model,
                    "which": which,
                    "tau": tau,
                    "cutoff": cutoff,
                    "tol": tol,
                }),
                format!("residual: {}\n", fnum(residual)),
                json!({ "residual": residual, "tol": tol }),
            );
            if residual > tol {
                return Err(Error::CheckFailed {
                    check: format!("modular {which} transform of {model} characters"),
                    residual,
                    tol,
                });
            }
            Ok(())
        }

        Command::Minv { data, max } => {
            let md = load_data(&data)?;
            let invariants = enumerate_invariants_bounded(&md, 0, max)?;
            let n = md.rank();
            let mut text = String::new();
            let _ = writeln!(text, "invariants: {}", invariants.len());
            let mut jinv = Vec::new();
            for (i, inv) in invariants.iter().enumerate() {
                let _ = writeln!(text, "invariant {i}:");
                let mut rows = Vec::new();
                for a in 0..n {
                    let row: Vec<String> =
                        (0..n).map(|b| inv.entry(a, b).to_string()).collect();
                    let _ = writeln!(text, "  {}", row.join(" "));
                    rows.push(Value::Array(
                        (0..n).map(|b| json!(inv.entry(a, b))).collect(),
                    ));
                }
                let residual = inv.commutation_residual(&md);
                let _ = writeln!(text, "  commutation residual: {}", fnum(residual));
                jinv.push(json!({
                    "matrix": rows,
                    "commutation_residual": residual,
                }));
            }
            emit(
                format,
                json!({ "command": "minv", "data": data, "max": max }),
                text,
                json!({ "count": jinv.len(), "invariants": jinv }),
            );
            Ok(())
        }

        Command::Monodromy {
            loop_spec,
            path,
            clearance,
        } => {
            let spec = match (&loop_spec, &path) {
                (Some(l), None) => parse_loop_spec(l)?,
                (None, Some(p)) => parse_path_file(&std::fs::read_to_string(p)?)?,
                _ => {
                    return Err(Error::Domain(
                        "exactly one of --loop and --path is required".into(),
                    ))
                }
            }
            .with_clearance(clearance);
            let result = blocks::continue_along(&spec)?;
            let mut text = String::new();
            let _ = writeln!(text, "matrix:");
            print_matrix(&mut text, &result.matrix);
            let _ = writeln!(text, "closed: {}", result.closed);
            let _ = writeln!(text, "germ_swapped: {}", result.germ_swapped);
            let _ = writeln!(
                text,
                "det_modulus_residual: {}",
                fnum((result.det_modulus - 1.0).abs())
            );
            emit(
                format,
                json!({
                    "command": "monodromy",
                    "loop": loop_spec,
                    "path": path,
                    "clearance": clearance,
                }),
                text,
                json!({
                    "matrix": jmatrix(&result.matrix),
                    "closed": result.closed,
                    "germ_swapped": result.germ_swapped,
                    "det_modulus": result.det_modulus,
                }),
            );
            Ok(())
        }

        Command::Lift { cutoff } => {
            let cut = parse_cutoff(cutoff)?;
            let (f1, f2) = blocks::lift_to_tau(&cut)?;
            let mut text = String::new();
            text.push_str("# block 1\n");
            series_lines(&mut text, &f1);
            text.push_str("# block 2\n");
            series_lines(&mut text, &f2);
            emit(
                format,
                json!({ "command": "lift", "cutoff": cutoff }),
                text,
                json!({ "block1": series_json(&f1), "block2": series_json(&f2) }),
            );
            Ok(())
        }

        Command::Kz {
            level,
            loop_spec,
            spins,
            clearance,
        } => {
            let two_spins = match &spins {
                Some(s) => parse_spins(s)?,
                None => vec![1, 1, 1, 1],
            };
            let sys = SpinSystem::new(level, &two_spins)?;
            let n = sys.legs();
            let path = build_kz_path(&loop_spec, n)?.with_clearance(clearance);
            let d = sys.invariant_dimension();
            let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
            for c in 0..d {
                let mut e = DVector::from_element(d, Complex64::new(0.0, 0.0));
                e[c] = Complex64::new(1.0, 0.0);
                let y = kz_transport(&sys, &path, &e)?;
                m.column_mut(c).copy_from(&y);
            }
            let mut text = String::new();
            let _ = writeln!(text, "invariant dimension: {d}");
            let _ = writeln!(text, "closed: {}", path.is_closed());
            let _ = writeln!(text, "matrix:");
            print_matrix(&mut text, &m);
            let mut jeigs = Vec::new();
            if d == 2 {
                let eigs = linalg::eig2(&m);
                let parts: Vec<String> = eigs.iter().map(|z| fcomplex(*z)).collect();
                let _ = writeln!(text, "eigenvalues: {}", parts.join("  "));
                jeigs = eigs.iter().map(|z| jcomplex(*z)).collect();
            }
            let cond = rcft_core::kz::transport_condition(&m);
            let _ = writeln!(text, "condition: {}", fnum(cond));
            emit(
                format,
                json!({
                    "command": "kz",
                    "level": level,
                    "loop": loop_spec,
                    "spins": spins,
                    "clearance": clearance,
                }),
                text,
                json!({
                    "invariant_dimension": d,
                    "closed": path.is_closed(),
                    "matrix": jmatrix(&m),
                    "eigenvalues": jeigs,
                    "condition": cond,
                }),
            );
            Ok(())
        }

        Command::Braid {
            check,
            closure,
            max,
        } => {
            if check == closure {
                return Err(Error::Domain(
                    "pass exactly one of --check and --closure".into(),
                ));
            }
            let rep = ising_braid_rep()?;
            if check {
                let mut text = String::new();
                let mut jrels = Vec::new();
                for r in rep.reports() {
                    let _ = writeln!(
                        text,
                        "{}: scalar {} residual {}",
                        r.name,
                        fcomplex(r.scalar),
                        fnum(r.residual)
                    );
                    jrels.push(json!({
                        "name": r.name,
                        "scalar": jcomplex(r.scalar),
                        "residual": r.residual,
                    }));
                }
                emit(
                    format,
                    json!({ "command": "braid", "mode": "check" }),
                    text,
                    json!({ "relations": jrels }),
                );
            } else {
                let outcome = projective_image_closure(&rep, max);
                let (text, result) = match outcome {
                    ClosureOutcome::Finite { order } => (
                        format!("finite: order {order}\n"),
                        json!({ "finite": true, "order": order }),
                    ),
                    ClosureOutcome::ExceedsBound { explored } => (
                        format!("exceeds bound: explored {explored}\n"),
                        json!({ "finite": false, "explored": explored }),
                    ),
                };
                emit(
                    format,
                    json!({ "command": "braid", "mode": "closure", "max": max }),
                    text,
                    result,
                );
            }
            Ok(())
        }

        Command::Orbifold {
            group,
            genus,
            classes,
            action,
        } => {
            let (g, degrees) = match builtin_group(&group) {
                Ok((g, d)) => (g, Some(d)),
                Err(Error::UnknownLabel(_)) if Path::new(&group).exists() => {
                    let text = std::fs::read_to_string(&group)?;
                    (FiniteGroup::from_text(&text)?, None)
                }
                Err(e) => return Err(e),
            };
            let flat = enumerate_flat(&g, genus)?;
            let mut text = String::new();
            let _ = writeln!(text, "group order: {}", g.order());
            let _ = writeln!(text, "flat tuples: {}", flat.len());
            let mut result = json!({
                "order": g.order(),
                "genus": genus,
                "flat_tuples": flat.len(),
            });
            if let Some(d) = &degrees {
                let oracle = mednykh_count(&g, genus, d)?;
                let matches = oracle == num_bigint::BigInt::from(flat.len());
                let _ = writeln!(
                    text,
                    "degree oracle: {} ({})",
                    oracle,
                    if matches { "match" } else { "MISMATCH" }
                );
                result["oracle"] = json!(oracle.to_string());
                result["oracle_match"] = json!(matches);
                if !matches {
                    emit(
                        format,
                        json!({ "command": "orbifold", "group": group, "genus": genus }),
                        text,
                        result,
                    );
                    return Err(Error::CheckFailed {
                        check: "flat-tuple count equals the degree oracle".into(),
                        residual: flat.len() as f64,
                        tol: 0.0,
                    });
                }
            }
            if classes {
                let cls = conjugation_classes(&g, &flat);
                let _ = writeln!(text, "classes: {}", cls.len());
                let mut jcls = Vec::new();
                for c in &cls {
                    let entries: Vec<String> = c
                        .representative
                        .entries
                        .iter()
                        .map(|x| x.to_string())
                        .collect();
                    let _ = writeln!(
                        text,
                        "  ({}) size {}",
                        entries.join(","),
                        c.orbit_size
                    );
                    jcls.push(json!({
                        "representative": c.representative.entries,
                        "orbit_size": c.orbit_size,
                    }));
                }
                result["classes"] = Value::Array(jcls);
            }
            if action {
                if genus != 1 {
                    return Err(Error::Domain(
                        "the modular action is defined on torus classes (genus 1)".into(),
                    ));
                }
                let rep = torus_sl2z_action(&g)?;
                let cls = torus_classes(&g)?;
                let _ = writeln!(text, "torus classes: {}", cls.len());
                let perm_of = |m: &DMatrix<Complex64>| -> Vec<usize> {
                    (0..m.ncols())
                        .map(|c| (0..m.nrows()).find(|&r| m[(r, c)].re > 0.5).unwrap())
                        .collect()
                };
                let s_perm = perm_of(&rep.generators()[0]);
                let t_perm = perm_of(&rep.generators()[1]);
                let _ = writeln!(text, "S: {s_perm:?}");
                let _ = writeln!(text, "T: {t_perm:?}");
                let mut jrels = Vec::new();
                for r in rep.reports() {
                    let _ = writeln!(text, "{}: residual {}", r.name, fnum(r.residual));
                    jrels.push(json!({ "name": r.name, "residual": r.residual }));
                }
                result["action"] = json!({
                    "s": s_perm,
                    "t": t_perm,
                    "relations": jrels,
                });
            }
            emit(
                format,
                json!({
                    "command": "orbifold",
                    "group": group,
                    "genus": genus,
                    "classes": classes,
                    "action": action,
                }),
                text,
                result,
            );
            Ok(())
        }
    }
}

/// Characters for the built-in models (file data has no character engine).
fn builtin_characters(
    model: &str,
    cutoff: &BigRational,
) -> Result<(ModularData, Vec<PuiseuxSeries>)> {
    if model == "ising" {
        let md = ising_modular_data();
        let chars = ising_characters(cutoff).to_vec();
        return Ok((md, chars));
    }
    if let Some(k) = model.strip_prefix("su2:") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad level in {model:?}")))?;
        if k == 0 || k > 16 {
            return Err(Error::Domain(format!(
                "character engine supports levels 1..=16, got {k}"
            )));
        }
        let md = su2_modular_data(k);
        let chars = su2_characters(k, cutoff)?;
        return Ok((md, chars));
    }
    Err(Error::UnknownLabel(format!(
        "unknown model {model:?}; expected ising or su2:K"
    )))
}

/// Parse "circle:RE,IM:RADIUS[:TURNS]".
fn parse_loop_spec(spec: &str) -> Result<blocks::PathSpec> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() < 3 || parts.len() > 4 || parts[0] != "circle" {
        return Err(Error::Parse(format!(
            "expected \"circle:RE,IM:RADIUS[:TURNS]\", got {spec:?}"
        )));
    }
    let center = parse_complex(parts[1])?;
    let radius: f64 = parts[2]
        .parse()
        .map_err(|_| Error::Parse(format!("bad radius {:?}", parts[2])))?;
    if radius <= 0.0 {
        return Err(Error::Domain("radius must be positive".into()));
    }
    let turns: i32 = match parts.get(3) {
        Some(t) => t
            .parse()
            .map_err(|_| Error::Parse(format!("bad turn count {t:?}")))?,
        None => 1,
    };
    Ok(blocks::PathSpec::circle(center, radius, turns))
}

/// Parse a path file: optional "start re,im" first, then "line re,im" or
/// "arc re,im angle" per line.
fn parse_path_file(text: &str) -> Result<blocks::PathSpec> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let start = match lines.peek() {
        Some(l) if l.starts_with("start ") => {
            let s = parse_complex(l.trim_start_matches("start "))?;
            lines.next();
            s
        }
        _ => Complex64::new(0.5, 0.0),
    };
    let mut path = blocks::PathSpec::new(start);
    for line in lines {
        if let Some(rest) = line.strip_prefix("line ") {
            path = path.line_to(parse_complex(rest.trim())?);
        } else if let Some(rest) = line.strip_prefix("arc ") {
            let mut toks = rest.split_whitespace();
            let center = parse_complex(toks.next().ok_or_else(|| {
                Error::Parse("arc needs \"re,im angle\"".into())
            })?)?;
            let angle: f64 = toks
                .next()
                .ok_or_else(|| Error::Parse("arc needs an angle".into()))?
                .parse()
                .map_err(|_| Error::Parse("bad arc angle".into()))?;
            path = path.arc(center, angle);
        } else {
            return Err(Error::Parse(format!("unrecognized segment {line:?}")));
        }
    }
    Ok(path)
}

/// Comma-separated spins like "1/2,1/2,1" into doubled spins.
fn parse_spins(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|tok| {
            let r: Rational64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad spin {tok:?}")))?;
            let doubled = r * 2;
            if !doubled.is_integer() || doubled < Rational64::from_integer(0) {
                return Err(Error::Domain(format!(
                    "spin {tok:?} is not a nonnegative half-integer"
                )));
            }
            Ok(*doubled.numer() as u32)
        })
        .collect()
}

/// Named KZ paths on the standard base, or a sample file.
fn build_kz_path(spec: &str, legs: usize) -> Result<ConfigPath> {
    let base = ConfigPath::standard_base(legs);
    match spec {
        "swap12" => {
            if legs < 2 {
                return Err(Error::Domain("swap12 needs at least 2 points".into()));
            }
            Ok(ConfigPath::new(base).swap(0, 1))
        }
        "swap23" => {
            if legs < 3 {
                return Err(Error::Domain("swap23 needs at least 3 points".into()));
            }
            Ok(ConfigPath::new(base).swap(1, 2))
        }
        "loop23" => {
            if legs < 3 {
                return Err(Error::Domain("loop23 needs at least 3 points".into()));
            }
            Ok(ConfigPath::new(base).encircle(1, 2))
        }
        file => {
            let text = std::fs::read_to_string(file)?;
            let mut configs = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let conf: Vec<Complex64> = line
                    .split_whitespace()
                    .map(parse_complex)
                    .collect::<Result<_>>()?;
                if conf.len() != legs {
                    return Err(Error::DimensionMismatch(format!(
                        "configuration has {} points, system has {legs} legs",
                        conf.len()
                    )));
                }
                configs.push(conf);
            }
            let mut iter = configs.into_iter();
            let start = iter
                .next()
                .ok_or_else(|| Error::Parse("sample file has no configurations".into()))?;
            let mut path = ConfigPath::new(start);
            for conf in iter {
                path = path.linear_to(conf);
            }
            Ok(path)
        }
    }
}
