//! Command-line interface for the fibration calculus: invariants,
//! validity checks, certificates, block builders, stabilizations, family
//! generation, and the entry catalog.
//!
//! Exit codes: 0 success, 1 mathematically refused (failed certificate or
//! invalid relation), 2 input error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use fibercalc_core::certify::{certify_noncomplex, generate_family, FamilyMode, FamilySpec};
use fibercalc_core::construct::{
    build_block, horizontal_stabilize, vertical_stabilize, BlockFamily, BlockSpec,
};
use fibercalc_core::invariants::invariant_report;
use fibercalc_core::monodromy::CurveClass;

use fibercalc::catalog::{
    self, resolve_input, write_output, Catalog, Provenance, BUILTIN_PATTERNS,
};
use fibercalc::format::{self, emit_fibration, parse_twist, Meta};
use fibercalc::report;

#[derive(Parser)]
#[command(
    name = "fibercalc",
    about = "Exact invariants and non-complexity certificates for surface bundles and \
             Lefschetz fibrations over surfaces",
    version
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Catalog directory (default ./catalog, env FIBERCALC_CATALOG).
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute e, sigma, H_1, b_1, b_2 of a fibration file or catalog id.
    Invariants { input: String },
    /// Validate a fibration document and its homological relation.
    Check { input: String },
    /// Decide non-complexity with either orientation.
    Certify { input: String },
    /// Build an elementary block P(g,h), Q_m(g,h,a) or R_m(g,h,a,b).
    BuildBlock(BuildBlockArgs),
    /// Fiber sum (horizontal) or section sum (vertical) with an
    /// elementary block chosen by the stabilization rules.
    Stabilize(StabilizeArgs),
    /// Generate a certified family of pairwise non-homotopic total spaces.
    Family(FamilyArgs),
    /// Inspect or extend the entry catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
}

#[derive(Args)]
struct BuildBlockArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    g: usize,
    #[arg(long)]
    h: usize,
    #[arg(long, default_value_t = 1)]
    m: i64,
    /// Twisting curve as comma-separated integers (length 2g).
    #[arg(long)]
    a: Option<String>,
    /// Second curve for R-blocks.
    #[arg(long)]
    b: Option<String>,
    /// Write the fibration document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    P,
    Q,
    R,
}

#[derive(Args)]
struct StabilizeArgs {
    #[arg(value_enum)]
    direction: Direction,
    /// Fibration file or catalog id to stabilize.
    #[arg(long)]
    input: String,
    /// Base genus of the horizontal partner block.
    #[arg(long)]
    partner_h: Option<usize>,
    /// Fiber genus of the vertical partner block.
    #[arg(long)]
    partner_g: Option<usize>,
    #[arg(long)]
    m: i64,
    /// Symplectic twist matrix file for twisted fiber sums.
    #[arg(long)]
    twist: Option<PathBuf>,
    /// Write the resulting fibration document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Horizontal,
    Vertical,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    g: Option<usize>,
    #[arg(long)]
    h: usize,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    m_start: i64,
    /// Seed fibration (catalog id or file); defaults per mode.
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    I,
    Ii,
    Iii,
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// List stored entries and the built-in id patterns.
    List,
    /// Show one entry with its invariants.
    Show { id: String },
    /// Validate a fibration file and store it as a catalog entry.
    Add {
        file: PathBuf,
        #[arg(long)]
        id: Option<String>,
    },
}

/// Outcome severity, mapped onto the exit-code contract.
enum Outcome {
    Success,
    Refused,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let catalog_dir = cli
        .catalog
        .clone()
        .or_else(|| std::env::var_os("FIBERCALC_CATALOG").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("./catalog"));
    let catalog = Catalog::new(catalog_dir);
    match run(&cli, &catalog) {
        Ok(Outcome::Success) => ExitCode::from(0),
        Ok(Outcome::Refused) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, catalog: &Catalog) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Invariants { input } => {
            let (fibration, meta, warning) = resolve_input(catalog, input)?;
            print_warning(&warning);
            let report = invariant_report(&fibration)?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report::invariant_report_value(&report))?
                );
            } else {
                let name = display_name(input, &meta);
                print!("{}", report::invariant_report_text(&name, &report));
            }
            Ok(Outcome::Success)
        }
        Command::Check { input } => match resolve_input(catalog, input) {
            Ok((fibration, _, warning)) => {
                print_warning(&warning);
                if cli.json {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "valid": true,
                            "kind": fibration.kind.as_str(),
                            "fiber_genus": fibration.fiber_genus,
                            "base_genus": fibration.base_genus,
                        }))?
                    );
                } else {
                    print!("{}", report::validity_text(&fibration));
                }
                Ok(Outcome::Success)
            }
            Err(catalog::CatalogError::Format(e)) if e.is_mathematical() => {
                if cli.json {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "valid": false,
                            "reason": e.to_string(),
                        }))?
                    );
                } else {
                    println!("invalid: {}", e);
                }
                Ok(Outcome::Refused)
            }
            Err(e) => Err(e.into()),
        },
        Command::Certify { input } => {
            let (fibration, _, warning) = resolve_input(catalog, input)?;
            print_warning(&warning);
            let cert = certify_noncomplex(&fibration)?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report::certificate_value(&cert))?
                );
            } else {
                print!("{}", report::certificate_text(&cert));
            }
            Ok(if cert.granted() {
                Outcome::Success
            } else {
                Outcome::Refused
            })
        }
        Command::BuildBlock(args) => {
            let family = match args.family {
                FamilyArg::P => BlockFamily::P,
                FamilyArg::Q => BlockFamily::Q,
                FamilyArg::R => BlockFamily::R,
            };
            let mut spec = BlockSpec::new(family, args.g, args.h, args.m);
            if let Some(a) = &args.a {
                let a = parse_curve(a, args.g)?;
                let b = args
                    .b
                    .as_deref()
                    .map(|b| parse_curve(b, args.g))
                    .transpose()?;
                spec = spec.with_curves(a, b);
            } else if args.b.is_some() {
                anyhow::bail!("--b requires --a");
            }
            let block = build_block(&spec)?;
            let meta = Meta {
                name: format!(
                    "{}-{}-{}{}",
                    family_letter(family).to_lowercase(),
                    args.g,
                    args.h,
                    if matches!(family, BlockFamily::P) {
                        String::new()
                    } else {
                        format!("-m{}", args.m)
                    }
                ),
                citation: "elementary block".into(),
            };
            let text = emit_fibration(&block, &meta);
            match &args.out {
                Some(path) => {
                    write_output(path, &text)?;
                    if !cli.json {
                        println!("wrote {}", path.display());
                    }
                }
                None => print!("{}", text),
            }
            Ok(Outcome::Success)
        }
        Command::Stabilize(args) => {
            let (fibration, meta, warning) = resolve_input(catalog, &args.input)?;
            print_warning(&warning);
            let report = match args.direction {
                Direction::Horizontal => {
                    let partner_h = args.partner_h.ok_or_else(|| {
                        anyhow::anyhow!("horizontal stabilization requires --partner-h")
                    })?;
                    let twist = match &args.twist {
                        Some(path) => {
                            let text = std::fs::read_to_string(path)?;
                            Some(parse_twist(&text, fibration.fiber_genus)?)
                        }
                        None => None,
                    };
                    horizontal_stabilize(&fibration, partner_h, args.m, twist.as_ref())?
                }
                Direction::Vertical => {
                    let partner_g = args.partner_g.ok_or_else(|| {
                        anyhow::anyhow!("vertical stabilization requires --partner-g")
                    })?;
                    if args.twist.is_some() {
                        anyhow::bail!("--twist applies to horizontal stabilizations only");
                    }
                    vertical_stabilize(&fibration, partner_g, args.m)?
                }
            };
            let result_meta = Meta {
                name: format!(
                    "{}-stabilized-m{}",
                    display_name(&args.input, &meta),
                    args.m
                ),
                citation: meta.citation.clone(),
            };
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report::stabilization_value(
                        &report,
                        &result_meta
                    ))?
                );
            } else {
                print!("{}", report::stabilization_text(&report));
            }
            if let (Some(path), Some(result)) = (&args.out, &report.result) {
                write_output(path, &emit_fibration(result, &result_meta))?;
                if !cli.json {
                    println!("wrote {}", path.display());
                }
            }
            Ok(Outcome::Success)
        }
        Command::Family(args) => {
            let mode = match args.mode {
                ModeArg::I => FamilyMode::I,
                ModeArg::Ii => FamilyMode::II,
                ModeArg::Iii => FamilyMode::III,
            };
            let g = match (mode, args.g, args.n) {
                (FamilyMode::II, _, Some(n)) => {
                    if n < 2 {
                        anyhow::bail!("mode ii requires n >= 2");
                    }
                    (4 * n - 2) * n * n + 1
                }
                (FamilyMode::II, _, None) => anyhow::bail!("mode ii requires --n"),
                (_, Some(g), _) => g,
                (_, None, _) => anyhow::bail!("--g is required for modes i and iii"),
            };
            let spec = FamilySpec {
                mode,
                g,
                h: args.h,
                n: args.n,
                count: args.count,
                m_start: args.m_start,
            };
            let seed = match (&args.seed, mode, args.h) {
                (Some(input), _, _) => {
                    let (f, _, warning) = resolve_input(catalog, input)?;
                    print_warning(&warning);
                    Some(f)
                }
                (None, FamilyMode::I, _) => Some(
                    catalog
                        .load(&format!("ekkos-genus3-h{}", args.h))?
                        .fibration,
                ),
                (None, FamilyMode::II, _) => {
                    let n = args.n.expect("checked above");
                    Some(catalog.load(&format!("bryan-donagi-X{}", n))?.fibration)
                }
                (None, FamilyMode::III, 0) => None,
                (None, FamilyMode::III, _) => {
                    Some(catalog.load(&format!("korkmaz-Y{}", g))?.fibration)
                }
            };
            let family = generate_family(&spec, seed.as_ref())?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report::family_value(&family))?
                );
            } else {
                print!("{}", report::family_text(&family));
            }
            Ok(Outcome::Success)
        }
        Command::Catalog(cmd) => run_catalog(cli, catalog, cmd),
    }
}

fn run_catalog(cli: &Cli, catalog: &Catalog, cmd: &CatalogCommand) -> anyhow::Result<Outcome> {
    match cmd {
        CatalogCommand::List => {
            let stored = catalog.stored_ids()?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "stored": stored,
                        "builtin_patterns": BUILTIN_PATTERNS
                            .iter()
                            .map(|(p, d)| json!({ "pattern": p, "description": d }))
                            .collect::<Vec<_>>(),
                    }))?
                );
            } else {
                println!("stored entries ({}):", stored.len());
                for id in &stored {
                    println!("  {}", id);
                }
                println!("built-in id patterns:");
                for (pattern, description) in BUILTIN_PATTERNS {
                    println!("  {:<28} {}", pattern, description);
                }
            }
            Ok(Outcome::Success)
        }
        CatalogCommand::Show { id } => {
            let entry = catalog.load(id)?;
            print_warning(&entry.cache_warning);
            let report = invariant_report(&entry.fibration);
            if cli.json {
                let report_value = match &report {
                    Ok(r) => report::invariant_report_value(r),
                    Err(e) => json!({ "unavailable": e.to_string() }),
                };
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "id": entry.id,
                        "provenance": entry.provenance.as_str(),
                        "name": entry.meta.name,
                        "citation": entry.meta.citation,
                        "fibration": format::fibration_value(&entry.fibration, &entry.meta),
                        "report": report_value,
                    }))?
                );
            } else {
                println!("id:         {}", entry.id);
                println!("provenance: {}", entry.provenance.as_str());
                if !entry.meta.citation.is_empty() {
                    println!("citation:   {}", entry.meta.citation);
                }
                match report {
                    Ok(r) => print!("{}", report::invariant_report_text(&entry.id, &r)),
                    Err(e) => println!("invariants unavailable: {}", e),
                }
            }
            Ok(Outcome::Success)
        }
        CatalogCommand::Add { file, id } => {
            let text = std::fs::read_to_string(file)?;
            let (fibration, meta) = format::parse_fibration(&text)?;
            let id = match id {
                Some(id) => id.clone(),
                None => {
                    if meta.name.is_empty() {
                        anyhow::bail!("the file has no meta.name; pass --id");
                    }
                    meta.name.clone()
                }
            };
            catalog.store(&id, &fibration, &meta, Provenance::User)?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({ "stored": id }))?
                );
            } else {
                println!("stored {}", id);
            }
            Ok(Outcome::Success)
        }
    }
}

fn parse_curve(csv: &str, genus: usize) -> anyhow::Result<CurveClass> {
    let entries: Vec<BigInt> = csv
        .split(',')
        .map(|s| BigInt::from_str(s.trim()).map_err(|_| anyhow::anyhow!("bad integer {:?}", s)))
        .collect::<Result<_, _>>()?;
    let separating = entries.iter().all(|e| e == &BigInt::from(0));
    CurveClass::new(genus, entries, separating).map_err(|e| anyhow::anyhow!("{}", e))
}

fn family_letter(family: BlockFamily) -> String {
    family.as_char().to_string()
}

fn display_name(input: &str, meta: &Meta) -> String {
    if !meta.name.is_empty() {
        meta.name.clone()
    } else {
        input.to_string()
    }
}

fn print_warning(warning: &Option<String>) {
    if let Some(w) = warning {
        eprintln!("warning: {}", w);
    }
}
