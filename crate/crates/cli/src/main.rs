//! `curvcheck`: list catalog entries, print curvature frames and run checks.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use curvature::catalog::{self, ChartManifold};
use curvature::verify::{CheckId, Status, Verdict, Verifier, VerifyConfig, DEFAULT_SEED};

#[derive(Parser)]
#[command(name = "curvcheck", version, about = "Curvature identities and gap-theorem checks on chart manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List built-in catalog entries.
    List,
    /// Print curvature invariants at one point.
    Frame(FrameArgs),
    /// Run checks (`all` runs every check).
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Source {
    /// Catalog id or constructor, e.g. `s4` or `scaled(round_sphere(4,1),2)`.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    manifold: Option<String>,
    /// Manifest file describing a chart manifold.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<ChartManifold> {
        match (&self.manifold, &self.manifest) {
            (Some(sel), _) => catalog::from_selector(sel).with_context(|| format!("manifold `{sel}`")),
            (None, Some(path)) => Ok(catalog::load_manifest(path)?),
            (None, None) => bail!("one of --manifold or --manifest is required"),
        }
    }
}

#[derive(Args)]
struct FrameArgs {
    #[command(flatten)]
    source: Source,
    /// Chart coordinates, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    point: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    jet_order: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Check ids: lemma22, codazzi-ineq, eq31, weyl-eq, div-weyl,
    /// bach-consistency, gbc, sobolev, kato, thmA, thmB, thmC or all.
    #[arg(required = true, value_delimiter = ',')]
    checks: Vec<String>,
    /// Nodes per axis: one count for every axis, or one per axis.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    jet_order: usize,
    /// Overrides every tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// θ values for lemma22 and codazzi-ineq (repeatable).
    #[arg(long = "theta", allow_hyphen_values = true)]
    thetas: Vec<f64>,
    /// Lower bound α₀ on the Yamabe constant.
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Record wall-clock seconds per check.
    #[arg(long)]
    timing: bool,
}

fn list() -> String {
    let mut out = String::new();
    let flag = |v: Option<bool>| match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "?",
    };
    let _ = writeln!(
        out,
        "{:<18} {:>3} {:>4}  {:<8} {:<6} {:<6} {:<6} recipe",
        "id", "dim", "chi", "einstein", "lcf", "bach0", "constR"
    );
    for (id, recipe, dim, chi, f) in catalog::listing() {
        let chi = chi.map_or("?".to_string(), |c| c.to_string());
        let _ = writeln!(
            out,
            "{:<18} {:>3} {:>4}  {:<8} {:<6} {:<6} {:<6} {}",
            id,
            dim,
            chi,
            flag(f.einstein),
            flag(f.conformally_flat),
            flag(f.bach_flat),
            flag(f.constant_scalar),
            recipe
        );
    }
    out
}

fn frame(args: &FrameArgs) -> Result<String> {
    let m = args.source.load()?;
    if args.point.len() != m.dim() {
        bail!("point has {} coordinates, manifold has dimension {}", args.point.len(), m.dim());
    }
    if !m.contains(&args.point) {
        bail!("point {:?} is outside the chart domain", args.point);
    }
    if args.jet_order < 4 {
        bail!("jet order must be at least 4, got {}", args.jet_order);
    }
    let f = m.frame_at(&args.point, args.jet_order)?;
    let mut rows: Vec<(&str, f64)> = vec![
        ("R", f.scalar),
        ("lambda", f.lambda),
        ("|E|", f.norm(&f.traceless_ricci)),
        ("|W|", f.norm(&f.weyl)),
        ("|C|", f.norm(&f.cotton)),
        ("|B|", f.norm(&f.bach)),
    ];
    if let Some(q) = f.q_curvature {
        rows.push(("Q", q));
    }
    Ok(match args.format {
        Format::Text => {
            let mut out = format!("{} at {:?}\n", m.name(), args.point);
            for (k, v) in rows {
                let _ = writeln!(out, "  {k:<7} {v:.12e}");
            }
            out
        }
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                rows.into_iter().map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect();
            let doc = serde_json::json!({ "manifold": m.name(), "point": args.point, "values": map });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    })
}

fn text_report(verdicts: &[Verdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        let status = match &v.status {
            Status::Pass => "PASS".to_string(),
            Status::Fail => "FAIL".to_string(),
            Status::Skipped(r) => format!("SKIP ({r})"),
        };
        let _ = write!(out, "{:<18} {:<16} {}", v.check, v.manifold, status);
        let _ = write!(out, "  tol={:e}", v.tol);
        if let Some(s) = v.seconds {
            let _ = write!(out, "  {s:.3}s");
        }
        out.push('\n');
        for (k, x) in &v.values {
            let _ = writeln!(out, "    {k:<28} {x:.12e}");
        }
    }
    out
}

fn verify(args: &VerifyArgs) -> Result<(String, bool)> {
    let m = args.source.load()?;
    let checks = CheckId::parse_list(&args.checks)?;
    let mut cfg = VerifyConfig {
        grid: args.grid.clone(),
        jet_order: args.jet_order,
        tol: args.tol,
        alpha0: args.alpha0,
        seed: args.seed,
        timing: args.timing,
        ..Default::default()
    };
    if !args.thetas.is_empty() {
        cfg.thetas = args.thetas.clone();
    }
    let mut verifier = Verifier::new(&m, cfg)?;
    let verdicts = verifier.run(&checks)?;
    let failed = verdicts.iter().any(|v| v.status.is_fail());
    let out = match args.format {
        Format::Text => text_report(&verdicts),
        Format::Json => serde_json::to_string_pretty(&verdicts)? + "\n",
    };
    Ok((out, failed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::List => Ok((list(), false)),
        Command::Frame(a) => frame(a).map(|s| (s, false)),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok((out, failed)) => {
            print!("{out}");
            ExitCode::from(if failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
