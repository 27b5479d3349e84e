//! Command-line driver: builds the homogeneous spaces, verifies the catalog
//! of totally geodesic submanifolds, searches for new ones, prints operator
//! spectra, analyzes cones, and emits machine-readable JSON reports.
//!
//! Exit codes: 0 means all requested checks pass; 1 is a verification mismatch
//! (a failed table row, a non-totally-geodesic subspace, a novel survivor
//! class, an unexpected scan outcome); 2 is an input error.

mod expr;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use natred::classify::{
    cone_report, fingerprint, search_tg_subspaces, verify_tables, SearchParams,
};
use natred::cones::{ConeGeodesic, ConePoint, ScanParams};
use natred::homgeo::CurvatureOperatorSet;
use natred::modelspaces::{build_by_name, GeometryClass, ModelSpaceBundle, NK_SPACE_NAMES};
use natred::numkernel::{orthonormalize, sym_eig};
use natred::Tolerance;

#[derive(Parser)]
#[command(
    name = "natred",
    about = "Totally geodesic subspace analysis of naturally reductive spaces and their cones",
    version
)]
struct Cli {
    /// residual tolerance (eps_zero)
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// eigenvalue clustering tolerance (eps_cluster)
    #[arg(long, global = true, default_value_t = 1e-7)]
    cluster_tol: f64,
    /// highest cached covariant-derivative order K
    #[arg(long, global = true, default_value_t = 4)]
    order: usize,
    /// worker threads (default: NATRED_THREADS or all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// write the JSON report to this path
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify every catalog row of the named space(s)
    VerifyTables(VerifyArgs),
    /// Decide whether an explicit subspace is totally geodesic
    CheckSubspace(CheckArgs),
    /// Jacobi and Cartan spectra along a direction
    Spectra(SpectraArgs),
    /// Randomized search for totally geodesic subspaces of one dimension
    Search(SearchArgs),
    /// Cone analysis: maximal cone subspaces and the hypersurface scan
    Cone(ConeArgs),
    /// Closed-form cone geodesic data
    Geodesic(GeodesicArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// cp3, flag, s3s3, or all
    #[arg(long, default_value = "all")]
    space: String,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    /// random subspaces per excluded dimension (0 disables the sweeps)
    #[arg(long, default_value_t = 10_000)]
    sweep_samples: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    space: String,
    /// JSON file with a list of coordinate vectors
    #[arg(long, conflicts_with = "inline")]
    vectors: Option<PathBuf>,
    /// expressions like "e1+e3; e5" or "sqrt2*e1+sqrt3*e3, sqrt2*e2+sqrt3*e4"
    #[arg(long)]
    inline: Option<String>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Args)]
struct SpectraArgs {
    #[arg(long)]
    space: String,
    /// direction expression, e.g. "e1" or "e1+2e3"
    #[arg(long)]
    direction: String,
    /// Cartan operator orders to include
    #[arg(long, default_value_t = 1)]
    cartan_order: usize,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    space: String,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct ConeArgs {
    #[arg(long)]
    space: String,
    /// run the tilted-hyperplane obstruction scan at full resolution
    #[arg(long)]
    scan: bool,
    #[arg(long, default_value_t = 2000)]
    scan_directions: usize,
    #[arg(long, default_value_t = 0x5ca0)]
    seed: u64,
}

#[derive(Args)]
struct GeodesicArgs {
    #[arg(long)]
    space: String,
    /// analyze the geodesic in the cone over the space
    #[arg(long)]
    cone: bool,
    /// radial velocity component
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// tangential velocity expression
    #[arg(long)]
    v: String,
    /// starting radius
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// parameter range for the sample table
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    /// number of samples
    #[arg(long, default_value_t = 21)]
    samples: usize,
}

/// A numeric value with a symbolic tag when it is a recognized radical,
/// serialized with 15 significant digits.
#[derive(Serialize)]
struct TaggedReal {
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    symbol: Option<String>,
}

fn tagged(x: f64) -> TaggedReal {
    let known: [(f64, &str); 10] = [
        (2f64.sqrt(), "sqrt2"),
        (3f64.sqrt(), "sqrt3"),
        (5f64.sqrt(), "sqrt5"),
        (2.0 * 2f64.sqrt(), "2*sqrt2"),
        (1.0 / 2f64.sqrt(), "1/sqrt2"),
        (2.0 / 3f64.sqrt(), "2/sqrt3"),
        ((3.0f64 / 2.0).sqrt(), "sqrt(3/2)"),
        (1.0 / 3.0, "1/3"),
        (2.0 / 3.0, "2/3"),
        (1.0 / 12.0, "1/12"),
    ];
    let symbol = known
        .iter()
        .find(|(v, _)| (v - x).abs() < 1e-12)
        .map(|(_, s)| s.to_string());
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    TaggedReal {
        value: rounded,
        symbol,
    }
}

fn geometry_json(g: &GeometryClass) -> serde_json::Value {
    match g {
        GeometryClass::Round { radius } => json!({"kind": "round", "radius": tagged(*radius)}),
        GeometryClass::Berger { r, tau } => {
            json!({"kind": "berger", "r": tagged(*r), "tau": tagged(*tau)})
        }
        GeometryClass::Flat => json!({"kind": "flat"}),
    }
}

fn emit(json_path: &Option<PathBuf>, report: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match json_path {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|e| e.to_string())?;
            f.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
            f.write_all(b"\n").map_err(|e| e.to_string())?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

struct Context {
    tol: Tolerance,
    order: usize,
    json: Option<PathBuf>,
}

impl Context {
    fn bundle(&self, name: &str) -> Result<(ModelSpaceBundle, CurvatureOperatorSet), String> {
        let bundle = build_by_name(name, self.tol).map_err(|e| e.to_string())?;
        let ops = bundle.curvature(self.order);
        Ok((bundle, ops))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match Tolerance::new(cli.tol, cli.cluster_tol) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("NATRED_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Context {
        tol,
        order: cli.order,
        json: cli.json,
    };
    let outcome = match cli.command {
        Command::VerifyTables(args) => cmd_verify(&ctx, args),
        Command::CheckSubspace(args) => cmd_check(&ctx, args),
        Command::Spectra(args) => cmd_spectra(&ctx, args),
        Command::Search(args) => cmd_search(&ctx, args),
        Command::Cone(args) => cmd_cone(&ctx, args),
        Command::Geodesic(args) => cmd_geodesic(&ctx, args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn space_list(arg: &str) -> Result<Vec<String>, String> {
    if arg == "all" {
        Ok(NK_SPACE_NAMES.iter().map(|s| s.to_string()).collect())
    } else if NK_SPACE_NAMES.contains(&arg) {
        Ok(vec![arg.to_string()])
    } else {
        Err(format!(
            "unknown space `{arg}` (expected cp3, flag, s3s3, or all)"
        ))
    }
}

fn cmd_verify(ctx: &Context, args: VerifyArgs) -> Result<bool, String> {
    let mut reports = Vec::new();
    let mut all_pass = true;
    for name in space_list(&args.space)? {
        let (bundle, ops) = ctx.bundle(&name)?;
        let report = verify_tables(&bundle, &ops, ctx.order, args.seed, args.sweep_samples)
            .map_err(|e| e.to_string())?;
        for row in &report.rows {
            let status = if row.pass { "pass" } else { "FAIL" };
            println!(
                "{name}/{label}: {status} (tg residual {res:.2e}, {jt}, wp {wp})",
                label = row.label,
                res = row.verdict.max_residual,
                jt = row.fingerprint.j_type,
                wp = row.fingerprint.well_positioned,
            );
            if !row.pass {
                for f in &row.failures {
                    eprintln!("  {name}/{}: {f}", row.label);
                }
            }
        }
        for sweep in &report.sweeps {
            println!(
                "{name}: sweep d={dim} over {n} samples: {p} passes, min residual {r:.2e}",
                dim = sweep.dim,
                n = sweep.samples,
                p = sweep.passes,
                r = sweep.min_residual,
            );
        }
        all_pass &= report.all_pass;
        reports.push(report);
    }
    let mut rows_json = Vec::new();
    for report in &reports {
        for row in &report.rows {
            rows_json.push(json!({
                "space": row.space,
                "label": row.label,
                "pass": row.pass,
                "failures": row.failures,
                "tg_residual": row.verdict.max_residual,
                "tojo_residual": row.verdict.tojo_residual,
                "fingerprint": row.fingerprint,
                "lattice_verified": row.lattice_verified,
                "geometry": row.fingerprint.geometry.as_ref().map(geometry_json),
            }));
        }
    }
    let sweeps_json: Vec<_> = reports.iter().flat_map(|r| r.sweeps.iter()).collect();
    emit(
        &ctx.json,
        &json!({
            "schema": 1,
            "command": "verify-tables",
            "order": ctx.order,
            "seed": args.seed,
            "rows": rows_json,
            "sweeps": sweeps_json,
            "all_pass": all_pass,
        }),
    )?;
    Ok(all_pass)
}

fn cmd_check(ctx: &Context, args: CheckArgs) -> Result<bool, String> {
    let (bundle, ops) = ctx.bundle(&args.space)?;
    let np = bundle.space.p_dim();
    let vectors = match (&args.vectors, &args.inline) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            let raw: Vec<Vec<f64>> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            raw.into_iter()
                .map(nalgebra::DVector::from_vec)
                .collect::<Vec<_>>()
        }
        (None, Some(text)) => expr::parse_vector_list(text, np)?,
        _ => return Err("exactly one of --vectors / --inline required".into()),
    };
    let v = orthonormalize(&vectors, &ctx.tol).map_err(|e| e.to_string())?;
    let verdict = ops
        .tg_check(&v, ctx.order, 64, args.seed)
        .map_err(|e| e.to_string())?;
    let fp = fingerprint(&bundle, &ops, &v, 32, args.seed).map_err(|e| e.to_string())?;
    println!(
        "{}: dim {} subspace is {} (residual {:.3e}, order {}, {} translation samples)",
        args.space,
        v.dim(),
        if verdict.is_tg {
            "totally geodesic"
        } else {
            "NOT totally geodesic"
        },
        verdict.max_residual,
        verdict.order_checked,
        verdict.tojo_samples,
    );
    println!(
        "  J-type {}, D-invariant {}, well-positioned {}",
        fp.j_type, fp.d_invariant, fp.well_positioned
    );
    emit(
        &ctx.json,
        &json!({
            "schema": 1,
            "command": "check-subspace",
            "space": args.space,
            "order": ctx.order,
            "verdict": verdict,
            "fingerprint": fp,
            "geometry": fp.geometry.as_ref().map(geometry_json),
        }),
    )?;
    Ok(verdict.is_tg)
}

fn cmd_spectra(ctx: &Context, args: SpectraArgs) -> Result<bool, String> {
    let (bundle, ops) = ctx.bundle(&args.space)?;
    let np = bundle.space.p_dim();
    let x = expr::parse_vector(&args.direction, np)?;
    let jac = ops.jacobi_operator(&x);
    let clusters = sym_eig(&jac, &ctx.tol).map_err(|e| e.to_string())?;
    println!("Jacobi spectrum along {}:", args.direction);
    let mut jacobi_json = Vec::new();
    for c in &clusters {
        println!(
            "  eigenvalue {:+.12} with multiplicity {}",
            c.eigenvalue,
            c.eigenspace.dim()
        );
        jacobi_json.push(json!({
            "eigenvalue": c.eigenvalue,
            "multiplicity": c.eigenspace.dim(),
            "eigenspace": (0..c.eigenspace.dim())
                .map(|i| c.eigenspace.basis_vector(i).iter().copied().collect::<Vec<f64>>())
                .collect::<Vec<_>>(),
        }));
    }
    let mut cartan_json = Vec::new();
    for j in 1..=args.cartan_order.min(ctx.order) {
        let c = ops.cartan_operator(j, &x).map_err(|e| e.to_string())?;
        let clusters = sym_eig(&c, &ctx.tol).map_err(|e| e.to_string())?;
        println!("Cartan operator of order {j}:");
        let mut list = Vec::new();
        for cl in &clusters {
            println!(
                "  eigenvalue {:+.12} with multiplicity {}",
                cl.eigenvalue,
                cl.eigenspace.dim()
            );
            list.push(json!({
                "eigenvalue": cl.eigenvalue,
                "multiplicity": cl.eigenspace.dim(),
            }));
        }
        cartan_json.push(json!({"order": j, "clusters": list}));
    }
    emit(
        &ctx.json,
        &json!({
            "schema": 1,
            "command": "spectra",
            "space": args.space,
            "direction": args.direction,
            "jacobi": jacobi_json,
            "cartan": cartan_json,
        }),
    )?;
    Ok(true)
}

fn cmd_search(ctx: &Context, args: SearchArgs) -> Result<bool, String> {
    let (bundle, ops) = ctx.bundle(&args.space)?;
    if args.dim == 0 || args.dim > bundle.space.p_dim() {
        return Err(format!("dimension {} out of range", args.dim));
    }
    let params = SearchParams {
        samples: args.samples,
        seed: args.seed,
        order: ctx.order,
        tojo_samples: 64,
        quick_reject_above: 1e-6,
    };
    let report =
        search_tg_subspaces(&bundle, &ops, args.dim, &params).map_err(|e| e.to_string())?;
    println!(
        "{}: {} totally geodesic subspaces found among {} candidates ({} classes); \
         min rejection residual {:.3e}",
        args.space,
        report.survivors.len(),
        report.candidates_checked,
        report.classes.len(),
        report.min_rejection_residual,
    );
    let mut novel = false;
    for class in &report.classes {
        let tag = class
            .catalog_match
            .clone()
            .unwrap_or_else(|| "NOVEL".to_string());
        if class.catalog_match.is_none() {
            novel = true;
        }
        println!(
            "  class {}: {} members, catalog match {}, dim {}, J-type {}",
            class.class_id, class.count, tag, class.representative.dim, class.representative.j_type,
        );
    }
    emit(
        &ctx.json,
        &json!({
            "schema": 1,
            "command": "search",
            "report": report,
        }),
    )?;
    Ok(!novel)
}

fn cmd_cone(ctx: &Context, args: ConeArgs) -> Result<bool, String> {
    let (bundle, ops) = ctx.bundle(&args.space)?;
    let scan = ScanParams {
        directions_per_radius: if args.scan { args.scan_directions } else { 200 },
        seed: args.seed,
        ..ScanParams::default()
    };
    let report = cone_report(&bundle, &ops, 2, &scan).map_err(|e| e.to_string())?;
    println!("{}: maximal totally geodesic cone subspaces:", args.space);
    let mut ok = true;
    for entry in &report.entries {
        ok &= entry.is_tg;
        println!(
            "  radial ⊕ {} (cone dim {}){}: residual {:.2e}",
            entry.label,
            entry.cone_dim,
            entry
                .calibration_label
                .as_ref()
                .map(|l| format!(", {l}"))
                .unwrap_or_default(),
            entry.verdict_residual,
        );
    }
    println!(
        "  hyperplane scan: {} normals, min residual {:.3e}{}",
        report.hypersurface_scan.samples,
        report.hypersurface_scan.min_residual,
        if report.hypersurface_scan.families_found {
            " (families found)"
        } else {
            " (clean)"
        },
    );
    ok &= report.no_hypersurfaces;
    emit(
        &ctx.json,
        &json!({
            "schema": 1,
            "command": "cone",
            "report": report,
        }),
    )?;
    Ok(ok)
}

fn cmd_geodesic(ctx: &Context, args: GeodesicArgs) -> Result<bool, String> {
    if !args.cone {
        return Err("geodesics are implemented for cones; pass --cone".into());
    }
    let (bundle, _) = ctx.bundle(&args.space)?;
    let np = bundle.space.p_dim();
    let v = expr::parse_vector(&args.v, np)?;
    let at = ConePoint::new(args.tau).map_err(|e| e.to_string())?;
    let geo = ConeGeodesic::new(at, args.a, &v).map_err(|e| e.to_string())?;
    let (lo, hi) = geo.maximal_interval();
    println!(
        "cone geodesic over {}: a = {}, |v| = {:.6}, τ = {}; maximal interval ({}, {})",
        args.space, args.a, geo.speed, args.tau, lo, hi
    );
    let mut samples = Vec::new();
    for i in 0..args.samples {
        let t = -args.t_max + 2.0 * args.t_max * (i as f64) / (args.samples.max(2) - 1) as f64;
        if t <= lo || t >= hi {
            continue;
        }
        samples.push(json!({"t": t, "rho": geo.rho(t), "f": geo.f(t)}));
    }
    emit(
        &ctx.json,
        &json!({
            "schema": 1,
            "command": "geodesic",
            "space": args.space,
            "a": args.a,
            "speed": geo.speed,
            "tau": args.tau,
            "interval": [lo, hi],
            "samples": samples,
        }),
    )?;
    Ok(true)
}
