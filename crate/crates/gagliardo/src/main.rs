//! Command-line front end.
//!
//! Every command reads one JSON configuration (flags override single
//! fields), runs a library operation and writes stamped artifacts into
//! the output directory. Thread count and output location are execution
//! details: they never enter the artifacts, so reruns of the same
//! configuration are byte-identical.
//!
//! Exit status: 0 on success, 1 on any error, 2 when --expect-reversal
//! was set and no epsilon in the sweep was flagged.

use clap::{Args, Parser, Subcommand};
use gagliardo::config::RunConfig;
use gagliardo::constants::{alpha_n, omega_n, sharp_sobolev_constant, OMEGA_N_CONVENTION};
use gagliardo::error::{Error, Result};
use gagliardo::experiments::{
    best_constant_descent, counterexample_sweep, theorem2_corpus, theorem2_ratio_suite, Placement,
};
use gagliardo::geometry::Domain;
use gagliardo::kernel::{hardy_pointwise_bound_with, DirectionSet};
use gagliardo::rearrange::{distribution, rearrange, GridFunction};
use gagliardo::report::{
    descent_csv, energy_for_artifact, hardy_csv, json_artifact, library_version, ratio_csv,
    stamp_comments, sweep_csv, write_text, DescentSummary, HardySample,
};
use gagliardo::seminorm::{cross_term_detail, energy_domain, energy_fullspace, EnergyResult};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gagliardo",
    version,
    about = "Fractional energies under rearrangement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rearrange a grid-function file into its radial profile.
    Rearrange(CommonArgs),
    /// Energies of a grid-function file: domain, cross term, full space.
    Seminorm(CommonArgs),
    /// Sweep bump radii and flag energy reversals.
    Counterexample(CommonArgs),
    /// Sample the pointwise tail bound over interior points.
    Hardy(CommonArgs),
    /// Rearranged-to-original energy ratios on the seeded corpus.
    Theorem2(CommonArgs),
    /// Print the constants table.
    Constants(CommonArgs),
    /// Projected descent on the Rayleigh quotient.
    Descend(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid spacing override.
    #[arg(long)]
    grid_h: Option<f64>,
    /// Comma-separated bump radii override.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// boundary | center | auto | comma-separated coordinates.
    #[arg(long)]
    placement: Option<String>,
    /// Fail (exit 2) unless the sweep flags at least one epsilon.
    #[arg(long)]
    expect_reversal: bool,
    /// Seed override for corpus generators.
    #[arg(long)]
    seed: Option<u64>,
    /// Thread count (fallback: the GAGLIARDO_THREADS variable).
    #[arg(long)]
    threads: Option<usize>,
    /// Input grid-function file override.
    #[arg(long)]
    input: Option<PathBuf>,
}

fn main() -> ExitCode {
    // A downstream `head` closing the pipe must end the process the
    // conventional way, not as a print panic.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let (name, args) = match &cli.command {
        Command::Rearrange(a) => ("rearrange", a),
        Command::Seminorm(a) => ("seminorm", a),
        Command::Counterexample(a) => ("counterexample", a),
        Command::Hardy(a) => ("hardy", a),
        Command::Theorem2(a) => ("theorem2", a),
        Command::Constants(a) => ("constants", a),
        Command::Descend(a) => ("descend", a),
    };
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(h) = args.grid_h {
        cfg.grid_h = Some(h);
    }
    if let Some(eps) = &args.eps {
        cfg.epsilons = eps.clone();
    }
    if let Some(text) = &args.placement {
        cfg.placement = parse_placement(text)?;
    }
    if args.expect_reversal {
        cfg.expect_reversal = true;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(input) = &args.input {
        cfg.input = Some(input.display().to_string());
    }
    cfg.command = Some(name.to_string());
    cfg.validate()?;
    install_thread_pool(args.threads)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match name {
        "rearrange" => cmd_rearrange(&cfg, &out),
        "seminorm" => cmd_seminorm(&cfg, &out),
        "counterexample" => cmd_counterexample(&cfg, &out),
        "hardy" => cmd_hardy(&cfg, &out),
        "theorem2" => cmd_theorem2(&cfg, &out),
        "constants" => cmd_constants(&cfg),
        "descend" => cmd_descend(&cfg, &out),
        _ => unreachable!("command names are fixed above"),
    }
}

fn parse_placement(text: &str) -> Result<Placement> {
    match text {
        "boundary" => Ok(Placement::Boundary),
        "center" => Ok(Placement::Center),
        "auto" => Ok(Placement::Auto),
        other => {
            let point: std::result::Result<Vec<f64>, _> =
                other.split(',').map(|c| c.trim().parse()).collect();
            match point {
                Ok(point) if !point.is_empty() => Ok(Placement::Explicit { point }),
                _ => Err(Error::InvalidInput(format!(
                    "placement must be boundary, center, auto or a comma-separated \
                     point, got {other:?}"
                ))),
            }
        }
    }
}

fn install_thread_pool(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var("GAGLIARDO_THREADS") {
            Ok(text) => Some(text.parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "GAGLIARDO_THREADS must be a thread count, got {text:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::InvalidInput("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

/// Read a grid-function file, picking the layout by its leading bytes.
fn read_grid_auto(path: &Path) -> Result<GridFunction> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"GGFB") {
        GridFunction::read_binary(path)
    } else {
        GridFunction::read_csv(path)
    }
}

/// Bounding box of a grid as a domain; the zero ring of the grid keeps
/// the support clear of its boundary, so it is always a valid hull.
fn grid_box_hull(u: &GridFunction) -> Domain {
    let hi: Vec<f64> = u
        .origin
        .iter()
        .zip(&u.shape)
        .map(|(o, &s)| o + s as f64 * u.h)
        .collect();
    match u.n {
        1 => Domain::interval(u.origin[0], hi[0]),
        _ => Domain::Rect {
            lo: u.origin.clone(),
            hi,
        },
    }
}

#[derive(Serialize)]
struct DistributionCheck {
    threshold: f64,
    input_measure: f64,
    profile_measure: f64,
}

#[derive(Serialize)]
struct RearrangeChecks {
    l1_input: f64,
    l1_profile: f64,
    l2_input: f64,
    l2_profile: f64,
    linf_input: f64,
    linf_profile: f64,
    distribution_checks: Vec<DistributionCheck>,
}

fn cmd_rearrange(cfg: &RunConfig, out: &Path) -> Result<u8> {
    let u = read_grid_auto(Path::new(cfg.require_input()?))?;
    let profile = rearrange(&u);
    let profile_path = out.join("profile.csv");
    if let Some(parent) = profile_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    profile.write_csv(&profile_path, &stamp_comments(cfg))?;
    let linf = u.lp_norm(f64::INFINITY)?;
    let mut distribution_checks = Vec::new();
    for frac in [0.25, 0.5, 0.75] {
        let t = frac * linf;
        if t > 0.0 {
            distribution_checks.push(DistributionCheck {
                threshold: t,
                input_measure: distribution(&u, t)?,
                profile_measure: profile.distribution_measure(t)?,
            });
        }
    }
    let checks = RearrangeChecks {
        l1_input: u.lp_norm(1.0)?,
        l1_profile: profile.lp_norm(1.0)?,
        l2_input: u.lp_norm(2.0)?,
        l2_profile: profile.lp_norm(2.0)?,
        linf_input: linf,
        linf_profile: profile.lp_norm(f64::INFINITY)?,
        distribution_checks,
    };
    let check_path = out.join("rearrange_check.json");
    write_text(&check_path, &json_artifact(cfg, &checks)?)?;
    println!("wrote {}", profile_path.display());
    println!("wrote {}", check_path.display());
    println!(
        "levels {} cells {} support radius {}",
        profile.levels.len(),
        profile.total_cells(),
        profile.support_radius()
    );
    Ok(0)
}

#[derive(Serialize)]
struct SeminormReport {
    domain_energy: EnergyResult,
    cross_term: f64,
    cross_term_error: f64,
    fullspace_energy: EnergyResult,
}

fn cmd_seminorm(cfg: &RunConfig, out: &Path) -> Result<u8> {
    let d = cfg.require_domain()?;
    let params = cfg.require_params()?;
    let u = read_grid_auto(Path::new(cfg.require_input()?))?;
    let domain_energy = energy_domain(&u, d, params)?;
    let (cross, cross_err) = cross_term_detail(&u, d, params)?;
    let hull = match &cfg.hull {
        Some(hull) => hull.clone(),
        None => grid_box_hull(&u),
    };
    let fullspace = energy_fullspace(&u, params, &hull)?;
    println!(
        "domain energy {} (est {}, {:.2}s)",
        domain_energy.value,
        domain_energy.error_estimate,
        domain_energy.timing_seconds.unwrap_or(0.0)
    );
    println!("cross term {} (est {cross_err})", cross);
    println!(
        "fullspace energy {} (est {})",
        fullspace.value, fullspace.error_estimate
    );
    let report = SeminormReport {
        domain_energy: energy_for_artifact(&domain_energy),
        cross_term: cross,
        cross_term_error: cross_err,
        fullspace_energy: energy_for_artifact(&fullspace),
    };
    let path = out.join("energy.json");
    write_text(&path, &json_artifact(cfg, &report)?)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_counterexample(cfg: &RunConfig, out: &Path) -> Result<u8> {
    let d = cfg.require_domain()?;
    let params = cfg.require_params()?;
    let report = counterexample_sweep(d, params, &cfg.epsilons, &cfg.placement, cfg.grid_h)?;
    let csv_path = out.join("sweep.csv");
    write_text(&csv_path, &sweep_csv(cfg, &report))?;
    let json_path = out.join("sweep.json");
    write_text(&json_path, &json_artifact(cfg, &report)?)?;
    for r in &report.records {
        println!(
            "epsilon {}: lhs {} rhs {} gap {} {}",
            r.epsilon,
            r.lhs,
            r.rhs,
            r.rhs - r.lhs,
            if r.flagged { "FLAGGED" } else { "not flagged" }
        );
    }
    if let (Some(a), Some(b)) = (report.slope_cross_domain, report.slope_cross_symmetrized) {
        println!("cross-term slopes: domain side {a}, symmetrized side {b}");
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    if cfg.expect_reversal && !report.records.iter().any(|r| r.flagged) {
        eprintln!("expected a reversal but no epsilon was flagged");
        return Ok(2);
    }
    Ok(0)
}

fn cmd_hardy(cfg: &RunConfig, out: &Path) -> Result<u8> {
    let d = cfg.require_domain()?;
    let params = cfg.require_params()?;
    let dirs = match cfg.directions {
        Some(m) => DirectionSet::with_count(params.n, m)?,
        None => DirectionSet::standard(params.n)?,
    };
    let points = d.interior_lattice_points(cfg.sample_points)?;
    let mut samples = Vec::with_capacity(points.len());
    let mut violations = 0usize;
    for point in points {
        let bound = hardy_pointwise_bound_with(d, &point, params, &dirs)?;
        if bound.lhs > bound.rhs * (1.0 + 1e-6) {
            violations += 1;
        }
        samples.push(HardySample {
            point,
            lhs: bound.lhs,
            rhs: bound.rhs,
        });
    }
    let csv_path = out.join("hardy.csv");
    write_text(&csv_path, &hardy_csv(cfg, &samples)?)?;
    let json_path = out.join("hardy.json");
    write_text(&json_path, &json_artifact(cfg, &samples)?)?;
    println!(
        "{} sample points, {} violations of lhs <= rhs",
        samples.len(),
        violations
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    if violations > 0 {
        return Err(Error::Numerical(format!(
            "{violations} sample points violate the pointwise bound"
        )));
    }
    Ok(0)
}

fn cmd_theorem2(cfg: &RunConfig, out: &Path) -> Result<u8> {
    let params = cfg.require_params()?;
    let h = cfg.grid_h.unwrap_or(1.0 / 128.0);
    let corpus = theorem2_corpus(h, cfg.seed)?;
    let suite = theorem2_ratio_suite(&corpus, params)?;
    let csv_path = out.join("ratios.csv");
    write_text(&csv_path, &ratio_csv(cfg, &suite))?;
    let json_path = out.join("ratios.json");
    write_text(&json_path, &json_artifact(cfg, &suite)?)?;
    println!(
        "{} cases, max ratio {}",
        suite.ratios.len(),
        suite.max_ratio
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    Ok(0)
}

fn cmd_constants(cfg: &RunConfig) -> Result<u8> {
    println!("version {}", library_version());
    println!("{OMEGA_N_CONVENTION}");
    for n in 1..=5 {
        println!("alpha_{n} = {}", alpha_n(n));
    }
    for n in 1..=5 {
        println!("omega_{n} = {}", omega_n(n));
    }
    if let Some(params) = &cfg.params {
        let s = sharp_sobolev_constant(params.n, params.sigma)?;
        println!("S({}, {}) = {s}", params.n, params.sigma);
    }
    Ok(0)
}

fn cmd_descend(cfg: &RunConfig, out: &Path) -> Result<u8> {
    let d = cfg.require_domain()?;
    let params = cfg.require_params()?;
    let h = cfg.grid_h.ok_or_else(|| {
        Error::InvalidInput("configuration is missing \"grid_h\" for descent".into())
    })?;
    let report = best_constant_descent(d, params, h, cfg.iterations, cfg.step)?;
    let reference = sharp_sobolev_constant(params.n, params.sigma)?;
    let summary = DescentSummary::new(&report, reference);
    let csv_path = out.join("descent.csv");
    write_text(&csv_path, &descent_csv(cfg, &report))?;
    let json_path = out.join("descent.json");
    write_text(&json_path, &json_artifact(cfg, &summary)?)?;
    let u_path = out.join("final_u.csv");
    report.final_u.write_csv(&u_path)?;
    println!(
        "quotient {} after {} accepted steps (fullspace constant {})",
        summary.final_quotient,
        report.trace.len() - 1,
        reference
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    println!("wrote {}", u_path.display());
    Ok(0)
}
