//! `steklov`: closed-form spectra, finite element spectra, Möbius
//! balancing, free boundary checks and verification campaigns.
//!
//! Exit status is 0 on success, 1 when a check fails or a computation
//! does not converge, and 2 for bad input.

mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use steklov_core::annulus::{self, FlatAnnulus};
use steklov_core::bounds::{self, CampaignConfig, OutputFormat};
use steklov_core::catenoid;
use steklov_core::fem::{FemOptions, SteklovSolver};
use steklov_core::free_boundary::{check_free_boundary, FreeBoundaryThresholds};
use steklov_core::mesh::{self, fixtures, SurfaceMesh};
use steklov_core::moebius::{self, OptimizerConfig, VolumeObjective};
use steklov_core::Error;

use output::{emit, Format, Output};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Failure(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
            CliError::Core(e) => match e {
                Error::NoConvergence { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::NegativeDiscriminant { .. }
                | Error::OutOfDomain { .. } => 1,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "steklov", version, about = "Steklov eigenvalue workbench")]
struct Cli {
    /// Numerical tolerance; its meaning depends on the subcommand.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    output: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Objective {
    Boundary,
    Area,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeshKind {
    Disk,
    EquatorialDisk,
    Catenoid,
    Pants,
    TorusWithHole,
    EmbeddedAnnulus,
    RandomAnnulus,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form spectrum of the flat annulus with boundary factors
    /// f0, fT and modulus T. --tol is the relative clustering tolerance.
    Annulus {
        #[arg(long, allow_hyphen_values = true)]
        f0: f64,
        #[arg(long = "fT", allow_hyphen_values = true)]
        f_t: f64,
        #[arg(long = "T", allow_hyphen_values = true)]
        modulus: f64,
        /// Highest angular frequency.
        #[arg(long, default_value_t = 8)]
        nmax: u32,
    },
    /// Modulus T(α) at which the first two bands meet.
    CriticalModulus {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
    },
    /// Catenoid family member with parameter a.
    Catenoid {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
    },
    /// Lowest Steklov eigenvalues of a mesh file.
    Fem {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
    /// Möbius map balancing the boundary of a mesh in the unit ball.
    /// --tol bounds the boundary mean relative to length.
    Balance {
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Largest boundary length or area found over the Möbius orbit.
    ConformalVolume {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_enum, default_value = "boundary")]
        objective: Objective,
        #[arg(long, default_value_t = 32)]
        starts: usize,
    },
    /// Free boundary residuals; --tol sets all thresholds.
    CheckFreeBoundary {
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Run a verification campaign from a TOML key = value file.
    /// --seed, --tol (finite element tolerance), --output and --out
    /// override the file.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write a fixture mesh in the text mesh format.
    MakeMesh {
        #[arg(long, value_enum)]
        kind: MeshKind,
        /// Primary resolution (rings, cells along t, ...).
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Cells around.
        #[arg(long, default_value_t = 48)]
        n_theta: usize,
    },
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Input(format!("--{name} must be positive, got {v}")))
    }
}

fn load_mesh(path: &PathBuf) -> Result<SurfaceMesh, CliError> {
    Ok(mesh::load(path)?)
}

fn run(cli: &Cli) -> Result<(Vec<u8>, bool), CliError> {
    let tol = cli.tol.map(|t| positive("tol", t)).transpose()?;
    let done = |o: Output| -> Result<(Vec<u8>, bool), CliError> { Ok((o.render(cli.output)?, true)) };
    match &cli.command {
        Command::Annulus { f0, f_t, modulus, nmax } => {
            let m = FlatAnnulus::new(*f0, *f_t, *modulus)?;
            let clusters = annulus::spectrum(&m, *nmax, tol.unwrap_or(annulus::DEFAULT_CLUSTER_TOL))?;
            let class = annulus::classify(&m);
            let rows = clusters
                .iter()
                .map(|c| vec![format!("{:e}", c.value), c.multiplicity.to_string()])
                .collect();
            let body = json!({
                "f0": f0, "fT": f_t, "T": modulus, "nmax": nmax,
                "sigma1": annulus::sigma1(&m),
                "sigma1L": annulus::sigma1_length(&m),
                "classification": class,
                "clusters": clusters,
            });
            done(Output::new("annulus", body)?.with_table(&["value", "multiplicity"], rows))
        }
        Command::CriticalModulus { alpha } => {
            let alpha = positive("alpha", *alpha)?;
            let t = annulus::critical_modulus(alpha, tol.unwrap_or(1e-13))?;
            let body = json!({
                "alpha": alpha,
                "T": t,
                "supercritical_threshold": annulus::supercritical_threshold(alpha),
                "sigma1L": annulus::sigma1_length(&FlatAnnulus::with_ratio(alpha, t)?),
            });
            done(Output::new("critical-modulus", body)?)
        }
        Command::Catenoid { a } => {
            let member = catenoid::solve_family(*a, tol.unwrap_or(1e-14))?;
            done(Output::new("catenoid", json!({ "member": member, "residual": member.residual() }))?.with_table(
                &["a", "t1", "t2", "alpha", "T", "sigma1L_max", "R1", "R2"],
                vec![[member.a, member.t1, member.t2, member.alpha, member.modulus, member.sigma1_length_max, member.r1, member.r2]
                    .iter()
                    .map(|x| format!("{x:e}"))
                    .collect()],
            ))
        }
        Command::Fem { mesh, count } => {
            let mesh = load_mesh(mesh)?;
            let solver = SteklovSolver::new(&mesh, FemOptions::default())?;
            let spec = solver.spectrum(*count)?;
            let m = mesh.measures();
            let rows = spec
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(k, v)| vec![k.to_string(), format!("{v:e}")])
                .collect();
            let body = json!({
                "vertices": mesh.vertex_count(),
                "topology": mesh.topology(),
                "boundary_length": m.total_boundary_length,
                "area": m.area,
                "eigenvalues": spec.eigenvalues,
                "clusters": spec.clusters,
                "sigma1L": spec.eigenvalues.get(1).map(|s| s * m.total_boundary_length),
            });
            done(Output::new("fem", body)?.with_table(&["index", "eigenvalue"], rows))
        }
        Command::Balance { mesh } => {
            let mesh = load_mesh(mesh)?;
            let b = moebius::balance(&mesh, tol.unwrap_or(1e-10))?;
            done(Output::new("balance", &b)?)
        }
        Command::ConformalVolume { mesh, objective, starts } => {
            let mesh = load_mesh(mesh)?;
            let cfg = OptimizerConfig {
                starts: *starts,
                seed: cli.seed.unwrap_or(0),
                tolerance: tol.unwrap_or(OptimizerConfig::default().tolerance),
                ..OptimizerConfig::default()
            };
            let objective = match objective {
                Objective::Boundary => VolumeObjective::Boundary,
                Objective::Area => VolumeObjective::Area,
            };
            let est = moebius::conformal_volume_sup(&mesh, objective, &cfg)?;
            let lower = match objective {
                VolumeObjective::Boundary => 2.0 * PI,
                VolumeObjective::Area => PI,
            };
            let body = json!({
                "estimate": est,
                "lower_bound": lower,
                "relative_margin": (est.best_value - lower) / lower,
            });
            done(Output::new("conformal-volume", body)?)
        }
        Command::CheckFreeBoundary { mesh } => {
            let mesh = load_mesh(mesh)?;
            let thresholds = tol.map(FreeBoundaryThresholds::uniform).unwrap_or_default();
            let r = check_free_boundary(&mesh, &thresholds)?;
            let pass = r.pass;
            Ok((Output::new("check-free-boundary", &r)?.render(cli.output)?, pass))
        }
        Command::Verify { config } => {
            let mut cfg = match config {
                Some(p) => CampaignConfig::load(p)?,
                None => CampaignConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.fem_tol = t;
            }
            cfg.output = match cli.output {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            let outcome = bounds::run_campaign(&cfg)?;
            for (tag, s) in &outcome.summary {
                eprintln!("{tag:<13} passed {:>4}  failed {:>3}", s.passed, s.failed);
            }
            for e in &outcome.errors {
                eprintln!("error in {}: {}", e.id, e.message);
            }
            for r in outcome.failures() {
                eprintln!("FAIL {} {}: lhs {:e} rhs {:e} margin {:e}", r.id, r.tag, r.lhs, r.rhs, r.margin);
            }
            let mut buf = Vec::new();
            bounds::write_outcome(&mut buf, &outcome, cfg.output)?;
            if cli.out.is_none() {
                if let Some(path) = &cfg.out {
                    emit(&buf, Some(path))?;
                    return Ok((Vec::new(), outcome.passed()));
                }
            }
            Ok((buf, outcome.passed()))
        }
        Command::MakeMesh { kind, n, n_theta } => {
            let seed = cli.seed.unwrap_or(0);
            let mesh = match kind {
                MeshKind::Disk => mesh::build_disk_mesh(*n, *n_theta)?,
                MeshKind::EquatorialDisk => fixtures::equatorial_disk(*n, *n_theta)?,
                MeshKind::Catenoid => catenoid::catenoid_mesh(0.0, *n, *n_theta)?.mesh,
                MeshKind::Pants => fixtures::pants(*n % fixtures::PANTS_VARIANTS)?,
                MeshKind::TorusWithHole => fixtures::torus_with_hole(*n_theta, *n)?,
                MeshKind::EmbeddedAnnulus => fixtures::random_embedded_annulus(seed, *n, *n_theta)?,
                MeshKind::RandomAnnulus => bounds::gen_random_annulus(seed, *n_theta)?,
            };
            Ok((mesh::write_to(&mesh).into_bytes(), true))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok((bytes, pass)) => {
            if !bytes.is_empty() {
                if let Err(e) = emit(&bytes, cli.out.as_deref()) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code());
                }
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
