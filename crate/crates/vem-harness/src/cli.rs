//! Command-line interface: `convergence`, `stability`, `mesh-check`,
//! `unisolvence`, `gen-mesh`.
//!
//! Exit codes: 0 success, 1 validation/configuration error, 2 an
//! acceptance threshold requested via `--assert` failed.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use vem::mesh::{generate_mesh, validate, AssumptionParams, MeshFamily};
use vem::reconstruct::unisolvence_report;
use vem::vem2d::{build_space2d, Family, Variant};

use crate::config::{FamilyChoice, StudyConfig, VariantChoice};
use crate::study::{band_spread, run_convergence, run_stability};

#[derive(Parser)]
#[command(name = "vem-harness", about = "Refinement studies for local virtual element spaces")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StudyArgs {
    /// Load the full study configuration from a JSON file (other study
    /// flags are then ignored).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value = "edge")]
    family: String,
    #[arg(long, default_value = "standard")]
    variant: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = "square_grid")]
    mesh: String,
    /// Number of refinement levels.
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// First level of the refinement sequence.
    #[arg(long, default_value_t = 0)]
    first_level: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "trig")]
    field: String,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long = "gamma-hat", default_value_t = 1.0)]
    gamma_hat: f64,
    /// Random inputs per level (stability mode).
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Reconstruction fan refinement (2D).
    #[arg(long, default_value_t = 3)]
    oracle_r: usize,
    /// Reconstruction element degree is k + this.
    #[arg(long, default_value_t = 2)]
    oracle_q_extra: usize,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON output path (table + config echo).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Suppress the timestamp comment line in the CSV.
    #[arg(long)]
    no_timestamp: bool,
    /// Exit 2 when a threshold below is violated.
    #[arg(long = "assert")]
    assert_thresholds: bool,
    /// Minimum observed rate (finest pair) of the L2 column.
    #[arg(long)]
    min_rate_l2: Option<f64>,
    /// Minimum observed rate of the diff column.
    #[arg(long)]
    min_rate_diff: Option<f64>,
    /// Minimum observed rate of the projection-surrogate column.
    #[arg(long)]
    min_rate_proj: Option<f64>,
    /// Maximum stability band spread across levels.
    #[arg(long)]
    max_band_spread: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolation-rate study over a refinement sequence.
    Convergence(StudyArgs),
    /// Stabilization-band study over a refinement sequence.
    Stability(StudyArgs),
    /// Check the mesh regularity assumptions of a family across levels.
    MeshCheck {
        #[arg(long, default_value = "square_grid")]
        mesh: String,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        rho: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Rank/conditioning report for the DoF and serendipity systems.
    Unisolvence {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Generate a mesh of a refinement family and write its JSON document.
    GenMesh {
        #[arg(long, default_value = "square_grid")]
        mesh: String,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn study_config(args: &StudyArgs) -> Result<StudyConfig, String> {
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        return serde_json::from_str(&text).map_err(|e| format!("bad config: {e}"));
    }
    Ok(StudyConfig {
        dim: args.dim,
        family: FamilyChoice::from_str(&args.family)?,
        variant: VariantChoice::from_str(&args.variant)?,
        k: args.k,
        mesh: MeshFamily::from_str(&args.mesh)?,
        levels: args.levels,
        first_level: args.first_level,
        seed: args.seed,
        field: args.field.clone(),
        quad_extra: 6,
        oracle_r: args.oracle_r,
        oracle_q_extra: args.oracle_q_extra,
        gamma: args.gamma,
        gamma_hat: args.gamma_hat,
        samples: args.samples,
        no_timestamp: args.no_timestamp,
    })
}

fn emit(table: &crate::table::ErrorTable, args: &StudyArgs) -> Result<(), String> {
    let csv = table.to_csv(!args.no_timestamp);
    match &args.out {
        Some(path) => std::fs::write(path, &csv).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{csv}"),
    }
    if let Some(path) = &args.json {
        std::fs::write(path, table.to_json()).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn check_thresholds(table: &crate::table::ErrorTable, args: &StudyArgs) -> bool {
    let mut ok = true;
    let finest = |metric: fn(&crate::table::Row) -> Option<f64>| table.rows.last().and_then(metric);
    if let Some(min) = args.min_rate_l2 {
        let got = finest(|r| r.rate_l2);
        if got.map_or(true, |g| g < min) {
            eprintln!("rate_L2 {got:?} below required {min}");
            ok = false;
        }
    }
    if let Some(min) = args.min_rate_diff {
        let got = finest(|r| r.rate_diff);
        if got.map_or(true, |g| g < min) {
            eprintln!("rate_diff {got:?} below required {min}");
            ok = false;
        }
    }
    if let Some(min) = args.min_rate_proj {
        let got = finest(|r| r.rate_proj);
        if got.map_or(true, |g| g < min) {
            eprintln!("rate_proj {got:?} below required {min}");
            ok = false;
        }
    }
    if let Some(max) = args.max_band_spread {
        let got = band_spread(table);
        if !(got <= max) {
            eprintln!("stability band spread {got:.3} above allowed {max}");
            ok = false;
        }
    }
    ok
}

/// Runs the CLI; returns the process exit code.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error display
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match cli.command {
        Command::Convergence(args) => {
            let cfg = match study_config(&args) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return 1;
                }
            };
            match run_convergence(&cfg) {
                Ok(table) => {
                    if let Err(e) = emit(&table, &args) {
                        eprintln!("{e}");
                        return 1;
                    }
                    if args.assert_thresholds && !check_thresholds(&table, &args) {
                        return 2;
                    }
                    0
                }
                Err(e) => {
                    eprintln!("study failed: {e}");
                    1
                }
            }
        }
        Command::Stability(args) => {
            let cfg = match study_config(&args) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return 1;
                }
            };
            match run_stability(&cfg) {
                Ok(table) => {
                    if let Err(e) = emit(&table, &args) {
                        eprintln!("{e}");
                        return 1;
                    }
                    if args.assert_thresholds && !check_thresholds(&table, &args) {
                        return 2;
                    }
                    0
                }
                Err(e) => {
                    eprintln!("study failed: {e}");
                    1
                }
            }
        }
        Command::MeshCheck { mesh, levels, seed, rho, eps } => {
            let family = match MeshFamily::from_str(&mesh) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("{e}");
                    return 1;
                }
            };
            let params = AssumptionParams { rho, eps };
            let mut all_ok = true;
            for level in 0..levels {
                let m = generate_mesh(family, level, seed);
                let report = validate(&m, &params);
                println!(
                    "level {level}: cells {}, star ratio ≥ {:.4}, edge ratio ≥ {:.4}, (M) {}, (MC) {}",
                    m.n_cells(),
                    report.min_star_ratio,
                    report.min_edge_ratio,
                    if report.m_pass { "pass" } else { "FAIL" },
                    if report.mc_pass { "pass" } else { "fail" },
                );
                all_ok &= report.m_pass;
            }
            if all_ok {
                0
            } else {
                1
            }
        }
        Command::Unisolvence { dim, k } => {
            if dim != 2 {
                eprintln!("rank reports cover the 2D spaces (per-face building blocks of 3D)");
                return 1;
            }
            let shapes: Vec<(&str, Vec<[f64; 2]>)> = vec![
                ("triangle", vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
                ("square", vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
                (
                    "hexagon",
                    (0..6)
                        .map(|i| {
                            let th = std::f64::consts::PI / 3.0 * i as f64;
                            [th.cos(), th.sin()]
                        })
                        .collect(),
                ),
            ];
            println!("shape k dofs dof_smin/smax ser_rows ser_cols ser_smin/smax");
            for (name, verts) in shapes {
                let geom = match vem::mesh::FaceGeom::new(verts, 2 * k + 6) {
                    Ok(g) => g,
                    Err(e) => {
                        eprintln!("{e}");
                        return 1;
                    }
                };
                let space = match build_space2d(geom, k, Family::Edge, Variant::Standard) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("{e}");
                        return 1;
                    }
                };
                match unisolvence_report(&space, None) {
                    Ok(rep) => println!(
                        "{name} {k} {} {:.3e} {} {} {:.3e}",
                        space.dim(),
                        rep.dof_matrix_smin / rep.dof_matrix_smax,
                        rep.serendipity_rows,
                        rep.serendipity_cols,
                        rep.serendipity_smin / rep.serendipity_smax,
                    ),
                    Err(e) => {
                        eprintln!("{e}");
                        return 1;
                    }
                }
            }
            0
        }
        Command::GenMesh { mesh, level, seed, out } => {
            let family = match MeshFamily::from_str(&mesh) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("{e}");
                    return 1;
                }
            };
            let m = generate_mesh(family, level, seed);
            let doc = m.write();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, doc) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return 1;
                    }
                }
                None => println!("{doc}"),
            }
            0
        }
    }
}
