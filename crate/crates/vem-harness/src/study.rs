//! The convergence and stability studies.
//!
//! Per level: build the local space on every cell, interpolate the analytic
//! field (or draw random inputs), evaluate the error metrics, aggregate as a
//! root-sum-square over cells. Cells are processed in parallel; aggregation
//! is order-fixed, so identical configurations produce identical tables.
//!
//! Metric columns: `L2_interp` is the reconstruction-measured interpolation
//! error (2D only); `diff_err` is the exactly computable commuting-quantity
//! error (rot in 2D edge, div in 2D/3D face, the curl surrogate in 3D edge);
//! `proj_surrogate` is `‖v − Π⁰ (interpolant)‖` with `Π⁰_{k+1}` (2D and 3D
//! face) or `Π⁰_k` (3D edge).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use vem::field::{AnalyticField2, AnalyticField3};
use vem::mesh::{generate_mesh, validate, AssumptionParams, Mesh};
use vem::reconstruct::{difference_norm, VirtualEvaluator};
use vem::vem2d::{
    self, build_space2d, discrete_mass2d, stabilization2d, Field2, Space2D,
};
use vem::vem3d::{self, build_space3d, discrete_mass3d, stabilization3d, Field3};

use crate::config::{FamilyChoice, StudyConfig, VariantChoice};
use crate::fields;
use crate::table::{ErrorTable, Row};

fn family2(f: FamilyChoice) -> vem2d::Family {
    match f {
        FamilyChoice::Edge => vem2d::Family::Edge,
        FamilyChoice::Face => vem2d::Family::Face,
    }
}

fn variant2(v: VariantChoice) -> vem2d::Variant {
    match v {
        VariantChoice::Standard => vem2d::Variant::Standard,
        VariantChoice::Serendipity => vem2d::Variant::Serendipity,
    }
}

fn family3(f: FamilyChoice) -> vem3d::Family3 {
    match f {
        FamilyChoice::Edge => vem3d::Family3::Edge,
        FamilyChoice::Face => vem3d::Family3::Face,
    }
}

fn variant3(v: VariantChoice) -> vem3d::Variant3 {
    match v {
        VariantChoice::Standard => vem3d::Variant3::Standard,
        VariantChoice::Serendipity => vem3d::Variant3::Serendipity,
    }
}

fn build_cell_space2d(mesh: &Mesh, c: usize, cfg: &StudyConfig) -> anyhow::Result<Space2D> {
    let geom = mesh.face_geom(c, 2 * cfg.k + 6)?;
    Ok(build_space2d(geom, cfg.k, family2(cfg.family), variant2(cfg.variant))?)
}

/// Reconstruction machinery shared by all cells of one translation-congruence
/// class: the evaluator and a study-variant space, both on the barycenter-
/// centered copy of the polygon. DoF values are translation invariant, so a
/// cell's DoFs feed the centered reconstruction directly; only field
/// evaluations shift.
struct CellOracle {
    ev: VirtualEvaluator,
    space: Space2D,
}

fn centered_vertices(mesh: &Mesh, c: usize) -> anyhow::Result<(Vec<[f64; 2]>, [f64; 2])> {
    let geom = mesh.face_geom(c, 0)?;
    let b = [geom.frame.barycenter[0], geom.frame.barycenter[1]];
    let verts = geom
        .vertices
        .iter()
        .map(|v| [v[0] - b[0], v[1] - b[1]])
        .collect();
    Ok((verts, b))
}

fn congruence_key(verts: &[[f64; 2]], h: f64) -> Vec<i64> {
    let scale = 1e7 / h;
    verts
        .iter()
        .flat_map(|v| [(v[0] * scale).round() as i64, (v[1] * scale).round() as i64])
        .collect()
}

/// One shared oracle per congruence class of cells, built in parallel.
fn build_oracle_cache(
    mesh: &Mesh,
    cfg: &StudyConfig,
    oracle_r: usize,
) -> anyhow::Result<(Vec<usize>, Vec<CellOracle>, Vec<[f64; 2]>)> {
    let n_cells = mesh.n_cells();
    let mut class_of = Vec::with_capacity(n_cells);
    let mut shifts = Vec::with_capacity(n_cells);
    let mut keys: std::collections::HashMap<Vec<i64>, usize> = std::collections::HashMap::new();
    let mut reps: Vec<Vec<[f64; 2]>> = Vec::new();
    for c in 0..n_cells {
        let (verts, b) = centered_vertices(mesh, c)?;
        let h = mesh.cell_frame(c).diameter;
        let key = congruence_key(&verts, h);
        let next_id = reps.len();
        let id = *keys.entry(key).or_insert(next_id);
        if id == reps.len() {
            reps.push(verts);
        }
        class_of.push(id);
        shifts.push(b);
    }
    let oracles: Vec<CellOracle> = reps
        .into_par_iter()
        .map(|verts| -> anyhow::Result<CellOracle> {
            let geom = vem::mesh::FaceGeom::new(verts, 2 * cfg.k + 6)?;
            let ev = VirtualEvaluator::build(&geom, cfg.k, oracle_r, cfg.k + cfg.oracle_q_extra)?;
            let space = build_space2d(geom, cfg.k, family2(cfg.family), variant2(cfg.variant))?;
            Ok(CellOracle { ev, space })
        })
        .collect::<anyhow::Result<_>>()?;
    Ok((class_of, oracles, shifts))
}

struct Cell2dErrors {
    l2: f64,
    diff: f64,
    proj: f64,
    oracle_self: f64,
}

/// Errors of one 2D cell; `gate` additionally measures the oracle self-error
/// against a one-level-finer reconstruction.
fn cell_errors_2d(
    mesh: &Mesh,
    c: usize,
    cfg: &StudyConfig,
    field: &AnalyticField2,
    oracle_r: usize,
    gate: bool,
) -> anyhow::Result<Cell2dErrors> {
    let space = build_cell_space2d(mesh, c, cfg)?;
    let k = cfg.k;
    let quad = 2 * k + cfg.quad_extra;
    let dofs = space.eval_dofs(&Field2::Analytic(field), quad);

    // Exact commuting-quantity error: ‖rot v − rot v_h‖ (edge) or the div
    // analog (face).
    let diff_poly = space.diff_poly(&dofs);
    let rule = space.geom.face_rule(quad);
    let mut diff2 = 0.0;
    for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
        let exact = match cfg.family {
            FamilyChoice::Edge => (field.rot)(p[0], p[1]),
            FamilyChoice::Face => (field.div)(p[0], p[1]),
        };
        let d = exact - diff_poly.eval(p)[0];
        diff2 += w * d * d;
    }

    // Projection surrogate: ‖v − Π⁰_{k+1} v_h‖.
    let proj = space.l2_projection(&dofs, k + 1)?;
    let mut proj2 = 0.0;
    for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
        let v = field.value(p);
        let q = proj.eval(p);
        proj2 += w * ((v[0] - q[0]).powi(2) + (v[1] - q[1]).powi(2));
    }

    // Interpolation error via the reconstruction.
    let ev = VirtualEvaluator::build(&space.geom, k, oracle_r, k + cfg.oracle_q_extra)?;
    let rec = ev.reconstruct(&space, &dofs)?;
    let l2 = ev.error_against(&rec, |x| field.value(&[x[0], x[1], 0.0]));

    let oracle_self = if gate {
        let ev_fine = VirtualEvaluator::build(&space.geom, k, oracle_r + 1, k + cfg.oracle_q_extra)?;
        let rec_fine = ev_fine.reconstruct(&space, &dofs)?;
        difference_norm(&ev, &rec, &ev_fine, &rec_fine)
    } else {
        0.0
    };

    Ok(Cell2dErrors { l2, diff: diff2.sqrt(), proj: proj2.sqrt(), oracle_self })
}

struct Cell3dErrors {
    diff: f64,
    proj: f64,
}

fn cell_errors_3d(
    mesh: &Mesh,
    c: usize,
    cfg: &StudyConfig,
    field: &AnalyticField3,
) -> anyhow::Result<Cell3dErrors> {
    let k = cfg.k;
    let quad = 2 * k + cfg.quad_extra;
    let space = build_space3d(mesh, c, k, family3(cfg.family), variant3(cfg.variant))?;
    let dofs = space.eval_dofs(&Field3::Analytic(field), quad);
    let rule = space.cell.cell_rule(quad);
    match cfg.family {
        FamilyChoice::Face => {
            // Exact div error and Π⁰_{k+1} surrogate.
            let div = space.div_poly(&dofs)?;
            let mut diff2 = 0.0;
            for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
                let d = (field.div)(p[0], p[1], p[2]) - div.eval(p)[0];
                diff2 += w * d * d;
            }
            let proj = space.l2_projection(&dofs, k + 1)?;
            let mut proj2 = 0.0;
            for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
                let v = field.value(p);
                let q = proj.eval(p);
                proj2 += w
                    * ((v[0] - q[0]).powi(2) + (v[1] - q[1]).powi(2) + (v[2] - q[2]).powi(2));
            }
            Ok(Cell3dErrors { diff: diff2.sqrt(), proj: proj2.sqrt() })
        }
        FamilyChoice::Edge => {
            // Curl surrogate through the curl map and the face-family
            // projector, and the Π⁰_k surrogate.
            let face_space = build_space3d(mesh, c, k, vem3d::Family3::Face, vem3d::Variant3::Standard)?;
            let curl_dofs = space.curl_to_face_dofs(&face_space, &dofs)?;
            let curl_proj = face_space.l2_projection(&curl_dofs, k + 1)?;
            let mut diff2 = 0.0;
            for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
                let cv = field.curl_value(p);
                let q = curl_proj.eval(p);
                diff2 += w
                    * ((cv[0] - q[0]).powi(2) + (cv[1] - q[1]).powi(2) + (cv[2] - q[2]).powi(2));
            }
            let proj = space.l2_projection(&dofs, k)?;
            let mut proj2 = 0.0;
            for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
                let v = field.value(p);
                let q = proj.eval(p);
                proj2 += w
                    * ((v[0] - q[0]).powi(2) + (v[1] - q[1]).powi(2) + (v[2] - q[2]).powi(2));
            }
            Ok(Cell3dErrors { diff: diff2.sqrt(), proj: proj2.sqrt() })
        }
    }
}

/// Interpolation-rate study.
pub fn run_convergence(cfg: &StudyConfig) -> anyhow::Result<ErrorTable> {
    cfg.validate().map_err(anyhow::Error::msg)?;
    let mut rows = Vec::with_capacity(cfg.levels);
    let mut oracle_r = cfg.oracle_r;
    let mut gate_data = None;
    for li in 0..cfg.levels {
        let level = cfg.first_level + li;
        let mesh = generate_mesh(cfg.mesh, level, cfg.seed);
        let report = validate(&mesh, &AssumptionParams::default());
        let n_cells = mesh.n_cells();
        let h_max = mesh.max_cell_diameter();
        let (l2s, diffs, projs): (f64, f64, f64) = if cfg.dim == 2 {
            let field = fields::field2(&cfg.field, cfg.seed).map_err(anyhow::Error::msg)?;
            // Oracle accuracy gate at the coarsest level: raise the fan
            // refinement until the self-error is ≤ 1% of the measured error.
            if li == 0 {
                loop {
                    let results: Vec<Cell2dErrors> = (0..n_cells)
                        .into_par_iter()
                        .map(|c| cell_errors_2d(&mesh, c, cfg, &field, oracle_r, true))
                        .collect::<anyhow::Result<_>>()?;
                    let gate: f64 = results.iter().map(|r| r.oracle_self * r.oracle_self).sum::<f64>().sqrt();
                    let l2: f64 = results.iter().map(|r| r.l2 * r.l2).sum::<f64>().sqrt();
                    if gate <= 0.01 * l2 || l2 == 0.0 || oracle_r >= cfg.oracle_r + 2 {
                        gate_data = Some((gate, l2));
                        break (
                            l2 * l2,
                            results.iter().map(|r| r.diff * r.diff).sum(),
                            results.iter().map(|r| r.proj * r.proj).sum(),
                        );
                    }
                    oracle_r += 1;
                }
            } else {
                let results: Vec<Cell2dErrors> = (0..n_cells)
                    .into_par_iter()
                    .map(|c| cell_errors_2d(&mesh, c, cfg, &field, oracle_r, false))
                    .collect::<anyhow::Result<_>>()?;
                (
                    results.iter().map(|r| r.l2 * r.l2).sum(),
                    results.iter().map(|r| r.diff * r.diff).sum(),
                    results.iter().map(|r| r.proj * r.proj).sum(),
                )
            }
        } else {
            let field = fields::field3(&cfg.field, cfg.seed).map_err(anyhow::Error::msg)?;
            let results: Vec<Cell3dErrors> = (0..n_cells)
                .into_par_iter()
                .map(|c| cell_errors_3d(&mesh, c, cfg, &field))
                .collect::<anyhow::Result<_>>()?;
            (
                0.0,
                results.iter().map(|r| r.diff * r.diff).sum(),
                results.iter().map(|r| r.proj * r.proj).sum(),
            )
        };
        rows.push(Row {
            level,
            h_max,
            n_cells,
            l2_interp: l2s.sqrt(),
            rate_l2: None,
            diff_err: diffs.sqrt(),
            rate_diff: None,
            proj_surrogate: projs.sqrt(),
            rate_proj: None,
            stab_ratio_min: 0.0,
            stab_ratio_max: 0.0,
            assumption_min_ratio: report.min_star_ratio,
        });
    }
    ErrorTable::compute_rates(&mut rows);
    Ok(ErrorTable {
        rows,
        config: serde_json::to_value(cfg)?,
        oracle_self_error: gate_data.map(|g| g.0),
        oracle_gate_reference: gate_data.map(|g| g.1),
        oracle_r_used: if cfg.dim == 2 { Some(oracle_r) } else { None },
        mass_ratio_min: None,
        mass_ratio_max: None,
    })
}

/// Random DoF vector with entries scaled per descriptor class like the DoFs
/// of an O(1) field.
fn random_dofs2(space: &Space2D, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let h = space.geom.frame.diameter;
    DVector::from_fn(space.dim(), |i, _| {
        let scale = match space.layout[i] {
            vem2d::DofDesc::EdgeMoment { edge, .. } => space.geom.edges[edge].len,
            vem2d::DofDesc::InteriorX { .. } => h * h * h,
            vem2d::DofDesc::Diff { .. } => h,
        };
        scale * rng.gen_range(-1.0..1.0)
    })
}

struct CellStab {
    smin: f64,
    smax: f64,
    mass_min: f64,
    mass_max: f64,
}

fn cell_stability_2d(mesh: &Mesh, c: usize, cfg: &StudyConfig, level: usize) -> anyhow::Result<CellStab> {
    let space = build_cell_space2d(mesh, c, cfg)?;
    let s = stabilization2d(&space)?;
    let m = discrete_mass2d(&space)?;
    let ev = VirtualEvaluator::build(&space.geom, cfg.k, cfg.oracle_r.min(2), cfg.k + cfg.oracle_q_extra)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (level as u64) << 32 ^ c as u64);
    let mut out = CellStab { smin: f64::MAX, smax: 0.0, mass_min: f64::MAX, mass_max: 0.0 };
    for _ in 0..cfg.samples {
        let d = random_dofs2(&space, &mut rng);
        let rec = ev.reconstruct(&space, &d)?;
        let norm2 = ev.norm(&rec).powi(2);
        if norm2 <= 0.0 {
            continue;
        }
        let sv = (d.transpose() * &s * &d)[(0, 0)] / norm2;
        let mv = (d.transpose() * &m * &d)[(0, 0)] / norm2;
        out.smin = out.smin.min(sv);
        out.smax = out.smax.max(sv);
        out.mass_min = out.mass_min.min(mv);
        out.mass_max = out.mass_max.max(mv);
    }
    Ok(out)
}

fn cell_stability_3d(mesh: &Mesh, c: usize, cfg: &StudyConfig, level: usize) -> anyhow::Result<CellStab> {
    let k = cfg.k;
    let space = build_space3d(mesh, c, k, family3(cfg.family), variant3(cfg.variant))?;
    let s = stabilization3d(&space)?;
    let m = discrete_mass3d(&space)?;
    let deg = match cfg.family {
        FamilyChoice::Face => k - 1,
        FamilyChoice::Edge => k,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (level as u64) << 32 ^ c as u64);
    let mut out = CellStab { smin: f64::MAX, smax: 0.0, mass_min: f64::MAX, mass_max: 0.0 };
    for _ in 0..cfg.samples {
        let mut p = vem::poly::Poly::zeros(space.cell.frame, 3, deg);
        for cc in p.coeffs.iter_mut() {
            *cc = rng.gen_range(-1.0..1.0);
        }
        let d = space.eval_dofs(&Field3::Polynomial(&p), 2 * k + 2);
        let norm2 = space.cell.moments.inner(&p, &p);
        if norm2 <= 0.0 {
            continue;
        }
        let sv = (d.transpose() * &s * &d)[(0, 0)] / norm2;
        let mv = (d.transpose() * &m * &d)[(0, 0)] / norm2;
        out.smin = out.smin.min(sv);
        out.smax = out.smax.max(sv);
        out.mass_min = out.mass_min.min(mv);
        out.mass_max = out.mass_max.max(mv);
    }
    Ok(out)
}

/// Stability-band study: records min/max of `S(v,v)/‖v‖²` per level (random
/// virtual inputs with reconstruction norms in 2D, random polynomial members
/// with exact norms in 3D), plus the discrete-mass ratios.
pub fn run_stability(cfg: &StudyConfig) -> anyhow::Result<ErrorTable> {
    cfg.validate().map_err(anyhow::Error::msg)?;
    let mut rows = Vec::with_capacity(cfg.levels);
    let mut mass_min = f64::MAX;
    let mut mass_max: f64 = 0.0;
    for li in 0..cfg.levels {
        let level = cfg.first_level + li;
        let mesh = generate_mesh(cfg.mesh, level, cfg.seed);
        let report = validate(&mesh, &AssumptionParams::default());
        let n_cells = mesh.n_cells();
        let results: Vec<CellStab> = (0..n_cells)
            .into_par_iter()
            .map(|c| {
                if cfg.dim == 2 {
                    cell_stability_2d(&mesh, c, cfg, level)
                } else {
                    cell_stability_3d(&mesh, c, cfg, level)
                }
            })
            .collect::<anyhow::Result<_>>()?;
        let smin = results.iter().map(|r| r.smin).fold(f64::MAX, f64::min);
        let smax = results.iter().map(|r| r.smax).fold(0.0, f64::max);
        mass_min = mass_min.min(results.iter().map(|r| r.mass_min).fold(f64::MAX, f64::min));
        mass_max = mass_max.max(results.iter().map(|r| r.mass_max).fold(0.0, f64::max));
        rows.push(Row {
            level,
            h_max: mesh.max_cell_diameter(),
            n_cells,
            l2_interp: 0.0,
            rate_l2: None,
            diff_err: 0.0,
            rate_diff: None,
            proj_surrogate: 0.0,
            rate_proj: None,
            stab_ratio_min: smin,
            stab_ratio_max: smax,
            assumption_min_ratio: report.min_star_ratio,
        });
    }
    Ok(ErrorTable {
        rows,
        config: serde_json::to_value(cfg)?,
        oracle_self_error: None,
        oracle_gate_reference: None,
        oracle_r_used: None,
        mass_ratio_min: Some(mass_min),
        mass_ratio_max: Some(mass_max),
    })
}

/// Band spread of the stabilization ratios across levels:
/// `max(stab_ratio_max) / min(stab_ratio_min)`.
pub fn band_spread(table: &ErrorTable) -> f64 {
    let lo = table.rows.iter().map(|r| r.stab_ratio_min).fold(f64::MAX, f64::min);
    let hi = table.rows.iter().map(|r| r.stab_ratio_max).fold(0.0_f64, f64::max);
    hi / lo
}
