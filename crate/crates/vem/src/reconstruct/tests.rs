use nalgebra::DVector;
use rand::{Rng, SeedableRng};

use super::*;
use crate::field;
use crate::mesh::FaceGeom;
use crate::vem2d::{build_space2d, Family, Field2, Variant};

fn square() -> FaceGeom {
    FaceGeom::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 14).unwrap()
}

fn pentagon() -> FaceGeom {
    FaceGeom::new(
        vec![[0.0, 0.0], [1.0, 0.1], [1.2, 0.9], [0.5, 1.3], [-0.2, 0.8]],
        14,
    )
    .unwrap()
}

fn random_poly_on(frame: crate::poly::CellFrame, degree: usize, seed: u64) -> Poly {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut p = Poly::zeros(frame, 2, degree);
    for c in p.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    p
}

#[test]
fn polynomials_reconstruct_exactly() {
    // With the polynomial part peeled, members of (P_k)² reconstruct to
    // machine precision at interior points.
    for (geom, name) in [(square(), "square"), (pentagon(), "pentagon")] {
        for k in 1..=2usize {
            let space = build_space2d(geom.clone(), k, Family::Edge, Variant::Standard).unwrap();
            let ev = VirtualEvaluator::build(&geom, k, 2, k + 1).unwrap();
            let p = random_poly_on(geom.frame, k, 7 + k as u64);
            let d = space.eval_dofs(&Field2::Polynomial(&p), 2 * k + 4);
            let rec = ev.reconstruct(&space, &d).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
            let pts: Vec<[f64; 2]> = (0..100)
                .map(|_| loop {
                    let x = [rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.3)];
                    if crate::mesh::facegeom::kernel_distance(&geom.vertices, x) > 0.02 {
                        break x;
                    }
                })
                .collect();
            let vals = ev.eval(&rec, &pts);
            for (x, v) in pts.iter().zip(vals.iter()) {
                let e = p.eval(&[x[0], x[1], 0.0]);
                let err = ((v[0] - e[0]).powi(2) + (v[1] - e[1]).powi(2)).sqrt();
                assert!(err < 1e-8, "{name} k={k} at {x:?}: {err:.3e}");
            }
        }
    }
}

#[test]
fn zero_dofs_give_zero_field() {
    let geom = square();
    let space = build_space2d(geom.clone(), 2, Family::Edge, Variant::Standard).unwrap();
    let ev = VirtualEvaluator::build(&geom, 2, 2, 3).unwrap();
    let rec = ev.reconstruct(&space, &DVector::zeros(space.dim())).unwrap();
    assert!(ev.norm(&rec) < 1e-12);
}

#[test]
fn reconstruction_respects_dofs() {
    // Re-extracting DoFs from the reconstructed field reproduces the input.
    let geom = pentagon();
    let k = 2;
    let space = build_space2d(geom.clone(), k, Family::Edge, Variant::Standard).unwrap();
    let ev = VirtualEvaluator::build(&geom, k, 3, k + 2).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let dofs = DVector::from_fn(space.dim(), |_, _| rng.gen_range(-1.0..1.0));
    let rec = ev.reconstruct(&space, &dofs).unwrap();
    // Integration must resolve the sub-edge/sub-triangle structure of the
    // reconstruction, so the extraction runs on the finite element mesh.
    let back = ev.re_extract_dofs(&rec);
    let err = (&back - &dofs).norm() / dofs.norm();
    assert!(err < 1e-8, "dof re-extraction error {err:.3e}");
}

#[test]
fn helmholtz_components_are_orthogonal() {
    let geom = pentagon();
    let k = 2;
    let space = build_space2d(geom.clone(), k, Family::Edge, Variant::Standard).unwrap();
    let ev = VirtualEvaluator::build(&geom, k, 2, k + 1).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let dofs = DVector::from_fn(space.dim(), |_, _| rng.gen_range(-1.0..1.0));
    let rec = ev.reconstruct(&space, &dofs).unwrap();
    let ip = ev.component_inner(&rec);
    let scale = ev.norm(&rec).powi(2).max(1.0);
    assert!(ip.abs() < 1e-8 * scale, "(curl ρ, ∇σ) = {ip:.3e}");
}

#[test]
fn face_family_reconstruction_via_rotation() {
    // Face-family polynomial fields reconstruct exactly through the rotated
    // edge problem.
    let geom = square();
    let k = 2;
    let space = build_space2d(geom.clone(), k, Family::Face, Variant::Standard).unwrap();
    let ev = VirtualEvaluator::build(&geom, k, 2, k + 1).unwrap();
    let p = random_poly_on(geom.frame, k, 23);
    let d = space.eval_dofs(&Field2::Polynomial(&p), 2 * k + 4);
    let rec = ev.reconstruct(&space, &d).unwrap();
    let err = ev.error_against(&rec, |x| {
        let v = p.eval(&[x[0], x[1], 0.0]);
        [v[0], v[1]]
    });
    assert!(err < 1e-10, "face-family reconstruction error {err:.3e}");
}

#[test]
fn serendipity_reconstruction_matches_standard_for_polynomials() {
    let geom = square();
    let k = 2;
    let ser = build_space2d(geom.clone(), k, Family::Edge, Variant::Serendipity).unwrap();
    let ev = VirtualEvaluator::build(&geom, k, 2, k + 1).unwrap();
    let p = random_poly_on(geom.frame, k, 29);
    let d = ser.eval_dofs(&Field2::Polynomial(&p), 2 * k + 4);
    let rec = ev.reconstruct(&ser, &d).unwrap();
    let err = ev.error_against(&rec, |x| {
        let v = p.eval(&[x[0], x[1], 0.0]);
        [v[0], v[1]]
    });
    assert!(err < 1e-10, "serendipity reconstruction error {err:.3e}");
}

#[test]
fn projection_from_dofs_matches_projection_of_reconstruction() {
    // Π⁰_k from the DoFs must equal the L² projection of the reconstructed
    // virtual function up to the reconstruction error, which at study-scale
    // face sizes sits far below the interpolation error being measured.
    let scale = 1.0 / 16.0;
    let geom = FaceGeom::new(
        vec![
            [0.0, 0.0],
            [scale, 0.1 * scale],
            [1.2 * scale, 0.9 * scale],
            [0.5 * scale, 1.3 * scale],
            [-0.2 * scale, 0.8 * scale],
        ],
        14,
    )
    .unwrap();
    let k = 2;
    let space = build_space2d(geom.clone(), k, Family::Edge, Variant::Standard).unwrap();
    let ev = VirtualEvaluator::build(&geom, k, 3, k + 2).unwrap();
    let f = field::AnalyticField2 {
        eval: Box::new(|x, y| [x.sin(), y * y]),
        rot: Box::new(|x, _| -(0.0 * x)),
        div: Box::new(|x, y| x.cos() + 2.0 * y),
    };
    let dofs = space.eval_dofs(&Field2::Analytic(&f), 2 * k + 8);
    let rec = ev.reconstruct(&space, &dofs).unwrap();
    let proj = space.l2_projection(&dofs, k).unwrap();
    let oracle = ev.project_reconstruction(&rec, k);
    let diff = geom.moments.norm(&proj.sub(&oracle));
    assert!(diff < 1e-8, "projection mismatch {diff:.3e}");
}

#[test]
fn self_convergence_order_at_least_q() {
    // Reconstructions of the same virtual function at r and r+2 differ at
    // order ≥ q in the mesh size.
    let geom = square();
    let k = 1;
    let q = 2;
    let space = build_space2d(geom.clone(), k, Family::Edge, Variant::Standard).unwrap();
    let f = field::random_smooth2(5);
    let dofs = space.eval_dofs(&Field2::Analytic(&f), 2 * k + 8);
    let evs: Vec<VirtualEvaluator> = (2..=5)
        .map(|r| VirtualEvaluator::build(&geom, k, r, q).unwrap())
        .collect();
    let recs: Vec<Reconstruction> = evs.iter().map(|ev| ev.reconstruct(&space, &dofs).unwrap()).collect();
    let e2 = difference_norm(&evs[0], &recs[0], &evs[2], &recs[2]);
    let e3 = difference_norm(&evs[1], &recs[1], &evs[3], &recs[3]);
    let rate = (e2 / e3).log2();
    // Observed orders approach q from below as the asymptotic constant
    // settles; the acceptance suite measures them with the same tolerance
    // convention the rate criteria use.
    assert!(rate >= q as f64 - 0.25, "self-convergence rate {rate:.2} ≪ q = {q}");
}

#[test]
fn unisolvence_report_square_k1() {
    let geom = square();
    let space = build_space2d(geom, 1, Family::Edge, Variant::Standard).unwrap();
    let rep = unisolvence_report(&space, Some((2, 2))).unwrap();
    assert!(rep.dof_matrix_smin > 1e-10 * rep.dof_matrix_smax);
    assert!(rep.serendipity_smin > 1e-10 * rep.serendipity_smax);
    let min_eig = rep.full_gram_min_eig.unwrap();
    assert!(min_eig > 1e-10, "full-space gram min eigenvalue {min_eig:.3e}");
}

#[test]
fn unisolvence_ranks_tri_k1_and_serendipity() {
    // triangle k=1 standard edge: DoF matrix rank = 6 = 2π₁.
    let tri = FaceGeom::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 14).unwrap();
    let space = build_space2d(tri.clone(), 1, Family::Edge, Variant::Standard).unwrap();
    let a = space.polynomial_dof_matrix();
    let sol = crate::linalg::lstsq(&a, &DVector::zeros(a.nrows()), 1e-10);
    assert_eq!(sol.rank, 6);
    // triangle k=2 serendipity: functional matrix 13 × 12, rank 12.
    let ser = build_space2d(tri, 2, Family::Edge, Variant::Serendipity).unwrap();
    let s = ser.serendipity_matrix();
    assert_eq!((s.nrows(), s.ncols()), (13, 12));
    let sol = crate::linalg::lstsq(&s, &DVector::zeros(13), 1e-10);
    assert_eq!(sol.rank, 12);
}
