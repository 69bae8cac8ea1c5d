//! Round-trip and identity tests for the polynomial calculus: the scalar
//! lifts against the Euler identities, potentials, vector decompositions,
//! and the analytic L² projection against an independent solver.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use vem::mesh::{EntityRef, generate_mesh, MeshFamily};
use vem::poly::{
    apply_diff, decompose_vector, l2_project_field, mono, poly_lift, poly_potential, recompose,
    CellFrame, CellMoments, DecompKind, DiffKind, LiftKind, Poly, PotentialKind,
};
use vem::quadrature::{composite_rule, gauss_legendre_01};

fn frame2() -> CellFrame {
    CellFrame::new(2, [0.5, 0.5, 0.0], 2.0_f64.sqrt(), 1.0)
}

fn frame3() -> CellFrame {
    CellFrame::new(3, [0.5, 0.5, 0.5], 3.0_f64.sqrt(), 1.0)
}

/// Tensor-product Gauss rule on the unit square/cube: independent of the
/// composite-rule machinery.
fn tensor_rule(dim: usize, degree: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let n = degree / 2 + 1;
    let (xs, ws) = gauss_legendre_01(n);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    if dim == 2 {
        for i in 0..n {
            for j in 0..n {
                pts.push([xs[i], xs[j], 0.0]);
                wts.push(ws[i] * ws[j]);
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    pts.push([xs[i], xs[j], xs[k]]);
                    wts.push(ws[i] * ws[j] * ws[k]);
                }
            }
        }
    }
    (pts, wts)
}

fn moments2(max_degree: usize) -> CellMoments {
    let (pts, wts) = tensor_rule(2, max_degree);
    let rule = vem::quadrature::QuadRule {
        kind: vem::quadrature::DomainKind::Composite,
        points: pts,
        weights: wts,
        degree: max_degree,
    };
    CellMoments::from_quadrature(frame2(), &rule, max_degree)
}

fn moments3(max_degree: usize) -> CellMoments {
    let (pts, wts) = tensor_rule(3, max_degree);
    let rule = vem::quadrature::QuadRule {
        kind: vem::quadrature::DomainKind::Composite,
        points: pts,
        weights: wts,
        degree: max_degree,
    };
    CellMoments::from_quadrature(frame3(), &rule, max_degree)
}

fn coeff_norm(p: &Poly) -> f64 {
    p.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn random_poly(frame: CellFrame, arity: usize, degree: usize, seed: u64) -> Poly {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut p = Poly::zeros(frame, arity, degree);
    for c in p.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    p
}

#[test]
fn euler_identities_coefficientwise() {
    // For homogeneous scalar q of degree m: div(x q) = (2+m) q,
    // rot(x^perp q) = (2+m) q, div3(x q) = (3+m) q.
    for m in 0..=5usize {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(m as u64);
        // Homogeneous 2D scalar of exact degree m.
        let mut q2 = Poly::zeros(frame2(), 1, m);
        let lo2 = if m == 0 { 0 } else { mono::space_dim(m as i64 - 1, 2) };
        for i in lo2..q2.coeffs.len() {
            q2.coeffs[i] = rng.gen_range(-1.0..1.0);
        }
        let scale = 2.0 + m as f64;
        let div = apply_diff(DiffKind::Div2, &q2.x_times()).unwrap();
        let defect = coeff_norm(&div.sub(&q2.scale(scale)));
        assert!(defect < 1e-13 * scale, "div2 Euler m={m}: {defect:.3e}");
        let rot = apply_diff(DiffKind::Rot2, &q2.xperp_times()).unwrap();
        let defect = coeff_norm(&rot.sub(&q2.scale(scale)));
        assert!(defect < 1e-13 * scale, "rot2 Euler m={m}: {defect:.3e}");
        // Homogeneous 3D scalar of exact degree m.
        let mut q3 = Poly::zeros(frame3(), 1, m);
        let lo3 = if m == 0 { 0 } else { mono::space_dim(m as i64 - 1, 3) };
        for i in lo3..q3.coeffs.len() {
            q3.coeffs[i] = rng.gen_range(-1.0..1.0);
        }
        let scale3 = 3.0 + m as f64;
        let div3 = apply_diff(DiffKind::Div3, &q3.x_times()).unwrap();
        let defect = coeff_norm(&div3.sub(&q3.scale(scale3)));
        assert!(defect < 1e-13 * scale3, "div3 Euler m={m}: {defect:.3e}");
    }
}

#[test]
fn lift_examples() {
    // div2, target = 1 → q = 1/2; div3, target = 1 → q = 1/3.
    let one2 = Poly::constant(frame2(), &[1.0]);
    let q = poly_lift(LiftKind::Div2, &one2).unwrap();
    assert!((q.coeffs[0] - 0.5).abs() < 1e-15);
    let one3 = Poly::constant(frame3(), &[1.0]);
    let q = poly_lift(LiftKind::Div3, &one3).unwrap();
    assert!((q.coeffs[0] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn curl3_lift_roundtrip() {
    // target = curl(x ∧ p) for random p ∈ (P₂)³ → recovered q satisfies
    // curl(x ∧ q) = target.
    for seed in 0..6u64 {
        let p = random_poly(frame3(), 3, 2, 1000 + seed);
        let target = apply_diff(DiffKind::Curl3, &p.x_wedge()).unwrap();
        let q = poly_lift(LiftKind::Curl3, &target).unwrap();
        let back = apply_diff(DiffKind::Curl3, &q.x_wedge()).unwrap();
        let defect = coeff_norm(&back.sub(&target.padded(back.degree)));
        assert!(defect <= 1e-12 * coeff_norm(&target).max(1.0), "seed {seed}: {defect:.3e}");
    }
}

#[test]
fn potential_examples() {
    let mom = moments2(8);
    // grad2: field = 2·x_F → s = |x_F|² − mean.
    let one = Poly::constant(frame2(), &[1.0]);
    let field = one.x_times().scale(2.0);
    let s = poly_potential(PotentialKind::Grad2, &field, &mom).unwrap();
    // |x_F|² has mean ∫(x−b)² over the unit square = 1/6.
    let x = [0.8_f64, 0.3, 0.0];
    let expect = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) - 1.0 / 6.0;
    assert!((s.eval(&x)[0] - expect).abs() < 1e-13);
    let mean = mom.integrate(&s)[0];
    assert!(mean.abs() < 1e-13);

    // curl2: field = (1, 0) → s = x₂ − mean (curl s = (∂₂s, −∂₁s)).
    let field = Poly::constant(frame2(), &[1.0, 0.0]);
    let s = poly_potential(PotentialKind::Curl2, &field, &mom).unwrap();
    let expect = x[1] - 0.5;
    assert!((s.eval(&x)[0] - expect).abs() < 1e-13);

    // grad3: field = ∇p for random p ∈ P₃ → s = p − mean.
    let mom3 = moments3(10);
    let p = random_poly(frame3(), 1, 3, 77);
    let g = apply_diff(DiffKind::Grad3, &p).unwrap();
    let s = poly_potential(PotentialKind::Grad3, &g, &mom3).unwrap();
    let mut centered = p.clone();
    centered.coeffs[0] -= mom3.integrate(&p)[0] / frame3().measure;
    let defect = coeff_norm(&s.sub(&centered));
    assert!(defect <= 1e-12 * coeff_norm(&p).max(1.0));
}

#[test]
fn potential_rejects_incompatible_field() {
    let mom = moments2(8);
    // rot(x^⊥) = 2 ≠ 0, so x^⊥ has no gradient potential.
    let one = Poly::constant(frame2(), &[1.0]);
    let xperp = one.xperp_times();
    assert!(poly_potential(PotentialKind::Grad2, &xperp, &mom).is_err());
}

#[test]
fn decompose_trivial_parts() {
    let mom = moments2(8);
    let one = Poly::constant(frame2(), &[1.0]);
    // q = x_F: pure x-part of the curl ⊕ x split.
    let (s, c) = decompose_vector(DecompKind::CurlX2d, &one.x_times(), &mom).unwrap();
    assert!(coeff_norm(&s) < 1e-13, "s = 0 expected");
    assert!((c.coeffs[0] - 1.0).abs() < 1e-13 && coeff_norm(&c) < 1.0 + 1e-13);
    // q = x_F^⊥: pure x^⊥-part of the grad ⊕ x^⊥ split.
    let (p, c) = decompose_vector(DecompKind::GradXperp2d, &one.xperp_times(), &mom).unwrap();
    assert!(coeff_norm(&p) < 1e-13);
    assert!((c.coeffs[0] - 1.0).abs() < 1e-13);
}

#[test]
fn decompose_roundtrips_all_kinds_degrees_0_to_5() {
    let mom2 = moments2(14);
    let mom3 = moments3(14);
    for degree in 0..=5usize {
        for seed in 0..4u64 {
            for kind in [DecompKind::CurlX2d, DecompKind::GradXperp2d] {
                let q = random_poly(frame2(), 2, degree, 31 * degree as u64 + seed);
                let parts = decompose_vector(kind, &q, &mom2).unwrap();
                let back = recompose(kind, &parts);
                let defect = coeff_norm(&back.sub(&q.padded(back.degree)));
                assert!(
                    defect <= 1e-12 * coeff_norm(&q).max(1.0),
                    "{kind:?} deg {degree} seed {seed}: {defect:.3e}"
                );
            }
            for kind in [DecompKind::CurlX3d, DecompKind::GradXwedge3d] {
                let q = random_poly(frame3(), 3, degree, 77 * degree as u64 + seed);
                let parts = decompose_vector(kind, &q, &mom3).unwrap();
                let back = recompose(kind, &parts);
                let defect = coeff_norm(&back.sub(&q.padded(back.degree)));
                assert!(
                    defect <= 1e-12 * coeff_norm(&q).max(1.0),
                    "{kind:?} deg {degree} seed {seed}: {defect:.3e}"
                );
            }
        }
    }
}

#[test]
fn rot_curl_is_minus_laplacian() {
    // rot_F curl_F s = −Δ_F s.
    for seed in 0..5u64 {
        let s = random_poly(frame2(), 1, 4, 400 + seed);
        let lhs = apply_diff(DiffKind::Rot2, &apply_diff(DiffKind::Curl2, &s).unwrap()).unwrap();
        let rhs = apply_diff(DiffKind::Lap, &s).unwrap().scale(-1.0);
        let defect = coeff_norm(&lhs.sub(&rhs));
        assert!(defect < 1e-13 * coeff_norm(&s).max(1.0));
    }
}

#[test]
fn diff_examples() {
    // rot2 of x_F^⊥ = 2; div3 of x_E = 3; curl3 of constants = 0.
    let one2 = Poly::constant(frame2(), &[1.0]);
    let rot = apply_diff(DiffKind::Rot2, &one2.xperp_times()).unwrap();
    assert!((rot.coeffs[0] - 2.0).abs() < 1e-15);
    assert!(rot.coeffs.iter().skip(1).all(|c| c.abs() < 1e-15));
    let one3 = Poly::constant(frame3(), &[1.0]);
    let div = apply_diff(DiffKind::Div3, &one3.x_times()).unwrap();
    assert!((div.coeffs[0] - 3.0).abs() < 1e-15);
    let c = Poly::constant(frame3(), &[1.0, -2.0, 0.5]);
    let curl = apply_diff(DiffKind::Curl3, &c).unwrap();
    assert!(curl.coeffs.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn arity_mismatch_is_rejected() {
    let one2 = Poly::constant(frame2(), &[1.0]);
    assert!(apply_diff(DiffKind::Rot2, &one2).is_err());
    assert!(apply_diff(DiffKind::Div3, &one2).is_err());
}

#[test]
fn project_analytic_reproduces_polynomials_and_means() {
    let frame = frame2();
    let m = generate_mesh(MeshFamily::SquareGrid, 0, 0);
    let rule = composite_rule(&m, EntityRef::Face(0), 12).unwrap();
    // f ∈ (P_k)² → itself.
    let p = random_poly(frame, 2, 3, 5);
    let proj = l2_project_field(
        |x| {
            let v = p.eval(x);
            [v[0], v[1], 0.0]
        },
        2,
        3,
        frame,
        &rule,
    );
    assert!(coeff_norm(&proj.sub(&p)) < 1e-12 * coeff_norm(&p));
    // constant, k = 0 → cell mean.
    let proj = l2_project_field(|_| [2.5, -1.0, 0.0], 2, 0, frame, &rule);
    assert!((proj.coeffs[0] - 2.5).abs() < 1e-13 && (proj.coeffs[1] + 1.0).abs() < 1e-13);
}

#[test]
fn project_analytic_matches_independent_normal_equations() {
    // f = (sin x₁, cos x₂) on the unit square, k = 2: compare against a
    // tensor-Gauss normal-equations solve by QR (independent quadrature and
    // solver).
    let frame = frame2();
    let m = generate_mesh(MeshFamily::SquareGrid, 0, 0);
    let k = 2;
    let rule = composite_rule(&m, EntityRef::Face(0), 2 * k + 8).unwrap();
    let f = |x: &[f64; 3]| [x[0].sin(), x[1].cos(), 0.0];
    let proj = l2_project_field(f, 2, k, frame, &rule);

    let (pts, wts) = tensor_rule(2, 24);
    let idx = mono::indices(k, 2);
    let n = idx.len();
    let mut gram: DMatrix<f64> = DMatrix::zeros(n, n);
    let mut rhs: DMatrix<f64> = DMatrix::zeros(n, 2);
    for (pt, w) in pts.iter().zip(wts.iter()) {
        let s = frame.scaled(pt);
        let mv: Vec<f64> = idx
            .iter()
            .map(|a| s[0].powi(a[0] as i32) * s[1].powi(a[1] as i32))
            .collect();
        let fv = f(pt);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += w * mv[i] * mv[j];
            }
            rhs[(i, 0)] += w * mv[i] * fv[0];
            rhs[(i, 1)] += w * mv[i] * fv[1];
        }
    }
    let qr = gram.qr();
    for comp in 0..2 {
        let sol = qr
            .solve(&DVector::from_column_slice(rhs.column(comp).as_slice()))
            .unwrap();
        for i in 0..n {
            assert!(
                (proj.coeffs[comp * n + i] - sol[i]).abs() < 1e-10,
                "component {comp} coeff {i}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Scalar-lift round trips: lift ∘ forward = identity on random inputs.
    #[test]
    fn scalar_lift_roundtrip(degree in 0usize..=5, seed in 0u64..1000) {
        let q2 = random_poly(frame2(), 1, degree, seed);
        for (kind, forward) in [(LiftKind::Div2, DiffKind::Div2), (LiftKind::Rot2, DiffKind::Rot2)] {
            let target = match forward {
                DiffKind::Div2 => apply_diff(DiffKind::Div2, &q2.x_times()).unwrap(),
                _ => apply_diff(DiffKind::Rot2, &q2.xperp_times()).unwrap(),
            };
            let back = poly_lift(kind, &target).unwrap();
            let defect = coeff_norm(&back.sub(&q2.padded(back.degree)));
            prop_assert!(defect <= 1e-12 * coeff_norm(&q2).max(1.0));
        }
        let q3 = random_poly(frame3(), 1, degree, seed + 1);
        let target = apply_diff(DiffKind::Div3, &q3.x_times()).unwrap();
        let back = poly_lift(LiftKind::Div3, &target).unwrap();
        let defect = coeff_norm(&back.sub(&q3.padded(back.degree)));
        prop_assert!(defect <= 1e-12 * coeff_norm(&q3).max(1.0));
    }
}
