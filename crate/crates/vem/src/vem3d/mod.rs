//! Standard face (H(div)-type) and standard/serendipity edge (H(curl)-type)
//! virtual element spaces on polyhedra: degrees of freedom, the exact
//! divergence polynomial, the curl map onto the face space, L² projectors,
//! stabilizations and discrete L² forms.
//!
//! With parameter `k`, the face space has polynomial normal traces and
//! divergence of degree `k−1` and curl in `(P_k)³`; the edge space has
//! order-`k` tangential edge traces, per-face tangential components in the
//! 2D edge space of the face (shared edge moments appear once), divergence
//! in `P_{k−1}` and `curl curl` in `(P_k)³`.

mod forms;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::field::AnalyticField3;
use crate::linalg;
use crate::mesh::{CellGeom3, Mesh, MeshError};
use crate::poly::{
    apply_diff, decompose_vector, mono, DecompKind, DiffKind, Poly, PolyError,
};
use crate::vem2d::{self, Space2D, Vem2dError};

pub use forms::{discrete_mass3d, stabilization3d};

pub type DofVector3 = DVector<f64>;

#[derive(Debug, Error)]
pub enum Vem3dError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Vem2d(#[from] Vem2dError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("projection order {m} exceeds the computable range {max}")]
    OrderOutOfRange { m: usize, max: usize },
    #[error("operation requires the {0:?} family")]
    WrongFamily(Family3),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family3 {
    Edge,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant3 {
    Standard,
    /// Serendipity reduction of the per-face tangential moments (edge family
    /// only).
    Serendipity,
}

/// One degree of freedom of a 3D space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofDesc3 {
    /// Edge family: `∫_e (v·t_e) m_j ds` against scaled edge monomials in the
    /// global edge orientation.
    EdgeMoment { edge: usize, j: usize },
    /// Face family: `∫_F (v·n_F) m_α` against face-local scaled monomials.
    FaceNormal { face: usize, alpha: [u8; 3] },
    /// Edge family: `∫_F v^F · (x_F m_α)` in face-local coordinates.
    FaceTang { face: usize, alpha: [u8; 3] },
    /// Edge family: `∫_F rot_F v^F (m_α − mean)`, face-local.
    FaceDiff { face: usize, alpha: [u8; 3] },
    /// `∫_E v·(x_E ∧ p_j)` (face family) or `∫_E curl v·(x_E ∧ p_j)` (edge
    /// family) against the selected basis of `x_E ∧ (P_k)³`.
    VolCross { idx: usize },
    /// Face family: `∫_E div v (m_α − mean)`.
    VolDiff { alpha: [u8; 3] },
    /// Edge family: `∫_E v·(x_E m_α)`, `|α| ≤ k−1`.
    VolX { alpha: [u8; 3] },
}

/// Selected basis of the test family `W = x_E ∧ (P_k)³ ⊂ (P_{k+1})³`.
///
/// The map `p ↦ x_E ∧ p` has kernel `{x_E q}`, so a spanning list of vector
/// monomials is pruned to `3π_{k,3} − π_{k−1,3}` independent generators by
/// pivoted Gram–Schmidt; `expand` re-expresses any `x_E ∧ w` in the selected
/// generators.
pub struct CrossBasis {
    /// Generator polynomials `p_j ∈ (P_k)³`.
    pub generators: Vec<Poly>,
    /// Their images `x_E ∧ p_j` (degree k+1).
    pub images: Vec<Poly>,
    /// Thin SVD factors of the image coefficient matrix for expansion solves.
    svd_u: DMatrix<f64>,
    svd_sigma: Vec<f64>,
    svd_v: DMatrix<f64>,
}

impl CrossBasis {
    fn build(frame: crate::poly::CellFrame, k: usize) -> Self {
        let n = mono::space_dim(k as i64, 3);
        let target = 3 * n - mono::space_dim(k as i64 - 1, 3);
        let img_len = 3 * mono::space_dim(k as i64 + 1, 3);
        let mut candidates = Vec::with_capacity(3 * n);
        for comp in 0..3 {
            for i in 0..n {
                let mut p = Poly::zeros(frame, 3, k);
                p.coeffs[comp * n + i] = 1.0;
                let img = p.x_wedge();
                candidates.push((p, img));
            }
        }
        // Pivoted Gram–Schmidt on the image coefficient vectors.
        let mut selected: Vec<usize> = Vec::with_capacity(target);
        let mut residuals: Vec<DVector<f64>> = candidates
            .iter()
            .map(|(_, img)| DVector::from_vec(img.coeffs.clone()))
            .collect();
        let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(target);
        while selected.len() < target {
            let (best, best_norm) = residuals
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.norm()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(
                best_norm > 1e-10,
                "cross-moment basis collapsed before reaching dimension {target}"
            );
            let q = &residuals[best] / best_norm;
            for r in residuals.iter_mut() {
                let c = q.dot(r);
                r.axpy(-c, &q, 1.0);
            }
            ortho.push(q);
            selected.push(best);
        }
        let generators: Vec<Poly> = selected.iter().map(|&i| candidates[i].0.clone()).collect();
        let images: Vec<Poly> = selected.iter().map(|&i| candidates[i].1.clone()).collect();
        let image_matrix = DMatrix::from_fn(img_len, target, |r, c| images[c].coeffs[r]);
        let (svd_u, svd_sigma, svd_v) = linalg::jacobi_svd(&image_matrix);
        CrossBasis { generators, images, svd_u, svd_sigma, svd_v }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Coordinates of `x_E ∧ w` in the selected generators, for `w ∈ (P_k)³`.
    pub fn expand(&self, w: &Poly) -> DVector<f64> {
        let img = w.x_wedge();
        let b = DVector::from_vec(img.padded(self.images[0].degree).coeffs);
        let smax = self.svd_sigma.iter().cloned().fold(0.0_f64, f64::max);
        let c = self.svd_u.transpose() * &b;
        let mut y = DVector::zeros(self.svd_sigma.len());
        for j in 0..self.svd_sigma.len() {
            if self.svd_sigma[j] > 1e-12 * smax {
                y[j] = c[j] / self.svd_sigma[j];
            }
        }
        &self.svd_v * y
    }
}

/// Local 3D virtual element space on one polyhedral cell.
pub struct Space3D {
    pub family: Family3,
    pub variant: Variant3,
    pub k: usize,
    pub cell: CellGeom3,
    pub layout: Vec<DofDesc3>,
    pub cross: CrossBasis,
    /// Edge family only: one 2D space per boundary face (tangential part).
    pub face_spaces: Vec<Space2D>,
    /// Edge family: per face, the map from 3D DoFs into the face's 2D DoFs:
    /// entries `(3d index, factor)` in the 2D layout order.
    face_gather: Vec<Vec<(usize, f64)>>,
    /// Decomposed test bases for `Π⁰_m`, indexed by `m`.
    proj_tests: Vec<Vec<(Poly, Poly)>>,
    /// Cross-basis coordinates of each test's `x∧·` part, indexed like
    /// `proj_tests`.
    proj_cross: Vec<Vec<DVector<f64>>>,
}

pub enum Field3<'a> {
    Analytic(&'a AnalyticField3),
    Polynomial(&'a Poly),
}

impl Field3<'_> {
    pub fn value(&self, x: &[f64; 3]) -> [f64; 3] {
        match self {
            Field3::Analytic(f) => f.value(x),
            Field3::Polynomial(p) => p.eval(x),
        }
    }
}

pub fn build_space3d(
    mesh: &Mesh,
    cell: usize,
    k: usize,
    family: Family3,
    variant: Variant3,
) -> Result<Space3D, Vem3dError> {
    assert!(k >= 1, "order must be at least 1");
    let cellgeom = mesh.cell_geom3(cell, 2 * k + 6)?;
    build_space3d_from_geom(cellgeom, k, family, variant)
}

pub fn build_space3d_from_geom(
    cell: CellGeom3,
    k: usize,
    family: Family3,
    variant: Variant3,
) -> Result<Space3D, Vem3dError> {
    let cross = CrossBasis::build(cell.frame, k);
    let mut layout = Vec::new();
    let mut face_spaces = Vec::new();
    let mut face_gather = Vec::new();

    match family {
        Family3::Face => {
            assert!(
                variant == Variant3::Standard,
                "serendipity applies to the edge family"
            );
            for f in 0..cell.faces.len() {
                for alpha in mono::indices(k - 1, 2) {
                    layout.push(DofDesc3::FaceNormal { face: f, alpha });
                }
            }
            for idx in 0..cross.len() {
                layout.push(DofDesc3::VolCross { idx });
            }
            if k > 1 {
                for alpha in mono::indices(k - 1, 3) {
                    if mono::total_degree(alpha) >= 1 {
                        layout.push(DofDesc3::VolDiff { alpha });
                    }
                }
            }
        }
        Family3::Edge => {
            for e in 0..cell.edges.len() {
                for j in 0..=k {
                    layout.push(DofDesc3::EdgeMoment { edge: e, j });
                }
            }
            let variant2d = match variant {
                Variant3::Standard => vem2d::Variant::Standard,
                Variant3::Serendipity => vem2d::Variant::Serendipity,
            };
            for (f, fv) in cell.faces.iter().enumerate() {
                let fspace =
                    vem2d::build_space2d(fv.geom.clone(), k, vem2d::Family::Edge, variant2d)?;
                let x_degree: i64 = match variant {
                    Variant3::Standard => k as i64,
                    Variant3::Serendipity => fspace.beta,
                };
                if x_degree >= 0 {
                    for alpha in mono::indices(x_degree as usize, 2) {
                        layout.push(DofDesc3::FaceTang { face: f, alpha });
                    }
                }
                if k > 1 {
                    for alpha in mono::indices(k - 1, 2) {
                        if mono::total_degree(alpha) >= 1 {
                            layout.push(DofDesc3::FaceDiff { face: f, alpha });
                        }
                    }
                }
                face_spaces.push(fspace);
            }
            for idx in 0..cross.len() {
                layout.push(DofDesc3::VolCross { idx });
            }
            for alpha in mono::indices(k - 1, 3) {
                layout.push(DofDesc3::VolX { alpha });
            }
        }
    }

    // Gather maps from the 3D layout into each face's 2D layout.
    if family == Family3::Edge {
        let index_of = |d: &DofDesc3, layout: &[DofDesc3]| -> usize {
            layout.iter().position(|x| x == d).expect("dof present")
        };
        for (f, fspace) in face_spaces.iter().enumerate() {
            let fv = &cell.faces[f];
            let mut gather = Vec::with_capacity(fspace.dim());
            for desc in &fspace.layout {
                match *desc {
                    vem2d::DofDesc::EdgeMoment { edge, j } => {
                        let (cell_edge, sign) = fv.edge_refs[edge];
                        // t_e^F = sign · t_e and the scaled arclength flips
                        // with the direction, so m_j^F = sign^j · m_j.
                        let factor = sign.powi(j as i32 + 1);
                        let idx =
                            index_of(&DofDesc3::EdgeMoment { edge: cell_edge, j }, &layout);
                        gather.push((idx, factor));
                    }
                    vem2d::DofDesc::InteriorX { alpha } => {
                        let idx = index_of(&DofDesc3::FaceTang { face: f, alpha }, &layout);
                        gather.push((idx, 1.0));
                    }
                    vem2d::DofDesc::Diff { alpha } => {
                        let idx = index_of(&DofDesc3::FaceDiff { face: f, alpha }, &layout);
                        gather.push((idx, 1.0));
                    }
                }
            }
            face_gather.push(gather);
        }
    }

    // Decomposed projector test bases.
    let (decomp_kind, max_m) = match family {
        Family3::Face => (DecompKind::GradXwedge3d, k + 1),
        Family3::Edge => (DecompKind::CurlX3d, k),
    };
    let mut proj_tests = Vec::with_capacity(max_m + 1);
    let mut proj_cross = Vec::with_capacity(max_m + 1);
    for m in 0..=max_m {
        let n = mono::space_dim(m as i64, 3);
        let mut tests = Vec::with_capacity(3 * n);
        let mut coords = Vec::with_capacity(3 * n);
        for comp in 0..3 {
            for i in 0..n {
                let mut q = Poly::zeros(cell.frame, 3, m);
                q.coeffs[comp * n + i] = 1.0;
                let parts = decompose_vector(decomp_kind, &q, &cell.moments)?;
                let cross_part = match family {
                    Family3::Face => &parts.1, // q = ∇s + x∧w
                    Family3::Edge => &parts.0, // q = curl(x∧a) + x b
                };
                coords.push(cross.expand(cross_part));
                tests.push(parts);
            }
        }
        proj_tests.push(tests);
        proj_cross.push(coords);
    }

    Ok(Space3D { family, variant, k, cell, layout, cross, face_spaces, face_gather, proj_tests, proj_cross })
}

impl Space3D {
    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn dof_index(&self, desc: DofDesc3) -> Option<usize> {
        self.layout.iter().position(|d| *d == desc)
    }

    /// 2D DoF vector of the tangential component on face `f`.
    pub fn face_dofs(&self, f: usize, dofs: &DofVector3) -> DofVector3 {
        let gather = &self.face_gather[f];
        DVector::from_fn(gather.len(), |i, _| {
            let (idx, factor) = gather[i];
            factor * dofs[idx]
        })
    }

    /// Evaluates all DoFs of a field; derivative moments are taken by parts
    /// so only pointwise values are used.
    pub fn eval_dofs(&self, field: &Field3, quad_degree: usize) -> DofVector3 {
        let cell_rule = self.cell.cell_rule(quad_degree);
        let face_rules: Vec<_> = self
            .cell
            .faces
            .iter()
            .map(|fv| fv.geom.face_rule(quad_degree))
            .collect();
        let mut out = DVector::zeros(self.dim());
        for (i, desc) in self.layout.iter().enumerate() {
            out[i] = match *desc {
                DofDesc3::EdgeMoment { edge, j } => {
                    let e = &self.cell.edges[edge];
                    let rule = crate::quadrature::segment_rule(&e.a, &e.b, quad_degree);
                    rule.points
                        .iter()
                        .zip(rule.weights.iter())
                        .map(|(p, w)| {
                            let v = field.value(p);
                            let u = e.coord(p);
                            w * (v[0] * e.tangent[0] + v[1] * e.tangent[1] + v[2] * e.tangent[2])
                                * u.powi(j as i32)
                        })
                        .sum()
                }
                DofDesc3::FaceNormal { face, alpha } => {
                    let fv = &self.cell.faces[face];
                    let m_alpha = vem2d::monomial(fv.geom.frame, alpha);
                    face_rules[face]
                        .points
                        .iter()
                        .zip(face_rules[face].weights.iter())
                        .map(|(p, w)| {
                            let g = fv.placement.to_global(&[p[0], p[1]]);
                            let v = field.value(&g);
                            let n = fv.placement.normal;
                            w * (v[0] * n[0] + v[1] * n[1] + v[2] * n[2]) * m_alpha.eval(p)[0]
                        })
                        .sum()
                }
                DofDesc3::FaceTang { face, alpha } => {
                    let fv = &self.cell.faces[face];
                    let m_alpha = vem2d::monomial(fv.geom.frame, alpha);
                    let test = m_alpha.x_times();
                    face_rules[face]
                        .points
                        .iter()
                        .zip(face_rules[face].weights.iter())
                        .map(|(p, w)| {
                            let g = fv.placement.to_global(&[p[0], p[1]]);
                            let v = field.value(&g);
                            let vt = fv.placement.vector_to_local(&v);
                            let t = test.eval(p);
                            w * (vt[0] * t[0] + vt[1] * t[1])
                        })
                        .sum()
                }
                DofDesc3::FaceDiff { face, alpha } => {
                    // ∫_F rot v^F p⁰ = ∫_F v^F·curl_F p⁰ + ∮_{∂F} (v·t) p⁰
                    let fv = &self.cell.faces[face];
                    let p0 = vem2d::zero_mean_monomial(&fv.geom, alpha);
                    let curl = apply_diff(DiffKind::Curl2, &p0).unwrap();
                    let interior: f64 = face_rules[face]
                        .points
                        .iter()
                        .zip(face_rules[face].weights.iter())
                        .map(|(p, w)| {
                            let g = fv.placement.to_global(&[p[0], p[1]]);
                            let v = field.value(&g);
                            let vt = fv.placement.vector_to_local(&v);
                            let c = curl.eval(p);
                            w * (vt[0] * c[0] + vt[1] * c[1])
                        })
                        .sum();
                    let mut boundary = 0.0;
                    for (e, eg) in fv.geom.edges.iter().enumerate() {
                        let rule = fv.geom.edge_rule(e, quad_degree);
                        for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
                            let g = fv.placement.to_global(&[p[0], p[1]]);
                            let v = field.value(&g);
                            let t3 = fv.placement.vector_to_global(&eg.tangent);
                            boundary +=
                                w * (v[0] * t3[0] + v[1] * t3[1] + v[2] * t3[2]) * p0.eval(p)[0];
                        }
                    }
                    interior + boundary
                }
                DofDesc3::VolCross { idx } => {
                    let w_test = &self.cross.images[idx];
                    match self.family {
                        Family3::Face => cell_rule
                            .points
                            .iter()
                            .zip(cell_rule.weights.iter())
                            .map(|(p, w)| {
                                let v = field.value(p);
                                let t = w_test.eval(p);
                                w * (v[0] * t[0] + v[1] * t[1] + v[2] * t[2])
                            })
                            .sum(),
                        Family3::Edge => {
                            // ∫ curl v·w = ∫ v·curl w + ∮ (n×v)·w
                            let curl_w = apply_diff(DiffKind::Curl3, w_test).unwrap();
                            let interior: f64 = cell_rule
                                .points
                                .iter()
                                .zip(cell_rule.weights.iter())
                                .map(|(p, w)| {
                                    let v = field.value(p);
                                    let c = curl_w.eval(p);
                                    w * (v[0] * c[0] + v[1] * c[1] + v[2] * c[2])
                                })
                                .sum();
                            let mut boundary = 0.0;
                            for (f, fv) in self.cell.faces.iter().enumerate() {
                                let n = fv.placement.normal;
                                for (p, w) in face_rules[f]
                                    .points
                                    .iter()
                                    .zip(face_rules[f].weights.iter())
                                {
                                    let g = fv.placement.to_global(&[p[0], p[1]]);
                                    let v = field.value(&g);
                                    let nxv = [
                                        n[1] * v[2] - n[2] * v[1],
                                        n[2] * v[0] - n[0] * v[2],
                                        n[0] * v[1] - n[1] * v[0],
                                    ];
                                    let t = w_test.eval(&g);
                                    boundary += w * (nxv[0] * t[0] + nxv[1] * t[1] + nxv[2] * t[2]);
                                }
                            }
                            interior + boundary
                        }
                    }
                }
                DofDesc3::VolDiff { alpha } => {
                    // ∫ div v p⁰ = −∫ v·∇p⁰ + Σ_F ∮_F (v·n_F) p⁰
                    let p0 = {
                        let mut p = Poly::zeros(self.cell.frame, 1, mono::total_degree(alpha));
                        p.coeffs[mono::position(alpha, 3)] = 1.0;
                        p.coeffs[0] -= self.cell.moments.mean(alpha);
                        p
                    };
                    let grad = apply_diff(DiffKind::Grad3, &p0).unwrap();
                    let interior: f64 = cell_rule
                        .points
                        .iter()
                        .zip(cell_rule.weights.iter())
                        .map(|(p, w)| {
                            let v = field.value(p);
                            let g = grad.eval(p);
                            w * (v[0] * g[0] + v[1] * g[1] + v[2] * g[2])
                        })
                        .sum();
                    let mut boundary = 0.0;
                    for (f, fv) in self.cell.faces.iter().enumerate() {
                        let n = fv.placement.normal;
                        for (p, w) in face_rules[f].points.iter().zip(face_rules[f].weights.iter())
                        {
                            let g = fv.placement.to_global(&[p[0], p[1]]);
                            let v = field.value(&g);
                            boundary +=
                                w * (v[0] * n[0] + v[1] * n[1] + v[2] * n[2]) * p0.eval(&g)[0];
                        }
                    }
                    -interior + boundary
                }
                DofDesc3::VolX { alpha } => {
                    let test = {
                        let mut p = Poly::zeros(self.cell.frame, 1, mono::total_degree(alpha));
                        p.coeffs[mono::position(alpha, 3)] = 1.0;
                        p.x_times()
                    };
                    cell_rule
                        .points
                        .iter()
                        .zip(cell_rule.weights.iter())
                        .map(|(p, w)| {
                            let v = field.value(p);
                            let t = test.eval(p);
                            w * (v[0] * t[0] + v[1] * t[1] + v[2] * t[2])
                        })
                        .sum()
                }
            };
        }
        out
    }

    /// Total outward flux `∮ v·n` (face family).
    fn boundary_flux(&self, dofs: &DofVector3) -> f64 {
        let mut acc = 0.0;
        for (i, desc) in self.layout.iter().enumerate() {
            if let DofDesc3::FaceNormal { alpha, .. } = *desc {
                if mono::total_degree(alpha) == 0 {
                    acc += dofs[i];
                }
            }
        }
        acc
    }

    /// The exact `div v_h ∈ P_{k−1}(E)` of a face-family field: zero-mean
    /// part from the volume div moments, mean from the boundary flux.
    pub fn div_poly(&self, dofs: &DofVector3) -> Result<Poly, Vem3dError> {
        if self.family != Family3::Face {
            return Err(Vem3dError::WrongFamily(Family3::Face));
        }
        let k = self.k;
        let n = mono::space_dim(k as i64 - 1, 3);
        let idx = mono::indices(k - 1, 3);
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        for (j, &beta) in idx.iter().enumerate() {
            a[(0, j)] = self.cell.moments.integral(beta);
        }
        b[0] = self.boundary_flux(dofs);
        let mut row = 1;
        for (i, desc) in self.layout.iter().enumerate() {
            if let DofDesc3::VolDiff { alpha } = *desc {
                for (j, &beta) in idx.iter().enumerate() {
                    a[(row, j)] = self.cell.moments.integral(mono::add(alpha, beta))
                        - self.cell.moments.mean(alpha) * self.cell.moments.integral(beta);
                }
                b[row] = dofs[i];
                row += 1;
            }
        }
        debug_assert_eq!(row, n);
        let coeffs = a.lu().solve(&b).expect("div system nonsingular");
        Ok(Poly::from_coeffs(self.cell.frame, 1, k - 1, coeffs.iter().copied().collect()))
    }

    /// Per-face normal-trace polynomial `v·n_F ∈ P_{k−1}(F)` (face family),
    /// in face-local coordinates.
    pub fn normal_trace(&self, f: usize, dofs: &DofVector3) -> Poly {
        let fv = &self.cell.faces[f];
        let k = self.k;
        let gram = fv.geom.moments.gram(k - 1);
        let n = mono::space_dim(k as i64 - 1, 2);
        let mut b = DVector::zeros(n);
        for (i, desc) in self.layout.iter().enumerate() {
            if let DofDesc3::FaceNormal { face, alpha } = *desc {
                if face == f {
                    b[mono::position(alpha, 2)] = dofs[i];
                }
            }
        }
        let sol = linalg::solve_spd(&gram, &b);
        Poly::from_coeffs(fv.geom.frame, 1, k - 1, sol.iter().copied().collect())
    }

    /// DoFs of `curl v_h` in the face-family space of the same cell and
    /// parameter: face normal moments from the per-face rot polynomials,
    /// volume cross moments copied, div moments zero.
    pub fn curl_to_face_dofs(
        &self,
        face_space: &Space3D,
        dofs: &DofVector3,
    ) -> Result<DofVector3, Vem3dError> {
        if self.family != Family3::Edge {
            return Err(Vem3dError::WrongFamily(Family3::Edge));
        }
        assert_eq!(face_space.family, Family3::Face);
        assert_eq!(face_space.k, self.k);
        // curl v·n_F = rot_F v^F, exactly known per face.
        let rots: Vec<Poly> = (0..self.cell.faces.len())
            .map(|f| {
                let fd = self.face_dofs(f, dofs);
                self.face_spaces[f].diff_poly(&fd)
            })
            .collect();
        let mut out = DVector::zeros(face_space.dim());
        for (i, desc) in face_space.layout.iter().enumerate() {
            out[i] = match *desc {
                DofDesc3::FaceNormal { face, alpha } => {
                    let m_alpha = vem2d::monomial(face_space.cell.faces[face].geom.frame, alpha);
                    face_space.cell.faces[face].geom.moments.inner(&rots[face], &m_alpha)
                }
                DofDesc3::VolCross { idx } => {
                    let pos = self
                        .dof_index(DofDesc3::VolCross { idx })
                        .expect("cross moments shared");
                    dofs[pos]
                }
                DofDesc3::VolDiff { .. } => 0.0,
                _ => unreachable!("face family layout"),
            };
        }
        Ok(out)
    }

    /// L² projection `Π⁰_m v_h` onto `(P_m)³`: `m ≤ k+1` for the face family,
    /// `m ≤ k` for the edge family.
    pub fn l2_projection(&self, dofs: &DofVector3, m: usize) -> Result<Poly, Vem3dError> {
        let max = match self.family {
            Family3::Face => self.k + 1,
            Family3::Edge => self.k,
        };
        if m > max {
            return Err(Vem3dError::OrderOutOfRange { m, max });
        }
        let n = mono::space_dim(m as i64, 3);
        let mut rhs = DVector::zeros(3 * n);
        match self.family {
            Family3::Face => {
                let div = self.div_poly(dofs)?;
                let traces: Vec<Poly> = (0..self.cell.faces.len())
                    .map(|f| self.normal_trace(f, dofs))
                    .collect();
                for (col, (s, _w)) in self.proj_tests[m].iter().enumerate() {
                    // q = ∇s + x∧w
                    let mut val = 0.0;
                    // (v, x∧w) through the cross moments.
                    let coords = &self.proj_cross[m][col];
                    for (j, c) in coords.iter().enumerate() {
                        let pos = self.dof_index(DofDesc3::VolCross { idx: j }).unwrap();
                        val += c * dofs[pos];
                    }
                    // (v, ∇s) = −(div v, s) + Σ_F ∫ (v·n) s
                    val -= self.cell.moments.inner(&div, s);
                    for (f, fv) in self.cell.faces.iter().enumerate() {
                        let rule = fv.geom.face_rule(2 * self.k + 2);
                        for (p, wq) in rule.points.iter().zip(rule.weights.iter()) {
                            let g = fv.placement.to_global(&[p[0], p[1]]);
                            val += wq * traces[f].eval(p)[0] * s.eval(&g)[0];
                        }
                    }
                    rhs[col] = val;
                }
            }
            Family3::Edge => {
                // Per-face 2D projections Π⁰_{k+1,F} v^F.
                let face_projs: Vec<Poly> = (0..self.cell.faces.len())
                    .map(|f| {
                        let fd = self.face_dofs(f, dofs);
                        self.face_spaces[f].l2_projection(&fd, self.k + 1)
                    })
                    .collect::<Result<_, _>>()?;
                for (col, (a, b)) in self.proj_tests[m].iter().enumerate() {
                    // q = curl(x∧a) + x b
                    let mut val = 0.0;
                    // (v, x b) through the volume x-moments.
                    for (i, &alpha) in mono::indices(b.degree, 3).iter().enumerate() {
                        if b.coeffs[i] != 0.0 {
                            let pos = self.dof_index(DofDesc3::VolX { alpha }).unwrap();
                            val += b.coeffs[i] * dofs[pos];
                        }
                    }
                    // (v, curl w) = ∫ curl v·w − ∮ (n×v)·w, w = x∧a.
                    let coords = &self.proj_cross[m][col];
                    for (j, c) in coords.iter().enumerate() {
                        let pos = self.dof_index(DofDesc3::VolCross { idx: j }).unwrap();
                        val += c * dofs[pos];
                    }
                    let w_test = a.x_wedge();
                    for (f, fv) in self.cell.faces.iter().enumerate() {
                        // (n×v)·w = (R v^F)·w^F in face coordinates, exact
                        // with v^F replaced by its Π⁰_{k+1,F} projection.
                        let rule = fv.geom.face_rule(2 * self.k + 2);
                        for (p, wq) in rule.points.iter().zip(rule.weights.iter()) {
                            let g = fv.placement.to_global(&[p[0], p[1]]);
                            let wv = w_test.eval(&g);
                            let wloc = fv.placement.vector_to_local(&wv);
                            let vloc = face_projs[f].eval(p);
                            // R(a,b) = (−b, a)
                            val -= wq * (-vloc[1] * wloc[0] + vloc[0] * wloc[1]);
                        }
                    }
                    rhs[col] = val;
                }
            }
        }
        let gram = self.cell.moments.gram(m);
        let mut out = Poly::zeros(self.cell.frame, 3, m);
        for comp in 0..3 {
            let b = DVector::from_fn(n, |i, _| rhs[comp * n + i]);
            let sol = linalg::solve_spd(&gram, &b);
            out.coeffs[comp * n..(comp + 1) * n].copy_from_slice(sol.as_slice());
        }
        Ok(out)
    }

    /// DoF matrix of the polynomial subspace ((P_{k−1})³ for the face family,
    /// (P_k)³ for the edge family).
    pub fn polynomial_dof_matrix(&self) -> DMatrix<f64> {
        let deg = match self.family {
            Family3::Face => self.k - 1,
            Family3::Edge => self.k,
        };
        let n = mono::space_dim(deg as i64, 3);
        let mut cols = Vec::with_capacity(3 * n);
        for comp in 0..3 {
            for i in 0..n {
                let mut w = Poly::zeros(self.cell.frame, 3, deg);
                w.coeffs[comp * n + i] = 1.0;
                cols.push(self.eval_dofs(&Field3::Polynomial(&w), 2 * self.k + 4));
            }
        }
        DMatrix::from_fn(self.dim(), 3 * n, |r, c| cols[c][r])
    }
}
