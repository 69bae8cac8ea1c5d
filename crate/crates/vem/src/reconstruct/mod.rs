//! Independent reconstruction of 2D virtual functions from their degrees of
//! freedom, via the two-potential split `v_h = curl ρ + ∇σ`:
//!
//! * `ρ` solves a Neumann problem driven by the rot polynomial and the
//!   tangential boundary trace, with the flux moments against the edge test
//!   polynomials enforced exactly through Lagrange multipliers (so
//!   re-extracting DoFs from the reconstruction reproduces them to solver
//!   precision);
//! * `σ` (zero trace) and the divergence polynomial `d` solve a coupled
//!   system closed by the interior moment constraints.
//!
//! The computable projection `Π⁰_{k+1} v_h` is peeled off first and only the
//! remainder is reconstructed by finite elements, so polynomial fields are
//! reproduced to machine precision and the finite element error only acts on
//! the small non-polynomial part. Face-family fields are handled through the
//! pointwise π/2 rotation onto the edge family.

mod fem;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::linalg::Csr;
use crate::mesh::FaceGeom;
use crate::poly::{mono, Poly};
use crate::vem2d::{self, DofDesc, DofVector, Family, Space2D, Variant, Vem2dError};

pub use fem::TriFem;

/// SPD solver: dense Cholesky for small meshes, Jacobi-CG above.
enum Spd {
    Dense(Cholesky<f64, Dyn>),
    Iterative { mat: Csr, rank_one: Option<DVector<f64>> },
}

const DENSE_LIMIT: usize = 2600;

impl Spd {
    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            Spd::Dense(chol) => chol.solve(b),
            Spd::Iterative { mat, rank_one } => {
                let apply = |x: &DVector<f64>, out: &mut DVector<f64>| {
                    mat.mul_vec(x, out);
                    if let Some(m) = rank_one {
                        let c = m.dot(x);
                        out.axpy(c, m, 1.0);
                    }
                };
                // Jacobi-preconditioned CG.
                let n = mat.n;
                let mut d = mat.diagonal();
                if let Some(m) = rank_one {
                    for i in 0..n {
                        d[i] += m[i] * m[i];
                    }
                }
                let dinv = d.map(|v| if v.abs() > 0.0 { 1.0 / v } else { 1.0 });
                let mut x = DVector::zeros(n);
                let mut r = b.clone();
                let bnorm = b.norm().max(f64::MIN_POSITIVE);
                let mut z = dinv.component_mul(&r);
                let mut p = z.clone();
                let mut rz = r.dot(&z);
                let mut ap = DVector::zeros(n);
                for _ in 0..40 * n {
                    if r.norm() <= 1e-14 * bnorm {
                        break;
                    }
                    apply(&p, &mut ap);
                    let alpha = rz / p.dot(&ap);
                    x.axpy(alpha, &p, 1.0);
                    r.axpy(-alpha, &ap, 1.0);
                    z = dinv.component_mul(&r);
                    let rz_new = r.dot(&z);
                    let beta = rz_new / rz;
                    rz = rz_new;
                    p = &z + &p * beta;
                }
                x
            }
        }
    }
}

/// Reconstruction machinery for one polygon: finite element space,
/// factorized Neumann and Dirichlet systems, and the constraint blocks.
pub struct VirtualEvaluator {
    pub k: usize,
    pub r: usize,
    pub q: usize,
    pub std_edge: Space2D,
    std_face: Space2D,
    fem: TriFem,
    // Neumann block for ρ.
    neumann: Spd,
    b_rows: DMatrix<f64>,     // constraints × n
    ainv_bt: DMatrix<f64>,    // n × constraints
    schur: LU<f64, Dyn, Dyn>, // constraints × constraints
    // Dirichlet block for σ and the div polynomial (the interior solver and
    // constraint blocks fold into `a0inv_m` and `d_lu` at build time).
    a0inv_m: DMatrix<f64>, // n0 × π
    x_block: DMatrix<f64>, // π × n
    d_lu: LU<f64, Dyn, Dyn>,
}

/// Result of a reconstruction: the peeled polynomial part plus the finite
/// element potentials of the remainder, and the recovered divergence of the
/// remainder.
pub struct Reconstruction {
    pub poly_part: Poly,
    pub rho: DVector<f64>,
    pub sigma: DVector<f64>,
    pub div_remainder: Poly,
    /// Face-family fields are reconstructed as their rotation; evaluation
    /// rotates values back.
    rotate_back: bool,
}

impl VirtualEvaluator {
    /// Builds the evaluator on a polygon for order `k` with fan refinement
    /// `r ≥ 2` and element degree `q ≥ k + 1`.
    pub fn build(geom: &FaceGeom, k: usize, r: usize, q: usize) -> Result<VirtualEvaluator, Vem2dError> {
        assert!(r >= 2, "refinement level must be at least 2");
        assert!(q >= k + 1, "element degree must be at least k+1");
        let std_edge = vem2d::build_space2d(geom.clone(), k, Family::Edge, Variant::Standard)?;
        let std_face = vem2d::build_space2d(geom.clone(), k, Family::Face, Variant::Standard)?;
        let fem = TriFem::new(geom, r, q);
        let n = fem.n_nodes();

        let (triplets, mean) = fem.stiffness_triplets();
        // Constraint rows pin every DoF-defining functional of the stream
        // potential, so re-extracting DoFs from the reconstruction is exact:
        //   - flux moments ∮_e (∇ρ·n) m_j per parent edge (the tangential
        //     trace of curl ρ is −∇ρ·n);
        //   - rot functionals ∫∇ρ·∇p⁰ − ∮(∇ρ·n)p⁰ for the zero-mean test
        //     polynomials (the rot of the reconstruction, integrated by
        //     parts);
        //   - the zero-mean gauge.
        let n_edges = geom.edges.len();
        let n_rot = if k > 1 { mono::space_dim(k as i64 - 1, 2) - 1 } else { 0 };
        let n_constraints = n_edges * (k + 1) + n_rot + 1;
        let mut b_rows = DMatrix::zeros(n_constraints, n);
        let rot_tests: Vec<Poly> = mono::indices(k.saturating_sub(1), 2)
            .into_iter()
            .filter(|a| mono::total_degree(*a) >= 1)
            .map(|a| vem2d::zero_mean_monomial(geom, a))
            .collect();
        for sub in fem.boundary_edges() {
            let pts = fem.edge_quadrature(&sub, q + k + 2);
            // Outward normal of the boundary edge (CCW triangles).
            let dx = sub.b[0] - sub.a[0];
            let dy = sub.b[1] - sub.a[1];
            let len = (dx * dx + dy * dy).sqrt();
            let nrm = [dy / len, -dx / len];
            for (x, w, param) in pts {
                let (_, grads) = fem.shapes_at_physical(sub.tri, &x);
                let u = param - 0.5;
                for (loc, &node) in fem.tri_nodes[sub.tri].iter().enumerate() {
                    let gn = grads[(loc, 0)] * nrm[0] + grads[(loc, 1)] * nrm[1];
                    for j in 0..=k {
                        b_rows[(sub.parent * (k + 1) + j, node)] += w * gn * u.powi(j as i32);
                    }
                    for (rr, p0) in rot_tests.iter().enumerate() {
                        b_rows[(n_edges * (k + 1) + rr, node)] -=
                            w * gn * p0.eval(&[x[0], x[1], 0.0])[0];
                    }
                }
            }
        }
        if n_rot > 0 {
            // Stiffness action on the nodal interpolant of each test
            // polynomial (exact: P_{k−1} ⊆ P_q globally).
            for (rr, p0) in rot_tests.iter().enumerate() {
                let nodal = DVector::from_fn(n, |i, _| {
                    p0.eval(&[fem.nodes[i][0], fem.nodes[i][1], 0.0])[0]
                });
                let mut av: DVector<f64> = DVector::zeros(n);
                for &(i, j, v) in &triplets {
                    av[i] += v * nodal[j];
                }
                for i in 0..n {
                    b_rows[(n_edges * (k + 1) + rr, i)] += av[i];
                }
            }
        }
        for i in 0..n {
            b_rows[(n_constraints - 1, i)] = mean[i];
        }

        let neumann = if n <= DENSE_LIMIT {
            let mut a = DMatrix::zeros(n, n);
            for &(i, j, v) in &triplets {
                a[(i, j)] += v;
            }
            // Rank-one shift removes the constant null space; the gauge row
            // in the constraints pins the actual mean.
            let scale = a.diagonal().iter().sum::<f64>() / n as f64;
            let mshift = &mean * (scale.sqrt() / mean.norm());
            a += &mshift * mshift.transpose();
            Spd::Dense(a.cholesky().expect("shifted stiffness is SPD"))
        } else {
            let mat = Csr::from_triplets(n, &triplets);
            let scale = mat.diagonal().iter().sum::<f64>() / n as f64;
            let mshift = &mean * (scale.sqrt() / mean.norm());
            Spd::Iterative { mat, rank_one: Some(mshift) }
        };
        let mut ainv_bt = DMatrix::zeros(n, n_constraints);
        for c in 0..n_constraints {
            let col = neumann.solve(&b_rows.row(c).transpose());
            ainv_bt.set_column(c, &col);
        }
        let schur = (&b_rows * &ainv_bt).lu();

        // Interior (Dirichlet) block.
        let n0 = fem.n_interior;
        let restrict = |full: &DVector<f64>| -> DVector<f64> {
            let mut out = DVector::zeros(n0);
            for i in 0..n {
                if let Some(ii) = fem.interior_index[i] {
                    out[ii] = full[i];
                }
            }
            out
        };
        let interior = if n0 <= DENSE_LIMIT {
            let mut a0 = DMatrix::zeros(n0, n0);
            for &(i, j, v) in &triplets {
                if let (Some(ii), Some(jj)) = (fem.interior_index[i], fem.interior_index[j]) {
                    a0[(ii, jj)] += v;
                }
            }
            Spd::Dense(a0.cholesky().expect("interior stiffness is SPD"))
        } else {
            let mapped: Vec<(usize, usize, f64)> = triplets
                .iter()
                .filter_map(|&(i, j, v)| {
                    match (fem.interior_index[i], fem.interior_index[j]) {
                        (Some(ii), Some(jj)) => Some((ii, jj, v)),
                        _ => None,
                    }
                })
                .collect();
            Spd::Iterative { mat: Csr::from_triplets(n0, &mapped), rank_one: None }
        };

        let npk = mono::space_dim(k as i64, 2);
        let frame = geom.frame;
        let mut m_block = DMatrix::zeros(n0, npk);
        let mut c_block = DMatrix::zeros(npk, n0);
        let mut x_block = DMatrix::zeros(npk, n);
        for (col, alpha) in mono::indices(k, 2).into_iter().enumerate() {
            let m_alpha = vem2d::monomial(frame, alpha);
            let mut mv = DVector::zeros(n);
            fem.accumulate_volume(|x| m_alpha.eval(&[x[0], x[1], 0.0])[0], &mut mv);
            m_block.set_column(col, &restrict(&mv));
            let xm = m_alpha.x_times();
            let mut cv = DVector::zeros(n);
            fem.accumulate_volume_grad(
                |x| {
                    let v = xm.eval(&[x[0], x[1], 0.0]);
                    [v[0], v[1]]
                },
                &mut cv,
            );
            c_block.set_row(col, &restrict(&cv).transpose());
            // ∫ (x m)·curl φ = ∫ ∇φ·(−(xm)₂, (xm)₁)
            let mut xv = DVector::zeros(n);
            fem.accumulate_volume_grad(
                |x| {
                    let v = xm.eval(&[x[0], x[1], 0.0]);
                    [-v[1], v[0]]
                },
                &mut xv,
            );
            x_block.set_row(col, &xv.transpose());
        }
        let mut a0inv_m = DMatrix::zeros(n0, npk);
        for c in 0..npk {
            let col = interior.solve(&DVector::from_column_slice(m_block.column(c).as_slice()));
            a0inv_m.set_column(c, &col);
        }
        let d_lu = (&c_block * &a0inv_m).lu();

        Ok(VirtualEvaluator {
            k,
            r,
            q,
            std_edge,
            std_face,
            fem,
            neumann,
            b_rows,
            ainv_bt,
            schur,
            a0inv_m,
            x_block,
            d_lu,
        })
    }

    /// Maps any supported space/DoF combination onto the standard edge
    /// layout (serendipity expanded, face family rotated), remembering
    /// whether values must be rotated back.
    fn standard_edge_dofs(&self, space: &Space2D, dofs: &DofVector) -> Result<(DofVector, bool), Vem2dError> {
        let expanded = match space.variant {
            Variant::Standard => dofs.clone(),
            Variant::Serendipity => {
                let std = match space.family {
                    Family::Edge => &self.std_edge,
                    Family::Face => &self.std_face,
                };
                space.serendipity_expand(std, dofs)?
            }
        };
        match space.family {
            Family::Edge => Ok((expanded, false)),
            Family::Face => {
                // Edge DoFs of the rotated field R v: edge and diff moments
                // copy, interior moments flip sign.
                let mut mapped = expanded;
                for (i, desc) in self.std_edge.layout.iter().enumerate() {
                    if matches!(desc, DofDesc::InteriorX { .. }) {
                        mapped[i] = -mapped[i];
                    }
                }
                Ok((mapped, true))
            }
        }
    }

    /// Reconstructs the virtual function with the given DoFs.
    pub fn reconstruct(&self, space: &Space2D, dofs: &DofVector) -> Result<Reconstruction, Vem2dError> {
        let (std_dofs, rotate_back) = self.standard_edge_dofs(space, dofs)?;
        let k = self.k;
        // Peel the computable polynomial part.
        let poly_part = self.std_edge.l2_projection(&std_dofs, k + 1)?;
        let peel = self
            .std_edge
            .eval_dofs(&vem2d::Field2::Polynomial(&poly_part), 2 * k + 4);
        let w = &std_dofs - &peel;

        let rot_w = self.std_edge.diff_poly(&w);
        let traces = self.std_edge.boundary_trace(&w);

        // Neumann problem: ∫∇ρ·∇φ = ∫ rot_w φ − ∮ (w·t) φ, flux moments
        // pinned to −(edge moments of w), zero mean.
        let n = self.fem.n_nodes();
        let mut f = DVector::zeros(n);
        self.fem
            .accumulate_volume(|x| rot_w.eval(&[x[0], x[1], 0.0])[0], &mut f);
        for sub in self.fem.boundary_edges() {
            let pts = self.fem.edge_quadrature(&sub, self.q + k + 2);
            for (x, wq, param) in pts {
                let (vals, _) = self.fem.shapes_at_physical(sub.tri, &x);
                let trace = traces[sub.parent].eval(param - 0.5);
                for (loc, &node) in self.fem.tri_nodes[sub.tri].iter().enumerate() {
                    f[node] -= wq * trace * vals[loc];
                }
            }
        }
        let n_constraints = self.b_rows.nrows();
        let n_edges = self.std_edge.geom.edges.len();
        let mut g = DVector::zeros(n_constraints);
        let mut rot_row = n_edges * (k + 1);
        for (i, desc) in self.std_edge.layout.iter().enumerate() {
            match *desc {
                DofDesc::EdgeMoment { edge, j } => g[edge * (k + 1) + j] = -w[i],
                DofDesc::Diff { .. } => {
                    g[rot_row] = w[i];
                    rot_row += 1;
                }
                DofDesc::InteriorX { .. } => {}
            }
        }
        let y = self.neumann.solve(&f);
        let lambda = self
            .schur
            .solve(&(&self.b_rows * &y - &g))
            .expect("schur system nonsingular");
        let rho = y - &self.ainv_bt * lambda;

        // Coupled σ/d system: A₀σ + M d = 0, C σ = x-moments − X ρ.
        let npk = mono::space_dim(k as i64, 2);
        let mut xmom = DVector::zeros(npk);
        for (i, desc) in self.std_edge.layout.iter().enumerate() {
            if let DofDesc::InteriorX { alpha } = *desc {
                xmom[mono::position(alpha, 2)] = w[i];
            }
        }
        let rhs_c = xmom - &self.x_block * &rho;
        let d = -self.d_lu.solve(&rhs_c).expect("constraint system nonsingular");
        let sigma_i = -(&self.a0inv_m * &d);
        let mut sigma = DVector::zeros(n);
        for i in 0..n {
            if let Some(ii) = self.fem.interior_index[i] {
                sigma[i] = sigma_i[ii];
            }
        }
        let div_remainder =
            Poly::from_coeffs(self.std_edge.geom.frame, 1, k, d.iter().copied().collect());
        Ok(Reconstruction { poly_part, rho, sigma, div_remainder, rotate_back })
    }

    /// Evaluates the reconstruction at interior points.
    pub fn eval(&self, rec: &Reconstruction, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        points
            .iter()
            .map(|p| {
                let t = self.fem.locate(p).expect("point inside the polygon");
                self.eval_in_tri(rec, t, p)
            })
            .collect()
    }

    fn eval_in_tri(&self, rec: &Reconstruction, t: usize, p: &[f64; 2]) -> [f64; 2] {
        let (_, grads) = self.fem.shapes_at_physical(t, p);
        let mut grho = [0.0, 0.0];
        let mut gsig = [0.0, 0.0];
        for (loc, &node) in self.fem.tri_nodes[t].iter().enumerate() {
            grho[0] += rec.rho[node] * grads[(loc, 0)];
            grho[1] += rec.rho[node] * grads[(loc, 1)];
            gsig[0] += rec.sigma[node] * grads[(loc, 0)];
            gsig[1] += rec.sigma[node] * grads[(loc, 1)];
        }
        let pv = rec.poly_part.eval(&[p[0], p[1], 0.0]);
        // curl ρ = (∂₂ρ, −∂₁ρ)
        let w = [pv[0] + grho[1] + gsig[0], pv[1] - grho[0] + gsig[1]];
        if rec.rotate_back {
            // v = R⁻¹ w = (w₂, −w₁)
            [w[1], -w[0]]
        } else {
            w
        }
    }

    /// Re-extracts the standard-edge DoFs of a reconstruction, resolving the
    /// piecewise structure of the finite element field (whole-edge Gauss
    /// rules would not see the sub-edge kinks).
    pub fn re_extract_dofs(&self, rec: &Reconstruction) -> DofVector {
        assert!(!rec.rotate_back, "re-extraction is defined on the edge layout");
        let k = self.k;
        let space = &self.std_edge;
        let n_edges = space.geom.edges.len();
        let mut out = DVector::zeros(space.dim());
        // Boundary families: edge moments and the boundary part of the rot
        // moments, accumulated per sub-edge.
        let rot_tests: Vec<Poly> = mono::indices(k.saturating_sub(1), 2)
            .into_iter()
            .filter(|a| mono::total_degree(*a) >= 1)
            .map(|a| vem2d::zero_mean_monomial(&space.geom, a))
            .collect();
        let rot_base = n_edges * (k + 1) + mono::space_dim(k as i64, 2);
        for sub in self.fem.boundary_edges() {
            let eg = &space.geom.edges[sub.parent];
            let t = eg.tangent;
            for (x, w, param) in self.fem.edge_quadrature(&sub, self.q + 2 * k + 2) {
                let val = self.eval_in_tri(rec, sub.tri, &x);
                let vt = val[0] * t[0] + val[1] * t[1];
                let u = param - 0.5;
                for j in 0..=k {
                    out[sub.parent * (k + 1) + j] += w * vt * u.powi(j as i32);
                }
                for (rr, p0) in rot_tests.iter().enumerate() {
                    out[rot_base + rr] += w * vt * p0.eval(&[x[0], x[1], 0.0])[0];
                }
            }
        }
        // Interior families per triangle: x-moments and the volume part of
        // the rot moments (by parts).
        let x_base = n_edges * (k + 1);
        let x_tests: Vec<Poly> = mono::indices(k, 2)
            .into_iter()
            .map(|a| vem2d::monomial(space.geom.frame, a).x_times())
            .collect();
        let curl_tests: Vec<Poly> = rot_tests
            .iter()
            .map(|p0| crate::poly::apply_diff(crate::poly::DiffKind::Curl2, p0).unwrap())
            .collect();
        for t in 0..self.fem.n_tris() {
            for (x, w) in self.fem.tri_quadrature(t) {
                let val = self.eval_in_tri(rec, t, &x);
                for (i, test) in x_tests.iter().enumerate() {
                    let tv = test.eval(&[x[0], x[1], 0.0]);
                    out[x_base + i] += w * (val[0] * tv[0] + val[1] * tv[1]);
                }
                for (rr, c) in curl_tests.iter().enumerate() {
                    let cv = c.eval(&[x[0], x[1], 0.0]);
                    out[rot_base + rr] += w * (val[0] * cv[0] + val[1] * cv[1]);
                }
            }
        }
        debug_assert!(!rec.rotate_back, "re-extraction is defined on the edge layout");
        out
    }

    /// L² projection of the reconstruction onto `(P_m)²`, integrating on the
    /// finite element triangles.
    pub fn project_reconstruction(&self, rec: &Reconstruction, m: usize) -> Poly {
        let frame = self.std_edge.geom.frame;
        let idx = mono::indices(m, 2);
        let nb = idx.len();
        let gram = self.std_edge.geom.moments.gram(m);
        let mut rhs = DMatrix::zeros(nb, 2);
        for t in 0..self.fem.n_tris() {
            for (x, w) in self.fem.tri_quadrature(t) {
                let val = self.eval_in_tri(rec, t, &x);
                let s = frame.scaled(&[x[0], x[1], 0.0]);
                for (i, a) in idx.iter().enumerate() {
                    let mv = s[0].powi(a[0] as i32) * s[1].powi(a[1] as i32);
                    rhs[(i, 0)] += w * mv * val[0];
                    rhs[(i, 1)] += w * mv * val[1];
                }
            }
        }
        let mut out = Poly::zeros(frame, 2, m);
        for c in 0..2 {
            let sol = crate::linalg::solve_spd(&gram, &DVector::from_column_slice(rhs.column(c).as_slice()));
            out.coeffs[c * nb..(c + 1) * nb].copy_from_slice(sol.as_slice());
        }
        out
    }

    /// L² norm of `v − rec` for an analytic field given in local coordinates.
    pub fn error_against<F: Fn(&[f64; 2]) -> [f64; 2]>(&self, rec: &Reconstruction, v: F) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.fem.n_tris() {
            for (x, w) in self.fem.tri_quadrature(t) {
                let r = self.eval_in_tri(rec, t, &x);
                let e = v(&x);
                acc += w * ((e[0] - r[0]).powi(2) + (e[1] - r[1]).powi(2));
            }
        }
        acc.sqrt()
    }

    /// L² norm of the reconstruction.
    pub fn norm(&self, rec: &Reconstruction) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.fem.n_tris() {
            for (x, w) in self.fem.tri_quadrature(t) {
                let r = self.eval_in_tri(rec, t, &x);
                acc += w * (r[0] * r[0] + r[1] * r[1]);
            }
        }
        acc.sqrt()
    }

    /// L² inner product of two reconstructions on the same evaluator.
    pub fn inner(&self, ra: &Reconstruction, rb: &Reconstruction) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.fem.n_tris() {
            for (x, w) in self.fem.tri_quadrature(t) {
                let a = self.eval_in_tri(ra, t, &x);
                let b = self.eval_in_tri(rb, t, &x);
                acc += w * (a[0] * b[0] + a[1] * b[1]);
            }
        }
        acc
    }

    /// L² inner product of the two Helmholtz components `curl ρ` and `∇σ` of
    /// a reconstruction (its polynomial part excluded).
    pub fn component_inner(&self, rec: &Reconstruction) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.fem.n_tris() {
            for (x, w) in self.fem.tri_quadrature(t) {
                let (_, grads) = self.fem.shapes_at_physical(t, &x);
                let mut grho = [0.0, 0.0];
                let mut gsig = [0.0, 0.0];
                for (loc, &node) in self.fem.tri_nodes[t].iter().enumerate() {
                    grho[0] += rec.rho[node] * grads[(loc, 0)];
                    grho[1] += rec.rho[node] * grads[(loc, 1)];
                    gsig[0] += rec.sigma[node] * grads[(loc, 0)];
                    gsig[1] += rec.sigma[node] * grads[(loc, 1)];
                }
                acc += w * (grho[1] * gsig[0] - grho[0] * gsig[1]);
            }
        }
        acc
    }
}

/// L² norm of the difference of two reconstructions of the same polygon at
/// different refinement levels. Integration runs on the finer mesh; the
/// coarse triangle containing a fine one follows from the refinement order.
pub fn difference_norm(
    ev_coarse: &VirtualEvaluator,
    rec_coarse: &Reconstruction,
    ev_fine: &VirtualEvaluator,
    rec_fine: &Reconstruction,
) -> f64 {
    assert!(ev_fine.r >= ev_coarse.r);
    let extra = ev_fine.r - ev_coarse.r;
    let mut acc = 0.0;
    for t in 0..ev_fine.fem.n_tris() {
        let tc = TriFem::coarse_parent(t, extra);
        for (x, w) in ev_fine.fem.tri_quadrature(t) {
            let a = ev_fine.eval_in_tri(rec_fine, t, &x);
            let b = ev_coarse.eval_in_tri(rec_coarse, tc, &x);
            acc += w * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
        }
    }
    acc.sqrt()
}

/// Rank/conditioning report: the polynomial DoF matrix, the serendipity
/// functional matrix, and (optionally) the Gram matrix of the reconstructed
/// canonical basis, each as row-equilibrated extreme singular values.
pub struct UnisolvenceReport {
    pub dof_matrix_smin: f64,
    pub dof_matrix_smax: f64,
    pub serendipity_rows: usize,
    pub serendipity_cols: usize,
    pub serendipity_smin: f64,
    pub serendipity_smax: f64,
    pub full_gram_min_eig: Option<f64>,
}

pub fn unisolvence_report(
    space: &Space2D,
    full_space_check: Option<(usize, usize)>,
) -> Result<UnisolvenceReport, Vem2dError> {
    let a = space.polynomial_dof_matrix();
    let (dof_smin, dof_smax) = crate::linalg::equilibrated_extreme_singular_values(&a);
    let s = space.serendipity_matrix();
    let (ser_smin, ser_smax) = crate::linalg::equilibrated_extreme_singular_values(&s);
    let full_gram_min_eig = match full_space_check {
        None => None,
        Some((r, q)) => {
            let ev = VirtualEvaluator::build(&space.geom, space.k, r, q)?;
            let n = space.dim();
            let recs: Vec<Reconstruction> = (0..n)
                .map(|i| {
                    let mut e = DVector::zeros(n);
                    e[i] = 1.0;
                    ev.reconstruct(space, &e)
                })
                .collect::<Result<_, _>>()?;
            let mut gram = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = ev.inner(&recs[i], &recs[j]);
                    gram[(i, j)] = v;
                    gram[(j, i)] = v;
                }
            }
            Some(crate::linalg::min_symmetric_eigenvalue(&gram))
        }
    };
    Ok(UnisolvenceReport {
        dof_matrix_smin: dof_smin,
        dof_matrix_smax: dof_smax,
        serendipity_rows: s.nrows(),
        serendipity_cols: s.ncols(),
        serendipity_smin: ser_smin,
        serendipity_smax: ser_smax,
        full_gram_min_eig,
    })
}

#[cfg(test)]
mod tests;
