//! Standard and serendipity edge (H(curl)-type) and face (H(div)-type)
//! virtual element spaces on polygons: degrees of freedom, boundary traces,
//! the exact rot/div polynomial, L² projectors, the serendipity projection
//! and moment expansion, stabilizations and the boundary-induced norm.
//!
//! The edge space of order `k` holds fields with polynomial tangential edge
//! traces of degree `k`, `div` in `P_k` and `rot` in `P_{k−1}`; the face
//! space is its pointwise π/2 rotation. Degrees of freedom are edge moments,
//! interior moments against `x_F·m_α` (edge) or `x_F^⊥·m_α` (face), and
//! zero-mean rot/div moments.

mod forms;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::field::AnalyticField2;
use crate::linalg;
use crate::mesh::validate::face_report;
use crate::mesh::FaceGeom;
use crate::poly::{
    apply_diff, decompose_vector, mono, DecompKind, DiffKind, Poly, PolyError,
};
use crate::quadrature::QuadRule;

pub use forms::{discrete_mass2d, stabilization2d, tri_norm, TriNormInput, TriNormParams};

pub type DofVector = DVector<f64>;

#[derive(Debug, Error)]
pub enum Vem2dError {
    #[error("serendipity space requested on a face failing the convexity condition: {0}")]
    SerendipityNonConvex(String),
    #[error("projection order {m} exceeds the computable range {max}")]
    OrderOutOfRange { m: usize, max: usize },
    #[error("serendipity functional system rank {rank} < {expected}; singular values {sv:?}")]
    RankDeficient { rank: usize, expected: usize, sv: Vec<f64> },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Edge,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Standard,
    Serendipity,
}

/// One degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofDesc {
    /// `∫_e (v·t_e) m_j ds` (edge family) or `∫_e (v·n_e) m_j ds` (face
    /// family), scaled edge monomials centered at the edge midpoint.
    EdgeMoment { edge: usize, j: usize },
    /// `∫_F v·(x_F m_α)` (edge family) or `∫_F v·(x_F^⊥ m_α)` (face family).
    InteriorX { alpha: [u8; 3] },
    /// `∫_F rot_F v (m_α − mean m_α)` (edge) or the div analog (face).
    Diff { alpha: [u8; 3] },
}

/// Degree-`k` polynomial on an edge in the scaled arclength coordinate
/// `u = (s − s_mid)/h_e ∈ [−1/2, 1/2]`.
#[derive(Debug, Clone)]
pub struct EdgePoly {
    pub len: f64,
    pub coeffs: Vec<f64>,
}

impl EdgePoly {
    pub fn eval(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        let mut p = 1.0;
        for &c in &self.coeffs {
            acc += c * p;
            p *= u;
        }
        acc
    }
}

/// Exact edge Gram `(m_i, m_j)_e = h_e ∫ u^{i+j} du`.
pub fn edge_gram(len: f64, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k + 1, k + 1, |i, j| {
        let p = i + j;
        if p % 2 == 0 {
            len * 0.5_f64.powi(p as i32) / (p as f64 + 1.0)
        } else {
            0.0
        }
    })
}

/// Local edge or face virtual element space on a polygon.
pub struct Space2D {
    pub family: Family,
    pub variant: Variant,
    pub k: usize,
    pub geom: FaceGeom,
    pub eta: usize,
    pub beta: i64,
    pub layout: Vec<DofDesc>,
    /// Decomposed vector-monomial test bases for `Π⁰_m`, indexed by `m`.
    proj_tests: Vec<Vec<(Poly, Poly)>>,
}

/// Input for DoF evaluation.
pub enum Field2<'a> {
    Analytic(&'a AnalyticField2),
    Polynomial(&'a Poly),
}

impl Field2<'_> {
    pub fn value(&self, x: &[f64; 3]) -> [f64; 2] {
        match self {
            Field2::Analytic(f) => f.value(x),
            Field2::Polynomial(p) => {
                let v = p.eval(x);
                [v[0], v[1]]
            }
        }
    }
}

pub fn build_space2d(
    geom: FaceGeom,
    k: usize,
    family: Family,
    variant: Variant,
) -> Result<Space2D, Vem2dError> {
    assert!(k >= 1, "order must be at least 1");
    let (eta, beta) = geom.face_lines(k);
    if variant == Variant::Serendipity {
        let report = face_report(&geom.vertices, 0.1);
        if !report.convex || report.min_angle < 0.1 || report.max_angle > std::f64::consts::PI - 0.1
        {
            return Err(Vem2dError::SerendipityNonConvex(format!(
                "convex={}, angles in [{:.3}, {:.3}]",
                report.convex, report.min_angle, report.max_angle
            )));
        }
    }
    let mut layout = Vec::new();
    for e in 0..geom.edges.len() {
        for j in 0..=k {
            layout.push(DofDesc::EdgeMoment { edge: e, j });
        }
    }
    let x_degree: i64 = match variant {
        Variant::Standard => k as i64,
        Variant::Serendipity => beta,
    };
    if x_degree >= 0 {
        for alpha in mono::indices(x_degree as usize, 2) {
            layout.push(DofDesc::InteriorX { alpha });
        }
    }
    if k > 1 {
        for alpha in mono::indices(k - 1, 2) {
            if mono::total_degree(alpha) >= 1 {
                layout.push(DofDesc::Diff { alpha });
            }
        }
    }

    // Decompose the vector-monomial test bases for every projection order.
    let decomp_kind = match family {
        Family::Edge => DecompKind::CurlX2d,
        Family::Face => DecompKind::GradXperp2d,
    };
    let mut proj_tests = Vec::with_capacity(k + 2);
    for m in 0..=(k + 1) {
        let n = mono::space_dim(m as i64, 2);
        let mut tests = Vec::with_capacity(2 * n);
        for comp in 0..2 {
            for i in 0..n {
                let mut q = Poly::zeros(geom.frame, 2, m);
                q.coeffs[comp * n + i] = 1.0;
                tests.push(decompose_vector(decomp_kind, &q, &geom.moments)?);
            }
        }
        proj_tests.push(tests);
    }

    Ok(Space2D { family, variant, k, geom, eta, beta, layout, proj_tests })
}

impl Space2D {
    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    /// Position of a DoF in the layout.
    pub fn dof_index(&self, desc: DofDesc) -> Option<usize> {
        self.layout.iter().position(|d| *d == desc)
    }

    /// Unit vector along which an edge moment tests the field: `t_e` for the
    /// edge family, `n_e` for the face family.
    fn edge_direction(&self, e: usize) -> [f64; 2] {
        let eg = &self.geom.edges[e];
        match self.family {
            Family::Edge => eg.tangent,
            Family::Face => eg.normal,
        }
    }

    /// Evaluates all DoFs of a field. Derivative moments are taken by parts,
    /// so only pointwise values of the field are used.
    pub fn eval_dofs(&self, field: &Field2, quad_degree: usize) -> DofVector {
        let face_rule = self.geom.face_rule(quad_degree);
        let edge_rules: Vec<QuadRule> = (0..self.geom.edges.len())
            .map(|e| self.geom.edge_rule(e, quad_degree))
            .collect();
        let mut out = DVector::zeros(self.dim());
        for (i, desc) in self.layout.iter().enumerate() {
            out[i] = match *desc {
                DofDesc::EdgeMoment { edge, j } => {
                    let dir = self.edge_direction(edge);
                    let rule = &edge_rules[edge];
                    rule.points
                        .iter()
                        .zip(rule.weights.iter())
                        .map(|(p, w)| {
                            let v = field.value(p);
                            let u = self.geom.edge_coord(edge, p);
                            w * (v[0] * dir[0] + v[1] * dir[1]) * u.powi(j as i32)
                        })
                        .sum()
                }
                DofDesc::InteriorX { alpha } => {
                    let m_alpha = monomial(self.geom.frame, alpha);
                    let test = match self.family {
                        Family::Edge => m_alpha.x_times(),
                        Family::Face => m_alpha.xperp_times(),
                    };
                    face_rule
                        .points
                        .iter()
                        .zip(face_rule.weights.iter())
                        .map(|(p, w)| {
                            let v = field.value(p);
                            let t = test.eval(p);
                            w * (v[0] * t[0] + v[1] * t[1])
                        })
                        .sum()
                }
                DofDesc::Diff { alpha } => {
                    let p0 = zero_mean_monomial(&self.geom, alpha);
                    match self.family {
                        Family::Edge => {
                            // ∫ rot v p⁰ = ∫ v·curl p⁰ + ∮ (v·t) p⁰
                            let curl = apply_diff(DiffKind::Curl2, &p0).unwrap();
                            let interior: f64 = face_rule
                                .points
                                .iter()
                                .zip(face_rule.weights.iter())
                                .map(|(p, w)| {
                                    let v = field.value(p);
                                    let c = curl.eval(p);
                                    w * (v[0] * c[0] + v[1] * c[1])
                                })
                                .sum();
                            let boundary: f64 = (0..self.geom.edges.len())
                                .map(|e| {
                                    let t = self.geom.edges[e].tangent;
                                    let rule = &edge_rules[e];
                                    rule.points
                                        .iter()
                                        .zip(rule.weights.iter())
                                        .map(|(p, w)| {
                                            let v = field.value(p);
                                            w * (v[0] * t[0] + v[1] * t[1]) * p0.eval(p)[0]
                                        })
                                        .sum::<f64>()
                                })
                                .sum();
                            interior + boundary
                        }
                        Family::Face => {
                            // ∫ div v p⁰ = −∫ v·∇p⁰ + ∮ (v·n) p⁰
                            let grad = apply_diff(DiffKind::Grad2, &p0).unwrap();
                            let interior: f64 = face_rule
                                .points
                                .iter()
                                .zip(face_rule.weights.iter())
                                .map(|(p, w)| {
                                    let v = field.value(p);
                                    let g = grad.eval(p);
                                    w * (v[0] * g[0] + v[1] * g[1])
                                })
                                .sum();
                            let boundary: f64 = (0..self.geom.edges.len())
                                .map(|e| {
                                    let nrm = self.geom.edges[e].normal;
                                    let rule = &edge_rules[e];
                                    rule.points
                                        .iter()
                                        .zip(rule.weights.iter())
                                        .map(|(p, w)| {
                                            let v = field.value(p);
                                            w * (v[0] * nrm[0] + v[1] * nrm[1]) * p0.eval(p)[0]
                                        })
                                        .sum::<f64>()
                                })
                                .sum();
                            -interior + boundary
                        }
                    }
                }
            };
        }
        out
    }

    /// Per-edge trace polynomial (`v·t_e` or `v·n_e`) recovered from the
    /// edge moments.
    pub fn boundary_trace(&self, dofs: &DofVector) -> Vec<EdgePoly> {
        let k = self.k;
        let mut traces = Vec::with_capacity(self.geom.edges.len());
        let mut pos = 0;
        for e in 0..self.geom.edges.len() {
            let len = self.geom.edges[e].len;
            let gram = edge_gram(len, k);
            let rhs = DVector::from_fn(k + 1, |j, _| dofs[pos + j]);
            let coeffs = linalg::solve_spd(&gram, &rhs);
            traces.push(EdgePoly { len, coeffs: coeffs.iter().copied().collect() });
            pos += k + 1;
        }
        traces
    }

    /// Boundary circulation `∮ v·t` (edge family) or flux `∮ v·n` (face
    /// family); equals the zeroth edge moments summed.
    pub fn boundary_integral(&self, dofs: &DofVector) -> f64 {
        let mut acc = 0.0;
        let mut pos = 0;
        for _ in 0..self.geom.edges.len() {
            acc += dofs[pos];
            pos += self.k + 1;
        }
        acc
    }

    /// The exact `rot_F v_h ∈ P_{k−1}` (edge family) or `div_F v_h` (face
    /// family): zero-mean part from the Diff moments, mean from the boundary.
    pub fn diff_poly(&self, dofs: &DofVector) -> Poly {
        let k = self.k;
        let n = mono::space_dim(k as i64 - 1, 2);
        let idx = mono::indices(k - 1, 2);
        let mut a = DMatrix::zeros(n, n);
        let mut b = DVector::zeros(n);
        // Mean row: ∫ r = boundary integral.
        for (j, &beta) in idx.iter().enumerate() {
            a[(0, j)] = self.geom.moments.integral(beta);
        }
        b[0] = self.boundary_integral(dofs);
        let mut row = 1;
        for (i, desc) in self.layout.iter().enumerate() {
            if let DofDesc::Diff { alpha } = *desc {
                for (j, &beta) in idx.iter().enumerate() {
                    a[(row, j)] = self.geom.moments.integral(mono::add(alpha, beta))
                        - self.geom.moments.mean(alpha) * self.geom.moments.integral(beta);
                }
                b[row] = dofs[i];
                row += 1;
            }
        }
        debug_assert_eq!(row, n);
        let coeffs = a.lu().solve(&b).expect("diff system nonsingular");
        Poly::from_coeffs(self.geom.frame, 1, k - 1, coeffs.iter().copied().collect())
    }

    /// Interior moment values against `x_F m_α` (edge) / `x_F^⊥ m_α` (face)
    /// for all `|α| ≤ k`: read from the layout for the standard variant,
    /// filled through the serendipity projection otherwise.
    fn full_x_moments(&self, dofs: &DofVector) -> Result<Vec<f64>, Vem2dError> {
        let idx = mono::indices(self.k, 2);
        match self.variant {
            Variant::Standard => {
                let mut vals = vec![0.0; idx.len()];
                for (i, desc) in self.layout.iter().enumerate() {
                    if let DofDesc::InteriorX { alpha } = *desc {
                        vals[mono::position(alpha, 2)] = dofs[i];
                    }
                }
                Ok(vals)
            }
            Variant::Serendipity => {
                let proj = self.serendipity_project_dofs(dofs)?;
                let mut vals = vec![0.0; idx.len()];
                for (i, &alpha) in idx.iter().enumerate() {
                    let within = (mono::total_degree(alpha) as i64) <= self.beta;
                    if within {
                        let pos = self
                            .dof_index(DofDesc::InteriorX { alpha })
                            .expect("serendipity layout holds low moments");
                        vals[i] = dofs[pos];
                    } else {
                        let m_alpha = monomial(self.geom.frame, alpha);
                        let test = match self.family {
                            Family::Edge => m_alpha.x_times(),
                            Family::Face => m_alpha.xperp_times(),
                        };
                        vals[i] = self.geom.moments.inner(&proj.poly, &test);
                    }
                }
                Ok(vals)
            }
        }
    }

    /// L² projection `Π⁰_m v_h` onto `(P_m)²`, `m ≤ k + 1`, assembled from
    /// the degrees of freedom through the polynomial decompositions.
    pub fn l2_projection(&self, dofs: &DofVector, m: usize) -> Result<Poly, Vem2dError> {
        if m > self.k + 1 {
            return Err(Vem2dError::OrderOutOfRange { m, max: self.k + 1 });
        }
        let xmom = self.full_x_moments(dofs)?;
        let diff = self.diff_poly(dofs);
        let traces = self.boundary_trace(dofs);
        let n = mono::space_dim(m as i64, 2);
        let mut rhs = DVector::zeros(2 * n);
        for (col, (s_or_p, c)) in self.proj_tests[m].iter().enumerate() {
            // (v, x c) from the interior moments: c = Σ γ_α m_α, |α| ≤ k.
            let mut val = 0.0;
            for (i, &alpha) in mono::indices(c.degree, 2).iter().enumerate() {
                if c.coeffs[i] != 0.0 {
                    val += c.coeffs[i] * xmom[mono::position(alpha, 2)];
                }
            }
            match self.family {
                Family::Edge => {
                    // (v, curl s) = (rot v, s) − ∮ (v·t) s
                    val += self.geom.moments.inner(&diff, s_or_p);
                    val -= self.boundary_pair(&traces, s_or_p, m + 1 + self.k);
                }
                Family::Face => {
                    // (v, ∇p) = −(div v, p) + ∮ (v·n) p
                    val -= self.geom.moments.inner(&diff, s_or_p);
                    val += self.boundary_pair(&traces, s_or_p, m + 1 + self.k);
                }
            }
            rhs[col] = val;
        }
        let gram = self.geom.moments.gram(m);
        let mut out = Poly::zeros(self.geom.frame, 2, m);
        for comp in 0..2 {
            let b = DVector::from_fn(n, |i, _| rhs[comp * n + i]);
            let sol = linalg::solve_spd(&gram, &b);
            out.coeffs[comp * n..(comp + 1) * n].copy_from_slice(sol.as_slice());
        }
        Ok(out)
    }

    /// `∮ (v·t_or_n) s ds` from the boundary traces, `s` a scalar polynomial.
    fn boundary_pair(&self, traces: &[EdgePoly], s: &Poly, degree: usize) -> f64 {
        let mut acc = 0.0;
        for (e, tr) in traces.iter().enumerate() {
            let rule = self.geom.edge_rule(e, degree);
            for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
                let u = self.geom.edge_coord(e, p);
                acc += w * tr.eval(u) * s.eval(p)[0];
            }
        }
        acc
    }

    /// Serendipity projection from DoF values.
    pub fn serendipity_project_dofs(&self, dofs: &DofVector) -> Result<SerendipityProjection, Vem2dError> {
        let traces = self.boundary_trace(dofs);
        let rhs = self.serendipity_functionals(|alpha, test_degree| {
            self.boundary_functional_traces(&traces, alpha, test_degree)
        }, |i| dofs[i]);
        self.serendipity_solve(rhs)
    }

    /// Serendipity projection of an explicit polynomial (used for the
    /// consistency tests; the functionals are evaluated by quadrature).
    pub fn serendipity_project_poly(&self, p: &Poly) -> Result<SerendipityProjection, Vem2dError> {
        let rhs = self.poly_functionals(p);
        self.serendipity_solve(rhs)
    }

    /// Boundary functional `∮ (v·t)(∇m_α·t)` (edge family; rotated for the
    /// face family) evaluated from boundary traces.
    fn boundary_functional_traces(&self, traces: &[EdgePoly], alpha: [u8; 3], degree: usize) -> f64 {
        let m_alpha = monomial(self.geom.frame, alpha);
        let dp = match self.family {
            Family::Edge => apply_diff(DiffKind::Grad2, &m_alpha).unwrap(),
            Family::Face => apply_diff(DiffKind::Curl2, &m_alpha).unwrap(),
        };
        let mut acc = 0.0;
        for (e, tr) in traces.iter().enumerate() {
            let dir = self.edge_direction(e);
            let rule = self.geom.edge_rule(e, degree);
            for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
                let u = self.geom.edge_coord(e, p);
                let g = dp.eval(p);
                acc += w * tr.eval(u) * (g[0] * dir[0] + g[1] * dir[1]);
            }
        }
        acc
    }

    /// Assembles the serendipity functional vector given closures for the
    /// boundary rows and direct DoF reads.
    fn serendipity_functionals(
        &self,
        boundary: impl Fn([u8; 3], usize) -> f64,
        dof: impl Fn(usize) -> f64,
    ) -> DVector<f64> {
        let k = self.k;
        let mut rows = Vec::new();
        // (a) gradient-trace rows, p in P_{k+1} minus constants.
        for alpha in mono::indices(k + 1, 2) {
            if mono::total_degree(alpha) >= 1 {
                rows.push(boundary(alpha, 2 * k + 2));
            }
        }
        // (b) total circulation/flux.
        let mut circ = 0.0;
        let mut pos = 0;
        for _ in 0..self.geom.edges.len() {
            circ += dof(pos);
            pos += k + 1;
        }
        rows.push(circ);
        // (c) zero-mean rot/div moments.
        for (i, desc) in self.layout.iter().enumerate() {
            if matches!(desc, DofDesc::Diff { .. }) {
                rows.push(dof(i));
            }
        }
        // (d) interior moments up to β.
        for (i, desc) in self.layout.iter().enumerate() {
            if let DofDesc::InteriorX { alpha } = *desc {
                if (mono::total_degree(alpha) as i64) <= self.beta {
                    rows.push(dof(i));
                }
            }
        }
        DVector::from_vec(rows)
    }

    /// Functional vector of an explicit polynomial field.
    fn poly_functionals(&self, p: &Poly) -> DVector<f64> {
        let k = self.k;
        let mut rows = Vec::new();
        for alpha in mono::indices(k + 1, 2) {
            if mono::total_degree(alpha) >= 1 {
                rows.push(self.boundary_functional_poly(p, alpha));
            }
        }
        // circulation: ∮ p·dir
        let mut circ = 0.0;
        for e in 0..self.geom.edges.len() {
            let dir = self.edge_direction(e);
            let rule = self.geom.edge_rule(e, p.degree + 1);
            for (pt, w) in rule.points.iter().zip(rule.weights.iter()) {
                let v = p.eval(pt);
                circ += w * (v[0] * dir[0] + v[1] * dir[1]);
            }
        }
        rows.push(circ);
        if k > 1 {
            let diff = match self.family {
                Family::Edge => apply_diff(DiffKind::Rot2, p).unwrap(),
                Family::Face => apply_diff(DiffKind::Div2, p).unwrap(),
            };
            for alpha in mono::indices(k - 1, 2) {
                if mono::total_degree(alpha) >= 1 {
                    let p0 = zero_mean_monomial(&self.geom, alpha);
                    rows.push(self.geom.moments.inner(&diff, &p0));
                }
            }
        }
        if self.beta >= 0 {
            for alpha in mono::indices(self.beta as usize, 2) {
                let m_alpha = monomial(self.geom.frame, alpha);
                let test = match self.family {
                    Family::Edge => m_alpha.x_times(),
                    Family::Face => m_alpha.xperp_times(),
                };
                rows.push(self.geom.moments.inner(p, &test));
            }
        }
        DVector::from_vec(rows)
    }

    fn boundary_functional_poly(&self, p: &Poly, alpha: [u8; 3]) -> f64 {
        let m_alpha = monomial(self.geom.frame, alpha);
        let dp = match self.family {
            Family::Edge => apply_diff(DiffKind::Grad2, &m_alpha).unwrap(),
            Family::Face => apply_diff(DiffKind::Curl2, &m_alpha).unwrap(),
        };
        let mut acc = 0.0;
        for e in 0..self.geom.edges.len() {
            let dir = self.edge_direction(e);
            let rule = self.geom.edge_rule(e, p.degree + self.k + 1);
            for (pt, w) in rule.points.iter().zip(rule.weights.iter()) {
                let v = p.eval(pt);
                let g = dp.eval(pt);
                acc += w * (v[0] * dir[0] + v[1] * dir[1]) * (g[0] * dir[0] + g[1] * dir[1]);
            }
        }
        acc
    }

    /// The functional matrix of the serendipity system on the basis of
    /// `(P_k)²`; rows ordered as in [`Self::serendipity_functionals`].
    pub fn serendipity_matrix(&self) -> DMatrix<f64> {
        let n = mono::space_dim(self.k as i64, 2);
        let mut cols = Vec::with_capacity(2 * n);
        for comp in 0..2 {
            for i in 0..n {
                let mut w = Poly::zeros(self.geom.frame, 2, self.k);
                w.coeffs[comp * n + i] = 1.0;
                cols.push(self.poly_functionals(&w));
            }
        }
        let rows = cols[0].len();
        DMatrix::from_fn(rows, 2 * n, |r, c| cols[c][r])
    }

    fn serendipity_solve(&self, rhs: DVector<f64>) -> Result<SerendipityProjection, Vem2dError> {
        let a = self.serendipity_matrix();
        let expected = a.ncols();
        let sol = linalg::lstsq(&a, &rhs, 1e-12);
        if sol.rank < expected {
            return Err(Vem2dError::RankDeficient {
                rank: sol.rank,
                expected,
                sv: sol.singular_values,
            });
        }
        let n = mono::space_dim(self.k as i64, 2);
        let poly = Poly::from_coeffs(
            self.geom.frame,
            2,
            self.k,
            sol.solution.iter().copied().collect(),
        );
        let _ = n;
        Ok(SerendipityProjection { poly, residual: sol.residual, rank: sol.rank, rows: a.nrows() })
    }

    /// Expands serendipity DoFs to the standard layout on the same polygon:
    /// shared DoFs are copied and the missing interior moments are filled
    /// with moments of the serendipity projection.
    pub fn serendipity_expand(&self, standard: &Space2D, sdofs: &DofVector) -> Result<DofVector, Vem2dError> {
        assert_eq!(self.variant, Variant::Serendipity);
        assert_eq!(standard.variant, Variant::Standard);
        assert_eq!(standard.k, self.k);
        let proj = self.serendipity_project_dofs(sdofs)?;
        let mut out = DVector::zeros(standard.dim());
        for (i, desc) in standard.layout.iter().enumerate() {
            out[i] = match *desc {
                DofDesc::EdgeMoment { .. } | DofDesc::Diff { .. } => {
                    sdofs[self.dof_index(*desc).expect("shared dof present")]
                }
                DofDesc::InteriorX { alpha } => {
                    if (mono::total_degree(alpha) as i64) <= self.beta {
                        sdofs[self.dof_index(*desc).expect("low moment present")]
                    } else {
                        let m_alpha = monomial(self.geom.frame, alpha);
                        let test = match self.family {
                            Family::Edge => m_alpha.x_times(),
                            Family::Face => m_alpha.xperp_times(),
                        };
                        self.geom.moments.inner(&proj.poly, &test)
                    }
                }
            };
        }
        Ok(out)
    }

    /// DoF matrix of the polynomial subspace `(P_k)²` (column `j` holds the
    /// DoFs of the `j`-th vector monomial); full column rank certifies
    /// restricted unisolvence.
    pub fn polynomial_dof_matrix(&self) -> DMatrix<f64> {
        let n = mono::space_dim(self.k as i64, 2);
        let mut cols = Vec::with_capacity(2 * n);
        for comp in 0..2 {
            for i in 0..n {
                let mut w = Poly::zeros(self.geom.frame, 2, self.k);
                w.coeffs[comp * n + i] = 1.0;
                cols.push(self.eval_dofs(&Field2::Polynomial(&w), 2 * self.k + 2));
            }
        }
        DMatrix::from_fn(self.dim(), 2 * n, |r, c| cols[c][r])
    }
}

/// Result of the serendipity projection with its least-squares diagnostics.
/// Residuals above ~1e-8 on consistent inputs indicate the overdetermined
/// functional system was not consistent for this field.
pub struct SerendipityProjection {
    pub poly: Poly,
    pub residual: f64,
    pub rank: usize,
    pub rows: usize,
}

pub(crate) fn monomial(frame: crate::poly::CellFrame, alpha: [u8; 3]) -> Poly {
    let deg = mono::total_degree(alpha);
    let mut p = Poly::zeros(frame, 1, deg);
    p.coeffs[mono::position(alpha, 2)] = 1.0;
    p
}

pub(crate) fn zero_mean_monomial(geom: &FaceGeom, alpha: [u8; 3]) -> Poly {
    let mut p = monomial(geom.frame, alpha);
    p.coeffs[0] -= geom.moments.mean(alpha);
    p
}

#[cfg(test)]
mod tests;
