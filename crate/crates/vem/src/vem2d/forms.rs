//! Stabilizations, discrete L² forms, and the boundary-induced norm on
//! polygons. All matrices live on the DoF basis of the space.

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::poly::{apply_diff, mono, DiffKind, Poly};

use super::{edge_gram, monomial, zero_mean_monomial, DofVector, Family, Field2, Space2D, Variant, Vem2dError};

/// Parameters of the boundary-induced norm; the derived weight is
/// `γ̃ = γ h_F / |F|^{1/2}`.
#[derive(Debug, Clone, Copy)]
pub struct TriNormParams {
    pub gamma: f64,
    pub gamma_hat: f64,
}

impl Default for TriNormParams {
    fn default() -> Self {
        TriNormParams { gamma: 1.0, gamma_hat: 1.0 }
    }
}

pub enum TriNormInput<'a> {
    Dofs(&'a DofVector),
    Polynomial(&'a Poly),
}

/// Stabilization on the DoF basis:
/// `S(v,w) = h_F Σ_e (v·t_e, w·t_e)_e + h_F² (rot v, rot w)_F + (Π v, Π w)_F`
/// with `Π = Π⁰_{k+1}` for the standard variant and the serendipity
/// projection for the serendipity variant; the face family swaps `t_e → n_e`
/// and `rot → div`. Symmetric positive definite.
pub fn stabilization2d(space: &Space2D) -> Result<DMatrix<f64>, Vem2dError> {
    let n = space.dim();
    let h = space.geom.frame.diameter;
    let k = space.k;
    // Per-basis-vector computable objects.
    let mut traces = Vec::with_capacity(n);
    let mut rots = Vec::with_capacity(n);
    let mut projs = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        traces.push(space.boundary_trace(&e));
        rots.push(space.diff_poly(&e));
        let p = match space.variant {
            Variant::Standard => space.l2_projection(&e, k + 1)?,
            Variant::Serendipity => space.serendipity_project_dofs(&e)?.poly,
        };
        projs.push(p);
    }
    let grams: Vec<DMatrix<f64>> = space
        .geom
        .edges
        .iter()
        .map(|e| edge_gram(e.len, k))
        .collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut val = 0.0;
            for (e, g) in grams.iter().enumerate() {
                let a = DVector::from_vec(traces[i][e].coeffs.clone());
                let b = DVector::from_vec(traces[j][e].coeffs.clone());
                val += h * (a.transpose() * g * b)[(0, 0)];
            }
            val += h * h * space.geom.moments.inner(&rots[i], &rots[j]);
            val += space.geom.moments.inner(&projs[i], &projs[j]);
            s[(i, j)] = val;
            s[(j, i)] = val;
        }
    }
    Ok(s)
}

/// Discrete L² form `[v,w] = (Π⁰ v, Π⁰ w)_F + S((I−Π⁰)v, (I−Π⁰)w)` with
/// `Π⁰ = Π⁰_k`; exact on polynomial pairs of degree ≤ k.
pub fn discrete_mass2d(space: &Space2D) -> Result<DMatrix<f64>, Vem2dError> {
    let n = space.dim();
    let k = space.k;
    let npk = mono::space_dim(k as i64, 2);
    // P: dofs → Π⁰_k coefficients.
    let mut p = DMatrix::zeros(2 * npk, n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let proj = space.l2_projection(&e, k)?;
        for (r, &c) in proj.coeffs.iter().enumerate() {
            p[(r, i)] = c;
        }
    }
    // E: polynomial coefficients → dofs.
    let mut em = DMatrix::zeros(n, 2 * npk);
    for comp in 0..2 {
        for i in 0..npk {
            let mut w = Poly::zeros(space.geom.frame, 2, k);
            w.coeffs[comp * npk + i] = 1.0;
            let d = space.eval_dofs(&Field2::Polynomial(&w), 2 * k + 2);
            for r in 0..n {
                em[(r, comp * npk + i)] = d[r];
            }
        }
    }
    let gram = space.geom.moments.gram(k);
    let mut g2 = DMatrix::zeros(2 * npk, 2 * npk);
    g2.view_mut((0, 0), (npk, npk)).copy_from(&gram);
    g2.view_mut((npk, npk), (npk, npk)).copy_from(&gram);
    let s = stabilization2d(space)?;
    let d = DMatrix::identity(n, n) - &em * &p;
    let m = p.transpose() * g2 * &p + d.transpose() * s * &d;
    Ok((&m + m.transpose()) * 0.5)
}

/// The boundary-induced norm on `(P_k)²` (also evaluable on virtual fields
/// through their DoFs): weighted circulation, zero-mean rot supremum,
/// boundary gradient-trace supremum, and interior-moment supremum (omitted
/// when `β_F < 0`). Each supremum is a generalized Rayleigh quotient.
pub fn tri_norm(space: &Space2D, input: TriNormInput, params: &TriNormParams) -> Result<f64, Vem2dError> {
    let h = space.geom.frame.diameter;
    let area = space.geom.frame.measure;
    let k = space.k;
    let gamma_tilde = params.gamma * h / area.sqrt();

    // Computable pieces shared by both input kinds.
    let (circulation, diff, trace_pair, xmom): (f64, Poly, Box<dyn Fn(&Poly) -> f64>, Vec<f64>) =
        match input {
            TriNormInput::Dofs(dofs) => {
                let circ = space.boundary_integral(dofs);
                let diff = space.diff_poly(dofs);
                let traces = space.boundary_trace(dofs);
                let sp = space as &Space2D;
                let traces_cl = traces.clone();
                let pair = Box::new(move |q: &Poly| {
                    // ∮ (v·dir) (∇q·dir or curl q·dir)
                    let dq = match sp.family {
                        Family::Edge => apply_diff(DiffKind::Grad2, q).unwrap(),
                        Family::Face => apply_diff(DiffKind::Curl2, q).unwrap(),
                    };
                    let mut acc = 0.0;
                    for (e, tr) in traces_cl.iter().enumerate() {
                        let dir = match sp.family {
                            Family::Edge => sp.geom.edges[e].tangent,
                            Family::Face => sp.geom.edges[e].normal,
                        };
                        let rule = sp.geom.edge_rule(e, 2 * k + 2);
                        for (pt, w) in rule.points.iter().zip(rule.weights.iter()) {
                            let u = sp.geom.edge_coord(e, pt);
                            let g = dq.eval(pt);
                            acc += w * tr.eval(u) * (g[0] * dir[0] + g[1] * dir[1]);
                        }
                    }
                    acc
                }) as Box<dyn Fn(&Poly) -> f64>;
                let beta = space.beta;
                let mut xv = Vec::new();
                if beta >= 0 {
                    for alpha in mono::indices(beta as usize, 2) {
                        let pos = space
                            .dof_index(super::DofDesc::InteriorX { alpha })
                            .expect("interior moments up to β are DoFs in both variants");
                        xv.push(dofs[pos]);
                    }
                }
                (circ, diff, pair, xv)
            }
            TriNormInput::Polynomial(p) => {
                let mut circ = 0.0;
                for e in 0..space.geom.edges.len() {
                    let dir = match space.family {
                        Family::Edge => space.geom.edges[e].tangent,
                        Family::Face => space.geom.edges[e].normal,
                    };
                    let rule = space.geom.edge_rule(e, p.degree + 1);
                    for (pt, w) in rule.points.iter().zip(rule.weights.iter()) {
                        let v = p.eval(pt);
                        circ += w * (v[0] * dir[0] + v[1] * dir[1]);
                    }
                }
                let diff = match space.family {
                    Family::Edge => apply_diff(DiffKind::Rot2, p).unwrap(),
                    Family::Face => apply_diff(DiffKind::Div2, p).unwrap(),
                }
                .padded(k.saturating_sub(1));
                let sp = space as &Space2D;
                let pc = p.clone();
                let pair = Box::new(move |q: &Poly| {
                    let dq = match sp.family {
                        Family::Edge => apply_diff(DiffKind::Grad2, q).unwrap(),
                        Family::Face => apply_diff(DiffKind::Curl2, q).unwrap(),
                    };
                    let mut acc = 0.0;
                    for e in 0..sp.geom.edges.len() {
                        let dir = match sp.family {
                            Family::Edge => sp.geom.edges[e].tangent,
                            Family::Face => sp.geom.edges[e].normal,
                        };
                        let rule = sp.geom.edge_rule(e, pc.degree + 2 * k + 2);
                        for (pt, w) in rule.points.iter().zip(rule.weights.iter()) {
                            let v = pc.eval(pt);
                            let g = dq.eval(pt);
                            acc += w * (v[0] * dir[0] + v[1] * dir[1]) * (g[0] * dir[0] + g[1] * dir[1]);
                        }
                    }
                    acc
                }) as Box<dyn Fn(&Poly) -> f64>;
                let mut xv = Vec::new();
                if space.beta >= 0 {
                    for alpha in mono::indices(space.beta as usize, 2) {
                        let m_alpha = monomial(space.geom.frame, alpha);
                        let test = match space.family {
                            Family::Edge => m_alpha.x_times(),
                            Family::Face => m_alpha.xperp_times(),
                        };
                        xv.push(space.geom.moments.inner(p, &test));
                    }
                }
                (circ, diff, pair, xv)
            }
        };

    let mut norm = gamma_tilde * circulation.abs();

    // γ · sup over zero-mean P_{k−1}: h (rot s, p⁰) / ‖p⁰‖.
    if k > 1 {
        let basis: Vec<Poly> = mono::indices(k - 1, 2)
            .into_iter()
            .filter(|a| mono::total_degree(*a) >= 1)
            .map(|a| zero_mean_monomial(&space.geom, a))
            .collect();
        let nb = basis.len();
        let g = DMatrix::from_fn(nb, nb, |i, j| space.geom.moments.inner(&basis[i], &basis[j]));
        let b = DVector::from_fn(nb, |i, _| space.geom.moments.inner(&diff, &basis[i]));
        norm += params.gamma * h * linalg::rayleigh_sup(&g, &b);
    }

    // γ̂ · sup over P_{k+1}: h^{1/2} (s·t, ∇p·t)_∂F / ‖∇p·t‖_∂F.
    {
        let alphas: Vec<[u8; 3]> = mono::indices(k + 1, 2)
            .into_iter()
            .filter(|a| mono::total_degree(*a) >= 1)
            .collect();
        let nb = alphas.len();
        let mut b = DVector::zeros(nb);
        let mut dtraces: Vec<Vec<Poly>> = Vec::with_capacity(nb); // ∇p·dir per edge as 1D values
        let mut gp = Vec::with_capacity(nb);
        for a in &alphas {
            let q = monomial(space.geom.frame, *a);
            b[gp.len()] = trace_pair(&q);
            gp.push(q);
        }
        let mut g = DMatrix::zeros(nb, nb);
        for e in 0..space.geom.edges.len() {
            let dir = match space.family {
                Family::Edge => space.geom.edges[e].tangent,
                Family::Face => space.geom.edges[e].normal,
            };
            let rule = space.geom.edge_rule(e, 2 * k + 2);
            let dvals: Vec<Vec<f64>> = gp
                .iter()
                .map(|q| {
                    let dq = match space.family {
                        Family::Edge => apply_diff(DiffKind::Grad2, q).unwrap(),
                        Family::Face => apply_diff(DiffKind::Curl2, q).unwrap(),
                    };
                    rule.points
                        .iter()
                        .map(|pt| {
                            let gv = dq.eval(pt);
                            gv[0] * dir[0] + gv[1] * dir[1]
                        })
                        .collect()
                })
                .collect();
            for i in 0..nb {
                for j in i..nb {
                    let mut acc = 0.0;
                    for (q, w) in rule.weights.iter().enumerate() {
                        acc += w * dvals[i][q] * dvals[j][q];
                    }
                    g[(i, j)] += acc;
                    g[(j, i)] = g[(i, j)];
                }
            }
        }
        dtraces.clear();
        norm += params.gamma_hat * h.sqrt() * linalg::rayleigh_sup(&g, &b);
    }

    // sup over P_{β_F}: h⁻¹ (s, x p) / ‖p‖ — omitted when β_F < 0.
    if space.beta >= 0 {
        let g = space.geom.moments.gram(space.beta as usize);
        let b = DVector::from_vec(xmom);
        norm += linalg::rayleigh_sup(&g, &b) / h;
    }

    Ok(norm)
}
