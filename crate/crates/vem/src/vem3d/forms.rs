//! 3D stabilizations and discrete L² forms on the DoF basis.

use nalgebra::{DMatrix, DVector};

use crate::poly::{mono, Poly};
use crate::vem2d;

use super::{build_space3d_from_geom, DofVector3, Family3, Field3, Space3D, Variant3, Vem3dError};

/// Stabilization on the DoF basis.
///
/// Face family: `S(v,w) = h_E Σ_F (v·n_F, w·n_F)_F + h_E² (div v, div w)_E
/// + (Π⁰_{k+1} v, Π⁰_{k+1} w)_E`.
///
/// Edge family: `S(v,w) = Σ_F (h_F² (v·t_∂F, w·t_∂F)_∂F
/// + h_F (Π_F v^F, Π_F w^F)_F) + h_E² S_f(curl v, curl w)
/// + (Π⁰_k v, Π⁰_k w)_E` where `Π_F` is `Π⁰_{k+1,F}` for the standard
/// variant and the serendipity projection for the serendipity variant, and
/// the curl block is evaluated through the curl map into the face space.
///
/// The boundary and curl blocks alone cannot see the volume x-moments
/// (fields `∇φ` with `φ ∈ H¹₀(E)` carry zero traces and zero curl), so a
/// volume projection block completes the matrix to positive definite. It
/// vanishes identically on the kernel of `Π⁰_k`, where the discrete L² form
/// applies the stabilization, so [`discrete_mass3d`] is unaffected by it.
pub fn stabilization3d(space: &Space3D) -> Result<DMatrix<f64>, Vem3dError> {
    let n = space.dim();
    let h = space.cell.frame.diameter;
    match space.family {
        Family3::Face => {
            let mut traces = Vec::with_capacity(n);
            let mut divs = Vec::with_capacity(n);
            let mut projs = Vec::with_capacity(n);
            for i in 0..n {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                traces.push(
                    (0..space.cell.faces.len())
                        .map(|f| space.normal_trace(f, &e))
                        .collect::<Vec<_>>(),
                );
                divs.push(space.div_poly(&e)?);
                projs.push(space.l2_projection(&e, space.k + 1)?);
            }
            let mut s = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let mut val = 0.0;
                    for (f, fv) in space.cell.faces.iter().enumerate() {
                        val += h * fv.geom.moments.inner(&traces[i][f], &traces[j][f]);
                    }
                    val += h * h * space.cell.moments.inner(&divs[i], &divs[j]);
                    val += space.cell.moments.inner(&projs[i], &projs[j]);
                    s[(i, j)] = val;
                    s[(j, i)] = val;
                }
            }
            Ok(s)
        }
        Family3::Edge => {
            let face_space =
                build_space3d_from_geom(space.cell.clone(), space.k, Family3::Face, Variant3::Standard)?;
            let s_face = stabilization3d(&face_space)?;
            let k = space.k;
            // Per-basis data.
            let mut face_traces: Vec<Vec<Vec<vem2d::EdgePoly>>> = Vec::with_capacity(n);
            let mut face_projs: Vec<Vec<Poly>> = Vec::with_capacity(n);
            let mut curls: Vec<DofVector3> = Vec::with_capacity(n);
            let mut vol_projs: Vec<Poly> = Vec::with_capacity(n);
            for i in 0..n {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                let mut tr = Vec::new();
                let mut pr = Vec::new();
                for (f, fs) in space.face_spaces.iter().enumerate() {
                    let fd = space.face_dofs(f, &e);
                    tr.push(fs.boundary_trace(&fd));
                    let proj = match space.variant {
                        Variant3::Standard => fs.l2_projection(&fd, k + 1)?,
                        Variant3::Serendipity => fs.serendipity_project_dofs(&fd)?.poly,
                    };
                    pr.push(proj);
                }
                face_traces.push(tr);
                face_projs.push(pr);
                curls.push(space.curl_to_face_dofs(&face_space, &e)?);
                vol_projs.push(space.l2_projection(&e, k)?);
            }
            let mut s = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let mut val = 0.0;
                    for (f, fs) in space.face_spaces.iter().enumerate() {
                        let hf = fs.geom.frame.diameter;
                        // h_F² Σ_e (v·t_e, w·t_e)_e
                        for (e, eg) in fs.geom.edges.iter().enumerate() {
                            let g = vem2d::edge_gram(eg.len, k);
                            let a = DVector::from_vec(face_traces[i][f][e].coeffs.clone());
                            let b = DVector::from_vec(face_traces[j][f][e].coeffs.clone());
                            val += hf * hf * (a.transpose() * &g * b)[(0, 0)];
                        }
                        val += hf * fs.geom.moments.inner(&face_projs[i][f], &face_projs[j][f]);
                    }
                    val += h * h * (curls[i].transpose() * &s_face * &curls[j])[(0, 0)];
                    val += space.cell.moments.inner(&vol_projs[i], &vol_projs[j]);
                    s[(i, j)] = val;
                    s[(j, i)] = val;
                }
            }
            Ok(s)
        }
    }
}

/// Discrete L² form `[v,w] = (Π⁰ v, Π⁰ w)_E + S((I−Π⁰)v, (I−Π⁰)w)` with
/// `Π⁰ = Π⁰_{k−1}` (face family) or `Π⁰_k` (edge family); exact on
/// polynomial pairs up to the projector order.
pub fn discrete_mass3d(space: &Space3D) -> Result<DMatrix<f64>, Vem3dError> {
    let n = space.dim();
    let deg = match space.family {
        Family3::Face => space.k - 1,
        Family3::Edge => space.k,
    };
    let np = mono::space_dim(deg as i64, 3);
    let mut p = DMatrix::zeros(3 * np, n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let proj = space.l2_projection(&e, deg)?;
        for (r, &c) in proj.coeffs.iter().enumerate() {
            p[(r, i)] = c;
        }
    }
    let mut em = DMatrix::zeros(n, 3 * np);
    for comp in 0..3 {
        for i in 0..np {
            let mut w = Poly::zeros(space.cell.frame, 3, deg);
            w.coeffs[comp * np + i] = 1.0;
            let d = space.eval_dofs(&Field3::Polynomial(&w), 2 * space.k + 4);
            for r in 0..n {
                em[(r, comp * np + i)] = d[r];
            }
        }
    }
    let gram = space.cell.moments.gram(deg);
    let mut g3 = DMatrix::zeros(3 * np, 3 * np);
    for comp in 0..3 {
        g3.view_mut((comp * np, comp * np), (np, np)).copy_from(&gram);
    }
    let s = stabilization3d(space)?;
    let d = DMatrix::identity(n, n) - &em * &p;
    let m = p.transpose() * g3 * &p + d.transpose() * s * &d;
    Ok((&m + m.transpose()) * 0.5)
}
