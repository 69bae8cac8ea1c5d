//! Differential operators, the scalar lifts inverting
//! `q ↦ div_F(x_F q)`, `q ↦ rot_F(x_F^⊥ q)`, `q ↦ div(x_E q)` and
//! `q ↦ curl(x_E ∧ q)`, scalar potentials, and the vector decompositions
//! built from them.
//!
//! On a homogeneous scalar `q` of degree `m` the three scalar lifts are
//! diagonal: `div_F(x_F q) = (2+m) q`, `rot_F(x_F^⊥ q) = (2+m) q`,
//! `div(x_E q) = (3+m) q`, which the unit tests assert coefficient-wise.

use nalgebra::{DMatrix, DVector};

use super::{mono, CellMoments, Poly, PolyError};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffKind {
    Grad2,
    Curl2,
    Rot2,
    Div2,
    Grad3,
    Curl3,
    Div3,
    Lap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Div2,
    Rot2,
    Div3,
    Curl3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Grad2,
    Curl2,
    Grad3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompKind {
    /// 2D: `q = curl_F s ⊕ x_F c` (returns `(s, c)`).
    CurlX2d,
    /// 2D: `q = ∇_F p ⊕ x_F^⊥ c` (returns `(p, c)`).
    GradXperp2d,
    /// 3D: `q = curl(x_E ∧ a) ⊕ x_E b` (returns `(a, b)`).
    CurlX3d,
    /// 3D: `q = ∇ s ⊕ x_E ∧ w` (returns `(s, w)`).
    GradXwedge3d,
}

/// Partial derivative of a scalar polynomial in direction `d`, exact.
fn partial(p: &Poly, d: usize) -> Poly {
    assert_eq!(p.arity, 1);
    let dim = p.frame.dim;
    let h = p.frame.diameter;
    let out_deg = p.degree.saturating_sub(1);
    let mut out = Poly::zeros(p.frame, 1, out_deg);
    for (i, &a) in mono::indices(p.degree, dim).iter().enumerate() {
        if a[d] > 0 {
            let mut b = a;
            b[d] -= 1;
            out.coeffs[mono::position(b, dim)] += p.coeffs[i] * a[d] as f64 / h;
        }
    }
    out
}

/// Applies a differential operator; exact coefficient-level differentiation.
pub fn apply_diff(kind: DiffKind, p: &Poly) -> Result<Poly, PolyError> {
    let dim = p.frame.dim;
    let check = |want_dim: usize, want_arity: usize| -> Result<(), PolyError> {
        if dim != want_dim || p.arity != want_arity {
            Err(PolyError::ArityMismatch(format!(
                "{kind:?} needs dim {want_dim}, arity {want_arity}; got dim {dim}, arity {}",
                p.arity
            )))
        } else {
            Ok(())
        }
    };
    match kind {
        DiffKind::Grad2 => {
            check(2, 1)?;
            Ok(Poly::from_components(&[partial(p, 0), partial(p, 1)]))
        }
        DiffKind::Curl2 => {
            check(2, 1)?;
            Ok(Poly::from_components(&[partial(p, 1), partial(p, 0).scale(-1.0)]))
        }
        DiffKind::Rot2 => {
            check(2, 2)?;
            Ok(partial(&p.component(1), 0).sub(&partial(&p.component(0), 1)))
        }
        DiffKind::Div2 => {
            check(2, 2)?;
            Ok(partial(&p.component(0), 0).add(&partial(&p.component(1), 1)))
        }
        DiffKind::Grad3 => {
            check(3, 1)?;
            Ok(Poly::from_components(&[partial(p, 0), partial(p, 1), partial(p, 2)]))
        }
        DiffKind::Curl3 => {
            check(3, 3)?;
            let c = |i: usize| p.component(i);
            Ok(Poly::from_components(&[
                partial(&c(2), 1).sub(&partial(&c(1), 2)),
                partial(&c(0), 2).sub(&partial(&c(2), 0)),
                partial(&c(1), 0).sub(&partial(&c(0), 1)),
            ]))
        }
        DiffKind::Div3 => {
            check(3, 3)?;
            Ok(partial(&p.component(0), 0)
                .add(&partial(&p.component(1), 1))
                .add(&partial(&p.component(2), 2)))
        }
        DiffKind::Lap => {
            let parts: Vec<Poly> = (0..p.arity)
                .map(|c| {
                    let pc = p.component(c);
                    let mut acc = Poly::zeros(p.frame, 1, pc.degree.saturating_sub(2));
                    for d in 0..dim {
                        acc = acc.add(&partial(&partial(&pc, d), d));
                    }
                    acc
                })
                .collect();
            Ok(Poly::from_components(&parts))
        }
    }
}

fn coeff_norm(p: &Poly) -> f64 {
    p.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Diagonal lift shared by the three scalar isomorphisms.
fn diagonal_lift(target: &Poly, offset: f64) -> Poly {
    let mut q = target.clone();
    for (i, &a) in mono::indices(target.degree, target.frame.dim).iter().enumerate() {
        q.coeffs[i] = target.coeffs[i] / (offset + mono::total_degree(a) as f64);
    }
    q
}

/// Inverts the polynomial isomorphisms: returns `q` with
/// `div_F(x_F q) = target`, `rot_F(x_F^⊥ q) = target`, `div(x_E q) = target`
/// or `curl(x_E ∧ q) = target` respectively.
pub fn poly_lift(kind: LiftKind, target: &Poly) -> Result<Poly, PolyError> {
    match kind {
        LiftKind::Div2 | LiftKind::Rot2 => {
            if target.arity != 1 || target.frame.dim != 2 {
                return Err(PolyError::ArityMismatch("scalar 2D target required".into()));
            }
            Ok(diagonal_lift(target, 2.0))
        }
        LiftKind::Div3 => {
            if target.arity != 1 || target.frame.dim != 3 {
                return Err(PolyError::ArityMismatch("scalar 3D target required".into()));
            }
            Ok(diagonal_lift(target, 3.0))
        }
        LiftKind::Curl3 => {
            if target.arity != 3 || target.frame.dim != 3 {
                return Err(PolyError::ArityMismatch("vector 3D target required".into()));
            }
            let div = apply_diff(DiffKind::Div3, target)?;
            let scale = coeff_norm(target).max(1e-300);
            let defect = coeff_norm(&div) * target.frame.diameter / scale;
            if defect > 1e-10 {
                return Err(PolyError::Incompatible { op: "curl3 lift", defect });
            }
            let k = target.degree;
            let dim = 3;
            let n = mono::space_dim(k as i64, dim);
            let cols = 3 * n;
            let mut a_mat = DMatrix::zeros(cols, cols);
            for c in 0..3 {
                for i in 0..n {
                    let mut basis = Poly::zeros(target.frame, 3, k);
                    basis.coeffs[c * n + i] = 1.0;
                    let image = apply_diff(DiffKind::Curl3, &basis.x_wedge())?;
                    debug_assert!(image.degree <= k);
                    let image = image.padded(k);
                    for (r, &v) in image.coeffs.iter().enumerate() {
                        a_mat[(r, c * n + i)] = v;
                    }
                }
            }
            let b = DVector::from_vec(target.coeffs.clone());
            let sol = linalg::lstsq(&a_mat, &b, 1e-13);
            if sol.residual > 1e-10 {
                return Err(PolyError::Incompatible { op: "curl3 lift", defect: sol.residual });
            }
            Ok(Poly::from_coeffs(target.frame, 3, k, sol.solution.iter().copied().collect()))
        }
    }
}

/// Scalar potential with zero cell mean: returns `s` with
/// `grad/curl(s) = field`.
pub fn poly_potential(kind: PotentialKind, field: &Poly, moments: &CellMoments) -> Result<Poly, PolyError> {
    let (diff, want_dim, compat, compat_op): (DiffKind, usize, Option<DiffKind>, &'static str) = match kind {
        PotentialKind::Grad2 => (DiffKind::Grad2, 2, Some(DiffKind::Rot2), "grad2 potential"),
        PotentialKind::Curl2 => (DiffKind::Curl2, 2, Some(DiffKind::Div2), "curl2 potential"),
        PotentialKind::Grad3 => (DiffKind::Grad3, 3, Some(DiffKind::Curl3), "grad3 potential"),
    };
    if field.frame.dim != want_dim || field.arity != want_dim {
        return Err(PolyError::ArityMismatch(format!("{kind:?} needs a dim-{want_dim} vector field")));
    }
    if let Some(c) = compat {
        let defect_poly = apply_diff(c, field)?;
        let scale = coeff_norm(field).max(1e-300);
        let defect = coeff_norm(&defect_poly) * field.frame.diameter / scale;
        if defect > 1e-10 {
            return Err(PolyError::Incompatible { op: compat_op, defect });
        }
    }
    let dim = field.frame.dim;
    let m = field.degree;
    let n_s = mono::space_dim(m as i64 + 1, dim);
    let n_f = mono::space_dim(m as i64, dim) * dim;
    let mut a_mat = DMatrix::zeros(n_f, n_s);
    for i in 0..n_s {
        let mut basis = Poly::zeros(field.frame, 1, m + 1);
        basis.coeffs[i] = 1.0;
        let image = apply_diff(diff, &basis)?.padded(m);
        for (r, &v) in image.coeffs.iter().enumerate() {
            a_mat[(r, i)] = v;
        }
    }
    let b = DVector::from_vec(field.coeffs.clone());
    let sol = linalg::lstsq(&a_mat, &b, 1e-13);
    if sol.residual > 1e-10 {
        return Err(PolyError::Incompatible { op: compat_op, defect: sol.residual });
    }
    let mut s = Poly::from_coeffs(field.frame, 1, m + 1, sol.solution.iter().copied().collect());
    let mean = moments.integrate(&s)[0] / field.frame.measure;
    s.coeffs[0] -= mean;
    Ok(s)
}

/// Splits a vector polynomial along one of the four direct sums; the returned
/// pair reassembles to `q` exactly (see the module tests).
pub fn decompose_vector(
    kind: DecompKind,
    q: &Poly,
    moments: &CellMoments,
) -> Result<(Poly, Poly), PolyError> {
    match kind {
        DecompKind::CurlX2d => {
            let c = poly_lift(LiftKind::Div2, &apply_diff(DiffKind::Div2, q)?)?;
            let s = poly_potential(PotentialKind::Curl2, &q.sub(&c.x_times()), moments)?;
            Ok((s, c))
        }
        DecompKind::GradXperp2d => {
            let c = poly_lift(LiftKind::Rot2, &apply_diff(DiffKind::Rot2, q)?)?;
            let p = poly_potential(PotentialKind::Grad2, &q.sub(&c.xperp_times()), moments)?;
            Ok((p, c))
        }
        DecompKind::CurlX3d => {
            let b = poly_lift(LiftKind::Div3, &apply_diff(DiffKind::Div3, q)?)?;
            let a = poly_lift(LiftKind::Curl3, &q.sub(&b.x_times()))?;
            Ok((a, b))
        }
        DecompKind::GradXwedge3d => {
            let curl = apply_diff(DiffKind::Curl3, q)?;
            let w = poly_lift(LiftKind::Curl3, &curl)?;
            let s = poly_potential(PotentialKind::Grad3, &q.sub(&w.x_wedge()), moments)?;
            Ok((s, w))
        }
    }
}

/// Reassembles the decomposition for verification.
pub fn recompose(kind: DecompKind, parts: &(Poly, Poly)) -> Poly {
    match kind {
        DecompKind::CurlX2d => apply_diff(DiffKind::Curl2, &parts.0).unwrap().add(&parts.1.x_times()),
        DecompKind::GradXperp2d => apply_diff(DiffKind::Grad2, &parts.0).unwrap().add(&parts.1.xperp_times()),
        DecompKind::CurlX3d => apply_diff(DiffKind::Curl3, &parts.0.x_wedge()).unwrap().add(&parts.1.x_times()),
        DecompKind::GradXwedge3d => apply_diff(DiffKind::Grad3, &parts.0).unwrap().add(&parts.1.x_wedge()),
    }
}

/// Gram-matrix L² projection of a pointwise-evaluable field onto `(P_k)^arity`.
/// The rule must be exact to degree `2k` plus whatever resolves `f`.
pub fn l2_project_field<F>(
    f: F,
    arity: usize,
    k: usize,
    frame: super::CellFrame,
    rule: &crate::quadrature::QuadRule,
) -> Poly
where
    F: Fn(&[f64; 3]) -> [f64; 3],
{
    let idx = mono::indices(k, frame.dim);
    let n = idx.len();
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DMatrix::zeros(n, arity);
    for (pt, w) in rule.points.iter().zip(rule.weights.iter()) {
        let s = frame.scaled(pt);
        let mvals: Vec<f64> = idx
            .iter()
            .map(|a| (0..frame.dim).map(|d| s[d].powi(a[d] as i32)).product())
            .collect();
        let fv = f(pt);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += w * mvals[i] * mvals[j];
            }
            for c in 0..arity {
                rhs[(i, c)] += w * mvals[i] * fv[c];
            }
        }
    }
    let chol = gram.cholesky().expect("projection gram singular");
    let mut out = Poly::zeros(frame, arity, k);
    for c in 0..arity {
        let col = chol.solve(&DVector::from_column_slice(rhs.column(c).as_slice()));
        out.coeffs[c * n..(c + 1) * n].copy_from_slice(col.as_slice());
    }
    out
}
