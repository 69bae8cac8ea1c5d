//! Scaled polynomial bases on polytopal cells, differential operators, and
//! the constructive decompositions of polynomial vector fields.
//!
//! A [`Poly`] stores coefficients over the scaled monomials
//! `m_α(x) = ((x − b_D)/h_D)^α` of a [`CellFrame`]; all operators act exactly
//! on coefficients.

pub mod calculus;
pub mod mono;

use thiserror::Error;

pub use calculus::{
    apply_diff, decompose_vector, l2_project_field, poly_lift, poly_potential, recompose,
    DecompKind, DiffKind, LiftKind, PotentialKind,
};

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("arity/dimension mismatch: {0}")]
    ArityMismatch(String),
    #[error("incompatible field for {op}: relative defect {defect:.3e}")]
    Incompatible { op: &'static str, defect: f64 },
    #[error("singular solve in {0}")]
    SingularSolve(&'static str),
}

/// Geometric frame of a cell: barycenter, diameter and measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellFrame {
    pub dim: usize,
    pub barycenter: [f64; 3],
    pub diameter: f64,
    pub measure: f64,
}

impl CellFrame {
    pub fn new(dim: usize, barycenter: [f64; 3], diameter: f64, measure: f64) -> Self {
        assert!(dim == 2 || dim == 3, "frame dimension must be 2 or 3");
        assert!(diameter > 0.0 && measure > 0.0, "degenerate cell frame");
        CellFrame { dim, barycenter, diameter, measure }
    }

    /// Scaled coordinates `(x − b_D)/h_D`.
    pub fn scaled(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for d in 0..self.dim {
            s[d] = (x[d] - self.barycenter[d]) / self.diameter;
        }
        s
    }
}

/// Polynomial (scalar or vector valued) in the scaled monomial basis of a
/// cell frame. Component `c` occupies coefficients
/// `[c·π_{k,dim}, (c+1)·π_{k,dim})` in graded monomial order.
#[derive(Debug, Clone)]
pub struct Poly {
    pub frame: CellFrame,
    pub arity: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn zeros(frame: CellFrame, arity: usize, degree: usize) -> Self {
        let n = mono::space_dim(degree as i64, frame.dim) * arity;
        Poly { frame, arity, degree, coeffs: vec![0.0; n] }
    }

    pub fn from_coeffs(frame: CellFrame, arity: usize, degree: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), mono::space_dim(degree as i64, frame.dim) * arity);
        Poly { frame, arity, degree, coeffs }
    }

    pub fn constant(frame: CellFrame, values: &[f64]) -> Self {
        let mut p = Poly::zeros(frame, values.len(), 0);
        p.coeffs.copy_from_slice(values);
        p
    }

    /// Number of scalar basis monomials per component.
    pub fn basis_len(&self) -> usize {
        mono::space_dim(self.degree as i64, self.frame.dim)
    }

    pub fn component(&self, c: usize) -> Poly {
        assert!(c < self.arity);
        let n = self.basis_len();
        Poly {
            frame: self.frame,
            arity: 1,
            degree: self.degree,
            coeffs: self.coeffs[c * n..(c + 1) * n].to_vec(),
        }
    }

    pub fn from_components(parts: &[Poly]) -> Poly {
        let degree = parts.iter().map(|p| p.degree).max().unwrap();
        let frame = parts[0].frame;
        let mut out = Poly::zeros(frame, parts.len(), degree);
        let n = out.basis_len();
        for (c, p) in parts.iter().enumerate() {
            assert_eq!(p.arity, 1);
            for (i, &a) in mono::indices(p.degree, frame.dim).iter().enumerate() {
                out.coeffs[c * n + mono::position(a, frame.dim)] = p.coeffs[i];
            }
        }
        out
    }

    /// Same polynomial re-expressed with basis of (equal or larger) degree.
    pub fn padded(&self, degree: usize) -> Poly {
        assert!(degree >= self.degree);
        let mut out = Poly::zeros(self.frame, self.arity, degree);
        let n_out = out.basis_len();
        let n_in = self.basis_len();
        for c in 0..self.arity {
            out.coeffs[c * n_out..c * n_out + n_in]
                .copy_from_slice(&self.coeffs[c * n_in..(c + 1) * n_in]);
        }
        out
    }

    /// Evaluates all components at a point given in physical coordinates.
    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let s = self.frame.scaled(x);
        let idx = mono::indices(self.degree, self.frame.dim);
        let n = idx.len();
        let mut vals = [0.0; 3];
        // Monomial values ((x−b)/h)^α.
        let mut mvals = vec![0.0; n];
        for (i, a) in idx.iter().enumerate() {
            let mut v = 1.0;
            for d in 0..self.frame.dim {
                v *= s[d].powi(a[d] as i32);
            }
            mvals[i] = v;
        }
        for c in 0..self.arity {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.coeffs[c * n + i] * mvals[i];
            }
            vals[c] = acc;
        }
        vals
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.arity, other.arity);
        let deg = self.degree.max(other.degree);
        let mut a = self.padded(deg);
        let b = other.padded(deg);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    /// Exact product of two scalar polynomials.
    pub fn mul_scalar(&self, other: &Poly) -> Poly {
        assert_eq!(self.arity, 1);
        assert_eq!(other.arity, 1);
        assert_eq!(self.frame, other.frame);
        let deg = self.degree + other.degree;
        let dim = self.frame.dim;
        let mut out = Poly::zeros(self.frame, 1, deg);
        let ia = mono::indices(self.degree, dim);
        let ib = mono::indices(other.degree, dim);
        for (i, &a) in ia.iter().enumerate() {
            let ca = self.coeffs[i];
            if ca == 0.0 {
                continue;
            }
            for (j, &b) in ib.iter().enumerate() {
                let cb = other.coeffs[j];
                if cb == 0.0 {
                    continue;
                }
                out.coeffs[mono::position(mono::add(a, b), dim)] += ca * cb;
            }
        }
        out
    }

    /// Physical coordinate monomial `x_D = x − b_D` times a scalar polynomial:
    /// returns the vector field `x_D p` (arity = dim). Exact: `x_{D,i} m_α =
    /// h_D m_{α+e_i}`.
    pub fn x_times(&self) -> Poly {
        assert_eq!(self.arity, 1);
        let dim = self.frame.dim;
        let h = self.frame.diameter;
        let deg = self.degree + 1;
        let mut out = Poly::zeros(self.frame, dim, deg);
        let n = out.basis_len();
        let ia = mono::indices(self.degree, dim);
        for (i, &a) in ia.iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            for d in 0..dim {
                let mut b = a;
                b[d] += 1;
                out.coeffs[d * n + mono::position(b, dim)] += h * c;
            }
        }
        out
    }

    /// `x_D^⊥ p = (−x₂, x₁) p` for a 2D scalar polynomial.
    pub fn xperp_times(&self) -> Poly {
        assert_eq!(self.arity, 1);
        assert_eq!(self.frame.dim, 2);
        let v = self.x_times();
        let c0 = v.component(0);
        let c1 = v.component(1);
        Poly::from_components(&[c1.scale(-1.0), c0])
    }

    /// `x_E ∧ p` for a 3D vector polynomial `p`.
    pub fn x_wedge(&self) -> Poly {
        assert_eq!(self.arity, 3);
        assert_eq!(self.frame.dim, 3);
        // x ∧ p = (x₂p₃ − x₃p₂, x₃p₁ − x₁p₃, x₁p₂ − x₂p₁)
        let xp: Vec<Poly> = (0..3).map(|c| self.component(c).x_times()).collect();
        // xp[c] has components (x₁ p_c, x₂ p_c, x₃ p_c)
        let comp = |i: usize, j: usize| xp[j].component(i).clone();
        Poly::from_components(&[
            comp(1, 2).sub(&comp(2, 1)),
            comp(2, 0).sub(&comp(0, 2)),
            comp(0, 1).sub(&comp(1, 0)),
        ])
    }

    /// Dot product of two vector polynomials, exact.
    pub fn dot(&self, other: &Poly) -> Poly {
        assert_eq!(self.arity, other.arity);
        let mut acc = Poly::zeros(self.frame, 1, 0);
        for c in 0..self.arity {
            acc = acc.add(&self.component(c).mul_scalar(&other.component(c)));
        }
        acc
    }
}

/// Exact integrals of all scaled monomials of a cell up to a degree, from
/// which polynomial Gram matrices and means are assembled without further
/// quadrature error.
#[derive(Debug, Clone)]
pub struct CellMoments {
    pub frame: CellFrame,
    pub max_degree: usize,
    values: Vec<f64>,
}

impl CellMoments {
    /// Computes `∫_D m_α` for all `|α| ≤ max_degree` with a quadrature rule
    /// that must be exact to that degree.
    pub fn from_quadrature(frame: CellFrame, rule: &crate::quadrature::QuadRule, max_degree: usize) -> Self {
        let idx = mono::indices(max_degree, frame.dim);
        let mut values = vec![0.0; idx.len()];
        for (pt, w) in rule.points.iter().zip(rule.weights.iter()) {
            let s = frame.scaled(pt);
            for (i, a) in idx.iter().enumerate() {
                let mut v = 1.0;
                for d in 0..frame.dim {
                    v *= s[d].powi(a[d] as i32);
                }
                values[i] += w * v;
            }
        }
        CellMoments { frame, max_degree, values }
    }

    pub fn integral(&self, alpha: [u8; 3]) -> f64 {
        debug_assert!(mono::total_degree(alpha) <= self.max_degree);
        self.values[mono::position(alpha, self.frame.dim)]
    }

    /// Integral of a polynomial (componentwise for vector arity).
    pub fn integrate(&self, p: &Poly) -> Vec<f64> {
        let idx = mono::indices(p.degree, p.frame.dim);
        let n = idx.len();
        (0..p.arity)
            .map(|c| {
                idx.iter()
                    .enumerate()
                    .map(|(i, &a)| p.coeffs[c * n + i] * self.integral(a))
                    .sum()
            })
            .collect()
    }

    /// Mean of the scaled monomial `m_α` over the cell.
    pub fn mean(&self, alpha: [u8; 3]) -> f64 {
        self.integral(alpha) / self.frame.measure
    }

    /// Gram matrix `(m_α, m_β)_D` of the scalar basis of degree `k`.
    pub fn gram(&self, k: usize) -> nalgebra::DMatrix<f64> {
        let idx = mono::indices(k, self.frame.dim);
        let n = idx.len();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.integral(mono::add(idx[i], idx[j])))
    }

    /// L² inner product of two polynomials (sum over components), exact.
    pub fn inner(&self, p: &Poly, q: &Poly) -> f64 {
        assert_eq!(p.arity, q.arity);
        let mut acc = 0.0;
        for c in 0..p.arity {
            let prod = p.component(c).mul_scalar(&q.component(c));
            acc += self.integrate(&prod)[0];
        }
        acc
    }

    pub fn norm(&self, p: &Poly) -> f64 {
        self.inner(p, p).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_frame() -> CellFrame {
        CellFrame::new(2, [0.5, 0.5, 0.0], 2.0_f64.sqrt(), 1.0)
    }

    #[test]
    fn eval_and_products_are_consistent() {
        let fr = unit_square_frame();
        // p = 1 + 2 m_(0,1) + 3 m_(1,1)
        let mut p = Poly::zeros(fr, 1, 2);
        p.coeffs[mono::position([0, 0, 0], 2)] = 1.0;
        p.coeffs[mono::position([0, 1, 0], 2)] = 2.0;
        p.coeffs[mono::position([1, 1, 0], 2)] = 3.0;
        let x = [0.7, 0.9, 0.0];
        let s = fr.scaled(&x);
        let expect = 1.0 + 2.0 * s[1] + 3.0 * s[0] * s[1];
        assert!((p.eval(&x)[0] - expect).abs() < 1e-14);

        let q = p.mul_scalar(&p);
        assert!((q.eval(&x)[0] - expect * expect).abs() < 1e-13);
    }

    #[test]
    fn x_times_matches_pointwise() {
        let fr = unit_square_frame();
        let mut p = Poly::zeros(fr, 1, 1);
        p.coeffs[mono::position([1, 0, 0], 2)] = 1.5;
        let v = p.x_times();
        let x = [0.8, 0.3, 0.0];
        let pv = p.eval(&x)[0];
        let vv = v.eval(&x);
        assert!((vv[0] - (x[0] - 0.5) * pv).abs() < 1e-14);
        assert!((vv[1] - (x[1] - 0.5) * pv).abs() < 1e-14);
    }

    #[test]
    fn x_wedge_matches_pointwise() {
        let fr = CellFrame::new(3, [0.1, 0.2, 0.3], 1.7, 1.0);
        let mut p = Poly::zeros(fr, 3, 1);
        for (i, c) in p.coeffs.iter_mut().enumerate() {
            *c = (i as f64 * 0.37).sin();
        }
        let w = p.x_wedge();
        let x = [0.6, -0.2, 0.9];
        let xv = [x[0] - 0.1, x[1] - 0.2, x[2] - 0.3];
        let pv = p.eval(&x);
        let expect = [
            xv[1] * pv[2] - xv[2] * pv[1],
            xv[2] * pv[0] - xv[0] * pv[2],
            xv[0] * pv[1] - xv[1] * pv[0],
        ];
        let got = w.eval(&x);
        for d in 0..3 {
            assert!((got[d] - expect[d]).abs() < 1e-13);
        }
    }
}
