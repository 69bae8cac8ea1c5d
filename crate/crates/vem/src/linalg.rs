//! Small dense and sparse linear algebra helpers shared by the space builders.

use nalgebra::{DMatrix, DVector};

/// Result of an SVD-based least squares solve.
pub struct LstsqSolution {
    pub solution: DVector<f64>,
    /// Relative residual `‖A x − b‖ / max(‖b‖, ‖A‖‖x‖)`.
    pub residual: f64,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Thin SVD `A = U Σ Vᵀ` by one-sided Jacobi. Slower than bidiagonalization
/// but fully accurate on the small, sometimes badly scaled systems the space
/// builders produce. Requires `nrows ≥ ncols`.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let n = a.ncols();
    let mut b = a.clone();
    let mut v = DMatrix::identity(n, n);
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut off = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let bp = b.column(p);
                let bq = b.column(q);
                let app = bp.dot(&bp);
                let aqq = bq.dot(&bq);
                let apq = bp.dot(&bq);
                if apq.abs() <= eps * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                off = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..b.nrows() {
                    let xp = b[(r, p)];
                    let xq = b[(r, q)];
                    b[(r, p)] = c * xp - s * xq;
                    b[(r, q)] = s * xp + c * xq;
                }
                for r in 0..n {
                    let xp = v[(r, p)];
                    let xq = v[(r, q)];
                    v[(r, p)] = c * xp - s * xq;
                    v[(r, q)] = s * xp + c * xq;
                }
            }
        }
        if !off {
            break;
        }
    }
    let mut sigma = vec![0.0; n];
    let mut u = DMatrix::zeros(b.nrows(), n);
    for j in 0..n {
        let norm = b.column(j).norm();
        sigma[j] = norm;
        if norm > 0.0 {
            for r in 0..b.nrows() {
                u[(r, j)] = b[(r, j)] / norm;
            }
        }
    }
    (u, sigma, v)
}

/// Minimum-norm least squares via the Jacobi SVD. Singular values below
/// `rel_tol * σ_max` are treated as zero.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> LstsqSolution {
    let transposed = a.nrows() < a.ncols();
    let work = if transposed { a.transpose() } else { a.clone() };
    let (u, sigma, v) = jacobi_svd(&work);
    let smax = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let eps = if smax > 0.0 { rel_tol * smax } else { rel_tol };
    let rank = sigma.iter().filter(|&&s| s > eps).count();
    // For A = U Σ Vᵀ: x = V Σ⁺ Uᵀ b. For Aᵀ = U Σ Vᵀ (A = V Σ Uᵀ):
    // x = U Σ⁺ Vᵀ b.
    let x = if transposed {
        let c = v.transpose() * b;
        let mut y = DVector::zeros(sigma.len());
        for j in 0..sigma.len() {
            if sigma[j] > eps {
                y[j] = c[j] / sigma[j];
            }
        }
        &u * y
    } else {
        let c = u.transpose() * b;
        let mut y = DVector::zeros(sigma.len());
        for j in 0..sigma.len() {
            if sigma[j] > eps {
                y[j] = c[j] / sigma[j];
            }
        }
        &v * y
    };
    let r = a * &x - b;
    let scale = f64::max(b.norm(), a.norm() * x.norm()).max(f64::MIN_POSITIVE);
    let mut sv = sigma;
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    LstsqSolution {
        solution: x,
        residual: r.norm() / scale,
        rank,
        singular_values: sv,
    }
}

/// Solves the symmetric positive definite system `A x = b` by Cholesky,
/// falling back to LU if the factorization fails marginally.
pub fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if let Some(chol) = a.clone().cholesky() {
        chol.solve(b)
    } else {
        a.clone()
            .lu()
            .solve(b)
            .expect("gram system singular")
    }
}

/// Generalized Rayleigh supremum `sup_x (bᵀx) / sqrt(xᵀ G x)` for a symmetric
/// positive semidefinite `G`. Directions in the (numerical) kernel of `G` are
/// ignored; the supremum is finite exactly when `b` is orthogonal to that
/// kernel, which holds for all quantities this crate feeds in.
pub fn rayleigh_sup(g: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(g.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    if lmax <= 0.0 {
        return 0.0;
    }
    let tol = 1e-12 * lmax;
    let c = eig.eigenvectors.transpose() * b;
    let mut s = 0.0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol {
            s += c[i] * c[i] / lam;
        }
    }
    s.sqrt()
}

/// Minimum eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(a: &DMatrix<f64>) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Row-equilibrated minimum/maximum singular values, used for rank reports.
/// Returns `(σ_min, σ_max)` of the matrix whose nonzero rows are scaled to
/// unit norm.
pub fn equilibrated_extreme_singular_values(a: &DMatrix<f64>) -> (f64, f64) {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        let n = m.row(i).norm();
        if n > 0.0 {
            for j in 0..m.ncols() {
                m[(i, j)] /= n;
            }
        }
    }
    let work = if m.nrows() < m.ncols() { m.transpose() } else { m };
    let (_, sv, _) = jacobi_svd(&work);
    let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (smin, smax)
}

/// Compressed sparse row matrix for the reconstruction solver.
#[derive(Clone)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Builds a CSR matrix from triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    data.push(v);
                    last = Some(j);
                }
            }
            indptr.push(indices.len());
        }
        Csr { n, indptr, indices, data }
    }

    pub fn mul_vec(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            out[i] = s;
        }
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                if self.indices[k] == i {
                    d[i] = self.data[k];
                }
            }
        }
        d
    }
}

/// Jacobi-preconditioned conjugate gradients for SPD systems. Used only when
/// the reconstruction mesh is too large for a dense factorization.
pub fn conjugate_gradient(a: &Csr, b: &DVector<f64>, rel_tol: f64, max_iter: usize) -> DVector<f64> {
    let n = a.n;
    let dinv: DVector<f64> = a.diagonal().map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 });
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let bnorm = b.norm().max(f64::MIN_POSITIVE);
    let mut z = dinv.component_mul(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut ap = DVector::zeros(n);
    for _ in 0..max_iter {
        if r.norm() <= rel_tol * bnorm {
            break;
        }
        a.mul_vec(&p, &mut ap);
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
