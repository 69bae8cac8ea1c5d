//! Analytic vector fields with exact derivatives, used to drive the
//! interpolation experiments. Degrees of freedom only ever need pointwise
//! values (derivative moments are taken by parts); the exact `rot`/`div`/
//! `curl` closures feed the error metrics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::poly::{apply_diff, CellFrame, DiffKind, Poly};

type Scalar2 = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type Vector2 = Box<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
type Scalar3 = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
type Vector3 = Box<dyn Fn(f64, f64, f64) -> [f64; 3] + Send + Sync>;

/// 2D vector field with exact rot and div.
pub struct AnalyticField2 {
    pub eval: Vector2,
    pub rot: Scalar2,
    pub div: Scalar2,
}

impl AnalyticField2 {
    pub fn value(&self, x: &[f64; 3]) -> [f64; 2] {
        (self.eval)(x[0], x[1])
    }

    /// The π/2-rotated field `R v = (−v₂, v₁)`; `rot(Rv) = div v` and
    /// `div(Rv) = −rot v`.
    pub fn rotated(self) -> AnalyticField2 {
        let eval = self.eval;
        let rot = self.rot;
        let div = self.div;
        AnalyticField2 {
            eval: Box::new(move |x, y| {
                let v = eval(x, y);
                [-v[1], v[0]]
            }),
            rot: Box::new(move |x, y| div(x, y)),
            div: Box::new(move |x, y| -rot(x, y)),
        }
    }
}

/// 3D vector field with exact curl and div.
pub struct AnalyticField3 {
    pub eval: Vector3,
    pub curl: Vector3,
    pub div: Scalar3,
}

impl AnalyticField3 {
    pub fn value(&self, x: &[f64; 3]) -> [f64; 3] {
        (self.eval)(x[0], x[1], x[2])
    }

    pub fn curl_value(&self, x: &[f64; 3]) -> [f64; 3] {
        (self.curl)(x[0], x[1], x[2])
    }
}

fn unit_frame2() -> CellFrame {
    CellFrame::new(2, [0.5, 0.5, 0.0], 1.0, 1.0)
}

fn unit_frame3() -> CellFrame {
    CellFrame::new(3, [0.5, 0.5, 0.5], 1.0, 1.0)
}

/// Wraps a 2D polynomial field (arity 2) with its exact derivatives.
pub fn from_poly2(p: Poly) -> AnalyticField2 {
    assert_eq!(p.arity, 2);
    let rot = apply_diff(DiffKind::Rot2, &p).unwrap();
    let div = apply_diff(DiffKind::Div2, &p).unwrap();
    let pe = p;
    AnalyticField2 {
        eval: Box::new(move |x, y| {
            let v = pe.eval(&[x, y, 0.0]);
            [v[0], v[1]]
        }),
        rot: Box::new(move |x, y| rot.eval(&[x, y, 0.0])[0]),
        div: Box::new(move |x, y| div.eval(&[x, y, 0.0])[0]),
    }
}

/// Wraps a 3D polynomial field (arity 3) with its exact derivatives.
pub fn from_poly3(p: Poly) -> AnalyticField3 {
    assert_eq!(p.arity, 3);
    let curl = apply_diff(DiffKind::Curl3, &p).unwrap();
    let div = apply_diff(DiffKind::Div3, &p).unwrap();
    let pe = p;
    AnalyticField3 {
        eval: Box::new(move |x, y, z| pe.eval(&[x, y, z])),
        curl: Box::new(move |x, y, z| curl.eval(&[x, y, z])),
        div: Box::new(move |x, y, z| div.eval(&[x, y, z])[0]),
    }
}

/// Random polynomial field of exact degree ≤ `degree` on the unit-square
/// frame; coefficients are O(1).
pub fn random_poly2(degree: usize, seed: u64) -> Poly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut p = Poly::zeros(unit_frame2(), 2, degree);
    for c in p.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    p
}

pub fn random_poly3(degree: usize, seed: u64) -> Poly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c6e_f372);
    let mut p = Poly::zeros(unit_frame3(), 3, degree);
    for c in p.coeffs.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    p
}

/// Fixed smooth trigonometric field with O(1) derivatives and nonzero
/// rot and div.
pub fn trig2() -> AnalyticField2 {
    AnalyticField2 {
        eval: Box::new(|x, y| [(x + 0.3 * y).sin() + 0.2 * y, (1.3 * y).cos() + 0.5 * x * x]),
        rot: Box::new(|x, y| x - 0.3 * (x + 0.3 * y).cos() - 0.2),
        div: Box::new(|x, y| (x + 0.3 * y).cos() - 1.3 * (1.3 * y).sin()),
    }
}

/// Fixed smooth trigonometric 3D field with nonzero curl and div.
pub fn trig3() -> AnalyticField3 {
    AnalyticField3 {
        eval: Box::new(|x, y, z| {
            [
                (x + 0.4 * z).sin() + 0.3 * y,
                (1.2 * y).cos() + 0.2 * x * z,
                (0.8 * z + 0.5 * x).sin() + 0.1 * y * y,
            ]
        }),
        curl: Box::new(|x, y, z| {
            // curl = (∂y v3 − ∂z v2, ∂z v1 − ∂x v3, ∂x v2 − ∂y v1)
            [
                0.2 * y - 0.2 * x,
                0.4 * (x + 0.4 * z).cos() - 0.5 * (0.8 * z + 0.5 * x).cos(),
                0.2 * z - 0.3,
            ]
        }),
        div: Box::new(|x, y, z| (x + 0.4 * z).cos() - 1.2 * (1.2 * y).sin() + 0.8 * (0.8 * z + 0.5 * x).cos()),
    }
}

/// Random smooth 2D field: a short sum of plane-wave sines with seeded
/// frequencies and phases, plus a linear part. Derivatives are exact.
pub fn random_smooth2(seed: u64) -> AnalyticField2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0bad_cafe);
    let n = 3;
    // component c: Σ_m a·sin(kx·x + ky·y + φ)
    let mut terms: Vec<[f64; 8]> = Vec::new();
    for _ in 0..n {
        let a1 = rng.gen_range(-1.0..1.0);
        let kx1 = rng.gen_range(-2.0..2.0);
        let ky1 = rng.gen_range(-2.0..2.0);
        let p1 = rng.gen_range(0.0..std::f64::consts::TAU);
        let a2 = rng.gen_range(-1.0..1.0);
        let kx2 = rng.gen_range(-2.0..2.0);
        let ky2 = rng.gen_range(-2.0..2.0);
        let p2 = rng.gen_range(0.0..std::f64::consts::TAU);
        terms.push([a1, kx1, ky1, p1, a2, kx2, ky2, p2]);
    }
    let t1 = terms.clone();
    let t2 = terms.clone();
    let t3 = terms;
    AnalyticField2 {
        eval: Box::new(move |x, y| {
            let mut v = [0.0, 0.0];
            for t in &t1 {
                v[0] += t[0] * (t[1] * x + t[2] * y + t[3]).sin();
                v[1] += t[4] * (t[5] * x + t[6] * y + t[7]).sin();
            }
            v
        }),
        rot: Box::new(move |x, y| {
            let mut r = 0.0;
            for t in &t2 {
                r += t[4] * t[5] * (t[5] * x + t[6] * y + t[7]).cos();
                r -= t[0] * t[2] * (t[1] * x + t[2] * y + t[3]).cos();
            }
            r
        }),
        div: Box::new(move |x, y| {
            let mut d = 0.0;
            for t in &t3 {
                d += t[0] * t[1] * (t[1] * x + t[2] * y + t[3]).cos();
                d += t[4] * t[6] * (t[5] * x + t[6] * y + t[7]).cos();
            }
            d
        }),
    }
}

/// Random smooth 3D field built the same way.
pub fn random_smooth3(seed: u64) -> AnalyticField3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdead_beef);
    let n = 2;
    // component c: Σ_m a·sin(k·x + φ)
    let mut terms: Vec<[[f64; 5]; 3]> = Vec::new();
    for _ in 0..n {
        let mut t = [[0.0; 5]; 3];
        for comp in t.iter_mut() {
            comp[0] = rng.gen_range(-1.0..1.0);
            comp[1] = rng.gen_range(-1.5..1.5);
            comp[2] = rng.gen_range(-1.5..1.5);
            comp[3] = rng.gen_range(-1.5..1.5);
            comp[4] = rng.gen_range(0.0..std::f64::consts::TAU);
        }
        terms.push(t);
    }
    let value = move |terms: &Vec<[[f64; 5]; 3]>, x: f64, y: f64, z: f64| -> [f64; 3] {
        let mut v = [0.0; 3];
        for t in terms {
            for c in 0..3 {
                v[c] += t[c][0] * (t[c][1] * x + t[c][2] * y + t[c][3] * z + t[c][4]).sin();
            }
        }
        v
    };
    let grad_c = |t: &[f64; 5], x: f64, y: f64, z: f64| -> [f64; 3] {
        let c = (t[1] * x + t[2] * y + t[3] * z + t[4]).cos() * t[0];
        [c * t[1], c * t[2], c * t[3]]
    };
    let t1 = terms.clone();
    let t2 = terms.clone();
    let t3 = terms;
    AnalyticField3 {
        eval: Box::new(move |x, y, z| value(&t1, x, y, z)),
        curl: Box::new(move |x, y, z| {
            let mut c = [0.0; 3];
            for t in &t2 {
                let g0 = grad_c(&t[0], x, y, z);
                let g1 = grad_c(&t[1], x, y, z);
                let g2 = grad_c(&t[2], x, y, z);
                c[0] += g2[1] - g1[2];
                c[1] += g0[2] - g2[0];
                c[2] += g1[0] - g0[1];
            }
            c
        }),
        div: Box::new(move |x, y, z| {
            let mut d = 0.0;
            for t in &t3 {
                d += grad_c(&t[0], x, y, z)[0];
                d += grad_c(&t[1], x, y, z)[1];
                d += grad_c(&t[2], x, y, z)[2];
            }
            d
        }),
    }
}

/// Reduced-regularity field `|x − x₀|^α · (smooth)`; lies in `H^{α+1−ε}`
/// around `x₀` and limits the observed interpolation rates accordingly.
pub fn singular2(alpha: f64, x0: [f64; 2]) -> AnalyticField2 {
    let g = move |x: f64, y: f64| -> [f64; 2] { [1.0 + 0.2 * (x + y), 0.5 - 0.1 * x] };
    let eval = move |x: f64, y: f64| -> [f64; 2] {
        let dx = x - x0[0];
        let dy = y - x0[1];
        let r = (dx * dx + dy * dy).sqrt();
        let s = r.powf(alpha);
        let gv = g(x, y);
        [s * gv[0], s * gv[1]]
    };
    // rot(r^α g) = α r^(α−2) (dx·g₂ − dy·g₁) + r^α rot g, rot g = −0.1 − 0.2
    let rot = move |x: f64, y: f64| -> f64 {
        let dx = x - x0[0];
        let dy = y - x0[1];
        let r2 = (dx * dx + dy * dy).max(1e-300);
        let gv = g(x, y);
        alpha * r2.powf(alpha / 2.0 - 1.0) * (dx * gv[1] - dy * gv[0]) + r2.powf(alpha / 2.0) * (-0.1 - 0.2)
    };
    let div = move |x: f64, y: f64| -> f64 {
        let dx = x - x0[0];
        let dy = y - x0[1];
        let r2 = (dx * dx + dy * dy).max(1e-300);
        let gv = g(x, y);
        // div(r^α g) = α r^(α−2) (dx g₁ + dy g₂) + r^α div g, div g = 0.2
        alpha * r2.powf(alpha / 2.0 - 1.0) * (dx * gv[0] + dy * gv[1]) + r2.powf(alpha / 2.0) * 0.2
    };
    AnalyticField2 {
        eval: Box::new(eval),
        rot: Box::new(rot),
        div: Box::new(div),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_rot2(f: &AnalyticField2, x: f64, y: f64) -> f64 {
        let h = 1e-6;
        let d2 = ((f.eval)(x + h, y)[1] - (f.eval)(x - h, y)[1]) / (2.0 * h);
        let d1 = ((f.eval)(x, y + h)[0] - (f.eval)(x, y - h)[0]) / (2.0 * h);
        d2 - d1
    }

    #[test]
    fn random_smooth2_derivatives_match_finite_differences() {
        for seed in 0..5 {
            let f = random_smooth2(seed);
            for (x, y) in [(0.2, 0.7), (0.9, 0.1), (0.5, 0.5)] {
                assert!((fd_rot2(&f, x, y) - (f.rot)(x, y)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn random_smooth3_curl_matches_finite_differences() {
        let f = random_smooth3(3);
        let h = 1e-6;
        let (x, y, z) = (0.3, 0.6, 0.2);
        let dv = |d: usize, c: usize| -> f64 {
            let mut p = [x, y, z];
            let mut m = [x, y, z];
            p[d] += h;
            m[d] -= h;
            ((f.eval)(p[0], p[1], p[2])[c] - (f.eval)(m[0], m[1], m[2])[c]) / (2.0 * h)
        };
        let fd = [dv(1, 2) - dv(2, 1), dv(2, 0) - dv(0, 2), dv(0, 1) - dv(1, 0)];
        let c = (f.curl)(x, y, z);
        for d in 0..3 {
            assert!((fd[d] - c[d]).abs() < 1e-6);
        }
    }

    #[test]
    fn poly_field_wrapping_is_exact() {
        let p = random_poly2(3, 1);
        let f = from_poly2(p.clone());
        let rot = apply_diff(DiffKind::Rot2, &p).unwrap();
        assert!(((f.rot)(0.3, 0.8) - rot.eval(&[0.3, 0.8, 0.0])[0]).abs() < 1e-14);
    }

    #[test]
    fn rotated_field_swaps_rot_and_div() {
        let f = random_smooth2(11);
        let (rv, dv) = ((f.rot)(0.4, 0.2), (f.div)(0.4, 0.2));
        let r = f.rotated();
        assert!(((r.rot)(0.4, 0.2) - dv).abs() < 1e-14);
        assert!(((r.div)(0.4, 0.2) + rv).abs() < 1e-14);
    }
}
