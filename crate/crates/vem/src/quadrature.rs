//! Gauss rules on reference segment/triangle/tetrahedron and composite rules
//! on polytopal entities via simplicial sub-tessellation.
//!
//! Triangle and tetrahedron rules are collapsed (Duffy) tensor products of
//! Gauss–Legendre rules; all weights are positive and the rules are exact to
//! the requested total degree.

use thiserror::Error;

use crate::mesh::{EntityRef, Mesh, MeshError};

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadrature degree {0} outside supported range 0..=20")]
    DegreeOutOfRange(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Segment,
    Triangle,
    Tetrahedron,
    Composite,
}

/// Quadrature points (physical coordinates) and weights (measure units).
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub kind: DomainKind,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut(&[f64; 3]) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(self.weights.iter())
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Gauss–Legendre nodes/weights on [0, 1], exact to degree `2n − 1`.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Newton iteration on P_n over [-1, 1].
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        xs[i] = 0.5 * (1.0 - x); // reversed order is irrelevant
        ws[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Reference rule on the unit segment [0,1], unit triangle
/// {x,y ≥ 0, x+y ≤ 1}, or unit tetrahedron.
pub fn reference_rule(kind: DomainKind, degree: usize) -> Result<QuadRule, QuadError> {
    if degree > 20 {
        return Err(QuadError::DegreeOutOfRange(degree));
    }
    let rule = match kind {
        DomainKind::Segment => {
            let n = degree / 2 + 1;
            let (xs, ws) = gauss_legendre_01(n);
            QuadRule {
                kind,
                points: xs.iter().map(|&x| [x, 0.0, 0.0]).collect(),
                weights: ws,
                degree,
            }
        }
        DomainKind::Triangle => {
            // Duffy map (u, v) -> (u, v(1-u)); Jacobian (1-u).
            let nu = (degree + 2) / 2 + 1;
            let nv = degree / 2 + 1;
            let (xu, wu) = gauss_legendre_01(nu);
            let (xv, wv) = gauss_legendre_01(nv);
            let mut points = Vec::with_capacity(nu * nv);
            let mut weights = Vec::with_capacity(nu * nv);
            for (u, cu) in xu.iter().zip(wu.iter()) {
                for (v, cv) in xv.iter().zip(wv.iter()) {
                    points.push([*u, v * (1.0 - u), 0.0]);
                    weights.push(cu * cv * (1.0 - u));
                }
            }
            QuadRule { kind, points, weights, degree }
        }
        DomainKind::Tetrahedron => {
            let nu = (degree + 3) / 2 + 1;
            let nv = (degree + 2) / 2 + 1;
            let nw = degree / 2 + 1;
            let (xu, wu) = gauss_legendre_01(nu);
            let (xv, wv) = gauss_legendre_01(nv);
            let (xw, ww) = gauss_legendre_01(nw);
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (u, cu) in xu.iter().zip(wu.iter()) {
                for (v, cv) in xv.iter().zip(wv.iter()) {
                    for (w, cw) in xw.iter().zip(ww.iter()) {
                        let y = v * (1.0 - u);
                        let z = w * (1.0 - u) * (1.0 - v);
                        points.push([*u, y, z]);
                        weights.push(cu * cv * cw * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
            QuadRule { kind, points, weights, degree }
        }
        DomainKind::Composite => panic!("composite rules come from composite_rule"),
    };
    Ok(rule)
}

/// Rule on a segment between two 3D points.
pub fn segment_rule(a: &[f64; 3], b: &[f64; 3], degree: usize) -> QuadRule {
    let reference = reference_rule(DomainKind::Segment, degree).expect("degree in range");
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2) + (b[2] - a[2]).powi(2)).sqrt();
    let points = reference
        .points
        .iter()
        .map(|p| {
            let t = p[0];
            [
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
            ]
        })
        .collect();
    let weights = reference.weights.iter().map(|w| w * len).collect();
    QuadRule { kind: DomainKind::Segment, points, weights, degree }
}

/// Rule on a triangle given by three 3D points.
pub fn triangle_rule(v: &[[f64; 3]; 3], degree: usize) -> QuadRule {
    let reference = reference_rule(DomainKind::Triangle, degree).expect("degree in range");
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1], v[1][2] - v[0][2]];
    let e2 = [v[2][0] - v[0][0], v[2][1] - v[0][1], v[2][2] - v[0][2]];
    let cross = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ];
    let area2 = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let points = reference
        .points
        .iter()
        .map(|p| {
            let (u, w) = (p[0], p[1]);
            [
                v[0][0] + u * e1[0] + w * e2[0],
                v[0][1] + u * e1[1] + w * e2[1],
                v[0][2] + u * e1[2] + w * e2[2],
            ]
        })
        .collect();
    let weights = reference.weights.iter().map(|w| w * area2).collect();
    QuadRule { kind: DomainKind::Triangle, points, weights, degree }
}

/// Rule on a tetrahedron given by four 3D points.
pub fn tetrahedron_rule(v: &[[f64; 3]; 4], degree: usize) -> QuadRule {
    let reference = reference_rule(DomainKind::Tetrahedron, degree).expect("degree in range");
    let e: Vec<[f64; 3]> = (1..4)
        .map(|i| [v[i][0] - v[0][0], v[i][1] - v[0][1], v[i][2] - v[0][2]])
        .collect();
    let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
    let jac = det.abs();
    let points = reference
        .points
        .iter()
        .map(|p| {
            let mut x = [v[0][0], v[0][1], v[0][2]];
            for (k, ek) in e.iter().enumerate() {
                for d in 0..3 {
                    x[d] += p[k] * ek[d];
                }
            }
            x
        })
        .collect();
    let weights = reference.weights.iter().map(|w| w * jac).collect();
    QuadRule { kind: DomainKind::Tetrahedron, points, weights, degree }
}

fn merge(rules: Vec<QuadRule>, degree: usize) -> QuadRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for r in rules {
        points.extend(r.points);
        weights.extend(r.weights);
    }
    QuadRule { kind: DomainKind::Composite, points, weights, degree }
}

/// Composite rule over the simplicial split of a mesh entity; exact to
/// `degree` on the full polytope.
pub fn composite_rule(mesh: &Mesh, entity: EntityRef, degree: usize) -> Result<QuadRule, QuadError> {
    if degree > 20 {
        return Err(QuadError::DegreeOutOfRange(degree));
    }
    let tess = mesh.subtessellate(entity, 0)?;
    let rules = if let Some(tris) = &tess.triangles {
        tris.iter().map(|t| triangle_rule(t, degree)).collect()
    } else {
        tess.tetrahedra
            .as_ref()
            .unwrap()
            .iter()
            .map(|t| tetrahedron_rule(t, degree))
            .collect()
    };
    Ok(merge(rules, degree))
}

/// Composite rule from explicit triangles (used for face-local geometry).
pub fn composite_from_triangles(tris: &[[[f64; 3]; 3]], degree: usize) -> QuadRule {
    merge(tris.iter().map(|t| triangle_rule(t, degree)).collect(), degree)
}

/// Composite rule from explicit tetrahedra.
pub fn composite_from_tetrahedra(tets: &[[[f64; 3]; 4]], degree: usize) -> QuadRule {
    merge(tets.iter().map(|t| tetrahedron_rule(t, degree)).collect(), degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Closed form reference integrals: ∫_T x^a y^b = a! b! / (a+b+2)! on the
    /// unit triangle and ∫ x^a y^b z^c = a! b! c! / (a+b+c+3)! on the unit
    /// tetrahedron.
    #[test]
    fn exactness_sweep_reference_rules() {
        for d in 0..=10usize {
            let seg = reference_rule(DomainKind::Segment, d).unwrap();
            for p in 0..=d as u32 {
                let exact = 1.0 / (p as f64 + 1.0);
                let got = seg.integrate(|x| x[0].powi(p as i32));
                assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "seg d={d} p={p}");
            }
            let tri = reference_rule(DomainKind::Triangle, d).unwrap();
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let got = tri.integrate(|x| x[0].powi(a as i32) * x[1].powi(b as i32));
                    assert!((got - exact).abs() <= 1e-12 * exact.max(1.0), "tri d={d} ({a},{b})");
                }
            }
            let tet = reference_rule(DomainKind::Tetrahedron, d).unwrap();
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    for c in 0..=(d as u32 - a - b) {
                        let exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
                        let got = tet.integrate(|x| {
                            x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32)
                        });
                        assert!((got - exact).abs() <= 1e-12 * exact.max(1.0), "tet d={d} ({a},{b},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn segment_degree_one_is_midpoint_exact() {
        let r = reference_rule(DomainKind::Segment, 1).unwrap();
        assert!((r.integrate(|x| x[0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle_degree_two_integrates_x_squared() {
        let r = reference_rule(DomainKind::Triangle, 2).unwrap();
        assert!((r.integrate(|x| x[0] * x[0]) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn tet_degree_three_integrates_xyz() {
        let r = reference_rule(DomainKind::Tetrahedron, 3).unwrap();
        assert!((r.integrate(|x| x[0] * x[1] * x[2]) - 1.0 / 720.0).abs() < 1e-14);
    }

    #[test]
    fn reference_weights_positive_and_sum_to_measure() {
        for d in [0usize, 3, 7, 12, 20] {
            for (kind, measure) in [
                (DomainKind::Segment, 1.0),
                (DomainKind::Triangle, 0.5),
                (DomainKind::Tetrahedron, 1.0 / 6.0),
            ] {
                let r = reference_rule(kind, d).unwrap();
                assert!(r.weights.iter().all(|&w| w > 0.0));
                assert!((r.total_weight() - measure).abs() < 1e-13 * measure);
            }
        }
    }

    #[test]
    fn degree_out_of_range_is_rejected() {
        assert!(reference_rule(DomainKind::Segment, 21).is_err());
    }
}
