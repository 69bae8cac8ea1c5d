//! Validators for the mesh regularity assumptions: uniform star-shapedness
//! and edge-length bounds, and the uniform convexity condition used by the
//! serendipity spaces. Report-only: failures are flagged, never fatal.

use super::facegeom::{kernel_chebyshev, polygon_diameter};
use super::Mesh;

#[derive(Debug, Clone, Copy)]
pub struct AssumptionParams {
    /// Star-shapedness / edge-ratio parameter ρ.
    pub rho: f64,
    /// Minimum interior-angle margin ε (radians) for the convexity condition.
    pub eps: f64,
}

impl Default for AssumptionParams {
    fn default() -> Self {
        AssumptionParams { rho: 0.05, eps: 0.1 }
    }
}

#[derive(Debug, Clone)]
pub struct FaceReport {
    /// Radius of the largest disk the face is star-shaped with respect to,
    /// relative to the face diameter.
    pub star_ratio: f64,
    /// min over edges of h_e / h_F.
    pub min_edge_ratio: f64,
    pub convex: bool,
    /// Interior angles (radians) at geometric corners.
    pub min_angle: f64,
    pub max_angle: f64,
}

#[derive(Debug, Clone)]
pub struct CellReport {
    /// Sampled star-shapedness radius relative to the cell diameter.
    pub star_ratio: f64,
    /// min over faces of h_F / h_E.
    pub min_face_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub faces: Vec<FaceReport>,
    pub cells: Vec<CellReport>,
    pub m_pass: bool,
    pub mc_pass: bool,
    pub min_star_ratio: f64,
    pub min_edge_ratio: f64,
}

/// Regularity report for a single polygon given in local coordinates.
pub fn face_report(vertices: &[[f64; 2]], eps: f64) -> FaceReport {
    let h = polygon_diameter(vertices);
    let (_, r) = kernel_chebyshev(vertices);
    let star_ratio = r / h;
    let n = vertices.len();
    let mut min_edge = f64::MAX;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let l = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        min_edge = min_edge.min(l);
    }
    // Convexity and angles on geometric corners (collinear splits merged).
    let corners = merge_collinear(vertices, h);
    let m = corners.len();
    let mut convex = true;
    let mut min_angle = f64::MAX;
    let mut max_angle: f64 = 0.0;
    for i in 0..m {
        let p = corners[(i + m - 1) % m];
        let c = corners[i];
        let q = corners[(i + 1) % m];
        let u = [c[0] - p[0], c[1] - p[1]];
        let v = [q[0] - c[0], q[1] - c[1]];
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        if cross < 0.0 {
            convex = false;
        }
        // Interior angle = π − turn angle.
        let turn = cross.atan2(dot);
        let angle = std::f64::consts::PI - turn;
        min_angle = min_angle.min(angle);
        max_angle = max_angle.max(angle);
    }
    let _ = eps;
    FaceReport {
        star_ratio,
        min_edge_ratio: min_edge / h,
        convex,
        min_angle,
        max_angle,
    }
}

fn merge_collinear(vertices: &[[f64; 2]], h: f64) -> Vec<[f64; 2]> {
    let n = vertices.len();
    let mut out = Vec::new();
    for i in 0..n {
        let p = vertices[(i + n - 1) % n];
        let c = vertices[i];
        let q = vertices[(i + 1) % n];
        let u = [c[0] - p[0], c[1] - p[1]];
        let v = [q[0] - c[0], q[1] - c[1]];
        let cross = (u[0] * v[1] - u[1] * v[0]).abs();
        if cross > 1e-12 * h * h {
            out.push(c);
        }
    }
    if out.len() < 3 {
        vertices.to_vec()
    } else {
        out
    }
}

/// Checks assumptions (M) (star-shapedness and edge ratios) and (MC)
/// (uniform convexity of 2D cells / 3D faces).
pub fn validate(mesh: &Mesh, params: &AssumptionParams) -> AssumptionReport {
    let mut faces = Vec::with_capacity(mesh.faces.len());
    for f in 0..mesh.faces.len() {
        let placement = mesh.face_placement(f);
        let local: Vec<[f64; 2]> = mesh.faces[f]
            .iter()
            .map(|&v| placement.to_local(&mesh.vertices[v]))
            .collect();
        faces.push(face_report(&local, params.eps));
    }

    let mut cells = Vec::new();
    if mesh.dim == 3 {
        for c in 0..mesh.cells.len() {
            let frame = mesh.cell_frame(c);
            let boundary = mesh.cell_boundary_triangles(c).expect("validated at parse");
            // Kernel distance maximized over deterministic samples.
            let dist = |p: &[f64; 3]| -> f64 {
                let mut d = f64::MAX;
                for t in &boundary {
                    let e1 = [t[1][0] - t[0][0], t[1][1] - t[0][1], t[1][2] - t[0][2]];
                    let e2 = [t[2][0] - t[0][0], t[2][1] - t[0][1], t[2][2] - t[0][2]];
                    let n = [
                        e1[1] * e2[2] - e1[2] * e2[1],
                        e1[2] * e2[0] - e1[0] * e2[2],
                        e1[0] * e2[1] - e1[1] * e2[0],
                    ];
                    let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
                    if nn == 0.0 {
                        continue;
                    }
                    let dp = [p[0] - t[0][0], p[1] - t[0][1], p[2] - t[0][2]];
                    d = d.min(-(dp[0] * n[0] + dp[1] * n[1] + dp[2] * n[2]) / nn);
                }
                d
            };
            let halton = |i: usize, base: usize| -> f64 {
                let mut f = 1.0;
                let mut r = 0.0;
                let mut n = i + 1;
                while n > 0 {
                    f /= base as f64;
                    r += f * (n % base) as f64;
                    n /= base;
                }
                r
            };
            let (mut lo, mut hi) = ([f64::MAX; 3], [f64::MIN; 3]);
            for t in &boundary {
                for p in t {
                    for d in 0..3 {
                        lo[d] = lo[d].min(p[d]);
                        hi[d] = hi[d].max(p[d]);
                    }
                }
            }
            let mut best = dist(&frame.barycenter);
            for i in 0..4096 {
                let p = [
                    lo[0] + halton(i, 2) * (hi[0] - lo[0]),
                    lo[1] + halton(i, 3) * (hi[1] - lo[1]),
                    lo[2] + halton(i, 5) * (hi[2] - lo[2]),
                ];
                best = best.max(dist(&p));
            }
            let mut min_face_ratio = f64::MAX;
            for &f in &mesh.cells[c] {
                let pts: Vec<[f64; 3]> = mesh.faces[f].iter().map(|&v| mesh.vertices[v]).collect();
                let mut hf: f64 = 0.0;
                for i in 0..pts.len() {
                    for j in (i + 1)..pts.len() {
                        let d = [
                            pts[i][0] - pts[j][0],
                            pts[i][1] - pts[j][1],
                            pts[i][2] - pts[j][2],
                        ];
                        hf = hf.max((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt());
                    }
                }
                min_face_ratio = min_face_ratio.min(hf / frame.diameter);
            }
            cells.push(CellReport {
                star_ratio: best.max(0.0) / frame.diameter,
                min_face_ratio,
            });
        }
    }

    let rho = params.rho;
    let eps = params.eps;
    let mut m_pass = true;
    let mut mc_pass = true;
    let mut min_star = f64::MAX;
    let mut min_edge = f64::MAX;
    for fr in &faces {
        min_star = min_star.min(fr.star_ratio);
        min_edge = min_edge.min(fr.min_edge_ratio);
        if fr.star_ratio < rho || fr.min_edge_ratio < rho {
            m_pass = false;
        }
        if !fr.convex || fr.min_angle < eps || fr.max_angle > std::f64::consts::PI - eps {
            mc_pass = false;
        }
    }
    for cr in &cells {
        min_star = min_star.min(cr.star_ratio);
        if cr.star_ratio < rho || cr.min_face_ratio < rho {
            m_pass = false;
        }
    }
    AssumptionReport {
        faces,
        cells,
        m_pass,
        mc_pass,
        min_star_ratio: min_star,
        min_edge_ratio: min_edge,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{generate_mesh, MeshFamily};

    #[test]
    fn square_grid_passes_both() {
        let m = generate_mesh(MeshFamily::SquareGrid, 1, 0);
        let r = validate(&m, &AssumptionParams::default());
        assert!(r.m_pass);
        assert!(r.mc_pass);
        assert!(r.min_star_ratio > 0.3);
    }

    #[test]
    fn short_edge_fails_m() {
        let m = Mesh::parse(
            r#"{"dim":2,"vertices":[[0,0],[1,0],[1.0001,0.0001],[1,1],[0,1]],"faces":[[0,1,2,3,4]]}"#,
        )
        .unwrap();
        let r = validate(&m, &AssumptionParams::default());
        assert!(!r.m_pass, "edge of length ~1e-4·h must fail (M)(ii)");
    }

    #[test]
    fn l_shape_fails_mc_may_pass_m() {
        let m = Mesh::parse(
            r#"{"dim":2,"vertices":[[0,0],[2,0],[2,1],[1,1],[1,2],[0,2]],"faces":[[0,1,2,3,4,5]]}"#,
        )
        .unwrap();
        let r = validate(&m, &AssumptionParams::default());
        assert!(!r.mc_pass);
        assert!(r.m_pass, "L-shape is star-shaped with a healthy kernel");
    }

    #[test]
    fn split_edge_square_still_convex() {
        let m = Mesh::parse(
            r#"{"dim":2,"vertices":[[0,0],[0.5,0],[1,0],[1,1],[0,1]],"faces":[[0,1,2,3,4]]}"#,
        )
        .unwrap();
        let r = validate(&m, &AssumptionParams::default());
        assert!(r.mc_pass, "collinear split must not break the convexity check");
    }
}
