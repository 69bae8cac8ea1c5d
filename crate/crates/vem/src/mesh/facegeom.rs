//! Planar polygon geometry: frames, oriented edges, kernels, fans and
//! supporting-line counts. Used both for 2D mesh cells and for faces of 3D
//! cells expressed in their in-plane coordinates.

use crate::poly::{CellFrame, CellMoments};
use crate::quadrature::{self, QuadRule};

use super::MeshError;

#[derive(Debug, Clone)]
pub struct EdgeGeom {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub len: f64,
    pub midpoint: [f64; 2],
    /// Unit tangent along the counter-clockwise traversal; satisfies
    /// `t = (−n₂, n₁)`.
    pub tangent: [f64; 2],
    /// Unit outward normal in the face plane.
    pub normal: [f64; 2],
}

/// A simple polygon, counter-clockwise, with its frame, oriented edges,
/// simplicial fan, and exact monomial moments.
#[derive(Debug, Clone)]
pub struct FaceGeom {
    pub vertices: Vec<[f64; 2]>,
    pub frame: CellFrame,
    pub edges: Vec<EdgeGeom>,
    /// Point from which the boundary fan is taken (barycenter, or a kernel
    /// point when the barycenter is not in the kernel).
    pub fan_point: [f64; 2],
    /// Fan triangles in local coordinates (z = 0).
    pub tris: Vec<[[f64; 3]; 3]>,
    pub moments: CellMoments,
}

pub fn polygon_area_centroid(vertices: &[[f64; 2]]) -> (f64, [f64; 2]) {
    let n = vertices.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let cross = p[0] * q[1] - q[0] * p[1];
        a2 += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    let area = 0.5 * a2;
    let centroid = if area.abs() > 0.0 {
        [cx / (6.0 * area), cy / (6.0 * area)]
    } else {
        [0.0, 0.0]
    };
    (area, centroid)
}

pub fn polygon_diameter(vertices: &[[f64; 2]]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            let dx = vertices[i][0] - vertices[j][0];
            let dy = vertices[i][1] - vertices[j][1];
            h = h.max((dx * dx + dy * dy).sqrt());
        }
    }
    h
}

/// Clips a convex region (given as a polygon) by the half-plane
/// `n·x ≥ c` (Sutherland–Hodgman step).
pub fn clip_halfplane(polygon: &[[f64; 2]], n: [f64; 2], c: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    let m = polygon.len();
    if m == 0 {
        return out;
    }
    for i in 0..m {
        let p = polygon[i];
        let q = polygon[(i + 1) % m];
        let dp = n[0] * p[0] + n[1] * p[1] - c;
        let dq = n[0] * q[0] + n[1] * q[1] - c;
        if dp >= 0.0 {
            out.push(p);
        }
        if (dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0) {
            let t = dp / (dp - dq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Kernel of a simple polygon: intersection of the edge half-planes, clipped
/// inside the bounding box. Returns an empty polygon when not star-shaped.
pub fn polygon_kernel(vertices: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in vertices {
        xmin = xmin.min(v[0]);
        xmax = xmax.max(v[0]);
        ymin = ymin.min(v[1]);
        ymax = ymax.max(v[1]);
    }
    let pad = 0.1 * ((xmax - xmin) + (ymax - ymin)).max(1e-30);
    let mut region = vec![
        [xmin - pad, ymin - pad],
        [xmax + pad, ymin - pad],
        [xmax + pad, ymax + pad],
        [xmin - pad, ymax + pad],
    ];
    let n = vertices.len();
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = (dx * dx + dy * dy).sqrt();
        if len == 0.0 {
            continue;
        }
        // Interior of a CCW polygon is to the left of each edge:
        // inward normal (−dy, dx)/len.
        let nvec = [-dy / len, dx / len];
        let c = nvec[0] * p[0] + nvec[1] * p[1];
        region = clip_halfplane(&region, nvec, c);
        if region.is_empty() {
            return region;
        }
    }
    region
}

/// Chebyshev-style kernel point: center of (approximately) the largest disk
/// inscribed in the kernel, found by bisection on the inradius. Returns the
/// center and the radius; radius 0 means the kernel is empty.
pub fn kernel_chebyshev(vertices: &[[f64; 2]]) -> ([f64; 2], f64) {
    let h = polygon_diameter(vertices);
    let kernel = polygon_kernel(vertices);
    if kernel.is_empty() {
        return ([0.0, 0.0], 0.0);
    }
    let shrunk_kernel = |r: f64| -> Vec<[f64; 2]> {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for v in vertices {
            xmin = xmin.min(v[0]);
            xmax = xmax.max(v[0]);
            ymin = ymin.min(v[1]);
            ymax = ymax.max(v[1]);
        }
        let pad = 0.1 * ((xmax - xmin) + (ymax - ymin)).max(1e-30);
        let mut region = vec![
            [xmin - pad, ymin - pad],
            [xmax + pad, ymin - pad],
            [xmax + pad, ymax + pad],
            [xmin - pad, ymax + pad],
        ];
        let n = vertices.len();
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = (dx * dx + dy * dy).sqrt();
            if len == 0.0 {
                continue;
            }
            let nvec = [-dy / len, dx / len];
            let c = nvec[0] * p[0] + nvec[1] * p[1] + r;
            region = clip_halfplane(&region, nvec, c);
            if region.is_empty() {
                return region;
            }
        }
        region
    };
    let mut lo = 0.0;
    let mut hi = h;
    let mut center = {
        let (_, c) = polygon_area_centroid(&kernel);
        c
    };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let region = shrunk_kernel(mid);
        if region.is_empty() {
            hi = mid;
        } else {
            lo = mid;
            let (a, c) = polygon_area_centroid(&region);
            center = if a.abs() > 0.0 {
                c
            } else {
                // Degenerate (segment or point): average vertices.
                let m = region.len() as f64;
                let mut acc = [0.0, 0.0];
                for v in &region {
                    acc[0] += v[0] / m;
                    acc[1] += v[1] / m;
                }
                acc
            };
        }
    }
    (center, lo)
}

/// Signed distance of a point to the kernel boundary: minimum over edges of
/// the inward signed distance to the supporting line. Positive inside.
pub fn kernel_distance(vertices: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let n = vertices.len();
    let mut d = f64::MAX;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = (dx * dx + dy * dy).sqrt();
        if len == 0.0 {
            continue;
        }
        let nvec = [-dy / len, dx / len];
        d = d.min(nvec[0] * (p[0] - a[0]) + nvec[1] * (p[1] - a[1]));
    }
    d
}

impl FaceGeom {
    /// Builds the geometry of a simple CCW polygon. `moments_degree` bounds
    /// the monomial moments precomputed for exact polynomial integration.
    pub fn new(vertices: Vec<[f64; 2]>, moments_degree: usize) -> Result<Self, MeshError> {
        let n = vertices.len();
        if n < 3 {
            return Err(MeshError::DegenerateEntity("polygon with fewer than 3 vertices".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if vertices[i] == vertices[j] {
                    return Err(MeshError::DegenerateEntity(format!(
                        "degenerate face: repeated vertex at positions {i} and {j}"
                    )));
                }
            }
        }
        let (area, centroid) = polygon_area_centroid(&vertices);
        if area <= 0.0 {
            return Err(MeshError::DegenerateEntity(format!(
                "polygon has non-positive area {area:.3e} (loops must be counter-clockwise)"
            )));
        }
        let h = polygon_diameter(&vertices);
        let frame = CellFrame::new(2, [centroid[0], centroid[1], 0.0], h, area);

        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = (dx * dx + dy * dy).sqrt();
            if len < 1e-14 * h {
                return Err(MeshError::DegenerateEntity(format!("degenerate face: zero-length edge {i}")));
            }
            let t = [dx / len, dy / len];
            edges.push(EdgeGeom {
                a,
                b,
                len,
                midpoint: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
                tangent: t,
                // t = (−n₂, n₁)  ⟺  n = (t₂, −t₁)
                normal: [t[1], -t[0]],
            });
        }

        let fan_point = if kernel_distance(&vertices, centroid) > 1e-12 * h {
            centroid
        } else {
            let (c, r) = kernel_chebyshev(&vertices);
            if r <= 1e-12 * h {
                return Err(MeshError::NotStarShaped(
                    "barycenter outside kernel and no interior kernel point found; \
                     sub-tessellation requires a star-shaped entity"
                        .into(),
                ));
            }
            c
        };

        let tris: Vec<[[f64; 3]; 3]> = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                [
                    [fan_point[0], fan_point[1], 0.0],
                    [a[0], a[1], 0.0],
                    [b[0], b[1], 0.0],
                ]
            })
            .collect();

        let rule = quadrature::composite_from_triangles(&tris, moments_degree);
        let moments = CellMoments::from_quadrature(frame, &rule, moments_degree);

        Ok(FaceGeom { vertices, frame, edges, fan_point, tris, moments })
    }

    pub fn face_rule(&self, degree: usize) -> QuadRule {
        quadrature::composite_from_triangles(&self.tris, degree)
    }

    pub fn edge_rule(&self, e: usize, degree: usize) -> QuadRule {
        let edge = &self.edges[e];
        quadrature::segment_rule(
            &[edge.a[0], edge.a[1], 0.0],
            &[edge.b[0], edge.b[1], 0.0],
            degree,
        )
    }

    /// Scaled arclength coordinate `(s − s_mid)/h_e ∈ [−1/2, 1/2]` of a point
    /// on edge `e`.
    pub fn edge_coord(&self, e: usize, p: &[f64; 3]) -> f64 {
        let edge = &self.edges[e];
        ((p[0] - edge.midpoint[0]) * edge.tangent[0] + (p[1] - edge.midpoint[1]) * edge.tangent[1])
            / edge.len
    }

    /// Number of distinct supporting lines of the boundary (collinear edges
    /// merged) and the serendipity exponent `β_F = k + 1 − η_F`.
    pub fn face_lines(&self, k: usize) -> (usize, i64) {
        let h = self.frame.diameter;
        let mut lines: Vec<(usize, [f64; 2], [f64; 2])> = Vec::new(); // (count, point, dir)
        for e in &self.edges {
            let mut found = false;
            for (_, p, d) in lines.iter() {
                let cross = d[0] * e.tangent[1] - d[1] * e.tangent[0];
                if cross.abs() > 1e-9 {
                    continue;
                }
                // Offset of edge midpoint from the line through p with dir d.
                let dx = e.midpoint[0] - p[0];
                let dy = e.midpoint[1] - p[1];
                let off = (dx * d[1] - dy * d[0]).abs();
                if off <= 1e-9 * h {
                    found = true;
                    break;
                }
            }
            if !found {
                lines.push((1, e.midpoint, e.tangent));
            }
        }
        let eta = lines.len();
        (eta, k as i64 + 1 - eta as i64)
    }

    /// Vertices of the polygon with collinear intermediate vertices removed
    /// (geometric corners only).
    pub fn corner_vertices(&self) -> Vec<[f64; 2]> {
        let n = self.vertices.len();
        let h = self.frame.diameter;
        let mut out = Vec::new();
        for i in 0..n {
            let prev = self.vertices[(i + n - 1) % n];
            let cur = self.vertices[i];
            let next = self.vertices[(i + 1) % n];
            let u = [cur[0] - prev[0], cur[1] - prev[1]];
            let v = [next[0] - cur[0], next[1] - cur[1]];
            let cross = u[0] * v[1] - u[1] * v[0];
            if cross.abs() > 1e-12 * h * h {
                out.push(cur);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn unit_square() -> FaceGeom {
        FaceGeom::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            8,
        )
        .unwrap()
    }

    #[test]
    fn square_frame_quantities() {
        let f = unit_square();
        assert!((f.frame.diameter - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!((f.frame.measure - 1.0).abs() < 1e-14);
        assert!((f.frame.barycenter[0] - 0.5).abs() < 1e-14);
        assert!((f.frame.barycenter[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tangent_normal_convention() {
        let f = unit_square();
        // Bottom edge: outward normal (0,−1), tangent (1,0) = (−n₂, n₁).
        let e = &f.edges[0];
        assert!((e.normal[0] - 0.0).abs() < 1e-15 && (e.normal[1] + 1.0).abs() < 1e-15);
        assert!((e.tangent[0] - 1.0).abs() < 1e-15 && (e.tangent[1] - 0.0).abs() < 1e-15);
        for e in &f.edges {
            assert!((e.tangent[0] + e.normal[1]).abs() < 1e-15);
            assert!((e.tangent[1] - e.normal[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_boundary_tangent_sum() {
        let hexagon: Vec<[f64; 2]> = (0..6)
            .map(|i| {
                let th = std::f64::consts::PI / 3.0 * i as f64 + 0.3;
                [th.cos(), th.sin()]
            })
            .collect();
        let f = FaceGeom::new(hexagon, 4).unwrap();
        let mut sx = 0.0;
        let mut sy = 0.0;
        for e in &f.edges {
            sx += e.len * e.tangent[0];
            sy += e.len * e.tangent[1];
        }
        assert!(sx.abs() < 1e-12 * f.frame.diameter);
        assert!(sy.abs() < 1e-12 * f.frame.diameter);
    }

    #[test]
    fn face_lines_counts() {
        let tri = FaceGeom::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 2).unwrap();
        assert_eq!(tri.face_lines(3), (3, 1));
        let sq = unit_square();
        assert_eq!(sq.face_lines(2), (4, -1));
        // Square with one side split into two collinear edges.
        let split = FaceGeom::new(
            vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            2,
        )
        .unwrap();
        assert_eq!(split.face_lines(2), (4, -1));
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let err = FaceGeom::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 2);
        match err {
            Err(MeshError::DegenerateEntity(msg)) => assert!(msg.contains("degenerate face")),
            other => panic!("expected degenerate-face error, got {other:?}"),
        }
    }

    #[test]
    fn kernel_of_l_shape_excludes_centroid_region() {
        // L-shaped hexagon: kernel is the upper-left square part.
        let l = vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ];
        let (c, r) = kernel_chebyshev(&l);
        assert!(r > 0.4); // kernel is the unit square [0,1]², inradius 1/2
        assert!(kernel_distance(&l, c) > 0.4);
        assert!(kernel_distance(&l, [1.5, 1.5]) < 0.0);
    }
}
