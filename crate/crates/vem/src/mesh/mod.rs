//! Polytopal mesh model in 2D/3D with the orientation conventions used by
//! the local spaces, JSON (de)serialization, simplicial sub-tessellation,
//! refinement-family generators and regularity validators.

pub mod facegeom;
pub mod generate;
pub mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{CellFrame, CellMoments};
use crate::quadrature::{self, QuadRule};

pub use facegeom::{EdgeGeom, FaceGeom};
pub use generate::{generate_mesh, MeshFamily};
pub use validate::{validate, AssumptionParams, AssumptionReport};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("mesh document violates schema: {0}")]
    Schema(String),
    #[error("{0}")]
    DegenerateEntity(String),
    #[error("cell {0} is not watertight: {1}")]
    NotWatertight(usize, String),
    #[error("{0}")]
    NotStarShaped(String),
    #[error("orientation inconsistency: {0}")]
    Orientation(String),
}

/// Reference to a mesh entity for sub-tessellation and quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityRef {
    Face(usize),
    Cell(usize),
}

/// Polytopal mesh. In 2D the `faces` are the cells; in 3D they are the
/// (planar) facets referenced by `cells`, with `cell_face_signs[c][i] = +1`
/// when the stored face loop is counter-clockwise around the outward normal
/// of cell `c`.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
    pub cells: Vec<Vec<usize>>,
    pub cell_face_signs: Vec<Vec<i8>>,
    /// Unique undirected edges (lower vertex index first).
    pub edges: Vec<[usize; 2]>,
    /// Per face, per loop position: (edge index, true when traversed from
    /// lower to higher vertex index).
    pub face_edges: Vec<Vec<(usize, bool)>>,
}

#[derive(Serialize, Deserialize)]
struct MeshDocument {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    faces: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cells: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cell_face_signs: Vec<Vec<i8>>,
}

/// Placement of a planar face in 3D: local in-plane coordinates
/// `ξ = ((x − origin)·u, (x − origin)·v)` with `(u, v, normal)` right-handed.
#[derive(Debug, Clone)]
pub struct FacePlacement {
    pub origin: [f64; 3],
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub normal: [f64; 3],
}

impl FacePlacement {
    pub fn to_local(&self, p: &[f64; 3]) -> [f64; 2] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1], p[2] - self.origin[2]];
        [dot(&d, &self.u), dot(&d, &self.v)]
    }

    pub fn to_global(&self, q: &[f64; 2]) -> [f64; 3] {
        [
            self.origin[0] + q[0] * self.u[0] + q[1] * self.v[0],
            self.origin[1] + q[0] * self.u[1] + q[1] * self.v[1],
            self.origin[2] + q[0] * self.u[2] + q[1] * self.v[2],
        ]
    }

    /// Pushes a tangential 2D vector to its 3D representative.
    pub fn vector_to_global(&self, q: &[f64; 2]) -> [f64; 3] {
        [
            q[0] * self.u[0] + q[1] * self.v[0],
            q[0] * self.u[1] + q[1] * self.v[1],
            q[0] * self.u[2] + q[1] * self.v[2],
        ]
    }

    /// Tangential part of a 3D vector in local 2D coordinates.
    pub fn vector_to_local(&self, w: &[f64; 3]) -> [f64; 2] {
        [dot(w, &self.u), dot(w, &self.v)]
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Simplicial split of a single entity.
#[derive(Debug, Clone)]
pub struct SubTess {
    pub parent: EntityRef,
    pub level: usize,
    pub triangles: Option<Vec<[[f64; 3]; 3]>>,
    pub tetrahedra: Option<Vec<[[f64; 3]; 4]>>,
}

impl SubTess {
    pub fn total_measure(&self) -> f64 {
        if let Some(tris) = &self.triangles {
            tris.iter().map(|t| triangle_area3(t)).sum()
        } else {
            self.tetrahedra
                .as_ref()
                .unwrap()
                .iter()
                .map(|t| tetra_volume(t))
                .sum()
        }
    }
}

pub fn triangle_area3(t: &[[f64; 3]; 3]) -> f64 {
    let e1 = sub3(&t[1], &t[0]);
    let e2 = sub3(&t[2], &t[0]);
    0.5 * norm(&cross(&e1, &e2))
}

pub fn tetra_volume(t: &[[f64; 3]; 4]) -> f64 {
    let e1 = sub3(&t[1], &t[0]);
    let e2 = sub3(&t[2], &t[0]);
    let e3 = sub3(&t[3], &t[0]);
    (dot(&cross(&e1, &e2), &e3) / 6.0).abs()
}

fn refine_triangles(tris: &[[[f64; 3]; 3]]) -> Vec<[[f64; 3]; 3]> {
    let mid = |a: &[f64; 3], b: &[f64; 3]| -> [f64; 3] {
        [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
    };
    let mut out = Vec::with_capacity(4 * tris.len());
    for t in tris {
        let m01 = mid(&t[0], &t[1]);
        let m12 = mid(&t[1], &t[2]);
        let m02 = mid(&t[0], &t[2]);
        out.push([t[0], m01, m02]);
        out.push([m01, t[1], m12]);
        out.push([m02, m12, t[2]]);
        out.push([m01, m12, m02]);
    }
    out
}

fn refine_tetrahedra(tets: &[[[f64; 3]; 4]]) -> Vec<[[f64; 3]; 4]> {
    let mid = |a: &[f64; 3], b: &[f64; 3]| -> [f64; 3] {
        [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]
    };
    let mut out = Vec::with_capacity(8 * tets.len());
    for t in tets {
        let (v0, v1, v2, v3) = (t[0], t[1], t[2], t[3]);
        let m01 = mid(&v0, &v1);
        let m02 = mid(&v0, &v2);
        let m03 = mid(&v0, &v3);
        let m12 = mid(&v1, &v2);
        let m13 = mid(&v1, &v3);
        let m23 = mid(&v2, &v3);
        // Bey red refinement: 4 corner tets + 4 from the inner octahedron.
        out.push([v0, m01, m02, m03]);
        out.push([m01, v1, m12, m13]);
        out.push([m02, m12, v2, m23]);
        out.push([m03, m13, m23, v3]);
        out.push([m01, m02, m03, m13]);
        out.push([m01, m02, m12, m13]);
        out.push([m02, m03, m13, m23]);
        out.push([m02, m12, m13, m23]);
    }
    out
}

/// Ear-clipping triangulation of a simple polygon given in 2D local
/// coordinates; returns index triples.
fn ear_clip(vertices: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let n = vertices.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let area2 = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| -> f64 {
        (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    };
    let mut guard = 0;
    while idx.len() > 3 {
        guard += 1;
        if guard > 10 * n * n {
            // Fallback for numerically stubborn (but simple) polygons.
            break;
        }
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let ia = idx[(i + m - 1) % m];
            let ib = idx[i];
            let ic = idx[(i + 1) % m];
            let (a, b, c) = (vertices[ia], vertices[ib], vertices[ic]);
            if area2(a, b, c) <= 0.0 {
                continue; // reflex corner
            }
            // No other active vertex inside the candidate ear.
            let mut ok = true;
            for &j in &idx {
                if j == ia || j == ib || j == ic {
                    continue;
                }
                let p = vertices[j];
                let s1 = area2(a, b, p);
                let s2 = area2(b, c, p);
                let s3 = area2(c, a, p);
                if s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                tris.push([ia, ib, ic]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        tris.push([idx[0], idx[1], idx[2]]);
    }
    tris
}

impl Mesh {
    /// Assembles derived connectivity and checks basic validity.
    pub fn finalize(mut self) -> Result<Self, MeshError> {
        let nv = self.vertices.len();
        for (fi, loop_) in self.faces.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(MeshError::DegenerateEntity(format!(
                    "degenerate face {fi}: fewer than 3 vertices"
                )));
            }
            for &v in loop_ {
                if v >= nv {
                    return Err(MeshError::Schema(format!("face {fi} references vertex {v} out of range")));
                }
            }
            for i in 0..loop_.len() {
                for j in (i + 1)..loop_.len() {
                    if loop_[i] == loop_[j] {
                        return Err(MeshError::DegenerateEntity(format!(
                            "degenerate face {fi}: repeated vertex {}",
                            loop_[i]
                        )));
                    }
                }
            }
        }
        // Unique edges.
        let mut map = std::collections::HashMap::new();
        let mut edges = Vec::new();
        let mut face_edges = Vec::with_capacity(self.faces.len());
        for loop_ in &self.faces {
            let mut fe = Vec::with_capacity(loop_.len());
            for i in 0..loop_.len() {
                let a = loop_[i];
                let b = loop_[(i + 1) % loop_.len()];
                let key = (a.min(b), a.max(b));
                let idx = *map.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                fe.push((idx, a < b));
            }
            face_edges.push(fe);
        }
        self.edges = edges;
        self.face_edges = face_edges;

        if self.dim == 3 {
            if self.cells.len() != self.cell_face_signs.len() {
                return Err(MeshError::Schema("cells and cell_face_signs length mismatch".into()));
            }
            for (ci, (cfaces, signs)) in self.cells.iter().zip(self.cell_face_signs.iter()).enumerate() {
                if cfaces.len() != signs.len() {
                    return Err(MeshError::Schema(format!("cell {ci}: face/sign length mismatch")));
                }
                if cfaces.len() < 4 {
                    return Err(MeshError::DegenerateEntity(format!("cell {ci} has fewer than 4 faces")));
                }
                // Watertightness + orientation: each undirected edge of the
                // cell must be traversed exactly once in each direction when
                // all faces are oriented outward.
                let mut directed = std::collections::HashMap::new();
                for (&f, &s) in cfaces.iter().zip(signs.iter()) {
                    if f >= self.faces.len() {
                        return Err(MeshError::Schema(format!("cell {ci} references face {f} out of range")));
                    }
                    let loop_: Vec<usize> = if s >= 0 {
                        self.faces[f].clone()
                    } else {
                        self.faces[f].iter().rev().copied().collect()
                    };
                    for i in 0..loop_.len() {
                        let a = loop_[i];
                        let b = loop_[(i + 1) % loop_.len()];
                        *directed.entry((a, b)).or_insert(0usize) += 1;
                    }
                }
                for (&(a, b), &cnt) in directed.iter() {
                    let rev = directed.get(&(b, a)).copied().unwrap_or(0);
                    if cnt != 1 || rev != 1 {
                        return Err(MeshError::NotWatertight(
                            ci,
                            format!("edge ({a},{b}) traversed {cnt} times forward, {rev} times backward"),
                        ));
                    }
                }
            }
            // Planarity of faces.
            for f in 0..self.faces.len() {
                self.face_placement_checked(f)?;
            }
        }
        Ok(self)
    }

    pub fn parse(document: &str) -> Result<Mesh, MeshError> {
        let doc: MeshDocument =
            serde_json::from_str(document).map_err(|e| MeshError::Schema(e.to_string()))?;
        if doc.dim != 2 && doc.dim != 3 {
            return Err(MeshError::Schema(format!("dim must be 2 or 3, got {}", doc.dim)));
        }
        let mut vertices = Vec::with_capacity(doc.vertices.len());
        for (i, v) in doc.vertices.iter().enumerate() {
            if v.len() != doc.dim {
                return Err(MeshError::Schema(format!(
                    "vertex {i} has {} coordinates, expected {}",
                    v.len(),
                    doc.dim
                )));
            }
            vertices.push([v[0], v[1], if doc.dim == 3 { v[2] } else { 0.0 }]);
        }
        Mesh {
            dim: doc.dim,
            vertices,
            faces: doc.faces,
            cells: doc.cells,
            cell_face_signs: doc.cell_face_signs,
            edges: Vec::new(),
            face_edges: Vec::new(),
        }
        .finalize()
    }

    pub fn write(&self) -> String {
        let doc = MeshDocument {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v[..self.dim].to_vec())
                .collect(),
            faces: self.faces.clone(),
            cells: self.cells.clone(),
            cell_face_signs: self.cell_face_signs.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("mesh serialization cannot fail")
    }

    pub fn n_cells(&self) -> usize {
        if self.dim == 2 {
            self.faces.len()
        } else {
            self.cells.len()
        }
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        norm(&sub3(&self.vertices[b], &self.vertices[a]))
    }

    /// Unit tangent of the (undirected) edge, oriented from the lower to the
    /// higher vertex index. Per-face traversals carry a sign against this.
    pub fn edge_tangent(&self, e: usize) -> [f64; 3] {
        let [a, b] = self.edges[e];
        let d = sub3(&self.vertices[b], &self.vertices[a]);
        let l = norm(&d);
        [d[0] / l, d[1] / l, d[2] / l]
    }

    fn face_placement_checked(&self, f: usize) -> Result<FacePlacement, MeshError> {
        let loop_ = &self.faces[f];
        let pts: Vec<[f64; 3]> = loop_.iter().map(|&v| self.vertices[v]).collect();
        // Newell normal.
        let mut n = [0.0; 3];
        for i in 0..pts.len() {
            let p = pts[i];
            let q = pts[(i + 1) % pts.len()];
            n[0] += (p[1] - q[1]) * (p[2] + q[2]);
            n[1] += (p[2] - q[2]) * (p[0] + q[0]);
            n[2] += (p[0] - q[0]) * (p[1] + q[1]);
        }
        let nn = norm(&n);
        if nn == 0.0 {
            return Err(MeshError::DegenerateEntity(format!("face {f} has zero area")));
        }
        let normal = [n[0] / nn, n[1] / nn, n[2] / nn];
        // First non-degenerate edge fixes the in-plane axes.
        let mut u = [0.0; 3];
        let mut h: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                h = h.max(norm(&sub3(&pts[j], &pts[i])));
            }
        }
        for i in 0..pts.len() {
            let d = sub3(&pts[(i + 1) % pts.len()], &pts[i]);
            let l = norm(&d);
            if l > 1e-12 * h {
                // Remove any normal component before normalizing.
                let dn = dot(&d, &normal);
                let t = [d[0] - dn * normal[0], d[1] - dn * normal[1], d[2] - dn * normal[2]];
                let tl = norm(&t);
                u = [t[0] / tl, t[1] / tl, t[2] / tl];
                break;
            }
        }
        let v = cross(&normal, &u);
        let placement = FacePlacement { origin: pts[0], u, v, normal };
        // Coplanarity.
        for (i, p) in pts.iter().enumerate() {
            let d = dot(&sub3(p, &pts[0]), &normal).abs();
            if d > 1e-10 * h {
                return Err(MeshError::DegenerateEntity(format!(
                    "face {f} not planar: vertex {i} deviates by {d:.3e} (tolerance {:.3e})",
                    1e-10 * h
                )));
            }
        }
        Ok(placement)
    }

    /// In-plane placement of face `f` (right-handed with the stored loop's
    /// normal). For 2D meshes this is the identity embedding.
    pub fn face_placement(&self, f: usize) -> FacePlacement {
        if self.dim == 2 {
            FacePlacement {
                origin: [0.0; 3],
                u: [1.0, 0.0, 0.0],
                v: [0.0, 1.0, 0.0],
                normal: [0.0, 0.0, 1.0],
            }
        } else {
            self.face_placement_checked(f).expect("face placement checked at finalize")
        }
    }

    /// Planar polygon geometry of face `f` in local coordinates.
    pub fn face_geom(&self, f: usize, moments_degree: usize) -> Result<FaceGeom, MeshError> {
        let placement = self.face_placement(f);
        let vertices: Vec<[f64; 2]> = self.faces[f]
            .iter()
            .map(|&v| placement.to_local(&self.vertices[v]))
            .collect();
        FaceGeom::new(vertices, moments_degree)
    }

    /// Simplicial split of an entity: a fan from the barycenter (or a kernel
    /// point) refined `r` times. Each refinement level quadruples triangles
    /// or octuples tetrahedra.
    pub fn subtessellate(&self, entity: EntityRef, r: usize) -> Result<SubTess, MeshError> {
        match entity {
            EntityRef::Face(f) => {
                let placement = self.face_placement(f);
                let geom = self.face_geom(f, 0)?;
                let mut tris: Vec<[[f64; 3]; 3]> = geom
                    .tris
                    .iter()
                    .map(|t| {
                        [
                            placement.to_global(&[t[0][0], t[0][1]]),
                            placement.to_global(&[t[1][0], t[1][1]]),
                            placement.to_global(&[t[2][0], t[2][1]]),
                        ]
                    })
                    .collect();
                for _ in 0..r {
                    tris = refine_triangles(&tris);
                }
                Ok(SubTess { parent: entity, level: r, triangles: Some(tris), tetrahedra: None })
            }
            EntityRef::Cell(c) => {
                let tris = self.cell_boundary_triangles(c)?;
                let (volume, centroid) = volume_centroid_from_boundary(&tris);
                if volume <= 0.0 {
                    return Err(MeshError::DegenerateEntity(format!("cell {c} has non-positive volume")));
                }
                let fan = self.cell_fan_point(c, &tris, centroid)?;
                let mut tets: Vec<[[f64; 3]; 4]> = tris
                    .iter()
                    .map(|t| [fan, t[0], t[1], t[2]])
                    .collect();
                for _ in 0..r {
                    tets = refine_tetrahedra(&tets);
                }
                Ok(SubTess { parent: entity, level: r, triangles: None, tetrahedra: Some(tets) })
            }
        }
    }

    /// Outward-oriented triangulation of a cell boundary (ear clipping per
    /// face, two triangles per quadrilateral).
    pub fn cell_boundary_triangles(&self, c: usize) -> Result<Vec<[[f64; 3]; 3]>, MeshError> {
        let mut tris = Vec::new();
        for (&f, &s) in self.cells[c].iter().zip(self.cell_face_signs[c].iter()) {
            let placement = self.face_placement(f);
            let loop_: Vec<usize> = if s >= 0 {
                self.faces[f].clone()
            } else {
                self.faces[f].iter().rev().copied().collect()
            };
            let local: Vec<[f64; 2]> = if s >= 0 {
                loop_.iter().map(|&v| placement.to_local(&self.vertices[v])).collect()
            } else {
                // Reversed loop is CCW in the mirrored frame (u, -v).
                loop_
                    .iter()
                    .map(|&v| {
                        let q = placement.to_local(&self.vertices[v]);
                        [q[0], -q[1]]
                    })
                    .collect()
            };
            for t in ear_clip(&local) {
                tris.push([
                    self.vertices[loop_[t[0]]],
                    self.vertices[loop_[t[1]]],
                    self.vertices[loop_[t[2]]],
                ]);
            }
        }
        Ok(tris)
    }

    fn cell_fan_point(
        &self,
        c: usize,
        boundary: &[[[f64; 3]; 3]],
        centroid: [f64; 3],
    ) -> Result<[f64; 3], MeshError> {
        // Kernel test: inner side of every boundary triangle's plane.
        let h = self.cell_frame(c).diameter;
        let dist = |p: &[f64; 3]| -> f64 {
            let mut d = f64::MAX;
            for t in boundary {
                let n = cross(&sub3(&t[1], &t[0]), &sub3(&t[2], &t[0]));
                let nn = norm(&n);
                if nn == 0.0 {
                    continue;
                }
                // Boundary triangles are oriented outward.
                d = d.min(-dot(&sub3(p, &t[0]), &n) / nn);
            }
            d
        };
        if dist(&centroid) > 1e-12 * h {
            return Ok(centroid);
        }
        // Deterministic sampling for a kernel point (Halton in the bbox).
        let (mut lo, mut hi) = ([f64::MAX; 3], [f64::MIN; 3]);
        for t in boundary {
            for p in t {
                for d in 0..3 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
        }
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
        let mut best = centroid;
        let mut best_d = dist(&centroid);
        for i in 0..4096 {
            let p = [
                lo[0] + halton(i, 2) * (hi[0] - lo[0]),
                lo[1] + halton(i, 3) * (hi[1] - lo[1]),
                lo[2] + halton(i, 5) * (hi[2] - lo[2]),
            ];
            let d = dist(&p);
            if d > best_d {
                best_d = d;
                best = p;
            }
        }
        if best_d > 1e-10 * h {
            Ok(best)
        } else {
            Err(MeshError::NotStarShaped(format!(
                "cell {c}: barycenter outside kernel and no kernel point found; \
                 use a star-shaped cell"
            )))
        }
    }

    /// Frame of a cell: 2D face or 3D polyhedron.
    pub fn cell_frame(&self, c: usize) -> CellFrame {
        if self.dim == 2 {
            let geom = self.face_geom(c, 0).expect("valid 2D cell");
            geom.frame
        } else {
            let tris = self.cell_boundary_triangles(c).expect("valid 3D cell");
            let (volume, centroid) = volume_centroid_from_boundary(&tris);
            let verts: Vec<usize> = self.cells[c]
                .iter()
                .flat_map(|&f| self.faces[f].iter().copied())
                .collect();
            let mut h: f64 = 0.0;
            for i in 0..verts.len() {
                for j in (i + 1)..verts.len() {
                    h = h.max(norm(&sub3(&self.vertices[verts[i]], &self.vertices[verts[j]])));
                }
            }
            CellFrame::new(3, centroid, h, volume)
        }
    }

    pub fn max_cell_diameter(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| self.cell_frame(c).diameter)
            .fold(0.0, f64::max)
    }

    /// 3D cell geometry bundle used by the local 3D spaces.
    pub fn cell_geom3(&self, c: usize, moments_degree: usize) -> Result<CellGeom3, MeshError> {
        assert_eq!(self.dim, 3);
        let frame = self.cell_frame(c);
        // Unique edges of this cell with a global orientation.
        let mut edge_ids = Vec::new();
        let mut edge_lookup = std::collections::HashMap::new();
        for &f in &self.cells[c] {
            for &(e, _) in &self.face_edges[f] {
                if !edge_lookup.contains_key(&e) {
                    edge_lookup.insert(e, edge_ids.len());
                    edge_ids.push(e);
                }
            }
        }
        let edges: Vec<CellEdge> = edge_ids
            .iter()
            .map(|&e| {
                let [a, b] = self.edges[e];
                CellEdge {
                    a: self.vertices[a],
                    b: self.vertices[b],
                    len: self.edge_length(e),
                    tangent: self.edge_tangent(e),
                }
            })
            .collect();

        let mut faces = Vec::new();
        for (&f, &s) in self.cells[c].iter().zip(self.cell_face_signs[c].iter()) {
            let base = self.face_placement(f);
            // Outward placement: flip v (and normal) when the stored loop is
            // clockwise around the outward normal.
            let placement = if s >= 0 {
                base
            } else {
                FacePlacement {
                    origin: base.origin,
                    u: base.u,
                    v: [-base.v[0], -base.v[1], -base.v[2]],
                    normal: [-base.normal[0], -base.normal[1], -base.normal[2]],
                }
            };
            let loop_: Vec<usize> = if s >= 0 {
                self.faces[f].clone()
            } else {
                self.faces[f].iter().rev().copied().collect()
            };
            let local: Vec<[f64; 2]> = loop_
                .iter()
                .map(|&v| placement.to_local(&self.vertices[v]))
                .collect();
            let geom = FaceGeom::new(local, moments_degree)?;
            // Per boundary-edge reference into the cell edge list with the
            // sign of the traversal against the global edge orientation.
            let mut edge_refs = Vec::with_capacity(loop_.len());
            for i in 0..loop_.len() {
                let a = loop_[i];
                let b = loop_[(i + 1) % loop_.len()];
                let key = (a.min(b), a.max(b));
                let ge = self
                    .edges
                    .iter()
                    .position(|&e| (e[0], e[1]) == key)
                    .expect("edge exists");
                let local_idx = edge_lookup[&ge];
                edge_refs.push((local_idx, if a < b { 1.0 } else { -1.0 }));
            }
            faces.push(FaceView { global_face: f, placement, geom, edge_refs });
        }

        let tess = self.subtessellate(EntityRef::Cell(c), 0)?;
        let tets = tess.tetrahedra.unwrap();
        let rule = quadrature::composite_from_tetrahedra(&tets, moments_degree);
        let moments = CellMoments::from_quadrature(frame, &rule, moments_degree);
        Ok(CellGeom3 { frame, faces, edges, tets, moments })
    }
}

/// Volume and centroid of a closed, outward-oriented triangulated surface.
pub fn volume_centroid_from_boundary(tris: &[[[f64; 3]; 3]]) -> (f64, [f64; 3]) {
    let mut vol = 0.0;
    let mut cen = [0.0; 3];
    for t in tris {
        let v6 = dot(&cross(&t[0], &t[1]), &t[2]); // signed, apex at origin
        vol += v6 / 6.0;
        for d in 0..3 {
            cen[d] += v6 / 6.0 * (t[0][d] + t[1][d] + t[2][d]) / 4.0;
        }
    }
    if vol.abs() > 0.0 {
        for d in cen.iter_mut() {
            *d /= vol;
        }
    }
    (vol, cen)
}

/// Edge of a 3D cell with its global orientation.
#[derive(Debug, Clone)]
pub struct CellEdge {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub len: f64,
    pub tangent: [f64; 3],
}

impl CellEdge {
    pub fn midpoint(&self) -> [f64; 3] {
        [
            0.5 * (self.a[0] + self.b[0]),
            0.5 * (self.a[1] + self.b[1]),
            0.5 * (self.a[2] + self.b[2]),
        ]
    }

    /// Scaled arclength coordinate along the global orientation.
    pub fn coord(&self, p: &[f64; 3]) -> f64 {
        let m = self.midpoint();
        (sub3(p, &m)[0] * self.tangent[0]
            + sub3(p, &m)[1] * self.tangent[1]
            + sub3(p, &m)[2] * self.tangent[2])
            / self.len
    }
}

/// A face of a 3D cell with outward orientation and its in-plane geometry.
#[derive(Debug, Clone)]
pub struct FaceView {
    pub global_face: usize,
    pub placement: FacePlacement,
    pub geom: FaceGeom,
    /// Per boundary edge (CCW around the outward normal): index into the
    /// cell's edge list and the sign versus the global edge orientation.
    pub edge_refs: Vec<(usize, f64)>,
}

/// Geometry bundle of one 3D cell.
#[derive(Debug, Clone)]
pub struct CellGeom3 {
    pub frame: CellFrame,
    pub faces: Vec<FaceView>,
    pub edges: Vec<CellEdge>,
    pub tets: Vec<[[f64; 3]; 4]>,
    pub moments: CellMoments,
}

impl CellGeom3 {
    pub fn cell_rule(&self, degree: usize) -> QuadRule {
        quadrature::composite_from_tetrahedra(&self.tets, degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn unit_square_mesh() -> Mesh {
        Mesh::parse(
            r#"{"dim":2,"vertices":[[0,0],[1,0],[1,1],[0,1]],"faces":[[0,1,2,3]]}"#,
        )
        .unwrap()
    }

    #[test]
    fn parse_unit_square() {
        let m = unit_square_mesh();
        assert_eq!(m.faces.len(), 1);
        assert_eq!(m.edges.len(), 4);
        let f = m.face_geom(0, 2).unwrap();
        assert!((f.frame.diameter - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((f.frame.measure - 1.0).abs() < 1e-15);
        assert!((f.frame.barycenter[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_is_lossless() {
        let m = generate::generate_mesh(MeshFamily::SquareGrid, 1, 0);
        let s = m.write();
        let m2 = Mesh::parse(&s).unwrap();
        assert_eq!(m.vertices, m2.vertices);
        assert_eq!(m.faces, m2.faces);
        let s2 = m2.write();
        assert_eq!(s, s2);
    }

    #[test]
    fn repeated_vertex_face_rejected() {
        let r = Mesh::parse(r#"{"dim":2,"vertices":[[0,0],[1,0],[1,1]],"faces":[[0,1,1,2]]}"#);
        match r {
            Err(MeshError::DegenerateEntity(msg)) => assert!(msg.contains("degenerate face")),
            other => panic!("expected degenerate face, got {other:?}"),
        }
    }

    #[test]
    fn square_subtess_counts_and_measure() {
        let m = unit_square_mesh();
        let t0 = m.subtessellate(EntityRef::Face(0), 0).unwrap();
        assert_eq!(t0.triangles.as_ref().unwrap().len(), 4);
        let t1 = m.subtessellate(EntityRef::Face(0), 1).unwrap();
        assert_eq!(t1.triangles.as_ref().unwrap().len(), 16);
        assert!((t1.total_measure() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cube_fan_has_twelve_tets() {
        let m = generate::generate_mesh(MeshFamily::CubeGrid, 0, 0);
        let t = m.subtessellate(EntityRef::Cell(0), 0).unwrap();
        assert_eq!(t.tetrahedra.as_ref().unwrap().len(), 12);
        assert!((t.total_measure() - 1.0).abs() < 1e-13);
        let t1 = m.subtessellate(EntityRef::Cell(0), 1).unwrap();
        assert_eq!(t1.tetrahedra.as_ref().unwrap().len(), 96);
        assert!((t1.total_measure() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cell_face_normal_sum_vanishes() {
        let m = generate::generate_mesh(MeshFamily::CubeGrid, 1, 0);
        for c in 0..m.n_cells() {
            let g = m.cell_geom3(c, 2).unwrap();
            let mut s = [0.0; 3];
            for fv in &g.faces {
                for d in 0..3 {
                    s[d] += fv.geom.frame.measure * fv.placement.normal[d];
                }
            }
            let h2 = g.frame.diameter * g.frame.diameter;
            assert!(norm(&s) < 1e-12 * h2, "divergence theorem on constants");
        }
    }

    #[test]
    fn convex_polygon_fan_has_n_triangles() {
        let m = Mesh::parse(
            r#"{"dim":2,"vertices":[[1,0],[0.5,0.9],[-0.5,0.9],[-1,0],[-0.5,-0.9],[0.5,-0.9]],"faces":[[0,1,2,3,4,5]]}"#,
        )
        .unwrap();
        let t = m.subtessellate(EntityRef::Face(0), 0).unwrap();
        assert_eq!(t.triangles.as_ref().unwrap().len(), 6);
    }
}
