//! Conforming P_q Lagrange finite elements on the refined fan triangulation
//! of a polygon. The triangulation is produced by uniform quadrisection of
//! the boundary fan, and every boundary sub-edge remembers which polygon
//! edge it came from together with its arclength interval, so polynomial
//! edge data can be integrated exactly.

use nalgebra::{DMatrix, DVector};

use crate::mesh::FaceGeom;
use crate::poly::mono;
use crate::quadrature::{gauss_legendre_01, reference_rule, DomainKind};

/// One triangle with optional boundary marks per local edge
/// (`slot i` joins vertex `i` to vertex `i+1 mod 3`).
#[derive(Clone)]
struct Tri {
    v: [usize; 3],
    /// (parent polygon edge, param of start, param of end), params in [0,1]
    /// measured along the parent edge.
    boundary: [Option<(usize, f64, f64)>; 3],
}

/// P_q Lagrange space on the refined fan of a polygon.
pub struct TriFem {
    pub q: usize,
    verts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    /// Global node coordinates.
    pub nodes: Vec<[f64; 2]>,
    /// Per triangle, global node ids in reference-lattice order.
    pub tri_nodes: Vec<Vec<usize>>,
    pub is_boundary_node: Vec<bool>,
    /// Interior node id → compact interior index.
    pub interior_index: Vec<Option<usize>>,
    pub n_interior: usize,
    /// Nodal-basis coefficients over reference monomials: `phi_j = Σ_m C[(m, j)] x^a y^b`.
    coeff: DMatrix<f64>,
    /// Reference quadrature (degree 2q+2): points, weights, shape values and
    /// gradients at the points.
    ref_pts: Vec<[f64; 2]>,
    ref_wts: Vec<f64>,
    shape_vals: Vec<DVector<f64>>,
    shape_grads: Vec<DMatrix<f64>>, // nq entries of (n_loc × 2)
}

fn tri_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

impl TriFem {
    /// Builds the space on the level-`r` fan refinement of `geom`.
    pub fn new(geom: &FaceGeom, r: usize, q: usize) -> TriFem {
        assert!(q >= 1);
        // Initial fan (in local coordinates), boundary slot 1 for each fan
        // triangle (fan point, a, b).
        let mut verts: Vec<[f64; 2]> = Vec::new();
        let vid = |p: [f64; 2], verts: &mut Vec<[f64; 2]>| -> usize {
            for (i, v) in verts.iter().enumerate() {
                if v[0] == p[0] && v[1] == p[1] {
                    return i;
                }
            }
            verts.push(p);
            verts.len() - 1
        };
        let fan = geom.fan_point;
        let n = geom.vertices.len();
        let mut tris: Vec<Tri> = Vec::new();
        for e in 0..n {
            let a = geom.vertices[e];
            let b = geom.vertices[(e + 1) % n];
            let t = Tri {
                v: [
                    vid(fan, &mut verts),
                    vid(a, &mut verts),
                    vid(b, &mut verts),
                ],
                boundary: [None, Some((e, 0.0, 1.0)), None],
            };
            tris.push(t);
        }
        // Refinement with corner grading: the potentials of virtual functions
        // behave like r^(π/ω) at a corner of interior angle ω, which caps
        // uniform-refinement convergence below the element order. Splitting
        // corner-adjacent triangles with ratio θ = 2^(−q/λ), λ = π/ω_max,
        // restores order q at unchanged triangle counts (θ = 1/2 is plain
        // quadrisection).
        let corners = geom.corner_vertices();
        let h_face = geom.frame.diameter;
        let mut omega_max: f64 = 0.0;
        let nc = corners.len();
        for i in 0..nc {
            let p = corners[(i + nc - 1) % nc];
            let c = corners[i];
            let nx = corners[(i + 1) % nc];
            let u = [c[0] - p[0], c[1] - p[1]];
            let v = [nx[0] - c[0], nx[1] - c[1]];
            let cross = u[0] * v[1] - u[1] * v[0];
            let dot = u[0] * v[0] + u[1] * v[1];
            let angle = std::f64::consts::PI - cross.atan2(dot);
            omega_max = omega_max.max(angle);
        }
        let lambda = std::f64::consts::PI / omega_max;
        // Exponent (q+1)/λ leaves margin over the borderline q/λ, where the
        // resolution of the corner part only matches the interior order up
        // to logarithms.
        let theta = 0.5_f64.powf((q as f64 + 1.0) / lambda).min(0.5);
        let is_corner = |p: [f64; 2]| -> bool {
            corners
                .iter()
                .any(|c| (c[0] - p[0]).abs() < 1e-12 * h_face && (c[1] - p[1]).abs() < 1e-12 * h_face)
        };

        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        enum SplitPoint {
            Mid,
            /// Fraction θ measured from the first vertex of the directed pair.
            Theta,
        }
        for _ in 0..r {
            let mut cache: std::collections::HashMap<(usize, usize, SplitPoint), usize> =
                std::collections::HashMap::new();
            let mut new_tris = Vec::with_capacity(4 * tris.len());
            let mut split = |a: usize, b: usize, kind: SplitPoint, verts: &mut Vec<[f64; 2]>| -> usize {
                let key = match kind {
                    SplitPoint::Mid => (a.min(b), a.max(b), kind),
                    SplitPoint::Theta => (a, b, kind),
                };
                *cache.entry(key).or_insert_with(|| {
                    let p = match kind {
                        SplitPoint::Mid => [
                            0.5 * (verts[a][0] + verts[b][0]),
                            0.5 * (verts[a][1] + verts[b][1]),
                        ],
                        SplitPoint::Theta => [
                            verts[a][0] + theta * (verts[b][0] - verts[a][0]),
                            verts[a][1] + theta * (verts[b][1] - verts[a][1]),
                        ],
                    };
                    verts.push(p);
                    verts.len() - 1
                })
            };
            let part = |b: Option<(usize, f64, f64)>, lo: f64, hi: f64| -> Option<(usize, f64, f64)> {
                b.map(|(e, t0, t1)| (e, t0 + lo * (t1 - t0), t0 + hi * (t1 - t0)))
            };
            for t in &tris {
                // Rotate the triangle so a unique corner vertex (if any)
                // becomes local vertex 0.
                let corner_flags = [
                    is_corner(verts[t.v[0]]),
                    is_corner(verts[t.v[1]]),
                    is_corner(verts[t.v[2]]),
                ];
                let n_corner = corner_flags.iter().filter(|&&f| f).count();
                let rot = if n_corner == 1 && theta < 0.5 {
                    corner_flags.iter().position(|&f| f).unwrap()
                } else {
                    0
                };
                let v = [t.v[rot], t.v[(rot + 1) % 3], t.v[(rot + 2) % 3]];
                let bd = [
                    t.boundary[rot],
                    t.boundary[(rot + 1) % 3],
                    t.boundary[(rot + 2) % 3],
                ];
                let graded = n_corner == 1 && theta < 0.5;
                let frac = if graded { theta } else { 0.5 };
                let kind = if graded { SplitPoint::Theta } else { SplitPoint::Mid };
                let a1 = split(v[0], v[1], kind, &mut verts);
                let b1 = if graded {
                    split(v[0], v[2], SplitPoint::Theta, &mut verts)
                } else {
                    split(v[2], v[0], SplitPoint::Mid, &mut verts)
                };
                let m = split(v[1], v[2], SplitPoint::Mid, &mut verts);
                // children: (v0, a1, b1), (a1, v1, m), (a1, m, b1), (b1, m, v2)
                new_tris.push(Tri {
                    v: [v[0], a1, b1],
                    boundary: [part(bd[0], 0.0, frac), None, part(bd[2], 1.0 - frac, 1.0)],
                });
                new_tris.push(Tri {
                    v: [a1, v[1], m],
                    boundary: [part(bd[0], frac, 1.0), part(bd[1], 0.0, 0.5), None],
                });
                new_tris.push(Tri {
                    v: [a1, m, b1],
                    boundary: [None, None, None],
                });
                new_tris.push(Tri {
                    v: [b1, m, v[2]],
                    boundary: [None, part(bd[1], 0.5, 1.0), part(bd[2], 0.0, 1.0 - frac)],
                });
            }
            tris = new_tris;
        }

        // Node numbering: triangle vertices, then (q−1) per undirected edge,
        // then interior lattice nodes per triangle.
        let mut nodes: Vec<[f64; 2]> = verts.clone();
        let mut edge_nodes: std::collections::HashMap<(usize, usize), Vec<usize>> =
            std::collections::HashMap::new();
        if q >= 2 {
            for t in &tris {
                for s in 0..3 {
                    let a = t.v[s];
                    let b = t.v[(s + 1) % 3];
                    let key = (a.min(b), a.max(b));
                    edge_nodes.entry(key).or_insert_with(|| {
                        let (lo, hi) = key;
                        (1..q)
                            .map(|m| {
                                let s = m as f64 / q as f64;
                                nodes.push([
                                    verts[lo][0] + s * (verts[hi][0] - verts[lo][0]),
                                    verts[lo][1] + s * (verts[hi][1] - verts[lo][1]),
                                ]);
                                nodes.len() - 1
                            })
                            .collect()
                    });
                }
            }
        }
        let n_loc = (q + 1) * (q + 2) / 2;
        let mut tri_nodes = Vec::with_capacity(tris.len());
        for t in &tris {
            let [v0, v1, v2] = t.v;
            let mut local = Vec::with_capacity(n_loc);
            for j in 0..=q {
                for i in 0..=(q - j) {
                    let id = if i == 0 && j == 0 {
                        v0
                    } else if i == q && j == 0 {
                        v1
                    } else if i == 0 && j == q {
                        v2
                    } else if j == 0 {
                        // edge v0–v1, fraction i/q from v0
                        Self::edge_node(&edge_nodes, v0, v1, i, q)
                    } else if i == 0 {
                        // edge v0–v2, fraction j/q from v0
                        Self::edge_node(&edge_nodes, v0, v2, j, q)
                    } else if i + j == q {
                        // edge v1–v2, fraction j/q from v1
                        Self::edge_node(&edge_nodes, v1, v2, j, q)
                    } else {
                        let s = i as f64 / q as f64;
                        let tj = j as f64 / q as f64;
                        nodes.push([
                            verts[v0][0] + s * (verts[v1][0] - verts[v0][0]) + tj * (verts[v2][0] - verts[v0][0]),
                            verts[v0][1] + s * (verts[v1][1] - verts[v0][1]) + tj * (verts[v2][1] - verts[v0][1]),
                        ]);
                        nodes.len() - 1
                    };
                    local.push(id);
                }
            }
            tri_nodes.push(local);
        }

        // Boundary nodes: every node on a boundary-marked sub-edge.
        let mut is_boundary_node = vec![false; nodes.len()];
        for (ti, t) in tris.iter().enumerate() {
            for s in 0..3 {
                if t.boundary[s].is_none() {
                    continue;
                }
                let a = t.v[s];
                let b = t.v[(s + 1) % 3];
                is_boundary_node[a] = true;
                is_boundary_node[b] = true;
                if q >= 2 {
                    for m in 1..q {
                        is_boundary_node[Self::edge_node(&edge_nodes, a, b, m, q)] = true;
                    }
                }
            }
            let _ = ti;
        }
        let mut interior_index = vec![None; nodes.len()];
        let mut n_interior = 0;
        for (i, &bdry) in is_boundary_node.iter().enumerate() {
            if !bdry {
                interior_index[i] = Some(n_interior);
                n_interior += 1;
            }
        }

        // Reference nodal basis: Vandermonde inverse over monomials.
        let idx = mono::indices(q, 2);
        let mut lattice = Vec::with_capacity(n_loc);
        for j in 0..=q {
            for i in 0..=(q - j) {
                lattice.push([i as f64 / q as f64, j as f64 / q as f64]);
            }
        }
        let vmat = DMatrix::from_fn(n_loc, n_loc, |l, m| {
            let a = idx[m];
            lattice[l][0].powi(a[0] as i32) * lattice[l][1].powi(a[1] as i32)
        });
        let coeff = vmat.try_inverse().expect("lagrange vandermonde invertible");

        let rule = reference_rule(DomainKind::Triangle, 2 * q + 2).expect("degree in range");
        let mut ref_pts = Vec::with_capacity(rule.points.len());
        let mut ref_wts = Vec::with_capacity(rule.points.len());
        let mut shape_vals = Vec::with_capacity(rule.points.len());
        let mut shape_grads = Vec::with_capacity(rule.points.len());
        for (p, w) in rule.points.iter().zip(rule.weights.iter()) {
            ref_pts.push([p[0], p[1]]);
            ref_wts.push(*w);
            let (vals, grads) = Self::shapes_at(&coeff, &idx, p[0], p[1]);
            shape_vals.push(vals);
            shape_grads.push(grads);
        }

        TriFem {
            q,
            verts,
            tris,
            nodes,
            tri_nodes,
            is_boundary_node,
            interior_index,
            n_interior,
            coeff,
            ref_pts,
            ref_wts,
            shape_vals,
            shape_grads,
        }
    }

    fn edge_node(
        edge_nodes: &std::collections::HashMap<(usize, usize), Vec<usize>>,
        a: usize,
        b: usize,
        m: usize,
        q: usize,
    ) -> usize {
        let key = (a.min(b), a.max(b));
        let list = &edge_nodes[&key];
        if a < b {
            list[m - 1]
        } else {
            list[q - m - 1]
        }
    }

    fn shapes_at(
        coeff: &DMatrix<f64>,
        idx: &[[u8; 3]],
        x: f64,
        y: f64,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let n_loc = idx.len();
        let mut vals = DVector::zeros(n_loc);
        let mut grads = DMatrix::zeros(n_loc, 2);
        for (m, a) in idx.iter().enumerate() {
            let (p, pq) = (a[0] as i32, a[1] as i32);
            let mv = x.powi(p) * y.powi(pq);
            let dx = if p > 0 { p as f64 * x.powi(p - 1) * y.powi(pq) } else { 0.0 };
            let dy = if pq > 0 { pq as f64 * x.powi(p) * y.powi(pq - 1) } else { 0.0 };
            for j in 0..n_loc {
                let c = coeff[(m, j)];
                vals[j] += c * mv;
                grads[(j, 0)] += c * dx;
                grads[(j, 1)] += c * dy;
            }
        }
        (vals, grads)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_tris(&self) -> usize {
        self.tris.len()
    }

    /// Affine data of triangle `t`: vertex `v0` and jacobian columns.
    fn affine(&self, t: usize) -> ([f64; 2], [[f64; 2]; 2], f64) {
        let [v0, v1, v2] = self.tris[t].v;
        let a = self.verts[v0];
        let j = [
            [self.verts[v1][0] - a[0], self.verts[v2][0] - a[0]],
            [self.verts[v1][1] - a[1], self.verts[v2][1] - a[1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        (a, j, det)
    }

    /// Assembles the stiffness matrix as triplets, plus the load functional
    /// of the nodal mean `∫ φ_i`.
    pub fn stiffness_triplets(&self) -> (Vec<(usize, usize, f64)>, DVector<f64>) {
        let n_loc = self.tri_nodes[0].len();
        let mut triplets = Vec::with_capacity(self.tris.len() * n_loc * n_loc);
        let mut mean = DVector::zeros(self.n_nodes());
        for t in 0..self.tris.len() {
            let (_, j, det) = self.affine(t);
            let adet = det.abs();
            // J⁻ᵀ rows
            let inv = [
                [j[1][1] / det, -j[0][1] / det],
                [-j[1][0] / det, j[0][0] / det],
            ];
            let nodes = &self.tri_nodes[t];
            let mut local = DMatrix::zeros(n_loc, n_loc);
            for (qp, w) in self.ref_wts.iter().enumerate() {
                let g = &self.shape_grads[qp];
                // physical gradient of shape j: J⁻ᵀ ∇̂
                for a in 0..n_loc {
                    let ga = [
                        inv[0][0] * g[(a, 0)] + inv[1][0] * g[(a, 1)],
                        inv[0][1] * g[(a, 0)] + inv[1][1] * g[(a, 1)],
                    ];
                    for b in a..n_loc {
                        let gb = [
                            inv[0][0] * g[(b, 0)] + inv[1][0] * g[(b, 1)],
                            inv[0][1] * g[(b, 0)] + inv[1][1] * g[(b, 1)],
                        ];
                        local[(a, b)] += w * adet * (ga[0] * gb[0] + ga[1] * gb[1]);
                    }
                }
                for a in 0..n_loc {
                    mean[nodes[a]] += w * adet * self.shape_vals[qp][a];
                }
            }
            for a in 0..n_loc {
                for b in a..n_loc {
                    triplets.push((nodes[a], nodes[b], local[(a, b)]));
                    if a != b {
                        triplets.push((nodes[b], nodes[a], local[(a, b)]));
                    }
                }
            }
        }
        (triplets, mean)
    }

    /// Accumulates `∫ f(x)·φ_i` over the mesh into `out` for a scalar
    /// integrand evaluated in local coordinates.
    pub fn accumulate_volume<F: FnMut(&[f64; 2]) -> f64>(&self, mut f: F, out: &mut DVector<f64>) {
        for t in 0..self.tris.len() {
            let (a, j, det) = self.affine(t);
            let adet = det.abs();
            let nodes = &self.tri_nodes[t];
            for (qp, w) in self.ref_wts.iter().enumerate() {
                let p = self.ref_pts[qp];
                let x = [
                    a[0] + j[0][0] * p[0] + j[0][1] * p[1],
                    a[1] + j[1][0] * p[0] + j[1][1] * p[1],
                ];
                let fv = f(&x) * w * adet;
                for b in 0..nodes.len() {
                    out[nodes[b]] += fv * self.shape_vals[qp][b];
                }
            }
        }
    }

    /// Accumulates `∫ g(x)·(∇φ_i)` for a vector integrand.
    pub fn accumulate_volume_grad<F: FnMut(&[f64; 2]) -> [f64; 2]>(
        &self,
        mut g: F,
        out: &mut DVector<f64>,
    ) {
        for t in 0..self.tris.len() {
            let (a, j, det) = self.affine(t);
            let adet = det.abs();
            let inv = [
                [j[1][1] / det, -j[0][1] / det],
                [-j[1][0] / det, j[0][0] / det],
            ];
            let nodes = &self.tri_nodes[t];
            for (qp, w) in self.ref_wts.iter().enumerate() {
                let p = self.ref_pts[qp];
                let x = [
                    a[0] + j[0][0] * p[0] + j[0][1] * p[1],
                    a[1] + j[1][0] * p[0] + j[1][1] * p[1],
                ];
                let gv = g(&x);
                let grads = &self.shape_grads[qp];
                for b in 0..nodes.len() {
                    let gb = [
                        inv[0][0] * grads[(b, 0)] + inv[1][0] * grads[(b, 1)],
                        inv[0][1] * grads[(b, 0)] + inv[1][1] * grads[(b, 1)],
                    ];
                    out[nodes[b]] += w * adet * (gv[0] * gb[0] + gv[1] * gb[1]);
                }
            }
        }
    }

    /// Visits every boundary sub-edge: passes the owning triangle, the 1D
    /// Gauss points `(x, weight, parent edge, param)` and a closure that
    /// evaluates nodal shape values and physical gradients at a point of
    /// that triangle.
    pub fn boundary_edges(&self) -> Vec<BoundarySubEdge> {
        let mut out = Vec::new();
        for (t, tri) in self.tris.iter().enumerate() {
            for s in 0..3 {
                if let Some((parent, t0, t1)) = tri.boundary[s] {
                    out.push(BoundarySubEdge {
                        tri: t,
                        a: self.verts[tri.v[s]],
                        b: self.verts[tri.v[(s + 1) % 3]],
                        parent,
                        t0,
                        t1,
                    });
                }
            }
        }
        out
    }

    /// Shape values and physical gradients of triangle `t` at a physical
    /// point (assumed inside).
    pub fn shapes_at_physical(&self, t: usize, x: &[f64; 2]) -> (DVector<f64>, DMatrix<f64>) {
        let (a, j, det) = self.affine(t);
        let inv = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        let xi = [
            inv[0][0] * (x[0] - a[0]) + inv[0][1] * (x[1] - a[1]),
            inv[1][0] * (x[0] - a[0]) + inv[1][1] * (x[1] - a[1]),
        ];
        let idx = mono::indices(self.q, 2);
        let (vals, mut grads) = Self::shapes_at(&self.coeff, &idx, xi[0], xi[1]);
        for b in 0..grads.nrows() {
            let g = [grads[(b, 0)], grads[(b, 1)]];
            grads[(b, 0)] = inv[0][0] * g[0] + inv[1][0] * g[1];
            grads[(b, 1)] = inv[0][1] * g[0] + inv[1][1] * g[1];
        }
        (vals, grads)
    }

    /// Triangle containing a point, by brute-force barycentric test.
    pub fn locate(&self, x: &[f64; 2]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for t in 0..self.tris.len() {
            let [v0, v1, v2] = self.tris[t].v;
            let (a, b, c) = (self.verts[v0], self.verts[v1], self.verts[v2]);
            let area = tri_area2(a, b, c);
            let s0 = tri_area2(*x, b, c) / area;
            let s1 = tri_area2(a, *x, c) / area;
            let s2 = tri_area2(a, b, *x) / area;
            let m = s0.min(s1).min(s2);
            if m >= -1e-12 {
                return Some(t);
            }
            if best.map_or(true, |(_, bm)| m > bm) {
                best = Some((t, m));
            }
        }
        // Tolerate slightly-outside points (quadrature on the boundary).
        best.and_then(|(t, m)| if m > -1e-9 { Some(t) } else { None })
    }

    /// Child-triangle index arithmetic: triangle `t` of a mesh refined `d`
    /// more times lies inside triangle `t / 4^d` of this mesh.
    pub fn coarse_parent(t_fine: usize, extra_levels: usize) -> usize {
        t_fine / 4usize.pow(extra_levels as u32)
    }

    /// Physical quadrature points and weights of triangle `t`.
    pub fn tri_quadrature(&self, t: usize) -> Vec<([f64; 2], f64)> {
        let (a, j, det) = self.affine(t);
        let adet = det.abs();
        self.ref_pts
            .iter()
            .zip(self.ref_wts.iter())
            .map(|(p, w)| {
                (
                    [
                        a[0] + j[0][0] * p[0] + j[0][1] * p[1],
                        a[1] + j[1][0] * p[0] + j[1][1] * p[1],
                    ],
                    w * adet,
                )
            })
            .collect()
    }

    /// 1D Gauss rule on a boundary sub-edge, with the parent-edge parameter
    /// of each point: `(x, weight, param)`.
    pub fn edge_quadrature(&self, e: &BoundarySubEdge, degree: usize) -> Vec<([f64; 2], f64, f64)> {
        let n = degree / 2 + 1;
        let (xs, ws) = gauss_legendre_01(n);
        let len = ((e.b[0] - e.a[0]).powi(2) + (e.b[1] - e.a[1]).powi(2)).sqrt();
        xs.iter()
            .zip(ws.iter())
            .map(|(s, w)| {
                (
                    [
                        e.a[0] + s * (e.b[0] - e.a[0]),
                        e.a[1] + s * (e.b[1] - e.a[1]),
                    ],
                    w * len,
                    e.t0 + s * (e.t1 - e.t0),
                )
            })
            .collect()
    }
}

/// A boundary sub-edge: geometry plus its place on the parent polygon edge.
pub struct BoundarySubEdge {
    pub tri: usize,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub parent: usize,
    pub t0: f64,
    pub t1: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::FaceGeom;

    fn square() -> FaceGeom {
        FaceGeom::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], 8).unwrap()
    }

    #[test]
    fn node_counts_match_euler() {
        let geom = square();
        let fem = TriFem::new(&geom, 2, 3);
        // 64 triangles; V = 41, E = 104 for the refined fan of a square.
        assert_eq!(fem.n_tris(), 64);
        let v = 41;
        let e = 104;
        assert_eq!(fem.n_nodes(), v + 2 * e + fem.n_tris());
    }

    #[test]
    fn partition_of_unity_and_interpolation() {
        let geom = square();
        let fem = TriFem::new(&geom, 1, 3);
        // Interpolate a cubic exactly: set nodal values, evaluate inside.
        let f = |x: f64, y: f64| 1.0 + x + x * y * y - 0.5 * y * y * y;
        let nodal: Vec<f64> = fem.nodes.iter().map(|p| f(p[0], p[1])).collect();
        for &pt in &[[0.3, 0.4], [0.71, 0.12], [0.05, 0.92]] {
            let t = fem.locate(&pt).unwrap();
            let (vals, grads) = fem.shapes_at_physical(t, &pt);
            let mut acc = 0.0;
            let mut gx = 0.0;
            for (j, &node) in fem.tri_nodes[t].iter().enumerate() {
                acc += nodal[node] * vals[j];
                gx += nodal[node] * grads[(j, 0)];
            }
            assert!((acc - f(pt[0], pt[1])).abs() < 1e-12);
            let h = 1e-6;
            let fd = (f(pt[0] + h, pt[1]) - f(pt[0] - h, pt[1])) / (2.0 * h);
            assert!((gx - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn boundary_subedges_cover_perimeter() {
        let geom = square();
        let r = 2;
        let fem = TriFem::new(&geom, r, 2);
        let edges = fem.boundary_edges();
        assert_eq!(edges.len(), 4 << r);
        let total: f64 = edges
            .iter()
            .map(|e| ((e.b[0] - e.a[0]).powi(2) + (e.b[1] - e.a[1]).powi(2)).sqrt())
            .sum();
        assert!((total - 4.0).abs() < 1e-12);
        for e in &edges {
            assert!(e.t1 > e.t0);
        }
    }

    #[test]
    fn laplace_solve_reproduces_harmonic_polynomial() {
        // Solve −Δu = 0 with exact Dirichlet data u = x² − y² via stiffness.
        let geom = square();
        let fem = TriFem::new(&geom, 2, 2);
        let (trip, _) = fem.stiffness_triplets();
        let n = fem.n_nodes();
        let mut a: DMatrix<f64> = DMatrix::zeros(n, n);
        for &(i, j, v) in &trip {
            a[(i, j)] += v;
        }
        let exact: Vec<f64> = fem.nodes.iter().map(|p| p[0] * p[0] - p[1] * p[1]).collect();
        // Residual of the exact solution against interior test functions.
        let r: DVector<f64> = &a * DVector::from_vec(exact.clone());
        for i in 0..n {
            if !fem.is_boundary_node[i] {
                assert!(r[i].abs() < 1e-11, "interior residual {i}: {}", r[i]);
            }
        }
    }
}
