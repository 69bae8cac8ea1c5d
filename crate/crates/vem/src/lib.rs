//! General-order standard and serendipity edge (H(curl)-type) and face
//! (H(div)-type) virtual element spaces on polygons and polyhedra.
//!
//! The crate is organized around the objects a local virtual element
//! computation needs:
//!
//! * [`poly`] — scaled monomial bases on polytopal cells, the 2D/3D
//!   differential operators, and the constructive polynomial vector
//!   decompositions used to assemble projectors;
//! * [`mesh`] — a polytopal mesh model with orientation conventions,
//!   simplicial sub-tessellation, generators for refinement families, and
//!   validators for the mesh regularity assumptions;
//! * [`quadrature`] — Gauss rules on segments, triangles and tetrahedra and
//!   composite rules on polytopes;
//! * [`vem2d`] / [`vem3d`] — the local spaces themselves: degrees of freedom,
//!   L² projectors, serendipity reduction, stabilizations and discrete mass
//!   forms;
//! * [`reconstruct`] — an independent finite element reconstruction of 2D
//!   virtual functions from their degrees of freedom, used as an oracle for
//!   interpolation errors and stability constants;
//! * [`field`] — analytic vector fields (values plus exact derivatives) used
//!   to drive interpolation experiments.

pub mod field;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod reconstruct;
pub mod vem2d;
pub mod vem3d;

pub use poly::{CellFrame, Poly};
