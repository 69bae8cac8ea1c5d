//! Mesh-refinement studies over the local virtual element spaces: empirical
//! interpolation rates and stabilization bands, with CSV/JSON output.

pub mod cli;
pub mod config;
pub mod fields;
pub mod study;
pub mod table;

pub use config::{FamilyChoice, StudyConfig, VariantChoice};
pub use study::{run_convergence, run_stability};
pub use table::ErrorTable;
