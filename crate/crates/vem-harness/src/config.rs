//! Study configuration.

use serde::{Deserialize, Serialize};
use vem::mesh::MeshFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    Edge,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantChoice {
    Standard,
    Serendipity,
}

impl std::str::FromStr for FamilyChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge" => Ok(FamilyChoice::Edge),
            "face" => Ok(FamilyChoice::Face),
            other => Err(format!("unknown family '{other}' (edge|face)")),
        }
    }
}

impl std::str::FromStr for VariantChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(VariantChoice::Standard),
            "serendipity" => Ok(VariantChoice::Serendipity),
            other => Err(format!("unknown variant '{other}' (standard|serendipity)")),
        }
    }
}

fn default_samples() -> usize {
    200
}
fn default_oracle_r() -> usize {
    3
}
fn default_oracle_q_extra() -> usize {
    2
}
fn default_gamma() -> f64 {
    1.0
}
fn default_quad_extra() -> usize {
    6
}

/// Full description of one study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub dim: usize,
    pub family: FamilyChoice,
    pub variant: VariantChoice,
    pub k: usize,
    #[serde(with = "mesh_family_serde")]
    pub mesh: MeshFamily,
    /// Number of refinement levels (level indices 0..levels).
    pub levels: usize,
    /// First level index (levels run first_level .. first_level + levels).
    #[serde(default)]
    pub first_level: usize,
    #[serde(default)]
    pub seed: u64,
    /// Field id: `trig`, `smooth`, `poly<d>`, `singular<alpha>`, `zero`.
    #[serde(default = "default_field")]
    pub field: String,
    /// Analytic DoF quadrature degree is `2k + quad_extra`.
    #[serde(default = "default_quad_extra")]
    pub quad_extra: usize,
    /// Fan refinement of the reconstruction (2D studies).
    #[serde(default = "default_oracle_r")]
    pub oracle_r: usize,
    /// Element degree of the reconstruction is `k + oracle_q_extra`.
    #[serde(default = "default_oracle_q_extra")]
    pub oracle_q_extra: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_gamma")]
    pub gamma_hat: f64,
    /// Random inputs per level in stability mode.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub no_timestamp: bool,
}

fn default_field() -> String {
    "trig".into()
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.dim != 2 && self.dim != 3 {
            return Err(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.k == 0 {
            return Err("order k must be at least 1".into());
        }
        if self.mesh.dim() != self.dim {
            return Err(format!(
                "mesh family {} is {}-dimensional but the study asks for dim {}",
                self.mesh.name(),
                self.mesh.dim(),
                self.dim
            ));
        }
        if self.dim == 3 && self.family == FamilyChoice::Face && self.variant == VariantChoice::Serendipity {
            return Err("the 3D face family has no serendipity variant".into());
        }
        Ok(())
    }
}

mod mesh_family_serde {
    use super::MeshFamily;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(m: &MeshFamily, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(m.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<MeshFamily, D::Error> {
        let name = String::deserialize(d)?;
        MeshFamily::from_str(&name).map_err(serde::de::Error::custom)
    }
}
