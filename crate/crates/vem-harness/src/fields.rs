//! Field library: analytic fields by id, deterministic in the study seed.
//!
//! Ids: `trig` (fixed smooth trigonometric field), `smooth` (seeded random
//! plane-wave field), `poly<d>` (seeded random polynomial field of degree d),
//! `singular<alpha>` (reduced-regularity field `|x − x₀|^α ·` smooth with
//! `x₀ = (0.5, 0.5)`), `zero`.

use vem::field::{self, AnalyticField2, AnalyticField3};

pub fn field2(id: &str, seed: u64) -> Result<AnalyticField2, String> {
    if id == "trig" {
        return Ok(field::trig2());
    }
    if id == "smooth" {
        return Ok(field::random_smooth2(seed));
    }
    if id == "zero" {
        return Ok(AnalyticField2 {
            eval: Box::new(|_, _| [0.0, 0.0]),
            rot: Box::new(|_, _| 0.0),
            div: Box::new(|_, _| 0.0),
        });
    }
    if let Some(d) = id.strip_prefix("poly") {
        let degree: usize = d.parse().map_err(|_| format!("bad polynomial degree in '{id}'"))?;
        return Ok(field::from_poly2(field::random_poly2(degree, seed)));
    }
    if let Some(a) = id.strip_prefix("singular") {
        let alpha: f64 = a.parse().map_err(|_| format!("bad exponent in '{id}'"))?;
        return Ok(field::singular2(alpha, [0.5, 0.5]));
    }
    Err(format!("unknown 2D field id '{id}'"))
}

pub fn field3(id: &str, seed: u64) -> Result<AnalyticField3, String> {
    if id == "trig" {
        return Ok(field::trig3());
    }
    if id == "smooth" {
        return Ok(field::random_smooth3(seed));
    }
    if id == "zero" {
        return Ok(AnalyticField3 {
            eval: Box::new(|_, _, _| [0.0; 3]),
            curl: Box::new(|_, _, _| [0.0; 3]),
            div: Box::new(|_, _, _| 0.0),
        });
    }
    if let Some(d) = id.strip_prefix("poly") {
        let degree: usize = d.parse().map_err(|_| format!("bad polynomial degree in '{id}'"))?;
        return Ok(field::from_poly3(field::random_poly3(degree, seed)));
    }
    Err(format!("unknown 3D field id '{id}'"))
}
