//! The per-level error/rate table and its CSV/JSON serializations.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub level: usize,
    pub h_max: f64,
    pub n_cells: usize,
    pub l2_interp: f64,
    pub rate_l2: Option<f64>,
    pub diff_err: f64,
    pub rate_diff: Option<f64>,
    pub proj_surrogate: f64,
    pub rate_proj: Option<f64>,
    pub stab_ratio_min: f64,
    pub stab_ratio_max: f64,
    pub assumption_min_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorTable {
    pub rows: Vec<Row>,
    pub config: serde_json::Value,
    /// Oracle accuracy gate at the coarsest level (2D convergence studies):
    /// aggregated oracle self-error and the interpolation error it must stay
    /// below (1%).
    pub oracle_self_error: Option<f64>,
    pub oracle_gate_reference: Option<f64>,
    /// Fan refinement level actually used after the gate.
    pub oracle_r_used: Option<usize>,
    /// Mass-form consistency ratios recorded in stability mode.
    pub mass_ratio_min: Option<f64>,
    pub mass_ratio_max: Option<f64>,
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

impl ErrorTable {
    pub fn compute_rates(rows: &mut [Row]) {
        for i in 1..rows.len() {
            let rate = |a: f64, b: f64| -> Option<f64> {
                if a > 0.0 && b > 0.0 {
                    Some((a / b).log2())
                } else {
                    None
                }
            };
            rows[i].rate_l2 = rate(rows[i - 1].l2_interp, rows[i].l2_interp);
            rows[i].rate_diff = rate(rows[i - 1].diff_err, rows[i].diff_err);
            rows[i].rate_proj = rate(rows[i - 1].proj_surrogate, rows[i].proj_surrogate);
        }
    }

    /// Observed rate between the two finest levels for a metric column.
    pub fn finest_rate(&self, metric: impl Fn(&Row) -> Option<f64>) -> Option<f64> {
        self.rows.last().and_then(metric)
    }

    pub fn to_csv(&self, timestamp: bool) -> String {
        let mut out = String::new();
        if timestamp {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            out.push_str(&format!("# generated_at_unix: {now}\n"));
        }
        out.push_str(
            "level,h_max,n_cells,L2_interp,rate_L2,diff_err,rate_diff,proj_surrogate,rate_proj,stab_ratio_min,stab_ratio_max,assumption_min_ratio\n",
        );
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.level,
                fmt(r.h_max),
                r.n_cells,
                fmt(r.l2_interp),
                opt(r.rate_l2),
                fmt(r.diff_err),
                opt(r.rate_diff),
                fmt(r.proj_surrogate),
                opt(r.rate_proj),
                fmt(r.stab_ratio_min),
                fmt(r.stab_ratio_max),
                fmt(r.assumption_min_ratio),
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialization cannot fail")
    }
}
