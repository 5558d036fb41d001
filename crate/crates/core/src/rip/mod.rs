//! Restricted isometry constants: exact enumeration for canonical sparsity,
//! Monte Carlo lower bounds for the other models, the multiresolution check,
//! distance-preservation bounds, Gaussian widths and measurement-count
//! predictions.

mod distance;
mod empirical;
mod exact;
mod mrip;
mod predict;
mod width;

pub use distance::{distance_bound_check, weak_diff_classify, DiffVerdict, DistanceCheck, WeakDiffParams};
pub use empirical::{deviation_form, empirical_rip, empirical_rip_with_witness, project_lq_cap, EmpiricalOptions, Schedule};
pub use exact::{binomial, exact_rip_canonical, exact_rip_operator, EXACT_SUPPORT_LIMIT};
pub use mrip::{calibrate_mrip_delta, mrip_check, mrip_levels, mrip_threshold, MripOptions};
pub use predict::{
    calibrate_constant, gordon_m, implicit_log_cubed_m, predict_m, table1_m, PredictKind, Table1Row,
};
pub use width::{gaussian_width, WidthEstimate};

use serde::{Deserialize, Serialize};

use crate::sparsity::SparsityModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RipMethod {
    ExactEnumeration,
    MonteCarlo { trials: usize, ascent_steps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: i32,
    pub level_sparsity: f64,
    pub observed_sup: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipReport {
    pub delta_hat: f64,
    pub method: RipMethod,
    pub model: SparsityModel,
    pub m: usize,
    pub levels: Vec<LevelResult>,
}

impl RipReport {
    /// Overall multiresolution verdict; `None` for plain RIP reports.
    pub fn passed(&self) -> Option<bool> {
        if self.levels.is_empty() {
            None
        } else {
            Some(self.levels.iter().all(|l| l.pass))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
