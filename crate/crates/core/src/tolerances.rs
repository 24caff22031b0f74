//! Named thresholds used by the geometric pipelines.

use serde::{Deserialize, Serialize};

/// Chart orientation fixing the complex structure: `Positive` means
/// J du = dv in every chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(&self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// All thresholds are scale-free where meaningful: the comparison divides by
/// (1 + relevant magnitude).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// mu below umbilic * (1 + |alpha|) flags an umbilic point.
    pub umbilic: f64,
    /// |H| at or below this is a minimal point.
    pub minimal: f64,
    /// |lambda| below lambda * (1 + |H|) degenerates the xi-frame.
    pub lambda: f64,
    /// superconformal_residual gate for "is a circle".
    pub superconformal_gate: f64,
    /// smallest singular value of [eta xi] must exceed this.
    pub independence: f64,
    /// |(H)^Lambda| must exceed this.
    pub lambda_component: f64,
    /// relative singular-value threshold for numerical ranks.
    pub rank: f64,
    /// verify_duality pass/fail gate on residual maxima.
    pub duality: f64,
    /// classification fit residual gate.
    pub classify_fit: f64,
    /// grids with a larger excluded fraction fail with DegenerateCoverage.
    pub coverage: f64,
    /// base step for the Willmore finite-difference stencil.
    pub willmore_fd_step: f64,
    /// Willmore residual gate.
    pub willmore_gate: f64,
    /// S-Willmore residual gate.
    pub s_willmore_gate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            umbilic: 1e-8,
            minimal: 1e-8,
            lambda: 1e-8,
            superconformal_gate: 1e-8,
            independence: 1e-8,
            lambda_component: 1e-10,
            rank: 1e-7,
            duality: 1e-6,
            classify_fit: 1e-5,
            coverage: 0.10,
            willmore_fd_step: 1e-2,
            willmore_gate: 1e-5,
            s_willmore_gate: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("umbilic", self.umbilic),
            ("minimal", self.minimal),
            ("lambda", self.lambda),
            ("superconformal_gate", self.superconformal_gate),
            ("independence", self.independence),
            ("lambda_component", self.lambda_component),
            ("rank", self.rank),
            ("duality", self.duality),
            ("classify_fit", self.classify_fit),
            ("coverage", self.coverage),
            ("willmore_fd_step", self.willmore_fd_step),
            ("willmore_gate", self.willmore_gate),
            ("s_willmore_gate", self.s_willmore_gate),
        ];
        for (name, value) in fields {
            if !(value > 0.0) {
                return Err(format!("tolerances.{name} must be positive"));
            }
        }
        Ok(())
    }
}
