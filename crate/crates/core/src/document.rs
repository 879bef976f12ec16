//! JSON exchange format for dive plans.
//!
//! Quantities a plan could not determine (an unsolved request) are written as
//! `null`. Stage durations appear in seconds and in scaled time; when a
//! document is read back the seconds are authoritative.

use serde::{Deserialize, Serialize};

use crate::dynamics::BodyParams;
use crate::error::{DiveError, Result};
use crate::plan::{DivePlan, PlannerKind, StageTimes};

pub const SCHEMA_VERSION: u32 = 1;

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn or_nan(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSection {
    pub m: f64,
    pub n: f64,
    /// Total flight time in seconds.
    pub t_tot: f64,
    /// Body with the planned rotor momentum.
    pub body: BodyParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessSection {
    pub delta: f64,
    pub gamma: f64,
    pub rho: Option<f64>,
    pub beta: Option<f64>,
    pub nu: f64,
    /// I₁/l in seconds.
    pub time_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSection {
    /// sin of the maximal tilt.
    pub s: Option<f64>,
    /// sin of the minimal tilt of the twisting orbit.
    pub s_minus: Option<f64>,
    pub h: Option<f64>,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSection {
    pub index: u8,
    pub rotor_on: bool,
    pub rho_signed: Option<f64>,
    pub duration: Option<f64>,
    pub duration_scaled: Option<f64>,
    pub phi: Option<f64>,
    pub psi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledTimesSection {
    pub that1: Option<f64>,
    pub that2: Option<f64>,
    pub that3: Option<f64>,
    pub that_tot: Option<f64>,
    pub phi2: Option<f64>,
    pub p3_hat: Option<f64>,
    pub phi3_period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySection {
    pub feasible: bool,
    pub violation: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub schema_version: u32,
    pub planner: PlannerKind,
    pub request: RequestSection,
    pub dimensionless: DimensionlessSection,
    pub solution: SolutionSection,
    pub stages: Vec<StageSection>,
    pub scaled_times: ScaledTimesSection,
    pub feasibility: FeasibilitySection,
    pub terminal_sign: i8,
}

impl PlanDocument {
    /// `t_tot` is the requested total time, which an unsolved plan cannot
    /// reproduce from its stages.
    pub fn from_plan(p: &DivePlan, t_tot: f64) -> Self {
        let d = p.dimensionless();
        let scaled = p.scaled_durations();
        let stages = (0..5)
            .map(|k| {
                let rho = p.stage_rho(k + 1);
                StageSection {
                    index: (k + 1) as u8,
                    rotor_on: k == 1 || k == 3,
                    rho_signed: finite(rho),
                    duration: finite(p.durations[k]),
                    duration_scaled: finite(scaled[k]),
                    phi: finite(p.phi[k]),
                    psi: finite(p.psi[k]),
                }
            })
            .collect();
        let t = &p.times;
        PlanDocument {
            schema_version: SCHEMA_VERSION,
            planner: p.kind,
            request: RequestSection { m: p.m, n: p.n, t_tot, body: p.body },
            dimensionless: DimensionlessSection {
                delta: d.delta,
                gamma: d.gamma,
                rho: finite(p.rho),
                beta: finite(p.beta),
                nu: d.nu,
                time_scale: d.time_scale,
            },
            solution: SolutionSection { s: finite(p.s), s_minus: finite(p.s_minus), h: finite(p.h), l: p.body.l },
            stages,
            scaled_times: ScaledTimesSection {
                that1: finite(t.that1),
                that2: finite(t.that2),
                that3: finite(t.that3),
                that_tot: finite(t.that_tot),
                phi2: finite(t.phi2),
                p3_hat: finite(t.p3_hat),
                phi3_period: finite(t.phi3_period),
            },
            feasibility: FeasibilitySection {
                feasible: p.feasible,
                violation: p.violation.clone(),
                warnings: p.warnings.clone(),
            },
            terminal_sign: p.terminal_sign,
        }
    }

    /// Rebuilds the plan. Stage durations come from the `duration` fields.
    pub fn to_plan(&self) -> Result<DivePlan> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(DiveError::InvalidParams(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.stages.len() != 5 {
            return Err(DiveError::InvalidParams(format!("a plan has 5 stages, found {}", self.stages.len())));
        }
        self.request.body.validate()?;
        let mut durations = [0.0; 5];
        let mut phi = [0.0; 5];
        let mut psi = [0.0; 5];
        for (k, st) in self.stages.iter().enumerate() {
            if st.index as usize != k + 1 {
                return Err(DiveError::InvalidParams(format!("stage {} listed in position {}", st.index, k + 1)));
            }
            durations[k] = or_nan(st.duration);
            phi[k] = or_nan(st.phi);
            psi[k] = or_nan(st.psi);
        }
        let t = &self.scaled_times;
        let times = StageTimes {
            that1: or_nan(t.that1),
            that2: or_nan(t.that2),
            that3: or_nan(t.that3),
            that_tot: or_nan(t.that_tot),
            phi2: or_nan(t.phi2),
            p3_hat: or_nan(t.p3_hat),
            phi3_period: or_nan(t.phi3_period),
            feasible: self.feasibility.feasible,
        };
        let body = self.request.body;
        Ok(DivePlan {
            kind: self.planner,
            m: self.request.m,
            n: self.request.n,
            body,
            s: or_nan(self.solution.s),
            s_minus: or_nan(self.solution.s_minus),
            beta: or_nan(self.dimensionless.beta),
            rho: or_nan(self.dimensionless.rho),
            h: or_nan(self.solution.h),
            times,
            durations,
            phi,
            psi,
            feasible: self.feasibility.feasible,
            violation: self.feasibility.violation.clone(),
            warnings: self.feasibility.warnings.clone(),
            terminal_sign: self.terminal_sign,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DiveError::InvalidParams(format!("invalid plan document: {e}")))
    }
}
