//! Dive requests and plans shared by the symmetric and general planners.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{derive_dimensionless, BodyParams, DimensionlessParams};
use crate::error::{DiveError, Result};
use crate::roots::{brent, RootOptions};
use crate::{gen_planner, sym_planner};

/// Human-diver ballparks. Exceeding them is a warning, not an error.
pub const H_BALLPARK: f64 = 8.0 * PI;
pub const L_BALLPARK: f64 = 50.0 * PI;
pub const T_TOT_BALLPARK: (f64, f64) = (0.8, 3.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiveRequest {
    /// Somersaults, a positive multiple of 1/2.
    pub m: f64,
    /// Twists, a multiple of 1/2 and at least 1/2.
    pub n: f64,
    /// Total flight time in seconds.
    pub t_tot: f64,
    pub body: BodyParams,
}

fn is_half_integer_multiple(x: f64) -> bool {
    (2.0 * x - (2.0 * x).round()).abs() < 1e-12
}

impl DiveRequest {
    pub fn new(m: f64, n: f64, t_tot: f64, body: BodyParams) -> Result<Self> {
        let r = Self { m, n, t_tot, body };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) || !is_half_integer_multiple(self.m) {
            return Err(DiveError::InvalidParams(format!("m = {} must be a positive multiple of 1/2", self.m)));
        }
        if !(self.n >= 0.5) || !is_half_integer_multiple(self.n) {
            return Err(DiveError::InvalidParams(format!("n = {} must be a multiple of 1/2 and >= 1/2", self.n)));
        }
        if !(self.t_tot > 0.0) || !self.t_tot.is_finite() {
            return Err(DiveError::InvalidParams(format!("T_tot = {} must be positive", self.t_tot)));
        }
        self.body.check_planner_regime()
    }

    /// l·T_tot/I₁
    pub fn scaled_total_time(&self) -> f64 {
        self.body.l * self.t_tot / self.body.i1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Symmetric,
    General,
}

/// Scaled stage durations and the somersault of the rotor-on stage, as
/// given by the master equation and the feasibility condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTimes {
    pub that1: f64,
    pub that2: f64,
    pub that3: f64,
    pub that_tot: f64,
    pub phi2: f64,
    /// Scaled period of the rotor-off twist.
    pub p3_hat: f64,
    /// Somersault per twist period.
    pub phi3_period: f64,
    pub feasible: bool,
}

/// A complete five-stage dive: pure somersault, rotor on, twisting, rotor on
/// with the appropriate sign, pure somersault.
#[derive(Debug, Clone, PartialEq)]
pub struct DivePlan {
    pub kind: PlannerKind,
    pub m: f64,
    pub n: f64,
    /// Body with the rotor momentum set to the planned `h` (and the solved
    /// `l` when the rotor was prescribed).
    pub body: BodyParams,
    /// sin θ_max: the maximal tilt reached at the end of the rotor-on stage.
    pub s: f64,
    /// sin θ_min of the rotor-off twisting orbit (equals `s` when δ = 0).
    pub s_minus: f64,
    pub beta: f64,
    /// Rotor strength magnitude h/l; stage signs come from [`DivePlan::stage_rho`].
    pub rho: f64,
    pub h: f64,
    pub times: StageTimes,
    /// Physical stage durations in seconds (T₄ = T₂, T₅ = T₁).
    pub durations: [f64; 5],
    /// Somersault per stage (rad).
    pub phi: [f64; 5],
    /// Twist per stage (rad).
    pub psi: [f64; 5],
    pub feasible: bool,
    pub violation: Option<String>,
    pub warnings: Vec<String>,
    /// +1 when the dive ends with L = l(1, 0, 0), −1 for l(−1, 0, 0).
    pub terminal_sign: i8,
}

impl DivePlan {
    pub fn dimensionless(&self) -> DimensionlessParams {
        derive_dimensionless(&self.body)
    }

    /// Half-integer twist counts end facing the other way.
    pub fn is_half_integer_twist(&self) -> bool {
        ((self.n - self.n.floor()) - 0.5).abs() < 1e-9
    }

    /// Signed rotor strength of stage `i` (1-based). Stage 2 uses −ρ so that
    /// tilt and twist come out positive; stage 4 reverses the rotor for
    /// integer n and repeats it for half-integer n.
    pub fn stage_rho(&self, i: usize) -> f64 {
        match i {
            2 => -self.rho,
            4 if self.is_half_integer_twist() => -self.rho,
            4 => self.rho,
            _ => 0.0,
        }
    }

    /// Scaled stage durations, taken from the physical `durations` so that
    /// an edited plan is replayed as edited.
    pub fn scaled_durations(&self) -> [f64; 5] {
        let d = self.dimensionless();
        self.durations.map(|t| d.to_scaled_time(t))
    }

    /// A rotor-off dive of `m` somersaults and no twist, split into five
    /// stages with the rotor stages empty. Mostly useful as a baseline for
    /// the simulator.
    pub fn pure_somersault(m: f64, body: BodyParams) -> Self {
        let body = body.with_h(0.0);
        let d = derive_dimensionless(&body);
        let that1 = PI * m;
        let times = StageTimes {
            that1,
            that2: 0.0,
            that3: 0.0,
            that_tot: 2.0 * that1,
            phi2: 0.0,
            p3_hat: f64::INFINITY,
            phi3_period: f64::INFINITY,
            feasible: true,
        };
        let t1 = d.to_physical_time(that1);
        DivePlan {
            kind: if d.is_symmetric() { PlannerKind::Symmetric } else { PlannerKind::General },
            m,
            n: 0.0,
            body,
            s: 0.0,
            s_minus: 0.0,
            beta: 0.0,
            rho: 0.0,
            h: 0.0,
            times,
            durations: [t1, 0.0, 0.0, 0.0, t1],
            phi: [that1, 0.0, 0.0, 0.0, that1],
            psi: [0.0; 5],
            feasible: true,
            violation: None,
            warnings: Vec::new(),
            terminal_sign: 1,
        }
    }
}

/// Agreement between a closed form and its defining integral over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck {
    pub name: &'static str,
    pub max_abs_diff: f64,
    /// Grid point with the largest disagreement.
    pub worst_at: f64,
    pub samples: usize,
    /// Points where the closed form could not be evaluated at all.
    pub undefined: usize,
}

/// Tolerance a closed form must meet to be used.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

impl ClosedFormCheck {
    pub fn new(name: &'static str) -> Self {
        Self { name, max_abs_diff: 0.0, worst_at: f64::NAN, samples: 0, undefined: 0 }
    }

    pub(crate) fn record(&mut self, at: f64, closed: f64, oracle: f64) {
        self.samples += 1;
        let diff = (closed - oracle).abs();
        if !diff.is_finite() {
            self.undefined += 1;
        } else if diff > self.max_abs_diff {
            self.max_abs_diff = diff;
            self.worst_at = at;
        }
    }

    pub(crate) fn record_undefined(&mut self) {
        self.samples += 1;
        self.undefined += 1;
    }

    /// Agreement wherever the closed form is defined.
    pub fn passed(&self) -> bool {
        self.samples > self.undefined && self.max_abs_diff <= CLOSED_FORM_TOL
    }
}

impl std::fmt::Display for ClosedFormCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: max |closed - quadrature| = {:.3e} (at {:.4}), {} samples",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.max_abs_diff,
            self.worst_at,
            self.samples
        )?;
        if self.undefined > 0 {
            write!(f, ", undefined at {} of them", self.undefined)?;
        }
        Ok(())
    }
}

pub(crate) fn ballpark_warnings(body: &BodyParams, t_tot: f64, h: f64) -> Vec<String> {
    let mut w = Vec::new();
    if h > H_BALLPARK {
        w.push(format!("rotor momentum h = {h:.4} exceeds the human ballpark 8*pi = {H_BALLPARK:.4}"));
    }
    if body.l > L_BALLPARK {
        w.push(format!("angular momentum l = {:.4} exceeds the human ballpark 50*pi = {L_BALLPARK:.4}", body.l));
    }
    if t_tot < T_TOT_BALLPARK.0 || t_tot > T_TOT_BALLPARK.1 {
        w.push(format!("total time {t_tot} s is outside the ballpark [{}, {}] s", T_TOT_BALLPARK.0, T_TOT_BALLPARK.1));
    }
    w
}

/// Fills the physical and per-stage fields of a plan from its stage times.
#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble_plan(
    kind: PlannerKind,
    req: &DiveRequest,
    body: BodyParams,
    s: f64,
    s_minus: f64,
    rho: f64,
    times: StageTimes,
    mut warnings: Vec<String>,
) -> DivePlan {
    let body = body.with_h(rho * body.l);
    let d = derive_dimensionless(&body);
    let h = rho * body.l;
    warnings.extend(ballpark_warnings(&body, req.t_tot, h));
    let scaled = [times.that1, times.that2, times.that3, times.that2, times.that1];
    let durations = scaled.map(|t| d.to_physical_time(t));
    let twist_stage = 2.0 * PI * (req.n - 0.5);
    let phi3 = times.phi3_period * (req.n - 0.5);
    let feasible = times.feasible;
    let violation = (!feasible).then(|| {
        format!(
            "T1 < 0: scaled pure-somersault time {:.6} is negative; {} twists need more tilt than s = {:.6} provides",
            times.that1, req.n, s
        )
    });
    let half = ((req.n - req.n.floor()) - 0.5).abs() < 1e-9;
    DivePlan {
        kind,
        m: req.m,
        n: req.n,
        body,
        s,
        s_minus,
        beta: rho / d.gamma,
        rho,
        h,
        times,
        durations,
        phi: [times.that1, times.phi2, phi3, times.phi2, times.that1],
        psi: [0.0, FRAC_PI_2, twist_stage, FRAC_PI_2, 0.0],
        feasible,
        violation,
        warnings,
        terminal_sign: if half { -1 } else { 1 },
    }
}

/// A plan that could not be solved: carries the request and the reason.
pub(crate) fn unsolved_plan(kind: PlannerKind, req: &DiveRequest, reason: String) -> DivePlan {
    let nan = f64::NAN;
    let times = StageTimes {
        that1: nan,
        that2: nan,
        that3: nan,
        that_tot: req.scaled_total_time(),
        phi2: nan,
        p3_hat: nan,
        phi3_period: nan,
        feasible: false,
    };
    DivePlan {
        kind,
        m: req.m,
        n: req.n,
        body: req.body,
        s: nan,
        s_minus: nan,
        beta: nan,
        rho: nan,
        h: nan,
        times,
        durations: [nan; 5],
        phi: [nan; 5],
        psi: [nan; 5],
        feasible: false,
        violation: Some(reason),
        warnings: ballpark_warnings(&req.body, req.t_tot, 0.0),
        terminal_sign: 1,
    }
}

/// Plans with the symmetric planner when I₁ = I₂ and the general one
/// otherwise. The angular momentum `l` is given; the rotor is solved for.
pub fn plan(req: &DiveRequest) -> Result<DivePlan> {
    let d = derive_dimensionless(&req.body);
    if d.is_symmetric() {
        sym_planner::plan_dive(req)
    } else {
        gen_planner::plan_dive_general(req)
    }
}

enum RotorNeed {
    /// Less tilt than the root brackets resolve: effectively no rotor.
    Negligible,
    Value(f64),
    /// More tilt than any admissible orbit provides.
    Unreachable,
}

fn rotor_need(req: &DiveRequest) -> Result<RotorNeed> {
    let d = derive_dimensionless(&req.body);
    let that_tot = req.scaled_total_time();
    if that_tot <= 2.0 * PI * req.m {
        return Ok(RotorNeed::Negligible);
    }
    if d.is_symmetric() {
        let target = that_tot - 2.0 * PI * req.m;
        if target <= 2.0 * sym_planner::t2_minus_phi2(sym_planner::S_BRACKET_LO)? {
            return Ok(RotorNeed::Negligible);
        }
        if target >= 2.0 * sym_planner::t2_minus_phi2(sym_planner::S_BRACKET_HI)? {
            return Ok(RotorNeed::Unreachable);
        }
        let s = sym_planner::solve_tilt_for_ttot(that_tot, req.m)?;
        return Ok(RotorNeed::Value(sym_planner::beta_from_tilt(s)? * d.gamma));
    }
    match gen_planner::solve_s_minus_for_ttot(that_tot, req.m, req.n, d.gamma, d.delta) {
        Ok((s, _)) => Ok(RotorNeed::Value(gen_planner::rho_from_s_minus(s, d.gamma, d.delta)?)),
        Err(DiveError::NoRoot(_)) => {
            let s_lo = gen_planner::min_tilt_general(req.m, req.n, d.gamma, d.delta)?;
            let at_lo = gen_planner::total_time_general(s_lo, req.m, req.n, d.gamma, d.delta)?;
            Ok(if that_tot < at_lo { RotorNeed::Negligible } else { RotorNeed::Unreachable })
        }
        Err(e) => Err(e),
    }
}

/// Plans with the rotor momentum `body.h()` fixed and solves for the
/// angular momentum l (the value in `body.l` is ignored).
pub fn plan_for_rotor(m: f64, n: f64, t_tot: f64, body: BodyParams) -> Result<DivePlan> {
    let h = body.h();
    if !(h > 0.0) {
        return Err(DiveError::InvalidParams(format!("rotor momentum h = {h} must be positive")));
    }
    let base = DiveRequest { m, n, t_tot, body };
    base.validate()?;
    let request = |l: f64| DiveRequest { body: body.with_l(l), ..base };
    // ρ needed by the master equation minus the ρ = h/l provided
    let mismatch = |l: f64| -> Result<f64> {
        Ok(match rotor_need(&request(l))? {
            RotorNeed::Negligible => -h / l,
            RotorNeed::Value(rho) => rho - h / l,
            RotorNeed::Unreachable => 1e6,
        })
    };
    let l_min = 2.0 * PI * m * body.i1 / t_tot;
    let mut lo = l_min * (1.0 + 1e-12);
    let mut hi = 2.0 * l_min;
    let mut grown = 0;
    while mismatch(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        grown += 1;
        if grown > 60 {
            return Err(DiveError::NoRoot(format!("no angular momentum matches rotor momentum h = {h}")));
        }
    }
    let l = brent(mismatch, lo, hi, RootOptions { x_tol: 1e-12 * hi, max_iter: 200 })?;
    let mut p = plan(&request(l))?;
    if p.rho.is_finite() && (p.rho * l - h).abs() > 1e-8 * h.max(1.0) {
        p.warnings.push(format!("solved l = {l} reproduces h only to {:e}", (p.rho * l - h).abs()));
    }
    Ok(p)
}
