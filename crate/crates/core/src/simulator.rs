//! Replays dive plans by integrating the switched equations of motion.
//!
//! The integrated state is the unit momentum L/l on the sphere together with
//! the accumulated somersault φ and twist ψ, `y = (L₁, L₂, L₃, φ, ψ)`. Tilt
//! is read off as θ = asin L₃. This chart has no singularity anywhere on a
//! dive trajectory, unlike the Euler-angle equations.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use nalgebra::Vector3;

use crate::dynamics::{energy_unit, eom_momentum_scaled, AngleState, DimensionlessParams, MomentumState};
use crate::error::{DiveError, Result};
use crate::ode::{Crossing, DenseSegment, Dopri5, Event, OdeOptions};
use crate::plan::DivePlan;

pub const STATE_DIM: usize = 5;
pub type State = [f64; STATE_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Target for |g| at a located event.
    pub event_tol: f64,
    /// Longest scaled time an event stop may search.
    pub horizon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, event_tol: 1e-10, horizon: 1e3 }
    }
}

impl Tolerances {
    fn ode(&self) -> OdeOptions {
        OdeOptions { rtol: self.rtol, atol: self.atol, ..OdeOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    RotorOff,
    RotorOn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageStop {
    /// Run for a fixed scaled time.
    Duration(f64),
    /// Stop when the twist ψ reaches the given value.
    TwistCrossing(f64),
    /// Stop when θ′ changes sign (a tilt turning point).
    TiltTurning,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSpec {
    /// Stage number 1..=5.
    pub index: u8,
    pub kind: StageKind,
    pub rho_signed: f64,
    pub stop: StageStop,
}

impl StageSpec {
    pub fn rotor_off(index: u8, stop: StageStop) -> Self {
        Self { index, kind: StageKind::RotorOff, rho_signed: 0.0, stop }
    }

    pub fn rotor_on(index: u8, rho_signed: f64, stop: StageStop) -> Result<Self> {
        if rho_signed == 0.0 || !rho_signed.is_finite() {
            return Err(DiveError::InvalidParams(format!("rotor-on stage needs rho != 0, got {rho_signed}")));
        }
        Ok(Self { index, kind: StageKind::RotorOn, rho_signed, stop })
    }
}

/// Integrator state at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub tau: f64,
    pub y: State,
}

impl SimState {
    /// Pure somersault about the first axis: L = l(1, 0, 0).
    pub fn pure_somersault() -> Self {
        Self { tau: 0.0, y: [1.0, 0.0, 0.0, 0.0, 0.0] }
    }

    pub fn l_hat(&self) -> Vector3<f64> {
        Vector3::new(self.y[0], self.y[1], self.y[2])
    }

    pub fn phi(&self) -> f64 {
        self.y[3]
    }

    pub fn psi(&self) -> f64 {
        self.y[4]
    }

    pub fn theta(&self) -> f64 {
        self.y[2].clamp(-1.0, 1.0).asin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub stage: u8,
    pub y: State,
    pub energy: f64,
}

impl Sample {
    pub fn state(&self) -> SimState {
        SimState { tau: self.tau, y: self.y }
    }

    pub fn angles(&self) -> AngleState {
        let s = self.state();
        AngleState::new(s.phi(), s.theta(), s.psi())
    }

    /// Physical momentum for total momentum `l` and rotor momentum `h`.
    pub fn momentum(&self, l: f64, h: f64) -> MomentumState {
        MomentumState::new(self.state().l_hat() * l, h)
    }
}

/// One accepted integrator step with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySegment {
    pub stage: u8,
    pub rho_signed: f64,
    pub dense: DenseSegment<STATE_DIM>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub segments: Vec<TrajectorySegment>,
    /// Body parameters with the rotor off; segments carry their own ρ.
    pub params: DimensionlessParams,
    /// Scale applied to L in exports.
    pub l: f64,
}

/// Right-hand side in the momentum-sphere chart.
pub fn stage_rhs(d: DimensionlessParams) -> impl Fn(&State) -> State {
    move |y: &State| {
        let l = Vector3::new(y[0], y[1], y[2]);
        let dl = eom_momentum_scaled(&l, &d);
        let cos2 = 1.0 - y[2] * y[2];
        let dphi = 1.0 + (d.delta * y[1] * y[1] - d.rho_hat * y[1]) / cos2;
        let dpsi = d.gamma * y[2] - d.delta * y[2] * y[1] * y[1] / cos2 + d.rho_hat * y[2] * y[1] / cos2;
        [dl[0], dl[1], dl[2], dphi, dpsi]
    }
}

fn sample(tau: f64, stage: u8, y: State, d: &DimensionlessParams) -> Sample {
    let l = Vector3::new(y[0], y[1], y[2]);
    Sample { tau, stage, y, energy: energy_unit(&l, d) }
}

impl Trajectory {
    pub fn new(params: DimensionlessParams) -> Self {
        Self { samples: Vec::new(), segments: Vec::new(), params: params.rotor_off(), l: 1.0 }
    }

    pub fn start(&self) -> Option<SimState> {
        self.samples.first().map(Sample::state)
    }

    pub fn end(&self) -> Option<SimState> {
        self.samples.last().map(Sample::state)
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.tau - a.tau,
            _ => 0.0,
        }
    }

    /// Appends `other`, dropping its first sample when it repeats our last.
    pub fn append(&mut self, mut other: Trajectory) {
        if let (Some(last), Some(first)) = (self.samples.last(), other.samples.first()) {
            if last.tau == first.tau {
                other.samples.remove(0);
            }
        }
        self.samples.extend(other.samples);
        self.segments.extend(other.segments);
    }

    /// Dense state at scaled time `tau`.
    pub fn state_at(&self, tau: f64) -> Option<State> {
        let segs = &self.segments;
        if segs.is_empty() || tau < segs[0].dense.t0 || tau > segs[segs.len() - 1].dense.t1() {
            return self.samples.iter().find(|s| s.tau == tau).map(|s| s.y);
        }
        let i = segs.partition_point(|s| s.dense.t1() < tau).min(segs.len() - 1);
        Some(segs[i].dense.eval(tau))
    }

    /// Samples of stage `i`.
    pub fn stage_samples(&self, i: u8) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.stage == i)
    }

    /// Largest |E − E₀| and ||L̂| − 1| within each stage, measured from the
    /// state at which the stage began.
    pub fn conservation_drift(&self) -> ([f64; 5], [f64; 5]) {
        let mut e = [0.0; 5];
        let mut n = [0.0; 5];
        let mut current: Option<(u8, f64)> = None;
        for seg in &self.segments {
            let k = (seg.stage.clamp(1, 5) - 1) as usize;
            let d = self.params.with_rho(seg.rho_signed);
            let start = seg.dense.start();
            let e0 = match current {
                Some((stage, e0)) if stage == seg.stage => e0,
                _ => {
                    let e0 = energy_unit(&Vector3::new(start[0], start[1], start[2]), &d);
                    current = Some((seg.stage, e0));
                    e0
                }
            };
            for y in [start, seg.dense.end()] {
                let l = Vector3::new(y[0], y[1], y[2]);
                e[k] = f64::max(e[k], (energy_unit(&l, &d) - e0).abs());
                n[k] = f64::max(n[k], (l.norm() - 1.0).abs());
            }
        }
        (e, n)
    }

    /// CSV with columns tau, phi, theta, psi, L1, L2, L3, E, stage. L is
    /// scaled by `self.l`; tau and E are the scaled time and energy.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,phi,theta,psi,L1,L2,L3,E,stage")?;
        for s in &self.samples {
            let st = s.state();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                s.tau,
                st.phi(),
                st.theta(),
                st.psi(),
                s.y[0] * self.l,
                s.y[1] * self.l,
                s.y[2] * self.l,
                s.energy,
                s.stage
            )?;
        }
        Ok(())
    }
}

/// Integrates one stage from `start`.
pub fn integrate_stage(
    start: &SimState,
    spec: &StageSpec,
    d: &DimensionlessParams,
    tol: &Tolerances,
) -> Result<Trajectory> {
    if spec.kind == StageKind::RotorOff && spec.rho_signed != 0.0 {
        return Err(DiveError::InvalidParams("rotor-off stage with nonzero rho".into()));
    }
    let ds = d.with_rho(spec.rho_signed);
    let mut traj = Trajectory::new(*d);
    traj.samples.push(sample(start.tau, spec.index, start.y, &ds));
    let mut stepper = Dopri5::new(stage_rhs(ds), start.tau, start.y, tol.ode());
    let (segs, fired, horizon) = match spec.stop {
        StageStop::Duration(tau) => {
            if !(tau >= 0.0) {
                return Err(DiveError::InvalidParams(format!("stage duration {tau} is negative")));
            }
            if tau == 0.0 {
                return Ok(traj);
            }
            let (segs, _) = stepper.advance::<fn(&State) -> f64>(start.tau + tau, None)?;
            (segs, true, tau)
        }
        StageStop::TwistCrossing(target) => {
            let ev =
                Event { g: move |y: &State| target - y[4], crossing: Crossing::Falling, t_tol: 1e-15, g_tol: 1e-14 };
            let (segs, fired) = stepper.advance(start.tau + tol.horizon, Some(&ev))?;
            (segs, fired, tol.horizon)
        }
        StageStop::TiltTurning => {
            let (delta, rho_hat) = (ds.delta, ds.rho_hat);
            // L₃′ = L₁(δL₂ − ρ̂) has the sign of θ′
            let ev = Event {
                g: move |y: &State| y[0] * (delta * y[1] - rho_hat),
                crossing: Crossing::Either,
                t_tol: 1e-15,
                g_tol: 1e-14,
            };
            let (segs, fired) = stepper.advance(start.tau + tol.horizon, Some(&ev))?;
            (segs, fired, tol.horizon)
        }
    };
    if !fired {
        return Err(DiveError::EventNotFound { horizon });
    }
    for seg in segs {
        traj.samples.push(sample(seg.t1(), spec.index, seg.end(), &ds));
        traj.segments.push(TrajectorySegment { stage: spec.index, rho_signed: spec.rho_signed, dense: seg });
    }
    if let Some(last) = traj.samples.last_mut() {
        // land exactly on the integrator's final state and time
        last.tau = stepper.t();
        last.y = stepper.y();
    }
    Ok(traj)
}

/// End-to-end check of a plan.
#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub phi_total: f64,
    pub psi_total: f64,
    /// |Δφ − 2πm|
    pub phi_error: f64,
    /// |Δψ − 2πn|
    pub psi_error: f64,
    /// Largest energy drift within each stage.
    pub energy_drift: [f64; 5],
    /// Largest ||L/l| − 1| within each stage.
    pub norm_drift: [f64; 5],
    pub theta_final: f64,
    /// Sign of L₁ at the end (+1 or −1).
    pub terminal_sign: i8,
    /// cos ψ at the end of stage 2; zero when the planned duration lands on
    /// the turning point exactly.
    pub stage2_turning_gap: f64,
    pub trajectory: Trajectory,
}

impl ClosureReport {
    pub fn closes_within(&self, tol: f64) -> bool {
        self.phi_error <= tol && self.psi_error <= tol
    }
}

/// Runs the five stages of a plan with the plan's durations and rotor signs.
pub fn simulate_plan(plan: &DivePlan, d: &DimensionlessParams, tol: &Tolerances) -> Result<ClosureReport> {
    if !plan.feasible {
        return Err(DiveError::InvalidParams(format!(
            "plan is infeasible: {}",
            plan.violation.as_deref().unwrap_or("unspecified")
        )));
    }
    let base = d.rotor_off();
    let durations = plan.scaled_durations();
    let mut traj = Trajectory::new(base);
    traj.l = plan.body.l;
    let mut state = SimState::pure_somersault();
    traj.samples.push(sample(0.0, 1, state.y, &base));
    let mut stage2_gap = 0.0;
    for (k, &tau) in durations.iter().enumerate() {
        let i = (k + 1) as u8;
        let rho = plan.stage_rho(i as usize);
        let spec = if rho == 0.0 {
            StageSpec::rotor_off(i, StageStop::Duration(tau))
        } else {
            StageSpec::rotor_on(i, rho, StageStop::Duration(tau))?
        };
        let part = integrate_stage(&state, &spec, &base, tol)?;
        if let Some(end) = part.end() {
            state = end;
        }
        if i == 2 {
            stage2_gap = state.psi().cos();
        }
        traj.append(part);
    }
    let start = traj.start().expect("trajectory has a start sample");
    let end = traj.end().expect("trajectory has an end sample");
    let phi_total = end.phi() - start.phi();
    let psi_total = end.psi() - start.psi();
    let (energy_drift, norm_drift) = traj.conservation_drift();
    Ok(ClosureReport {
        phi_total,
        psi_total,
        phi_error: (phi_total - 2.0 * PI * plan.m).abs(),
        psi_error: (psi_total - 2.0 * PI * plan.n).abs(),
        energy_drift,
        norm_drift,
        theta_final: end.theta(),
        terminal_sign: if end.y[0] >= 0.0 { 1 } else { -1 },
        stage2_turning_gap: stage2_gap,
        trajectory: traj,
    })
}

/// Elapsed time and somersault of the rotor-on arc from pure somersault to
/// the twist ψ = π/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transit {
    pub t2: f64,
    pub phi2: f64,
    pub end: SimState,
}

/// Integrates stage 2 to its turning point. The rotor runs with −|ρ| so
/// that tilt and twist increase.
pub fn transit_oracle(d: &DimensionlessParams, tol: &Tolerances) -> Result<Transit> {
    if !(d.rho != 0.0) {
        return Err(DiveError::InvalidParams("transit needs the rotor on".into()));
    }
    let spec = StageSpec::rotor_on(2, -d.rho.abs(), StageStop::TwistCrossing(FRAC_PI_2))?;
    let start = SimState::pure_somersault();
    let traj = integrate_stage(&start, &spec, &d.rotor_off(), tol)?;
    let end = traj.end().expect("stage has an end sample");
    Ok(Transit { t2: end.tau, phi2: end.phi(), end })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sym_planner;

    fn symmetric() -> DimensionlessParams {
        DimensionlessParams::new(19.0, 0.0, 0.0)
    }

    #[test]
    fn pure_somersault_stage() {
        let spec = StageSpec::rotor_off(1, StageStop::Duration(2.5));
        let t = integrate_stage(&SimState::pure_somersault(), &spec, &symmetric(), &Tolerances::default()).unwrap();
        let end = t.end().unwrap();
        assert!((end.phi() - 2.5).abs() < 1e-13);
        assert!(t.samples.iter().all(|s| s.y[2] == 0.0 && s.y[4] == 0.0));
    }

    #[test]
    fn symmetric_transit_matches_planner() {
        let s = 0.14;
        let rho = sym_planner::beta_from_tilt(s).unwrap() * 19.0;
        let d = DimensionlessParams::new(19.0, 0.0, rho);
        let tr = transit_oracle(&d, &Tolerances::default()).unwrap();
        assert!((tr.t2 - sym_planner::t2_hat(s, 19.0).unwrap()).abs() < 1e-8);
        assert!((tr.phi2 - sym_planner::phi2(s, 19.0).unwrap()).abs() < 1e-8);
        assert!((tr.end.y[2] - s).abs() < 1e-8);
    }

    #[test]
    fn symmetric_twist_period() {
        let s: f64 = 0.3;
        let p3 = 2.0 * PI / (19.0 * s);
        let start = SimState { tau: 0.0, y: [0.0, -(1.0 - s * s).sqrt(), s, 0.0, FRAC_PI_2] };
        let spec = StageSpec::rotor_off(3, StageStop::Duration(p3));
        let t = integrate_stage(&start, &spec, &symmetric(), &Tolerances::default()).unwrap();
        let end = t.end().unwrap();
        assert!((end.psi() - FRAC_PI_2 - 2.0 * PI).abs() < 1e-8);
        assert!((end.phi() - p3).abs() < 1e-8);
    }

    #[test]
    fn state_at_interpolates() {
        let spec = StageSpec::rotor_on(2, -0.2, StageStop::Duration(1.0)).unwrap();
        let t = integrate_stage(&SimState::pure_somersault(), &spec, &symmetric(), &Tolerances::default()).unwrap();
        let mid = t.samples[t.samples.len() / 2];
        let y = t.state_at(mid.tau).unwrap();
        assert!((y[0] - mid.y[0]).abs() < 1e-12);
        assert!(t.state_at(5.0).is_none());
    }

    #[test]
    fn event_horizon_reported() {
        let spec = StageSpec::rotor_off(3, StageStop::TwistCrossing(FRAC_PI_2));
        let tol = Tolerances { horizon: 1.0, ..Tolerances::default() };
        let r = integrate_stage(&SimState::pure_somersault(), &spec, &symmetric(), &tol);
        assert!(matches!(r, Err(DiveError::EventNotFound { .. })));
    }

    #[test]
    fn rotor_spec_validation() {
        assert!(StageSpec::rotor_on(2, 0.0, StageStop::TiltTurning).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let spec = StageSpec::rotor_off(1, StageStop::Duration(0.5));
        let t = integrate_stage(&SimState::pure_somersault(), &spec, &symmetric(), &Tolerances::default()).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "tau,phi,theta,psi,L1,L2,L3,E,stage");
        assert_eq!(lines.count(), t.samples.len());
    }
}
