use std::f64::consts::{FRAC_PI_2, PI};

use dive_core::dynamics::{BodyParams, DimensionlessParams};
use dive_core::gen_planner::{s_minus_from_rho, twist_period_and_somersault, TiltBand};
use dive_core::phase::{dynamic_phase, solid_angle, verify_phase_decomposition};
use dive_core::plan::{plan, DiveRequest};
use dive_core::simulator::{integrate_stage, simulate_plan, SimState, StageSpec, StageStop, Tolerances, Trajectory};

#[test]
fn general_twist_period_identity() {
    let (gamma, delta) = (19.0, -0.4);
    let d = DimensionlessParams::new(gamma, delta, 0.0);
    let band = TiltBand::from_s_minus(0.12, delta / gamma).unwrap();
    let c = (1.0 - band.s_minus * band.s_minus).sqrt();
    let start = SimState { tau: 0.0, y: [c, 0.0, band.s_minus, 0.0, 0.0] };
    let spec = StageSpec::rotor_off(3, StageStop::TwistCrossing(2.0 * PI));
    let traj = integrate_stage(&start, &spec, &d, &Tolerances::default()).unwrap();
    let p = verify_phase_decomposition(&traj, &d).unwrap();
    let stage = twist_period_and_somersault(&band, gamma).unwrap();
    assert!((traj.duration() - stage.p3_hat).abs() < 1e-8);
    assert!((p.total_delta_phi - stage.phi3).abs() < 1e-6);
    let e = 0.5 * (1.0 + gamma * band.s_minus * band.s_minus);
    assert!((p.dynamic_phase - 2.0 * e * stage.p3_hat).abs() < 1e-8);
    assert!((stage.phi3 - (p.dynamic_phase - p.geometric_phase)).abs() < 1e-6);
    assert!(p.residual.abs() < 1e-8, "{}", p.residual);
}

/// Stage 2 with −ρ to the turning point, 3/2 twist periods, stage 4 with +ρ.
fn switched_loop(d: &DimensionlessParams, rho: f64) -> Trajectory {
    let tol = Tolerances::default();
    let s2 = StageSpec::rotor_on(2, -rho, StageStop::TiltTurning).unwrap();
    let mut traj = integrate_stage(&SimState::pure_somersault(), &s2, d, &tol).unwrap();
    let t2 = traj.duration();
    let s3 = StageSpec::rotor_off(3, StageStop::TwistCrossing(FRAC_PI_2 + 3.0 * PI));
    let part = integrate_stage(&traj.end().unwrap(), &s3, d, &tol).unwrap();
    traj.append(part);
    let s4 = StageSpec::rotor_on(4, rho, StageStop::Duration(t2)).unwrap();
    let part = integrate_stage(&traj.end().unwrap(), &s4, d, &tol).unwrap();
    traj.append(part);
    traj
}

#[test]
fn switched_loop_identity() {
    let (gamma, delta, rho) = (19.0, -0.4, 1.0);
    let d = DimensionlessParams::new(gamma, delta, 0.0);
    let traj = switched_loop(&d, rho);
    let end = traj.end().unwrap();
    assert!(end.y[2].abs() < 1e-8);
    assert!((end.y[0] - 1.0).abs() < 1e-8);
    assert!((end.psi() - 4.0 * PI).abs() < 1e-8);
    let p = verify_phase_decomposition(&traj, &d).unwrap();
    assert!(p.residual.abs() <= 1e-6, "{}", p.residual);
    // the rotor breaks L·Ω = 2E on the switched arcs
    let e = 0.5;
    assert!((p.dynamic_phase - 2.0 * e * traj.duration()).abs() > 1e-3);
    let s_minus = s_minus_from_rho(rho, gamma, delta).unwrap();
    assert!(s_minus > 0.0);
}

#[test]
fn mirrored_reverse_motion_keeps_phases() {
    let d = DimensionlessParams::new(19.0, -0.4, 0.0);
    let traj = switched_loop(&d, 1.0);
    let s = solid_angle(&traj).unwrap();
    let dyn_phase = dynamic_phase(&traj, &d).unwrap();
    // mirror L₂ → −L₂, ψ → −ψ and flip the rotor: the dive run backwards
    // from its end traces the mirror image with the same area and energy
    let tol = Tolerances::default();
    let end = traj.end().unwrap();
    let mut back = Trajectory::new(d);
    let mut state = SimState { tau: 0.0, y: [end.y[0], -end.y[1], end.y[2], 0.0, -end.y[4]] };
    let stages: Vec<(u8, f64, f64)> = {
        let mut v = Vec::new();
        for i in [4u8, 3, 2] {
            let segs: Vec<_> = traj.segments.iter().filter(|s| s.stage == i).collect();
            let dur = segs.last().unwrap().dense.t1() - segs[0].dense.t0;
            v.push((i, segs[0].rho_signed, dur));
        }
        v
    };
    for (i, rho, dur) in stages {
        let spec = if rho == 0.0 {
            StageSpec::rotor_off(i, StageStop::Duration(dur))
        } else {
            StageSpec::rotor_on(i, -rho, StageStop::Duration(dur)).unwrap()
        };
        let part = integrate_stage(&state, &spec, &d, &tol).unwrap();
        state = part.end().unwrap();
        back.append(part);
    }
    let s_back = solid_angle(&back).unwrap();
    let dyn_back = dynamic_phase(&back, &d).unwrap();
    assert!((s_back - s).abs() < 1e-6, "{s_back} vs {s}");
    assert!((dyn_back - dyn_phase).abs() < 1e-6);
    let p = verify_phase_decomposition(&back, &d).unwrap();
    assert!(p.residual.abs() <= 1e-6);
}

#[test]
fn planned_dives_decompose() {
    let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() };
    let sym = BodyParams::new(20.0, 20.0, 1.0, 40.5 * PI).unwrap();
    let gen = BodyParams::new(20.0, 20.0 / 0.6, 1.0, 44.0 * PI).unwrap();
    for (body, bound) in [(sym, 1e-8), (gen, 1e-6)] {
        let p = plan(&DiveRequest::new(1.5, 2.0, 1.5, body).unwrap()).unwrap();
        assert!(p.feasible, "{:?}", p.violation);
        let d = p.dimensionless();
        let rep = simulate_plan(&p, &d, &tol).unwrap();
        let dec = verify_phase_decomposition(&rep.trajectory, &d).unwrap();
        assert!(dec.residual.abs() <= bound, "residual {}", dec.residual);
        assert!((dec.total_delta_phi - 3.0 * PI).abs() < 1e-4);
    }
}

#[test]
fn half_and_three_half_somersaults_differ() {
    let d = DimensionlessParams::new(19.0, 0.0, 0.0);
    let tol = Tolerances::default();
    let totals: Vec<f64> = [0.5, 1.5]
        .iter()
        .map(|m| {
            let spec = StageSpec::rotor_off(1, StageStop::Duration(2.0 * PI * m));
            let traj = integrate_stage(&SimState::pure_somersault(), &spec, &d, &tol).unwrap();
            verify_phase_decomposition(&traj, &d).unwrap().total_delta_phi
        })
        .collect();
    assert!((totals[0] - PI).abs() < 1e-10);
    assert!((totals[1] - 3.0 * PI).abs() < 1e-10);
}
