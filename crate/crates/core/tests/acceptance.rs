//! Acceptance run: one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use dive_core::dynamics::{BodyParams, DimensionlessParams};
use dive_core::elliptic::{ellip_e, ellip_k, ellip_pi, quad_defining_integral, DefiningIntegral};
use dive_core::gen_planner::{self, TiltBand};
use dive_core::phase::verify_phase_decomposition;
use dive_core::plan::{plan, DivePlan, DiveRequest, PlannerKind};
use dive_core::simulator::{
    integrate_stage, simulate_plan, transit_oracle, ClosureReport, SimState, StageSpec, StageStop, Tolerances,
};
use dive_core::sym_planner;

const GAMMA: f64 = 19.0;
const I1: f64 = 20.0;
const I3: f64 = 1.0;

type Outcome = Result<String, String>;

struct Run {
    failed: usize,
}

impl Run {
    fn check(&mut self, id: u8, title: &str, budget_s: f64, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let slow = if secs > budget_s { format!(" (over the {budget_s} s budget)") } else { String::new() };
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {title}: {detail} [{secs:.2} s{slow}]"),
            Err(detail) => {
                self.failed += 1;
                println!("criterion {id:>2} FAIL  {title}: {detail} [{secs:.2} s{slow}]");
            }
        }
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn trapezoid_quarter(f: impl Fn(f64) -> f64) -> f64 {
    const N: usize = 4096;
    let h = PI / N as f64;
    0.5 * h * (0..N).map(|j| f(j as f64 * h)).sum::<f64>()
}

fn expansion_a() -> Outcome {
    let a = (2.0 * ellip_e(0.5).map_err(err)? - ellip_k(0.5).map_err(err)?) / (2f64.sqrt() * PI);
    let g = |s: f64| -> Result<f64, String> {
        let q = quad_defining_integral(DefiningIntegral::T2MinusPhi2Symmetric { s }).map_err(err)?;
        Ok(2.0 * q.value / (2.0 * PI))
    };
    let (s, h) = (1e-3, 1e-4);
    let slope = (g(s + h)? - g(s - h)?) / (2.0 * h);
    verdict(
        (a - 0.1907).abs() <= 1e-4 && (slope - 0.1907).abs() <= 1e-3,
        format!("A = {a:.6}, quadrature slope at s = 1e-3 is {slope:.6}"),
    )
}

fn expansion_b() -> Outcome {
    let b = 2f64.sqrt() * ellip_k(0.5).map_err(err)? / PI - 0.5;
    let mut worst: f64 = 0.0;
    for n in 1..=5 {
        let exact = sym_planner::min_tilt(1.5, n as f64, GAMMA).map_err(err)?;
        let est = (b + n as f64) / (1.5 * GAMMA);
        worst = worst.max((exact - est).abs() / exact);
    }
    verdict(
        (b - 0.3346).abs() <= 1e-4 && worst <= 0.05,
        format!("B = {b:.6}, worst relative gap of (B+n)/(m gamma) to the exact minimal tilt {:.2}%", 100.0 * worst),
    )
}

fn ballpark_beta() -> Outcome {
    let beta = sym_planner::beta_from_tilt(0.14).map_err(err)?;
    verdict((beta - 0.0099).abs() <= 1e-4, format!("beta(0.14) = {beta:.6}"))
}

fn oracle_adjudication() -> Outcome {
    let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() };
    let (mut t2_quad, mut t2_ode, mut phi_ode, mut legendre): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for s in [0.02, 0.05, 0.1, 0.14, 0.3, 0.6] {
        let closed = sym_planner::t2_hat(s, GAMMA).map_err(err)?;
        let quad = quad_defining_integral(DefiningIntegral::T2Symmetric { s, gamma: GAMMA }).map_err(err)?.value;
        let phi_quad = quad_defining_integral(DefiningIntegral::Phi2Symmetric { s, gamma: GAMMA }).map_err(err)?.value;
        let rho = sym_planner::beta_from_tilt(s).map_err(err)? * GAMMA;
        let tr = transit_oracle(&DimensionlessParams::new(GAMMA, 0.0, rho), &tol).map_err(err)?;
        t2_quad = t2_quad.max((closed - quad).abs());
        t2_ode = t2_ode.max((tr.t2 - closed).abs()).max((tr.t2 - quad).abs());
        phi_ode = phi_ode.max((tr.phi2 - phi_quad).abs());
        legendre = legendre.max(match sym_planner::phi2_legendre(s, GAMMA) {
            Ok(v) => (v - phi_quad).abs(),
            Err(_) => f64::INFINITY,
        });
    }
    let fast = if legendre <= 1e-9 { "pass" } else { "fail" };
    verdict(
        t2_quad <= 1e-9 && t2_ode <= 1e-8 && phi_ode <= 1e-8,
        format!(
            "T2 closed vs quadrature {t2_quad:.2e}, ODE vs both {t2_ode:.2e}, phi2 quadrature vs ODE {phi_ode:.2e}; \
             Legendre phi2 fast path {fast} ({legendre:.2e})"
        ),
    )
}

fn worst_drift(reps: &[ClosureReport]) -> f64 {
    reps.iter().flat_map(|r| r.energy_drift.iter().chain(r.norm_drift.iter())).cloned().fold(0.0, f64::max)
}

/// A request a little above the minimal tilt, with flight time m seconds.
fn symmetric_request(m: f64, n: f64) -> Result<DiveRequest, String> {
    let s = 1.15 * sym_planner::min_tilt(m, n, GAMMA).map_err(err)?;
    let that_tot = 2.0 * PI * m + 2.0 * sym_planner::t2_minus_phi2(s).map_err(err)?;
    let t_tot = m;
    let body = BodyParams::new(I1, I1, I3, that_tot * I1 / t_tot).map_err(err)?;
    DiveRequest::new(m, n, t_tot, body).map_err(err)
}

fn general_request(delta: f64, n: f64) -> Result<DiveRequest, String> {
    let m = 1.5;
    let s = 1.15 * gen_planner::min_tilt_general(m, n, GAMMA, delta).map_err(err)?;
    let that_tot = gen_planner::total_time_general(s, m, n, GAMMA, delta).map_err(err)?;
    let body = BodyParams::new(I1, I1 / (1.0 + delta), I3, that_tot * I1 / m).map_err(err)?;
    DiveRequest::new(m, n, m, body).map_err(err)
}

fn close(req: &DiveRequest) -> Result<(DivePlan, ClosureReport), String> {
    let p = plan(req).map_err(err)?;
    if !p.feasible {
        return Err(format!("m = {}, n = {} infeasible: {:?}", req.m, req.n, p.violation));
    }
    let rep = simulate_plan(&p, &p.dimensionless(), &Tolerances::default()).map_err(err)?;
    Ok((p, rep))
}

fn symmetric_closure(reps: &mut Vec<ClosureReport>) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (m, n) in [(1.5, 1.0), (1.5, 2.0), (1.5, 3.0), (1.0, 1.0), (2.5, 2.0)] {
        let (p, rep) = close(&symmetric_request(m, n)?)?;
        ok &= rep.closes_within(1e-4) && p.kind == PlannerKind::Symmetric;
        lines.push(format!("({m},{n}) l = {:.2}: {:.1e}/{:.1e}", p.body.l, rep.phi_error, rep.psi_error));
        reps.push(rep);
    }
    verdict(ok, format!("somersault/twist errors {}", lines.join(", ")))
}

fn general_closure(reps: &mut Vec<ClosureReport>) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for delta in [-0.1, -0.4] {
        for n in [1.0, 2.0] {
            let (p, rep) = close(&general_request(delta, n)?)?;
            ok &= rep.closes_within(1e-4) && p.kind == PlannerKind::General;
            lines.push(format!("delta {delta} n {n}: {:.1e}/{:.1e}", rep.phi_error, rep.psi_error));
            reps.push(rep);
        }
    }
    // trends with |δ| at fixed m = 3/2, n = 2
    let n = 2.0;
    let s0 = sym_planner::min_tilt(1.5, n, GAMMA).map_err(err)?;
    let t0 = 3.0 * PI + 2.0 * sym_planner::t2_minus_phi2(s0).map_err(err)?;
    let mut tilts = vec![s0];
    let mut totals = vec![t0];
    for delta in [-0.1, -0.4] {
        let s = gen_planner::min_tilt_general(1.5, n, GAMMA, delta).map_err(err)?;
        tilts.push(s);
        totals.push(gen_planner::total_time_general(s, 1.5, n, GAMMA, delta).map_err(err)?);
    }
    let trends = tilts.windows(2).all(|w| w[1] < w[0]) && totals.windows(2).all(|w| w[1] > w[0]);
    verdict(
        ok && trends,
        format!(
            "errors {}; minimal tilt {:.4} > {:.4} > {:.4}, total time there {:.3} < {:.3} < {:.3}",
            lines.join(", "),
            tilts[0],
            tilts[1],
            tilts[2],
            totals[0],
            totals[1],
            totals[2]
        ),
    )
}

fn symmetric_reduction() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in [0.02, 0.05, 0.1, 0.14, 0.3, 0.6] {
        let band = TiltBand::from_s_minus(s, 0.0).map_err(err)?;
        let rho = gen_planner::rho_from_s_minus(s, GAMMA, 0.0).map_err(err)?;
        let d = DimensionlessParams::new(GAMMA, 0.0, rho);
        let g = gen_planner::stage_times_general(&band, &d, 1.5, 2.0).map_err(err)?;
        let y = sym_planner::stage_times(s, GAMMA, 1.5, 2.0).map_err(err)?;
        let p3 = 2.0 * PI / (GAMMA * s);
        let beta = sym_planner::beta_from_tilt(s).map_err(err)?;
        for (a, b) in [
            (band.s_plus, s),
            (rho, beta * GAMMA),
            (g.p3_hat, p3),
            (g.phi3_period, g.p3_hat),
            (g.that2, y.that2),
            (g.phi2, y.phi2),
            (g.that1, y.that1),
            (g.that3, y.that3),
            (g.that_tot, y.that_tot),
        ] {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    verdict(worst <= 1e-8, format!("largest general/symmetric mismatch at nu = 0 is {worst:.2e}"))
}

fn phase_identity() -> Outcome {
    let tol = Tolerances { rtol: 1e-12, atol: 1e-14, ..Tolerances::default() };
    let mut sym: f64 = 0.0;
    let d = DimensionlessParams::new(GAMMA, 0.0, 0.0);
    for theta in [0.05f64, 0.14, 0.3] {
        let start = SimState { tau: 0.0, y: [theta.cos(), 0.0, theta.sin(), 0.0, 0.0] };
        let spec = StageSpec::rotor_off(3, StageStop::Duration(2.0 * PI / (GAMMA * theta.sin())));
        let traj = integrate_stage(&start, &spec, &d, &tol).map_err(err)?;
        sym = sym.max(verify_phase_decomposition(&traj, &d).map_err(err)?.residual.abs());
    }
    let mut gen: f64 = 0.0;
    for (delta, s_minus) in [(-0.1, 0.1f64), (-0.4, 0.12), (-0.4, 0.4)] {
        let d = DimensionlessParams::new(GAMMA, delta, 0.0);
        let start = SimState { tau: 0.0, y: [(1.0 - s_minus * s_minus).sqrt(), 0.0, s_minus, 0.0, 0.0] };
        let spec = StageSpec::rotor_off(3, StageStop::TwistCrossing(2.0 * PI));
        let traj = integrate_stage(&start, &spec, &d, &tol).map_err(err)?;
        gen = gen.max(verify_phase_decomposition(&traj, &d).map_err(err)?.residual.abs());
    }
    let switched = {
        let (d, rho) = (DimensionlessParams::new(GAMMA, -0.4, 0.0), 1.0);
        let on = StageSpec::rotor_on(2, -rho, StageStop::TiltTurning).map_err(err)?;
        let mut traj = integrate_stage(&SimState::pure_somersault(), &on, &d, &tol).map_err(err)?;
        let t2 = traj.duration();
        let off = StageSpec::rotor_off(3, StageStop::TwistCrossing(FRAC_PI_2 + 3.0 * PI));
        traj.append(integrate_stage(&traj.end().unwrap(), &off, &d, &tol).map_err(err)?);
        let back = StageSpec::rotor_on(4, rho, StageStop::Duration(t2)).map_err(err)?;
        traj.append(integrate_stage(&traj.end().unwrap(), &back, &d, &tol).map_err(err)?);
        verify_phase_decomposition(&traj, &d).map_err(err)?.residual.abs()
    };
    verdict(
        sym <= 1e-8 && gen <= 1e-6 && switched <= 1e-6,
        format!("residual symmetric {sym:.2e}, general {gen:.2e}, switched loop rho = 1 {switched:.2e}"),
    )
}

fn elliptic_layer() -> Outcome {
    let mut grid = vec![0.0];
    grid.extend((1..10).map(|i| i as f64 / 10.0));
    grid.push(0.99);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let mut worst: f64 = 0.0;
    for &m in &grid {
        let w = |t: f64| 1.0 - m * t.sin().powi(2);
        worst = worst.max(rel(ellip_k(m).map_err(err)?, trapezoid_quarter(|t| 1.0 / w(t).sqrt())));
        worst = worst.max(rel(ellip_e(m).map_err(err)?, trapezoid_quarter(|t| w(t).sqrt())));
        for n in [-5.0, -1.0, -0.1, 0.0, 0.5, 0.9] {
            let pi = trapezoid_quarter(|t| 1.0 / ((1.0 - n * t.sin().powi(2)) * w(t).sqrt()));
            worst = worst.max(rel(ellip_pi(n, m).map_err(err)?, pi));
        }
    }
    let mut legendre: f64 = 0.0;
    for i in 1..100 {
        let m = i as f64 / 100.0;
        let (k, kp) = (ellip_k(m).map_err(err)?, ellip_k(1.0 - m).map_err(err)?);
        let (e, ep) = (ellip_e(m).map_err(err)?, ellip_e(1.0 - m).map_err(err)?);
        legendre = legendre.max((e * kp + ep * k - k * kp - FRAC_PI_2).abs());
    }
    verdict(
        worst <= 1e-12 && legendre <= 1e-12,
        format!("K/E/Pi vs trapezoid {worst:.2e} relative, Legendre relation {legendre:.2e}"),
    )
}

fn main() -> ExitCode {
    let mut run = Run { failed: 0 };
    let mut reps = Vec::new();
    run.check(1, "small-tilt constant A", 1.0, expansion_a);
    run.check(2, "small-tilt constant B", 5.0, expansion_b);
    run.check(3, "ballpark rotor strength", 1.0, ballpark_beta);
    run.check(4, "closed forms against oracles", 30.0, oracle_adjudication);
    run.check(5, "symmetric closure", 60.0, || symmetric_closure(&mut reps));
    let symmetric_runs = reps.len();
    run.check(6, "general closure and trends", 120.0, || general_closure(&mut reps));
    run.check(7, "reduction at nu = 0", 10.0, symmetric_reduction);
    run.check(8, "phase decomposition", 60.0, phase_identity);
    run.check(9, "conservation", 1.0, || {
        let worst = worst_drift(&reps);
        verdict(
            worst <= 1e-9 && reps.len() > symmetric_runs,
            format!("largest per-stage energy or |L| drift over {} dives {worst:.2e}", reps.len()),
        )
    });
    run.check(10, "elliptic layer", 5.0, elliptic_layer);
    println!();
    println!("closed-form candidates against quadrature (only passing forms are used by the planners):");
    for c in sym_planner::closed_form_report().into_iter().chain(gen_planner::closed_form_report()).flatten() {
        println!("  {c}");
    }
    if run.failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria fail", run.failed);
        ExitCode::FAILURE
    }
}
