//! Dive planning for a body with I₁ = I₂ (δ = 0).
//!
//! Everything here is a function of the maximal tilt `s = sin θ_max` reached
//! at the end of the rotor-on stage. The stage-2 time uses its closed form;
//! the stage-2 somersault uses its defining integral, with the Legendre form
//! kept as a checked fast path.

use std::f64::consts::PI;

use crate::dynamics::derive_dimensionless;
use crate::elliptic::{ellip_k, ellip_pi, quad_defining_integral, DefiningIntegral};
use crate::error::{DiveError, Result};
use crate::plan::{assemble_plan, unsolved_plan, ClosedFormCheck, DivePlan, DiveRequest, PlannerKind, StageTimes};
use crate::roots::{brent, RootOptions};

/// Lower end of the tilt bracket used by the root finders.
pub const S_BRACKET_LO: f64 = 1e-6;
/// Upper end of the tilt bracket.
pub const S_BRACKET_HI: f64 = 0.99;
/// Below this tilt the stage-2 time is treated as divergent.
pub const S_POLE: f64 = 1e-12;

/// √2 (2E(½) − K(½)) / 2π: slope of T̂_tot/2π in s at small tilt.
pub const A_SMALL_TILT: f64 = 0.190_686_271_006_286_73;
/// √2 K(½)/π − ½: offset of the minimal tilt approximation (B + n)/(mγ).
pub const B_SMALL_TILT: f64 = 0.334_626_854_340_966_6;

fn check_s(op: &'static str, s: f64) -> Result<()> {
    if !(0.0..1.0).contains(&s) {
        return Err(DiveError::domain(op, format!("s = {s} outside [0, 1)")));
    }
    if s <= S_POLE {
        return Err(DiveError::Divergence { op, detail: format!("s = {s}: pole at zero tilt") });
    }
    Ok(())
}

fn check_gamma(op: &'static str, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(DiveError::domain(op, format!("gamma = {gamma} must be > 0")));
    }
    Ok(())
}

/// sin θ_max from β = ρ/γ, using cos θ_max = √(β² + 1) − β.
pub fn tilt_from_beta(beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(DiveError::domain("tilt_from_beta", format!("beta = {beta} must be >= 0")));
    }
    if beta.is_infinite() {
        return Ok(1.0);
    }
    let root = beta.hypot(1.0);
    let c = 1.0 / (root + beta);
    // 1 − c, written without cancellation for small β
    let one_minus_c = beta * (1.0 - beta / (root + 1.0));
    Ok((one_minus_c * (1.0 + c)).sqrt())
}

/// β = s² / (2√(1 − s²)).
pub fn beta_from_tilt(s: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) {
        return Err(DiveError::domain("beta_from_tilt", format!("s = {s} outside [0, 1)")));
    }
    Ok(s * s / (2.0 * ((1.0 - s) * (1.0 + s)).sqrt()))
}

fn modulus_sq(s: f64) -> f64 {
    (1.0 - s * s) / (2.0 - s * s)
}

/// Scaled rotor-on time from pure somersault to maximal tilt:
/// T̂₂ = 2k K(k²)/(sγ), k² = (1 − s²)/(2 − s²).
pub fn t2_hat(s: f64, gamma: f64) -> Result<f64> {
    check_s("t2_hat", s)?;
    check_gamma("t2_hat", gamma)?;
    let m = modulus_sq(s);
    Ok(2.0 * m.sqrt() * ellip_k(m)? / (s * gamma))
}

/// Somersault accumulated during the rotor-on stage, by quadrature.
pub fn phi2(s: f64, gamma: f64) -> Result<f64> {
    check_s("phi2", s)?;
    check_gamma("phi2", gamma)?;
    Ok(t2_hat(s, gamma)? - t2_minus_phi2(s)?)
}

/// T̂₂ − φ₂, which depends on the tilt only.
pub fn t2_minus_phi2(s: f64) -> Result<f64> {
    check_s("t2_minus_phi2", s)?;
    Ok(quad_defining_integral(DefiningIntegral::T2MinusPhi2Symmetric { s })?.value)
}

/// Legendre form of φ₂:
/// (1/s)(k(1 + 2/γ)K(k²) − (k⁻¹ − k)Π(2 − k⁻², k²)).
pub fn phi2_legendre(s: f64, gamma: f64) -> Result<f64> {
    check_s("phi2_legendre", s)?;
    check_gamma("phi2_legendre", gamma)?;
    let m = modulus_sq(s);
    let k = m.sqrt();
    let big_k = ellip_k(m)?;
    let pi = ellip_pi(2.0 - 1.0 / m, m)?;
    Ok((k * (1.0 + 2.0 / gamma) * big_k - (1.0 / k - k) * pi) / s)
}

/// The same expression with the Π coefficient (k⁻¹ + k). Kept so the
/// closed-form report can show why it is not used.
pub fn phi2_legendre_plus(s: f64, gamma: f64) -> Result<f64> {
    check_s("phi2_legendre_plus", s)?;
    check_gamma("phi2_legendre_plus", gamma)?;
    let m = modulus_sq(s);
    let k = m.sqrt();
    let big_k = ellip_k(m)?;
    let pi = ellip_pi(2.0 - 1.0 / m, m)?;
    Ok((k * (1.0 + 2.0 / gamma) * big_k - (1.0 / k + k) * pi) / s)
}

/// Scaled twisting time for n twists: 2π(n − ½)/(γs).
pub fn t3_hat(s: f64, gamma: f64, n: f64) -> f64 {
    2.0 * PI * (n - 0.5) / (gamma * s)
}

/// Stage times and feasibility at a given tilt.
pub fn stage_times(s: f64, gamma: f64, m: f64, n: f64) -> Result<StageTimes> {
    let t2 = t2_hat(s, gamma)?;
    let diff = t2_minus_phi2(s)?;
    let phi2 = t2 - diff;
    let that3 = t3_hat(s, gamma, n);
    let that1 = 0.5 * (2.0 * PI * m - 2.0 * phi2 - that3);
    Ok(StageTimes {
        that1,
        that2: t2,
        that3,
        that_tot: 2.0 * PI * m + 2.0 * diff,
        phi2,
        p3_hat: 2.0 * PI / (gamma * s),
        phi3_period: 2.0 * PI / (gamma * s),
        feasible: that1 >= 0.0,
    })
}

/// Tilt that makes the total scaled time equal `that_tot` for `m`
/// somersaults.
pub fn solve_tilt_for_ttot(that_tot: f64, m: f64) -> Result<f64> {
    let target = that_tot - 2.0 * PI * m;
    if !(target > 0.0) {
        return Err(DiveError::NoRoot(format!(
            "zero-tilt: scaled total time {that_tot} does not exceed 2*pi*m = {}",
            2.0 * PI * m
        )));
    }
    let rhs = |s: f64| -> Result<f64> { Ok(2.0 * t2_minus_phi2(s)?) };
    let mut prev = rhs(S_BRACKET_LO)?;
    let lo_value = prev;
    const SAMPLES: usize = 64;
    let ratio = (S_BRACKET_HI / S_BRACKET_LO).powf(1.0 / SAMPLES as f64);
    let mut s = S_BRACKET_LO;
    for _ in 0..SAMPLES {
        s = (s * ratio).min(S_BRACKET_HI);
        let v = rhs(s)?;
        if !(v > prev) {
            return Err(DiveError::NoRoot(format!("master equation not monotone near s = {s}")));
        }
        prev = v;
    }
    if target < lo_value {
        return Err(DiveError::NoRoot(format!(
            "zero-tilt: required tilt is below {S_BRACKET_LO} (T_tot - 2*pi*m = {target:e})"
        )));
    }
    if target > prev {
        return Err(DiveError::NoRoot(format!("scaled total time {that_tot} needs tilt beyond s = {S_BRACKET_HI}")));
    }
    brent(|s| Ok(rhs(s)? - target), S_BRACKET_LO, S_BRACKET_HI, RootOptions::default())
}

/// Small-tilt approximation of the minimal tilt: (B + n)/(mγ).
pub fn min_tilt_estimate(m: f64, n: f64, gamma: f64) -> f64 {
    (B_SMALL_TILT + n) / (m * gamma)
}

/// Smallest tilt at which `n` twists fit into `m` somersaults (T̂₁ = 0).
pub fn min_tilt(m: f64, n: f64, gamma: f64) -> Result<f64> {
    if !(m > 0.0) || !(n >= 0.5) {
        return Err(DiveError::InvalidParams(format!("m = {m}, n = {n}")));
    }
    check_gamma("min_tilt", gamma)?;
    let f = |s: f64| -> Result<f64> { Ok(stage_times(s, gamma, m, n)?.that1) };
    // T̂₁ → −∞ as s → 0; scan outwards from the estimate for the first sign change.
    let mut lo = S_BRACKET_LO;
    if f(lo)? >= 0.0 {
        return Ok(lo);
    }
    let guess = min_tilt_estimate(m, n, gamma).clamp(S_BRACKET_LO, S_BRACKET_HI);
    let mut hi = (0.5 * guess).max(S_BRACKET_LO);
    loop {
        let v = f(hi)?;
        if v >= 0.0 {
            break;
        }
        lo = hi;
        if hi >= S_BRACKET_HI {
            return Err(DiveError::NoRoot(format!(
                "{n} twists in {m} somersaults are infeasible for every s < {S_BRACKET_HI}"
            )));
        }
        hi = (hi * 1.25).min(S_BRACKET_HI);
    }
    brent(f, lo, hi, RootOptions::default())
}

/// Plans a dive for a symmetric body (I₁ = I₂) with prescribed l.
pub fn plan_dive(req: &DiveRequest) -> Result<DivePlan> {
    req.validate()?;
    let d = derive_dimensionless(&req.body);
    if !d.is_symmetric() {
        return Err(DiveError::InvalidParams(format!("symmetric planner needs I1 = I2 (delta = {})", d.delta)));
    }
    let that_tot = req.scaled_total_time();
    let s = match solve_tilt_for_ttot(that_tot, req.m) {
        Ok(s) => s,
        Err(DiveError::NoRoot(reason)) => return Ok(unsolved_plan(PlannerKind::Symmetric, req, reason)),
        Err(e) => return Err(e),
    };
    let rho = beta_from_tilt(s)? * d.gamma;
    let times = stage_times(s, d.gamma, req.m, req.n)?;
    Ok(assemble_plan(PlannerKind::Symmetric, req, req.body, s, s, rho, times, Vec::new()))
}

/// Compares the Legendre forms against their defining integrals on
/// s ∈ [0.01, 0.9] for a few γ.
pub fn closed_form_report() -> Result<Vec<ClosedFormCheck>> {
    let mut t2 = ClosedFormCheck::new("symmetric T2 = 2kK/(s gamma)");
    let mut phi = ClosedFormCheck::new("symmetric phi2, Pi coefficient (1/k - k)");
    let mut phi_plus = ClosedFormCheck::new("symmetric phi2, Pi coefficient (1/k + k)");
    for &gamma in &[1.0, 5.0, 19.0] {
        for i in 0..=89 {
            let s = 0.01 + 0.01 * i as f64;
            let t2_quad = quad_defining_integral(DefiningIntegral::T2Symmetric { s, gamma })?.value;
            let phi_quad = quad_defining_integral(DefiningIntegral::Phi2Symmetric { s, gamma })?.value;
            t2.record(s, t2_hat(s, gamma)?, t2_quad);
            phi.record(s, phi2_legendre(s, gamma)?, phi_quad);
            phi_plus.record(s, phi2_legendre_plus(s, gamma)?, phi_quad);
        }
    }
    Ok(vec![t2, phi, phi_plus])
}
