//! Direct quadrature of the integrals that define the elliptic quantities.
//!
//! These are the reference values against which every closed form in the
//! crate is checked. Square-root endpoint singularities are removed
//! analytically before handing the integrand to the adaptive rule:
//!
//! * symmetric rotor-on stage: `z = sin θ`, then `z = s sin u`;
//! * general rotor-on stage: `z = sin θ̃`, split at `z₋/2`; `z − z₋ ∝ sin² v`
//!   near the simple root z₋ and `−z = z_d sinh² w` near the root pair
//!   `0, z_d = −2ρ̂/δ`, which merges as the rotor strength goes to zero;
//! * rotor-off twist period: integration in ψ, where the integrand is smooth
//!   and periodic.

use std::f64::consts::FRAC_PI_2;

use crate::error::{DiveError, Result};
use crate::quad::{integrate, QuadOptions, QuadValue};

/// Absolute error target promised by [`quad_defining_integral`].
pub const DEFINING_ABS_TOL: f64 = 1e-10;

/// Selector for [`quad_defining_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefiningIntegral {
    /// ∫₀^{π/2} dθ / √(1 − m sin²θ)
    LegendreK { m: f64 },
    /// ∫₀^{π/2} √(1 − m sin²θ) dθ
    LegendreE { m: f64 },
    /// ∫₀^{π/2} dθ / ((1 − n sin²θ) √(1 − m sin²θ))
    LegendrePi { n: f64, m: f64 },
    /// Scaled rotor-on time from pure somersault to maximal tilt, δ = 0.
    T2Symmetric { s: f64, gamma: f64 },
    /// Somersault accumulated over the same arc, δ = 0.
    Phi2Symmetric { s: f64, gamma: f64 },
    /// T̂₂ − φ₂ for δ = 0, which does not depend on γ. Integrated directly to
    /// avoid cancelling two 1/s poles at small tilt.
    T2MinusPhi2Symmetric { s: f64 },
    /// Scaled rotor-on time in the tri-axial case; `rho` is the rotor magnitude.
    T2General { gamma: f64, delta: f64, rho: f64 },
    /// Change of the tilde somersault angle φ̃ over the same arc.
    PhiTilde2General { gamma: f64, delta: f64, rho: f64 },
    /// Scaled period of the rotor-off twisting motion with minimal tilt `s_minus`.
    TwistPeriod { gamma: f64, delta: f64, s_minus: f64 },
    /// Somersault accumulated over one twist period.
    TwistSomersault { gamma: f64, delta: f64, s_minus: f64 },
}

fn opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, max_intervals: 4000 }
}

fn finish(r: QuadValue) -> Result<QuadValue> {
    if r.error > DEFINING_ABS_TOL || !r.value.is_finite() {
        return Err(DiveError::QuadratureNonConvergence { estimate: r.error, target: DEFINING_ABS_TOL });
    }
    Ok(r)
}

fn require(cond: bool, op: &'static str, detail: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(DiveError::domain(op, detail()))
    }
}

/// Roots of (γ − δ) z² − 2ρ̂ z − γ, returned as (negative, positive).
fn tilde_turning_roots(gamma: f64, delta: f64, rho_hat: f64) -> (f64, f64) {
    let disc = (rho_hat * rho_hat + gamma * (gamma - delta)).sqrt();
    let z_plus = (rho_hat + disc) / (gamma - delta);
    let z_minus = -gamma / (rho_hat + disc);
    (z_minus, z_plus)
}

fn check_general(gamma: f64, delta: f64, rho: f64) -> Result<()> {
    require(gamma > 0.0, "quad_defining_integral", || format!("gamma = {gamma} must be > 0"))?;
    require(delta <= 0.0 && delta > -1.0, "quad_defining_integral", || format!("delta = {delta} must lie in (-1, 0]"))?;
    require(rho > 0.0 && rho.is_finite(), "quad_defining_integral", || {
        format!("rotor strength rho = {rho} must be > 0")
    })
}

fn check_twist(gamma: f64, delta: f64, s_minus: f64) -> Result<()> {
    require(gamma > 0.0, "quad_defining_integral", || format!("gamma = {gamma} must be > 0"))?;
    require(delta <= 0.0 && delta > -1.0, "quad_defining_integral", || format!("delta = {delta} must lie in (-1, 0]"))?;
    require(s_minus > 0.0 && s_minus < 1.0, "quad_defining_integral", || {
        format!("s_minus = {s_minus} must lie in (0, 1) (s_minus = 0 is the separatrix)")
    })
}

/// Evaluates the selected defining integral by adaptive quadrature.
///
/// The returned error estimate is at most [`DEFINING_ABS_TOL`]; a larger
/// estimate is reported as [`DiveError::QuadratureNonConvergence`].
pub fn quad_defining_integral(kind: DefiningIntegral) -> Result<QuadValue> {
    use DefiningIntegral::*;
    match kind {
        LegendreK { m } => {
            require((0.0..1.0).contains(&m), "quad_defining_integral", || format!("m = {m}"))?;
            finish(integrate(|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, opts())?)
        }
        LegendreE { m } => {
            require((0.0..=1.0).contains(&m), "quad_defining_integral", || format!("m = {m}"))?;
            finish(integrate(|t: f64| (1.0 - m * t.sin().powi(2)).max(0.0).sqrt(), 0.0, FRAC_PI_2, opts())?)
        }
        LegendrePi { n, m } => {
            require((0.0..1.0).contains(&m) && n < 1.0, "quad_defining_integral", || format!("n = {n}, m = {m}"))?;
            finish(integrate(
                |t: f64| {
                    let s2 = t.sin().powi(2);
                    1.0 / ((1.0 - n * s2) * (1.0 - m * s2).sqrt())
                },
                0.0,
                FRAC_PI_2,
                opts(),
            )?)
        }
        T2Symmetric { s, gamma } | Phi2Symmetric { s, gamma } => {
            require(s > 0.0 && s < 1.0, "quad_defining_integral", || format!("s = {s} outside (0, 1)"))?;
            require(gamma > 0.0, "quad_defining_integral", || format!("gamma = {gamma} must be > 0"))?;
            // 4β²(1 − z²) − z⁴ = (s² − z²)(z² + c), c = 4β²/s² = s²/(1 − s²)
            let c = s * s / (1.0 - s * s);
            let time_only = matches!(kind, T2Symmetric { .. });
            finish(integrate(
                move |u: f64| {
                    let z = s * u.sin();
                    let base = 2.0 / (gamma * (z * z + c).sqrt());
                    if time_only {
                        base
                    } else {
                        // dφ/dτ = 1 − (γ/2) tan²θ
                        base * (1.0 - 0.5 * gamma * z * z / (1.0 - z * z))
                    }
                },
                0.0,
                FRAC_PI_2,
                opts(),
            )?)
        }
        T2MinusPhi2Symmetric { s } => {
            require(s > 0.0 && s < 1.0, "quad_defining_integral", || format!("s = {s} outside (0, 1)"))?;
            let c = s * s / (1.0 - s * s);
            finish(integrate(
                move |u: f64| {
                    let z = s * u.sin();
                    z * z / ((1.0 - z * z) * (z * z + c).sqrt())
                },
                0.0,
                FRAC_PI_2,
                opts(),
            )?)
        }
        T2General { gamma, delta, rho } | PhiTilde2General { gamma, delta, rho } => {
            check_general(gamma, delta, rho)?;
            let rho_hat = rho * (1.0 + delta);
            let (z_minus, z_plus) = tilde_turning_roots(gamma, delta, rho_hat);
            let time_only = matches!(kind, T2General { .. });
            let weight = move |z: f64| {
                if time_only {
                    1.0
                } else {
                    1.0 + delta + (rho_hat - 0.5 * delta) / (1.0 + z) - (rho_hat + 0.5 * delta) / (1.0 - z)
                }
            };
            // P(z) = (−z)(z − z₋) · (δz + 2ρ̂)(γ − δ)(z₊ − z), split at z₋/2
            let z_mid = 0.5 * z_minus;
            let span = z_mid - z_minus;
            let near_min = integrate(
                move |v: f64| {
                    let (sv, cv) = v.sin_cos();
                    let z = z_minus + span * sv * sv;
                    let rest = (-z) * (delta * z + 2.0 * rho_hat) * (gamma - delta) * (z_plus - z);
                    weight(z) * 2.0 * span.sqrt() * cv / rest.sqrt()
                },
                0.0,
                FRAC_PI_2,
                opts(),
            )?;
            let near_zero = if delta < 0.0 {
                // −z = z_d sinh²w absorbs the close pair of roots 0 and z_d = −2ρ̂/δ
                let z_d = -2.0 * rho_hat / delta;
                let w_max = (-z_mid / z_d).sqrt().asinh();
                integrate(
                    move |w: f64| {
                        let z = -z_d * w.sinh().powi(2);
                        let rest = -delta * (z - z_minus) * (gamma - delta) * (z_plus - z);
                        weight(z) * 2.0 / rest.sqrt()
                    },
                    0.0,
                    w_max,
                    opts(),
                )?
            } else {
                let depth = -z_mid;
                integrate(
                    move |v: f64| {
                        let (sv, cv) = v.sin_cos();
                        let z = -depth * sv * sv;
                        let rest = (z - z_minus) * 2.0 * rho_hat * (gamma - delta) * (z_plus - z);
                        weight(z) * 2.0 * depth.sqrt() * cv / rest.sqrt()
                    },
                    0.0,
                    FRAC_PI_2,
                    opts(),
                )?
            };
            finish(QuadValue { value: near_min.value + near_zero.value, error: near_min.error + near_zero.error })
        }
        TwistPeriod { gamma, delta, s_minus } | TwistSomersault { gamma, delta, s_minus } => {
            check_twist(gamma, delta, s_minus)?;
            let nu = delta / gamma;
            let s2 = s_minus * s_minus;
            let period_only = matches!(kind, TwistPeriod { .. });
            // quarter period, ψ ∈ [0, π/2]
            let quarter = integrate(
                move |psi: f64| {
                    let sp2 = psi.sin().powi(2);
                    let z = ((s2 - nu * sp2) / (1.0 - nu * sp2)).sqrt();
                    let dtau = 1.0 / (z * (gamma - delta * sp2));
                    if period_only {
                        dtau
                    } else {
                        (1.0 + delta * sp2) * dtau
                    }
                },
                0.0,
                FRAC_PI_2,
                opts(),
            )?;
            finish(QuadValue { value: 4.0 * quarter.value, error: 4.0 * quarter.error })
        }
    }
}
