//! Dive planning for a tri-axial body (I₃ < I₁ < I₂, δ < 0).
//!
//! The free parameter is `s₋ = sin θ_min`, the smallest tilt on the
//! rotor-off twisting orbit. It fixes the largest tilt `s₊`, the rotor
//! strength needed to reach that orbit, and every stage time.
//!
//! Stage quantities come from their defining integrals. Two Legendre-form
//! fast paths are provided per quantity: the forms as usually printed, and
//! forms re-derived from the quartic's roots. [`closed_form_report`] shows
//! which of them agree with the quadratures.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::{derive_dimensionless, DimensionlessParams};
use crate::elliptic::{ellip_k, ellip_pi, quad_defining_integral, DefiningIntegral};
use crate::error::{DiveError, Result};
use crate::plan::{assemble_plan, unsolved_plan, ClosedFormCheck, DivePlan, DiveRequest, PlannerKind, StageTimes};
use crate::roots::{brent, RootOptions};

/// Largest admissible parameter of the twist-stage K near the separatrix.
pub const SEPARATRIX_MARGIN: f64 = 1e-6;
pub const S_MINUS_HI: f64 = 0.99;
const SCAN_POINTS: usize = 120;

/// Minimal and maximal tilt of a rotor-off twisting orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltBand {
    pub s_minus: f64,
    pub s_plus: f64,
    /// δ/γ ≤ 0
    pub nu: f64,
}

/// s₊ = √((s₋² − ν)/(1 − ν)).
pub fn s_plus_from_s_minus(s_minus: f64, nu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s_minus) {
        return Err(DiveError::domain("s_plus_from_s_minus", format!("s_minus = {s_minus} outside [0, 1)")));
    }
    if !(nu <= 0.0) {
        return Err(DiveError::domain("s_plus_from_s_minus", format!("nu = {nu} must be <= 0")));
    }
    Ok(((s_minus * s_minus - nu) / (1.0 - nu)).sqrt())
}

impl TiltBand {
    pub fn from_s_minus(s_minus: f64, nu: f64) -> Result<Self> {
        let s_plus = s_plus_from_s_minus(s_minus, nu)?;
        Ok(Self { s_minus, s_plus, nu })
    }

    /// The orbit reached from pure somersault with rotor strength `rho`.
    pub fn from_rho(rho: f64, gamma: f64, delta: f64) -> Result<Self> {
        s_minus_from_rho(rho, gamma, delta).and_then(|s| Self::from_s_minus(s, delta / gamma))
    }

    /// cos θ_max
    pub fn cos_max(&self) -> f64 {
        ((1.0 - self.s_plus) * (1.0 + self.s_plus)).sqrt()
    }

    /// s₊² + (1 − s₊²)ν − s₋², zero for a consistent band.
    pub fn residual(&self) -> f64 {
        self.s_plus * self.s_plus + (1.0 - self.s_plus * self.s_plus) * self.nu - self.s_minus * self.s_minus
    }

    /// Modulus of the twist-stage integrals, (s₊ − s₋)/(s₊ + s₋).
    pub fn twist_modulus(&self) -> f64 {
        (self.s_plus - self.s_minus) / (self.s_plus + self.s_minus)
    }

    fn check_off_separatrix(&self, op: &'static str) -> Result<()> {
        if !(self.s_minus > 0.0) {
            return Err(DiveError::Separatrix(format!("{op}: s_minus = {} is on the separatrix", self.s_minus)));
        }
        Ok(())
    }
}

/// Rotor strength ρ = h/l whose stage-2 arc ends on the twisting orbit
/// with minimal tilt `s_minus`.
pub fn rho_from_s_minus(s_minus: f64, gamma: f64, delta: f64) -> Result<f64> {
    let band = TiltBand::from_s_minus(s_minus, delta / gamma)?;
    Ok(rho_hat(&band, gamma, delta) / (1.0 + delta))
}

/// ρ̂ = (γ − (γ − δ)c²)/(2c), c = cos θ_max.
fn rho_hat(band: &TiltBand, gamma: f64, delta: f64) -> f64 {
    let c = band.cos_max();
    (gamma - (gamma - delta) * c * c) / (2.0 * c)
}

/// Inverse of [`rho_from_s_minus`]. Rotors too weak to leave the
/// separatrix region are reported as [`DiveError::Separatrix`].
pub fn s_minus_from_rho(rho: f64, gamma: f64, delta: f64) -> Result<f64> {
    if !(rho > 0.0) || !(gamma > 0.0) || !(delta <= 0.0 && delta > -1.0) {
        return Err(DiveError::domain(
            "s_minus_from_rho",
            format!("need rho > 0, gamma > 0, -1 < delta <= 0 (got {rho}, {gamma}, {delta})"),
        ));
    }
    let rh = rho * (1.0 + delta);
    // sin θ̃_max = −cos θ_max is the negative root of (γ − δ)z² − 2ρ̂z − γ
    let c = gamma / (rh + (rh * rh + gamma * (gamma - delta)).sqrt());
    let s2 = (1.0 - c) * (1.0 + c) + c * c * delta / gamma;
    if !(s2 > 0.0) {
        return Err(DiveError::Separatrix(format!(
            "rho = {rho} does not reach beyond the separatrix (s_minus^2 = {s2:e})"
        )));
    }
    Ok(s2.sqrt())
}

fn gamma_delta(d: &DimensionlessParams, band: &TiltBand) -> Result<(f64, f64)> {
    let (gamma, delta) = (d.gamma, d.delta);
    if !(gamma > 0.0) || !(delta <= 0.0 && delta > -1.0) {
        return Err(DiveError::domain("gen_planner", format!("gamma = {gamma}, delta = {delta}")));
    }
    if (band.nu - delta / gamma).abs() > 1e-12 * (1.0 + band.nu.abs()) {
        return Err(DiveError::InvalidParams(format!("band nu = {} but delta/gamma = {}", band.nu, delta / gamma)));
    }
    if d.rho != 0.0 {
        let needed = rho_hat(band, gamma, delta) / (1.0 + delta);
        if (d.rho.abs() - needed).abs() > 1e-9 * needed.max(1.0) {
            return Err(DiveError::InvalidParams(format!(
                "rotor rho = {} is inconsistent with s_minus = {} (needs {needed})",
                d.rho, band.s_minus
            )));
        }
    }
    Ok((gamma, delta))
}

/// Twist-stage period and somersault per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistStage {
    pub p3_hat: f64,
    pub phi3: f64,
}

/// P̂₃ from its Legendre form and Φ₃ from its defining integral.
pub fn twist_period_and_somersault(band: &TiltBand, gamma: f64) -> Result<TwistStage> {
    band.check_off_separatrix("twist_period_and_somersault")?;
    let delta = band.nu * gamma;
    Ok(TwistStage {
        p3_hat: twist_period_legendre(band, gamma)?,
        phi3: quad_defining_integral(DefiningIntegral::TwistSomersault { gamma, delta, s_minus: band.s_minus })?.value,
    })
}

/// γP̂₃ = 8K(k²)/((s₊ + s₋)√(1 − ν)).
pub fn twist_period_legendre(band: &TiltBand, gamma: f64) -> Result<f64> {
    band.check_off_separatrix("twist_period_legendre")?;
    let k = band.twist_modulus();
    let m = k * k;
    if m > 1.0 - 1e-15 {
        return Err(DiveError::Separatrix(format!("twist modulus k^2 = {m} at the separatrix")));
    }
    Ok(8.0 * ellip_k(m)? / (gamma * (band.s_plus + band.s_minus) * (1.0 - band.nu).sqrt()))
}

fn twist_pi_difference(band: &TiltBand) -> Result<f64> {
    let (sp, sm) = (band.s_plus, band.s_minus);
    let k = band.twist_modulus();
    let n_plus = k * (1.0 + sm) / (1.0 - sm);
    let n_minus = k * (1.0 - sm) / (1.0 + sm);
    let pi_diff = ellip_pi(n_minus, k * k)? - ellip_pi(n_plus, k * k)?;
    Ok(8.0 / ((sp + sm) * (1.0 - band.nu).sqrt()) * pi_diff)
}

/// Φ₃ = P̂₃ + s₋·8(Π(n₋, k²) − Π(n₊, k²))/((s₊ + s₋)√(1 − ν)),
/// n± = k(1 ± s₋)/(1 ∓ s₋).
pub fn twist_somersault_legendre(band: &TiltBand, gamma: f64) -> Result<f64> {
    Ok(twist_period_legendre(band, gamma)? + band.s_minus * twist_pi_difference(band)?)
}

/// The Π-difference form without the factor s₋.
pub fn twist_somersault_legendre_unscaled(band: &TiltBand, gamma: f64) -> Result<f64> {
    Ok(twist_period_legendre(band, gamma)? + twist_pi_difference(band)?)
}

/// Scaled duration of the rotor-on stage, by quadrature.
pub fn t2_general(band: &TiltBand, d: &DimensionlessParams) -> Result<f64> {
    let (gamma, delta) = gamma_delta(d, band)?;
    let rho = rho_hat(band, gamma, delta) / (1.0 + delta);
    Ok(quad_defining_integral(DefiningIntegral::T2General { gamma, delta, rho })?.value)
}

/// Somersault φ₂ = φ̃₂ − π/2 of the rotor-on stage, by quadrature.
pub fn phi2_general(band: &TiltBand, d: &DimensionlessParams) -> Result<f64> {
    let (gamma, delta) = gamma_delta(d, band)?;
    let rho = rho_hat(band, gamma, delta) / (1.0 + delta);
    Ok(quad_defining_integral(DefiningIntegral::PhiTilde2General { gamma, delta, rho })?.value - FRAC_PI_2)
}

fn printed_modulus_sq(band: &TiltBand) -> Result<(f64, f64)> {
    let (sm, nu) = (band.s_minus, band.nu);
    let q = sm * sm * (1.0 - nu) + nu;
    if !(q > 0.0) {
        return Err(DiveError::domain("gen_planner", format!("s_minus^2 (1 - nu) + nu = {q:e} <= 0")));
    }
    let m = (1.0 / (sm * sm) - 1.0) * q / ((2.0 - sm * sm) * (1.0 - nu));
    if !(0.0..1.0).contains(&m) {
        return Err(DiveError::domain("gen_planner", format!("k^2 = {m} outside [0, 1)")));
    }
    Ok((m, q))
}

/// γT̂₂ = 2k K(k²)/√(s₋²(1 − ν) + ν), with the usual k².
/// Defined only where s₋²(1 − ν) + ν > 0.
pub fn t2_general_legendre(band: &TiltBand, gamma: f64) -> Result<f64> {
    let (m, q) = printed_modulus_sq(band)?;
    Ok(2.0 * m.sqrt() * ellip_k(m)? / (gamma * q.sqrt()))
}

/// γT̂₂ = K(k²)/(k√(s₋²(1 − ν) + ν)).
pub fn t2_general_legendre_unscaled(band: &TiltBand, gamma: f64) -> Result<f64> {
    let (m, q) = printed_modulus_sq(band)?;
    Ok(ellip_k(m)? / (gamma * m.sqrt() * q.sqrt()))
}

/// φ̃₂ = T̂₂ + f₊Π(n₊, k²) + f₋Π(n₋, k²) with
/// g = s₋√((1 − s₋²)(2 − s₋²)(1 − ν)), f± = g(1 − s₋² ∓ √((1 − s₋²)(1 − ν))),
/// n± = 1 − s₋⁻² ± s₋⁻²√((1 − s₋²)/(1 − ν)); returned as φ₂ = φ̃₂ − π/2.
pub fn phi2_general_legendre_fpm(band: &TiltBand, d: &DimensionlessParams) -> Result<f64> {
    let (gamma, _) = gamma_delta(d, band)?;
    let (m, _) = printed_modulus_sq(band)?;
    let (sm, nu) = (band.s_minus, band.nu);
    let c2 = 1.0 - sm * sm;
    let g = sm * (c2 * (2.0 - sm * sm) * (1.0 - nu)).sqrt();
    let root = (c2 * (1.0 - nu)).sqrt();
    let f_plus = g * (c2 - root);
    let f_minus = g * (c2 + root);
    let r = (c2 / (1.0 - nu)).sqrt() / (sm * sm);
    let base = 1.0 - 1.0 / (sm * sm);
    let t2 = t2_general(band, d)?;
    let _ = gamma;
    Ok(t2 + f_plus * ellip_pi(base + r, m)? + f_minus * ellip_pi(base - r, m)? - FRAC_PI_2)
}

/// Rotor-on stage (T̂₂, φ̃₂) by reducing the quartic integrals with its
/// roots z₋ < 0 < r₃ < r₄ to K and Π. Needs δ < 0.
pub fn stage2_root_reduction(band: &TiltBand, d: &DimensionlessParams) -> Result<(f64, f64)> {
    let (gamma, delta) = gamma_delta(d, band)?;
    if !(delta < 0.0) {
        return Err(DiveError::domain("stage2_root_reduction", "needs delta < 0".to_string()));
    }
    let rh = rho_hat(band, gamma, delta);
    let disc = (rh * rh + gamma * (gamma - delta)).sqrt();
    let z_plus = (rh + disc) / (gamma - delta);
    let z_minus = -gamma / (rh + disc);
    let z_d = -2.0 * rh / delta;
    let (r1, r2) = (z_minus, 0.0);
    let (r3, r4) = if z_plus <= z_d { (z_plus, z_d) } else { (z_d, z_plus) };
    let a = (delta * (gamma - delta)).abs();
    let c = 2.0 / (a * (r3 - r1) * (r4 - r2)).sqrt();
    let m = (r2 - r1) * (r4 - r3) / ((r3 - r1) * (r4 - r2));
    let alpha = (r2 - r1) / (r4 - r2);
    let big_k = ellip_k(m)?;
    let third = |p: f64| -> Result<f64> {
        let a_ratio = (r1 - p) / (r4 - p);
        let n = -alpha / a_ratio;
        Ok(c / (r4 - p) * (big_k + (1.0 - a_ratio) / a_ratio * ellip_pi(n, m)?))
    };
    let t2 = c * big_k;
    let phi_tilde = (1.0 + delta) * t2 + (rh - 0.5 * delta) * third(-1.0)? + (rh + 0.5 * delta) * third(1.0)?;
    Ok((t2, phi_tilde))
}

/// Stage times and feasibility for a given orbit.
pub fn stage_times_general(band: &TiltBand, d: &DimensionlessParams, m: f64, n: f64) -> Result<StageTimes> {
    let (gamma, _) = gamma_delta(d, band)?;
    let twist = twist_period_and_somersault(band, gamma)?;
    let t2 = t2_general(band, d)?;
    let phi2 = phi2_general(band, d)?;
    let reps = n - 0.5;
    let that1 = 0.5 * (2.0 * PI * m - 2.0 * phi2 - twist.phi3 * reps);
    Ok(StageTimes {
        that1,
        that2: t2,
        that3: twist.p3_hat * reps,
        that_tot: 2.0 * PI * m + 2.0 * (t2 - phi2) + (twist.p3_hat - twist.phi3) * reps,
        phi2,
        p3_hat: twist.p3_hat,
        phi3_period: twist.phi3,
        feasible: that1 >= 0.0,
    })
}

/// Smallest s₋ whose twist-stage parameter k² stays below 1 − margin.
pub fn s_minus_floor(nu: f64) -> Result<f64> {
    let target = 1.0 - SEPARATRIX_MARGIN;
    let f = |s: f64| -> Result<f64> {
        let k = TiltBand::from_s_minus(s, nu)?.twist_modulus();
        Ok(target - k * k)
    };
    if f(1e-300)? >= 0.0 {
        return Ok(0.0);
    }
    brent(f, 1e-300, S_MINUS_HI, RootOptions { x_tol: 1e-16, max_iter: 400 })
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let ratio = (hi / lo).powf(1.0 / n as f64);
    (0..=n).map(move |i| if i == n { hi } else { lo * ratio.powi(i as i32) })
}

/// First sign change of `f` on a geometric grid over [lo, hi], refined by Brent.
fn first_crossing<F>(f: F, lo: f64, hi: f64) -> Result<(f64, usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut prev: Option<(f64, f64)> = None;
    let mut found = None;
    let mut crossings = 0;
    for s in geometric_grid(lo, hi, SCAN_POINTS) {
        let v = f(s)?;
        if let Some((ps, pv)) = prev {
            if pv.signum() != v.signum() || v == 0.0 {
                crossings += 1;
                if found.is_none() {
                    found = Some((ps, s));
                }
            }
        }
        prev = Some((s, v));
    }
    let (a, b) = found.ok_or_else(|| DiveError::NoRoot(format!("no sign change for s_minus in [{lo:e}, {hi}]")))?;
    Ok((brent(&f, a, b, RootOptions::default())?, crossings))
}

/// Scaled total time of the dive whose twisting orbit has minimal tilt s₋.
pub fn total_time_general(s_minus: f64, m: f64, n: f64, gamma: f64, delta: f64) -> Result<f64> {
    let band = TiltBand::from_s_minus(s_minus, delta / gamma)?;
    let d = DimensionlessParams::new(gamma, delta, 0.0);
    Ok(stage_times_general(&band, &d, m, n)?.that_tot)
}

/// s₋ that satisfies the master equation for the requested total time.
///
/// The search starts at the minimal tilt, since smaller s₋ leave no room for
/// stage 1. T̂_tot is not monotone in s₋ for asymmetric bodies; the smallest
/// solution is returned together with the number of sign changes seen.
pub fn solve_s_minus_for_ttot(that_tot: f64, m: f64, n: f64, gamma: f64, delta: f64) -> Result<(f64, usize)> {
    let lo = min_tilt_general(m, n, gamma, delta)?;
    let g = |s: f64| -> Result<f64> { Ok(total_time_general(s, m, n, gamma, delta)? - that_tot) };
    match first_crossing(g, lo, S_MINUS_HI) {
        Err(DiveError::NoRoot(_)) => {
            let mut least = f64::INFINITY;
            for s in geometric_grid(lo, S_MINUS_HI, SCAN_POINTS) {
                least = least.min(g(s)? + that_tot);
            }
            Err(DiveError::NoRoot(format!(
                "scaled total time {that_tot} is out of reach: feasible dives need at least {least:.6} \
                 (minimal tilt s_minus = {lo:e})"
            )))
        }
        r => r,
    }
}

/// Smallest s₋ for which `n` twists fit (T̂₁ = 0).
pub fn min_tilt_general(m: f64, n: f64, gamma: f64, delta: f64) -> Result<f64> {
    let nu = delta / gamma;
    let lo = s_minus_floor(nu)?.max(1e-9);
    let d = DimensionlessParams::new(gamma, delta, 0.0);
    let f = |s: f64| -> Result<f64> {
        let band = TiltBand::from_s_minus(s, nu)?;
        Ok(stage_times_general(&band, &d, m, n)?.that1)
    };
    if f(lo)? >= 0.0 {
        return Ok(lo);
    }
    first_crossing(f, lo, S_MINUS_HI).map(|(s, _)| s)
}

/// Plans a dive for a tri-axial body with prescribed l.
pub fn plan_dive_general(req: &DiveRequest) -> Result<DivePlan> {
    req.validate()?;
    let d = derive_dimensionless(&req.body);
    if !(d.delta < 0.0) {
        return Err(DiveError::InvalidParams("general planner needs I1 < I2 (delta < 0)".to_string()));
    }
    let that_tot = req.scaled_total_time();
    let (s_minus, crossings) = match solve_s_minus_for_ttot(that_tot, req.m, req.n, d.gamma, d.delta) {
        Ok(r) => r,
        Err(DiveError::NoRoot(reason)) | Err(DiveError::Separatrix(reason)) => {
            return Ok(unsolved_plan(PlannerKind::General, req, reason))
        }
        Err(e) => return Err(e),
    };
    let band = TiltBand::from_s_minus(s_minus, d.delta / d.gamma)?;
    let rho = rho_from_s_minus(s_minus, d.gamma, d.delta)?;
    let times = stage_times_general(&band, &d.with_rho(0.0), req.m, req.n)?;
    let mut warnings = Vec::new();
    if crossings > 1 {
        warnings.push(format!("master equation has {crossings} solutions in s_minus; the smallest tilt was taken"));
    }
    Ok(assemble_plan(PlannerKind::General, req, req.body, band.s_plus, s_minus, rho, times, warnings))
}

/// Legendre forms of the general case against their defining integrals.
pub fn closed_form_report() -> Result<Vec<ClosedFormCheck>> {
    let mut p3 = ClosedFormCheck::new("general P3 = 8K/(gamma (s+ + s-) sqrt(1-nu))");
    let mut phi3 = ClosedFormCheck::new("general Phi3 with factor s- on the Pi difference");
    let mut phi3_raw = ClosedFormCheck::new("general Phi3 without factor s-");
    let mut t2 = ClosedFormCheck::new("general T2 = 2kK/(gamma sqrt(s-^2(1-nu)+nu))");
    let mut t2_raw = ClosedFormCheck::new("general T2 = K/(k gamma sqrt(s-^2(1-nu)+nu))");
    let mut roots = ClosedFormCheck::new("general (T2, phi2) by root reduction");
    let mut fpm = ClosedFormCheck::new("general phi2 from f+-, n+- coefficients");
    let gamma = 19.0;
    for &delta in &[-0.1, -0.4, -0.8] {
        let nu = delta / gamma;
        let d = DimensionlessParams::new(gamma, delta, 0.0);
        for i in 0..=17 {
            let s = 0.05 + 0.05 * i as f64;
            let band = TiltBand::from_s_minus(s, nu)?;
            let p3_quad = quad_defining_integral(DefiningIntegral::TwistPeriod { gamma, delta, s_minus: s })?.value;
            let twist = twist_period_and_somersault(&band, gamma)?;
            p3.record(s, twist_period_legendre(&band, gamma)?, p3_quad);
            phi3.record(s, twist_somersault_legendre(&band, gamma)?, twist.phi3);
            phi3_raw.record(s, twist_somersault_legendre_unscaled(&band, gamma)?, twist.phi3);
            let t2_quad = t2_general(&band, &d)?;
            let phi2_quad = phi2_general(&band, &d)?;
            match t2_general_legendre(&band, gamma) {
                Ok(v) => t2.record(s, v, t2_quad),
                Err(_) => t2.record_undefined(),
            }
            match t2_general_legendre_unscaled(&band, gamma) {
                Ok(v) => t2_raw.record(s, v, t2_quad),
                Err(_) => t2_raw.record_undefined(),
            }
            let (t2_r, phi_tilde_r) = stage2_root_reduction(&band, &d)?;
            let worst = if (t2_r - t2_quad).abs() > (phi_tilde_r - FRAC_PI_2 - phi2_quad).abs() {
                (t2_r, t2_quad)
            } else {
                (phi_tilde_r - FRAC_PI_2, phi2_quad)
            };
            roots.record(s, worst.0, worst.1);
            match phi2_general_legendre_fpm(&band, &d) {
                Ok(v) => fpm.record(s, v, phi2_quad),
                Err(_) => fpm.record_undefined(),
            }
        }
    }
    Ok(vec![p3, phi3, phi3_raw, t2, t2_raw, roots, fpm])
}
