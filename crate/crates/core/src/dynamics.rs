//! Rigid body with an internal rotor: parameter scaling and equations of motion.
//!
//! Reference configuration: axis 1 is the somersault (lateral) axis, axis 2
//! points out of the chest and carries the rotor momentum `A = (0, h, 0)`,
//! axis 3 is the twist axis. The space-fixed angular momentum is `(l, 0, 0)`.
//!
//! Two Euler-angle charts are supported:
//!
//! * somersault–tilt–twist, `R = R₁(φ) R₂(θ) R₃(ψ)`, body momentum
//!   `L/l = (cos θ cos ψ, −cos θ sin ψ, sin θ)`;
//! * tilde, `R = R₁(φ̃) R₃(θ̃) R₂(ψ̃)`, body momentum
//!   `L/l = (cos θ̃ cos ψ̃, −sin θ̃, cos θ̃ sin ψ̃)`, regular where the first
//!   chart needs a square root to eliminate ψ.
//!
//! Scaled time is `τ = t l / I₁`. Angles are never reduced modulo 2π here.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{DiveError, Result};

/// Closest approach to |θ| = π/2 accepted by the angle charts.
pub const CHART_MARGIN: f64 = 1e-9;

/// Physical parameters of the body and rotor (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyParams {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// Magnitude of the total angular momentum.
    pub l: f64,
    /// Rotor angular velocity.
    pub omega_d: f64,
    /// Rotor moment of inertia about its symmetry axis.
    pub i_d: f64,
}

impl BodyParams {
    pub fn new(i1: f64, i2: f64, i3: f64, l: f64) -> Result<Self> {
        let p = Self { i1, i2, i3, l, omega_d: 0.0, i_d: 0.0 };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rotor(mut self, omega_d: f64, i_d: f64) -> Result<Self> {
        self.omega_d = omega_d;
        self.i_d = i_d;
        self.validate()?;
        Ok(self)
    }

    /// Same body with the rotor momentum set to `h`. Keeps `i_d` when it is
    /// positive and adjusts `omega_d`; otherwise uses a unit rotor inertia.
    pub fn with_h(mut self, h: f64) -> Self {
        if self.i_d <= 0.0 {
            self.i_d = 1.0;
        }
        self.omega_d = h / self.i_d;
        self
    }

    pub fn with_l(mut self, l: f64) -> Self {
        self.l = l;
        self
    }

    /// Rotor momentum h = ω_d I_d.
    pub fn h(&self) -> f64 {
        self.omega_d * self.i_d
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.i1, self.i2, self.i3, self.l, self.omega_d, self.i_d];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(DiveError::InvalidParams("non-finite body parameter".into()));
        }
        if self.i1 <= 0.0 || self.i2 <= 0.0 || self.i3 <= 0.0 {
            return Err(DiveError::InvalidParams(format!(
                "moments of inertia must be positive, got ({}, {}, {})",
                self.i1, self.i2, self.i3
            )));
        }
        if self.l <= 0.0 {
            return Err(DiveError::InvalidParams(format!("angular momentum l = {} must be positive", self.l)));
        }
        if self.i_d < 0.0 {
            return Err(DiveError::InvalidParams(format!("rotor inertia {} must be non-negative", self.i_d)));
        }
        Ok(())
    }

    /// Planning needs I₃ < I₁ ≤ I₂: somersault about the middle (or
    /// degenerate largest) axis.
    pub fn check_planner_regime(&self) -> Result<()> {
        self.validate()?;
        if !(self.i3 < self.i1 && self.i1 <= self.i2) {
            return Err(DiveError::InvalidParams(format!(
                "planner requires I3 < I1 <= I2, got ({}, {}, {})",
                self.i1, self.i2, self.i3
            )));
        }
        Ok(())
    }
}

/// Dimensionless parameters of the scaled equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// I₁/I₂ − 1
    pub delta: f64,
    /// I₁/I₃ − 1
    pub gamma: f64,
    /// h/l, signed
    pub rho: f64,
    /// ρ(1 + δ)
    pub rho_hat: f64,
    /// ρ/γ
    pub beta: f64,
    /// δ/γ
    pub nu: f64,
    /// I₁/l in seconds: t = τ · time_scale.
    pub time_scale: f64,
}

impl DimensionlessParams {
    /// Scaled parameters without a physical time unit (`time_scale = 1`).
    pub fn new(gamma: f64, delta: f64, rho: f64) -> Self {
        Self { delta, gamma, rho, rho_hat: rho * (1.0 + delta), beta: rho / gamma, nu: delta / gamma, time_scale: 1.0 }
    }

    /// Same body with a different (signed) rotor strength.
    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, rho_hat: rho * (1.0 + self.delta), beta: rho / self.gamma, ..*self }
    }

    pub fn rotor_off(&self) -> Self {
        self.with_rho(0.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.delta == 0.0
    }

    pub fn is_rotor_off(&self) -> bool {
        self.rho == 0.0
    }

    pub fn to_scaled_time(&self, t: f64) -> f64 {
        t / self.time_scale
    }

    pub fn to_physical_time(&self, tau: f64) -> f64 {
        tau * self.time_scale
    }

    /// diag(1, 1 + δ, 1 + γ) = I₁ I⁻¹
    pub(crate) fn scaled_inverse_inertia(&self) -> Vector3<f64> {
        Vector3::new(1.0, 1.0 + self.delta, 1.0 + self.gamma)
    }
}

pub fn derive_dimensionless(p: &BodyParams) -> DimensionlessParams {
    let delta = p.i1 / p.i2 - 1.0;
    let gamma = p.i1 / p.i3 - 1.0;
    let rho = p.h() / p.l;
    DimensionlessParams { time_scale: p.i1 / p.l, ..DimensionlessParams::new(gamma, delta, rho) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    SomersaultTiltTwist,
    Tilde,
}

/// Euler angles in one of the two charts. Angles are unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleState {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub convention: Convention,
}

/// Time derivatives of an [`AngleState`] with respect to scaled time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRates {
    pub dphi: f64,
    pub dtheta: f64,
    pub dpsi: f64,
}

impl AngleState {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi, convention: Convention::SomersaultTiltTwist }
    }

    pub fn tilde(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi, convention: Convention::Tilde }
    }

    fn check_chart(&self) -> Result<()> {
        if !(self.theta.abs() < std::f64::consts::FRAC_PI_2 - CHART_MARGIN) {
            return Err(DiveError::ChartSingularity { theta: self.theta.abs(), margin: CHART_MARGIN });
        }
        Ok(())
    }

    /// Unit body-frame angular momentum L/l.
    pub fn unit_momentum(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.psi.sin_cos();
        match self.convention {
            Convention::SomersaultTiltTwist => Vector3::new(ct * cp, -ct * sp, st),
            Convention::Tilde => Vector3::new(ct * cp, -st, ct * sp),
        }
    }

    /// Rotation from body to space frame.
    pub fn rotation(&self) -> Matrix3<f64> {
        match self.convention {
            Convention::SomersaultTiltTwist => rot1(self.phi) * rot2(self.theta) * rot3(self.psi),
            Convention::Tilde => rot1(self.phi) * rot3(self.theta) * rot2(self.psi),
        }
    }

    /// Somersault–tilt–twist angles of the same orientation. The new φ and ψ
    /// are unwrapped to lie within π of `reference`'s.
    pub fn to_somersault_tilt_twist(&self, reference: &AngleState) -> AngleState {
        let r = self.rotation();
        let theta = r[(0, 2)].clamp(-1.0, 1.0).asin();
        let psi = (-r[(0, 1)]).atan2(r[(0, 0)]);
        let phi = (-r[(1, 2)]).atan2(r[(2, 2)]);
        AngleState::new(unwrap_near(phi, reference.phi), theta, unwrap_near(psi, reference.psi))
    }

    /// Momentum state with the given physical l and rotor momentum h.
    pub fn to_momentum(&self, l: f64, h: f64) -> MomentumState {
        MomentumState { l: self.unit_momentum() * l, a_int: Vector3::new(0.0, h, 0.0) }
    }
}

/// Somersault–tilt–twist (θ, ψ) of a unit momentum vector, with ψ unwrapped
/// towards `psi_ref`.
pub fn tilt_twist_from_momentum(l_hat: &Vector3<f64>, psi_ref: f64) -> (f64, f64) {
    let theta = l_hat[2].clamp(-1.0, 1.0).asin();
    let psi = (-l_hat[1]).atan2(l_hat[0]);
    (theta, unwrap_near(psi, psi_ref))
}

/// `angle + 2πk` closest to `reference`.
pub fn unwrap_near(angle: f64, reference: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    angle + two_pi * ((reference - angle) / two_pi).round()
}

fn rot1(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot2(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot3(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Body-frame angular momentum and the internal rotor momentum (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumState {
    pub l: Vector3<f64>,
    pub a_int: Vector3<f64>,
}

impl MomentumState {
    pub fn new(l: Vector3<f64>, h: f64) -> Self {
        Self { l, a_int: Vector3::new(0.0, h, 0.0) }
    }
}

/// Scaled equations in the somersault–tilt–twist chart.
pub fn eom_angles(s: &AngleState, d: &DimensionlessParams) -> Result<AngleRates> {
    if s.convention != Convention::SomersaultTiltTwist {
        return Err(DiveError::domain("eom_angles", "state is in the tilde chart"));
    }
    s.check_chart()?;
    let (st, ct) = s.theta.sin_cos();
    let (sp, cp) = s.psi.sin_cos();
    let DimensionlessParams { delta, gamma, rho_hat, .. } = *d;
    Ok(AngleRates {
        dphi: 1.0 + delta * sp * sp + rho_hat * sp / ct,
        dtheta: -delta * ct * cp * sp - rho_hat * cp,
        dpsi: gamma * st - delta * st * sp * sp - rho_hat * (st / ct) * sp,
    })
}

/// Scaled equations in the tilde chart.
pub fn eom_tilde_angles(s: &AngleState, d: &DimensionlessParams) -> Result<AngleRates> {
    if s.convention != Convention::Tilde {
        return Err(DiveError::domain("eom_tilde_angles", "state is in the somersault-tilt-twist chart"));
    }
    s.check_chart()?;
    let (st, ct) = s.theta.sin_cos();
    let (sp, cp) = s.psi.sin_cos();
    let DimensionlessParams { delta, gamma, rho_hat, .. } = *d;
    Ok(AngleRates {
        dphi: 1.0 + gamma * sp * sp,
        dtheta: gamma * ct * sp * cp,
        dpsi: -rho_hat + st * (gamma * sp * sp - delta),
    })
}

/// Euler equations L̇ = L × Ω with Ω = I⁻¹(L − A), physical units.
pub fn eom_momentum(s: &MomentumState, p: &BodyParams) -> Vector3<f64> {
    let inv = Vector3::new(1.0 / p.i1, 1.0 / p.i2, 1.0 / p.i3);
    let omega = (s.l - s.a_int).component_mul(&inv);
    s.l.cross(&omega)
}

/// Scaled Euler equations for the unit momentum L/l: dL̂/dτ = L̂ × Ω̂ with
/// Ω̂ = diag(1, 1 + δ, 1 + γ)(L̂ − (0, ρ, 0)).
pub fn eom_momentum_scaled(l_hat: &Vector3<f64>, d: &DimensionlessParams) -> Vector3<f64> {
    l_hat.cross(&scaled_angular_velocity(l_hat, d))
}

pub(crate) fn scaled_angular_velocity(l_hat: &Vector3<f64>, d: &DimensionlessParams) -> Vector3<f64> {
    (l_hat - Vector3::new(0.0, d.rho, 0.0)).component_mul(&d.scaled_inverse_inertia())
}

/// Scaled energy I₁/l² · ½(L − A)ᵀ I⁻¹ (L − A).
pub trait ScaledEnergy {
    fn scaled_energy(&self, d: &DimensionlessParams) -> f64;
}

impl ScaledEnergy for AngleState {
    fn scaled_energy(&self, d: &DimensionlessParams) -> f64 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, _) = self.psi.sin_cos();
        match self.convention {
            Convention::SomersaultTiltTwist => {
                0.5 * (1.0 + d.gamma * st * st + d.delta * ct * ct * sp * sp)
                    + 0.5 * d.rho_hat * (d.rho + 2.0 * ct * sp)
            }
            Convention::Tilde => 0.5 * ((1.0 + d.gamma * sp * sp) * ct * ct + (1.0 + d.delta) * (d.rho + st).powi(2)),
        }
    }
}

impl ScaledEnergy for MomentumState {
    /// Uses |L| as the momentum scale; `d.rho` is ignored in favour of the
    /// state's own rotor momentum.
    fn scaled_energy(&self, d: &DimensionlessParams) -> f64 {
        let l = self.l.norm();
        let rel = (self.l - self.a_int) / l;
        0.5 * rel.dot(&rel.component_mul(&d.scaled_inverse_inertia()))
    }
}

/// Scaled energy of the unit momentum vector `l_hat` with the rotor strength in `d`.
pub fn energy_unit(l_hat: &Vector3<f64>, d: &DimensionlessParams) -> f64 {
    let rel = l_hat - Vector3::new(0.0, d.rho, 0.0);
    0.5 * rel.dot(&rel.component_mul(&d.scaled_inverse_inertia()))
}

pub fn energy<S: ScaledEnergy>(s: &S, d: &DimensionlessParams) -> f64 {
    s.scaled_energy(d)
}

/// Tolerance on |sin ψ| − 1 before a value is considered out of band.
const BAND_SLACK: f64 = 1e-12;

/// Solves the symmetric energy relation for sin ψ at tilt θ.
///
/// Returns a domain error when the result exceeds 1 in magnitude, meaning θ
/// is not reachable on the energy level `e`.
pub fn sin_psi_from_energy(theta: f64, e: f64, d: &DimensionlessParams) -> Result<f64> {
    if d.delta != 0.0 {
        return Err(DiveError::domain("sin_psi_from_energy", "requires the symmetric case delta = 0"));
    }
    if d.rho == 0.0 {
        return Err(DiveError::domain("sin_psi_from_energy", "requires the rotor on (rho != 0)"));
    }
    if !(theta.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(DiveError::ChartSingularity { theta: theta.abs(), margin: 0.0 });
    }
    let (st, ct) = theta.sin_cos();
    let v = (e - 0.5 * (1.0 + d.rho * d.rho)) / (d.rho * ct) - d.gamma / (2.0 * d.rho) * st * st / ct;
    if v.abs() > 1.0 + BAND_SLACK {
        return Err(DiveError::domain(
            "sin_psi_from_energy",
            format!("sin(psi) = {v} is out of band; theta = {theta} is unreachable at this energy"),
        ));
    }
    Ok(v.clamp(-1.0, 1.0))
}
