//! Complete elliptic integrals of the first, second and third kind.
//!
//! Every function here takes the *parameter* `m = k²`, never the modulus `k`.
//! The characteristic `n` of the third kind follows the convention
//!
//! ```text
//! Π(n, m) = ∫₀^{π/2} dθ / ((1 − n sin²θ) √(1 − m sin²θ))
//! ```
//!
//! Values are computed from Carlson's symmetric forms. The [`defining`]
//! submodule evaluates the same quantities (and the stage integrals of the
//! planners) by direct quadrature and is kept independent of this path.

mod carlson;
pub mod defining;

use std::f64::consts::FRAC_PI_2;

use crate::error::{DiveError, Result};

pub use defining::{quad_defining_integral, DefiningIntegral};

/// A validated (parameter, characteristic) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParam {
    m: f64,
    n: f64,
}

impl EllipticParam {
    /// Parameter only; the characteristic defaults to 0.
    pub fn new(m: f64) -> Result<Self> {
        check_parameter("EllipticParam", m)?;
        Ok(Self { m, n: 0.0 })
    }

    pub fn with_characteristic(m: f64, n: f64) -> Result<Self> {
        check_parameter("EllipticParam", m)?;
        check_characteristic("EllipticParam", n)?;
        Ok(Self { m, n })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Modulus k = √m.
    pub fn modulus(&self) -> f64 {
        self.m.sqrt()
    }

    pub fn k(&self) -> f64 {
        ellip_k(self.m).expect("validated parameter")
    }

    pub fn e(&self) -> f64 {
        ellip_e(self.m).expect("validated parameter")
    }

    pub fn pi(&self) -> f64 {
        ellip_pi(self.n, self.m).expect("validated parameter")
    }
}

fn check_parameter(op: &'static str, m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) {
        return Err(DiveError::domain(op, format!("parameter m = {m} outside [0, 1)")));
    }
    Ok(())
}

fn check_characteristic(op: &'static str, n: f64) -> Result<()> {
    if !(n < 1.0) {
        return Err(DiveError::domain(op, format!("characteristic n = {n} must be < 1")));
    }
    Ok(())
}

/// K(m) for 0 ≤ m < 1. The logarithmic blow-up at m → 1 is reported as a
/// domain error rather than an infinity.
pub fn ellip_k(m: f64) -> Result<f64> {
    check_parameter("ellip_k", m)?;
    if m == 0.0 {
        return Ok(FRAC_PI_2);
    }
    Ok(carlson::rf(0.0, 1.0 - m, 1.0))
}

/// E(m) for 0 ≤ m ≤ 1.
pub fn ellip_e(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(DiveError::domain("ellip_e", format!("parameter m = {m} outside [0, 1]")));
    }
    if m == 0.0 {
        return Ok(FRAC_PI_2);
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let y = 1.0 - m;
    Ok(carlson::rf(0.0, y, 1.0) - m / 3.0 * carlson::rd(0.0, y, 1.0))
}

/// Π(n, m) for n < 1 and 0 ≤ m < 1. Negative characteristics are fine.
pub fn ellip_pi(n: f64, m: f64) -> Result<f64> {
    check_parameter("ellip_pi", m)?;
    check_characteristic("ellip_pi", n)?;
    let k = ellip_k(m)?;
    if n == 0.0 {
        return Ok(k);
    }
    let y = 1.0 - m;
    Ok(k + n / 3.0 * carlson::rj(0.0, y, 1.0, 1.0 - n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trivial_values() {
        assert_eq!(ellip_k(0.0).unwrap(), FRAC_PI_2);
        assert!((ellip_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-16);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
        assert_eq!(ellip_pi(0.0, 0.3).unwrap(), ellip_k(0.3).unwrap());
    }

    #[test]
    fn half_parameter_values() {
        // K(1/2) = Γ(1/4)² / (4√π)
        let k = ellip_k(0.5).unwrap();
        assert!((k - 1.854_074_677_301_371_9).abs() < 1e-15);
        let e = ellip_e(0.5).unwrap();
        assert!((e - 1.350_643_881_047_675_5).abs() < 1e-15);
    }

    #[test]
    fn pi_closed_form_at_zero_parameter() {
        // Π(n, 0) = π / (2√(1 − n))
        for &n in &[-5.0, -0.3, 0.4, 0.99] {
            let v = ellip_pi(n, 0.0).unwrap();
            let exact = PI / (2.0 * (1.0f64 - n).sqrt());
            assert!((v - exact).abs() < 1e-14 * exact, "n = {n}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(ellip_k(1.0).is_err());
        assert!(ellip_k(-1e-3).is_err());
        assert!(ellip_k(f64::NAN).is_err());
        assert!(ellip_e(1.0 + 1e-12).is_err());
        assert!(ellip_pi(1.0, 0.2).is_err());
        assert!(ellip_pi(0.2, 1.0).is_err());
        assert!(EllipticParam::with_characteristic(0.5, 2.0).is_err());
    }

    #[test]
    fn legendre_relation() {
        for i in 1..20 {
            let m = i as f64 / 20.0;
            let lhs = ellip_e(m).unwrap() * ellip_k(1.0 - m).unwrap() + ellip_e(1.0 - m).unwrap() * ellip_k(m).unwrap()
                - ellip_k(m).unwrap() * ellip_k(1.0 - m).unwrap();
            assert!((lhs - FRAC_PI_2).abs() < 1e-12, "m = {m}: {lhs}");
        }
    }

    #[test]
    fn param_methods_match_functions() {
        let p = EllipticParam::with_characteristic(0.495, -0.02).unwrap();
        assert_eq!(p.k(), ellip_k(0.495).unwrap());
        assert_eq!(p.pi(), ellip_pi(-0.02, 0.495).unwrap());
        assert!((p.modulus() * p.modulus() - 0.495).abs() < 1e-16);
    }
}
