use std::f64::consts::{FRAC_PI_2, PI};

use dive_core::elliptic::{ellip_e, ellip_k, ellip_pi};
use proptest::prelude::*;

/// Trapezoid rule on the full period of an even, π-periodic integrand.
/// Converges geometrically for analytic integrands, so it shares nothing
/// with the Carlson path it checks.
fn periodic_quarter(f: impl Fn(f64) -> f64) -> f64 {
    const N: usize = 4096;
    let h = PI / N as f64;
    let sum: f64 = (0..N).map(|j| f(j as f64 * h)).sum();
    0.5 * h * sum
}

fn k_oracle(m: f64) -> f64 {
    periodic_quarter(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt())
}

fn e_oracle(m: f64) -> f64 {
    periodic_quarter(|t| (1.0 - m * t.sin().powi(2)).sqrt())
}

fn pi_oracle(n: f64, m: f64) -> f64 {
    periodic_quarter(|t| {
        let s2 = t.sin().powi(2);
        1.0 / ((1.0 - n * s2) * (1.0 - m * s2).sqrt())
    })
}

fn m_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend((1..10).map(|i| i as f64 / 10.0));
    g.push(0.99);
    g
}

const N_GRID: [f64; 6] = [-5.0, -1.0, -0.1, 0.0, 0.5, 0.9];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn first_and_second_kind_match_trapezoid() {
    for m in m_grid() {
        let k = ellip_k(m).unwrap();
        let e = ellip_e(m).unwrap();
        assert!(rel(k, k_oracle(m)) <= 1e-12, "K({m}) = {k} vs {}", k_oracle(m));
        assert!(rel(e, e_oracle(m)) <= 1e-12, "E({m}) = {e} vs {}", e_oracle(m));
    }
}

#[test]
fn third_kind_matches_trapezoid() {
    for m in m_grid() {
        for n in N_GRID {
            let p = ellip_pi(n, m).unwrap();
            let o = pi_oracle(n, m);
            assert!(rel(p, o) <= 1e-12, "Pi({n}, {m}) = {p} vs {o}");
        }
    }
}

#[test]
fn third_kind_at_zero_characteristic_is_k() {
    for m in m_grid() {
        assert_eq!(ellip_pi(0.0, m).unwrap(), ellip_k(m).unwrap());
    }
}

#[test]
fn known_values() {
    assert_eq!(ellip_k(0.0).unwrap(), FRAC_PI_2);
    // K(1/2) = Γ(1/4)²/(4√π)
    let gamma_quarter = 3.625_609_908_221_908_f64;
    let k_half = gamma_quarter * gamma_quarter / (4.0 * PI.sqrt());
    assert!(rel(ellip_k(0.5).unwrap(), k_half) <= 1e-15);
    // Π(n, 0) = π/(2√(1 − n))
    for n in N_GRID {
        assert!(rel(ellip_pi(n, 0.0).unwrap(), FRAC_PI_2 / (1.0 - n).sqrt()) <= 1e-14);
    }
}

#[test]
fn domain_errors() {
    assert!(ellip_k(1.0).is_err());
    assert!(ellip_k(-0.1).is_err());
    assert!(ellip_e(1.5).is_err());
    assert!(ellip_pi(1.0, 0.5).is_err());
    assert!(ellip_pi(0.5, 1.0).is_err());
    assert!(ellip_k(f64::NAN).is_err());
}

proptest! {
    #[test]
    fn legendre_relation(m in 1e-3f64..0.999) {
        let (k, kp) = (ellip_k(m).unwrap(), ellip_k(1.0 - m).unwrap());
        let (e, ep) = (ellip_e(m).unwrap(), ellip_e(1.0 - m).unwrap());
        prop_assert!((e * kp + ep * k - k * kp - FRAC_PI_2).abs() <= 1e-12);
    }

    #[test]
    fn k_rises_and_e_falls(a in 0.0f64..0.99, b in 0.0f64..0.99) {
        prop_assume!(a < b);
        prop_assert!(ellip_k(a).unwrap() < ellip_k(b).unwrap());
        prop_assert!(ellip_e(a).unwrap() > ellip_e(b).unwrap());
        prop_assert!(ellip_e(a).unwrap() <= ellip_k(a).unwrap());
    }

    #[test]
    fn third_kind_rises_with_characteristic(m in 0.0f64..0.99, a in -10.0f64..0.95, b in -10.0f64..0.95) {
        prop_assume!(a < b);
        prop_assert!(ellip_pi(a, m).unwrap() < ellip_pi(b, m).unwrap());
    }

    #[test]
    fn third_kind_matches_trapezoid_anywhere(m in 0.0f64..0.95, n in -5.0f64..0.9) {
        prop_assert!(rel(ellip_pi(n, m).unwrap(), pi_oracle(n, m)) <= 1e-12);
    }
}
