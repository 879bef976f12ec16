//! Dynamic and geometric phase of the somersault angle.
//!
//! Along any path on the unit momentum sphere, L̂·Ω̂ = φ′ + ψ′ sin θ, so
//!
//! ```text
//! Δφ = ∫ L̂·Ω̂ dτ − ∮ sin θ dψ
//! ```
//!
//! The first term is the dynamic phase (2E·τ while the rotor is off), the
//! second the solid angle enclosed between the path and the equator. The
//! functions here evaluate both sides independently from a simulated
//! trajectory: the dynamic phase from the momentum and the per-stage rotor,
//! the solid angle from the geometry of the path, and Δφ from the integrated
//! somersault angle.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dynamics::{scaled_angular_velocity, DimensionlessParams};
use crate::error::{DiveError, Result};
use crate::quad::{integrate, QuadOptions};
use crate::simulator::{State, Trajectory, TrajectorySegment};

/// Endpoint gap on the unit sphere below which a path counts as closed.
pub const LOOP_TOL: f64 = 1e-8;
/// Stop refining the area once a doubling changes it by less than this.
pub const AREA_TOL: f64 = 1e-9;

const INITIAL_DENSITY: f64 = 64.0;
const MAX_POINTS: usize = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDecomposition {
    pub dynamic_phase: f64,
    /// Solid angle relative to the equator, in steradians.
    pub geometric_phase: f64,
    pub total_delta_phi: f64,
    /// Δφ − (dynamic − geometric)
    pub residual: f64,
}

fn unit_momentum(y: &State) -> Vector3<f64> {
    Vector3::new(y[0], y[1], y[2])
}

/// Accepts a path whose endpoints coincide, or whose endpoints both lie on
/// the equator: closing such a path along the equator adds no area.
pub fn check_closed(traj: &Trajectory) -> Result<()> {
    let (Some(a), Some(b)) = (traj.start(), traj.end()) else {
        return Err(DiveError::OpenLoop { gap: f64::INFINITY });
    };
    let gap = (a.l_hat() - b.l_hat()).norm();
    let off_equator = a.y[2].abs().max(b.y[2].abs());
    if gap <= LOOP_TOL || off_equator <= LOOP_TOL {
        Ok(())
    } else {
        Err(DiveError::OpenLoop { gap: gap.min(off_equator) })
    }
}

/// Area between a polyline in (ψ, sin θ) and the equator, by the trapezoid
/// rule. ψ must be unwrapped; no reduction mod 2π is applied.
pub fn path_solid_angle(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum()
}

/// Consecutive runs of dense segments belonging to the same stage.
fn stages(traj: &Trajectory) -> Vec<&[TrajectorySegment]> {
    let mut out = Vec::new();
    let mut rest = traj.segments.as_slice();
    while let Some(first) = rest.first() {
        let len = rest.iter().take_while(|s| s.stage == first.stage).count();
        let (head, tail) = rest.split_at(len);
        out.push(head);
        rest = tail;
    }
    out
}

fn resampled_area(stages: &[&[TrajectorySegment]], density: f64) -> (f64, usize) {
    let mut area = 0.0;
    let mut used = 0;
    for segs in stages {
        let t0 = segs[0].dense.t0;
        let t1 = segs[segs.len() - 1].dense.t1();
        let count = ((t1 - t0) * density).ceil().max(2.0) as usize;
        let mut k = 0;
        let mut points = Vec::with_capacity(count + 1);
        for i in 0..=count {
            let tau = if i == count { t1 } else { t0 + (t1 - t0) * i as f64 / count as f64 };
            while k + 1 < segs.len() && segs[k].dense.t1() < tau {
                k += 1;
            }
            let y = segs[k].dense.eval(tau);
            points.push((y[4], y[2]));
        }
        area += path_solid_angle(&points);
        used += count + 1;
    }
    (area, used)
}

/// Solid angle ∮ sin θ dψ enclosed by the trajectory and the equator.
///
/// The dense output is resampled at uniform τ within each stage and the
/// sampling density doubled until the trapezoid sum settles; the returned
/// value carries one Richardson step.
pub fn solid_angle(traj: &Trajectory) -> Result<f64> {
    check_closed(traj)?;
    let stages = stages(traj);
    if stages.is_empty() {
        return Ok(0.0);
    }
    let mut density = INITIAL_DENSITY;
    let (mut prev, _) = resampled_area(&stages, density);
    loop {
        density *= 2.0;
        let (next, used) = resampled_area(&stages, density);
        let change = next - prev;
        if change.abs() < AREA_TOL {
            return Ok(next + change / 3.0);
        }
        if used > MAX_POINTS {
            return Err(DiveError::QuadratureNonConvergence { estimate: change.abs(), target: AREA_TOL });
        }
        prev = next;
    }
}

/// Scaled L̂·Ω̂ with the rotor strength of the segment.
fn l_dot_omega(y: &State, d: &DimensionlessParams) -> f64 {
    let l = unit_momentum(y);
    l.dot(&scaled_angular_velocity(&l, d))
}

/// ∫ L̂·Ω̂ dτ along the trajectory (∫ L·Ω dt / l in physical units).
pub fn dynamic_phase(traj: &Trajectory, d: &DimensionlessParams) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 64 };
    let mut total = 0.0;
    for seg in &traj.segments {
        let ds = d.with_rho(seg.rho_signed);
        let dense = &seg.dense;
        total += integrate(|tau| l_dot_omega(&dense.eval(tau), &ds), dense.t0, dense.t1(), opts)?.value;
    }
    Ok(total)
}

/// Splits the somersault of a closed trajectory into its dynamic and
/// geometric parts and reports what is left over.
pub fn verify_phase_decomposition(traj: &Trajectory, d: &DimensionlessParams) -> Result<PhaseDecomposition> {
    let geometric_phase = solid_angle(traj)?;
    let dynamic_phase = dynamic_phase(traj, d)?;
    let start = traj.start().expect("closed trajectory has a start");
    let end = traj.end().expect("closed trajectory has an end");
    let total_delta_phi = end.phi() - start.phi();
    Ok(PhaseDecomposition {
        dynamic_phase,
        geometric_phase,
        total_delta_phi,
        residual: total_delta_phi - (dynamic_phase - geometric_phase),
    })
}
