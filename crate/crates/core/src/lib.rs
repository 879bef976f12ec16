//! Planning and verification of twisting-somersault dives for a rigid body
//! carrying a rotor that can be switched on and off.
//!
//! The crate is organised bottom-up:
//!
//! * [`elliptic`]: complete elliptic integrals and their defining quadratures;
//! * [`dynamics`]: parameter scaling and the equations of motion in three charts;
//! * [`sym_planner`] / [`gen_planner`]: closed-form stage times and the master
//!   equation for the symmetric (I₁ = I₂) and tri-axial bodies;
//! * [`simulator`]: switched-ODE replay of a plan, used as the end-to-end check;
//! * [`phase`]: dynamic/geometric decomposition of the somersault angle;
//! * [`document`] and [`curves`]: the JSON plan format and figure data used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod document;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod gen_planner;
pub mod ode;
pub mod phase;
pub mod plan;
pub mod quad;
pub mod roots;
pub mod simulator;
pub mod sym_planner;

pub use error::{DiveError, Result};
