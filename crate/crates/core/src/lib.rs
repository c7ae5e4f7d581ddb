//! Numerical toolkit for scalar Caputo fractional ODEs `D^γ u = f(t, u)`,
//! `0 < γ < 1`.

pub mod asymptotics;
pub mod expr;
pub mod fracops;
pub mod par;
pub mod quad;
mod regress;
pub mod solver;
pub mod specfun;
pub mod verify;
