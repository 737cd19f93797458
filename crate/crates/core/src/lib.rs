//! Semi-Lagrangian solvers for one-dimensional dispersive conservation
//! laws u_t + f(u) u_x + nu u_xxx = 0 on the periodic torus, with cubic
//! spline / Hermite interpolation and certified dispersive translation
//! operators, plus the verification and convergence harness driving them.

pub mod elliptic;
mod error;
pub mod flux;
pub mod harness;
pub mod interp;
pub mod lambda;
pub mod norms;
pub mod stepper;
pub mod torus;
pub mod trig;

pub use error::{Error, Result};
