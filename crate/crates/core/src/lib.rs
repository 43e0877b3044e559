//! Numerical laboratory for classical macroeconomic dynamics models.
//!
//! The crate covers three families of computation:
//!
//! - dimensional bookkeeping of stocks (`$`) and flows (`$/s`) in model
//!   relations ([`dims`]);
//! - the Harrod, Harrod-Domar, Phillips, multiplier and long-wave growth
//!   models together with diagnostics that expose their dependence on the
//!   time scale ([`harrod`], [`allen`], [`longwave`]);
//! - Leontief input-output balances in static and differential form, and the
//!   Fredholm/Volterra integral-equation machinery they reduce to
//!   ([`leontief`], [`fredholm`]).
//!
//! All solvers share the linear-ODE core in [`odelin`].

pub mod allen;
pub mod dims;
pub mod fredholm;
pub mod harrod;
pub mod leontief;
mod linalg;
pub mod longwave;
pub mod odelin;

pub use nalgebra::{Complex, DMatrix, DVector};
pub use odelin::{TimeGrid, Trajectory};
