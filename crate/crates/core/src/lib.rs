//! Simulation and verification kernel for stochastic contact Hamiltonian
//! systems.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! * [`expr`]: a small expression language with exact symbolic derivatives
//!   and a compiled evaluation tape;
//! * [`geometry`]: Darboux and Sasaki–Einstein charts, contact Hamiltonian
//!   vector fields, the Jacobi bracket and integrability checks;
//! * [`flow`]: seeded Brownian paths and Stratonovich integrators that carry
//!   the flow Jacobian and conformal factor along;
//! * [`verify`]: contact-defect, conformal-factor, convergence and ensemble
//!   checks;
//! * [`catalog`]: ready-made example systems and the action–angle map.

#![no_std]

extern crate alloc;

pub mod catalog;
pub mod error;
pub mod expr;
pub mod flow;
pub mod geometry;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{parse, EvalContext, Expr, Tape};
pub use flow::{BrownianPath, Scheme, SdeSystem};
pub use geometry::{Chart, HamiltonianSystem};
