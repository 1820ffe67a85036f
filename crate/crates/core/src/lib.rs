//! Nabla calculus on finite time scales and a tube-solution solver for the
//! periodic first-order problem `x^nabla(t) = f(t, x(t))`, `x(a) = x(b)`.
//!
//! The crate is organized bottom-up:
//!
//! - [`timescale`]: bounded time scales realized as finite grids
//! - [`nabla`]: grid functions, nabla derivative, integral and exponential
//! - [`linear_bvp`]: closed-form periodic solution of `x^nabla - x = g`
//! - [`rhs`]: expression DSL and registry for right-hand sides
//! - [`tube`]: tubes `(v, M)`, projection, certificates, maximum principle
//! - [`solver`]: the tube operator and the damped fixed-point solver
//! - [`config`] and [`cli`]: JSON configuration, CSV/JSON output, commands

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod linear_bvp;
pub mod nabla;
pub mod problem;
pub mod rhs;
pub mod solver;
pub mod timescale;
pub mod tube;

pub use error::{Error, Result};
pub use nabla::GridFunction;
pub use problem::Problem;
pub use solver::{solve, SolverConfig, SolverReport};
pub use timescale::{Component, FiniteTimeScale, TimeScaleSpec};
pub use tube::Tube;
