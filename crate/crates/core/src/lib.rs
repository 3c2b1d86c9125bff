//! Exact symbolic toolkit for log-symplectic Poisson structures in local
//! coordinates over the rationals.
//!
//! Variables `x_1..x_{N}` are split into divisor variables (the first `m`)
//! and the rest. Internally all indices are 0-based; polynomial strings and
//! JSON documents are 1-based.
//!
//! * [`ring`]: Laurent polynomials with poles only along divisor variables.
//! * [`exterior`]: forms and multivectors in coordinate, log and `φ` frames.
//! * [`poisson`]: bivectors, the Schouten bracket, Pfaffians, `π♯` and `π♭`.
//! * [`genpos`]: certified t-general position tests.
//! * [`complexes`]: weight-sliced complexes and their exact cohomology.
//! * [`toric`]: toric structures `Π_A` and their certification.
//! * [`cli`]: the `logsymp` command-line front end.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod complexes;
pub mod error;
pub mod exterior;
pub mod fixtures;
pub mod genpos;
pub mod index_set;
pub mod linalg;
pub mod matrix;
pub mod poisson;
pub mod ring;
pub mod toric;

pub use error::{Error, Result};
pub use exterior::{DiffForm, Frame, MultiVector, PhiBasis};
pub use index_set::IndexSet;
pub use poisson::{PoissonStructure, SkewMatrix};
pub use ring::{LaurentPoly, Monomial, Rational, VarSpec};
