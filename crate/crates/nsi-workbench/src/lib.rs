//! Constructive workbench for axisymmetric weak solutions of the
//! Navier-Stokes inequality.
//!
//! The crate builds the objects behind such solutions as closed-form,
//! certifiable constructions: smooth cutoff functions on rectangles with
//! positive azimuthal Laplacian near the edges, structures `(v, f, phi)` and
//! their axisymmetric lifts, the pressure of an axisymmetric field by
//! reduction to a planar integral with an angular kernel, staged solutions
//! tracking a prescribed nonincreasing energy profile, and the iterated-map
//! geometry of Cantor-supported blow-up towers. Every construction comes with
//! pointwise and quadrature certification of the inequalities it claims.
//!
//! Entry points:
//! - [`cutoff::build_cutoff`] / [`cutoff::structure_recipe`]: certified cutoffs and structures;
//! - [`axisym::AxisymField`]: the lift `u[v, f]` and its cylindrical calculus;
//! - [`pressure::PressureEvaluator`]: the pressure integral with singularity subtraction;
//! - [`energy::synthesize`]: the staged energy-profile solution;
//! - [`verifier`]: pointwise NSI residuals, interval local energy inequality, switching;
//! - [`cantor`]: exact iterated-map geometry, switching schedules, dimension fits;
//! - [`cli`]: the `nsiw` command surface used by the thin binary.

pub mod error;
pub mod quad;
pub mod curve;
pub mod field;
pub mod cutoff;
pub mod axisym;
pub mod pressure;
pub mod verifier;
pub mod energy;
pub mod cantor;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
