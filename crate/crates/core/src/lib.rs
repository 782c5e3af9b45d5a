//! Parametric geometry of numbers at desk scale.
//!
//! * [`template`] builds explicit systems block by block, in exact arithmetic.
//! * [`validator`] checks the system axioms on any piecewise-linear map.
//! * [`minima`] computes certified successive minima of the parametrized
//!   convex bodies by lattice enumeration.
//! * [`diagnostics`] reads Dirichlet and Diophantine margins and the exponent
//!   off a system or a minima profile.
//! * [`plot`] renders systems as SVG.

pub mod cli;
pub mod diagnostics;
pub mod minima;
pub mod plot;
pub mod pwl;
pub mod scalar;
pub mod system_file;
pub mod template;
pub mod validator;

pub use pwl::{breakpoints_of, sup_distance, PiecewiseLinearMap};
pub use scalar::{ExactScalar, GapFunction};
pub use template::{build_block, build_system, BetaMode, BuiltSystem, NextBlockRule, TemplateParams};
pub use validator::{validate, AxiomReport, Axiom, Violation};
