//! Curvature, soliton structure, linear stability and resolvent checks for
//! the expanding homogeneous Ricci solitons on nil³, sol³ and nil⁴.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`] / [`field`]: exact coordinate functions (polynomial × exponential
//!   of a linear form) and the vector fields / 1-forms built from them.
//! * [`geometry`] / [`curvature`]: a Lie group encoded by its frame, structure
//!   constants and left-invariant metric, and its Levi-Civita curvature.
//! * [`soliton`]: the soliton vector field, `2Rc + αg + L_X g`, divergence and
//!   nongradience.
//! * [`stability`]: the zeroth-order symbol of the linearised modified flow,
//!   its integrated quadratic form and optimal decay constants.
//! * [`flow`]: homogeneous Ricci flow as an ODE on the metric matrix.
//! * [`resolvent`]: a finite-difference discretisation of the resolvent
//!   problem `(λ − L)u = f` with the cutoff approximants.

pub mod catalog;
pub mod curvature;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod krylov;
pub mod matrix;
pub mod ode;
pub mod reference;
pub mod resolvent;
pub mod sampling;
pub mod scalar;
pub mod soliton;
pub mod stability;
pub mod surd;
pub mod suite;
pub mod symtensor;

pub use num_complex::Complex64;

pub use catalog::{geometry_by_name, soliton_by_name, CatalogEntry};
pub use curvature::CurvatureData;
pub use error::{Error, Result};
pub use expr::ExpPoly;
pub use geometry::{LieGeometry, StructureConstants, ValidationReport};
pub use matrix::Mat;
pub use scalar::{rat, Rational, Ring, Scalar};
pub use soliton::{SolitonStructure, VectorFieldJet};
pub use stability::{FormMode, QuadraticFormPair};
