//! Finite-dimensional Stinespring representations of multilinear maps.
//!
//! A k-linear map is given by data
//! `Φ(a_1, …, a_k) = X_0 π_1(a_1) X_1 ⋯ π_k(a_k) X_k`
//! with `π_i` representations of unital matrix *-algebras. This crate
//! evaluates such maps, reduces a representation to a minimal one, and for
//! two minimal representations of the same map builds the intertwiners
//! `T_i` whose polar parts make the slot representations unitarily
//! equivalent.
//!
//! - [`numerics`]: dense complex linear algebra, subspaces, polar decomposition
//! - [`algebra`]: presented algebras, words, representations
//! - [`stinespring`]: the data model, evaluation, equality checking
//! - [`minimality`]: span chains, minimality report, reduction
//! - [`intertwiner`]: generic position, graph operators, intertwiners
//! - [`genlab`]: seeded instance generators with known ground truth
//! - [`format`]: the JSON instance and report schema

pub mod algebra;
pub mod error;
pub mod format;
pub mod genlab;
pub mod intertwiner;
pub mod minimality;
pub mod numerics;
pub mod stinespring;

pub use algebra::{AlgebraElement, AlgebraPresentation, Representation, WordBasis};
pub use error::{Error, Result, Side};
pub use intertwiner::{construct_intertwiners, GenericPositionReport, IntertwinerResult};
pub use minimality::{is_minimal, reduce_to_minimal, MinimalityReport, Reduction};
pub use numerics::{ComplexMatrix, Subspace, TolerancePolicy};
pub use stinespring::{phi_equal, MapInstance, PhiComparison, StinespringData};
